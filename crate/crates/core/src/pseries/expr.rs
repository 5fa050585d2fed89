use std::fmt;

use crate::index::IndexSet;
use crate::scalar::Scalar;

use super::{PsError, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Construction {
    Seq,
    MSet,
    Cycle,
    DCycle,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::Seq => "Seq",
            Construction::MSet => "MSet",
            Construction::Cycle => "Cycle",
            Construction::DCycle => "DCycle",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Right-hand side of a series equation.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Const(T),
    X,
    Var(usize),
    Sum(Vec<Expr<T>>),
    Product(Vec<Expr<T>>),
    Pow(Box<Expr<T>>, u32),
    /// `Θ_J(arg)`; `index == None` means `J = ℙ`.
    Construct { kind: Construction, index: Option<IndexSet>, arg: Box<Expr<T>> },
}

impl<T: Scalar> Expr<T> {
    pub fn constant(c: T) -> Self {
        Expr::Const(c)
    }

    pub fn construct(kind: Construction, index: Option<IndexSet>, arg: Expr<T>) -> Self {
        Expr::Construct { kind, index, arg: Box::new(arg) }
    }

    /// Effective index set of a construction.
    pub fn index_or_positive(index: &Option<IndexSet>) -> IndexSet {
        index.clone().unwrap_or_else(|| IndexSet::Periodic(crate::epset::EpSet::positives()))
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(usize)) {
        match self {
            Expr::Const(_) | Expr::X => {}
            Expr::Var(j) => f(*j),
            Expr::Sum(v) | Expr::Product(v) => v.iter().for_each(|e| e.for_each_var(f)),
            Expr::Pow(e, _) => e.for_each_var(f),
            Expr::Construct { arg, .. } => arg.for_each_var(f),
        }
    }

    pub fn has_vars(&self) -> bool {
        let mut any = false;
        self.for_each_var(&mut |_| any = true);
        any
    }

    fn check_constants(&self) -> Result<(), PsError> {
        match self {
            Expr::Const(c) if c.is_negative_value() => Err(PsError::NegativeConstant(c.to_string())),
            Expr::Const(_) | Expr::X | Expr::Var(_) => Ok(()),
            Expr::Sum(v) | Expr::Product(v) => v.iter().try_for_each(Self::check_constants),
            Expr::Pow(e, _) => e.check_constants(),
            Expr::Construct { arg, .. } => arg.check_constants(),
        }
    }

    fn uses_coefficient_free_node(&self) -> Option<Construction> {
        match self {
            Expr::Const(_) | Expr::X | Expr::Var(_) => None,
            Expr::Sum(v) | Expr::Product(v) => v.iter().find_map(Self::uses_coefficient_free_node),
            Expr::Pow(e, _) => e.uses_coefficient_free_node(),
            Expr::Construct { kind: k @ (Construction::Cycle | Construction::DCycle), .. } => Some(*k),
            Expr::Construct { arg, .. } => arg.uses_coefficient_free_node(),
        }
    }
}

/// Exact coefficients of `expr` up to degree `n`, with `Var(j) ↦ env[j]`.
pub fn evaluate<T: Scalar>(expr: &Expr<T>, env: &[Series<T>], n: usize) -> Result<Series<T>, PsError> {
    Ok(match expr {
        Expr::Const(c) => Series::constant(c.clone(), n),
        Expr::X => Series::x(n),
        Expr::Var(j) => env[*j].truncate(n),
        Expr::Sum(v) => {
            let mut acc = Series::zero(n);
            for e in v {
                acc = acc.add(&evaluate(e, env, n)?);
            }
            acc
        }
        Expr::Product(v) => {
            let mut acc = Series::one(n);
            for e in v {
                acc = acc.mul(&evaluate(e, env, n)?);
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        Expr::Pow(e, k) => evaluate(e, env, n)?.pow(*k),
        Expr::Construct { kind, index, arg } => {
            let a = evaluate(arg, env, n)?;
            if !a.coeff(0).is_zero() {
                return Err(PsError::CompositionAtNonzeroConstant { construction: kind.name() });
            }
            match (kind, index) {
                (Construction::Seq, _) => a.seq(&Expr::<T>::index_or_positive(index)),
                (Construction::MSet, None) => a.mset(),
                (Construction::MSet, Some(j)) => a.mset_restricted(j),
                (Construction::Cycle | Construction::DCycle, _) => {
                    return Err(PsError::UnsupportedCoefficients { construction: kind.name() })
                }
            }
        }
    })
}

/// A system `y = G(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsSystem<T> {
    variables: Vec<String>,
    equations: Vec<Expr<T>>,
}

impl<T: Scalar> PsSystem<T> {
    pub fn new(variables: Vec<String>, equations: Vec<Expr<T>>) -> Result<Self, PsError> {
        if variables.is_empty() {
            return Err(PsError::NoVariables);
        }
        if variables.len() != equations.len() {
            return Err(PsError::Arity { variables: variables.len(), equations: equations.len() });
        }
        for e in &equations {
            e.check_constants()?;
            let mut bad = None;
            e.for_each_var(&mut |j| {
                if j >= variables.len() {
                    bad = Some(j);
                }
            });
            if let Some(j) = bad {
                return Err(PsError::UnknownVariable(j));
            }
        }
        Ok(PsSystem { variables, equations })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn equations(&self) -> &[Expr<T>] {
        &self.equations
    }

    /// Whether coefficients can be computed (no Cycle/DCycle nodes).
    pub fn coefficient_free_node(&self) -> Option<Construction> {
        self.equations.iter().find_map(Expr::uses_coefficient_free_node)
    }

    /// `G(x, y)` truncated at `n`.
    pub fn apply(&self, ys: &[Series<T>], n: usize) -> Result<Vec<Series<T>>, PsError> {
        self.equations.iter().map(|e| evaluate(e, ys, n)).collect()
    }

    /// `G^(iterations)(x, 0)`.
    pub fn iterate(&self, iterations: usize, n: usize) -> Result<Vec<Series<T>>, PsError> {
        let mut ys = vec![Series::zero(n); self.len()];
        for _ in 0..iterations {
            ys = self.apply(&ys, n)?;
        }
        Ok(ys)
    }
}
