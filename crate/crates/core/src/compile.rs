//! Series systems to their spectral set systems.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::epset::EpSet;
use crate::index::IndexSet;
use crate::pseries::{self, Construction, Expr, PsError, PsSystem};
use crate::scalar::Scalar;
use crate::setsys::{least_fixpoint, GammaTerm, SetSysError, SetSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Series(#[from] PsError),
    #[error(transparent)]
    Sets(#[from] SetSysError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileReport {
    pub system: SetSystem,
    /// One line per construction node or auxiliary variable.
    pub notes: Vec<String>,
    /// Descriptions of enumerated index sets in use.
    pub enumerated: Vec<String>,
    /// The first `original_vars` variables are those of the input system.
    pub original_vars: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Term {
    base: EpSet,
    exps: BTreeMap<usize, IndexSet>,
}

impl Term {
    fn unit() -> Self {
        Term { base: EpSet::zero(), exps: BTreeMap::new() }
    }

    fn var(j: usize, e: IndexSet) -> Self {
        if e.is_absent() {
            return Term::unit();
        }
        Term { base: EpSet::zero(), exps: BTreeMap::from([(j, e)]) }
    }

    // None when two enumerated exponent families would have to be added.
    fn times(&self, other: &Term) -> Option<Term> {
        let mut exps = self.exps.clone();
        for (j, e) in &other.exps {
            let merged = match exps.get(j) {
                None => e.clone(),
                Some(d) => match (d, e) {
                    (IndexSet::Periodic(a), IndexSet::Periodic(b)) => IndexSet::Periodic(a.sum(b)),
                    _ => return None,
                },
            };
            exps.insert(*j, merged);
        }
        Some(Term { base: self.base.sum(&other.base), exps })
    }
}

struct Compiler {
    original: usize,
    aux: Vec<Vec<Term>>,
    notes: Vec<String>,
    enumerated: Vec<String>,
}

impl Compiler {
    fn fresh(&mut self, terms: Vec<Term>, why: &str) -> usize {
        let j = self.original + self.aux.len();
        self.notes.push(format!("_t{} introduced for {}", self.aux.len(), why));
        self.aux.push(terms);
        j
    }

    fn expr<T: Scalar>(&mut self, e: &Expr<T>) -> Vec<Term> {
        match e {
            Expr::Const(c) => {
                if c.is_zero() {
                    Vec::new()
                } else {
                    vec![Term::unit()]
                }
            }
            Expr::X => vec![Term { base: EpSet::singleton(1), exps: BTreeMap::new() }],
            Expr::Var(j) => vec![Term::var(*j, IndexSet::single(1))],
            Expr::Sum(v) => merge(v.iter().flat_map(|s| self.expr(s)).collect()),
            Expr::Product(v) => {
                let mut acc = vec![Term::unit()];
                for f in v {
                    let fac = self.expr(f);
                    acc = self.product(acc, fac);
                }
                acc
            }
            Expr::Pow(b, n) => {
                let base = self.expr(b);
                let mut acc = vec![Term::unit()];
                for _ in 0..*n {
                    acc = self.product(acc, base.clone());
                }
                acc
            }
            Expr::Construct { kind, index, arg } => self.construct(*kind, index, arg),
        }
    }

    fn product(&mut self, a: Vec<Term>, b: Vec<Term>) -> Vec<Term> {
        let attempt: Option<Vec<Term>> =
            a.iter().flat_map(|s| b.iter().map(move |t| s.times(t))).collect();
        match attempt {
            Some(terms) => merge(terms),
            None => {
                let z = self.fresh(b, "a product of enumerated exponent families");
                let b = [Term::var(z, IndexSet::single(1))];
                let terms = a.iter().map(|s| s.times(&b[0]).expect("fresh variable")).collect();
                merge(terms)
            }
        }
    }

    fn construct<T: Scalar>(&mut self, kind: Construction, index: &Option<IndexSet>, arg: &Expr<T>) -> Vec<Term> {
        let j = Expr::<T>::index_or_positive(index);
        if let IndexSet::Enumerated(en) = &j {
            self.enumerated.push(format!("{}[{}]", kind, en.name()));
        }
        match kind {
            Construction::DCycle => self.notes.push("DCycle compiled like Cycle: J*arg".into()),
            _ => self.notes.push(format!("{}[{}] compiled as J*arg", kind, j)),
        }
        let inner = self.expr(arg);
        if inner.is_empty() {
            return if j.contains(0) { vec![Term::unit()] } else { Vec::new() };
        }
        if let [t] = inner.as_slice() {
            if t.base == EpSet::zero() && t.exps.len() == 1 {
                let (&v, e) = t.exps.iter().next().unwrap();
                if *e == IndexSet::single(1) {
                    return vec![Term::var(v, j)];
                }
            }
        }
        if inner.iter().all(|t| t.exps.is_empty()) {
            if let IndexSet::Periodic(js) = &j {
                let z = EpSet::union_all(inner.iter().map(|t| &t.base));
                let set = js.star(&z);
                return if set.is_empty() { Vec::new() } else { vec![Term { base: set, exps: BTreeMap::new() }] };
            }
        }
        let z = self.fresh(inner, &format!("the argument of {}", kind));
        vec![Term::var(z, j)]
    }
}

// Unions bases of terms with identical exponent families.
fn merge(terms: Vec<Term>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for t in terms {
        match out.iter_mut().find(|o| o.exps == t.exps) {
            Some(o) => o.base = o.base.union(&t.base),
            None => out.push(t),
        }
    }
    out
}

/// Structural translation `y = G(x, y)` to `Y = Γ(Y)`.
pub fn compile<T: Scalar>(sys: &PsSystem<T>) -> Result<CompileReport, CompileError> {
    let k = sys.len();
    let mut c = Compiler { original: k, aux: Vec::new(), notes: Vec::new(), enumerated: Vec::new() };
    let mut eqs: Vec<Vec<Term>> = sys.equations().iter().map(|e| c.expr(e)).collect();
    let mut variables = sys.variables().to_vec();
    for (n, terms) in std::mem::take(&mut c.aux).into_iter().enumerate() {
        variables.push(format!("_t{}", n));
        eqs.push(terms);
    }
    let total = variables.len();
    let equations = eqs
        .into_iter()
        .map(|terms| {
            terms
                .into_iter()
                .map(|t| {
                    let mut g = GammaTerm::constant(t.base, total);
                    for (j, e) in t.exps {
                        g.exponents[j] = e;
                    }
                    g
                })
                .collect()
        })
        .collect();
    let system = SetSystem::new(variables, equations)?;
    Ok(CompileReport { system, notes: c.notes, enumerated: c.enumerated, original_vars: k })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub agrees: bool,
    /// First `(variable, degree)` where the two sides differ.
    pub first_disagreement: Option<(String, u64)>,
    /// Whether the series side went through the hat transform.
    pub hatted: bool,
}

/// Compares the spectrum of the series solution with the least solution
/// of the compiled set system on `[0, n]`.
pub fn spectral_equivalence_check<T: Scalar>(sys: &PsSystem<T>, n: usize) -> Result<EquivalenceReport, CompileError> {
    let report = compile(sys)?;
    compare_spectra(sys, &report.system, n)
}

/// Compares the series solution of `sys` with the least solution of
/// `sets`, whose first variables correspond to those of `sys`.
pub fn compare_spectra<T: Scalar>(sys: &PsSystem<T>, sets: &SetSystem, n: usize) -> Result<EquivalenceReport, CompileError> {
    let elementary = pseries::is_elementary(sys).elementary;
    let series_sys = if elementary { sys.clone() } else { pseries::hat_transform(sys)? };
    let series = pseries::fixed_point_solve(&series_sys, n)?;
    let truncs = least_fixpoint(sets, n as u64)?;
    for i in 0..sys.len() {
        let spec = pseries::spectrum_extract(&series[i])?.set;
        for d in 0..=n as u64 {
            if spec.contains(d) != truncs[i].contains(d) {
                return Ok(EquivalenceReport {
                    agrees: false,
                    first_disagreement: Some((sys.variables()[i].clone(), d)),
                    hatted: !elementary,
                });
            }
        }
    }
    Ok(EquivalenceReport { agrees: true, first_disagreement: None, hatted: !elementary })
}
