//! Truncated power series and systems `y = G(x, y)` with non-negative
//! coefficients.

mod expr;
mod matrix;
pub mod poly;
mod series;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::epset::EpSet;
use crate::scalar::Scalar;

pub use expr::{evaluate, Construction, Expr, PsSystem};
pub use matrix::{neumann_check, Matrix, NeumannReport, NeumannVerdict};
pub use series::Series;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PsError {
    #[error("a system needs at least one variable")]
    NoVariables,
    #[error("{variables} variables but {equations} equations")]
    Arity { variables: usize, equations: usize },
    #[error("variable index {0} is not declared")]
    UnknownVariable(usize),
    #[error("negative constant {0}")]
    NegativeConstant(String),
    #[error("argument of {construction} has a nonzero constant term")]
    CompositionAtNonzeroConstant { construction: &'static str },
    #[error("{construction} has spectra only; its coefficients are not computed")]
    UnsupportedCoefficients { construction: &'static str },
    #[error("system is not elementary: {}", .0.join("; "))]
    NotElementary(Vec<String>),
    #[error("hat transform not applicable: {0}")]
    NotApplicable(String),
    #[error("series has negative coefficients")]
    MixedSigns,
}

// Value at the origin and gradient in y.
fn dual<T: Scalar>(e: &Expr<T>, k: usize) -> Result<(T, Vec<T>), PsError> {
    let zero = || vec![T::zero(); k];
    Ok(match e {
        Expr::Const(c) => (c.clone(), zero()),
        Expr::X => (T::zero(), zero()),
        Expr::Var(j) => {
            let mut g = zero();
            g[*j] = T::one();
            (T::zero(), g)
        }
        Expr::Sum(v) => {
            let mut val = T::zero();
            let mut g = zero();
            for s in v {
                let (a, h) = dual(s, k)?;
                val = val + a;
                g.iter_mut().zip(h).for_each(|(x, y)| *x = x.clone() + y);
            }
            (val, g)
        }
        Expr::Product(v) => {
            let mut val = T::one();
            let mut g = zero();
            for s in v {
                let (a, h) = dual(s, k)?;
                // (val, g)·(a, h) = (val·a, g·a + val·h)
                g = g
                    .into_iter()
                    .zip(h)
                    .map(|(x, y)| x * a.clone() + val.clone() * y)
                    .collect();
                val = val * a;
            }
            (val, g)
        }
        Expr::Pow(b, n) => {
            let (a, h) = dual(b, k)?;
            if *n == 0 {
                return Ok((T::one(), zero()));
            }
            let mut an1 = T::one();
            for _ in 1..*n {
                an1 = an1 * a.clone();
            }
            let scale = T::from_count(*n as u64) * an1.clone();
            (an1 * a, h.into_iter().map(|y| y * scale.clone()).collect())
        }
        Expr::Construct { kind, index, arg } => {
            let (a, h) = dual(arg, k)?;
            if !a.is_zero() {
                return Err(PsError::CompositionAtNonzeroConstant { construction: kind.name() });
            }
            let j = Expr::<T>::index_or_positive(index);
            let val = if j.contains(0) { T::one() } else { T::zero() };
            let g = if j.contains(1) { h } else { zero() };
            (val, g)
        }
    })
}

/// `∂G_i/∂y_j` at `x = 0, y = 0`.
pub fn jacobian_at_origin<T: Scalar>(sys: &PsSystem<T>) -> Result<Matrix<T>, PsError> {
    let k = sys.len();
    let rows = sys
        .equations()
        .iter()
        .map(|e| dual(e, k).map(|(_, g)| g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(rows))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryReport {
    pub elementary: bool,
    pub diagnostics: Vec<String>,
}

/// `G(0, 0) = 0` and `J_G(0, 0) = 0`.
pub fn is_elementary<T: Scalar>(sys: &PsSystem<T>) -> ElementaryReport {
    let k = sys.len();
    let mut diagnostics = Vec::new();
    for (i, e) in sys.equations().iter().enumerate() {
        let name = &sys.variables()[i];
        match dual(e, k) {
            Err(err) => diagnostics.push(format!("{}: {}", name, err)),
            Ok((c, g)) => {
                if !c.is_zero() {
                    diagnostics.push(format!("{}: constant term {}", name, c));
                }
                for (j, d) in g.iter().enumerate() {
                    if !d.is_zero() {
                        diagnostics.push(format!(
                            "{}: linear term {}*{} at the origin",
                            name,
                            d,
                            sys.variables()[j]
                        ));
                    }
                }
            }
        }
    }
    ElementaryReport { elementary: diagnostics.is_empty(), diagnostics }
}

/// Unique solution of an elementary system, truncated at `n`.
pub fn fixed_point_solve<T: Scalar>(sys: &PsSystem<T>, n: usize) -> Result<Vec<Series<T>>, PsError> {
    let report = is_elementary(sys);
    if !report.elementary {
        return Err(PsError::NotElementary(report.diagnostics));
    }
    let mut ys = vec![Series::zero(n); sys.len()];
    // Each round fixes at least one more coefficient, and coefficient d of
    // G(y) only reads coefficients below d, so round r can stop at degree r.
    for round in 1..=n + 1 {
        let d = round.min(n);
        let next = sys.apply(&ys, d)?;
        if d == n && next == ys {
            break;
        }
        ys = next;
    }
    Ok(ys.iter().map(|y| y.truncate(n)).collect())
}

/// `Ĝ = (I − J)⁻¹ (G − J·y)` with `J` the Jacobian at the origin.
pub fn hat_transform<T: Scalar>(sys: &PsSystem<T>) -> Result<PsSystem<T>, PsError> {
    let k = sys.len();
    let jac = jacobian_at_origin(sys)?;
    if jac.is_zero() {
        return Ok(sys.clone());
    }
    let inv = match neumann_check(&jac).verdict {
        NeumannVerdict::NonnegInverse(inv) => inv,
        NeumannVerdict::Singular => return Err(PsError::NotApplicable("I - J is singular".into())),
        NeumannVerdict::NegativeEntries(_) => {
            return Err(PsError::NotApplicable("(I - J)^-1 has negative entries".into()))
        }
    };
    let reduced: Vec<Vec<poly::Monomial<T>>> = sys
        .equations()
        .iter()
        .enumerate()
        .map(|(l, e)| {
            let mut terms = poly::expand(e, k);
            terms.retain(|m| match m.linear_var() {
                Some(j) => {
                    debug_assert!(m.coef == *jac.get(l, j));
                    false
                }
                None => true,
            });
            terms
        })
        .collect();
    let equations = (0..k)
        .map(|i| {
            let parts: Vec<(T, Vec<poly::Monomial<T>>)> =
                (0..k).map(|l| (inv.get(i, l).clone(), reduced[l].clone())).collect();
            poly::collect(poly::combine(&parts))
        })
        .collect();
    PsSystem::new(sys.variables().to_vec(), equations)
}

/// Indices `i` with `T_i(x) = 0`, from `k` rounds of lowest-degree
/// propagation starting at 0.
pub fn zero_components<T: Scalar>(sys: &PsSystem<T>) -> BTreeSet<usize> {
    let k = sys.len();
    let mut val: Vec<Option<u64>> = vec![None; k];
    for _ in 0..k {
        val = sys.equations().iter().map(|e| lowest_degree(e, &val)).collect();
    }
    (0..k).filter(|&i| val[i].is_none()).collect()
}

// Lowest degree with a nonzero coefficient; None for the zero series.
fn lowest_degree<T: Scalar>(e: &Expr<T>, val: &[Option<u64>]) -> Option<u64> {
    match e {
        Expr::Const(c) => (!c.is_zero()).then_some(0),
        Expr::X => Some(1),
        Expr::Var(j) => val[*j],
        Expr::Sum(v) => v.iter().filter_map(|s| lowest_degree(s, val)).min(),
        Expr::Product(v) => v.iter().map(|s| lowest_degree(s, val)).sum(),
        Expr::Pow(b, n) => {
            if *n == 0 {
                Some(0)
            } else {
                lowest_degree(b, val).map(|d| d * *n as u64)
            }
        }
        Expr::Construct { index, arg, .. } => {
            let j = Expr::<T>::index_or_positive(index);
            match lowest_degree(arg, val) {
                None => j.contains(0).then_some(0),
                Some(d) => j.min().map(|u| u * d),
            }
        }
    }
}

/// Support of a non-negative series, valid on `[0, degree]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumReport {
    pub set: EpSet,
    pub degree: usize,
}

pub fn spectrum_extract<T: Scalar>(s: &Series<T>) -> Result<SpectrumReport, PsError> {
    if !s.is_nonneg() {
        return Err(PsError::MixedSigns);
    }
    Ok(SpectrumReport { set: s.spectrum(), degree: s.degree() })
}
