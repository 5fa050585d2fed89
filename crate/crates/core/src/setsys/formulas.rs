//! Closed-form minima and gcds of least solutions.

use num_integer::gcd;

use super::{SetSysError, SetSystem};
use crate::index::IndexSet;

/// Minimum of each coordinate of the least solution, `None` for ∅.
///
/// Runs the min-recurrence `m_i = min_t (min base_t + Σ_j min_{u∈E_j} u·m_j)`
/// from all-∞ until it is stationary.
pub fn min_vector(sys: &SetSystem) -> Vec<Option<u64>> {
    let k = sys.len();
    let mut m: Vec<Option<u64>> = vec![None; k];
    // Each round either changes some coordinate or is final; values only
    // decrease once finite, so this terminates.
    loop {
        let next: Vec<Option<u64>> = (0..k)
            .map(|i| {
                sys.equation(i)
                    .iter()
                    .filter_map(|t| {
                        let mut acc = t.base.min()?;
                        for (j, e) in t.exponents.iter().enumerate() {
                            acc += exponent_min_contribution(e, m[j])?;
                        }
                        Some(acc)
                    })
                    .min()
            })
            .collect();
        if next == m {
            return m;
        }
        m = next;
    }
}

// min{u·m : u ∈ E}, with ∞·0 = 0.
fn exponent_min_contribution(e: &IndexSet, m: Option<u64>) -> Option<u64> {
    if e.contains(0) {
        return Some(0);
    }
    Some(e.min()? * m?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QOptions {
    /// Consecutive unchanged elements before an enumerated gcd is accepted.
    pub window: usize,
    /// Maximum number of enumerated elements inspected.
    pub cap: usize,
}

impl Default for QOptions {
    fn default() -> Self {
        QOptions { window: 8, cap: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QReport {
    pub q: Vec<u64>,
    /// `gcd ⋃_u (Γ_{i,u} + u⋆m − m_i)` for each equation `i`.
    pub per_equation: Vec<u64>,
    /// False when an enumerated index set entered the computation.
    pub certified: bool,
}

pub fn q_vector(sys: &SetSystem) -> Result<QReport, SetSysError> {
    q_vector_with(sys, QOptions::default())
}

/// gcd of the shifted least solution, `q_i = gcd_{i →⋆ j} per_equation_j`.
///
/// Needs a basic system without empty coordinates.
pub fn q_vector_with(sys: &SetSystem, opts: QOptions) -> Result<QReport, SetSysError> {
    let class = sys.classify();
    if let Some(i) = class.not_basic_at {
        return Err(SetSysError::NotBasic { var: sys.variables()[i].clone() });
    }
    if !class.empties.is_empty() {
        let names = class.empties.iter().map(|&i| sys.variables()[i].clone()).collect();
        return Err(SetSysError::NotReduced(names));
    }
    let m: Vec<u64> = min_vector(sys).into_iter().map(|v| v.expect("non-empty")).collect();
    let mut certified = true;
    let mut per_equation = Vec::with_capacity(sys.len());
    for i in 0..sys.len() {
        let mut g = 0u64;
        for t in sys.equation(i) {
            // The term's shifted set is {b + Σ u_j m_j − m_i}; its gcd is the
            // gcd of its least element and the generators of its differences.
            let mut least = t.base.min().expect("non-empty base") as i128 - m[i] as i128;
            let mut diffs = t.base.params().q;
            for (j, e) in t.exponents.iter().enumerate() {
                let lo = e.min().expect("non-empty exponents");
                least += lo as i128 * m[j] as i128;
                let spread = e.affine_gcd(1, -(lo as i128), opts.window, opts.cap);
                certified &= spread.certified;
                diffs = gcd(diffs, m[j] * spread.value);
            }
            debug_assert!(least >= 0);
            g = gcd(g, gcd(least.unsigned_abs() as u64, diffs));
        }
        per_equation.push(g);
    }
    let graph = sys.dependency();
    let q = (0..sys.len())
        .map(|i| {
            (0..sys.len())
                .filter(|&j| graph.reaches_star(i, j))
                .fold(0, |acc, j| gcd(acc, per_equation[j]))
        })
        .collect();
    Ok(QReport { q, per_equation, certified })
}
