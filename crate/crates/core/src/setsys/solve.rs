//! Exact closed forms for least solutions.

use std::fmt;

use super::formulas::{min_vector, q_vector_with, QOptions, QReport};
use super::trunc::{least_fixpoint, Bits};
use super::{GammaTerm, SetSysError, SetSystem};
use crate::epset::{EpSet, EpSetError, PeriodicityParams};
use crate::index::IndexSet;

/// How a closed form was justified, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Certificate {
    /// Linear closed form `G₀ + ℕ⋆G₁` throughout.
    CertifiedLinear,
    /// Verified fixed point whose tail is certified by the doubling lemma.
    CertifiedDoubling,
    /// Exact evaluation or an exactly verified unique fixed point.
    CertifiedFiniteConvergence,
    /// Inferred from the truncation; only `m` and `q` are cross-checked.
    Heuristic,
}

impl Certificate {
    pub fn name(self) -> &'static str {
        match self {
            Certificate::CertifiedLinear => "CertifiedLinear",
            Certificate::CertifiedDoubling => "CertifiedDoubling",
            Certificate::CertifiedFiniteConvergence => "CertifiedFiniteConvergence",
            Certificate::Heuristic => "Heuristic",
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSolution {
    pub name: String,
    pub closed_form: EpSet,
    /// Membership on `[0, H]`.
    pub truncation: Vec<bool>,
    pub certificate: Certificate,
    pub params: PeriodicityParams,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumSolution {
    pub horizon: u64,
    pub vars: Vec<VarSolution>,
    /// Minima from the min-recurrence.
    pub formula_m: Vec<Option<u64>>,
    /// gcds from the closed-form formula (0 for empty coordinates).
    pub formula_q: Vec<u64>,
    /// Whether every formula gcd is exact.
    pub q_certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub horizon: u64,
    pub q: QOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { horizon: 512, q: QOptions::default() }
    }
}

pub fn solve(sys: &SetSystem, horizon: u64) -> Result<SpectrumSolution, SetSysError> {
    solve_with(sys, SolveOptions { horizon, ..SolveOptions::default() })
}

/// Least solution of a basic system with closed forms and certificates.
pub fn solve_with(sys: &SetSystem, opts: SolveOptions) -> Result<SpectrumSolution, SetSysError> {
    let h = opts.horizon;
    if h == 0 {
        return Err(SetSysError::ZeroHorizon);
    }
    let class = sys.classify();
    if let Some(&(i, j)) = class.trivial.first() {
        return Err(SetSysError::TrivialEquation {
            var: sys.variables()[i].clone(),
            other: sys.variables()[j].clone(),
        });
    }
    if let Some(i) = class.not_basic_at {
        return Err(SetSysError::NotBasic { var: sys.variables()[i].clone() });
    }
    let truncs = least_fixpoint(sys, h)?;
    let k = sys.len();

    let formula_m = min_vector(sys);
    let (reduced, map) = sys.reduce_with_map();
    let mut formula_q = vec![0u64; k];
    let mut q_certified = true;
    if !reduced.is_empty() {
        let QReport { q, certified, .. } = q_vector_with(&reduced, opts.q)?;
        for (new, &old) in map.iter().enumerate() {
            formula_q[old] = q[new];
        }
        q_certified = certified;
    }

    let graph = sys.dependency();
    let mut forms: Vec<Option<(EpSet, Certificate)>> = vec![None; k];
    for &i in &class.empties {
        forms[i] = Some((EpSet::empty(), Certificate::CertifiedFiniteConvergence));
    }
    for comp in graph.components() {
        if comp.iter().all(|i| forms[*i].is_some()) {
            continue;
        }
        let dep_cert = comp
            .iter()
            .flat_map(|&i| graph.successors(i).iter())
            .filter(|j| !comp.contains(j))
            .map(|&j| forms[j].as_ref().expect("dependencies solved first").1)
            .max()
            .unwrap_or(Certificate::CertifiedLinear);
        let known: Vec<EpSet> =
            forms.iter().map(|f| f.as_ref().map_or_else(EpSet::empty, |f| f.0.clone())).collect();
        let solved = solve_component(sys, &comp, &known, &truncs, h, &graph)?;
        for (i, form, cert) in solved {
            forms[i] = Some((form, cert.max(dep_cert)));
        }
    }

    let mut vars = Vec::with_capacity(k);
    for i in 0..k {
        let (closed_form, certificate) = forms[i].take().expect("every component solved");
        let truncation = truncs[i].to_bools();
        let params = closed_form.params();
        let var = sys.variables()[i].clone();
        if closed_form.to_bools(h) != truncation {
            return Err(breach_or_horizon(certificate, &var, h, format!(
                "closed form {} for `{}` disagrees with the truncation",
                closed_form, var
            )));
        }
        let q_known = q_certified || certificate != Certificate::Heuristic;
        if params.m != formula_m[i] || (q_known && params.q != formula_q[i]) {
            return Err(breach_or_horizon(certificate, &var, h, format!(
                "closed form {} for `{}` has {} but the formulas give m={:?} q={}",
                closed_form, var, params, formula_m[i], formula_q[i]
            )));
        }
        vars.push(VarSolution { name: var, closed_form, truncation, certificate, params });
    }
    Ok(SpectrumSolution { horizon: h, vars, formula_m, formula_q, q_certified })
}

fn breach_or_horizon(cert: Certificate, var: &str, horizon: u64, msg: String) -> SetSysError {
    if cert == Certificate::Heuristic {
        SetSysError::HorizonTooSmall { var: var.to_string(), horizon }
    } else {
        SetSysError::InvariantBreach(msg)
    }
}

type Solved = Vec<(usize, EpSet, Certificate)>;

fn solve_component(
    sys: &SetSystem,
    comp: &[usize],
    known: &[EpSet],
    truncs: &[Bits],
    h: u64,
    graph: &super::DependencyGraph,
) -> Result<Solved, SetSysError> {
    let linear = comp.iter().all(|&i| sys.equation(i).iter().all(GammaTerm::is_linear));
    let own = if linear { Certificate::CertifiedLinear } else { Certificate::CertifiedFiniteConvergence };

    // No cycle through this vertex: the equation is an explicit expression.
    if comp.len() == 1 && !graph.reaches_plus(comp[0], comp[0]) {
        let i = comp[0];
        return match sys.apply_equation(i, known) {
            Ok(set) => Ok(vec![(i, set, own)]),
            Err(SetSysError::EnumeratedExponent { .. }) => {
                let set = infer(&truncs[i], h, &sys.variables()[i])?;
                Ok(vec![(i, set, Certificate::Heuristic)])
            }
            Err(e) => Err(e),
        };
    }

    if comp.len() == 1 && linear {
        if let Some(set) = self_linear(sys, comp[0], known)? {
            return Ok(vec![(comp[0], set, Certificate::CertifiedLinear)]);
        }
    }

    let mut candidate = known.to_vec();
    for &i in comp {
        candidate[i] = infer(&truncs[i], h, &sys.variables()[i])?;
    }
    let verified = contractive(sys, comp) && {
        let mut ok = true;
        for &i in comp {
            match sys.apply_equation(i, &candidate) {
                Ok(set) if set == candidate[i] => {}
                Ok(_) | Err(SetSysError::EnumeratedExponent { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        ok
    };
    if !verified {
        return Ok(comp.iter().map(|&i| (i, candidate[i].clone(), Certificate::Heuristic)).collect());
    }
    let mut out = Vec::with_capacity(comp.len());
    let doubling_shape = has_doubling_term(sys, comp);
    for &i in comp {
        let set = candidate[i].clone();
        let cert = if linear {
            Certificate::CertifiedLinear
        } else if doubling_shape && certify_by_doubling(&set)? {
            Certificate::CertifiedDoubling
        } else {
            Certificate::CertifiedFiniteConvergence
        };
        out.push((i, set, cert));
    }
    Ok(out)
}

// Y_i = G0 ∪ (G1 + Y_i) with everything else known.
fn self_linear(sys: &SetSystem, i: usize, known: &[EpSet]) -> Result<Option<EpSet>, SetSysError> {
    let mut g0 = Vec::new();
    let mut g1 = Vec::new();
    for t in sys.equation(i) {
        let mut rest_term = t.clone();
        rest_term.exponents[i] = IndexSet::absent();
        let rest = sys.apply_term(i, &rest_term, known)?;
        let e = &t.exponents[i];
        if e.contains(0) {
            g0.push(rest.clone());
        }
        if e.contains(1) {
            g1.push(rest);
        }
    }
    let g0 = EpSet::union_all(g0.iter());
    let g1 = EpSet::union_all(g1.iter());
    Ok(Some(linear_closed_form(&g0, &g1)))
}

/// Least solution `G₀ + ℕ⋆G₁` of `Y = G₀ ∪ (G₁ + Y)`.
pub fn linear_closed_form(g0: &EpSet, g1: &EpSet) -> EpSet {
    match g1.nat_closure() {
        Ok(closure) => g0.sum(&closure),
        Err(_) => g0.clone(),
    }
}

// Uniqueness among subsets of ℙ: no term of the component can reproduce a
// single element of a component variable without adding something positive.
fn contractive(sys: &SetSystem, comp: &[usize]) -> bool {
    comp.iter().all(|&i| {
        sys.equation(i).iter().all(|t| {
            if !t.base.contains(0) {
                return true;
            }
            let outside_zero =
                (0..sys.len()).filter(|j| !comp.contains(j)).all(|j| t.exponents[j].contains(0));
            let unit = comp.iter().any(|&l| {
                t.exponents[l].contains(1)
                    && comp.iter().all(|&o| o == l || t.exponents[o].contains(0))
            });
            !(outside_zero && unit)
        })
    })
}

// Some term admits total weight ≥ 2 on the component.
fn has_doubling_term(sys: &SetSystem, comp: &[usize]) -> bool {
    comp.iter().any(|&i| {
        sys.equation(i).iter().any(|t| {
            let positive: Vec<usize> =
                comp.iter().copied().filter(|&l| t.exponents[l].has_positive()).collect();
            positive.iter().any(|&l| t.exponents[l].reaches(2)) || positive.len() >= 2
        })
    })
}

fn certify_by_doubling(set: &EpSet) -> Result<bool, SetSysError> {
    if !set.has_positive() {
        return Ok(false);
    }
    let doubled = set.nstar(2);
    let pr = set.params();
    let limit = pr.c + pr.p.max(1) + 2 * pr.m.unwrap_or(0);
    for r in 0..=limit {
        if !EpSet::singleton(r).sum(&doubled).is_subset(set) {
            continue;
        }
        return match set.certify_doubling(r, 2) {
            Ok(_) => Ok(true),
            Err(EpSetError::HypothesisFails { .. }) => Ok(false),
            Err(e) => Err(SetSysError::InvariantBreach(e.to_string())),
        };
    }
    Ok(false)
}

/// Smallest period `p ≤ H/4` and threshold `t ≤ H/2` consistent with the
/// truncation, turned into a set.
fn infer(bits: &Bits, h: u64, var: &str) -> Result<EpSet, SetSysError> {
    let b = bits.to_bools();
    let hu = h as usize;
    for p in 1..=(hu / 4).max(1) {
        if p > hu {
            break;
        }
        // Largest n ≤ H − p with b[n] ≠ b[n+p]; the pattern holds after it.
        let mut t = 0usize;
        for n in (0..=hu - p).rev() {
            if b[n] != b[n + p] {
                t = n + 1;
                break;
            }
        }
        if t <= hu / 2 {
            return Ok(EpSet::from_predicate(t as u64, p as u64, |n| {
                let n = n as usize;
                if n <= hu { b[n] } else { b[t + (n - t) % p] }
            }));
        }
    }
    Err(SetSysError::HorizonTooSmall { var: var.to_string(), horizon: h })
}

/// For each candidate vector, whether it satisfies `Y = Γ(Y)` exactly.
pub fn nonuniqueness_probe(sys: &SetSystem, candidates: &[Vec<EpSet>]) -> Result<Vec<bool>, SetSysError> {
    candidates.iter().map(|c| Ok(sys.apply(c)? == *c)).collect()
}
