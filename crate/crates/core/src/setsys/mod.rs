//! Systems of set-equations `Y = Γ(Y)`.
//!
//! Each right side is a finite union of terms `base + E_1⋆Y_1 + … + E_k⋆Y_k`
//! where every `E_j` is the set of admissible exponents for `Y_j`.

mod digraph;
mod formulas;
mod solve;
mod trunc;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::epset::EpSet;
use crate::index::IndexSet;
use crate::Span;

pub use digraph::DependencyGraph;
pub use formulas::{min_vector, q_vector, q_vector_with, QOptions, QReport};
pub use solve::{
    linear_closed_form, nonuniqueness_probe, solve, solve_with, Certificate, SolveOptions,
    SpectrumSolution, VarSolution,
};
pub use trunc::{least_fixpoint, seeded_fixpoint, Bits};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetSysError {
    #[error("a system needs at least one variable")]
    NoVariables,
    #[error("variable `{0}` is declared twice")]
    DuplicateVariable(String),
    #[error("{variables} variables but {equations} equations")]
    Arity { variables: usize, equations: usize },
    #[error("a term for `{var}` has {found} exponent slots, expected {expected}")]
    ExponentArity { var: String, found: usize, expected: usize },
    #[error("a term for `{var}` has an empty base")]
    EmptyBase { var: String },
    #[error("a term for `{var}` has an empty exponent set for `{other}`")]
    EmptyExponent { var: String, other: String },
    #[error("system is not basic: a term for `{var}` can produce 0")]
    NotBasic { var: String },
    #[error("trivial equation {var} = {other}; substitute `{other}` for `{var}` and drop the equation")]
    TrivialEquation { var: String, other: String },
    #[error("system is not reduced; empty variables: {}", .0.join(", "))]
    NotReduced(Vec<String>),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("horizon {horizon} is too small to infer a closed form for `{var}`")]
    HorizonTooSmall { var: String, horizon: u64 },
    #[error("`{var}` uses the enumerated set {set}; exact evaluation needs periodic exponents")]
    EnumeratedExponent { var: String, set: String },
    #[error("iteration did not stabilize within {0} rounds")]
    NoConvergence(usize),
    #[error("internal invariant breach: {0}")]
    InvariantBreach(String),
}

/// One family `base + E_1⋆Y_1 + … + E_k⋆Y_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GammaTerm {
    pub base: EpSet,
    pub exponents: Vec<IndexSet>,
}

impl GammaTerm {
    /// A term with every variable absent.
    pub fn constant(base: EpSet, k: usize) -> Self {
        GammaTerm { base, exponents: vec![IndexSet::absent(); k] }
    }

    /// Sets the exponent family of variable `j`.
    pub fn with(mut self, j: usize, exps: impl Into<IndexSet>) -> Self {
        self.exponents[j] = exps.into();
        self
    }

    /// Whether every variable may appear with exponent 0.
    pub fn admits_zero_vector(&self) -> bool {
        self.exponents.iter().all(|e| e.contains(0))
    }

    /// Whether some admissible exponent vector has total weight exactly 1.
    pub fn admits_unit_weight(&self) -> bool {
        (0..self.exponents.len()).any(|l| {
            self.exponents[l].contains(1)
                && self.exponents.iter().enumerate().all(|(o, e)| o == l || e.contains(0))
        })
    }

    /// Variables with a positive admissible exponent.
    pub fn used_variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.exponents.iter().enumerate().filter(|(_, e)| e.has_positive()).map(|(j, _)| j)
    }

    /// Exponents inside `{0, 1}` for at most one variable, all others absent.
    pub fn is_linear(&self) -> bool {
        let mut used = 0;
        for e in &self.exponents {
            if e.is_absent() {
                continue;
            }
            match e.as_periodic() {
                Some(s) if s.is_subset(&EpSet::finite([0, 1])) => used += 1,
                _ => return false,
            }
        }
        used <= 1
    }
}

#[derive(Debug, Clone)]
pub struct SetSystem {
    variables: Vec<String>,
    equations: Vec<Vec<GammaTerm>>,
    spans: Vec<Option<Span>>,
}

// Source positions are not part of a system's identity.
impl PartialEq for SetSystem {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.equations == other.equations
    }
}

impl Eq for SetSystem {}

impl SetSystem {
    pub fn new(variables: Vec<String>, equations: Vec<Vec<GammaTerm>>) -> Result<Self, SetSysError> {
        let spans = vec![None; variables.len()];
        Self::with_spans(variables, equations, spans)
    }

    pub fn with_spans(
        variables: Vec<String>,
        equations: Vec<Vec<GammaTerm>>,
        mut spans: Vec<Option<Span>>,
    ) -> Result<Self, SetSysError> {
        let k = variables.len();
        if k == 0 {
            return Err(SetSysError::NoVariables);
        }
        let mut seen = BTreeSet::new();
        for v in &variables {
            if !seen.insert(v) {
                return Err(SetSysError::DuplicateVariable(v.clone()));
            }
        }
        if equations.len() != k {
            return Err(SetSysError::Arity { variables: k, equations: equations.len() });
        }
        for (i, eq) in equations.iter().enumerate() {
            for t in eq {
                let var = variables[i].clone();
                if t.exponents.len() != k {
                    return Err(SetSysError::ExponentArity { var, found: t.exponents.len(), expected: k });
                }
                if t.base.is_empty() {
                    return Err(SetSysError::EmptyBase { var });
                }
                if let Some(j) = t.exponents.iter().position(|e| e.is_empty()) {
                    return Err(SetSysError::EmptyExponent { var, other: variables[j].clone() });
                }
            }
        }
        spans.resize(k, None);
        Ok(SetSystem { variables, equations, spans })
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

    pub fn equations(&self) -> &[Vec<GammaTerm>] {
        &self.equations
    }

    pub fn equation(&self, i: usize) -> &[GammaTerm] {
        &self.equations[i]
    }

    pub fn span(&self, i: usize) -> Option<Span> {
        self.spans.get(i).copied().flatten()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn uses_enumerated(&self) -> bool {
        self.equations.iter().flatten().any(|t| t.exponents.iter().any(IndexSet::is_enumerated))
    }

    pub fn dependency(&self) -> DependencyGraph {
        DependencyGraph::new(self)
    }

    /// `Γ(Y)` on exact sets.
    pub fn apply(&self, sets: &[EpSet]) -> Result<Vec<EpSet>, SetSysError> {
        (0..self.len()).map(|i| self.apply_equation(i, sets)).collect()
    }

    /// `Γ_i(Y)` on exact sets.
    pub fn apply_equation(&self, i: usize, sets: &[EpSet]) -> Result<EpSet, SetSysError> {
        let mut parts = Vec::with_capacity(self.equations[i].len());
        for t in &self.equations[i] {
            parts.push(self.apply_term(i, t, sets)?);
        }
        Ok(EpSet::union_all(parts.iter()))
    }

    fn apply_term(&self, i: usize, t: &GammaTerm, sets: &[EpSet]) -> Result<EpSet, SetSysError> {
        let mut acc = t.base.clone();
        for (j, e) in t.exponents.iter().enumerate() {
            if e.is_absent() {
                continue;
            }
            let factor = match e {
                IndexSet::Periodic(s) => s.star(&sets[j]),
                IndexSet::Enumerated(en) => {
                    if sets[j].is_empty() {
                        if en.contains(0) { EpSet::zero() } else { EpSet::empty() }
                    } else {
                        return Err(SetSysError::EnumeratedExponent {
                            var: self.variables[i].clone(),
                            set: en.name().to_string(),
                        });
                    }
                }
            };
            acc = acc.sum(&factor);
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    /// `Γ^(n)(∅)`.
    pub fn iterate_from_empty(&self, n: usize) -> Result<Vec<EpSet>, SetSysError> {
        let mut sets = vec![EpSet::empty(); self.len()];
        for _ in 0..n {
            sets = self.apply(&sets)?;
        }
        Ok(sets)
    }

    /// Equations of the form `Y_i = Y_j`, as `(i, j)` pairs.
    pub fn trivial_equations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, eq) in self.equations.iter().enumerate() {
            if let [t] = eq.as_slice() {
                if t.base != EpSet::zero() {
                    continue;
                }
                let present: Vec<usize> =
                    (0..self.len()).filter(|&j| !t.exponents[j].is_absent()).collect();
                if let [j] = present.as_slice() {
                    if t.exponents[*j] == IndexSet::single(1) {
                        out.push((i, *j));
                    }
                }
            }
        }
        out
    }

    /// Indices whose least solution is empty.
    pub fn empties(&self) -> BTreeSet<usize> {
        let k = self.len();
        let mut nonempty = vec![false; k];
        for _ in 0..=k {
            let next: Vec<bool> = (0..k)
                .map(|i| {
                    self.equations[i].iter().any(|t| {
                        t.exponents.iter().enumerate().all(|(j, e)| e.contains(0) || nonempty[j])
                    })
                })
                .collect();
            if next == nonempty {
                break;
            }
            nonempty = next;
        }
        (0..k).filter(|&i| !nonempty[i]).collect()
    }

    pub fn classify(&self) -> SystemClassification {
        let mut not_basic = None;
        let mut elementary = true;
        for (i, eq) in self.equations.iter().enumerate() {
            for t in eq {
                if t.base.contains(0) {
                    if t.admits_zero_vector() && not_basic.is_none() {
                        not_basic = Some(i);
                    }
                    if t.admits_unit_weight() {
                        elementary = false;
                    }
                }
            }
        }
        let is_basic = not_basic.is_none();
        let empties = self.empties();
        let is_elementary = is_basic && elementary;
        SystemClassification {
            is_basic,
            is_elementary,
            is_reduced: is_elementary && empties.is_empty(),
            empties,
            trivial: self.trivial_equations(),
            not_basic_at: not_basic,
        }
    }

    /// Removes empty variables; see [`SetSystem::reduce_with_map`].
    pub fn reduce(&self) -> SetSystem {
        self.reduce_with_map().0
    }

    /// Drops the empty variables together with every term that needs one of
    /// them with a positive exponent. The second component maps new indices
    /// to old ones. When every variable is empty the result has none.
    pub fn reduce_with_map(&self) -> (SetSystem, Vec<usize>) {
        let empties = self.empties();
        let keep: Vec<usize> = (0..self.len()).filter(|i| !empties.contains(i)).collect();
        let equations = keep
            .iter()
            .map(|&i| {
                self.equations[i]
                    .iter()
                    .filter(|t| empties.iter().all(|&j| t.exponents[j].contains(0)))
                    .map(|t| GammaTerm {
                        base: t.base.clone(),
                        exponents: keep.iter().map(|&j| t.exponents[j].clone()).collect(),
                    })
                    .collect()
            })
            .collect();
        let sys = SetSystem {
            variables: keep.iter().map(|&i| self.variables[i].clone()).collect(),
            equations,
            spans: keep.iter().map(|&i| self.spans[i]).collect(),
        };
        (sys, keep)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemClassification {
    pub is_basic: bool,
    pub is_elementary: bool,
    pub is_reduced: bool,
    pub empties: BTreeSet<usize>,
    /// Equations `Y_i = Y_j`.
    pub trivial: Vec<(usize, usize)>,
    /// First equation with a term that can produce 0.
    pub not_basic_at: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn binary() -> SetSystem {
        SetSystem::new(
            names(&["T"]),
            vec![vec![
                GammaTerm::constant(EpSet::singleton(1), 1),
                GammaTerm::constant(EpSet::singleton(1), 1).with(0, IndexSet::single(2)),
            ]],
        )
        .unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = binary().classify();
        assert!(c.is_basic && c.is_elementary && c.is_reduced);

        let sys = SetSystem::new(
            names(&["A", "B"]),
            vec![
                vec![GammaTerm::constant(EpSet::zero(), 2).with(1, IndexSet::single(1)),
                     GammaTerm::constant(EpSet::singleton(1), 2)],
                vec![GammaTerm::constant(EpSet::zero(), 2)],
            ],
        )
        .unwrap();
        assert!(!sys.classify().is_basic);

        let sys = SetSystem::new(
            names(&["Y"]),
            vec![vec![
                GammaTerm::constant(EpSet::zero(), 1).with(0, IndexSet::single(2)),
                GammaTerm::constant(EpSet::singleton(2), 1),
            ]],
        )
        .unwrap();
        assert!(sys.classify().is_elementary);
    }

    #[test]
    fn empties_and_reduce() {
        let sys = SetSystem::new(
            names(&["A", "B"]),
            vec![
                vec![GammaTerm::constant(EpSet::singleton(1), 2).with(1, IndexSet::single(1))],
                vec![GammaTerm::constant(EpSet::singleton(2), 2).with(1, IndexSet::single(1))],
            ],
        )
        .unwrap();
        assert_eq!(sys.empties(), BTreeSet::from([0, 1]));

        let sys = SetSystem::new(
            names(&["A", "B"]),
            vec![
                vec![
                    GammaTerm::constant(EpSet::singleton(1), 2),
                    GammaTerm::constant(EpSet::singleton(1), 2).with(1, IndexSet::single(1)),
                ],
                vec![GammaTerm::constant(EpSet::singleton(2), 2).with(1, IndexSet::single(1))],
            ],
        )
        .unwrap();
        let (red, map) = sys.reduce_with_map();
        assert_eq!(map, vec![0]);
        assert_eq!(red.equations(), &[vec![GammaTerm::constant(EpSet::singleton(1), 1)]]);
        assert_eq!(binary().reduce(), binary());
    }

    #[test]
    fn trivial_detection() {
        let sys = SetSystem::new(
            names(&["A", "B"]),
            vec![
                vec![GammaTerm::constant(EpSet::zero(), 2).with(1, IndexSet::single(1))],
                vec![GammaTerm::constant(EpSet::singleton(1), 2)],
            ],
        )
        .unwrap();
        assert_eq!(sys.trivial_equations(), vec![(0, 1)]);
    }

    #[test]
    fn validation() {
        assert_eq!(SetSystem::new(vec![], vec![]), Err(SetSysError::NoVariables));
        let err = SetSystem::new(names(&["A"]), vec![vec![GammaTerm::constant(EpSet::empty(), 1)]]);
        assert!(matches!(err, Err(SetSysError::EmptyBase { .. })));
    }
}
