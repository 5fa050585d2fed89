//! Eventually periodic subsets of the naturals.
//!
//! Every value is kept in a canonical form (minimal period, minimal threshold)
//! so structural equality decides set equality.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_integer::{gcd, lcm};
use thiserror::Error;

use crate::setsys::Bits;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EpSetError {
    #[error("closure needs a positive generator, got {0}")]
    EmptyOrZeroOnly(EpSet),
    #[error("containment r + s*A <= A fails for r={r}, s={s}")]
    HypothesisFails { r: u64, s: u64 },
    #[error("doubling certificate inconsistent: {0}")]
    CertificateBreach(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Tail {
    period: u64,
    // Residues modulo `period`, sorted.
    residues: Vec<u64>,
}

/// Canonical eventually periodic subset of ℕ.
///
/// Denotes `finite ∪ { n ≥ threshold : n mod period ∈ residues }`.
/// For an infinite set the threshold is the first member of the periodic
/// block; for a finite set it is `max + 1` (0 for the empty set).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpSet {
    finite: Vec<u64>,
    threshold: u64,
    tail: Option<Tail>,
}

/// Periodicity parameters `(m, q, p, c)` of a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodicityParams {
    /// Minimum, `None` standing for ∞ (empty set).
    pub m: Option<u64>,
    pub q: u64,
    pub p: u64,
    pub c: u64,
}

impl PeriodicityParams {
    pub const EMPTY: PeriodicityParams = PeriodicityParams { m: None, q: 0, p: 0, c: 0 };
}

impl fmt::Display for PeriodicityParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            Some(m) => write!(f, "m={} q={} p={} c={}", m, self.q, self.p, self.c),
            None => write!(f, "m=inf q={} p={} c={}", self.q, self.p, self.c),
        }
    }
}

/// Numerical-semigroup style summary of a closure `ℕ⋆B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureSummary {
    pub gcd: u64,
    /// Least `c` with `c + gcd·ℕ` inside the closure.
    pub conductor: u64,
    /// Multiples of `gcd` below the conductor that are missing.
    pub gaps: Vec<u64>,
    pub set: EpSet,
}

impl EpSet {
    pub fn empty() -> Self {
        EpSet { finite: Vec::new(), threshold: 0, tail: None }
    }

    pub fn naturals() -> Self {
        Self::progression(0, 1)
    }

    pub fn positives() -> Self {
        Self::progression(1, 1)
    }

    pub fn evens() -> Self {
        Self::progression(0, 2)
    }

    pub fn positive_evens() -> Self {
        Self::progression(2, 2)
    }

    pub fn odds() -> Self {
        Self::progression(1, 2)
    }

    pub fn singleton(n: u64) -> Self {
        Self::finite([n])
    }

    pub fn zero() -> Self {
        Self::singleton(0)
    }

    pub fn finite<I: IntoIterator<Item = u64>>(items: I) -> Self {
        let mut finite: Vec<u64> = items.into_iter().collect();
        finite.sort_unstable();
        finite.dedup();
        let threshold = finite.last().map_or(0, |m| m + 1);
        EpSet { finite, threshold, tail: None }
    }

    /// `start + step·ℕ`. Panics when `step == 0`.
    pub fn progression(start: u64, step: u64) -> Self {
        assert!(step > 0, "progression step must be positive");
        Self::normalize(&[], &[(start, step)])
    }

    /// Canonical form of `finite ∪ ⋃ (start + step·ℕ)`.
    ///
    /// A block with `step == 0` contributes just its start.
    pub fn normalize(finite: &[u64], blocks: &[(u64, u64)]) -> Self {
        let mut singles: Vec<u64> = finite.to_vec();
        let mut progs = Vec::new();
        for &(a, r) in blocks {
            if r == 0 {
                singles.push(a);
            } else {
                progs.push((a, r));
            }
        }
        if progs.is_empty() {
            return Self::finite(singles);
        }
        let period = progs.iter().fold(1u64, |acc, &(_, r)| lcm(acc, r));
        let bound = progs
            .iter()
            .map(|&(a, _)| a)
            .chain(singles.iter().map(|&s| s + 1))
            .max()
            .unwrap_or(0);
        Self::from_predicate(bound, period, |n| {
            singles.contains(&n) || progs.iter().any(|&(a, r)| n >= a && (n - a) % r == 0)
        })
    }

    /// Builds the canonical set for a membership predicate that is periodic
    /// with period `period` on `[bound, ∞)`.
    pub fn from_predicate<F: Fn(u64) -> bool>(bound: u64, period: u64, pred: F) -> Self {
        let period = period.max(1);
        let len = (bound + period) as usize;
        let bits: Vec<bool> = (0..len as u64).map(&pred).collect();
        Self::canonicalize(&bits, bound as usize, period as usize)
    }

    fn canonicalize(bits: &[bool], start: usize, period: usize) -> Self {
        let pattern = &bits[start..start + period];
        if !pattern.iter().any(|&b| b) {
            let members = (0..start).filter(|&n| bits[n]).map(|n| n as u64);
            return Self::finite(members);
        }
        // Minimal period of the cyclic pattern.
        let mut p = period;
        for d in 1..=period {
            if period.is_multiple_of(d) && (0..period).all(|i| pattern[i] == pattern[(i + d) % period]) {
                p = d;
                break;
            }
        }
        // Residues mod p, absolute.
        let mut mask = vec![false; p];
        for (i, &b) in pattern.iter().enumerate().take(p) {
            if b {
                mask[(start + i) % p] = true;
            }
        }
        let mut t = start;
        while t > 0 && bits[t - 1] == mask[(t - 1) % p] {
            t -= 1;
        }
        let mut thr = t;
        while !mask[thr % p] {
            thr += 1;
        }
        let finite = (0..thr).filter(|&n| bits[n]).map(|n| n as u64).collect();
        let residues = (0..p).filter(|&r| mask[r]).map(|r| r as u64).collect();
        EpSet { finite, threshold: thr as u64, tail: Some(Tail { period: p as u64, residues }) }
    }

    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && self.tail.is_none()
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// Elements below the threshold.
    pub fn finite_part(&self) -> &[u64] {
        &self.finite
    }

    /// Minimal eventual period, 0 for finite sets.
    pub fn period(&self) -> u64 {
        self.tail.as_ref().map_or(0, |t| t.period)
    }

    pub fn residues(&self) -> &[u64] {
        self.tail.as_ref().map_or(&[], |t| &t.residues)
    }

    /// Least member of each residue class at or above the threshold.
    pub fn progression_starts(&self) -> Vec<u64> {
        let Some(t) = &self.tail else { return Vec::new() };
        let mut starts: Vec<u64> = t
            .residues
            .iter()
            .map(|&r| {
                let off = (r + t.period - self.threshold % t.period) % t.period;
                self.threshold + off
            })
            .collect();
        starts.sort_unstable();
        starts
    }

    pub fn contains(&self, n: u64) -> bool {
        if n < self.threshold {
            return self.finite.binary_search(&n).is_ok();
        }
        match &self.tail {
            Some(t) => t.residues.binary_search(&(n % t.period)).is_ok(),
            None => false,
        }
    }

    pub fn min(&self) -> Option<u64> {
        self.finite.first().copied().or(self.tail.as_ref().map(|_| self.threshold))
    }

    /// Maximum of a finite non-empty set.
    pub fn max(&self) -> Option<u64> {
        if self.tail.is_some() {
            return None;
        }
        self.finite.last().copied()
    }

    pub fn has_positive(&self) -> bool {
        self.tail.is_some() || self.finite.iter().any(|&n| n > 0)
    }

    /// Members in `[lo, hi]`.
    pub fn enumerate(&self, lo: u64, hi: u64) -> Vec<u64> {
        if lo > hi {
            return Vec::new();
        }
        let mut out: Vec<u64> =
            self.finite.iter().copied().filter(|&n| n >= lo && n <= hi).collect();
        if let Some(t) = &self.tail {
            let from = lo.max(self.threshold);
            if from <= hi {
                for n in from..=hi {
                    if t.residues.binary_search(&(n % t.period)).is_ok() {
                        out.push(n);
                    }
                }
            }
        }
        out
    }

    /// Membership array on `[0, h]`.
    pub fn to_bools(&self, h: u64) -> Vec<bool> {
        (0..=h).map(|n| self.contains(n)).collect()
    }

    /// Canonical form of the part of `self` that lies strictly below `n`.
    pub fn below(&self, n: u64) -> EpSet {
        EpSet::finite(self.enumerate(0, n.saturating_sub(1)).into_iter().filter(|&v| v < n))
    }

    /// `self ∖ {n}`.
    pub fn without(&self, n: u64) -> EpSet {
        let bound = self.threshold.max(n + 1);
        EpSet::from_predicate(bound, self.period(), |v| v != n && self.contains(v))
    }

    /// `{v - k : v ∈ self, v ≥ k}`.
    pub fn shift_down(&self, k: u64) -> EpSet {
        let bound = self.threshold.saturating_sub(k);
        EpSet::from_predicate(bound, self.period(), |v| self.contains(v + k))
    }

    pub fn is_subset(&self, other: &EpSet) -> bool {
        self.union(other) == *other
    }

    pub fn union(&self, other: &EpSet) -> EpSet {
        Self::union_all([self, other])
    }

    pub fn union_all<'a, I: IntoIterator<Item = &'a EpSet>>(sets: I) -> EpSet {
        let sets: Vec<&EpSet> = sets.into_iter().filter(|s| !s.is_empty()).collect();
        match sets.len() {
            0 => return EpSet::empty(),
            1 => return sets[0].clone(),
            _ => {}
        }
        let bound = sets.iter().map(|s| s.threshold).max().unwrap_or(0);
        let period = sets.iter().fold(1, |acc, s| lcm(acc, s.period().max(1)));
        let h = bound + period - 1;
        let mut acc = Bits::new(h);
        for s in &sets {
            acc.union_with(&s.to_bits(h));
        }
        Self::canonicalize(&acc.to_bools(), bound as usize, period as usize)
    }

    // Membership on [0, h] as packed words.
    fn to_bits(&self, h: u64) -> Bits {
        let mut b = Bits::new(h);
        for &n in self.finite.iter().take_while(|&&n| n <= h) {
            b.insert(n);
        }
        if let Some(t) = &self.tail {
            for &r in &t.residues {
                let first = self.threshold + (r + t.period - self.threshold % t.period) % t.period;
                for n in (first..=h).step_by(t.period as usize) {
                    b.insert(n);
                }
            }
        }
        b
    }

    /// Intersection; used by tests and the certificate checks.
    pub fn intersect(&self, other: &EpSet) -> EpSet {
        let bound = self.threshold.max(other.threshold);
        let period = lcm(self.period().max(1), other.period().max(1));
        EpSet::from_predicate(bound, period, |n| self.contains(n) && other.contains(n))
    }

    /// The tail block alone, `{ n ≥ threshold : n mod p ∈ residues }`.
    fn periodic_part(&self) -> EpSet {
        match &self.tail {
            None => EpSet::empty(),
            Some(t) => EpSet::from_predicate(self.threshold, t.period, |n| {
                n >= self.threshold && t.residues.binary_search(&(n % t.period)).is_ok()
            }),
        }
    }

    // F + X for a finite list F.
    fn add_finite(f: &[u64], x: &EpSet) -> EpSet {
        let Some(&fmax) = f.iter().max() else { return EpSet::empty() };
        if x.is_empty() {
            return EpSet::empty();
        }
        let (bound, period) = (fmax + x.threshold, x.period().max(1));
        let h = bound + period - 1;
        let mut fb = Bits::new(h);
        for &a in f {
            fb.insert(a);
        }
        let sum = fb.sum(&x.to_bits(h));
        Self::canonicalize(&sum.to_bools(), bound as usize, period as usize)
    }

    /// Sumset `A + B`.
    pub fn sum(&self, other: &EpSet) -> EpSet {
        if self.is_empty() || other.is_empty() {
            return EpSet::empty();
        }
        let mut parts = vec![
            Self::add_finite(&self.finite, other),
            Self::add_finite(&other.finite, &self.periodic_part()),
        ];
        if let (Some(ta), Some(tb)) = (&self.tail, &other.tail) {
            let sa = self.progression_starts();
            let sb = other.progression_starts();
            let starts: Vec<u64> =
                sa.iter().flat_map(|&a| sb.iter().map(move |&b| a + b)).collect();
            let closure = finite_closure(&[ta.period, tb.period]).set;
            parts.push(Self::add_finite(&starts, &closure));
        }
        Self::union_all(parts.iter())
    }

    /// `n·B = {n·b : b ∈ B}`.
    pub fn scalar_mul(&self, n: u64) -> EpSet {
        if self.is_empty() {
            return EpSet::empty();
        }
        if n == 0 {
            return EpSet::zero();
        }
        if n == 1 {
            return self.clone();
        }
        let period = n * self.period().max(1);
        EpSet::from_predicate(n * self.threshold, period, |v| v % n == 0 && self.contains(v / n))
    }

    /// n-fold sumset, `0⋆B = {0}`.
    pub fn nstar(&self, n: u64) -> EpSet {
        let mut result = EpSet::zero();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.sum(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.sum(&base);
            }
        }
        result
    }

    /// `A⋆B = ⋃_{a∈A} a⋆B`, with `self` as `A`.
    pub fn star(&self, b: &EpSet) -> EpSet {
        if self.is_empty() {
            return EpSet::empty();
        }
        if b.is_empty() {
            return if self.contains(0) { EpSet::zero() } else { EpSet::empty() };
        }
        let starts = self.progression_starts();
        let p = self.period();
        let kmax = self.finite.iter().chain(starts.iter()).copied().max().unwrap_or(0);
        let wanted = if p > 0 { kmax.max(p) } else { kmax };
        // powers[k] = k⋆B, built incrementally while small.
        let mut powers: Vec<EpSet> = vec![EpSet::zero()];
        let incremental = wanted.min(256);
        for k in 1..=incremental {
            let next = powers[(k - 1) as usize].sum(b);
            powers.push(next);
        }
        let power = |k: u64| -> EpSet {
            if k <= incremental {
                powers[k as usize].clone()
            } else {
                b.nstar(k)
            }
        };
        let mut parts: Vec<EpSet> = self.finite.iter().map(|&a| power(a)).collect();
        if p > 0 {
            let closure = power(p).nat_closure_or_zero();
            for &a in &starts {
                parts.push(power(a).sum(&closure));
            }
        }
        Self::union_all(parts.iter())
    }

    // ℕ⋆X, with ℕ⋆{0} = {0}.
    fn nat_closure_or_zero(&self) -> EpSet {
        self.nat_closure().unwrap_or_else(|_| EpSet::zero())
    }

    /// `ℕ⋆B`, the additive closure of `B` with 0 adjoined.
    pub fn nat_closure(&self) -> Result<EpSet, EpSetError> {
        self.closure_summary().map(|s| s.set)
    }

    /// Closure together with its gcd, conductor and gaps.
    pub fn closure_summary(&self) -> Result<ClosureSummary, EpSetError> {
        if !self.has_positive() {
            return Err(EpSetError::EmptyOrZeroOnly(self.clone()));
        }
        let mut gens: Vec<u64> = self.finite.iter().copied().filter(|&n| n > 0).collect();
        let p = self.period();
        let n1 = self.without(0).min().expect("has a positive element");
        // Along a+pℕ only the first term in each class mod n1 can improve
        // the Apéry set, so n1/gcd(p, n1) terms per progression suffice.
        let terms = n1 / gcd(p.max(1), n1);
        for a in self.progression_starts() {
            gens.extend((0..=terms).map(|k| a + k * p).filter(|&n| n > 0));
        }
        Ok(finite_closure(&gens))
    }

    /// Periodicity parameters `(m, q, p, c)`.
    pub fn params(&self) -> PeriodicityParams {
        let Some(m) = self.min() else { return PeriodicityParams::EMPTY };
        let q = self.shifted_witnesses(m).fold(0, gcd);
        let p = self.period();
        let c = match &self.tail {
            None => self.threshold,
            Some(t) => {
                let mut c = self.threshold;
                for &b in self.finite.iter().rev() {
                    if self.contains(b + t.period) {
                        c = b;
                    } else {
                        break;
                    }
                }
                c
            }
        };
        PeriodicityParams { m: Some(m), q, p, c }
    }

    fn shifted_witnesses(&self, m: u64) -> impl Iterator<Item = u64> + '_ {
        let p = self.period();
        let starts = self.progression_starts();
        self.finite
            .iter()
            .copied()
            .chain(starts.clone())
            .chain(starts.into_iter().map(move |a| a + p))
            .map(move |n| n - m)
    }

    /// Whether `x + A` is eventually contained in `A`.
    pub fn is_eventual_period(&self, x: u64) -> bool {
        if x == 0 {
            return false;
        }
        match &self.tail {
            None => true,
            Some(t) => x.is_multiple_of(t.period),
        }
    }

    /// gcd of all elements, 0 for ∅ and {0}.
    pub fn gcd_of(&self) -> u64 {
        self.shifted_witnesses(0).fold(0, gcd)
    }

    /// Checks `r + s⋆A ⊆ A` and returns the parameters, which then satisfy
    /// `p = q` with a single progression tail.
    pub fn certify_doubling(&self, r: u64, s: u64) -> Result<PeriodicityParams, EpSetError> {
        if s < 2 || !self.has_positive() {
            return Err(EpSetError::HypothesisFails { r, s });
        }
        let image = EpSet::singleton(r).sum(&self.nstar(s));
        if !image.is_subset(self) {
            return Err(EpSetError::HypothesisFails { r, s });
        }
        let params = self.params();
        if params.p != params.q {
            return Err(EpSetError::CertificateBreach(format!(
                "p={} differs from q={} for {}",
                params.p, params.q, self
            )));
        }
        let rebuilt = EpSet::normalize(&self.below(params.c).finite, &[(params.c, params.p)]);
        if rebuilt != *self {
            return Err(EpSetError::CertificateBreach(format!(
                "tail of {} past {} is not a single progression",
                self, params.c
            )));
        }
        Ok(params)
    }
}

/// Closure of finitely many positive generators. Works on the Apéry set
/// with respect to the smallest reduced generator, so memory is linear in
/// that generator rather than in the conductor bound.
fn finite_closure(gens: &[u64]) -> ClosureSummary {
    let g = gens.iter().copied().fold(0, gcd);
    assert!(g > 0, "closure needs a positive generator");
    let mut red: Vec<u64> = gens.iter().map(|&n| n / g).filter(|&n| n > 0).collect();
    red.sort_unstable();
    red.dedup();
    let n1 = red[0];
    // apery[r] is the least element of the reduced closure congruent to r mod n1.
    let mut apery = vec![u64::MAX; n1 as usize];
    apery[0] = 0;
    let mut heap = BinaryHeap::from([Reverse((0u64, 0u64))]);
    while let Some(Reverse((d, r))) = heap.pop() {
        if d > apery[r as usize] {
            continue;
        }
        for &a in &red[1..] {
            let (nd, nr) = (d + a, (r + a) % n1);
            if nd < apery[nr as usize] {
                apery[nr as usize] = nd;
                heap.push(Reverse((nd, nr)));
            }
        }
    }
    let c = apery.iter().max().unwrap() + 1 - n1;
    let member = |v: u64| v >= apery[(v % n1) as usize];
    let gaps: Vec<u64> = (0..c).filter(|&v| !member(v)).map(|v| v * g).collect();
    let set = EpSet::from_predicate(g * c, g, |n| n % g == 0 && member(n / g));
    ClosureSummary { gcd: g, conductor: g * c, gaps, set }
}

impl fmt::Display for EpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let mut pieces = Vec::new();
        if !self.finite.is_empty() {
            let items: Vec<String> = self.finite.iter().map(|n| n.to_string()).collect();
            pieces.push(format!("{{{}}}", items.join(",")));
        }
        let p = self.period();
        for a in self.progression_starts() {
            pieces.push(format!("{}+{}*N", a, p));
        }
        write!(f, "{}", pieces.join(" | "))
    }
}
