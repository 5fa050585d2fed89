//! Least fixpoints on membership bitsets over `[0, H]`.

use super::{GammaTerm, SetSysError, SetSystem};
use crate::index::IndexSet;

/// Subset of `[0, H]` packed into machine words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    horizon: u64,
    words: Vec<u64>,
}

impl Bits {
    pub fn new(horizon: u64) -> Self {
        Bits { horizon, words: vec![0; (horizon as usize + 64) / 64] }
    }

    pub fn from_bools(v: &[bool]) -> Self {
        assert!(!v.is_empty(), "membership array covers at least [0, 0]");
        let mut b = Bits::new(v.len() as u64 - 1);
        for (n, &x) in v.iter().enumerate() {
            if x {
                b.insert(n as u64);
            }
        }
        b
    }

    pub fn from_fn(horizon: u64, f: impl Fn(u64) -> bool) -> Self {
        let mut b = Bits::new(horizon);
        for n in 0..=horizon {
            if f(n) {
                b.insert(n);
            }
        }
        b
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn contains(&self, n: u64) -> bool {
        n <= self.horizon && self.words[(n / 64) as usize] >> (n % 64) & 1 == 1
    }

    pub fn insert(&mut self, n: u64) {
        if n <= self.horizon {
            self.words[(n / 64) as usize] |= 1 << (n % 64);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn min(&self) -> Option<u64> {
        self.iter().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(wi as u64 * 64 + b)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..=self.horizon).map(|n| self.contains(n)).collect()
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    // self |= other << shift, truncated.
    fn or_shifted(&mut self, other: &Bits, shift: u64) {
        if shift > self.horizon {
            return;
        }
        let ws = (shift / 64) as usize;
        let bs = shift % 64;
        let n = self.words.len();
        for i in (ws..n).rev() {
            let src = i - ws;
            let mut v = other.words[src] << bs;
            if bs > 0 && src > 0 {
                v |= other.words[src - 1] >> (64 - bs);
            }
            self.words[i] |= v;
        }
        self.mask_tail();
    }

    fn mask_tail(&mut self) {
        let used = (self.horizon % 64) + 1;
        if used < 64 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << used) - 1;
        }
    }

    /// Truncated sumset.
    pub fn sum(&self, other: &Bits) -> Bits {
        let mut out = Bits::new(self.horizon);
        let (small, large) = if self.count() <= other.count() { (self, other) } else { (other, self) };
        for s in small.iter() {
            out.or_shifted(large, s);
        }
        out
    }

    pub fn count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// `ℕ⋆self` truncated.
    pub fn closure(&self) -> Bits {
        let mut z = self.clone();
        z.insert(0);
        loop {
            let next = z.sum(&z);
            if next == z {
                return z;
            }
            z = next;
        }
    }
}

// k⋆Y for increasing k, computed lazily.
struct Powers<'a> {
    y: &'a Bits,
    list: Vec<Bits>,
    // Once two consecutive powers coincide (0 ∈ Y) or one is empty,
    // all later powers equal the last.
    frozen: bool,
}

impl<'a> Powers<'a> {
    fn new(y: &'a Bits) -> Self {
        let mut zero = Bits::new(y.horizon);
        zero.insert(0);
        Powers { y, list: vec![zero], frozen: false }
    }

    fn get(&mut self, k: u64) -> &Bits {
        while !self.frozen && (self.list.len() as u64) <= k {
            let next = self.list.last().unwrap().sum(self.y);
            let settled = next.is_empty() || next == *self.list.last().unwrap();
            self.list.push(next);
            self.frozen = settled;
        }
        let idx = (k as usize).min(self.list.len() - 1);
        &self.list[idx]
    }
}

/// `E⋆Y` truncated to the horizon of `y`.
pub(crate) fn star_bits(e: &IndexSet, y: &Bits) -> Bits {
    let h = y.horizon;
    let mut out = Bits::new(h);
    if e.contains(0) {
        out.insert(0);
    }
    if y.is_empty() {
        return out;
    }
    let mut powers = Powers::new(y);
    match e {
        IndexSet::Periodic(s) => {
            for &a in s.finite_part() {
                out.union_with(powers.get(a));
            }
            let p = s.period();
            if p > 0 {
                let closure = powers.get(p).closure();
                for a in s.progression_starts() {
                    let part = powers.get(a).sum(&closure);
                    out.union_with(&part);
                }
            }
        }
        IndexSet::Enumerated(_) => {
            for u in e.elements_up_to(h + 1) {
                let pw = powers.get(u);
                if pw.is_empty() {
                    break;
                }
                out.union_with(pw);
            }
            // Members beyond h+1 only matter when 0 ∈ Y; then powers are
            // nondecreasing and the last computed power already covers them.
        }
    }
    out
}

struct Compiled<'a> {
    sys: &'a SetSystem,
    bases: Vec<Vec<Bits>>,
}

impl<'a> Compiled<'a> {
    fn new(sys: &'a SetSystem, h: u64) -> Self {
        let bases = sys
            .equations()
            .iter()
            .map(|eq| eq.iter().map(|t| Bits::from_fn(h, |n| t.base.contains(n))).collect())
            .collect();
        Compiled { sys, bases }
    }

    fn term(&self, base: &Bits, t: &GammaTerm, ys: &[Bits]) -> Bits {
        let mut acc = base.clone();
        for (j, e) in t.exponents.iter().enumerate() {
            if e.is_absent() {
                continue;
            }
            acc = acc.sum(&star_bits(e, &ys[j]));
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    fn apply(&self, ys: &[Bits]) -> Vec<Bits> {
        let h = ys.first().map_or(0, |b| b.horizon);
        (0..self.sys.len())
            .map(|i| {
                let mut out = Bits::new(h);
                for (t, base) in self.sys.equation(i).iter().zip(&self.bases[i]) {
                    out.union_with(&self.term(base, t, ys));
                }
                out
            })
            .collect()
    }
}

/// Least fixpoint of `Γ` on `[0, H]` by Kleene iteration from ∅.
pub fn least_fixpoint(sys: &SetSystem, horizon: u64) -> Result<Vec<Bits>, SetSysError> {
    seeded_fixpoint(sys, horizon, &vec![Bits::new(horizon); sys.len()])
}

/// Iterates `Γ` on `[0, H]` from `seed` until the iterate repeats.
pub fn seeded_fixpoint(sys: &SetSystem, horizon: u64, seed: &[Bits]) -> Result<Vec<Bits>, SetSysError> {
    if horizon == 0 {
        return Err(SetSysError::ZeroHorizon);
    }
    let compiled = Compiled::new(sys, horizon);
    let cap = sys.len() * (horizon as usize + 1) + 2;
    let mut ys = seed.to_vec();
    for _ in 0..cap {
        let next = compiled.apply(&ys);
        if next == ys {
            return Ok(ys);
        }
        ys = next;
    }
    Err(SetSysError::NoConvergence(cap))
}
