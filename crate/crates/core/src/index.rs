//! Exponent index sets: eventually periodic sets plus enumerated escape hatches.

use std::fmt;

use num_integer::gcd;

use crate::epset::EpSet;

/// Index sets that are not eventually periodic and are only enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Enumerated {
    Primes,
}

impl Enumerated {
    pub fn name(self) -> &'static str {
        match self {
            Enumerated::Primes => "Primes",
        }
    }

    pub fn contains(self, n: u64) -> bool {
        match self {
            Enumerated::Primes => is_prime(n),
        }
    }

    /// The first `count` elements in increasing order.
    pub fn first(self, count: usize) -> Vec<u64> {
        match self {
            Enumerated::Primes => (2..).filter(|&n| is_prime(n)).take(count).collect(),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The set of admissible exponents `u_j` for one variable in a term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IndexSet {
    Periodic(EpSet),
    Enumerated(Enumerated),
}

/// Result of a gcd computed by enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilizedGcd {
    pub value: u64,
    /// False when the value rests on the stabilization window only.
    pub certified: bool,
}

impl IndexSet {
    /// `{0}`: the variable is absent.
    pub fn absent() -> Self {
        IndexSet::Periodic(EpSet::zero())
    }

    pub fn single(n: u64) -> Self {
        IndexSet::Periodic(EpSet::singleton(n))
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, IndexSet::Periodic(s) if *s == EpSet::zero())
    }

    pub fn as_periodic(&self) -> Option<&EpSet> {
        match self {
            IndexSet::Periodic(s) => Some(s),
            IndexSet::Enumerated(_) => None,
        }
    }

    pub fn is_enumerated(&self) -> bool {
        matches!(self, IndexSet::Enumerated(_))
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            IndexSet::Periodic(s) => s.contains(n),
            IndexSet::Enumerated(e) => e.contains(n),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            IndexSet::Periodic(s) => s.is_empty(),
            IndexSet::Enumerated(_) => false,
        }
    }

    pub fn min(&self) -> Option<u64> {
        match self {
            IndexSet::Periodic(s) => s.min(),
            IndexSet::Enumerated(e) => e.first(1).first().copied(),
        }
    }

    pub fn has_positive(&self) -> bool {
        match self {
            IndexSet::Periodic(s) => s.has_positive(),
            IndexSet::Enumerated(_) => true,
        }
    }

    /// Whether some element is at least `n`.
    pub fn reaches(&self, n: u64) -> bool {
        match self {
            IndexSet::Periodic(s) => !s.is_finite() || s.max().is_some_and(|m| m >= n),
            IndexSet::Enumerated(_) => true,
        }
    }

    pub fn elements_up_to(&self, h: u64) -> Vec<u64> {
        match self {
            IndexSet::Periodic(s) => s.enumerate(0, h),
            IndexSet::Enumerated(e) => (0..=h).filter(|&n| e.contains(n)).collect(),
        }
    }

    /// `gcd{ scale·u + shift : u ∈ self }`.
    ///
    /// Exact for periodic sets. Enumerated sets accumulate the gcd until it
    /// has not changed for `window` consecutive elements, giving up after
    /// `cap` elements; such results are flagged as uncertified.
    pub fn affine_gcd(&self, scale: u64, shift: i128, window: usize, cap: usize) -> StabilizedGcd {
        let value_at = |u: u64| (scale as i128 * u as i128 + shift).unsigned_abs() as u64;
        match self {
            IndexSet::Periodic(s) => {
                // gcd over a set equals gcd over a minimum plus differences,
                // and the differences are spanned by the witnesses.
                let Some(m) = s.min() else { return StabilizedGcd { value: 0, certified: true } };
                let q = s.params().q;
                StabilizedGcd { value: gcd(value_at(m), scale * q), certified: true }
            }
            IndexSet::Enumerated(e) => {
                let mut g = 0u64;
                let mut unchanged = 0usize;
                for u in e.first(cap) {
                    let next = gcd(g, value_at(u));
                    if next == g {
                        unchanged += 1;
                        if unchanged >= window {
                            break;
                        }
                    } else {
                        unchanged = 0;
                        g = next;
                    }
                }
                StabilizedGcd { value: g, certified: false }
            }
        }
    }
}

impl From<EpSet> for IndexSet {
    fn from(s: EpSet) -> Self {
        IndexSet::Periodic(s)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::Periodic(s) => write!(f, "{}", s),
            IndexSet::Enumerated(e) => write!(f, "{}", e.name()),
        }
    }
}
