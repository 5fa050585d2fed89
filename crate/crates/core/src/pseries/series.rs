use std::fmt;

use crate::epset::EpSet;
use crate::index::IndexSet;
use crate::scalar::Scalar;

/// Power series in `x` truncated at degree `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    coeffs: Vec<T>,
    nonneg: bool,
}

impl<T: Scalar> Series<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a series keeps at least its constant term");
        let nonneg = coeffs.iter().all(|c| !c.is_negative_value());
        Series { coeffs, nonneg }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_coeffs(vec![T::zero(); n + 1])
    }

    pub fn constant(c: T, n: usize) -> Self {
        let mut s = Self::zero(n);
        s.coeffs[0] = c;
        s.nonneg = !s.coeffs[0].is_negative_value();
        s
    }

    pub fn one(n: usize) -> Self {
        Self::constant(T::one(), n)
    }

    /// The monomial `c·x^e`, zero when `e > n`.
    pub fn monomial(c: T, e: usize, n: usize) -> Self {
        let mut coeffs = vec![T::zero(); n + 1];
        if e <= n {
            coeffs[e] = c;
        }
        Self::from_coeffs(coeffs)
    }

    pub fn x(n: usize) -> Self {
        Self::monomial(T::one(), 1, n)
    }

    /// Truncation degree `N`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, n: usize) -> Self {
        let mut coeffs: Vec<T> = self.coeffs.iter().take(n + 1).cloned().collect();
        coeffs.resize(n + 1, T::zero());
        Self::from_coeffs(coeffs)
    }

    /// Lowest degree with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn support(&self) -> Vec<u64> {
        (0..self.coeffs.len()).filter(|&i| !self.coeffs[i].is_zero()).map(|i| i as u64).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.degree().min(other.degree());
        Self::from_coeffs((0..=n).map(|i| self.coeffs[i].clone() + other.coeffs[i].clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.degree().min(other.degree());
        let mut out = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out[i + j] = out[i + j].clone() + a.clone() * b.clone();
                }
            }
        }
        Self::from_coeffs(out)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.degree());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `A(x^m)`.
    pub fn dilate(&self, m: usize) -> Self {
        let n = self.degree();
        let mut out = vec![T::zero(); n + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if i * m > n {
                break;
            }
            out[i * m] = c.clone();
        }
        Self::from_coeffs(out)
    }

    /// `exp(A) ` for `A(0) = 0`, via `n·e_n = Σ k·a_k·e_{n−k}`.
    pub fn exp(&self) -> Self {
        assert!(self.coeffs[0].is_zero(), "exp needs a vanishing constant term");
        let n = self.degree();
        let mut e = vec![T::zero(); n + 1];
        e[0] = T::one();
        for i in 1..=n {
            let mut acc = T::zero();
            for k in 1..=i {
                if !self.coeffs[k].is_zero() {
                    acc = acc + T::from_count(k as u64) * self.coeffs[k].clone() * e[i - k].clone();
                }
            }
            e[i] = acc / T::from_count(i as u64);
        }
        Self::from_coeffs(e)
    }

    /// `Σ_{j∈J, j≤N} A^j` for `A(0) = 0`.
    pub fn seq(&self, index: &IndexSet) -> Self {
        let n = self.degree();
        let Some(v) = self.valuation() else {
            return if index.contains(0) { Self::one(n) } else { Self::zero(n) };
        };
        // A^j vanishes mod x^(N+1) once j·v > N.
        let top = (n / v) as u64;
        let periodic = index.as_periodic().filter(|j| !j.is_finite());
        let Some(j) = periodic else {
            let mut out = Self::zero(n);
            let mut power = Self::one(n);
            for j in 0..=top {
                if j > 0 {
                    power = power.mul(self);
                }
                if index.contains(j) {
                    out = out.add(&power);
                }
            }
            return out;
        };
        // Finite part term by term, each tail class as A^s (1 − A^p)^-1.
        let p = j.period();
        let starts = j.progression_starts();
        let needed = j.finite_part().iter().chain(&starts).chain([&p]).copied().filter(|&k| k <= top).max().unwrap_or(0);
        let mut powers = vec![Self::one(n)];
        for k in 1..=needed as usize {
            powers.push(powers[k - 1].mul(self));
        }
        let power = |k: u64| if k <= top { powers[k as usize].clone() } else { Self::zero(n) };
        let mut out = Self::zero(n);
        for &f in j.finite_part() {
            out = out.add(&power(f));
        }
        let mut heads = Self::zero(n);
        for &s in &starts {
            heads = heads.add(&power(s));
        }
        out.add(&heads.mul(&power(p).geometric()))
    }

    /// `1/(1 − A)` for `A(0) = 0`.
    pub fn geometric(&self) -> Self {
        assert!(self.coeffs[0].is_zero(), "geometric series needs a vanishing constant term");
        let n = self.degree();
        let mut c = vec![T::zero(); n + 1];
        c[0] = T::one();
        for i in 1..=n {
            let mut acc = T::zero();
            for k in 1..=i {
                if !self.coeffs[k].is_zero() {
                    acc = acc + self.coeffs[k].clone() * c[i - k].clone();
                }
            }
            c[i] = acc;
        }
        Self::from_coeffs(c)
    }

    /// `exp(Σ_{m≥1} A(x^m)/m) − 1` for `A(0) = 0`.
    pub fn mset(&self) -> Self {
        let n = self.degree();
        let mut acc = Self::zero(n);
        for m in 1..=n {
            acc = acc.add(&self.dilate(m).scale(&(T::one() / T::from_count(m as u64))));
        }
        let mut e = acc.exp();
        e.coeffs[0] = e.coeffs[0].clone() - T::one();
        Self::from_coeffs(e.coeffs)
    }

    /// Multisets whose cardinality lies in `J`: the coefficients `F_j` of
    /// `t^j` in `exp(Σ_m t^m A(x^m)/m)`, summed over `j ∈ J`.
    pub fn mset_restricted(&self, index: &IndexSet) -> Self {
        let n = self.degree();
        let mut out = if index.contains(0) { Self::one(n) } else { Self::zero(n) };
        let Some(v) = self.valuation() else { return out };
        // F_j has valuation ≥ j·v, so only j ≤ N/v matter.
        let jmax = index.elements_up_to((n / v) as u64).last().copied().unwrap_or(0) as usize;
        let dilated: Vec<Self> =
            (0..=jmax).map(|m| if m == 0 { Self::zero(n) } else { self.dilate(m) }).collect();
        let mut f: Vec<Self> = vec![Self::one(n)];
        for j in 1..=jmax {
            let mut acc = Self::zero(n);
            for m in 1..=j {
                acc = acc.add(&dilated[m].mul(&f[j - m]));
            }
            let fj = acc.scale(&(T::one() / T::from_count(j as u64)));
            if index.contains(j as u64) {
                out = out.add(&fj);
            }
            f.push(fj);
        }
        out
    }

    /// `self(inner(x))` for `inner(0) = 0`, by Horner's rule.
    pub fn compose(&self, inner: &Self) -> Self {
        assert!(inner.coeffs[0].is_zero(), "composition needs a vanishing inner constant");
        let n = self.degree().min(inner.degree());
        let inner = inner.truncate(n);
        let mut acc = Self::zero(n);
        for c in self.coeffs.iter().take(n + 1).rev() {
            acc = acc.mul(&inner).add(&Self::constant(c.clone(), n));
        }
        acc
    }

    /// Support on `[0, N]` as a finite set.
    pub fn spectrum(&self) -> EpSet {
        EpSet::finite(self.support())
    }
}

impl<T: Scalar> fmt::Display for Series<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coef = if c.is_one() && i > 0 { String::new() } else { format!("{}", c) };
            let sep = if coef.is_empty() || i == 0 { "" } else { "*" };
            terms.push(match i {
                0 => coef,
                1 => format!("{}{}x", coef, sep),
                _ => format!("{}{}x^{}", coef, sep, i),
            });
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        write!(f, "{} + O(x^{})", terms.join(" + "), self.degree() + 1)
    }
}
