//! Slow reference implementations for tests. Nothing here calls into the
//! engines beyond reading system data and membership queries.

use num_rational::BigRational;
use num_traits::{One, Zero};
use spectre::pseries::{Construction, Expr, PsSystem};
use spectre::setsys::SetSystem;
use spectre::IndexSet;

/// Membership array on `[0, H]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolVec(pub Vec<bool>);

impl BoolVec {
    pub fn empty(h: u64) -> Self {
        BoolVec(vec![false; h as usize + 1])
    }

    pub fn from_fn(h: u64, f: impl Fn(u64) -> bool) -> Self {
        BoolVec((0..=h).map(f).collect())
    }

    pub fn from_elems(h: u64, elems: &[u64]) -> Self {
        let mut v = Self::empty(h);
        for &e in elems {
            if e <= h {
                v.0[e as usize] = true;
            }
        }
        v
    }

    pub fn horizon(&self) -> u64 {
        self.0.len() as u64 - 1
    }

    pub fn get(&self, n: u64) -> bool {
        self.0.get(n as usize).copied().unwrap_or(false)
    }

    pub fn elems(&self) -> Vec<u64> {
        (0..self.0.len()).filter(|&i| self.0[i]).map(|i| i as u64).collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn union(&self, other: &Self) -> Self {
        BoolVec(self.0.iter().zip(&other.0).map(|(a, b)| *a || *b).collect())
    }

    /// `{a + b}` on `[0, H]`: for each `a ∈ self`, OR in `other` shifted by `a`.
    pub fn sum(&self, other: &Self) -> Self {
        let h = self.horizon() as usize;
        let n = h / 64 + 1;
        let mut b = vec![0u64; n];
        for i in other.elems() {
            b[i as usize / 64] |= 1 << (i % 64);
        }
        let mut out = vec![0u64; n];
        for a in self.elems() {
            let (ws, bs) = (a as usize / 64, a % 64);
            for i in 0..n - ws {
                out[i + ws] |= b[i] << bs;
                if bs > 0 && i + ws + 1 < n {
                    out[i + ws + 1] |= b[i] >> (64 - bs);
                }
            }
        }
        BoolVec((0..=h).map(|i| out[i / 64] >> (i % 64) & 1 == 1).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Sum,
    /// `n·A`, ignoring `B`.
    ScalarMul(u64),
    /// `n⋆A`, ignoring `B`.
    NStar(u64),
    /// `A⋆B` with `A` as the index set.
    Star,
    /// `ℕ⋆A`, ignoring `B`.
    NatClosure,
}

fn n_fold(b: &BoolVec, n: u64) -> BoolVec {
    let mut acc = BoolVec::from_elems(b.horizon(), &[0]);
    for _ in 0..n {
        acc = acc.sum(b);
    }
    acc
}

/// `J⋆B` on `[0, H]`, with `J` given by membership. `J` is probed up to
/// `5H + 1024`, which is ample for every index set the tests build.
pub fn brute_star(j: impl Fn(u64) -> bool, b: &BoolVec) -> BoolVec {
    let h = b.horizon();
    let probe = 5 * h + 1024;
    let mut later = vec![false; probe as usize + 2];
    for e in (0..=probe).rev() {
        later[e as usize] = j(e) || later[e as usize + 1];
    }
    let mut out = BoolVec::empty(h);
    let mut power = BoolVec::from_elems(h, &[0]);
    let mut e = 0u64;
    while e <= probe && later[e as usize] {
        if j(e) {
            out = out.union(&power);
        }
        let next = power.sum(b);
        if next.is_empty() {
            break;
        }
        if next == power {
            // 0 ∈ B: every later power is the same set.
            if later[e as usize + 1] {
                out = out.union(&power);
            }
            break;
        }
        power = next;
        e += 1;
    }
    out
}

pub fn brute_set_op(op: SetOp, a: &BoolVec, b: &BoolVec, h: u64) -> BoolVec {
    assert_eq!(a.horizon(), h);
    match op {
        SetOp::Union => a.union(b),
        SetOp::Sum => a.sum(b),
        SetOp::ScalarMul(n) => BoolVec::from_fn(h, |i| {
            if n == 0 {
                i == 0 && !a.is_empty()
            } else {
                i % n == 0 && a.get(i / n)
            }
        }),
        SetOp::NStar(n) => n_fold(a, n),
        SetOp::Star => brute_star(|e| a.get(e), b),
        SetOp::NatClosure => brute_star(|_| true, a),
    }
}

/// The membership of `J` on `[0, H]`.
pub fn index_bits(j: &IndexSet, h: u64) -> BoolVec {
    BoolVec::from_fn(h, |i| j.contains(i))
}

fn eval_term(base: &BoolVec, exps: &[IndexSet], ys: &[BoolVec]) -> BoolVec {
    let mut acc = base.clone();
    for (j, e) in exps.iter().enumerate() {
        if acc.is_empty() {
            break;
        }
        let part = brute_star(|n| e.contains(n), &ys[j]);
        acc = acc.sum(&part);
    }
    acc
}

/// Kleene iteration `Γ^(t)(∅)` on `[0, H]` until nothing changes.
pub fn brute_fixpoint(sys: &SetSystem, h: u64) -> Vec<BoolVec> {
    let k = sys.len();
    let bases: Vec<Vec<BoolVec>> = sys
        .equations()
        .iter()
        .map(|eq| eq.iter().map(|t| BoolVec::from_fn(h, |n| t.base.contains(n))).collect())
        .collect();
    let mut ys = vec![BoolVec::empty(h); k];
    loop {
        let next: Vec<BoolVec> = (0..k)
            .map(|i| {
                let mut out = BoolVec::empty(h);
                for (t, base) in sys.equation(i).iter().zip(&bases[i]) {
                    out = out.union(&eval_term(base, &t.exponents, &ys));
                }
                out
            })
            .collect();
        if next == ys {
            return ys;
        }
        ys = next;
    }
}

/// Truncated coefficient list, degrees `0..=N`.
pub type Coeffs = Vec<BigRational>;

fn zero(n: usize) -> Coeffs {
    vec![BigRational::zero(); n + 1]
}

fn int(v: u64) -> BigRational {
    BigRational::from_integer(v.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
    /// `A(B(x))`.
    Compose,
}

pub fn naive_series(op: SeriesOp, a: &[BigRational], b: &[BigRational], n: usize) -> Coeffs {
    let get = |s: &[BigRational], i: usize| s.get(i).cloned().unwrap_or_else(BigRational::zero);
    match op {
        SeriesOp::Add => (0..=n).map(|i| get(a, i) + get(b, i)).collect(),
        SeriesOp::Mul => {
            let mut out = zero(n);
            for i in 0..=n {
                for j in 0..=n - i {
                    out[i + j] += get(a, i) * get(b, j);
                }
            }
            out
        }
        SeriesOp::Compose => {
            assert!(get(b, 0).is_zero(), "inner series must vanish at 0");
            let mut out = zero(n);
            let mut power = zero(n);
            power[0] = BigRational::one();
            for i in 0..=n {
                let c = get(a, i);
                for d in 0..=n {
                    out[d] += c.clone() * power[d].clone();
                }
                power = naive_series(SeriesOp::Mul, &power, b, n);
            }
            out
        }
    }
}

/// Euler transform `Π_k (1 − x^k)^{−a_k} − 1`, via the divisor recurrence.
pub fn euler(a: &[BigRational], n: usize) -> Coeffs {
    let get = |i: usize| a.get(i).cloned().unwrap_or_else(BigRational::zero);
    let c: Vec<BigRational> = (0..=n)
        .map(|k| {
            let mut s = BigRational::zero();
            for d in 1..=k {
                if k % d == 0 {
                    s += int(d as u64) * get(d);
                }
            }
            s
        })
        .collect();
    let mut b = zero(n);
    b[0] = BigRational::one();
    for m in 1..=n {
        let mut s = BigRational::zero();
        for k in 1..=m {
            s += c[k].clone() * b[m - k].clone();
        }
        b[m] = s / int(m as u64);
    }
    b[0] = BigRational::zero();
    b
}

/// Multisets of exactly `j` atoms, by direct expansion of
/// `Π_k (Σ_r C(a_k+r−1, r) t^r x^{kr})`. Rational `a_k` use the
/// generalized binomial coefficient.
pub fn mset_by_cardinality(a: &[BigRational], n: usize, jmax: usize) -> Vec<Coeffs> {
    // table[j][d]
    let mut table = vec![zero(n); jmax + 1];
    table[0][0] = BigRational::one();
    for k in 1..=n {
        let ak = a.get(k).cloned().unwrap_or_else(BigRational::zero);
        if ak.is_zero() {
            continue;
        }
        let mut next = vec![zero(n); jmax + 1];
        for j in 0..=jmax {
            for d in 0..=n {
                if table[j][d].is_zero() {
                    continue;
                }
                let mut choose = BigRational::one();
                let mut r = 0usize;
                while j + r <= jmax && d + k * r <= n {
                    next[j + r][d + k * r] += table[j][d].clone() * choose.clone();
                    choose = choose * (ak.clone() + int(r as u64)) / int(r as u64 + 1);
                    r += 1;
                }
            }
        }
        table = next;
    }
    table
}

fn naive_eval(e: &Expr<BigRational>, env: &[Coeffs], n: usize) -> Coeffs {
    match e {
        Expr::Const(c) => {
            let mut out = zero(n);
            out[0] = c.clone();
            out
        }
        Expr::X => {
            let mut out = zero(n);
            if n >= 1 {
                out[1] = BigRational::one();
            }
            out
        }
        Expr::Var(j) => env[*j].clone(),
        Expr::Sum(v) => v.iter().fold(zero(n), |acc, t| naive_series(SeriesOp::Add, &acc, &naive_eval(t, env, n), n)),
        Expr::Product(v) => v.iter().fold(naive_eval(&Expr::Const(BigRational::one()), env, n), |acc, t| {
            naive_series(SeriesOp::Mul, &acc, &naive_eval(t, env, n), n)
        }),
        Expr::Pow(b, k) => {
            let base = naive_eval(b, env, n);
            let mut acc = naive_eval(&Expr::Const(BigRational::one()), env, n);
            for _ in 0..*k {
                acc = naive_series(SeriesOp::Mul, &acc, &base, n);
            }
            acc
        }
        Expr::Construct { kind, index, arg } => {
            let a = naive_eval(arg, env, n);
            let j = index.clone();
            let member = |i: u64| j.as_ref().map_or(i >= 1, |s| s.contains(i));
            match kind {
                Construction::Seq => {
                    let mut out = zero(n);
                    let mut power = naive_eval(&Expr::Const(BigRational::one()), env, n);
                    for i in 0..=n as u64 {
                        if member(i) {
                            out = naive_series(SeriesOp::Add, &out, &power, n);
                        }
                        power = naive_series(SeriesOp::Mul, &power, &a, n);
                    }
                    out
                }
                Construction::MSet if j.is_none() => euler(&a, n),
                Construction::MSet => {
                    let table = mset_by_cardinality(&a, n, n);
                    let mut out = zero(n);
                    for (c, row) in table.iter().enumerate() {
                        if member(c as u64) {
                            out = naive_series(SeriesOp::Add, &out, row, n);
                        }
                    }
                    out
                }
                Construction::Cycle | Construction::DCycle => panic!("no coefficient oracle for {}", kind),
            }
        }
    }
}

/// Direct iteration `y ← G(x, y)` from zero, `N + 1` rounds.
pub fn naive_fixpoint(sys: &PsSystem<BigRational>, n: usize) -> Vec<Coeffs> {
    let mut ys = vec![zero(n); sys.len()];
    for _ in 0..=n {
        ys = sys.equations().iter().map(|e| naive_eval(e, &ys, n)).collect();
    }
    ys
}

/// Spectral radius of a nonnegative matrix from `‖M^(2^s)‖^(2^−s)`, by
/// repeated normalized squaring.
pub fn spectral_radius(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    let mut b: Vec<Vec<f64>> = m.to_vec();
    let mut log_scale = 0.0f64;
    let steps = 48;
    for _ in 0..steps {
        let s = b.iter().flatten().fold(0.0f64, |a, &x| a.max(x.abs()));
        if s == 0.0 {
            return 0.0;
        }
        for row in b.iter_mut() {
            for x in row.iter_mut() {
                *x /= s;
            }
        }
        log_scale = 2.0 * (log_scale + s.ln());
        let mut sq = vec![vec![0.0; k]; k];
        for (out, row) in sq.iter_mut().zip(&b) {
            for (&v, other) in row.iter().zip(&b) {
                if v == 0.0 {
                    continue;
                }
                for (o, &w) in out.iter_mut().zip(other) {
                    *o += v * w;
                }
            }
        }
        b = sq;
    }
    let s = b.iter().flatten().fold(0.0f64, |a, &x| a.max(x.abs()));
    if s == 0.0 {
        return 0.0;
    }
    ((log_scale + s.ln()) / 2f64.powi(steps)).exp()
}
