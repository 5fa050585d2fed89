//! Monomial expansion of right-hand sides, used by the hat transform.

use crate::index::IndexSet;
use crate::scalar::Scalar;

use super::expr::{Construction, Expr};

/// `coef · x^x · Π y_j^{vars_j} · Π atom^e`, where atoms are construction
/// nodes that vanish to second order at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<T> {
    pub coef: T,
    pub x: u32,
    pub vars: Vec<u32>,
    pub atoms: Vec<(Expr<T>, u32)>,
}

impl<T: Scalar> Monomial<T> {
    fn unit(k: usize) -> Self {
        Monomial { coef: T::one(), x: 0, vars: vec![0; k], atoms: Vec::new() }
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.x == other.x
            && self.vars == other.vars
            && self.atoms.len() == other.atoms.len()
            && self.atoms.iter().all(|a| other.atoms.contains(a))
    }

    fn times(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        for (a, e) in &other.atoms {
            match atoms.iter_mut().find(|(b, _)| b == a) {
                Some((_, f)) => *f += e,
                None => atoms.push((a.clone(), *e)),
            }
        }
        Monomial {
            coef: self.coef.clone() * other.coef.clone(),
            x: self.x + other.x,
            vars: self.vars.iter().zip(&other.vars).map(|(a, b)| a + b).collect(),
            atoms,
        }
    }

    /// Degree-one monomial in `y` alone: `Some(j)` for `c·y_j`.
    pub fn linear_var(&self) -> Option<usize> {
        if self.x != 0 || !self.atoms.is_empty() || self.vars.iter().sum::<u32>() != 1 {
            return None;
        }
        self.vars.iter().position(|&e| e == 1)
    }

    pub fn is_constant(&self) -> bool {
        self.x == 0 && self.atoms.is_empty() && self.vars.iter().all(|&e| e == 0)
    }

    fn sort_key(&self) -> (u32, Vec<u32>, usize) {
        (self.x, self.vars.iter().map(|&e| u32::MAX - e).collect(), self.atoms.len())
    }

    fn to_expr(&self) -> Expr<T> {
        let mut factors = Vec::new();
        let bare = self.x == 0 && self.atoms.is_empty() && self.vars.iter().all(|&e| e == 0);
        if !self.coef.is_one() || bare {
            factors.push(Expr::Const(self.coef.clone()));
        }
        let power = |e: Expr<T>, k: u32| if k == 1 { e } else { Expr::Pow(Box::new(e), k) };
        if self.x > 0 {
            factors.push(power(Expr::X, self.x));
        }
        for (j, &e) in self.vars.iter().enumerate() {
            if e > 0 {
                factors.push(power(Expr::Var(j), e));
            }
        }
        for (a, e) in &self.atoms {
            factors.push(power(a.clone(), *e));
        }
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        }
    }
}

fn add_into<T: Scalar>(acc: &mut Vec<Monomial<T>>, m: Monomial<T>) {
    if m.coef.is_zero() {
        return;
    }
    match acc.iter_mut().find(|n| n.same_shape(&m)) {
        Some(n) => n.coef = n.coef.clone() + m.coef,
        None => acc.push(m),
    }
    acc.retain(|n| !n.coef.is_zero());
}

fn product<T: Scalar>(a: &[Monomial<T>], b: &[Monomial<T>]) -> Vec<Monomial<T>> {
    let mut out = Vec::new();
    for m in a {
        for n in b {
            add_into(&mut out, m.times(n));
        }
    }
    out
}

/// Expands `expr` over `k` variables. Constructions `Θ_J(A)` are split as
/// `[0∈J] + [1∈J]·A + Θ_{J∖{0,1}}(A)`, the last part kept as an atom.
pub fn expand<T: Scalar>(expr: &Expr<T>, k: usize) -> Vec<Monomial<T>> {
    match expr {
        Expr::Const(c) => {
            let mut m = Monomial::unit(k);
            m.coef = c.clone();
            let mut out = Vec::new();
            add_into(&mut out, m);
            out
        }
        Expr::X => {
            let mut m = Monomial::unit(k);
            m.x = 1;
            vec![m]
        }
        Expr::Var(j) => {
            let mut m = Monomial::unit(k);
            m.vars[*j] = 1;
            vec![m]
        }
        Expr::Sum(v) => {
            let mut out = Vec::new();
            for e in v {
                for m in expand(e, k) {
                    add_into(&mut out, m);
                }
            }
            out
        }
        Expr::Product(v) => {
            let mut acc = vec![Monomial::unit(k)];
            for e in v {
                acc = product(&acc, &expand(e, k));
            }
            acc
        }
        Expr::Pow(e, n) => {
            let base = expand(e, k);
            let mut acc = vec![Monomial::unit(k)];
            for _ in 0..*n {
                acc = product(&acc, &base);
            }
            acc
        }
        Expr::Construct { kind, index, arg } => expand_construct(*kind, index, arg, k),
    }
}

fn expand_construct<T: Scalar>(
    kind: Construction,
    index: &Option<IndexSet>,
    arg: &Expr<T>,
    k: usize,
) -> Vec<Monomial<T>> {
    let j = Expr::<T>::index_or_positive(index);
    if !j.contains(0) && !j.contains(1) {
        let mut m = Monomial::unit(k);
        m.atoms.push((Expr::Construct { kind, index: index.clone(), arg: Box::new(arg.clone()) }, 1));
        return vec![m];
    }
    let mut out = Vec::new();
    if j.contains(0) {
        add_into(&mut out, Monomial::unit(k));
    }
    if j.contains(1) {
        for m in expand(arg, k) {
            add_into(&mut out, m);
        }
    }
    let rest = match &j {
        IndexSet::Periodic(s) => {
            let r = s.without(0).without(1);
            (!r.is_empty()).then_some(IndexSet::Periodic(r))
        }
        IndexSet::Enumerated(_) => Some(j.clone()),
    };
    if let Some(r) = rest {
        let mut m = Monomial::unit(k);
        m.atoms.push((Expr::Construct { kind, index: Some(r), arg: Box::new(arg.clone()) }, 1));
        out.push(m);
    }
    out
}

/// Canonical ordering: by power of `x`, then by variable exponents.
pub fn sort_monomials<T: Scalar>(terms: &mut [Monomial<T>]) {
    terms.sort_by_key(|a| a.sort_key());
}

/// Rebuilds an expression from monomials in canonical order.
pub fn collect<T: Scalar>(mut terms: Vec<Monomial<T>>) -> Expr<T> {
    terms.retain(|m| !m.coef.is_zero());
    sort_monomials(&mut terms);
    match terms.len() {
        0 => Expr::Const(T::zero()),
        1 => terms[0].to_expr(),
        _ => Expr::Sum(terms.iter().map(Monomial::to_expr).collect()),
    }
}

/// Scales and accumulates: `Σ_l c_l · P_l`.
pub fn combine<T: Scalar>(parts: &[(T, Vec<Monomial<T>>)]) -> Vec<Monomial<T>> {
    let mut out = Vec::new();
    for (c, p) in parts {
        if c.is_zero() {
            continue;
        }
        for m in p {
            let mut m = m.clone();
            m.coef = m.coef * c.clone();
            add_into(&mut out, m);
        }
    }
    out
}
