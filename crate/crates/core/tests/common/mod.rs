#![allow(dead_code)]

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use spectre::pseries::{Construction, Expr, PsSystem};
use spectre::setsys::{GammaTerm, SetSystem};
use spectre::{EpSet, IndexSet, RatSystem};
use spectre_oracle::BoolVec;

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(path).unwrap()
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn bits(a: &EpSet, h: u64) -> BoolVec {
    BoolVec::from_fn(h, |n| a.contains(n))
}

/// A finite set plus up to two progressions, small enough that interesting
/// structure shows up well below the horizon.
pub fn random_epset(rng: &mut impl Rng) -> EpSet {
    let nf = rng.gen_range(0..5);
    let finite: Vec<u64> = (0..nf).map(|_| rng.gen_range(0..25)).collect();
    let nb = rng.gen_range(0..3);
    let blocks: Vec<(u64, u64)> = (0..nb).map(|_| (rng.gen_range(0..30), rng.gen_range(1..8))).collect();
    EpSet::normalize(&finite, &blocks)
}

pub fn random_nonempty_epset(rng: &mut impl Rng) -> EpSet {
    loop {
        let s = random_epset(rng);
        if !s.is_empty() {
            return s;
        }
    }
}

/// Index sets in the range the examples use, none containing 0 unless noted.
pub fn random_exponent(rng: &mut impl Rng) -> IndexSet {
    let choices = [
        EpSet::singleton(1),
        EpSet::singleton(2),
        EpSet::finite([1, 2]),
        EpSet::finite([0, 1]),
        EpSet::finite([0, 2]),
        EpSet::positives(),
        EpSet::positive_evens(),
        EpSet::progression(1, 3),
        EpSet::singleton(3),
        EpSet::odds(),
    ];
    choices.choose(rng).unwrap().clone().into()
}

/// An elementary system: every base lies in ℙ, except bases containing 0
/// that come with a single exponent family of weight ≥ 2.
pub fn random_elementary_system(rng: &mut impl Rng, k: usize) -> SetSystem {
    let vars: Vec<String> = (0..k).map(|i| format!("Y{}", i)).collect();
    let eqs = (0..k)
        .map(|_| {
            let nt = rng.gen_range(1..4);
            (0..nt)
                .map(|_| {
                    if rng.gen_bool(0.15) {
                        let j = rng.gen_range(0..k);
                        let e = [EpSet::singleton(2), EpSet::positive_evens(), EpSet::finite([2, 3])]
                            .choose(rng)
                            .unwrap()
                            .clone();
                        let base = EpSet::zero().union(&small_positive_set(rng));
                        return GammaTerm::constant(base, k).with(j, e);
                    }
                    let mut t = GammaTerm::constant(small_positive_set(rng), k);
                    for j in 0..k {
                        if rng.gen_bool(0.35) {
                            t = t.with(j, random_exponent(rng));
                        }
                    }
                    t
                })
                .collect()
        })
        .collect();
    SetSystem::new(vars, eqs).unwrap()
}

fn small_positive_set(rng: &mut impl Rng) -> EpSet {
    loop {
        let s = if rng.gen_bool(0.8) {
            EpSet::finite((0..rng.gen_range(1..3)).map(|_| rng.gen_range(1..6)))
        } else {
            EpSet::progression(rng.gen_range(1..6), rng.gen_range(1..5))
        };
        if !s.is_empty() {
            return s;
        }
    }
}

fn coef(rng: &mut impl Rng) -> BigRational {
    [q(1, 1), q(1, 1), q(2, 1), q(1, 2), q(3, 1)].choose(rng).unwrap().clone()
}

fn var_power(rng: &mut impl Rng, k: usize) -> Expr<BigRational> {
    let j = Expr::Var(rng.gen_range(0..k));
    match rng.gen_range(0..4) {
        0 => Expr::Pow(Box::new(j), 2),
        _ => j,
    }
}

/// Elementary series systems: every term carries a factor `x`, or has
/// degree ≥ 2 in the variables.
pub fn random_series_system(rng: &mut impl Rng, k: usize) -> RatSystem {
    let vars: Vec<String> = (0..k).map(|i| format!("Y{}", i)).collect();
    let eqs = (0..k)
        .map(|_| {
            let nt = rng.gen_range(1..4);
            let mut terms: Vec<Expr<BigRational>> = (0..nt).map(|_| random_series_term(rng, k)).collect();
            if rng.gen_bool(0.7) {
                terms.push(Expr::Pow(Box::new(Expr::X), rng.gen_range(1..3)));
            }
            if terms.len() == 1 {
                terms.pop().unwrap()
            } else {
                Expr::Sum(terms)
            }
        })
        .collect();
    PsSystem::new(vars, eqs).unwrap()
}

fn random_series_term(rng: &mut impl Rng, k: usize) -> Expr<BigRational> {
    let x = Expr::Pow(Box::new(Expr::X), rng.gen_range(1..4));
    let mut factors = vec![Expr::Const(coef(rng)), x];
    match rng.gen_range(0..6) {
        0 | 1 => factors.push(var_power(rng, k)),
        2 => {
            factors.push(var_power(rng, k));
            factors.push(Expr::Var(rng.gen_range(0..k)));
        }
        3 => {
            let arg = if rng.gen_bool(0.5) {
                Expr::Var(rng.gen_range(0..k))
            } else {
                Expr::Product(vec![Expr::X, Expr::Var(rng.gen_range(0..k))])
            };
            let j = [None, Some(EpSet::finite([0, 2])), Some(EpSet::progression(1, 2)), Some(EpSet::singleton(2))]
                .choose(rng)
                .unwrap()
                .clone()
                .map(IndexSet::from);
            factors.push(Expr::construct(Construction::Seq, j, arg));
        }
        4 => {
            let arg = Expr::Sum(vec![Expr::X, Expr::Var(rng.gen_range(0..k))]);
            let j = [None, Some(EpSet::finite([2, 3])), Some(EpSet::finite([0, 1, 2]))]
                .choose(rng)
                .unwrap()
                .clone()
                .map(IndexSet::from);
            factors.push(Expr::construct(Construction::MSet, j, arg));
        }
        _ => {
            // Degree two in the variables, no x.
            return Expr::Product(vec![Expr::Const(coef(rng)), Expr::Var(rng.gen_range(0..k)), Expr::Var(rng.gen_range(0..k))]);
        }
    }
    Expr::Product(factors)
}

/// Random nonnegative rational matrix, scaled so that spectral radii
/// cluster around 1.
pub fn random_matrix(rng: &mut impl Rng) -> Vec<Vec<BigRational>> {
    let k = rng.gen_range(1..6);
    let den = rng.gen_range(1..(3 * k as i64 + 2));
    (0..k)
        .map(|_| {
            (0..k)
                .map(|_| if rng.gen_bool(0.45) { q(0, 1) } else { q(rng.gen_range(1..4), den) })
                .collect()
        })
        .collect()
}
