mod common;

use common::*;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectre::compile::compile;
use spectre::pseries::{self, Expr, Matrix, NeumannVerdict, PsSystem, Series};
use spectre::setsys::least_fixpoint;
use spectre::{EpSet, IndexSet, RatSystem};
use spectre_oracle::{euler, mset_by_cardinality, naive_fixpoint};

const N: usize = 30;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// Nonnegative series with small rational coefficients, vanishing at 0.
fn series() -> impl Strategy<Value = Series<BigRational>> {
    prop::collection::vec(prop_oneof![3 => Just((0i64, 1i64)), 2 => (1..4i64, 1..3i64)], N).prop_map(|cs| {
        let mut coeffs = vec![BigRational::zero()];
        coeffs.extend(cs.into_iter().map(|(n, d)| q(n, d)));
        Series::from_coeffs(coeffs)
    })
}

fn integer_series() -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec(prop_oneof![Just(0i64), 0..4i64], 16).prop_map(|cs| {
        std::iter::once(BigRational::zero()).chain(cs.into_iter().map(|c| q(c, 1))).collect()
    })
}

fn index() -> impl Strategy<Value = IndexSet> {
    prop::sample::select(vec![
        EpSet::positives(),
        EpSet::naturals(),
        EpSet::finite([0, 2]),
        EpSet::finite([2, 3]),
        EpSet::positive_evens(),
        EpSet::progression(1, 3),
        EpSet::normalize(&[1], &[(4, 2)]),
    ])
    .prop_map(IndexSet::from)
}

fn spec(s: &Series<BigRational>) -> EpSet {
    pseries::spectrum_extract(s).unwrap().set
}

fn system() -> impl Strategy<Value = RatSystem> {
    (any::<u64>(), 1..=3usize).prop_map(|(seed, k)| random_series_system(&mut ChaCha8Rng::seed_from_u64(seed), k))
}

/// Adds linear terms whose Jacobian has a nonnegative Neumann inverse:
/// either strictly lower triangular, or small enough to keep the radius
/// below one.
fn with_linear_terms(sys: &RatSystem, seed: u64) -> RatSystem {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = sys.len();
    let eqs = sys
        .equations()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut terms = match e {
                Expr::Sum(v) => v.clone(),
                other => vec![other.clone()],
            };
            for j in 0..k {
                let c = if j < i && rng.gen_bool(0.5) {
                    Some(q(1, rng.gen_range(1..3)))
                } else if rng.gen_bool(0.3) {
                    Some(q(1, 4))
                } else {
                    None
                };
                if let Some(c) = c {
                    terms.push(Expr::Product(vec![Expr::Const(c), Expr::Var(j)]));
                }
            }
            Expr::Sum(terms)
        })
        .collect();
    PsSystem::new(sys.variables().to_vec(), eqs).unwrap()
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn spectrum_is_a_homomorphism(a in series(), b in series(), j in index()) {
        let (sa, sb) = (spec(&a), spec(&b));
        let cut = |s: EpSet| s.below(N as u64 + 1);
        prop_assert_eq!(spec(&a.add(&b)), cut(sa.union(&sb)));
        prop_assert_eq!(spec(&a.mul(&b)), cut(sa.sum(&sb)));
        prop_assert_eq!(spec(&a.compose(&b)), cut(sa.star(&sb)));
        let jset = j.as_periodic().unwrap().clone();
        prop_assert_eq!(spec(&a.seq(&j)), cut(jset.star(&sa)));
        prop_assert_eq!(spec(&a.mset_restricted(&j)), cut(jset.star(&sa)));
    }

    #[test]
    fn multisets_match_euler_transform(a in integer_series()) {
        let n = a.len() - 1;
        let s = Series::from_coeffs(a.clone());
        prop_assert_eq!(s.mset().coeffs().to_vec(), euler(&a, n));
        prop_assert_eq!(s.mset_restricted(&EpSet::positives().into()), s.mset());
    }

    #[test]
    fn multisets_of_a_sum_factor(a in series(), b in series()) {
        let n = a.degree();
        let one = Series::one(n);
        let lhs = a.add(&b).mset();
        let rhs = one.add(&a.mset()).mul(&one.add(&b.mset())).add(&Series::constant(q(-1, 1), n));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn restricted_multisets_match_cardinality_expansion(a in integer_series(), j in index()) {
        let n = a.len() - 1;
        let by_card = mset_by_cardinality(&a, n, n);
        let mut want = vec![BigRational::zero(); n + 1];
        for (card, row) in by_card.iter().enumerate() {
            if j.contains(card as u64) {
                for (w, c) in want.iter_mut().zip(row) {
                    *w += c;
                }
            }
        }
        prop_assert_eq!(Series::from_coeffs(a).mset_restricted(&j).coeffs().to_vec(), want);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn solving_commutes_with_spectra(sys in system()) {
        let n = 20;
        let ys = pseries::fixed_point_solve(&sys, n).unwrap();
        let oracle = naive_fixpoint(&sys, n);
        let report = compile(&sys).unwrap();
        let truncs = least_fixpoint(&report.system, n as u64).unwrap();
        for i in 0..sys.len() {
            prop_assert_eq!(ys[i].coeffs().to_vec(), oracle[i].clone());
            prop_assert_eq!(spec(&ys[i]).to_bools(n as u64), truncs[i].to_bools());
        }
        let empties: std::collections::BTreeSet<usize> =
            report.system.empties().into_iter().filter(|&i| i < sys.len()).collect();
        prop_assert_eq!(pseries::zero_components(&sys), empties);
    }

    #[test]
    fn hat_preserves_the_solution(sys in system(), seed in any::<u64>()) {
        let n = 16;
        let g = with_linear_terms(&sys, seed);
        let hat = pseries::hat_transform(&g).unwrap();
        prop_assert!(pseries::is_elementary(&hat).elementary);
        let ys = pseries::fixed_point_solve(&hat, n).unwrap();
        prop_assert_eq!(g.apply(&ys, n).unwrap(), ys.clone());
        for y in &ys {
            prop_assert!(y.is_nonneg());
        }
    }

    #[test]
    fn neumann_inverse_inverts(seed in any::<u64>()) {
        let m = Matrix::from_rows(random_matrix(&mut ChaCha8Rng::seed_from_u64(seed)));
        let k = m.size();
        let i_minus_m = Matrix::identity(k).sub(&m);
        match pseries::neumann_check(&m).verdict {
            NeumannVerdict::NonnegInverse(inv) => {
                prop_assert_eq!(inv.mul(&i_minus_m), Matrix::identity(k));
                // Partial Neumann sums stay below the inverse.
                let mut power = Matrix::identity(k);
                let mut partial = Matrix::zeros(k);
                for _ in 0..12 {
                    partial = partial.sub(&Matrix::zeros(k).sub(&power));
                    power = power.mul(&m);
                }
                prop_assert!(inv.sub(&partial).is_nonneg());
            }
            NeumannVerdict::NegativeEntries(inv) => prop_assert_eq!(inv.mul(&i_minus_m), Matrix::identity(k)),
            NeumannVerdict::Singular => prop_assert!(i_minus_m.inverse().is_none()),
        }
    }
}

