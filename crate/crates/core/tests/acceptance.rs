//! Acceptance gate: one PASS/FAIL line per criterion. The process fails
//! when any criterion fails, except those listed in `KNOWN_DIVERGENCES`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectre::compile::compile;
use spectre::dsl::{self, System};
use spectre::pseries::{self, poly, Matrix, NeumannVerdict};
use spectre::setsys::{self, least_fixpoint, seeded_fixpoint, Bits, Certificate, GammaTerm, SetSystem};
use spectre::{EpSet, IndexSet, PeriodicityParams, RatSystem, Rational};
use spectre_oracle::{brute_fixpoint, brute_set_op, naive_fixpoint, spectral_radius, BoolVec, SetOp};

use common::*;

/// Criteria whose failure is explained in the decision ledger.
const KNOWN_DIVERGENCES: &[&str] = &["6"];

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn series_fixture(name: &str) -> RatSystem {
    match dsl::parse(&fixture(name)).unwrap().system {
        System::Series(s) => s,
        System::Sets(_) => panic!("{} is a set system", name),
    }
}

fn sets_fixture(name: &str) -> SetSystem {
    match dsl::parse(&fixture(name)).unwrap().system {
        System::Sets(s) => s,
        System::Series(s) => compile(&s).unwrap().system,
    }
}

fn mq(sol: &setsys::SpectrumSolution) -> (Vec<Option<u64>>, Vec<u64>) {
    (sol.vars.iter().map(|v| v.params.m).collect(), sol.vars.iter().map(|v| v.params.q).collect())
}

fn paths() -> Outcome {
    let sets = sets_fixture("paths.spec");
    let sol = setsys::solve(&sets, 512).map_err(|e| e.to_string())?;
    let (m, q) = mq(&sol);
    ensure(m == [Some(2), Some(2), Some(1), Some(3)], format!("m = {:?}", m))?;
    ensure(q == [1, 1, 1, 1], format!("q = {:?}", q))?;
    ensure(setsys::min_vector(&sets) == m, "min_vector disagrees")?;
    ensure(setsys::q_vector(&sets).unwrap().q == q, "q_vector disagrees")?;
    let g4 = sets.iterate_from_empty(4).map_err(|e| e.to_string())?;
    let want = [EpSet::finite([2, 3, 4]), EpSet::finite([2, 4]), EpSet::finite([1, 3, 4]), EpSet::singleton(3)];
    ensure(g4 == want, format!("G^(4) = {:?}", g4.iter().map(|s| s.to_string()).collect::<Vec<_>>()))?;
    let direct = sets_fixture("paths_sets.spec");
    ensure(direct.iterate_from_empty(4).unwrap() == g4, "hand-written set system gives a different G^(4)")?;
    ensure(mq(&setsys::solve(&direct, 512).map_err(|e| e.to_string())?) == (m, q), "hand-written set system gives different parameters")?;
    Ok("m=(2,2,1,3) q=(1,1,1,1), G^(4)(0) matches".into())
}

fn structured() -> Outcome {
    let sets = sets_fixture("structured_sets.spec");
    let sol = setsys::solve(&sets, 512).map_err(|e| e.to_string())?;
    let (m, q) = mq(&sol);
    ensure(m == [Some(7), Some(1), Some(1)], format!("m = {:?}", m))?;
    ensure(q == [1, 1, 1], format!("q = {:?}", q))?;
    let pair = SetSystem::new(
        sets.variables()[..2].to_vec(),
        sets.equations()[..2].iter().map(|eq| eq.iter().map(|t| GammaTerm { base: t.base.clone(), exponents: t.exponents[..2].to_vec() }).collect()).collect(),
    )
    .unwrap();
    ensure(pair.classify().is_elementary, "first two equations not elementary")?;
    let r = setsys::q_vector(&pair).map_err(|e| e.to_string())?;
    ensure(r.per_equation == [2, 1], format!("per-equation gcds {:?}", r.per_equation))?;
    ensure(r.q == [1, 1], format!("pair q = {:?}", r.q))?;
    ensure(setsys::min_vector(&pair) == [Some(7), Some(1)], "pair m")?;
    // The series form compiles to the same spectra.
    let from_series = compile(&series_fixture("structured.spec")).unwrap().system;
    let sol2 = setsys::solve(&from_series, 512).map_err(|e| e.to_string())?;
    ensure(mq(&sol2) == (m, q), "series fixture gives different parameters")?;
    Ok(format!("m=(7,1,1) q=(1,1,1), per-equation gcds (2,1), gcd certified: {}", r.certified))
}

fn linear3() -> Outcome {
    let sets = sets_fixture("linear3.spec");
    let sol = setsys::solve(&sets, 512).map_err(|e| e.to_string())?;
    let y = &sol.vars[0];
    let want = EpSet::from_predicate(1, 3, |n| n >= 1 && n % 3 != 0);
    ensure(y.closed_form == want, format!("spectrum {}", y.closed_form))?;
    let p = y.params;
    ensure(p == PeriodicityParams { m: Some(1), q: 1, p: 3, c: 1 }, format!("params {}", p))?;
    for x in 0..=90 {
        ensure(y.closed_form.is_eventual_period(x) == (x > 0 && x % 3 == 0), format!("is_eventual_period({})", x))?;
    }
    let series = pseries::fixed_point_solve(&series_fixture("linear3.spec"), 60).unwrap();
    let spec = pseries::spectrum_extract(&series[0]).unwrap().set;
    ensure(spec == want.below(61), "series spectrum differs")?;
    Ok(format!("{} with {}", y.closed_form, p))
}

fn binary() -> Outcome {
    let series = series_fixture("binary.spec");
    let sets = compile(&series).unwrap().system;
    let sol = setsys::solve(&sets, 512).map_err(|e| e.to_string())?;
    let t = &sol.vars[0];
    ensure(t.closed_form == EpSet::progression(1, 2), format!("spectrum {}", t.closed_form))?;
    ensure(t.certificate == Certificate::CertifiedDoubling, format!("certificate {}", t.certificate))?;
    let coeffs = pseries::fixed_point_solve(&series, 7).unwrap();
    let oracle = naive_fixpoint(&series, 7);
    ensure(coeffs[0].coeffs() == oracle[0].as_slice(), "coefficients differ from the oracle")?;
    let odd: Vec<Rational> = [1, 3, 5, 7].iter().map(|&i| coeffs[0].coeff(i)).collect();
    ensure(odd == [q(1, 1), q(1, 1), q(2, 1), q(5, 1)], format!("odd coefficients {:?}", odd))?;
    Ok("1+2N CertifiedDoubling, coefficients 1,1,2,5".into())
}

fn frobenius() -> Outcome {
    let s = EpSet::finite([3, 5]).closure_summary().map_err(|e| e.to_string())?;
    ensure(s.conductor == 8 && s.gcd == 1 && s.gaps == [1, 2, 4, 7], format!("{:?}", s))?;
    let p = s.set.params();
    ensure(p.p == 1 && p.q == 1, format!("closure params {}", p))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 100 {
        let (a, b) = (rng.gen_range(2..=30u64), rng.gen_range(2..=30u64));
        if a.gcd(&b) != 1 {
            continue;
        }
        let s = EpSet::finite([a, b]).closure_summary().unwrap();
        ensure(s.conductor == (a - 1) * (b - 1), format!("conductor of {{{},{}}} = {}", a, b, s.conductor))?;
        let h = s.conductor + 64;
        let gens = BoolVec::from_elems(h, &[a, b]);
        let brute = brute_set_op(SetOp::NatClosure, &gens, &gens, h);
        ensure(bits(&s.set, h) == brute, format!("closure of {{{},{}}} differs from the oracle", a, b))?;
        checked += 1;
    }
    Ok("conductor 8, gaps [1,2,4,7]; 100 coprime pairs match (b1-1)(b2-1) and the closure oracle".into())
}

fn blue_red() -> Outcome {
    let s = series_fixture("blue_red.spec");
    let ints = |v: &[i64]| v.iter().map(|&c| q(c, 1)).collect::<Vec<_>>();
    let g2 = s.iterate(2, 6).unwrap();
    ensure(g2[0].coeffs() == ints(&[0, 1, 0, 0, 6, 0, 0]).as_slice(), "G^(2) first row")?;
    ensure(g2[1].coeffs() == ints(&[0, 1, 0, 0, 0, 0, 0]).as_slice(), "G^(2) second row")?;
    ensure(g2[2].coeffs() == ints(&[0, 2, 0, 0, 0, 0, 0]).as_slice(), "G^(2) third row")?;
    let j = pseries::jacobian_at_origin(&s).unwrap();
    ensure(j.row(2) == ints(&[1, 1, 0]).as_slice(), "Jacobian third row")?;
    let inv = Matrix::identity(3).sub(&j).inverse().ok_or("I - J singular")?;
    ensure(inv == Matrix::from_rows(vec![ints(&[1, 0, 0]), ints(&[0, 1, 0]), ints(&[1, 1, 1])]), "(I - J)^-1")?;
    let hat = pseries::hat_transform(&s).map_err(|e| e.to_string())?;
    ensure(pseries::is_elementary(&hat).elementary, "hat not elementary")?;

    let doc = dsl::parse("vars B, R, T;\nB = x;\nR = x;\nT = 2*x + 3*x*B*R^2 + 3*x*B^2*R + x*T^2 + B + R;").unwrap();
    let System::Series(display) = doc.system else { unreachable!() };
    let mut want = poly::expand(&display.equations()[2], 3);
    let mut got = poly::expand(&hat.equations()[2], 3);
    poly::sort_monomials(&mut want);
    poly::sort_monomials(&mut got);
    let extra: Vec<String> = want
        .iter()
        .filter(|m| !got.contains(m))
        .map(|m| dsl::print_expr(&poly::collect(vec![(*m).clone()]), display.variables()))
        .collect();
    let printed = dsl::print_expr(&hat.equations()[2], hat.variables());
    ensure(
        got == want,
        format!(
            "G^(2), Jacobian row, (I-J)^-1 match; hat third equation is `{}`, the display also has {}",
            printed,
            extra.join(" + ")
        ),
    )?;
    Ok("G^(2), Jacobian, inverse and hat display match".into())
}

fn remark() -> Outcome {
    let sets = sets_fixture("remark_sets.spec");
    let cands: Vec<Vec<EpSet>> = (0..3).map(|a| vec![EpSet::progression(a, 1)]).collect();
    let r = setsys::nonuniqueness_probe(&sets, &cands).map_err(|e| e.to_string())?;
    ensure(r == [true, true, true], format!("probe {:?}", r))?;
    let series = series_fixture("remark.spec");
    let hat = pseries::hat_transform(&series).map_err(|e| e.to_string())?;
    let hatted = compile(&hat).unwrap().system;
    let mut terms = hatted.equations()[0].clone();
    terms.sort_by_key(|t| t.exponents[0].is_absent());
    let want = [GammaTerm::constant(EpSet::singleton(1), 1).with(0, IndexSet::single(1)), GammaTerm::constant(EpSet::singleton(2), 1)];
    ensure(terms == want, format!("hatted spectral system {}", dsl::print_sets(&hatted)))?;
    let sol = setsys::solve(&hatted, 512).map_err(|e| e.to_string())?;
    ensure(sol.vars[0].closed_form == EpSet::progression(2, 1), "hatted solution")?;
    let probe = setsys::nonuniqueness_probe(&hatted, &[cands[0].clone(), cands[1].clone(), cands[2].clone()]).unwrap();
    ensure(probe == [false, false, true], format!("hatted probe {:?}", probe))?;
    ensure(hatted.classify().is_elementary, "hatted system not elementary")?;
    Ok("N, 1+N, 2+N all solve; hatted system has the unique solution 2+N".into())
}

fn karen(a1: &EpSet, a2: &EpSet) -> Result<(), String> {
    let (p1, p2) = (a1.params(), a2.params());
    let (m1, m2) = (p1.m.unwrap(), p2.m.unwrap());
    let u = a1.union(a2).params();
    ensure(u.m == Some(m1.min(m2)) && u.q == p1.q.gcd(&p2.q).gcd(&m1.abs_diff(m2)), format!("union row for {} and {}", a1, a2))?;
    let s = a1.sum(a2).params();
    ensure(s.m == Some(m1 + m2) && s.q == p1.q.gcd(&p2.q), format!("sum row for {} and {}", a1, a2))?;
    let st = a1.star(a2).params();
    let want_q = if *a1 == EpSet::zero() { 0 } else { p2.q.gcd(&(p1.q * m2)) };
    ensure(st.m == Some(m1 * m2) && st.q == want_q, format!("star row for {} and {}", a1, a2))
}

fn identities(a: &EpSet, b: &EpSet, c: &EpSet, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let ctx = || format!("A={} B={} C={}", a, b, c);
    ensure(a.sum(&b.union(c)) == a.sum(b).union(&a.sum(c)), format!("A+(B|C): {}", ctx()))?;
    let n = rng.gen_range(0..4);
    ensure(a.sum(b).nstar(n) == a.nstar(n).sum(&b.nstar(n)), format!("n*(A+B), n={}: {}", n, ctx()))?;
    ensure(a.sum(b).star(c) == a.star(c).sum(&b.star(c)), format!("(A+B)*C: {}", ctx()))?;
    let m = rng.gen_range(0..4);
    ensure(b.nstar(n).nstar(m) == b.nstar(m * n), format!("m*(n*B), m={} n={}: {}", m, n, ctx()))?;
    ensure(a.union(b).star(c) == a.star(c).union(&b.star(c)), format!("(A|B)*C: {}", ctx()))?;
    // Sixth identity, for a finite index set.
    let fa = EpSet::finite((0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..6)));
    let mut rhs = EpSet::empty();
    let top = fa.max().unwrap_or(0);
    for j1 in 0..=top {
        for j2 in 0..=top - j1 {
            if fa.contains(j1 + j2) {
                rhs = rhs.union(&b.nstar(j1).sum(&c.nstar(j2)));
            }
        }
    }
    ensure(fa.star(&b.union(c)) == rhs, format!("A*(B|C) with A={}: {}", fa, ctx()))
}

fn epset_suite() -> Outcome {
    const H: u64 = 512;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..1000 {
        let (a, b, c) = (random_epset(&mut rng), random_epset(&mut rng), random_epset(&mut rng));
        let (ba, bb) = (bits(&a, H), bits(&b, H));
        let n = rng.gen_range(0..5);
        let checks: [(&str, EpSet, SetOp); 5] = [
            ("union", a.union(&b), SetOp::Union),
            ("sum", a.sum(&b), SetOp::Sum),
            ("scalar_mul", a.scalar_mul(n), SetOp::ScalarMul(n)),
            ("nstar", a.nstar(n), SetOp::NStar(n)),
            ("star", a.star(&b), SetOp::Star),
        ];
        for (name, got, op) in checks {
            ensure(bits(&got, H) == brute_set_op(op, &ba, &bb, H), format!("case {}: {} of {} and {}", case, name, a, b))?;
        }
        match a.nat_closure() {
            Ok(cl) => ensure(bits(&cl, H) == brute_set_op(SetOp::NatClosure, &ba, &bb, H), format!("case {}: closure of {}", case, a))?,
            Err(_) => ensure(!a.has_positive(), format!("case {}: closure of {} refused", case, a))?,
        }
        identities(&a, &b, &c, &mut rng).map_err(|e| format!("case {}: {}", case, e))?;
        if !a.is_empty() && !b.is_empty() {
            karen(&a, &b).map_err(|e| format!("case {}: {}", case, e))?;
        }
    }
    Ok("1000 cases at H=512: six operations, six identities, parameter table".into())
}

fn random_seed_vector(rng: &mut ChaCha8Rng, k: usize, h: u64) -> Vec<Bits> {
    (0..k)
        .map(|_| {
            let on: Vec<bool> = (0..=h).map(|n| n > 0 && rng.gen_bool(0.3)).collect();
            Bits::from_fn(h, |n| on[n as usize])
        })
        .collect()
}

fn setsys_suite() -> Outcome {
    const H: u64 = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut certs = [0usize; 4];
    for case in 0..200 {
        let k = rng.gen_range(1..=4);
        let sys = random_elementary_system(&mut rng, k);
        let shown = || dsl::print_sets(&sys);
        ensure(sys.classify().is_elementary, format!("case {}: generator gave a non-elementary system\n{}", case, shown()))?;
        let truncs = least_fixpoint(&sys, H).map_err(|e| e.to_string())?;
        let brute = brute_fixpoint(&sys, H);
        for i in 0..k {
            ensure(truncs[i].to_bools() == brute[i].0, format!("case {}: truncation of Y{} differs from the oracle\n{}", case, i, shown()))?;
        }
        let seed = random_seed_vector(&mut rng, k, H);
        ensure(seeded_fixpoint(&sys, H, &seed).map_err(|e| e.to_string())? == truncs, format!("case {}: seeding changed the fixpoint\n{}", case, shown()))?;
        let sol = setsys::solve(&sys, H).map_err(|e| format!("case {}: {}\n{}", case, e, shown()))?;
        for v in &sol.vars {
            certs[v.certificate as usize] += 1;
        }
        let m = setsys::min_vector(&sys);
        for (i, v) in sol.vars.iter().enumerate() {
            ensure(v.params.m == m[i], format!("case {}: m of Y{}", case, i))?;
            ensure(v.closed_form.to_bools(H) == brute[i].0, format!("case {}: closed form of Y{}", case, i))?;
        }
        let (reduced, map) = sys.reduce_with_map();
        if !reduced.is_empty() {
            let qs = setsys::q_vector(&reduced).map_err(|e| e.to_string())?.q;
            let g = reduced.dependency();
            for (new, &old) in map.iter().enumerate() {
                ensure(sol.vars[old].params.q == qs[new], format!("case {}: q of Y{}\n{}", case, old, shown()))?;
                for &j in g.successors(new) {
                    let ok = if qs[new] == 0 { qs[j] == 0 } else { qs[j] % qs[new] == 0 };
                    ensure(ok, format!("case {}: q does not divide along an edge\n{}", case, shown()))?;
                }
            }
        }
    }
    Ok(format!(
        "200 systems at H=256; certificates linear/doubling/finite/heuristic = {}/{}/{}/{}",
        certs[0], certs[1], certs[2], certs[3]
    ))
}

fn commutation_suite() -> Outcome {
    const N: usize = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..50 {
        let k = rng.gen_range(1..=3);
        let sys = random_series_system(&mut rng, k);
        let shown = || dsl::print_series(&sys);
        ensure(pseries::is_elementary(&sys).elementary, format!("case {}: not elementary\n{}", case, shown()))?;
        let series = pseries::fixed_point_solve(&sys, N).map_err(|e| e.to_string())?;
        if case % 5 == 0 {
            let oracle = naive_fixpoint(&sys, 24);
            for i in 0..k {
                ensure(series[i].truncate(24).coeffs() == oracle[i].as_slice(), format!("case {}: coefficients of Y{}\n{}", case, i, shown()))?;
            }
        }
        let report = compile(&sys).map_err(|e| e.to_string())?;
        let truncs = least_fixpoint(&report.system, N as u64).map_err(|e| e.to_string())?;
        for i in 0..k {
            let spec = pseries::spectrum_extract(&series[i]).map_err(|e| e.to_string())?.set;
            ensure(spec.to_bools(N as u64) == truncs[i].to_bools(), format!("case {}: spectrum of Y{}\n{}", case, i, shown()))?;
        }
        let zeros = pseries::zero_components(&sys);
        let empties: std::collections::BTreeSet<usize> = report.system.empties().into_iter().filter(|&i| i < k).collect();
        ensure(zeros == empties, format!("case {}: zero components {:?} vs empties {:?}\n{}", case, zeros, empties, shown()))?;
    }
    Ok("50 systems at N=64: spectra commute with solving, zero components match".into())
}

fn matrix_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut inside, mut outside, mut abstained) = (0, 0, 0);
    for case in 0..500 {
        let rows = random_matrix(&mut rng);
        let floats: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|c| c.to_f64().unwrap()).collect()).collect();
        let rho = spectral_radius(&floats);
        let m = Matrix::from_rows(rows);
        let verdict = pseries::neumann_check(&m).verdict;
        if (rho - 1.0).abs() < 1e-6 {
            abstained += 1;
            continue;
        }
        let nonneg = matches!(verdict, NeumannVerdict::NonnegInverse(_));
        ensure(nonneg == (rho < 1.0), format!("case {}: radius {} but verdict {:?}", case, rho, verdict))?;
        if rho < 1.0 {
            inside += 1;
        } else {
            outside += 1;
        }
    }
    Ok(format!("500 matrices: {} with radius < 1, {} above, {} in the guard band", inside, outside, abstained))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1", "paths example", paths),
        ("2", "structured trees", structured),
        ("3", "linear example y = x + x^2 + x^3 y", linear3),
        ("4", "binary trees", binary),
        ("5", "Frobenius", frobenius),
        ("6", "blue and red trees", blue_red),
        ("7", "nonunique spectral solutions", remark),
        ("8", "EPSet property suite", epset_suite),
        ("9", "set-system property suite", setsys_suite),
        ("10", "series/spectrum commutation suite", commutation_suite),
        ("11", "matrix suite", matrix_suite),
    ];
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {}: {} [{:.2}s]", id, name, detail, secs),
            Err(detail) => {
                let known = KNOWN_DIVERGENCES.contains(&id);
                if !known {
                    unexpected += 1;
                }
                let tag = if known { " (known divergence, see ledger)" } else { "" };
                println!("FAIL {:>2} {}: {}{} [{:.2}s]", id, name, detail, tag, secs);
            }
        }
    }
    if unexpected > 0 {
        println!("{} unexpected failure(s)", unexpected);
        std::process::exit(1);
    }
}
