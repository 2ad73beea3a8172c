//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nchensel::hensel::{commute_factors, hensel_lift, lift_root, primary_decomposition};
use nchensel::localring::is_almost_commutative_probe;
use nchensel::ncpoly::{reduce_poly, right_divmod, right_evaluate};
use nchensel::oracle::{exhaustive_factor_search, series_power_check, volterra_mul_recursive_oracle};
use nchensel::respoly::factor_primepowers;
use nchensel::{FieldElement, LiftStatus, LocalElement, LocalPoly, ObstructionKind, Outcome, ResiduePoly};

use common::*;

type Check = Result<String, String>;

/// Title, time limit in seconds, body.
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(n: usize, title: &str, limit: Duration, body: fn() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(Ok(d)) => (true, d),
        Ok(Err(e)) => (false, e),
        Err(_) => (false, "panicked".to_string()),
    };
    if passed && elapsed > limit {
        passed = false;
        detail = format!("{detail}; exceeded the time limit");
    }
    let mark = if passed { "PASS" } else { "FAIL" };
    println!("criterion {n}: {mark} | {title} | {detail} | {elapsed:.2?} (limit {limit:?})");
    passed
}

fn element(ring: &nchensel::LocalRing, s: &str) -> LocalElement {
    LocalElement::parse(ring, s).unwrap()
}

fn poly(ring: &nchensel::LocalRing, s: &str) -> LocalPoly {
    LocalPoly::parse(ring, s).unwrap()
}

fn twisted_root_obstruction() -> Check {
    let ring = twisted(4);
    let f = poly(&ring, "x^2 + 1 + g");
    let i = ring.field().imaginary_unit().unwrap();
    let Outcome::Obstructed(report) = lift_root(&f, &i).map_err(|e| e.to_string())? else {
        return Err("root lifted".into());
    };
    ensure(report.stage == 1, || format!("obstruction at stage {}", report.stage))?;
    ensure(report.classification == ObstructionKind::StepVerificationFailed, || {
        format!("classification {:?}", report.classification)
    })?;
    let one = ResiduePoly::one(ring.field());
    ensure(report.residual_leading_form == one, || {
        format!("residual leading form {}", report.residual_leading_form)
    })?;

    // For a = a0 + a1 g with a0 + conj(a0) = 0, the g-coefficient of f(a) is
    // a0 a1 + conj(a0) a1 + 1 = 1 whatever a1 is.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for a0 in ["i", "-i"] {
        for _ in 0..10 {
            let a1 = ring.field().sample(&mut rng);
            let a = &element(&ring, a0) + &LocalElement::monomial(&ring, a1, 1);
            let value = right_evaluate(&f, &a).map_err(|e| e.to_string())?;
            ensure(value.coeff(0).is_zero() && value.coeff(1).is_one(), || {
                format!("f({}) = {}", a.pretty(), value.pretty())
            })?;
        }
    }

    let output = Command::new(env!("CARGO_BIN_EXE_nchensel"))
        .args(["root", "--ring", "twisted(Qi,conj,N=4)", "--poly", "x^2 + 1 + g", "--at", "i", "--output", "structured"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(output.status.code() == Some(2), || format!("cli exit code {:?}", output.status.code()))?;
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).map_err(|e| e.to_string())?;
    ensure(doc["obstruction"]["stage"] == 1 && doc["obstruction"]["residual_leading_form"] == "1", || {
        format!("cli obstruction {}", doc["obstruction"])
    })?;
    Ok("obstructed at stage 1, residual leading form 1 (library and cli)".into())
}

fn gf5_completeness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let field = gf(5);
    let mut stages = 0;
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let degree = rng.gen_range(2..=6);
        let d1 = rng.gen_range(1..degree);
        let ring = gf5_series(n);
        let (f1, f2) = random_coprime_split(&field, d1, degree - d1, &mut rng);
        let f = random_lift(&ring, &(&f1 * &f2), &mut rng);
        let out = hensel_lift(&f, &f1, &f2).map_err(|e| e.to_string())?;
        ensure(out.status == LiftStatus::Lifted, || format!("obstructed on {}", f.format()))?;
        let (a, b) = out.factors.unwrap();
        ensure((&f - &(&a * &b)).is_zero(), || format!("f - F1 F2 nonzero for {}", f.format()))?;
        ensure(a.is_monic() && b.is_monic() && reduce_poly(&a) == f1 && reduce_poly(&b) == f2, || {
            format!("bad factors for {}", f.format())
        })?;
        stages += out.stages_completed;
    }
    Ok(format!("300/300 lifted exactly ({stages} stages)"))
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let field = gf(5);
    let mut splits = 0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=3);
        let degree = rng.gen_range(2..=3);
        let d1 = rng.gen_range(1..degree);
        let d2 = degree - d1;
        let ring = gf5_series(n);
        let (f1, f2) = random_coprime_split(&field, d1, d2, &mut rng);
        let f = random_lift(&ring, &(&f1 * &f2), &mut rng);
        let found = exhaustive_factor_search(&f, d1, d2).map_err(|e| e.to_string())?;
        let mut groups: Vec<(ResiduePoly, ResiduePoly)> = found.iter().map(|(a, b)| (reduce_poly(a), reduce_poly(b))).collect();
        groups.sort_by_key(|(a, b)| (a.format(), b.format()));
        groups.dedup();
        ensure(groups.contains(&(f1.clone(), f2.clone())), || format!("no pair over the split of {}", f.format()))?;
        for (g1, g2) in groups.into_iter().filter(|(a, b)| coprime(a, b)) {
            let matching: Vec<_> = found
                .iter()
                .filter(|(a, b)| reduce_poly(a) == g1 && reduce_poly(b) == g2)
                .collect();
            ensure(matching.len() == 1, || format!("{} pairs for split ({g1}, {g2}) of {}", matching.len(), f.format()))?;
            let engine = hensel_lift(&f, &g1, &g2).map_err(|e| e.to_string())?.factors;
            ensure(engine.as_ref() == Some(matching[0]), || format!("engine disagrees on {}", f.format()))?;
            splits += 1;
        }
    }
    Ok(format!("50 instances, {splits} coprime splits, each with exactly one pair equal to the engine's"))
}

/// `C(1/2, k)`, the coefficients of `sqrt(1 + t)`.
fn half_binomial(k: usize) -> BigRational {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    (0..k).fold(BigRational::from_integer(BigInt::from(1)), |acc, j| {
        acc * (&half - BigRational::from_integer(BigInt::from(j))) / BigRational::from_integer(BigInt::from(j + 1))
    })
}

fn square_root_lift() -> Check {
    let ring = q_series(8);
    let f = poly(&ring, "x^2 - (1+t)");
    let one = ring.field().one();
    let a = lift_root(&f, &one)
        .map_err(|e| e.to_string())?
        .lifted()
        .ok_or("lift obstructed")?;
    ensure(series_power_check(&a, &element(&ring, "1+t"), 2), || format!("a^2 != 1+t for a = {}", a.pretty()))?;
    ensure(a.reduce() == one, || "a does not reduce to 1".into())?;
    let expected = ["1", "1/2", "-1/8", "1/16", "-5/128"];
    for (k, e) in expected.iter().enumerate() {
        let got = ring.field().format(a.coeff(k));
        ensure(&got == e, || format!("coefficient {k} is {got}, expected {e}"))?;
    }
    for k in 0..8 {
        ensure(a.coeff(k) == &FieldElement::Rational(half_binomial(k)), || format!("coefficient {k} is not C(1/2, {k})"))?;
    }
    Ok(format!("a = {}", a.pretty()))
}

fn volterra_arithmetic() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for k in 0..50 {
        let ring = volterra(1 + k % 4);
        let (a, b) = (LocalElement::sample(&ring, &mut rng), LocalElement::sample(&ring, &mut rng));
        let oracle = volterra_mul_recursive_oracle(&a, &b).map_err(|e| e.to_string())?;
        ensure(oracle == &a * &b, || format!("products differ for {} * {}", a.format(), b.format()))?;
    }
    let v3 = volterra(3);
    ensure(&element(&v3, "g") * &element(&v3, "t") == element(&v3, "t*g - g^2"), || "g*t != t*g - g^2".into())?;

    let v = volterra(4);
    let field = v.field();
    let samples = [field.variable().unwrap(), field.from_int(3)];
    let probe = is_almost_commutative_probe(&v, &samples).map_err(|e| e.to_string())?;
    ensure(probe.almost_commutative, || "Volterra probe failed".into())?;
    let s = q_series(4);
    let probe = is_almost_commutative_probe(&s, &[s.field().from_int(2)]).map_err(|e| e.to_string())?;
    ensure(probe.almost_commutative, || "series probe failed".into())?;
    let tw = twisted(4);
    let probe = is_almost_commutative_probe(&tw, &[tw.field().imaginary_unit().unwrap()]).map_err(|e| e.to_string())?;
    let witness = probe.witness.ok_or("twisted probe returned no witness")?;
    ensure(!probe.almost_commutative && witness.commutator.valuation() == 1, || {
        format!("twisted witness {}", witness.commutator.pretty())
    })?;
    Ok(format!("50 products agree; twisted witness {}", witness.commutator.pretty()))
}

fn remainder_theorem() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for ring in all_kinds(3) {
        for _ in 0..200 {
            let degree = rng.gen_range(0..=3);
            let coeffs = (0..=degree).map(|_| LocalElement::sample(&ring, &mut rng)).collect();
            let f = LocalPoly::new(&ring, coeffs).unwrap();
            let a = LocalElement::sample(&ring, &mut rng);
            let (_, rem) = right_divmod(&f, &a).map_err(|e| e.to_string())?;
            let value = right_evaluate(&f, &a).map_err(|e| e.to_string())?;
            ensure(rem == value, || format!("remainder differs from f(a) over {ring}"))?;
        }
    }
    Ok("600 pairs over three ring kinds".into())
}

fn commutation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ring = gf5_series(4);
    let field = gf(5);
    for _ in 0..50 {
        let (pbar, qbar) = random_coprime_split(&field, rng.gen_range(1..=3), rng.gen_range(1..=3), &mut rng);
        let (p, q) = (random_lift(&ring, &pbar, &mut rng), random_lift(&ring, &qbar, &mut rng));
        let (p1, q1) = commute_factors(&p, &q)
            .map_err(|e| e.to_string())?
            .lifted()
            .ok_or("commutation obstructed")?;
        ensure(&p1 * &p == &q1 * &q, || format!("p1 p != q1 q for p = {}, q = {}", p.format(), q.format()))?;
        ensure(p1.degree() == q.degree() && q1.degree() == p.degree() && q1.is_monic(), || {
            "degree or monicity constraint violated".into()
        })?;
    }
    Ok("50 pairs with p1 p = q1 q".into())
}

fn decomposition() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let field = gf(5);
    let mut total_blocks = 0;
    let mut done = 0;
    while done < 30 {
        let fbar = random_monic(&field, rng.gen_range(2..=6), &mut rng);
        let blocks: Vec<ResiduePoly> = factor_primepowers(&fbar)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|b| b.block)
            .collect();
        if blocks.len() < 2 {
            continue;
        }
        let ring = gf5_series(rng.gen_range(1..=5));
        let f = random_lift(&ring, &fbar, &mut rng);
        let parts = primary_decomposition(&f, &blocks)
            .map_err(|e| e.to_string())?
            .lifted()
            .ok_or("decomposition obstructed")?;
        let product = parts.iter().skip(1).fold(parts[0].clone(), |acc, p| &acc * p);
        ensure(product == f, || format!("product differs from {}", f.format()))?;
        ensure(parts.iter().zip(&blocks).all(|(p, b)| &reduce_poly(p) == b), || {
            format!("block reductions differ for {}", f.format())
        })?;
        total_blocks += blocks.len();
        done += 1;
    }
    Ok(format!("30 polynomials, {total_blocks} blocks"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("twisted root obstruction", 1, twisted_root_obstruction),
        ("GF(5) lifting completeness", 30, gf5_completeness),
        ("oracle equivalence and uniqueness", 300, oracle_equivalence),
        ("square root lift", 1, square_root_lift),
        ("Volterra arithmetic and probe", 10, volterra_arithmetic),
        ("remainder theorem", 10, remainder_theorem),
        ("factor commutation", 30, commutation),
        ("primary decomposition", 30, decomposition),
    ];
    let mut failed = 0;
    for (k, (title, secs, body)) in criteria.into_iter().enumerate() {
        if !run(k + 1, title, Duration::from_secs(secs), body) {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
