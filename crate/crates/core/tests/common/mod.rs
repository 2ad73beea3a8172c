#![allow(dead_code)]

use nchensel::field::{Automorphism, Derivation, FieldContext};
use nchensel::respoly::extended_euclid;
use nchensel::{LocalPoly, LocalRing, LocalRingContext, ResiduePoly};
use rand::Rng;

pub fn gf(p: u64) -> FieldContext {
    FieldContext::prime(p).unwrap()
}

pub fn series(field: FieldContext, n: usize) -> LocalRing {
    LocalRingContext::commutative_series(field, "t", n).unwrap()
}

pub fn gf5_series(n: usize) -> LocalRing {
    series(gf(5), n)
}

pub fn q_series(n: usize) -> LocalRing {
    series(FieldContext::rationals(), n)
}

pub fn ratfunc() -> FieldContext {
    FieldContext::rational_functions(FieldContext::rationals(), "t")
        .unwrap()
        .with_derivation(Derivation::Variable)
        .unwrap()
}

pub fn volterra(n: usize) -> LocalRing {
    LocalRingContext::volterra(ratfunc(), n).unwrap()
}

pub fn conjugation() -> FieldContext {
    FieldContext::gaussian().with_automorphism(Automorphism::Conjugation).unwrap()
}

pub fn twisted(n: usize) -> LocalRing {
    LocalRingContext::twisted(conjugation(), n).unwrap()
}

/// One ring of each kind at precision `n`.
pub fn all_kinds(n: usize) -> Vec<LocalRing> {
    vec![q_series(n), volterra(n), twisted(n)]
}

pub fn random_monic<R: Rng>(field: &FieldContext, degree: usize, rng: &mut R) -> ResiduePoly {
    let mut coeffs: Vec<_> = (0..degree).map(|_| field.sample(rng)).collect();
    coeffs.push(field.one());
    ResiduePoly::new(field, coeffs).unwrap()
}

pub fn coprime(a: &ResiduePoly, b: &ResiduePoly) -> bool {
    extended_euclid(a, b).unwrap().0.is_one()
}

/// Random monic `f1`, `f2` of the given degrees with `gcd = 1`.
pub fn random_coprime_split<R: Rng>(field: &FieldContext, d1: usize, d2: usize, rng: &mut R) -> (ResiduePoly, ResiduePoly) {
    loop {
        let (a, b) = (random_monic(field, d1, rng), random_monic(field, d2, rng));
        if coprime(&a, &b) {
            return (a, b);
        }
    }
}

/// A random monic `f` over `ring` with `reduce_poly(f) = fbar`.
pub fn random_lift<R: Rng>(ring: &LocalRing, fbar: &ResiduePoly, rng: &mut R) -> LocalPoly {
    let base = LocalPoly::lift(ring, fbar).unwrap();
    let degree = fbar.degree().unwrap_or(0);
    &base + &LocalPoly::sample_in_ideal(ring, degree, 1, rng)
}
