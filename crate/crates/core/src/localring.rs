//! Truncated local rings `A/m^N` with principal maximal ideal `m = (g)`.
//!
//! Elements are stored with coefficients on the left, `sum_j c_j g^j`. The
//! three kinds differ only in how a power of the generator moves past a
//! coefficient:
//!
//! * commutative series: `g^m c = c g^m`
//! * Volterra operators (`g = ∂⁻¹`): `g^m c = sum_i C(-m, i) c^(i) g^(m+i)`
//! * twisted series (`g = τ`): `g^m c = σ^m(c) g^m`

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{check_symbol, generalized_binomial, FieldContext, FieldElement};
use crate::parse::{self, Algebra, FieldAlgebra};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    CommutativeSeries,
    Volterra,
    Twisted,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalRingContext {
    kind: RingKind,
    field: FieldContext,
    precision: usize,
    generator: String,
}

pub type LocalRing = Arc<LocalRingContext>;

impl LocalRingContext {
    pub fn new(kind: RingKind, field: FieldContext, precision: usize, generator: &str) -> Result<LocalRing> {
        if precision == 0 {
            return Err(Error::InvalidContext("precision must be at least 1".into()));
        }
        match kind {
            RingKind::Volterra if field.derivation().is_none() => {
                return Err(Error::InvalidContext("Volterra rings need a derivation on the coefficients".into()))
            }
            RingKind::Twisted if field.automorphism().is_none() => {
                return Err(Error::InvalidContext("twisted rings need an automorphism on the coefficients".into()))
            }
            RingKind::CommutativeSeries => {
                check_symbol(generator)?;
                if matches!(generator, "x" | "i") || field.variable_name() == Some(generator) {
                    return Err(Error::InvalidContext(format!(
                        "generator name `{generator}` clashes with another symbol"
                    )));
                }
            }
            _ => {}
        }
        Ok(Arc::new(LocalRingContext {
            kind,
            field,
            precision,
            generator: generator.to_string(),
        }))
    }

    pub fn commutative_series(field: FieldContext, variable: &str, precision: usize) -> Result<LocalRing> {
        Self::new(RingKind::CommutativeSeries, field, precision, variable)
    }

    pub fn volterra(field: FieldContext, precision: usize) -> Result<LocalRing> {
        Self::new(RingKind::Volterra, field, precision, "∂⁻¹")
    }

    pub fn twisted(field: FieldContext, precision: usize) -> Result<LocalRing> {
        Self::new(RingKind::Twisted, field, precision, "τ")
    }

    pub fn with_precision(&self, precision: usize) -> Result<LocalRing> {
        Self::new(self.kind, self.field.clone(), precision, &self.generator)
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn field(&self) -> &FieldContext {
        &self.field
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Display name of the generator: the series variable, `∂⁻¹` or `τ`.
    pub fn generator_name(&self) -> &str {
        &self.generator
    }

    /// `g^m c = sum_l coeff_l g^(m+l)` for `l < derivs.len()`, as `(l, coeff_l)`,
    /// where `derivs[l]` is the `l`-th derivative of `c`.
    fn commute_power(&self, m: usize, derivs: &[FieldElement]) -> Vec<(usize, FieldElement)> {
        let Some(c) = derivs.first().filter(|c| !c.is_zero()) else {
            return Vec::new();
        };
        match self.kind {
            RingKind::CommutativeSeries => vec![(0, c.clone())],
            RingKind::Twisted => vec![(0, self.field.automorphism_power(c, m))],
            RingKind::Volterra if m == 0 => vec![(0, c.clone())],
            RingKind::Volterra => derivs
                .iter()
                .enumerate()
                .filter(|(_, d)| !d.is_zero())
                .map(|(l, d)| {
                    let binom = self.field.from_bigint(&generalized_binomial(-(m as i64), l as u32));
                    (l, &binom * d)
                })
                .collect(),
        }
    }

    /// `c, c', c'', ...` up to `len` terms; only `c` outside Volterra rings.
    fn derivative_chain(&self, c: &FieldElement, len: usize) -> Vec<FieldElement> {
        if self.kind != RingKind::Volterra {
            return vec![c.clone()];
        }
        let mut out = vec![c.clone()];
        while out.len() < len && !out.last().unwrap().is_zero() {
            let next = self.field.derive_n(out.last().unwrap(), 1);
            out.push(next);
        }
        out
    }
}

impl fmt::Display for LocalRingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::CommutativeSeries => {
                write!(f, "series({}, {}, N={})", self.field, self.generator, self.precision)
            }
            RingKind::Volterra => {
                let d = match self.field.derivation() {
                    Some(crate::field::Derivation::Variable) => {
                        format!("d/d{}", self.field.variable_name().unwrap_or("t"))
                    }
                    _ => "zero".to_string(),
                };
                write!(f, "volterra({}, {d}, N={})", self.field, self.precision)
            }
            RingKind::Twisted => {
                let a = match self.field.automorphism() {
                    Some(crate::field::Automorphism::Conjugation) => "conj",
                    _ => "id",
                };
                write!(f, "twisted({}, {a}, N={})", self.field, self.precision)
            }
        }
    }
}

/// An element `sum_{j<N} c_j g^j` of `A/m^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalElement {
    ring: LocalRing,
    coeffs: Vec<FieldElement>,
}

impl LocalElement {
    pub fn zero(ring: &LocalRing) -> Self {
        LocalElement {
            ring: ring.clone(),
            coeffs: vec![ring.field.zero(); ring.precision],
        }
    }

    pub fn one(ring: &LocalRing) -> Self {
        Self::constant(ring, ring.field.one())
    }

    /// The fixed section `k -> A` of the reduction map.
    pub fn constant(ring: &LocalRing, c: FieldElement) -> Self {
        let mut out = Self::zero(ring);
        out.coeffs[0] = c;
        out
    }

    /// `c g^r` (zero when `r >= N`).
    pub fn monomial(ring: &LocalRing, c: FieldElement, r: usize) -> Self {
        let mut out = Self::zero(ring);
        if r < ring.precision {
            out.coeffs[r] = c;
        }
        out
    }

    pub fn generator(ring: &LocalRing) -> Self {
        Self::monomial(ring, ring.field.one(), 1)
    }

    /// Builds `sum c_j g^j`, truncating past `N` and zero-padding below it.
    pub fn from_coeffs(ring: &LocalRing, coeffs: Vec<FieldElement>) -> Result<Self> {
        for c in &coeffs {
            ring.field.check(c)?;
        }
        let mut out = Self::zero(ring);
        for (slot, c) in out.coeffs.iter_mut().zip(coeffs) {
            *slot = c;
        }
        Ok(out)
    }

    pub fn parse(ring: &LocalRing, src: &str) -> Result<Self> {
        parse::parse_with(&LocalAlgebra(ring), src)
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &FieldElement {
        &self.coeffs[j]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(FieldElement::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(FieldElement::is_zero)
    }

    pub fn is_unit(&self) -> bool {
        !self.coeffs[0].is_zero()
    }

    /// Index of the first nonzero coefficient, `N` for zero.
    pub fn valuation(&self) -> usize {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.ring.precision)
    }

    /// The image in the residue field.
    pub fn reduce(&self) -> FieldElement {
        self.coeffs[0].clone()
    }

    pub fn same_ring(&self, other: &LocalElement) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring
    }

    fn check(&self, other: &LocalElement) -> Result<()> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// Right multiplication by `g^r`: shifts coefficients up by `r`.
    pub fn shift(&self, r: usize) -> Self {
        let mut out = Self::zero(&self.ring);
        for j in 0..self.ring.precision.saturating_sub(r) {
            out.coeffs[j + r] = self.coeffs[j].clone();
        }
        out
    }

    /// Left scalar multiplication `c * self`.
    pub fn scale_left(&self, c: &FieldElement) -> Self {
        LocalElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|x| c * x).collect(),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotAUnit);
        }
        let lead_inv = self.coeffs[0].inv()?;
        let mut v = Self::constant(&self.ring, lead_inv.clone());
        // Coefficient j of self*v is c_0 v_j + (terms in v_0..v_{j-1}).
        for j in 1..self.ring.precision {
            let err = (self * &v).coeffs[j].clone();
            v.coeffs[j] = -&(&lead_inv * &err);
        }
        debug_assert!((self * &v).is_one());
        Ok(v)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(&self.ring);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn sample<R: Rng + ?Sized>(ring: &LocalRing, rng: &mut R) -> Self {
        LocalElement {
            ring: ring.clone(),
            coeffs: (0..ring.precision).map(|_| ring.field.sample(rng)).collect(),
        }
    }

    pub fn sample_unit<R: Rng + ?Sized>(ring: &LocalRing, rng: &mut R) -> Self {
        let mut a = Self::sample(ring, rng);
        a.coeffs[0] = ring.field.sample_nonzero(rng);
        a
    }

    /// Canonical text with the generator written as `g`.
    pub fn format(&self) -> String {
        self.format_with("g")
    }

    /// Text with the ring's own generator symbol (`t`, `∂⁻¹`, `τ`).
    pub fn pretty(&self) -> String {
        self.format_with(&self.ring.generator)
    }

    fn format_with(&self, symbol: &str) -> String {
        let field = &self.ring.field;
        crate::text::format_sum(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (field.format(c), crate::text::monomial(symbol, j))),
        )
    }
}

impl fmt::Display for LocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

fn assert_same(a: &LocalElement, b: &LocalElement) {
    assert!(a.same_ring(b), "arithmetic on elements of different local rings");
}

impl Add for &LocalElement {
    type Output = LocalElement;
    fn add(self, rhs: &LocalElement) -> LocalElement {
        assert_same(self, rhs);
        LocalElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &LocalElement {
    type Output = LocalElement;
    fn sub(self, rhs: &LocalElement) -> LocalElement {
        assert_same(self, rhs);
        LocalElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &LocalElement {
    type Output = LocalElement;
    fn neg(self) -> LocalElement {
        LocalElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &LocalElement {
    type Output = LocalElement;
    fn mul(self, rhs: &LocalElement) -> LocalElement {
        assert_same(self, rhs);
        let ring = &self.ring;
        let n = ring.precision;
        let mut out = LocalElement::zero(ring);
        // (a_i g^i)(b_j g^j) = a_i (g^i b_j) g^j
        for (j, bj) in rhs.coeffs.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            let derivs = ring.derivative_chain(bj, n - j);
            for (i, ai) in self.coeffs.iter().enumerate().take(n - j) {
                if ai.is_zero() {
                    continue;
                }
                let limit = derivs.len().min(n - i - j);
                for (l, c) in ring.commute_power(i, &derivs[..limit]) {
                    let k = i + j + l;
                    out.coeffs[k] = &out.coeffs[k] + &(ai * &c);
                }
            }
        }
        out
    }
}

pub fn elem_add(a: &LocalElement, b: &LocalElement) -> Result<LocalElement> {
    a.check(b)?;
    Ok(a + b)
}

pub fn elem_sub(a: &LocalElement, b: &LocalElement) -> Result<LocalElement> {
    a.check(b)?;
    Ok(a - b)
}

pub fn elem_neg(a: &LocalElement) -> LocalElement {
    -a
}

pub fn elem_mul(a: &LocalElement, b: &LocalElement) -> Result<LocalElement> {
    a.check(b)?;
    Ok(a * b)
}

pub fn elem_inv(a: &LocalElement) -> Result<LocalElement> {
    a.inv()
}

pub fn reduce_to_residue(a: &LocalElement) -> FieldElement {
    a.reduce()
}

pub fn canonical_lift(ring: &LocalRing, a: &FieldElement) -> LocalElement {
    LocalElement::constant(ring, a.clone())
}

pub fn valuation(a: &LocalElement) -> usize {
    a.valuation()
}

/// A coefficient lift that fails to commute with the generator modulo `m^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutatorWitness {
    pub sample: FieldElement,
    /// `g * a - a * g`
    pub commutator: LocalElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeResult {
    pub almost_commutative: bool,
    pub witness: Option<CommutatorWitness>,
}

/// Tests whether `g` commutes with the lifted samples modulo `m^2`, which for
/// these ring kinds decides whether the associated graded ring is commutative.
/// Runs at precision at least 2 so the degree-one commutator is visible.
pub fn is_almost_commutative_probe(ring: &LocalRing, samples: &[FieldElement]) -> Result<ProbeResult> {
    if samples.is_empty() {
        return Err(Error::InvalidContext("the probe needs at least one sample".into()));
    }
    let ring = if ring.precision < 2 { ring.with_precision(2)? } else { ring.clone() };
    let g = LocalElement::generator(&ring);
    for s in samples {
        ring.field.check(s)?;
        let lift = canonical_lift(&ring, s);
        let commutator = &(&g * &lift) - &(&lift * &g);
        if commutator.valuation() < 2 {
            return Ok(ProbeResult {
                almost_commutative: false,
                witness: Some(CommutatorWitness {
                    sample: s.clone(),
                    commutator,
                }),
            });
        }
    }
    Ok(ProbeResult {
        almost_commutative: true,
        witness: None,
    })
}

pub(crate) struct LocalAlgebra<'a>(pub &'a LocalRing);

impl LocalAlgebra<'_> {
    pub(crate) fn constant_symbol(ring: &LocalRing, name: &str) -> Option<LocalElement> {
        if name == "g" || (ring.kind == RingKind::CommutativeSeries && name == ring.generator) {
            return Some(LocalElement::generator(ring));
        }
        FieldAlgebra::field_symbol(&ring.field, name).map(|c| LocalElement::constant(ring, c))
    }
}

impl Algebra for LocalAlgebra<'_> {
    type Value = LocalElement;
    fn int(&self, n: &BigInt) -> LocalElement {
        LocalElement::constant(self.0, self.0.field.from_bigint(n))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<LocalElement> {
        Self::constant_symbol(self.0, name)
            .ok_or_else(|| Error::parse(pos, format!("unknown symbol `{name}` in {}", self.0)))
    }
    fn add(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        a + b
    }
    fn sub(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        a - b
    }
    fn mul(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        a * b
    }
    fn neg(&self, a: &LocalElement) -> LocalElement {
        -a
    }
    fn div(&self, a: &LocalElement, b: &LocalElement, pos: usize) -> Result<LocalElement> {
        let inv = b
            .inv()
            .map_err(|_| Error::parse(pos, "divisor is not a unit"))?;
        Ok(a * &inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Automorphism, Derivation};
    use crate::parse::parse_field_element;

    fn q_series(n: usize) -> LocalRing {
        LocalRingContext::commutative_series(FieldContext::rationals(), "t", n).unwrap()
    }

    fn volterra(n: usize) -> LocalRing {
        let k = FieldContext::rational_functions(FieldContext::rationals(), "t")
            .unwrap()
            .with_derivation(Derivation::Variable)
            .unwrap();
        LocalRingContext::volterra(k, n).unwrap()
    }

    fn twisted(n: usize) -> LocalRing {
        let k = FieldContext::gaussian().with_automorphism(Automorphism::Conjugation).unwrap();
        LocalRingContext::twisted(k, n).unwrap()
    }

    fn el(ring: &LocalRing, s: &str) -> LocalElement {
        LocalElement::parse(ring, s).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let v = volterra(4);
        assert_eq!(&el(&v, "g") * &el(&v, "t"), el(&v, "t*g - g^2"));
        let tw = twisted(3);
        assert_eq!(&el(&tw, "g") * &el(&tw, "i"), el(&tw, "-i*g"));
        let s = q_series(3);
        assert_eq!(&el(&s, "1+t") * &el(&s, "1-t"), el(&s, "1-t^2"));
    }

    #[test]
    fn twisted_power_alternates() {
        let tw = twisted(4);
        assert_eq!(&el(&tw, "g^2") * &el(&tw, "i"), el(&tw, "i*g^2"));
        assert_eq!(&el(&tw, "g^3") * &el(&tw, "i"), el(&tw, "-i*g^3"));
    }

    #[test]
    fn addition_examples() {
        let s = q_series(3);
        assert_eq!(&el(&s, "1+t") + &el(&s, "t"), el(&s, "1+2*t"));
        let a = el(&s, "3 - t/2 + t^2");
        assert!((&a + &-&a).is_zero());
        let gf = LocalRingContext::commutative_series(FieldContext::prime(5).unwrap(), "t", 3).unwrap();
        assert!((&el(&gf, "3+4*t") + &el(&gf, "2+t")).is_zero());
        assert_eq!(elem_add(&el(&s, "1"), &el(&gf, "1")), Err(Error::ContextMismatch));
    }

    #[test]
    fn inverse_examples() {
        let s = q_series(4);
        assert_eq!(el(&s, "1+t").inv().unwrap(), el(&s, "1 - t + t^2 - t^3"));
        let gf = LocalRingContext::commutative_series(FieldContext::prime(5).unwrap(), "t", 3).unwrap();
        assert_eq!(el(&gf, "2").inv().unwrap(), el(&gf, "3"));
        let tw = twisted(3);
        let a = el(&tw, "1 + i*g");
        let expected = el(&tw, "1 - i*g + g^2");
        // multiply back using g i = -i g
        assert!((&a * &expected).is_one());
        assert_eq!(a.inv().unwrap(), expected);
        assert!((&expected * &a).is_one());
        assert_eq!(el(&s, "t").inv(), Err(Error::NotAUnit));
    }

    #[test]
    fn reduction_and_lift() {
        let s = q_series(3);
        assert_eq!(el(&s, "1+t").reduce(), FieldContext::rationals().one());
        assert!(el(&s, "t^2").reduce().is_zero());
        let tw = twisted(3);
        let qi = tw.field().clone();
        assert_eq!(el(&tw, "3+2i + i*g").reduce(), parse_field_element(&qi, "3+2i").unwrap());
        for (ring, lit) in [
            (q_series(3), "7/3"),
            (LocalRingContext::commutative_series(FieldContext::prime(5).unwrap(), "t", 2).unwrap(), "4"),
            (tw.clone(), "1-i"),
        ] {
            let a = parse_field_element(ring.field(), lit).unwrap();
            assert_eq!(reduce_to_residue(&canonical_lift(&ring, &a)), a);
        }
    }

    #[test]
    fn valuations() {
        let s = q_series(5);
        assert_eq!(el(&s, "t^3").valuation(), 3);
        assert_eq!(LocalElement::zero(&s).valuation(), 5);
        let v = volterra(4);
        let comm = &(&el(&v, "g") * &el(&v, "t")) - &(&el(&v, "t") * &el(&v, "g"));
        assert_eq!(comm, el(&v, "-g^2"));
        assert_eq!(comm.valuation(), 2);
    }

    #[test]
    fn probe_examples() {
        let s = q_series(3);
        let q = s.field().clone();
        let r = is_almost_commutative_probe(&s, &[q.from_int(2), q.from_int(-5)]).unwrap();
        assert!(r.almost_commutative);

        let tw = twisted(4);
        let i = tw.field().imaginary_unit().unwrap();
        let r = is_almost_commutative_probe(&tw, std::slice::from_ref(&i)).unwrap();
        assert!(!r.almost_commutative);
        let w = r.witness.unwrap();
        assert_eq!(w.sample, i);
        assert_eq!(w.commutator, el(&tw, "-2i*g"));
        assert_eq!(w.commutator.valuation(), 1);

        let v = volterra(4);
        let t = v.field().variable().unwrap();
        assert!(is_almost_commutative_probe(&v, &[t]).unwrap().almost_commutative);
        assert!(is_almost_commutative_probe(&v, &[]).is_err());
    }

    #[test]
    fn probe_lifts_precision_one() {
        let tw = twisted(1);
        let i = tw.field().imaginary_unit().unwrap();
        assert!(!is_almost_commutative_probe(&tw, &[i]).unwrap().almost_commutative);
    }

    #[test]
    fn context_validation() {
        assert!(LocalRingContext::volterra(FieldContext::rationals(), 3).is_err());
        assert!(LocalRingContext::twisted(FieldContext::gaussian(), 3).is_err());
        assert!(LocalRingContext::commutative_series(FieldContext::rationals(), "t", 0).is_err());
        let k = FieldContext::rational_functions(FieldContext::rationals(), "t").unwrap();
        assert!(LocalRingContext::commutative_series(k, "t", 3).is_err());
    }

    #[test]
    fn text_forms() {
        let v = volterra(3);
        let a = el(&v, "g*t");
        assert_eq!(a.format(), "t*g - g^2");
        assert_eq!(a.pretty(), "t*∂⁻¹ - ∂⁻¹^2");
        assert_eq!(el(&v, &a.format()), a);
        let s = q_series(4);
        assert_eq!(el(&s, "1/(1-t)").format(), "1 + g + g^2 + g^3");
    }
}
