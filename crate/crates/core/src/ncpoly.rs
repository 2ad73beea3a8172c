//! Polynomials over a local ring `A` in a central indeterminate `x`.
//!
//! Since `x` commutes with `A`, the product is the ordinary convolution of
//! coefficient lists; only the coefficient products themselves are
//! non-commutative.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use rand::Rng;

use crate::error::{Error, Result};
use crate::localring::{LocalAlgebra, LocalElement, LocalRing};
use crate::parse::{self, Algebra};
use crate::respoly::ResiduePoly;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalPoly {
    ring: LocalRing,
    coeffs: Vec<LocalElement>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalPolyOp {
    Add,
    Sub,
    Mul,
}

impl LocalPoly {
    pub fn new(ring: &LocalRing, coeffs: Vec<LocalElement>) -> Result<Self> {
        if coeffs.iter().any(|c| c.ring() != ring) {
            return Err(Error::ContextMismatch);
        }
        Ok(Self::from_trusted(ring, coeffs))
    }

    fn from_trusted(ring: &LocalRing, mut coeffs: Vec<LocalElement>) -> Self {
        while coeffs.last().is_some_and(LocalElement::is_zero) {
            coeffs.pop();
        }
        LocalPoly {
            ring: ring.clone(),
            coeffs,
        }
    }

    pub fn zero(ring: &LocalRing) -> Self {
        Self::from_trusted(ring, Vec::new())
    }

    pub fn constant(c: LocalElement) -> Self {
        let ring = c.ring().clone();
        Self::from_trusted(&ring, vec![c])
    }

    pub fn one(ring: &LocalRing) -> Self {
        Self::constant(LocalElement::one(ring))
    }

    pub fn x(ring: &LocalRing) -> Self {
        Self::from_trusted(ring, vec![LocalElement::zero(ring), LocalElement::one(ring)])
    }

    /// `x - a`
    pub fn linear(a: &LocalElement) -> Self {
        let ring = a.ring().clone();
        Self::from_trusted(&ring, vec![-a, LocalElement::one(&ring)])
    }

    /// Coefficientwise canonical lift of a residue polynomial.
    pub fn lift(ring: &LocalRing, f: &ResiduePoly) -> Result<Self> {
        if f.field() != ring.field() {
            return Err(Error::ContextMismatch);
        }
        Ok(Self::from_trusted(
            ring,
            f.coeffs().iter().map(|c| LocalElement::constant(ring, c.clone())).collect(),
        ))
    }

    pub fn parse(ring: &LocalRing, src: &str) -> Result<Self> {
        parse::parse_with(&LocalPolyAlgebra(ring), src)
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    pub fn coeffs(&self) -> &[LocalElement] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> LocalElement {
        self.coeffs.get(k).cloned().unwrap_or_else(|| LocalElement::zero(&self.ring))
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(LocalElement::is_one)
    }

    fn same_ring(&self, other: &LocalPoly) -> bool {
        std::sync::Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring
    }

    /// A random monic polynomial of the given degree.
    pub fn sample_monic<R: Rng + ?Sized>(ring: &LocalRing, degree: usize, rng: &mut R) -> Self {
        let mut coeffs: Vec<_> = (0..degree).map(|_| LocalElement::sample(ring, rng)).collect();
        coeffs.push(LocalElement::one(ring));
        Self::from_trusted(ring, coeffs)
    }

    /// A random polynomial of degree below `bound` with coefficients in `m^r`.
    pub fn sample_in_ideal<R: Rng + ?Sized>(ring: &LocalRing, bound: usize, r: usize, rng: &mut R) -> Self {
        let coeffs = (0..bound)
            .map(|_| {
                let mut c = LocalElement::sample(ring, rng);
                for j in 0..r.min(ring.precision()) {
                    c = &c - &LocalElement::monomial(ring, c.coeff(j).clone(), j);
                }
                c
            })
            .collect();
        Self::from_trusted(ring, coeffs)
    }

    /// Canonical text with the generator written as `g`.
    pub fn format(&self) -> String {
        self.format_with(LocalElement::format)
    }

    /// Text with the ring's generator symbol.
    pub fn pretty(&self) -> String {
        self.format_with(LocalElement::pretty)
    }

    fn format_with(&self, fmt: impl Fn(&LocalElement) -> String) -> String {
        crate::text::format_sum(
            self.coeffs
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (fmt(c), crate::text::monomial("x", k))),
        )
    }
}

impl fmt::Display for LocalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

fn assert_same(a: &LocalPoly, b: &LocalPoly) {
    assert!(a.same_ring(b), "arithmetic on polynomials over different rings");
}

impl Add for &LocalPoly {
    type Output = LocalPoly;
    fn add(self, rhs: &LocalPoly) -> LocalPoly {
        assert_same(self, rhs);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        LocalPoly::from_trusted(&self.ring, (0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect())
    }
}

impl Sub for &LocalPoly {
    type Output = LocalPoly;
    fn sub(self, rhs: &LocalPoly) -> LocalPoly {
        assert_same(self, rhs);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        LocalPoly::from_trusted(&self.ring, (0..n).map(|k| &self.coeff(k) - &rhs.coeff(k)).collect())
    }
}

impl Neg for &LocalPoly {
    type Output = LocalPoly;
    fn neg(self) -> LocalPoly {
        LocalPoly::from_trusted(&self.ring, self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &LocalPoly {
    type Output = LocalPoly;
    fn mul(self, rhs: &LocalPoly) -> LocalPoly {
        assert_same(self, rhs);
        if self.is_zero() || rhs.is_zero() {
            return LocalPoly::zero(&self.ring);
        }
        let mut out = vec![LocalElement::zero(&self.ring); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        LocalPoly::from_trusted(&self.ring, out)
    }
}

pub fn lpoly_arith(op: LocalPolyOp, a: &LocalPoly, b: &LocalPoly) -> Result<LocalPoly> {
    if !a.same_ring(b) {
        return Err(Error::ContextMismatch);
    }
    Ok(match op {
        LocalPolyOp::Add => a + b,
        LocalPolyOp::Sub => a - b,
        LocalPolyOp::Mul => a * b,
    })
}

pub fn reduce_poly(f: &LocalPoly) -> ResiduePoly {
    ResiduePoly::from_trusted(f.ring.field(), f.coeffs.iter().map(LocalElement::reduce).collect())
}

/// `f(a) = sum_i c_i a^i`, coefficients on the left of the powers.
pub fn right_evaluate(f: &LocalPoly, a: &LocalElement) -> Result<LocalElement> {
    if a.ring() != &f.ring {
        return Err(Error::ContextMismatch);
    }
    let mut acc = LocalElement::zero(&f.ring);
    let mut power = LocalElement::one(&f.ring);
    for c in &f.coeffs {
        acc = &acc + &(c * &power);
        power = &power * a;
    }
    Ok(acc)
}

/// Synthetic division by `x - a` on the right: `f = g (x - a) + rem`.
pub fn right_divmod(f: &LocalPoly, a: &LocalElement) -> Result<(LocalPoly, LocalElement)> {
    if a.ring() != &f.ring {
        return Err(Error::ContextMismatch);
    }
    let Some(n) = f.degree() else {
        return Ok((LocalPoly::zero(&f.ring), LocalElement::zero(&f.ring)));
    };
    if n == 0 {
        return Ok((LocalPoly::zero(&f.ring), f.coeffs[0].clone()));
    }
    // g_{n-1} = f_n,  g_{k-1} = f_k + g_k a,  rem = f_0 + g_0 a
    let mut g = vec![LocalElement::zero(&f.ring); n];
    g[n - 1] = f.coeffs[n].clone();
    for k in (1..n).rev() {
        g[k - 1] = &f.coeffs[k] + &(&g[k] * a);
    }
    let rem = &f.coeffs[0] + &(&g[0] * a);
    Ok((LocalPoly::from_trusted(&f.ring, g), rem))
}

/// Minimum coefficient valuation; `N` for the zero polynomial.
pub fn coeff_valuation_floor(f: &LocalPoly) -> usize {
    f.coeffs
        .iter()
        .map(LocalElement::valuation)
        .min()
        .unwrap_or(f.ring.precision())
}

/// Image of `h` in `(m^r/m^{r+1})[x]`, identified with `k[x]` via `g^r -> 1`.
pub fn leading_form(h: &LocalPoly, r: usize) -> Result<ResiduePoly> {
    if r >= h.ring.precision() {
        return Err(Error::InvalidContext(format!(
            "stage {r} is outside precision {}",
            h.ring.precision()
        )));
    }
    let floor = coeff_valuation_floor(h);
    if floor < r {
        return Err(Error::NotInIdealPower { floor, required: r });
    }
    Ok(ResiduePoly::from_trusted(
        h.ring.field(),
        h.coeffs.iter().map(|c| c.coeff(r).clone()).collect(),
    ))
}

/// Section of [`leading_form`]: each coefficient `c` becomes `c g^r`.
pub fn shift_into_ideal(g: &ResiduePoly, r: usize, ring: &LocalRing) -> Result<LocalPoly> {
    if g.field() != ring.field() {
        return Err(Error::ContextMismatch);
    }
    Ok(LocalPoly::from_trusted(
        ring,
        g.coeffs()
            .iter()
            .map(|c| LocalElement::monomial(ring, c.clone(), r))
            .collect(),
    ))
}

struct LocalPolyAlgebra<'a>(&'a LocalRing);

impl Algebra for LocalPolyAlgebra<'_> {
    type Value = LocalPoly;
    fn int(&self, n: &BigInt) -> LocalPoly {
        LocalPoly::constant(LocalElement::constant(self.0, self.0.field().from_bigint(n)))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<LocalPoly> {
        if name == "x" {
            return Ok(LocalPoly::x(self.0));
        }
        LocalAlgebra::constant_symbol(self.0, name)
            .map(LocalPoly::constant)
            .ok_or_else(|| Error::parse(pos, format!("unknown symbol `{name}` in polynomials over {}", self.0)))
    }
    fn add(&self, a: &LocalPoly, b: &LocalPoly) -> LocalPoly {
        a + b
    }
    fn sub(&self, a: &LocalPoly, b: &LocalPoly) -> LocalPoly {
        a - b
    }
    fn mul(&self, a: &LocalPoly, b: &LocalPoly) -> LocalPoly {
        a * b
    }
    fn neg(&self, a: &LocalPoly) -> LocalPoly {
        -a
    }
    fn div(&self, a: &LocalPoly, b: &LocalPoly, pos: usize) -> Result<LocalPoly> {
        if b.degree() != Some(0) {
            return Err(Error::parse(pos, "can only divide by a unit constant"));
        }
        let inv = b.coeffs[0]
            .inv()
            .map_err(|_| Error::parse(pos, "divisor is not a unit"))?;
        Ok(a * &LocalPoly::constant(inv))
    }
}
