//! Univariate polynomials over the residue field `k`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;

use crate::dense;
use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement, FieldKind};
use crate::parse::{self, Algebra, FieldAlgebra};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResiduePoly {
    field: FieldContext,
    coeffs: Vec<FieldElement>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
    DivMod,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyArithResult {
    Poly(ResiduePoly),
    QuotRem(ResiduePoly, ResiduePoly),
}

/// One prime-power block `irreducible^multiplicity` of a factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePowerFactor {
    pub block: ResiduePoly,
    pub irreducible: ResiduePoly,
    pub multiplicity: usize,
}

pub const FACTOR_MAX_PRIME: u64 = 101;
pub const FACTOR_MAX_DEGREE: usize = 12;

impl ResiduePoly {
    pub fn new(field: &FieldContext, mut coeffs: Vec<FieldElement>) -> Result<Self> {
        for c in &coeffs {
            field.check(c)?;
        }
        dense::trim(&mut coeffs);
        Ok(ResiduePoly {
            field: field.clone(),
            coeffs,
        })
    }

    pub(crate) fn from_trusted(field: &FieldContext, mut coeffs: Vec<FieldElement>) -> Self {
        dense::trim(&mut coeffs);
        ResiduePoly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &FieldContext) -> Self {
        Self::from_trusted(field, Vec::new())
    }

    pub fn constant(field: &FieldContext, c: FieldElement) -> Self {
        Self::from_trusted(field, vec![c])
    }

    pub fn one(field: &FieldContext) -> Self {
        Self::constant(field, field.one())
    }

    pub fn x(field: &FieldContext) -> Self {
        Self::from_trusted(field, vec![field.zero(), field.one()])
    }

    /// `x - r`
    pub fn linear(field: &FieldContext, r: &FieldElement) -> Self {
        Self::from_trusted(field, vec![-r, field.one()])
    }

    pub fn parse(field: &FieldContext, src: &str) -> Result<Self> {
        parse::parse_with(&ResidueAlgebra(field), src)
    }

    pub fn field(&self) -> &FieldContext {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> FieldElement {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        dense::is_one(&self.coeffs)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(FieldElement::is_one)
    }

    pub fn monic(&self) -> Self {
        Self::from_trusted(&self.field, dense::monic(&self.coeffs))
    }

    pub fn scale(&self, c: &FieldElement) -> Self {
        Self::from_trusted(&self.field, dense::scale(&self.coeffs, c))
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(&self.field);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn divmod(&self, divisor: &ResiduePoly) -> Result<(Self, Self)> {
        if self.field != divisor.field {
            return Err(Error::ContextMismatch);
        }
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (q, r) = dense::divmod(&self.coeffs, &divisor.coeffs);
        Ok((Self::from_trusted(&self.field, q), Self::from_trusted(&self.field, r)))
    }

    pub fn rem(&self, divisor: &ResiduePoly) -> Result<Self> {
        Ok(self.divmod(divisor)?.1)
    }

    /// Quotient of a division known to be exact.
    pub(crate) fn exact_div(&self, divisor: &ResiduePoly) -> Self {
        let (q, r) = self.divmod(divisor).expect("nonzero divisor");
        debug_assert!(r.is_zero(), "inexact division");
        q
    }

    pub fn gcd(&self, other: &ResiduePoly) -> Self {
        Self::from_trusted(&self.field, dense::gcd(&self.coeffs, &other.coeffs))
    }

    pub fn derivative(&self) -> Self {
        Self::from_trusted(&self.field, dense::derivative(&self.coeffs))
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        dense::eval(&self.coeffs, x)
    }

    /// Canonical text form in the indeterminate `x`.
    pub fn format(&self) -> String {
        crate::text::format_poly(&self.coeffs, "x", |c| self.field.format(c))
    }
}

impl fmt::Display for ResiduePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

impl Add for &ResiduePoly {
    type Output = ResiduePoly;
    fn add(self, rhs: &ResiduePoly) -> ResiduePoly {
        ResiduePoly::from_trusted(&self.field, dense::add(&self.coeffs, &rhs.coeffs))
    }
}

impl Sub for &ResiduePoly {
    type Output = ResiduePoly;
    fn sub(self, rhs: &ResiduePoly) -> ResiduePoly {
        ResiduePoly::from_trusted(&self.field, dense::sub(&self.coeffs, &rhs.coeffs))
    }
}

impl Mul for &ResiduePoly {
    type Output = ResiduePoly;
    fn mul(self, rhs: &ResiduePoly) -> ResiduePoly {
        ResiduePoly::from_trusted(&self.field, dense::mul(&self.coeffs, &rhs.coeffs))
    }
}

impl Neg for &ResiduePoly {
    type Output = ResiduePoly;
    fn neg(self) -> ResiduePoly {
        ResiduePoly::from_trusted(&self.field, dense::neg(&self.coeffs))
    }
}

pub fn rpoly_arith(op: PolyOp, a: &ResiduePoly, b: &ResiduePoly) -> Result<PolyArithResult> {
    if a.field != b.field {
        return Err(Error::ContextMismatch);
    }
    Ok(match op {
        PolyOp::Add => PolyArithResult::Poly(a + b),
        PolyOp::Sub => PolyArithResult::Poly(a - b),
        PolyOp::Mul => PolyArithResult::Poly(a * b),
        PolyOp::DivMod => {
            let (q, r) = a.divmod(b)?;
            PolyArithResult::QuotRem(q, r)
        }
    })
}

/// Returns `(g, u, v)` with `g = gcd(a, b)` monic and `u*a + v*b = g`.
/// Both inputs zero gives all-zero output.
pub fn extended_euclid(a: &ResiduePoly, b: &ResiduePoly) -> Result<(ResiduePoly, ResiduePoly, ResiduePoly)> {
    if a.field != b.field {
        return Err(Error::ContextMismatch);
    }
    let field = &a.field;
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (ResiduePoly::one(field), ResiduePoly::zero(field));
    let (mut t0, mut t1) = (ResiduePoly::zero(field), ResiduePoly::one(field));
    while !r1.is_zero() {
        let (q, mut r) = r0.divmod(&r1)?;
        let mut s = &s0 - &(&q * &s1);
        let mut t = &t0 - &(&q * &t1);
        // monic remainders keep rational-function coefficients small
        if let Some(lead) = r.coeffs.last() {
            let inv = lead.inv()?;
            (r, s, t) = (r.scale(&inv), s.scale(&inv), t.scale(&inv));
        }
        (r0, r1) = (r1, r);
        (s0, s1) = (s1, s);
        (t0, t1) = (t1, t);
    }
    match r0.coeffs.last() {
        None => Ok((r0, s0.scale(&field.zero()), t0.scale(&field.zero()))),
        Some(lead) => {
            let inv = lead.inv()?;
            Ok((r0.scale(&inv), s0.scale(&inv), t0.scale(&inv)))
        }
    }
}

/// The unique `(g1, g2)` with `f2*g1 + f1*g2 = c`, `deg g1 < deg f1` and
/// `deg g2 < deg f2`, for coprime monic `f1`, `f2`.
pub fn bezout_solve_constrained(
    f1: &ResiduePoly,
    f2: &ResiduePoly,
    c: &ResiduePoly,
) -> Result<(ResiduePoly, ResiduePoly)> {
    if f1.field != f2.field || f1.field != c.field {
        return Err(Error::ContextMismatch);
    }
    if !f1.is_monic() || !f2.is_monic() {
        return Err(Error::NotMonic);
    }
    let bound = f1.coeffs.len() + f2.coeffs.len() - 2;
    if let Some(d) = c.degree() {
        if d >= bound {
            return Err(Error::DegreeTooLarge { target: d, bound });
        }
    }
    let (g, _u, v) = extended_euclid(f1, f2)?;
    if !g.is_one() {
        return Err(Error::NotCoprime);
    }
    // v*f2 = 1 mod f1
    let g1 = (&v * c).rem(f1)?;
    let g2 = (c - &(f2 * &g1)).exact_div(f1);
    Ok((g1, g2))
}

pub fn is_simple_root(f: &ResiduePoly, r: &FieldElement) -> bool {
    f.field.contains(r) && f.eval(r).is_zero() && !f.derivative().eval(r).is_zero()
}

/// Splits a monic polynomial over a small prime field into pairwise coprime
/// prime-power blocks, ordered by degree then coefficients.
pub fn factor_primepowers(f: &ResiduePoly) -> Result<Vec<PrimePowerFactor>> {
    let p = match f.field.kind() {
        FieldKind::PrimeField(p) => *p,
        _ => {
            return Err(Error::UnsupportedField(format!(
                "factorization over {} must be supplied by the caller",
                f.field
            )))
        }
    };
    if p > FACTOR_MAX_PRIME {
        return Err(Error::UnsupportedField(format!("GF({p}) exceeds GF({FACTOR_MAX_PRIME})")));
    }
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    let n = f.degree().unwrap_or(0);
    if n > FACTOR_MAX_DEGREE {
        return Err(Error::UnsupportedField(format!(
            "degree {n} exceeds the limit {FACTOR_MAX_DEGREE}"
        )));
    }
    let mut irreducibles: Vec<(ResiduePoly, usize)> = Vec::new();
    for (part, mult) in squarefree_decomposition(f, p) {
        for irr in berlekamp(&part, p) {
            match irreducibles.iter_mut().find(|(q, _)| *q == irr) {
                Some((_, m)) => *m += mult,
                None => irreducibles.push((irr, mult)),
            }
        }
    }
    let mut out: Vec<PrimePowerFactor> = irreducibles
        .into_iter()
        .map(|(irr, m)| PrimePowerFactor {
            block: irr.pow(m),
            irreducible: irr,
            multiplicity: m,
        })
        .collect();
    out.sort_by_key(|b| {
        let key: Vec<u64> = b
            .block
            .coeffs
            .iter()
            .map(|c| match c {
                FieldElement::Prime { value, .. } => *value,
                _ => 0,
            })
            .collect();
        (b.block.coeffs.len(), key)
    });
    Ok(out)
}

fn squarefree_decomposition(f: &ResiduePoly, p: u64) -> Vec<(ResiduePoly, usize)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let mut c = f.gcd(&f.derivative());
    let mut w = f.exact_div(&c);
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.exact_div(&y);
        if !fac.is_one() {
            out.push((fac, i));
        }
        w = y;
        c = c.exact_div(&w);
        i += 1;
    }
    if !c.is_one() {
        // c is a polynomial in x^p; Frobenius fixes GF(p)
        let root: Vec<_> = c.coeffs.iter().step_by(p as usize).cloned().collect();
        let root = ResiduePoly::from_trusted(&f.field, root);
        for (g, m) in squarefree_decomposition(&root, p) {
            out.push((g, m * p as usize));
        }
    }
    out
}

/// Irreducible factors of a squarefree monic polynomial.
fn berlekamp(s: &ResiduePoly, p: u64) -> Vec<ResiduePoly> {
    let n = s.degree().unwrap_or(0);
    if n <= 1 {
        return vec![s.clone()];
    }
    let field = &s.field;
    // row i: x^(i p) mod s
    let xp = ResiduePoly::x(field).pow(p as usize).rem(s).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut cur = ResiduePoly::one(field);
    for _ in 0..n {
        rows.push(cur.clone());
        cur = (&cur * &xp).rem(s).unwrap();
    }
    // v (Q - I) = 0  <=>  (Q - I)^T v^T = 0
    let matrix: Vec<Vec<FieldElement>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let q = rows[i].coeff(j);
                    if i == j {
                        &q - &field.one()
                    } else {
                        q
                    }
                })
                .collect()
        })
        .collect();
    let basis = nullspace(matrix, field);
    let k = basis.len();
    let mut factors = vec![s.clone()];
    for v in basis {
        if factors.len() == k {
            break;
        }
        let v = ResiduePoly::from_trusted(field, v);
        if v.degree().unwrap_or(0) == 0 {
            continue;
        }
        let mut next = Vec::new();
        for u in factors {
            let mut pending = vec![u];
            for a in 0..p {
                let shifted = &v - &ResiduePoly::constant(field, field.from_int(a as i64));
                let mut keep = Vec::new();
                for u in pending {
                    let g = u.gcd(&shifted);
                    if g.is_one() || g == u {
                        keep.push(u);
                    } else {
                        let h = u.exact_div(&g);
                        keep.push(g);
                        keep.push(h);
                    }
                }
                pending = keep;
            }
            next.extend(pending);
        }
        factors = next;
    }
    factors
}

fn nullspace(mut m: Vec<Vec<FieldElement>>, field: &FieldContext) -> Vec<Vec<FieldElement>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].inv().unwrap();
        m[r] = m[r].iter().map(|x| x * &inv).collect();
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&factor * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![field.zero(); cols];
        v[free] = field.one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[row][free];
        }
        basis.push(v);
    }
    basis
}

struct ResidueAlgebra<'a>(&'a FieldContext);

impl Algebra for ResidueAlgebra<'_> {
    type Value = ResiduePoly;
    fn int(&self, n: &BigInt) -> ResiduePoly {
        ResiduePoly::constant(self.0, self.0.from_bigint(n))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<ResiduePoly> {
        if name == "x" {
            return Ok(ResiduePoly::x(self.0));
        }
        FieldAlgebra::field_symbol(self.0, name)
            .map(|c| ResiduePoly::constant(self.0, c))
            .ok_or_else(|| Error::parse(pos, format!("unknown symbol `{name}` in {}[x]", self.0)))
    }
    fn add(&self, a: &ResiduePoly, b: &ResiduePoly) -> ResiduePoly {
        a + b
    }
    fn sub(&self, a: &ResiduePoly, b: &ResiduePoly) -> ResiduePoly {
        a - b
    }
    fn mul(&self, a: &ResiduePoly, b: &ResiduePoly) -> ResiduePoly {
        a * b
    }
    fn neg(&self, a: &ResiduePoly) -> ResiduePoly {
        -a
    }
    fn div(&self, a: &ResiduePoly, b: &ResiduePoly, pos: usize) -> Result<ResiduePoly> {
        match b.degree() {
            Some(0) => Ok(a.scale(&b.coeffs[0].inv().unwrap())),
            None => Err(Error::parse(pos, "division by zero")),
            Some(_) => Err(Error::parse(pos, "can only divide by a nonzero constant")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf5() -> FieldContext {
        FieldContext::prime(5).unwrap()
    }

    fn poly(field: &FieldContext, s: &str) -> ResiduePoly {
        ResiduePoly::parse(field, s).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let q = FieldContext::rationals();
        assert_eq!(&poly(&q, "x-1") * &poly(&q, "x+1"), poly(&q, "x^2-1"));

        let qi = FieldContext::gaussian();
        let (quot, rem) = poly(&qi, "x^2+1").divmod(&poly(&qi, "x-i")).unwrap();
        assert_eq!((quot, rem), (poly(&qi, "x+i"), ResiduePoly::zero(&qi)));

        let k = gf5();
        let (quot, rem) = poly(&k, "x^3+2*x+1").divmod(&poly(&k, "x^2+1")).unwrap();
        assert_eq!(quot, poly(&k, "x"));
        assert_eq!(rem, poly(&k, "x+1"));
        // multiply back
        assert_eq!(&(&quot * &poly(&k, "x^2+1")) + &rem, poly(&k, "x^3+2*x+1"));

        assert_eq!(
            rpoly_arith(PolyOp::DivMod, &poly(&k, "x"), &ResiduePoly::zero(&k)),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn euclid_examples() {
        let q = FieldContext::rationals();
        let (g, u, v) = extended_euclid(&poly(&q, "x-1"), &poly(&q, "x+1")).unwrap();
        assert_eq!((g, u, v), (poly(&q, "1"), poly(&q, "-1/2"), poly(&q, "1/2")));
        let (g, u, v) = extended_euclid(&poly(&q, "x^2"), &poly(&q, "x")).unwrap();
        assert_eq!((g, u, v), (poly(&q, "x"), poly(&q, "0"), poly(&q, "1")));
        let k = gf5();
        let (g, u, v) = extended_euclid(&poly(&k, "x+4"), &poly(&k, "x+1")).unwrap();
        assert_eq!((g, u, v), (poly(&k, "1"), poly(&k, "2"), poly(&k, "3")));
    }

    #[test]
    fn bezout_examples() {
        let q = FieldContext::rationals();
        let (f1, f2) = (poly(&q, "x-1"), poly(&q, "x+1"));
        assert_eq!(
            bezout_solve_constrained(&f1, &f2, &poly(&q, "1")).unwrap(),
            (poly(&q, "1/2"), poly(&q, "-1/2"))
        );
        assert_eq!(
            bezout_solve_constrained(&f1, &f2, &ResiduePoly::zero(&q)).unwrap(),
            (ResiduePoly::zero(&q), ResiduePoly::zero(&q))
        );

        // exhaustive search over GF(5)^2 for (x+1) a + (x+4) b = x
        let k = gf5();
        let (f1, f2, c) = (poly(&k, "x+4"), poly(&k, "x+1"), poly(&k, "x"));
        let mut hits = Vec::new();
        for a in 0..5 {
            for b in 0..5 {
                let (ga, gb) = (ResiduePoly::constant(&k, k.from_int(a)), ResiduePoly::constant(&k, k.from_int(b)));
                if &(&f2 * &ga) + &(&f1 * &gb) == c {
                    hits.push((ga, gb));
                }
            }
        }
        assert_eq!(hits.len(), 1);
        assert_eq!(bezout_solve_constrained(&f1, &f2, &c).unwrap(), hits[0]);
    }

    #[test]
    fn bezout_errors() {
        let q = FieldContext::rationals();
        assert_eq!(
            bezout_solve_constrained(&poly(&q, "x-1"), &poly(&q, "x^2-1"), &poly(&q, "1")),
            Err(Error::NotCoprime)
        );
        assert_eq!(
            bezout_solve_constrained(&poly(&q, "x-1"), &poly(&q, "x+1"), &poly(&q, "x^2")),
            Err(Error::DegreeTooLarge { target: 2, bound: 2 })
        );
        assert_eq!(
            bezout_solve_constrained(&poly(&q, "2*x-1"), &poly(&q, "x+1"), &poly(&q, "1")),
            Err(Error::NotMonic)
        );
    }

    #[test]
    fn factor_examples() {
        let k = gf5();
        let blocks: Vec<_> = factor_primepowers(&poly(&k, "x^2+4")).unwrap().into_iter().map(|b| b.block).collect();
        assert_eq!(blocks, vec![poly(&k, "x+1"), poly(&k, "x+4")]);

        let sq = factor_primepowers(&poly(&k, "(x-1)^2")).unwrap();
        assert_eq!(sq.len(), 1);
        assert_eq!(sq[0].block, poly(&k, "(x-1)^2"));
        assert_eq!(sq[0].multiplicity, 2);

        let blocks: Vec<_> = factor_primepowers(&poly(&k, "x^2+1")).unwrap().into_iter().map(|b| b.block).collect();
        assert_eq!(blocks, vec![poly(&k, "x+2"), poly(&k, "x+3")]);
    }

    #[test]
    fn factor_handles_pth_powers_and_irreducibles() {
        let k = gf5();
        // (x^2+2)^5 (x+1)^6: f' vanishes on the first block
        let f = &poly(&k, "(x^2+2)^5") * &poly(&k, "(x+1)^6");
        assert!(f.degree().unwrap() > FACTOR_MAX_DEGREE);
        assert!(matches!(factor_primepowers(&f), Err(Error::UnsupportedField(_))));
        let f = &poly(&k, "(x^2+2)^5") * &poly(&k, "x+1");
        let out = factor_primepowers(&f).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].irreducible, poly(&k, "x+1"));
        assert_eq!((out[1].irreducible.clone(), out[1].multiplicity), (poly(&k, "x^2+2"), 5));
    }

    #[test]
    fn factor_rejects_infinite_fields() {
        let q = FieldContext::rationals();
        assert!(matches!(factor_primepowers(&poly(&q, "x^2-1")), Err(Error::UnsupportedField(_))));
        assert!(matches!(
            factor_primepowers(&poly(&FieldContext::prime(103).unwrap(), "x")),
            Err(Error::UnsupportedField(_))
        ));
    }

    #[test]
    fn simple_roots() {
        let qi = FieldContext::gaussian();
        assert!(is_simple_root(&poly(&qi, "x^2+1"), &qi.imaginary_unit().unwrap()));
        let q = FieldContext::rationals();
        assert!(!is_simple_root(&poly(&q, "(x-1)^2"), &q.one()));
        assert!(!is_simple_root(&poly(&q, "x^2-1"), &q.from_int(2)));
    }

    #[test]
    fn text_round_trip() {
        let qi = FieldContext::gaussian();
        let f = poly(&qi, "x^3 - (1+2i)*x + 1/2*i");
        assert_eq!(f.format(), "x^3 + (-1-2i)*x + 1/2*i");
        assert_eq!(poly(&qi, &f.format()), f);
        assert!(ResiduePoly::parse(&qi, "x/(x+1)").is_err());
    }
}
