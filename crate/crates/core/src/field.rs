//! Exact coefficient fields: the rationals, prime fields, the Gaussian
//! rationals and univariate rational function fields over any of those.
//!
//! A [`FieldElement`] carries enough of its field inside its representation
//! (the prime modulus, the base field of a rational function) that arithmetic
//! needs no context. The [`FieldContext`] adds what the representation cannot
//! know: the variable name of a rational function field, and the optional
//! automorphism and derivation used by the twisted and Volterra rings.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::dense;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rationals,
    PrimeField(u64),
    GaussianRationals,
    RationalFunctions {
        base: Box<FieldContext>,
        variable: String,
    },
}

/// Named field automorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Automorphism {
    Identity,
    /// Complex conjugation on the Gaussian rationals.
    Conjugation,
}

/// Named derivations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Derivation {
    Zero,
    /// d/dt on a rational function field in t.
    Variable,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldContext {
    kind: FieldKind,
    automorphism: Option<Automorphism>,
    derivation: Option<Derivation>,
}

/// A rational function `num / den` in lowest terms with monic `den`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Vec<FieldElement>,
    den: Vec<FieldElement>,
}

/// An exact scalar in canonical form, so `==` is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Rational(BigRational),
    Prime { value: u64, modulus: u64 },
    Gaussian { re: BigRational, im: BigRational },
    RatFunc(Box<RationalFunction>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
}

/// Checked arithmetic entry point: verifies that the operands share a field
/// before dispatching.
pub fn field_arith(op: FieldOp, a: &FieldElement, b: Option<&FieldElement>) -> Result<FieldElement> {
    let other = || -> Result<&FieldElement> {
        let b = b.ok_or_else(|| Error::InvalidContext("binary operation needs two operands".into()))?;
        if !a.compatible(b) {
            return Err(Error::ContextMismatch);
        }
        Ok(b)
    };
    match op {
        FieldOp::Add => Ok(a + other()?),
        FieldOp::Sub => Ok(a - other()?),
        FieldOp::Mul => Ok(a * other()?),
        FieldOp::Div => a.checked_div(other()?),
        FieldOp::Neg => Ok(-a),
        FieldOp::Inv => a.inv(),
    }
}

/// `n (n-1) ... (n-i+1) / i!` for any integer `n`.
pub fn generalized_binomial(n: i64, i: u32) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for k in 0..i {
        num *= BigInt::from(n) - BigInt::from(k);
        den *= BigInt::from(k + 1);
    }
    num / den
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

impl FieldContext {
    pub fn rationals() -> Self {
        Self::plain(FieldKind::Rationals)
    }

    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self::plain(FieldKind::PrimeField(p)))
    }

    pub fn gaussian() -> Self {
        Self::plain(FieldKind::GaussianRationals)
    }

    /// `base(variable)`. The base must not itself be a function field, and
    /// the variable name must not collide with the reserved symbols `x`, `g`
    /// and `i`.
    pub fn rational_functions(base: FieldContext, variable: &str) -> Result<Self> {
        if matches!(base.kind, FieldKind::RationalFunctions { .. }) {
            return Err(Error::InvalidContext(
                "nested rational function fields are not supported".into(),
            ));
        }
        check_symbol(variable)?;
        if matches!(variable, "x" | "g" | "i") {
            return Err(Error::InvalidContext(format!("variable name `{variable}` is reserved")));
        }
        let base = FieldContext::plain(base.kind);
        Ok(Self::plain(FieldKind::RationalFunctions {
            base: Box::new(base),
            variable: variable.to_string(),
        }))
    }

    fn plain(kind: FieldKind) -> Self {
        FieldContext {
            kind,
            automorphism: None,
            derivation: None,
        }
    }

    pub fn with_automorphism(mut self, a: Automorphism) -> Result<Self> {
        if a == Automorphism::Conjugation && self.kind != FieldKind::GaussianRationals {
            return Err(Error::InvalidContext(
                "conjugation is only defined on the Gaussian rationals".into(),
            ));
        }
        self.automorphism = Some(a);
        Ok(self)
    }

    pub fn with_derivation(mut self, d: Derivation) -> Result<Self> {
        if d == Derivation::Variable && !matches!(self.kind, FieldKind::RationalFunctions { .. }) {
            return Err(Error::InvalidContext(
                "d/d<variable> is only defined on rational function fields".into(),
            ));
        }
        self.derivation = Some(d);
        Ok(self)
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn automorphism(&self) -> Option<Automorphism> {
        self.automorphism
    }

    pub fn derivation(&self) -> Option<Derivation> {
        self.derivation
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, FieldKind::PrimeField(_))
    }

    pub fn characteristic(&self) -> u64 {
        match &self.kind {
            FieldKind::PrimeField(p) => *p,
            FieldKind::RationalFunctions { base, .. } => base.characteristic(),
            _ => 0,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.from_int(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_bigint(&BigInt::from(n))
    }

    /// Image of an integer under the canonical map Z -> k (reduced mod p in
    /// characteristic p).
    pub fn from_bigint(&self, n: &BigInt) -> FieldElement {
        match &self.kind {
            FieldKind::Rationals => FieldElement::Rational(BigRational::from_integer(n.clone())),
            FieldKind::PrimeField(p) => FieldElement::Prime {
                value: n.mod_floor(&BigInt::from(*p)).to_u64().unwrap(),
                modulus: *p,
            },
            FieldKind::GaussianRationals => FieldElement::Gaussian {
                re: BigRational::from_integer(n.clone()),
                im: BigRational::zero(),
            },
            FieldKind::RationalFunctions { base, .. } => {
                FieldElement::ratfunc_constant(base.from_bigint(n))
            }
        }
    }

    /// `num/den` mapped into the field; fails if `den` vanishes in it.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<FieldElement> {
        self.from_bigint(num).checked_div(&self.from_bigint(den))
    }

    /// The square root of -1 in the Gaussian rationals.
    pub fn imaginary_unit(&self) -> Option<FieldElement> {
        match &self.kind {
            FieldKind::GaussianRationals => Some(FieldElement::Gaussian {
                re: BigRational::zero(),
                im: BigRational::one(),
            }),
            FieldKind::RationalFunctions { base, .. } => {
                base.imaginary_unit().map(FieldElement::ratfunc_constant)
            }
            _ => None,
        }
    }

    /// The transcendental generator of a rational function field.
    pub fn variable(&self) -> Option<FieldElement> {
        match &self.kind {
            FieldKind::RationalFunctions { base, .. } => Some(FieldElement::RatFunc(Box::new(
                RationalFunction {
                    num: vec![base.zero(), base.one()],
                    den: vec![base.one()],
                },
            ))),
            _ => None,
        }
    }

    pub fn variable_name(&self) -> Option<&str> {
        match &self.kind {
            FieldKind::RationalFunctions { variable, .. } => Some(variable),
            _ => None,
        }
    }

    /// Embeds a polynomial with base-field coefficients as a rational function.
    pub fn from_base_poly(&self, coeffs: Vec<FieldElement>) -> Result<FieldElement> {
        match &self.kind {
            FieldKind::RationalFunctions { base, .. } => {
                if coeffs.iter().any(|c| !base.contains(c)) {
                    return Err(Error::ContextMismatch);
                }
                Ok(FieldElement::ratfunc(coeffs, vec![base.one()]))
            }
            _ => Err(Error::InvalidContext("not a rational function field".into())),
        }
    }

    /// Whether `a` is an element of this field.
    pub fn contains(&self, a: &FieldElement) -> bool {
        a.compatible(&self.zero())
    }

    pub fn check(&self, a: &FieldElement) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn apply_automorphism(&self, a: &FieldElement) -> Result<FieldElement> {
        let auto = self.automorphism.ok_or(Error::NoAutomorphism)?;
        self.check(a)?;
        Ok(apply_auto(auto, a))
    }

    /// `sigma^m(a)`; the identity when no automorphism is configured.
    pub(crate) fn automorphism_power(&self, a: &FieldElement, m: usize) -> FieldElement {
        match self.automorphism {
            Some(Automorphism::Conjugation) if m % 2 == 1 => apply_auto(Automorphism::Conjugation, a),
            _ => a.clone(),
        }
    }

    pub fn apply_derivation(&self, a: &FieldElement, order: usize) -> Result<FieldElement> {
        if self.derivation.is_none() {
            return Err(Error::NoDerivation);
        }
        self.check(a)?;
        Ok(self.derive_n(a, order))
    }

    /// The `order`-fold derivative; zero derivation when none is configured.
    pub(crate) fn derive_n(&self, a: &FieldElement, order: usize) -> FieldElement {
        let mut out = a.clone();
        for _ in 0..order {
            if out.is_zero() {
                break;
            }
            out = self.derive_once(&out);
        }
        out
    }

    fn derive_once(&self, a: &FieldElement) -> FieldElement {
        match (self.derivation, a) {
            (Some(Derivation::Variable), FieldElement::RatFunc(rf)) => {
                // (n/d)' = (n'd - nd') / d^2
                let num = dense::sub(
                    &dense::mul(&dense::derivative(&rf.num), &rf.den),
                    &dense::mul(&rf.num, &dense::derivative(&rf.den)),
                );
                let den = dense::mul(&rf.den, &rf.den);
                FieldElement::ratfunc(num, den)
            }
            _ => a.zero_like(),
        }
    }

    /// A random element of moderate height, for tests and perturbations.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let small = |rng: &mut R| {
            BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=5)))
        };
        match &self.kind {
            FieldKind::Rationals => FieldElement::Rational(small(rng)),
            FieldKind::PrimeField(p) => FieldElement::Prime {
                value: rng.gen_range(0..*p),
                modulus: *p,
            },
            FieldKind::GaussianRationals => FieldElement::Gaussian {
                re: small(rng),
                im: small(rng),
            },
            FieldKind::RationalFunctions { base, .. } => {
                let num_deg = rng.gen_range(0..=2);
                let den_deg = rng.gen_range(0..=2);
                let num: Vec<_> = (0..=num_deg).map(|_| base.sample(rng)).collect();
                let mut den: Vec<_> = (0..den_deg).map(|_| base.sample(rng)).collect();
                den.push(base.one());
                let mut num = num;
                dense::trim(&mut num);
                FieldElement::ratfunc(num, den)
            }
        }
    }

    /// A random nonzero element.
    pub fn sample_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let a = self.sample(rng);
            if !a.is_zero() {
                return a;
            }
        }
    }

    /// Canonical text form, parseable by [`crate::parse::parse_field_element`].
    pub fn format(&self, a: &FieldElement) -> String {
        match a {
            FieldElement::Rational(q) => q.to_string(),
            FieldElement::Prime { value, .. } => value.to_string(),
            FieldElement::Gaussian { re, im } => format_gaussian(re, im),
            FieldElement::RatFunc(rf) => {
                let (base, var) = match &self.kind {
                    FieldKind::RationalFunctions { base, variable } => (base, variable.as_str()),
                    _ => unreachable!("rational function outside a function field"),
                };
                let fmt_poly = |c: &[FieldElement]| crate::text::format_poly(c, var, |e| base.format(e));
                let num = fmt_poly(&rf.num);
                if dense::is_one(&rf.den) {
                    return num;
                }
                let wrap = |s: String| {
                    if crate::text::is_atomic(&s) && !s.starts_with('-') && !s.contains('/') {
                        s
                    } else {
                        format!("({s})")
                    }
                };
                format!("{}/{}", wrap(num), wrap(fmt_poly(&rf.den)))
            }
        }
    }
}

impl fmt::Display for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FieldKind::Rationals => write!(f, "Q"),
            FieldKind::PrimeField(p) => write!(f, "GF({p})"),
            FieldKind::GaussianRationals => write!(f, "Qi"),
            FieldKind::RationalFunctions { base, variable } => write!(f, "RatFunc({base},{variable})"),
        }
    }
}

pub(crate) fn check_symbol(name: &str) -> Result<()> {
    let mut chars = name.chars();
    let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidContext(format!("`{name}` is not a valid symbol name")))
    }
}

fn format_gaussian(re: &BigRational, im: &BigRational) -> String {
    if im.is_zero() {
        return re.to_string();
    }
    let mag = im.abs();
    let imag = if mag.is_one() {
        "i".to_string()
    } else if mag.is_integer() {
        format!("{mag}i")
    } else {
        format!("{mag}*i")
    };
    let sign = if im.is_negative() { "-" } else { "+" };
    if re.is_zero() {
        if im.is_negative() {
            format!("-{imag}")
        } else {
            imag
        }
    } else {
        format!("{re}{sign}{imag}")
    }
}

fn apply_auto(auto: Automorphism, a: &FieldElement) -> FieldElement {
    match (auto, a) {
        (Automorphism::Conjugation, FieldElement::Gaussian { re, im }) => FieldElement::Gaussian {
            re: re.clone(),
            im: -im,
        },
        _ => a.clone(),
    }
}

impl FieldElement {
    /// Canonical rational function from an arbitrary fraction of base polynomials.
    pub(crate) fn ratfunc(mut num: Vec<FieldElement>, mut den: Vec<FieldElement>) -> FieldElement {
        dense::trim(&mut num);
        dense::trim(&mut den);
        assert!(!den.is_empty(), "rational function with zero denominator");
        if num.is_empty() {
            let one = den[0].one_like();
            return FieldElement::RatFunc(Box::new(RationalFunction { num, den: vec![one] }));
        }
        let g = dense::gcd(&num, &den);
        if !dense::is_one(&g) {
            num = dense::divmod(&num, &g).0;
            den = dense::divmod(&den, &g).0;
        }
        let lead_inv = den.last().unwrap().inv().expect("nonzero leading coefficient");
        if !lead_inv.is_one() {
            num = dense::scale(&num, &lead_inv);
            den = dense::scale(&den, &lead_inv);
        }
        FieldElement::RatFunc(Box::new(RationalFunction { num, den }))
    }

    fn ratfunc_constant(c: FieldElement) -> FieldElement {
        let one = c.one_like();
        FieldElement::ratfunc(vec![c], vec![one])
    }

    pub fn numerator(&self) -> Option<&[FieldElement]> {
        match self {
            FieldElement::RatFunc(rf) => Some(&rf.num),
            _ => None,
        }
    }

    pub fn denominator(&self) -> Option<&[FieldElement]> {
        match self {
            FieldElement::RatFunc(rf) => Some(&rf.den),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Rational(q) => q.is_zero(),
            FieldElement::Prime { value, .. } => *value == 0,
            FieldElement::Gaussian { re, im } => re.is_zero() && im.is_zero(),
            FieldElement::RatFunc(rf) => rf.num.is_empty(),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    pub fn zero_like(&self) -> FieldElement {
        self.int_like(0)
    }

    pub fn one_like(&self) -> FieldElement {
        self.int_like(1)
    }

    /// The integer `n` in the same field as `self`.
    pub fn int_like(&self, n: i64) -> FieldElement {
        match self {
            FieldElement::Rational(_) => FieldElement::Rational(BigRational::from_integer(n.into())),
            FieldElement::Prime { modulus, .. } => FieldElement::Prime {
                value: (n as i128).rem_euclid(*modulus as i128) as u64,
                modulus: *modulus,
            },
            FieldElement::Gaussian { .. } => FieldElement::Gaussian {
                re: BigRational::from_integer(n.into()),
                im: BigRational::zero(),
            },
            FieldElement::RatFunc(rf) => {
                let base_one = rf.den.last().unwrap();
                let c = base_one.int_like(n);
                if c.is_zero() {
                    FieldElement::RatFunc(Box::new(RationalFunction {
                        num: vec![],
                        den: vec![base_one.clone()],
                    }))
                } else {
                    FieldElement::RatFunc(Box::new(RationalFunction {
                        num: vec![c],
                        den: vec![base_one.clone()],
                    }))
                }
            }
        }
    }

    pub fn mul_int(&self, n: i64) -> FieldElement {
        self * &self.int_like(n)
    }

    /// Whether `self` and `other` live in the same field.
    pub fn compatible(&self, other: &FieldElement) -> bool {
        match (self, other) {
            (FieldElement::Rational(_), FieldElement::Rational(_)) => true,
            (FieldElement::Gaussian { .. }, FieldElement::Gaussian { .. }) => true,
            (FieldElement::Prime { modulus: p, .. }, FieldElement::Prime { modulus: q, .. }) => p == q,
            (FieldElement::RatFunc(a), FieldElement::RatFunc(b)) => {
                a.den.last().unwrap().compatible(b.den.last().unwrap())
            }
            _ => false,
        }
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            FieldElement::Rational(q) => FieldElement::Rational(q.recip()),
            FieldElement::Prime { value, modulus } => FieldElement::Prime {
                value: pow_mod(*value, modulus - 2, *modulus),
                modulus: *modulus,
            },
            FieldElement::Gaussian { re, im } => {
                let norm = re * re + im * im;
                FieldElement::Gaussian {
                    re: re / &norm,
                    im: -(im / &norm),
                }
            }
            FieldElement::RatFunc(rf) => FieldElement::ratfunc(rf.den.clone(), rf.num.clone()),
        })
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement> {
        if !self.compatible(other) {
            return Err(Error::ContextMismatch);
        }
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: u32) -> FieldElement {
        let mut acc = self.one_like();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Recomputes the canonical representation from scratch.
    pub fn canonical(&self) -> FieldElement {
        match self {
            FieldElement::Rational(q) => {
                FieldElement::Rational(BigRational::new(q.numer().clone(), q.denom().clone()))
            }
            FieldElement::Prime { value, modulus } => FieldElement::Prime {
                value: value % modulus,
                modulus: *modulus,
            },
            FieldElement::Gaussian { re, im } => FieldElement::Gaussian {
                re: BigRational::new(re.numer().clone(), re.denom().clone()),
                im: BigRational::new(im.numer().clone(), im.denom().clone()),
            },
            FieldElement::RatFunc(rf) => {
                let num: Vec<_> = rf.num.iter().map(FieldElement::canonical).collect();
                let den: Vec<_> = rf.den.iter().map(FieldElement::canonical).collect();
                FieldElement::ratfunc(num, den)
            }
        }
    }
}

fn mismatch() -> ! {
    panic!("arithmetic on elements of different fields")
}

fn reduced(num: Vec<FieldElement>, den: Vec<FieldElement>) -> FieldElement {
    if num.is_empty() {
        let one = den[0].one_like();
        return FieldElement::RatFunc(Box::new(RationalFunction { num, den: vec![one] }));
    }
    FieldElement::RatFunc(Box::new(RationalFunction { num, den }))
}

/// Sum of reduced fractions, cancelling only against the common part of the
/// denominators.
fn ratfunc_add(a: &RationalFunction, b: &RationalFunction) -> FieldElement {
    if a.num.is_empty() {
        return FieldElement::RatFunc(Box::new(b.clone()));
    }
    if b.num.is_empty() {
        return FieldElement::RatFunc(Box::new(a.clone()));
    }
    let g = dense::gcd(&a.den, &b.den);
    if dense::is_one(&g) {
        let num = dense::add(&dense::mul(&a.num, &b.den), &dense::mul(&b.num, &a.den));
        return reduced(num, dense::mul(&a.den, &b.den));
    }
    let a_rest = dense::divmod(&a.den, &g).0;
    let b_rest = dense::divmod(&b.den, &g).0;
    let num = dense::add(&dense::mul(&a.num, &b_rest), &dense::mul(&b.num, &a_rest));
    let den = dense::mul(&a.den, &b_rest);
    if num.is_empty() {
        return reduced(num, den);
    }
    let h = dense::gcd(&num, &g);
    if dense::is_one(&h) {
        reduced(num, den)
    } else {
        reduced(dense::divmod(&num, &h).0, dense::divmod(&den, &h).0)
    }
}

/// Product of reduced fractions with cross cancellation.
fn ratfunc_mul(a: &RationalFunction, b: &RationalFunction) -> FieldElement {
    if a.num.is_empty() || b.num.is_empty() {
        let one = a.den[0].one_like();
        return reduced(Vec::new(), vec![one]);
    }
    let cancel = |num: &[FieldElement], den: &[FieldElement]| {
        let g = dense::gcd(num, den);
        if dense::is_one(&g) {
            (num.to_vec(), den.to_vec())
        } else {
            (dense::divmod(num, &g).0, dense::divmod(den, &g).0)
        }
    };
    let (an, bd) = cancel(&a.num, &b.den);
    let (bn, ad) = cancel(&b.num, &a.den);
    let num = dense::mul(&an, &bn);
    let den = dense::mul(&ad, &bd);
    let lead = den.last().expect("nonzero denominator").clone();
    if lead.is_one() {
        reduced(num, den)
    } else {
        let inv = lead.inv().expect("nonzero leading coefficient");
        reduced(dense::scale(&num, &inv), dense::scale(&den, &inv))
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        use FieldElement::*;
        match (self, rhs) {
            (Rational(a), Rational(b)) => Rational(a + b),
            (Prime { value: a, modulus: p }, Prime { value: b, modulus: q }) if p == q => Prime {
                value: ((*a as u128 + *b as u128) % *p as u128) as u64,
                modulus: *p,
            },
            (Gaussian { re: a, im: b }, Gaussian { re: c, im: d }) => Gaussian { re: a + c, im: b + d },
            (RatFunc(a), RatFunc(b)) => ratfunc_add(a, b),
            _ => mismatch(),
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        use FieldElement::*;
        match self {
            Rational(a) => Rational(-a),
            Prime { value, modulus } => Prime {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
            Gaussian { re, im } => Gaussian { re: -re, im: -im },
            RatFunc(a) => RatFunc(Box::new(RationalFunction {
                num: dense::neg(&a.num),
                den: a.den.clone(),
            })),
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self + &(-rhs)
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        use FieldElement::*;
        match (self, rhs) {
            (Rational(a), Rational(b)) => Rational(a * b),
            (Prime { value: a, modulus: p }, Prime { value: b, modulus: q }) if p == q => Prime {
                value: ((*a as u128 * *b as u128) % *p as u128) as u64,
                modulus: *p,
            },
            (Gaussian { re: a, im: b }, Gaussian { re: c, im: d }) => Gaussian {
                re: a * c - b * d,
                im: a * d + b * c,
            },
            (RatFunc(a), RatFunc(b)) => ratfunc_mul(a, b),
            _ => mismatch(),
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}
