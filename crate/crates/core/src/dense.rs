//! Dense univariate polynomial helpers over `FieldElement` coefficient slices.
//!
//! Coefficients are stored lowest degree first and every function expects and
//! returns trimmed vectors (no trailing zeros). The zero polynomial is the empty
//! vector.

use crate::field::FieldElement;

pub(crate) type Coeffs = Vec<FieldElement>;

pub(crate) fn trim(v: &mut Coeffs) {
    while v.last().is_some_and(FieldElement::is_zero) {
        v.pop();
    }
}

pub(crate) fn add(a: &[FieldElement], b: &[FieldElement]) -> Coeffs {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out: Coeffs = long.to_vec();
    for (o, s) in out.iter_mut().zip(short) {
        *o = &*o + s;
    }
    trim(&mut out);
    out
}

pub(crate) fn neg(a: &[FieldElement]) -> Coeffs {
    a.iter().map(|c| -c).collect()
}

pub(crate) fn sub(a: &[FieldElement], b: &[FieldElement]) -> Coeffs {
    add(a, &neg(b))
}

pub(crate) fn scale(a: &[FieldElement], c: &FieldElement) -> Coeffs {
    if c.is_zero() {
        return Vec::new();
    }
    let mut out: Coeffs = a.iter().map(|x| x * c).collect();
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &[FieldElement], b: &[FieldElement]) -> Coeffs {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let zero = a[0].zero_like();
    let mut out = vec![zero; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    trim(&mut out);
    out
}

/// Euclidean division; `b` must be nonzero.
pub(crate) fn divmod(a: &[FieldElement], b: &[FieldElement]) -> (Coeffs, Coeffs) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let lead_inv = b.last().unwrap().inv().expect("trimmed leading coefficient");
    let mut rem: Coeffs = a.to_vec();
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let zero = b[0].zero_like();
    let mut quot = vec![zero; rem.len() - b.len() + 1];
    while rem.len() >= b.len() && !rem.is_empty() {
        let shift = rem.len() - b.len();
        let factor = rem.last().unwrap() * &lead_inv;
        for (k, bc) in b.iter().enumerate() {
            rem[shift + k] = &rem[shift + k] - &(&factor * bc);
        }
        quot[shift] = factor;
        // the leading term cancels exactly
        rem.pop();
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

pub(crate) fn monic(a: &[FieldElement]) -> Coeffs {
    match a.last() {
        None => Vec::new(),
        Some(lead) => scale(a, &lead.inv().expect("nonzero leading coefficient")),
    }
}

/// Monic gcd; zero when both inputs are zero.
pub(crate) fn gcd(a: &[FieldElement], b: &[FieldElement]) -> Coeffs {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while !y.is_empty() {
        let (_, r) = divmod(&x, &y);
        x = y;
        // keeping remainders monic curbs coefficient growth over Q
        y = monic(&r);
    }
    monic(&x)
}

pub(crate) fn derivative(a: &[FieldElement]) -> Coeffs {
    let mut out: Coeffs = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.mul_int(k as i64))
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn eval(a: &[FieldElement], x: &FieldElement) -> FieldElement {
    let mut acc = x.zero_like();
    for c in a.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

pub(crate) fn is_one(a: &[FieldElement]) -> bool {
    a.len() == 1 && a[0].is_one()
}
