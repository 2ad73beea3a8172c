//! Brute-force verifiers that share no code path with the lifting engine.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldKind};
use crate::localring::{LocalElement, LocalRing, RingKind};
use crate::ncpoly::LocalPoly;

pub const MAX_SEARCH_PRECISION: usize = 3;
pub const MAX_SEARCH_DEGREE: usize = 3;
pub const MAX_SEARCH_SIZE: u128 = 10_000_000;

/// Bounds of an exhaustive search over `GF(p)[[t]]/t^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchSpace {
    pub modulus: u64,
    pub precision: usize,
    pub degrees: (usize, usize),
}

impl SearchSpace {
    pub fn new(ring: &LocalRing, d1: usize, d2: usize) -> Result<Self> {
        if ring.kind() != RingKind::CommutativeSeries {
            return Err(Error::InvalidContext("the exhaustive search runs over commutative series only".into()));
        }
        let FieldKind::PrimeField(p) = *ring.field().kind() else {
            return Err(Error::UnsupportedField(ring.field().to_string()));
        };
        let space = SearchSpace {
            modulus: p,
            precision: ring.precision(),
            degrees: (d1, d2),
        };
        let size = space.size();
        if space.precision > MAX_SEARCH_PRECISION || d1.max(d2) > MAX_SEARCH_DEGREE || size > MAX_SEARCH_SIZE {
            return Err(Error::SearchSpaceTooLarge {
                size,
                limit: MAX_SEARCH_SIZE,
            });
        }
        Ok(space)
    }

    /// `p^(n (d1 + d2))`, saturating.
    pub fn size(&self) -> u128 {
        let exp = self.precision * (self.degrees.0 + self.degrees.1);
        (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(self.modulus as u128)).unwrap_or(u128::MAX)
    }
}

/// Dense residues mod `p`, one `Vec` per polynomial coefficient, each of
/// length `n` (series coefficients lowest first).
type Native = Vec<Vec<u64>>;

fn to_native(f: &LocalPoly) -> Native {
    f.coeffs()
        .iter()
        .map(|c| {
            c.coeffs()
                .iter()
                .map(|v| match v {
                    FieldElement::Prime { value, .. } => *value,
                    _ => unreachable!("checked prime field"),
                })
                .collect()
        })
        .collect()
}

/// Monic polynomial of degree `d` whose lower coefficients are the base-`p`
/// digits of `index`.
fn decode(mut index: u64, d: usize, n: usize, p: u64) -> Native {
    let mut out = vec![vec![0; n]; d + 1];
    for coeff in out.iter_mut().take(d) {
        for digit in coeff.iter_mut() {
            *digit = index % p;
            index /= p;
        }
    }
    out[d][0] = 1;
    out
}

/// Whether `a b = f` coefficient by coefficient, bailing at the first miss.
fn product_matches(a: &Native, b: &Native, f: &Native, n: usize, p: u64) -> bool {
    let mut acc = vec![0u64; n];
    for (k, target) in f.iter().enumerate() {
        acc.iter_mut().for_each(|v| *v = 0);
        let lo = k.saturating_sub(b.len() - 1);
        for i in lo..=k.min(a.len() - 1) {
            let (x, y) = (&a[i], &b[k - i]);
            for (s, xs) in x.iter().enumerate() {
                if *xs == 0 {
                    continue;
                }
                for (t, ys) in y.iter().take(n - s).enumerate() {
                    acc[s + t] = (acc[s + t] + xs * ys) % p;
                }
            }
        }
        if acc != *target {
            return false;
        }
    }
    true
}

fn from_native(ring: &LocalRing, f: &Native) -> LocalPoly {
    let coeffs = f
        .iter()
        .map(|c| {
            let series = c.iter().map(|&v| ring.field().from_int(v as i64)).collect();
            LocalElement::from_coeffs(ring, series).expect("residues lie in the field")
        })
        .collect();
    LocalPoly::new(ring, coeffs).expect("same ring")
}

/// Every pair of monic `(F1, F2)` of degrees `(d1, d2)` over `GF(p)[[t]]/t^n`
/// with `F1 F2 = f`, sorted lexicographically by coefficients.
pub fn exhaustive_factor_search(f: &LocalPoly, d1: usize, d2: usize) -> Result<Vec<(LocalPoly, LocalPoly)>> {
    let ring = f.ring().clone();
    let space = SearchSpace::new(&ring, d1, d2)?;
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    if f.degree() != Some(d1 + d2) {
        return Err(Error::InvalidContext(format!(
            "factor degrees {d1} + {d2} do not add up to the degree of f"
        )));
    }
    let (p, n) = (space.modulus, space.precision);
    let target = to_native(f);
    let count = |d: usize| p.pow((n * d) as u32);
    let (count1, count2) = (count(d1), count(d2));
    let mut found: Vec<(Vec<u64>, Vec<u64>)> = (0..count1)
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = decode(i, d1, n, p);
            let target = &target;
            (0..count2).filter_map(move |j| {
                let b = decode(j, d2, n, p);
                product_matches(&a, &b, target, n, p).then(|| (a.concat(), b.concat()))
            })
        })
        .collect();
    found.sort();
    Ok(found
        .into_iter()
        .map(|(a, b)| {
            let unflatten = |v: Vec<u64>| v.chunks(n).map(<[u64]>::to_vec).collect::<Native>();
            (from_native(&ring, &unflatten(a)), from_native(&ring, &unflatten(b)))
        })
        .collect())
}

/// Series coefficients lowest first, on the left of the generator powers.
type Series = Vec<FieldElement>;

/// `g c` for a scalar `c`, from `g c = c g - g c' g` alone.
fn generator_times_scalar(ring: &LocalRing, c: &FieldElement, len: usize) -> Series {
    let zero = ring.field().zero();
    let mut out = vec![zero; len];
    if len < 2 || c.is_zero() {
        return out;
    }
    out[1] = c.clone();
    let inner = generator_times_scalar(ring, &ring.field().derive_n(c, 1), len - 1);
    for (j, v) in inner.iter().enumerate() {
        out[j + 1] = &out[j + 1] - v;
    }
    out
}

/// `g v` for a series `v`: each `v_j g^j` becomes `(g v_j) g^j`.
fn generator_times_series(ring: &LocalRing, v: &Series) -> Series {
    let len = v.len();
    let mut out = vec![ring.field().zero(); len];
    for (j, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (k, w) in generator_times_scalar(ring, c, len - j).iter().enumerate() {
            out[j + k] = &out[j + k] + w;
        }
    }
    out
}

/// Volterra product computed by repeatedly pushing one `g` past a scalar
/// with `g c = c g - g c' g`, never using the closed binomial rule.
pub fn volterra_mul_recursive_oracle(a: &LocalElement, b: &LocalElement) -> Result<LocalElement> {
    let ring = a.ring().clone();
    if !a.same_ring(b) {
        return Err(Error::ContextMismatch);
    }
    if ring.kind() != RingKind::Volterra {
        return Err(Error::InvalidContext("the recursive oracle needs a Volterra ring".into()));
    }
    let mut out: Series = vec![ring.field().zero(); ring.precision()];
    // g^i b, built up one generator at a time
    let mut shifted: Series = b.coeffs().to_vec();
    for ai in a.coeffs() {
        if !ai.is_zero() {
            for (slot, v) in out.iter_mut().zip(&shifted) {
                *slot = &*slot + &(ai * v);
            }
        }
        shifted = generator_times_series(&ring, &shifted);
    }
    LocalElement::from_coeffs(&ring, out)
}

/// Whether `a^exponent = target`, by repeated multiplication.
pub fn series_power_check(a: &LocalElement, target: &LocalElement, exponent: usize) -> bool {
    if !a.same_ring(target) || exponent == 0 {
        return false;
    }
    let power = (1..exponent).fold(a.clone(), |acc, _| &acc * a);
    power == *target
}
