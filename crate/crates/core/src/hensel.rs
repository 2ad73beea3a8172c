//! Stage-wise Hensel lifting over `A/m^N`.
//!
//! Starting from canonical lifts of a coprime residue factorization
//! `f̄ = f1 f2`, stage `r` reads the residual `f - F1 F2 ∈ m^r[x]` as a
//! polynomial `c` over `k`, solves `f2 G1 + f1 G2 = c` with
//! `deg Gi < deg fi`, and adds `Gi g^r` to `Fi`. When `gr(A)` is commutative
//! this pushes the residual into `m^{r+1}[x]`. Every stage checks that it did
//! and otherwise stops with an [`ObstructionReport`], which is what happens
//! for twisted series with a nontrivial automorphism.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::localring::{LocalElement, LocalRing};
use crate::ncpoly::{coeff_valuation_floor, leading_form, reduce_poly, right_evaluate, shift_into_ideal, LocalPoly};
use crate::respoly::{bezout_solve_constrained, extended_euclid, is_simple_root, ResiduePoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObstructionKind {
    /// The residue factors share a common factor.
    ResidueNotCoprime,
    /// The stage correction left the residual in `m^r[x]` instead of `m^{r+1}[x]`.
    StepVerificationFailed,
    /// The correction would break the degree or monicity constraints.
    DegreeViolation,
}

impl ObstructionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObstructionKind::ResidueNotCoprime => "RESIDUE_NOT_COPRIME",
            ObstructionKind::StepVerificationFailed => "STEP_VERIFICATION_FAILED",
            ObstructionKind::DegreeViolation => "DEGREE_VIOLATION",
        }
    }
}

/// Evidence that lifting cannot continue past `stage`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionReport {
    pub stage: usize,
    /// Image of the failing residual in `(m^stage/m^{stage+1})[x]`.
    pub residual_leading_form: ResiduePoly,
    pub classification: ObstructionKind,
    /// The residual at the point of failure.
    pub witness: LocalPoly,
}

/// Result of an engine operation that may hit an obstruction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<T> {
    Lifted(T),
    Obstructed(ObstructionReport),
}

impl<T> Outcome<T> {
    pub fn lifted(self) -> Option<T> {
        match self {
            Outcome::Lifted(t) => Some(t),
            Outcome::Obstructed(_) => None,
        }
    }

    pub fn obstruction(&self) -> Option<&ObstructionReport> {
        match self {
            Outcome::Lifted(_) => None,
            Outcome::Obstructed(r) => Some(r),
        }
    }

    pub fn is_lifted(&self) -> bool {
        matches!(self, Outcome::Lifted(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftStatus {
    Lifted,
    Obstructed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftOutcome {
    pub status: LiftStatus,
    pub factors: Option<(LocalPoly, LocalPoly)>,
    pub obstruction: Option<ObstructionReport>,
    pub stages_completed: usize,
}

fn require_monic(f: &LocalPoly) -> Result<()> {
    if f.is_monic() {
        Ok(())
    } else {
        Err(Error::NotMonic)
    }
}

fn require_same_ring(a: &LocalPoly, b: &LocalPoly) -> Result<()> {
    if a.ring() == b.ring() {
        Ok(())
    } else {
        Err(Error::ContextMismatch)
    }
}

fn coprime(a: &ResiduePoly, b: &ResiduePoly) -> Result<bool> {
    Ok(extended_euclid(a, b)?.0.is_one())
}

/// `F1, F2` as coefficientwise canonical lifts of monic `f1, f2`.
pub fn initial_lift(f1: &ResiduePoly, f2: &ResiduePoly, ring: &LocalRing) -> Result<(LocalPoly, LocalPoly)> {
    if !f1.is_monic() || !f2.is_monic() {
        return Err(Error::NotMonic);
    }
    Ok((LocalPoly::lift(ring, f1)?, LocalPoly::lift(ring, f2)?))
}

/// One lifting stage: from `f ≡ F1 F2 mod m^r` to `mod m^{r+1}`.
pub fn lift_step(f: &LocalPoly, f1r: &LocalPoly, f2r: &LocalPoly, r: usize) -> Result<Outcome<(LocalPoly, LocalPoly)>> {
    require_same_ring(f, f1r)?;
    require_same_ring(f, f2r)?;
    require_monic(f)?;
    require_monic(f1r)?;
    require_monic(f2r)?;
    let ring = f.ring().clone();
    if r == 0 || r >= ring.precision() {
        return Err(Error::InvalidContext(format!(
            "stage {r} must lie in 1..{}",
            ring.precision()
        )));
    }
    let residual = f - &(f1r * f2r);
    let c = leading_form(&residual, r)?;
    let (f1, f2) = (reduce_poly(f1r), reduce_poly(f2r));
    let obstructed = |classification| {
        Ok(Outcome::Obstructed(ObstructionReport {
            stage: r,
            residual_leading_form: c.clone(),
            classification,
            witness: residual.clone(),
        }))
    };
    let (g1, g2) = match bezout_solve_constrained(&f1, &f2, &c) {
        Ok(sol) => sol,
        Err(Error::NotCoprime) => return obstructed(ObstructionKind::ResidueNotCoprime),
        Err(Error::DegreeTooLarge { .. }) => return obstructed(ObstructionKind::DegreeViolation),
        Err(e) => return Err(e),
    };
    let next1 = f1r + &shift_into_ideal(&g1, r, &ring)?;
    let next2 = f2r + &shift_into_ideal(&g2, r, &ring)?;
    if next1.degree() != f1r.degree() || next2.degree() != f2r.degree() || !next1.is_monic() || !next2.is_monic() {
        return obstructed(ObstructionKind::DegreeViolation);
    }
    let after = f - &(&next1 * &next2);
    if coeff_valuation_floor(&after) <= r {
        return Ok(Outcome::Obstructed(ObstructionReport {
            stage: r,
            residual_leading_form: leading_form(&after, r)?,
            classification: ObstructionKind::StepVerificationFailed,
            witness: after,
        }));
    }
    Ok(Outcome::Lifted((next1, next2)))
}

fn check_split(f: &LocalPoly, f1: &ResiduePoly, f2: &ResiduePoly) -> Result<()> {
    require_monic(f)?;
    if f1.field() != f.ring().field() || f2.field() != f.ring().field() {
        return Err(Error::ContextMismatch);
    }
    if !f1.is_monic() || !f2.is_monic() {
        return Err(Error::NotMonic);
    }
    if reduce_poly(f) != f1 * f2 {
        return Err(Error::ResidueFactorizationMismatch);
    }
    if !coprime(f1, f2)? {
        return Err(Error::NotCoprime);
    }
    Ok(())
}

/// Runs stages `1..N`, calling `hook(r, F1, F2)` after the initial lift
/// (`r = 0`) and after every successful stage.
fn run_stages(
    f: &LocalPoly,
    f1: &ResiduePoly,
    f2: &ResiduePoly,
    hook: &mut dyn FnMut(usize, &mut LocalPoly, &mut LocalPoly),
) -> Result<LiftOutcome> {
    let ring = f.ring().clone();
    let (mut big1, mut big2) = initial_lift(f1, f2, &ring)?;
    hook(0, &mut big1, &mut big2);
    let mut stages_completed = 0;
    for r in 1..ring.precision() {
        match lift_step(f, &big1, &big2, r)? {
            Outcome::Lifted((a, b)) => {
                big1 = a;
                big2 = b;
                stages_completed += 1;
                hook(r, &mut big1, &mut big2);
            }
            Outcome::Obstructed(report) => {
                return Ok(LiftOutcome {
                    status: LiftStatus::Obstructed,
                    factors: None,
                    obstruction: Some(report),
                    stages_completed,
                })
            }
        }
    }
    debug_assert!(coeff_valuation_floor(&(f - &(&big1 * &big2))) >= ring.precision());
    debug_assert!(big1.is_monic() && big2.is_monic());
    debug_assert!(&reduce_poly(&big1) == f1 && &reduce_poly(&big2) == f2);
    Ok(LiftOutcome {
        status: LiftStatus::Lifted,
        factors: Some((big1, big2)),
        obstruction: None,
        stages_completed,
    })
}

/// Lifts a coprime monic residue factorization `f̄ = f1 f2` to
/// `f ≡ F1 F2 mod m^N` with `F̄i = fi`, both monic.
pub fn hensel_lift(f: &LocalPoly, f1: &ResiduePoly, f2: &ResiduePoly) -> Result<LiftOutcome> {
    check_split(f, f1, f2)?;
    run_stages(f, f1, f2, &mut |_, _, _| {})
}

/// Lifts a simple root `r0` of `f̄` to the unique right root `a` of `f` with
/// `ā = r0`, via the factorization `f = F1 (x - a)`.
pub fn lift_root(f: &LocalPoly, r0: &FieldElement) -> Result<Outcome<LocalElement>> {
    require_monic(f)?;
    let ring = f.ring().clone();
    let fbar = reduce_poly(f);
    if !is_simple_root(&fbar, r0) {
        return Err(Error::NotASimpleRoot);
    }
    let f2 = ResiduePoly::linear(ring.field(), r0);
    let f1 = fbar.divmod(&f2)?.0;
    let outcome = hensel_lift(f, &f1, &f2)?;
    match (outcome.factors, outcome.obstruction) {
        (Some((_, right)), _) => {
            let a = -&right.coeff(0);
            debug_assert!(right_evaluate(f, &a)?.is_zero());
            Ok(Outcome::Lifted(a))
        }
        (None, Some(report)) => Ok(Outcome::Obstructed(report)),
        (None, None) => unreachable!("obstructed lift without a report"),
    }
}

/// For monic `p`, `q` with coprime reductions, finds monic `p1`, `q1` with
/// `deg p1 = deg q`, `deg q1 = deg p` and `p1 p ≡ q1 q mod m^N`.
pub fn commute_factors(p: &LocalPoly, q: &LocalPoly) -> Result<Outcome<(LocalPoly, LocalPoly)>> {
    require_same_ring(p, q)?;
    require_monic(p)?;
    require_monic(q)?;
    let ring = p.ring().clone();
    let (pbar, qbar) = (reduce_poly(p), reduce_poly(q));
    if !coprime(&pbar, &qbar)? {
        return Err(Error::NotCoprime);
    }
    let mut p1 = LocalPoly::lift(&ring, &qbar)?;
    let mut q1 = LocalPoly::lift(&ring, &pbar)?;
    for r in 1..ring.precision() {
        let h = &(&p1 * p) - &(&q1 * q);
        let c = leading_form(&h, r)?;
        // pbar g1 + qbar w = -c, then g2 = -w gives g1 pbar - g2 qbar = -c
        let (g1, w) = match bezout_solve_constrained(&qbar, &pbar, &-&c) {
            Ok(sol) => sol,
            Err(Error::DegreeTooLarge { .. }) => {
                return Ok(Outcome::Obstructed(ObstructionReport {
                    stage: r,
                    residual_leading_form: c,
                    classification: ObstructionKind::DegreeViolation,
                    witness: h,
                }))
            }
            Err(e) => return Err(e),
        };
        p1 = &p1 + &shift_into_ideal(&g1, r, &ring)?;
        q1 = &q1 - &shift_into_ideal(&w, r, &ring)?;
        let after = &(&p1 * p) - &(&q1 * q);
        if coeff_valuation_floor(&after) <= r {
            return Ok(Outcome::Obstructed(ObstructionReport {
                stage: r,
                residual_leading_form: leading_form(&after, r)?,
                classification: ObstructionKind::StepVerificationFailed,
                witness: after,
            }));
        }
    }
    Ok(Outcome::Lifted((p1, q1)))
}

/// Splits monic `f` into monic factors `p_1 ⋯ p_s ≡ f` with `p̄_i = blocks[i]`,
/// peeling blocks off left to right with two-factor lifts.
pub fn primary_decomposition(f: &LocalPoly, blocks: &[ResiduePoly]) -> Result<Outcome<Vec<LocalPoly>>> {
    require_monic(f)?;
    let field = f.ring().field();
    if blocks.is_empty() || blocks.iter().any(|b| b.field() != field) {
        return Err(Error::BlockProductMismatch);
    }
    if blocks.iter().any(|b| !b.is_monic()) {
        return Err(Error::NotMonic);
    }
    let product = blocks.iter().skip(1).fold(blocks[0].clone(), |acc, b| &acc * b);
    if product != reduce_poly(f) {
        return Err(Error::BlockProductMismatch);
    }
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            if !coprime(a, b)? {
                return Err(Error::NotCoprime);
            }
        }
    }
    decompose(f, blocks)
}

fn decompose(f: &LocalPoly, blocks: &[ResiduePoly]) -> Result<Outcome<Vec<LocalPoly>>> {
    if blocks.len() == 1 {
        return Ok(Outcome::Lifted(vec![f.clone()]));
    }
    let rest = blocks[2..].iter().fold(blocks[1].clone(), |acc, b| &acc * b);
    let outcome = hensel_lift(f, &blocks[0], &rest)?;
    let Some((head, tail)) = outcome.factors else {
        return Ok(Outcome::Obstructed(outcome.obstruction.expect("obstructed lift carries a report")));
    };
    Ok(match decompose(&tail, &blocks[1..])? {
        Outcome::Lifted(mut factors) => {
            factors.insert(0, head);
            Outcome::Lifted(factors)
        }
        obstructed => obstructed,
    })
}

/// Re-runs the lift after offsetting the state at a random stage `r` by a
/// random element of `m^{r+1}[x]` (degrees kept below `deg fi`) and reports
/// whether the final factors still agree with the unperturbed lift.
pub fn uniqueness_check(f: &LocalPoly, f1: &ResiduePoly, f2: &ResiduePoly, seed: u64) -> Result<bool> {
    let base = hensel_lift(f, f1, f2)?;
    let Some(expected) = base.factors else {
        return Err(Error::InvalidContext("the unperturbed lift is obstructed".into()));
    };
    let ring = f.ring().clone();
    let n = ring.precision();
    let mut rng = StdRng::seed_from_u64(seed);
    let stage = rng.gen_range(0..n);
    let (d1, d2) = (f1.degree().unwrap_or(0), f2.degree().unwrap_or(0));
    let perturbed = run_stages(f, f1, f2, &mut |r, a, b| {
        if r == stage {
            *a = &*a + &LocalPoly::sample_in_ideal(&ring, d1, r + 1, &mut rng);
            *b = &*b + &LocalPoly::sample_in_ideal(&ring, d2, r + 1, &mut rng);
        }
    })?;
    Ok(perturbed.factors.as_ref() == Some(&expected))
}
