//! First-integral algebra: I^k_{αβ} = v_α† Aᵏ v_β evaluation and the closed
//! bracket formula on the invariant ring, checked against the bivector engine
//! as an independent code path.

use num_complex::Complex64 as C64;

use crate::bivector::{PencilParams, RawPoint};
use crate::error::{Error, Result};
use crate::matlie::vdot;
use crate::phasespace::MPoint;
use crate::scalars;

/// Index data of a first integral I^k_{αβ}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IFn {
    pub k: i32,
    pub alpha: usize,
    pub beta: usize,
}

impl IFn {
    pub fn new(k: i32, alpha: usize, beta: usize) -> Self {
        IFn { k, alpha, beta }
    }
}

/// v_α† Aᵏ v_β, with A⁻¹ = A† for negative powers.
pub fn eval_i(spec: IFn, m: &MPoint) -> C64 {
    let ak = m.a.mat().pow_unitary(spec.k);
    vdot(&m.balls[spec.alpha].v, &ak.mulv(&m.balls[spec.beta].v))
}

fn eval_i_raw(p: &RawPoint, k: i32, alpha: usize, beta: usize) -> C64 {
    let ak = p.a.pow_unitary(k);
    vdot(&p.v[alpha], &ak.mulv(&p.v[beta]))
}

fn sgn(a: usize, b: usize) -> f64 {
    use std::cmp::Ordering::*;
    match a.cmp(&b) {
        Greater => 1.0,
        Less => -1.0,
        Equal => 0.0,
    }
}

/// Which sign-carrying term of the closed formula to flip; test-only hook for
/// the transcription-error mutation sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignSite {
    SgnGammaAlpha,
    ZStarAlphaGamma,
    SgnEpsBeta,
    ZStarBetaEps,
    SgnEpsAlpha,
    ZStarAlphaEps,
    SgnGammaBeta,
    ZStarBetaGamma,
}

pub const ALL_SIGN_SITES: [SignSite; 8] = [
    SignSite::SgnGammaAlpha,
    SignSite::ZStarAlphaGamma,
    SignSite::SgnEpsBeta,
    SignSite::ZStarBetaEps,
    SignSite::SgnEpsAlpha,
    SignSite::ZStarAlphaEps,
    SignSite::SgnGammaBeta,
    SignSite::ZStarBetaGamma,
];

fn flip(site: SignSite, target: Option<SignSite>) -> f64 {
    if Some(site) == target {
        -1.0
    } else {
        1.0
    }
}

/// The closed bracket {I^k_{αβ}, I^l_{γε}}_z of the first-integral algebra,
/// evaluated verbatim; the first line is omitted when k = 0 or l = 0.
pub fn closed_bracket(s1: IFn, s2: IFn, m: &MPoint, z: &PencilParams) -> Result<C64> {
    closed_bracket_mutated(s1, s2, m, z, None)
}

/// Same formula with one optional sign flip, for the mutation test.
pub fn closed_bracket_mutated(
    s1: IFn,
    s2: IFn,
    m: &MPoint,
    z: &PencilParams,
    flip_site: Option<SignSite>,
) -> Result<C64> {
    if s1.k < 0 || s2.k < 0 {
        return Err(Error::Config("closed formula takes k, l ≥ 0".into()));
    }
    let p = RawPoint::from_point(m);
    let (k, alpha, beta) = (s1.k, s1.alpha, s1.beta);
    let (l, gamma, eps) = (s2.k, s2.alpha, s2.beta);
    let i_ = C64::new(0.0, 1.0);
    let ii = |kk: i32, a: usize, b: usize| eval_i_raw(&p, kk, a, b);

    // Pure A-sector line, vanishing when k = 0 or l = 0. This is the double
    // sum over letter positions of both words telescoped in one index; the
    // cross terms carry the overlap multiplicity, which the printed
    // single-multiplicity r-sums cannot reproduce for min(k, l) ≥ 2.
    let mut acc = C64::new(0.0, 0.0);
    for q in 0..l {
        acc += 0.5
            * (ii(q, gamma, beta) * ii(k + l - q, alpha, eps)
                + ii(q + 1, gamma, beta) * ii(k + l - 1 - q, alpha, eps)
                - ii(k + q, gamma, beta) * ii(l - q, alpha, eps)
                - ii(k + 1 + q, gamma, beta) * ii(l - 1 - q, alpha, eps));
    }
    let prod_kl = ii(k, alpha, beta) * ii(l, gamma, eps);
    acc += 0.5
        * flip(SignSite::SgnGammaAlpha, flip_site)
        * sgn(gamma, alpha)
        * ii(k, gamma, beta)
        * ii(l, alpha, eps);
    acc -= flip(SignSite::ZStarAlphaGamma, flip_site) * z.zstar(alpha, gamma) * prod_kl;
    acc += 0.5
        * flip(SignSite::SgnEpsBeta, flip_site)
        * sgn(eps, beta)
        * ii(l, gamma, beta)
        * ii(k, alpha, eps);
    acc -= flip(SignSite::ZStarBetaEps, flip_site) * z.zstar(beta, eps) * prod_kl;
    acc -= 0.5
        * flip(SignSite::SgnEpsAlpha, flip_site)
        * sgn(eps, alpha)
        * ii(k + l, gamma, beta)
        * ii(0, alpha, eps);
    acc += flip(SignSite::ZStarAlphaEps, flip_site) * z.zstar(alpha, eps) * prod_kl;
    acc -= 0.5
        * flip(SignSite::SgnGammaBeta, flip_site)
        * sgn(gamma, beta)
        * ii(0, gamma, beta)
        * ii(k + l, alpha, eps);
    acc += flip(SignSite::ZStarBetaGamma, flip_site) * z.zstar(beta, gamma) * prod_kl;

    let s_beta = m.balls[beta].norm_sqr();
    let s_alpha = m.balls[alpha].norm_sqr();
    if beta == gamma {
        let b = scalars::b_fn(m.balls[beta].t())?;
        acc += i_ / m.balls[beta].x * ii(k + l, alpha, eps);
        acc += i_ * 0.5 * b * (s_beta * ii(k + l, alpha, eps) - prod_kl);
    }
    if alpha == eps {
        let b = scalars::b_fn(m.balls[alpha].t())?;
        acc -= i_ / m.balls[alpha].x * ii(k + l, gamma, beta);
        acc -= i_ * 0.5 * b * (s_alpha * ii(k + l, gamma, beta) - prod_kl);
    }
    Ok(acc)
}

/// |{tr Aᵏ, f}_z| through the engine; class functions of A are central in the
/// invariant algebra.
pub fn casimir_check(
    k: u32,
    f: &crate::bivector::Observable,
    m: &MPoint,
    z: &PencilParams,
) -> f64 {
    use crate::bivector::{bracket, BivectorKind, MatWord, Observable, PointCtx};
    let ctx = PointCtx::new(RawPoint::from_point(m), BivectorKind::Standard(z.clone()));
    let tr = Observable::Trace { word: MatWord::a_pow(k as i32), conj: false };
    bracket(&ctx, &tr, f).norm()
}
