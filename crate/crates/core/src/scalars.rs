//! Scalar structure functions of the exponentiated ball and their defining
//! relations: b(t) = cot(t/2) − 2/t, a(t) = t·cot(t/2), c(t) = (e^{it} − 1)/(it)
//! and φ(s) = 1/s − ½coth(s/2), with b(t) = 2i·φ(−it).
//!
//! Near the removable singularity at t = 0 the closed forms cancel
//! catastrophically (absolute error of order eps/t), so each family switches
//! to a Taylor branch wide enough that both branches agree to 1e-14 at the
//! crossover: |t| < 0.1 for the cotangent family, |t| < 0.5 for the entire
//! functions c, c′.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Switchover radius for b, b′, a, a′ and φ.
pub const SERIES_RADIUS: f64 = 0.1;
/// Switchover radius for the entire functions c, c′.
pub const SERIES_RADIUS_C: f64 = 0.5;
const TWO_PI: f64 = std::f64::consts::TAU;

/// b(t) = cot(t/2) − 2/t on the principal branch |t| < 2π.
pub fn b_fn(t: f64) -> Result<f64> {
    if t.abs() >= TWO_PI {
        return Err(Error::OutOfBranch(t));
    }
    Ok(b_unchecked(t))
}

pub(crate) fn b_unchecked(t: f64) -> f64 {
    if t.abs() < SERIES_RADIUS {
        let t2 = t * t;
        -t * (1.0 / 6.0
            + t2 * (1.0 / 360.0
                + t2 * (1.0 / 15_120.0 + t2 * (1.0 / 604_800.0 + t2 / 23_950_080.0))))
    } else {
        let half = 0.5 * t;
        half.cos() / half.sin() - 2.0 / t
    }
}

/// b′(t), analytic.
pub fn b_prime(t: f64) -> Result<f64> {
    if t.abs() >= TWO_PI {
        return Err(Error::OutOfBranch(t));
    }
    Ok(b_prime_unchecked(t))
}

pub(crate) fn b_prime_unchecked(t: f64) -> f64 {
    if t.abs() < SERIES_RADIUS {
        let t2 = t * t;
        -(1.0 / 6.0
            + t2 * (1.0 / 120.0
                + t2 * (1.0 / 3_024.0 + t2 * (1.0 / 86_400.0 + t2 / 2_661_120.0))))
    } else {
        let cot = cot_half(t);
        -0.5 * (1.0 + cot * cot) + 2.0 / (t * t)
    }
}

/// a(t) = t·cot(t/2); satisfies a(t) − t·b(t) = 2 identically.
pub fn a_fn(t: f64) -> Result<f64> {
    if t.abs() >= TWO_PI {
        return Err(Error::OutOfBranch(t));
    }
    if t.abs() < SERIES_RADIUS {
        let t2 = t * t;
        Ok(2.0
            - t2 * (1.0 / 6.0
                + t2 * (1.0 / 360.0 + t2 * (1.0 / 15_120.0 + t2 / 604_800.0))))
    } else {
        Ok(t * cot_half(t))
    }
}

/// a′(t) = cot(t/2) − (t/2)(1 + cot²(t/2)), analytic.
pub fn a_prime(t: f64) -> Result<f64> {
    if t.abs() >= TWO_PI {
        return Err(Error::OutOfBranch(t));
    }
    if t.abs() < SERIES_RADIUS {
        let t2 = t * t;
        Ok(-t * (1.0 / 3.0 + t2 * (1.0 / 90.0 + t2 * (1.0 / 2_520.0 + t2 / 75_600.0))))
    } else {
        let cot = cot_half(t);
        Ok(cot - 0.5 * t * (1.0 + cot * cot))
    }
}

fn cot_half(t: f64) -> f64 {
    let half = 0.5 * t;
    half.cos() / half.sin()
}

/// c(t) = (e^{it} − 1)/(it), entire.
pub fn c_fn(t: f64) -> C64 {
    if t.abs() < SERIES_RADIUS_C {
        let it = C64::new(0.0, t);
        // Σ_{k≥0} (it)^k/(k+1)!
        let mut acc = C64::new(1.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for k in 1..=16u32 {
            term = term * it / (k as f64 + 1.0);
            acc += term;
        }
        acc
    } else {
        (C64::new(0.0, t).exp() - 1.0) / C64::new(0.0, t)
    }
}

/// c′(t), analytic.
pub fn c_prime(t: f64) -> C64 {
    if t.abs() < SERIES_RADIUS_C {
        let it = C64::new(0.0, t);
        // i · Σ_{m≥0} (m+1)(it)^m/(m+2)!
        let mut acc = C64::new(0.0, 0.0);
        let mut itpow = C64::new(1.0, 0.0);
        let mut fact = 2.0; // (m+2)! at m = 0
        for m in 0..=16u32 {
            acc += itpow * ((m as f64 + 1.0) / fact);
            itpow *= it;
            fact *= m as f64 + 3.0;
        }
        acc * C64::new(0.0, 1.0)
    } else {
        let eit = C64::new(0.0, t).exp();
        let i = C64::new(0.0, 1.0);
        -i * (C64::new(0.0, t) * eit - eit + 1.0) / (t * t)
    }
}

/// φ(s) = 1/s − ½coth(s/2), holomorphic away from 2πiZ∖{0}.
pub fn varphi_fn(s: C64) -> Result<C64> {
    // Pole guard: distance to the nearest nonzero multiple of 2πi.
    if s.norm() >= 1.0 {
        let k = (s.im / TWO_PI).round();
        if k != 0.0 {
            let pole = C64::new(0.0, k * TWO_PI);
            if (s - pole).norm() < 1e-8 {
                return Err(Error::PoleProximity(format!("s = {s} near 2πi·{k}")));
            }
        }
    }
    if s.norm() < SERIES_RADIUS {
        let s2 = s * s;
        return Ok(-s / 12.0 + s * s2 / 720.0 - s * s2 * s2 / 30_240.0
            + s * s2 * s2 * s2 / 1_209_600.0);
    }
    let half = s * 0.5;
    let coth = half.cosh() / half.sinh();
    Ok(1.0 / s - coth * 0.5)
}

/// Residual of the quasi-Poisson ansatz constraint:
/// a(t)b(t) + a′(t)[a(t) − t·b(t)] + t, identically zero for the cotangent
/// pair implemented here.
pub fn ansatz_residual(t: f64) -> Result<f64> {
    let a = a_fn(t)?;
    let b = b_unchecked(t);
    let ap = a_prime(t)?;
    Ok(a * b + ap * (a - t * b) + t)
}

/// Same residual for a general (a, b, a′) triple; used for the polynomial
/// families that solve the constraint without admitting a moment map.
pub fn ansatz_residual_general(t: f64, a: f64, b: f64, a_prime: f64) -> f64 {
    a * b + a_prime * (a - t * b) + t
}

/// Residuals of the two moment-map relations
/// c·a − 2 − i·t·c  and  c′·(a − t·b) − c·b − i·c.
pub fn momentmap_relations_residual(t: f64) -> Result<(f64, f64)> {
    let a = a_fn(t)?;
    let b = b_unchecked(t);
    let c = c_fn(t);
    let cp = c_prime(t);
    let i = C64::new(0.0, 1.0);
    let r1 = c * a - 2.0 - i * t * c;
    let r2 = cp * (a - t * b) - c * b - i * c;
    Ok((r1.norm(), r2.norm()))
}
