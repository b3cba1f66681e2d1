//! The master phase space: points (A, B, v_1, …, v_d) with ball parameters
//! x_α, the U(n) and U(1)^d actions, the moment maps Φ and Φ̃, and the
//! spectrum-collapsing map Ψ.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlie::{haar_random, hermitian_eig, outer, vnorm_sqr, vscale, CMat, UnitaryMat};
use crate::scalars::c_fn;

pub const BALL_MARGIN: f64 = 1e-3;
const TWO_PI: f64 = std::f64::consts::TAU;

/// Spin vector in the open ball x·|v|² ∈ (−2π, 2π).
#[derive(Clone, Debug, PartialEq)]
pub struct BallVec {
    pub v: Vec<C64>,
    pub x: f64,
}

impl BallVec {
    pub fn new(v: Vec<C64>, x: f64) -> Result<Self> {
        if x == 0.0 {
            return Err(Error::Config("ball parameter x must be nonzero".into()));
        }
        let t = x * vnorm_sqr(&v);
        if t.abs() >= TWO_PI - 1e-9 {
            return Err(Error::BallInvariant(t));
        }
        Ok(BallVec { v, x })
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        vnorm_sqr(&self.v)
    }

    /// x·|v|², the argument fed to the structure functions.
    pub fn t(&self) -> f64 {
        self.x * self.norm_sqr()
    }

    /// Rank-1 exponential exp(i x v v†) = 1 + i x c(x|v|²) v v†, exact.
    pub fn exp_factor(&self) -> UnitaryMat {
        ball_exp(&self.v, self.x)
    }

    /// Margin to the ball boundary: 2π − |x||v|²·… positive inside.
    pub fn boundary_margin(&self) -> f64 {
        TWO_PI - self.t().abs()
    }
}

/// exp(i x v v†) by the rank-1 closed form.
pub fn ball_exp(v: &[C64], x: f64) -> UnitaryMat {
    let s = vnorm_sqr(v);
    let coeff = C64::new(0.0, x) * c_fn(x * s);
    UnitaryMat::new_unchecked(CMat::identity(v.len()) + outer(v, v).scale(coeff))
}

/// A point of the master phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoint {
    pub a: UnitaryMat,
    pub b: UnitaryMat,
    pub balls: Vec<BallVec>,
}

impl MPoint {
    pub fn new(a: UnitaryMat, b: UnitaryMat, balls: Vec<BallVec>) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::Config("need d >= 1 spin vectors".into()));
        }
        let n = a.n();
        if b.n() != n {
            return Err(Error::DimensionMismatch(n, b.n()));
        }
        for ball in &balls {
            if ball.n() != n {
                return Err(Error::DimensionMismatch(n, ball.n()));
            }
        }
        Ok(MPoint { a, b, balls })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn d(&self) -> usize {
        self.balls.len()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.balls.iter().map(|b| b.x).collect()
    }

    /// Product of the rank-1 exponentials E_1 ⋯ E_d.
    pub fn ball_product(&self) -> UnitaryMat {
        let mut p = CMat::identity(self.n());
        for ball in &self.balls {
            p = p * ball.exp_factor().into_mat();
        }
        UnitaryMat::new_unchecked(p)
    }

    /// Partial moment map Φ_{𝓜_{α-1}} = A B A⁻¹ B⁻¹ E_1 ⋯ E_{α-1}.
    pub fn partial_moment_map(&self, alpha: usize) -> UnitaryMat {
        let com = self.a.mat() * self.b.mat() * self.a.mat().dagger() * self.b.mat().dagger();
        let mut p = com;
        for ball in &self.balls[..alpha] {
            p = p * ball.exp_factor().into_mat();
        }
        UnitaryMat::new_unchecked(p)
    }
}

/// Φ(A, B, v_α) = A B A⁻¹ B⁻¹ exp(i x_1 v_1 v_1†) ⋯ exp(i x_d v_d v_d†).
pub fn moment_map(m: &MPoint) -> UnitaryMat {
    m.partial_moment_map(m.d())
}

/// Ψ(A, B, v) = (A, B A B⁻¹, v); the second component keeps the spectrum of A.
pub fn psi_map(m: &MPoint) -> MPoint {
    let btilde = m.b.mat() * m.a.mat() * m.b.mat().dagger();
    MPoint {
        a: m.a.clone(),
        b: UnitaryMat::new_unchecked(btilde),
        balls: m.balls.clone(),
    }
}

/// Φ̃(A, B̃, v) = A B̃⁻¹ exp(i x_1 v_1 v_1†) ⋯ exp(i x_d v_d v_d†), the moment
/// map of the degenerate target structure; Φ̃ ∘ Ψ = Φ.
pub fn tilde_moment_map(m: &MPoint) -> UnitaryMat {
    let mut p = m.a.mat() * m.b.mat().dagger();
    for ball in &m.balls {
        p = p * ball.exp_factor().into_mat();
    }
    UnitaryMat::new_unchecked(p)
}

/// Diagonal U(n) action g·(A, B, v_α) = (gAg⁻¹, gBg⁻¹, gv_α).
pub fn act(g: &UnitaryMat, m: &MPoint) -> MPoint {
    let conj = |u: &UnitaryMat| UnitaryMat::new_unchecked(g.mat() * u.mat() * g.mat().dagger());
    MPoint {
        a: conj(&m.a),
        b: conj(&m.b),
        balls: m
            .balls
            .iter()
            .map(|bv| BallVec { v: g.mat().mulv(&bv.v), x: bv.x })
            .collect(),
    }
}

/// U(1) action on the β-th ball: v_β ← λ⁻¹ v_β, everything else fixed.
pub fn u1_act(beta: usize, lambda: C64, m: &MPoint) -> Result<MPoint> {
    if beta >= m.d() {
        return Err(Error::Config(format!("ball index {beta} out of range")));
    }
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Config("lambda must be unimodular".into()));
    }
    let mut out = m.clone();
    out.balls[beta].v = vscale(&m.balls[beta].v, lambda.conj());
    Ok(out)
}

/// Sign isomorphism (A, B, v_α) ↦ (A, B, v_α·√|x_α|) with parameters sgn(x_α).
pub fn rescale_iso(m: &MPoint) -> MPoint {
    MPoint {
        a: m.a.clone(),
        b: m.b.clone(),
        balls: m
            .balls
            .iter()
            .map(|bv| BallVec {
                v: vscale(&bv.v, C64::new(bv.x.abs().sqrt(), 0.0)),
                x: bv.x.signum(),
            })
            .collect(),
    }
}

/// Random point: Haar A, B; each v_α uniform in the ball of squared radius
/// (2π/|x_α|)(1 − margin).
pub fn random_point(
    n: usize,
    d: usize,
    xs: &[f64],
    rng: &mut impl Rng,
    margin: f64,
) -> Result<MPoint> {
    if xs.len() != d {
        return Err(Error::DimensionMismatch(xs.len(), d));
    }
    let a = haar_random(n, rng);
    let b = haar_random(n, rng);
    let balls = xs
        .iter()
        .map(|&x| {
            if x == 0.0 {
                return Err(Error::Config("ball parameter x must be nonzero".into()));
            }
            let rad_sqr = (TWO_PI / x.abs()) * (1.0 - margin);
            // Uniform in the 2n-ball: direction from a Haar column, radius
            // by the r^{2n} law.
            let u = haar_random(n, rng);
            let dir: Vec<C64> = (0..n).map(|i| u.mat()[(i, 0)]).collect();
            let r = rad_sqr.sqrt() * rng.gen::<f64>().powf(1.0 / (2.0 * n as f64));
            BallVec::new(vscale(&dir, C64::new(r, 0.0)), x)
        })
        .collect::<Result<Vec<_>>>()?;
    MPoint::new(a, b, balls)
}

/// Smallest singular value of the stacked infinitesimal action
/// ξ ↦ ([ξ,A], [ξ,B], ξv_1, …, ξv_d) on u(n); positive value certifies a
/// trivial stabilizer Lie algebra. `include_b` = false gives the 𝓜_{d**}
/// variant that drops the B block.
pub fn freeness_margin(m: &MPoint, include_b: bool) -> f64 {
    let n = m.n();
    let basis = crate::matlie::OrthBasis::new(n);
    let rows = 2 * (2 * n * n + n * m.d());
    let mut g = vec![vec![0.0f64; basis.len()]; rows];
    for (a_idx, e) in basis.iter().enumerate() {
        let mut row = 0;
        let push_mat = |mat: &CMat, g: &mut Vec<Vec<f64>>, row: &mut usize| {
            for i in 0..n {
                for j in 0..n {
                    g[*row][a_idx] = mat[(i, j)].re;
                    g[*row + 1][a_idx] = mat[(i, j)].im;
                    *row += 2;
                }
            }
        };
        let ca = CMat::comm(e, m.a.mat());
        push_mat(&ca, &mut g, &mut row);
        let cb = if include_b {
            CMat::comm(e, m.b.mat())
        } else {
            CMat::zeros(n)
        };
        push_mat(&cb, &mut g, &mut row);
        for ball in &m.balls {
            let ev = e.mulv(&ball.v);
            for z in ev {
                g[row][a_idx] = z.re;
                g[row + 1][a_idx] = z.im;
                row += 2;
            }
        }
    }
    // Smallest eigenvalue of GᵀG (basis.len() x basis.len()).
    let k = basis.len();
    let gram = CMat::from_fn(k, |p, q| {
        C64::new(g.iter().map(|r| r[p] * r[q]).sum::<f64>(), 0.0)
    });
    let (vals, _) = hermitian_eig(&gram);
    vals.into_iter()
        .fold(f64::MAX, f64::min)
        .max(0.0)
        .sqrt()
}

// --- point file schema -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PointFile {
    n: usize,
    d: usize,
    x: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "B")]
    b: Vec<Vec<[f64; 2]>>,
    v: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

fn mat_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.n())
        .map(|i| (0..m.n()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn rows_to_mat(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    for r in rows {
        if r.len() != n {
            return Err(Error::Config("matrix rows must be square".into()));
        }
    }
    Ok(CMat::from_fn(n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// Serialize a point (optionally tagged with the leaf angle γ and the
/// construction residual) to the JSON schema used by the CLI.
pub fn point_to_json(m: &MPoint, gamma: Option<f64>, residual: Option<f64>) -> String {
    let pf = PointFile {
        n: m.n(),
        d: m.d(),
        x: m.xs(),
        a: mat_to_rows(m.a.mat()),
        b: mat_to_rows(m.b.mat()),
        v: m
            .balls
            .iter()
            .map(|bv| bv.v.iter().map(|z| [z.re, z.im]).collect())
            .collect(),
        gamma,
        residual,
    };
    serde_json::to_string_pretty(&pf).expect("point serialization cannot fail")
}

/// Parse the JSON point schema; returns the point and the optional γ tag.
pub fn point_from_json(text: &str) -> Result<(MPoint, Option<f64>)> {
    let pf: PointFile = serde_json::from_str(text)?;
    if pf.x.len() != pf.d || pf.v.len() != pf.d {
        return Err(Error::Config("d does not match x/v lengths".into()));
    }
    let a = UnitaryMat::new(rows_to_mat(&pf.a)?)?;
    let b = UnitaryMat::new(rows_to_mat(&pf.b)?)?;
    if a.n() != pf.n {
        return Err(Error::Config("n does not match matrix size".into()));
    }
    let balls = pf
        .v
        .iter()
        .zip(&pf.x)
        .map(|(vv, &x)| {
            BallVec::new(vv.iter().map(|p| C64::new(p[0], p[1])).collect(), x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((MPoint::new(a, b, balls)?, pf.gamma))
}
