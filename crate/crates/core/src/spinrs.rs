//! Leaf Φ⁻¹(e^{iγ}1) construction and the spin Ruijsenaars-Schneider system:
//! commutator solving on U(n)×U(n) by Riemannian descent with a
//! Levenberg-Marquardt polish, the spin data (w_α, F) with the Lax-type
//! reconstruction of A, the three equations of motion, and their integrator.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::SlicePoint;
use crate::error::{Error, Result};
use crate::matlie::{
    haar_random, mat_exp, unitary_eig, vnorm_sqr, AntiHermMat, CMat, DiagUnitary,
    OrthBasis, UnitaryMat, DELTA_REG,
};
use crate::phasespace::{moment_map, BallVec, MPoint};
use crate::scalars::c_fn;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Leaf data: γ ∈ (0, 2π) with kγ ∉ 2πZ for k ≤ n, plus the space parameters.
#[derive(Clone, Debug)]
pub struct LeafSpec {
    pub n: usize,
    pub d: usize,
    pub x: Vec<f64>,
    pub gamma: f64,
}

impl LeafSpec {
    pub fn new(n: usize, d: usize, x: Vec<f64>, gamma: f64) -> Result<Self> {
        if x.len() != d || x.contains(&0.0) {
            return Err(Error::Config("need d nonzero ball parameters".into()));
        }
        if !(0.0..TWO_PI).contains(&gamma) || gamma == 0.0 {
            return Err(Error::Config("gamma must lie in (0, 2π)".into()));
        }
        for k in 1..=n {
            let t = (k as f64 * gamma).rem_euclid(TWO_PI);
            if t.min(TWO_PI - t) < 1e-9 {
                return Err(Error::Config(format!(
                    "e^(i{k}γ) too close to 1: kγ must avoid 2πZ for k ≤ n"
                )));
            }
        }
        Ok(LeafSpec { n, d, x, gamma })
    }
}

// --- commutator solver -------------------------------------------------------

fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b * a.dagger() * b.dagger()
}

fn objective(a: &CMat, b: &CMat, target: &CMat) -> f64 {
    (commutator(a, b) - target).norm_fro()
}

/// Riemannian gradient of ‖ABA⁻¹B⁻¹ − U‖² in the left-trivialized u(n)×u(n)
/// coordinates (dA = Aη, dB = Bμ).
fn riemannian_grad(a: &CMat, b: &CMat, target: &CMat) -> (CMat, CMat) {
    let c = commutator(a, b);
    let gdag = (c.clone() - target.clone()).dagger();
    let adag = a.dagger();
    let bdag = b.dagger();
    let m_a = b * &adag * &bdag * &gdag * a - &adag * &bdag * &gdag * a * b;
    let m_b = &adag * &bdag * &gdag * a * b - &bdag * &gdag * a * b * &adag;
    (m_a.skew().scale(C64::new(-2.0, 0.0)), m_b.skew().scale(C64::new(-2.0, 0.0)))
}

fn retract(u: &CMat, eta: &CMat, tau: f64) -> CMat {
    let step = mat_exp(&AntiHermMat::new_unchecked(eta.scale(C64::new(tau, 0.0))));
    u * step.mat()
}

/// Levenberg-Marquardt polish of the commutator equation; quadratic near the
/// solution, so it pushes optimizer output to machine precision.
fn lm_polish(a: &mut CMat, b: &mut CMat, target: &CMat, basis: &OrthBasis, iters: usize) {
    let n = a.n();
    let k = basis.len();
    let dim = 2 * k;
    let mut lambda = 1e-8;
    for _ in 0..iters {
        let c = commutator(a, b);
        let res = &c - target;
        let fval = res.norm_fro();
        if fval < 1e-14 {
            break;
        }
        // Complex residual vector and Jacobian columns by directional
        // derivatives along the basis.
        let adag = a.dagger();
        let bdag = b.dagger();
        let cols: Vec<CMat> = (0..dim)
            .map(|col| {
                let e = basis.elem(col % k);
                if col < k {
                    dc_da(a, b, &adag, &bdag, e)
                } else {
                    dc_db(a, b, &adag, &bdag, e)
                }
            })
            .collect();
        // Normal equations over the real inner product Re tr(X Y†).
        let gram = CMat::from_fn(dim, |p, q| {
            C64::new(crate::matlie::inner_raw(&cols[p], &cols[q]), 0.0)
        });
        let rhs: Vec<C64> = (0..dim)
            .map(|p| C64::new(-crate::matlie::inner_raw(&cols[p], &res), 0.0))
            .collect();
        let mut step = None;
        for _ in 0..8 {
            let damped = CMat::from_fn(dim, |p, q| {
                gram[(p, q)] + if p == q { C64::new(lambda, 0.0) } else { C64::new(0.0, 0.0) }
            });
            if let Ok(delta) = damped.solve(&rhs) {
                let mut eta = CMat::zeros(n);
                let mut mu = CMat::zeros(n);
                for (idx, dz) in delta.iter().enumerate() {
                    let coef = C64::new(dz.re, 0.0);
                    if idx < k {
                        eta = eta + basis.elem(idx).scale(coef);
                    } else {
                        mu = mu + basis.elem(idx - k).scale(coef);
                    }
                }
                let na = retract(a, &eta, 1.0);
                let nb = retract(b, &mu, 1.0);
                if objective(&na, &nb, target) < fval {
                    step = Some((na, nb));
                    lambda = (lambda * 0.25).max(1e-14);
                    break;
                }
            }
            lambda *= 10.0;
        }
        match step {
            Some((na, nb)) => {
                *a = na;
                *b = nb;
            }
            None => break,
        }
    }
}

fn dc_da(a: &CMat, b: &CMat, adag: &CMat, bdag: &CMat, e: &CMat) -> CMat {
    // dC with dA = A e: A e B A⁻¹ B⁻¹ − A B A⁻¹ (A e)ᴴ-route: d(A⁻¹) = −e A⁻¹.
    let da = a * e;
    &da * b * adag * bdag - a * b * e * adag * bdag
}

fn dc_db(a: &CMat, b: &CMat, adag: &CMat, bdag: &CMat, e: &CMat) -> CMat {
    let db = b * e;
    a * &db * adag * bdag - a * b * adag * e * bdag
}

/// Outcome of the commutator solve.
#[derive(Clone, Debug)]
pub struct CommutatorSolution {
    pub a: UnitaryMat,
    pub b: UnitaryMat,
    pub residual: f64,
    pub restarts_used: usize,
}

/// Write a special-unitary target as a group commutator A B A⁻¹ B⁻¹ by
/// Riemannian gradient descent with Armijo line search, random restarts and a
/// final Levenberg-Marquardt polish.
pub fn solve_commutator(
    target: &UnitaryMat,
    seed: u64,
    tol: f64,
    max_restarts: usize,
) -> Result<CommutatorSolution> {
    let n = target.n();
    let det_phase: f64 = unitary_eig(target).q.phases().iter().sum();
    if (C64::from_polar(1.0, det_phase) - C64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::Config("commutator targets must lie in SU(n)".into()));
    }
    let basis = OrthBasis::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(CMat, CMat, f64)> = None;
    for restart in 0..max_restarts.max(1) {
        let (mut a, mut b) = if restart == 0 {
            (CMat::identity(n), CMat::identity(n))
        } else {
            (
                haar_random(n, &mut rng).into_mat(),
                haar_random(n, &mut rng).into_mat(),
            )
        };
        // Gradient phase.
        let mut tau = 0.5;
        for _ in 0..400 {
            let f0 = objective(&a, &b, target.mat());
            if f0 * f0 < 1e-8 {
                break;
            }
            let (ga, gb) = riemannian_grad(&a, &b, target.mat());
            let gnorm2 = ga.norm_fro().powi(2) + gb.norm_fro().powi(2);
            if gnorm2 < 1e-18 {
                break;
            }
            let mut accepted = false;
            let mut step = tau;
            for _ in 0..30 {
                let na = retract(&a, &ga.scale(C64::new(-1.0, 0.0)), step);
                let nb = retract(&b, &gb.scale(C64::new(-1.0, 0.0)), step);
                let f1 = objective(&na, &nb, target.mat());
                if f1 * f1 <= f0 * f0 - 1e-4 * step * gnorm2 {
                    a = na;
                    b = nb;
                    tau = (step * 1.5).min(1.0);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        lm_polish(&mut a, &mut b, target.mat(), &basis, 80);
        let f = objective(&a, &b, target.mat());
        if best.as_ref().is_none_or(|(_, _, bf)| f < *bf) {
            best = Some((a, b, f));
        }
        if best.as_ref().unwrap().2 <= tol {
            let (a, b, residual) = best.unwrap();
            return Ok(CommutatorSolution {
                a: UnitaryMat::new_unchecked(a),
                b: UnitaryMat::new_unchecked(b),
                residual,
                restarts_used: restart + 1,
            });
        }
    }
    let (_, _, residual) = best.unwrap();
    Err(Error::NotConverged(residual))
}

// --- leaf construction -------------------------------------------------------

fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    let u = haar_random(n, rng);
    (0..n).map(|i| u.mat()[(i, 0)]).collect()
}

/// Construct a point on Φ⁻¹(e^{iγ}1): sample v_2..v_d, rescale v_1 radially
/// so the determinant constraint Σ x_α|v_α|² ≡ nγ (mod 2π) holds, then solve
/// the commutator equation for the SU(n) remainder.
pub fn build_leaf_point(spec: &LeafSpec, seed: u64) -> Result<MPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 1e-2;
    let n = spec.n;
    let target_res = 5e-13;
    for _attempt in 0..64 {
        let mut balls: Vec<BallVec> = Vec::with_capacity(spec.d);
        if spec.d == 1 {
            // Radius forced by the determinant constraint.
            let gamma_total = (n as f64 * spec.gamma).rem_euclid(TWO_PI);
            let x = spec.x[0];
            let r2 = if x > 0.0 { gamma_total / x } else { (TWO_PI - gamma_total) / x.abs() };
            let dir = random_unit(n, &mut rng);
            balls.push(BallVec::new(
                crate::matlie::vscale(&dir, C64::new(r2.sqrt(), 0.0)),
                x,
            )?);
        } else {
            // Sample the tail spins, then fit the head radius.
            let mut tail_sum = 0.0;
            let mut tail = Vec::new();
            for alpha in 1..spec.d {
                let x = spec.x[alpha];
                let rad2 = (TWO_PI / x.abs()) * (1.0 - margin) * rng.gen::<f64>();
                let dir = random_unit(n, &mut rng);
                let bv = BallVec::new(
                    crate::matlie::vscale(&dir, C64::new(rad2.sqrt(), 0.0)),
                    x,
                )?;
                tail_sum += bv.t();
                tail.push(bv);
            }
            let base = (n as f64 * spec.gamma - tail_sum).rem_euclid(TWO_PI);
            let x1 = spec.x[0];
            let lim = TWO_PI * (1.0 - margin);
            let t1 = if x1 > 0.0 {
                if base <= lim && base >= 0.0 { Some(base) } else { None }
            } else {
                let cand = base - TWO_PI;
                if cand.abs() <= lim { Some(cand) } else { None }
            };
            let Some(t1) = t1 else {
                continue; // infeasible head radius: resample the tail
            };
            let dir = random_unit(n, &mut rng);
            balls.push(BallVec::new(
                crate::matlie::vscale(&dir, C64::new((t1 / x1).max(0.0).sqrt(), 0.0)),
                x1,
            )?);
            balls.extend(tail);
        }
        // Target for the group commutator: e^{iγ}(E_1 ⋯ E_d)⁻¹ ∈ SU(n).
        let mut prod = CMat::identity(n);
        for bv in &balls {
            prod = prod * bv.exp_factor().into_mat();
        }
        let target =
            UnitaryMat::new_unchecked(prod.dagger().scale(C64::from_polar(1.0, spec.gamma)));
        let sol = match solve_commutator(&target, rng.gen(), target_res, 10) {
            Ok(s) => s,
            Err(Error::NotConverged(_)) => continue,
            Err(e) => return Err(e),
        };
        let m = MPoint::new(sol.a, sol.b, balls)?;
        let residual = leaf_residual(&m, spec.gamma);
        if residual <= 1e-9 {
            return Ok(m);
        }
    }
    Err(Error::NotConverged(f64::NAN))
}

/// ‖Φ(m) − e^{iγ}1‖_F.
pub fn leaf_residual(m: &MPoint, gamma: f64) -> f64 {
    let phi = moment_map(m);
    (phi.mat() - &CMat::identity(m.n()).scale(C64::from_polar(1.0, gamma))).norm_fro()
}

/// The explicit non-compactness family of spin vectors on Φ⁻¹(μ), d ≥ 2:
/// v_1(ε), v_2(ε) supported on the first coordinate with
/// exp(i x_1 v_1 v_1†) exp(i x_2 v_2 v_2†) = 1.
pub fn noncompact_family(
    eps: f64,
    mu: &UnitaryMat,
    xs: &[f64],
    seed: u64,
) -> Result<MPoint> {
    if !(0.0..std::f64::consts::PI).contains(&eps) {
        return Err(Error::Config("need 0 ≤ ε < π".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Config("the family needs d ≥ 2".into()));
    }
    let n = mu.n();
    let (x1, x2) = (xs[0], xs[1]);
    let s = (x1 * x2).signum();
    let mut v1 = vec![C64::new(0.0, 0.0); n];
    v1[0] = C64::new(((std::f64::consts::PI - s * eps) / x1.abs()).sqrt(), 0.0);
    let mut v2 = vec![C64::new(0.0, 0.0); n];
    v2[0] = C64::new(((std::f64::consts::PI + eps) / x2.abs()).sqrt(), 0.0);
    let sol = solve_commutator(mu, seed, 1e-11, 12)?;
    let mut balls = vec![BallVec::new(v1, x1)?, BallVec::new(v2, x2)?];
    for &x in &xs[2..] {
        balls.push(BallVec::new(vec![C64::new(0.0, 0.0); n], x)?);
    }
    MPoint::new(sol.a, sol.b, balls)
}

// --- spin data ---------------------------------------------------------------

/// Collective spin data on a leaf slice point.
#[derive(Clone, Debug)]
pub struct SpinData {
    /// Dual spin vectors w_α.
    pub w: Vec<Vec<C64>>,
    /// F = Σ_α v_α w_α† = (E_1 ⋯ E_d − 1) A.
    pub f: CMat,
}

/// Compute w_α† = i x_α c(x_α|v_α|²) v_α† E_{α+1} ⋯ E_d A, the collective
/// spin matrix F, and verify the reconstruction
/// A_kl = (e^{iγ} Q_k Q_l⁻¹ − 1)⁻¹ F_kl.
pub fn spin_data(s: &SlicePoint, gamma: f64) -> Result<SpinData> {
    let n = s.n();
    let d = s.d();
    // Suffix products E_{α+1} ⋯ E_d · A.
    let mut suffix = vec![s.a.mat().clone()];
    for bv in s.balls.iter().rev() {
        let last = suffix.last().unwrap();
        suffix.push(bv.exp_factor().mat() * last);
    }
    suffix.reverse(); // suffix[α] = E_{α+1} ⋯ E_d A at index α+1 ... adjust below
    let mut w = Vec::with_capacity(d);
    let mut f = CMat::zeros(n);
    for (alpha, bv) in s.balls.iter().enumerate() {
        let coef = C64::new(0.0, bv.x) * c_fn(bv.t());
        // Row w_α† = coef · v_α† · suffix, with suffix = E_{α+1} ⋯ E_d A.
        let suf = &suffix[alpha + 1];
        let row: Vec<C64> = (0..n)
            .map(|j| {
                coef * (0..n).map(|q| bv.v[q].conj() * suf[(q, j)]).sum::<C64>()
            })
            .collect();
        for jj in 0..n {
            for kk in 0..n {
                f[(jj, kk)] += bv.v[jj] * row[kk];
            }
        }
        w.push(row.iter().map(|z| z.conj()).collect());
    }
    // Telescoping identity F = (E_1 ⋯ E_d − 1) A.
    let telescoped = &suffix[0] - s.a.mat();
    if (f.clone() - telescoped).norm_fro() > 1e-8 {
        return Err(Error::ReconstructionFailed(
            (f.clone() - (&suffix[0] - s.a.mat())).norm_fro(),
            1e-8,
        ));
    }
    // Lax-type reconstruction of A from (Q, F).
    let rec = reconstruct_a(s.q.phases(), &f, gamma)?;
    let res = (rec - s.a.mat()).norm_fro();
    if res > 1e-7 {
        return Err(Error::ReconstructionFailed(res, 1e-7));
    }
    Ok(SpinData { w, f })
}

/// A_kl = (e^{iγ} Q_k Q_l⁻¹ − 1)⁻¹ F_kl with a pole guard on the kernel.
pub fn reconstruct_a(qphases: &[f64], f: &CMat, gamma: f64) -> Result<CMat> {
    let n = qphases.len();
    let mut out = CMat::zeros(n);
    for k in 0..n {
        for l in 0..n {
            let ker = C64::from_polar(1.0, gamma + qphases[k] - qphases[l]) - 1.0;
            if ker.norm() < 1e-8 {
                return Err(Error::PoleProximity(format!(
                    "e^(iγ) Q_{k} Q_{l}⁻¹ = 1 within 1e-8"
                )));
            }
            out[(k, l)] = f[(k, l)] / ker;
        }
    }
    Ok(out)
}

// --- equations of motion ------------------------------------------------------

/// Slice-tangent data for the spin-RS equations: complexified q̇ is allowed
/// because the Krichever-Zabrodin combination is a formal complex flow.
#[derive(Clone, Debug)]
pub struct RsTangent {
    pub qdot: Vec<C64>,
    pub vdot: Vec<Vec<C64>>,
    pub wdot: Vec<Vec<C64>>,
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

fn ccot(z: C64) -> C64 {
    z.cos() / z.sin()
}

/// Potential V(q) = cot(q) − cot(q + γ/2).
pub fn potential(q: C64, gamma: f64) -> C64 {
    ccot(q) - ccot(q + gamma / 2.0)
}

fn check_regular(q: &DiagUnitary) -> Result<()> {
    let gap = q.min_gap();
    if q.n() > 1 && gap < DELTA_REG {
        return Err(Error::NearDegenerate(gap, DELTA_REG));
    }
    Ok(())
}

fn check_potential_poles(qphases: &[f64], gamma: f64) -> Result<()> {
    for j in 0..qphases.len() {
        for k in 0..qphases.len() {
            if j == k {
                continue;
            }
            let t = (qphases[j] - qphases[k] + gamma).rem_euclid(TWO_PI);
            if t.min(TWO_PI - t) < 1e-8 {
                return Err(Error::PotentialPole(1e-8));
            }
        }
    }
    Ok(())
}

/// Evolution under Y_{H^Re} with ζ = −½(∇h)_t, in (q̇, v̇, ẇ) form:
/// q̇_j = Im[(e^{iγ}−1)⁻¹ F_jj],
/// v̇_j = ¼ Σ_{k≠j} [1 − i·cot((q_j−q_k)/2)](A_jk − Ā_kj) v_k, same for w.
pub fn eom_re(s: &SlicePoint, gamma: f64, spin: &SpinData) -> Result<RsTangent> {
    check_regular(&s.q)?;
    let kernel = |ajk: C64, akj: C64, half: f64| -> C64 {
        C64::new(0.25, 0.0) * (C64::new(1.0, -cot(half))) * (ajk - akj.conj())
    };
    eom_real_family(s, gamma, spin, kernel, |fjj, pref| (pref * fjj).im.into())
}

/// Evolution under Y_{H^Im} with ζ = −½(∇h)_t.
pub fn eom_im(s: &SlicePoint, gamma: f64, spin: &SpinData) -> Result<RsTangent> {
    check_regular(&s.q)?;
    let kernel = |ajk: C64, akj: C64, half: f64| -> C64 {
        C64::new(0.0, -0.25) * (C64::new(1.0, -cot(half))) * (ajk + akj.conj())
    };
    eom_real_family(s, gamma, spin, kernel, |fjj, pref| C64::from(-(pref * fjj).re))
}

fn eom_real_family(
    s: &SlicePoint,
    gamma: f64,
    spin: &SpinData,
    kernel: impl Fn(C64, C64, f64) -> C64,
    qrule: impl Fn(C64, C64) -> C64,
) -> Result<RsTangent> {
    let n = s.n();
    let a = s.a.mat();
    let q = s.q.phases();
    let pref = (C64::from_polar(1.0, gamma) - 1.0).inv();
    let qdot: Vec<C64> = (0..n).map(|j| qrule(spin.f[(j, j)], pref)).collect();
    let apply = |vecs: &[Vec<C64>]| -> Vec<Vec<C64>> {
        vecs.iter()
            .map(|v| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .filter(|&k| k != j)
                            .map(|k| kernel(a[(j, k)], a[(k, j)], 0.5 * (q[j] - q[k])) * v[k])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    };
    let vdot = apply(&s.balls.iter().map(|b| b.v.clone()).collect::<Vec<_>>());
    let wdot = apply(&spin.w);
    Ok(RsTangent { qdot, vdot, wdot })
}

/// The Krichever-Zabrodin combination 2(e^{iγ}−1)(Y_Re + i·Y_Im):
/// ½q̇_j = −i F_jj, v̇_j = −i Σ (v)_k F_jk V((q_j−q_k)/2),
/// ẇ̄_j = +i Σ (w̄)_k F_kj V((q_k−q_j)/2). The `wdot` slot carries ẇ
/// (the conjugate of the printed ẇ̄ equation).
pub fn eom_kz(s: &SlicePoint, gamma: f64, spin: &SpinData) -> Result<RsTangent> {
    check_regular(&s.q)?;
    check_potential_poles(s.q.phases(), gamma)?;
    let n = s.n();
    let q = s.q.phases();
    let i = C64::new(0.0, 1.0);
    let qdot: Vec<C64> = (0..n).map(|j| -2.0 * i * spin.f[(j, j)]).collect();
    let vdot: Vec<Vec<C64>> = s
        .balls
        .iter()
        .map(|bv| {
            (0..n)
                .map(|j| {
                    -i * (0..n)
                        .filter(|&k| k != j)
                        .map(|k| {
                            bv.v[k]
                                * spin.f[(j, k)]
                                * potential(C64::new(0.5 * (q[j] - q[k]), 0.0), gamma)
                        })
                        .sum::<C64>()
                })
                .collect()
        })
        .collect();
    // ẇ̄_j = +i Σ w̄_k F_kj V((q_k−q_j)/2); report ẇ = conj(ẇ̄).
    let wdot: Vec<Vec<C64>> = spin
        .w
        .iter()
        .map(|w| {
            (0..n)
                .map(|j| {
                    let wbar_dot = i * (0..n)
                        .filter(|&k| k != j)
                        .map(|k| {
                            w[k].conj()
                                * spin.f[(k, j)]
                                * potential(C64::new(0.5 * (q[k] - q[j]), 0.0), gamma)
                        })
                        .sum::<C64>();
                    wbar_dot.conj()
                })
                .collect()
        })
        .collect();
    Ok(RsTangent { qdot, vdot, wdot })
}

// --- acceleration check --------------------------------------------------------

/// State of the complexified KZ flow.
#[derive(Clone)]
struct KzState {
    q: Vec<C64>,
    v: Vec<Vec<C64>>,
    wbar: Vec<Vec<C64>>,
}

impl KzState {
    fn f_mat(&self) -> CMat {
        let n = self.q.len();
        CMat::from_fn(n, |j, k| {
            self.v
                .iter()
                .zip(&self.wbar)
                .map(|(v, wb)| v[j] * wb[k])
                .sum()
        })
    }

    fn rhs(&self, gamma: f64) -> KzState {
        let n = self.q.len();
        let i = C64::new(0.0, 1.0);
        let f = self.f_mat();
        let qdot: Vec<C64> = (0..n).map(|j| -2.0 * i * f[(j, j)]).collect();
        let vdot: Vec<Vec<C64>> = self
            .v
            .iter()
            .map(|v| {
                (0..n)
                    .map(|j| {
                        -i * (0..n)
                            .filter(|&k| k != j)
                            .map(|k| {
                                v[k] * f[(j, k)]
                                    * potential((self.q[j] - self.q[k]) * 0.5, gamma)
                            })
                            .sum::<C64>()
                    })
                    .collect()
            })
            .collect();
        let wbdot: Vec<Vec<C64>> = self
            .wbar
            .iter()
            .map(|wb| {
                (0..n)
                    .map(|j| {
                        i * (0..n)
                            .filter(|&k| k != j)
                            .map(|k| {
                                wb[k] * f[(k, j)]
                                    * potential((self.q[k] - self.q[j]) * 0.5, gamma)
                            })
                            .sum::<C64>()
                    })
                    .collect()
            })
            .collect();
        KzState { q: qdot, v: vdot, wbar: wbdot }
    }

    fn axpy(&self, c: C64, other: &KzState) -> KzState {
        let add_v = |a: &Vec<Vec<C64>>, b: &Vec<Vec<C64>>| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + c * q).collect())
                .collect()
        };
        KzState {
            q: self.q.iter().zip(&other.q).map(|(p, q)| p + c * q).collect(),
            v: add_v(&self.v, &other.v),
            wbar: add_v(&self.wbar, &other.wbar),
        }
    }

    fn rk4_step(&self, dt: f64, gamma: f64) -> KzState {
        let k1 = self.rhs(gamma);
        let k2 = self.axpy(C64::new(0.5 * dt, 0.0), &k1).rhs(gamma);
        let k3 = self.axpy(C64::new(0.5 * dt, 0.0), &k2).rhs(gamma);
        let k4 = self.axpy(C64::new(dt, 0.0), &k3).rhs(gamma);
        let mut out = self.axpy(C64::new(dt / 6.0, 0.0), &k1);
        out = out.axpy(C64::new(dt / 3.0, 0.0), &k2);
        out = out.axpy(C64::new(dt / 3.0, 0.0), &k3);
        out.axpy(C64::new(dt / 6.0, 0.0), &k4)
    }
}

fn kz_state(s: &SlicePoint, spin: &SpinData) -> KzState {
    KzState {
        q: s.q.phases().iter().map(|&q| C64::new(q, 0.0)).collect(),
        v: s.balls.iter().map(|b| b.v.clone()).collect(),
        wbar: spin
            .w
            .iter()
            .map(|w| w.iter().map(|z| z.conj()).collect())
            .collect(),
    }
}

/// Compare the closed-form acceleration
/// ½q̈_j = −Σ_{k≠j} F_jk F_kj [V((q_j−q_k)/2) − V((q_k−q_j)/2)]
/// against a central finite difference of q̇ along the KZ flow.
pub fn accel_residual(s: &SlicePoint, gamma: f64, spin: &SpinData) -> Result<f64> {
    check_regular(&s.q)?;
    check_potential_poles(s.q.phases(), gamma)?;
    let n = s.n();
    let q = s.q.phases();
    let f = &spin.f;
    let closed: Vec<C64> = (0..n)
        .map(|j| {
            -2.0 * (0..n)
                .filter(|&k| k != j)
                .map(|k| {
                    let half = C64::new(0.5 * (q[j] - q[k]), 0.0);
                    f[(j, k)] * f[(k, j)] * (potential(half, gamma) - potential(-half, gamma))
                })
                .sum::<C64>()
        })
        .collect();
    // q̈ by finite differences of q̇ = −2i F_jj under two short integrations.
    let state = kz_state(s, spin);
    let dt = 2e-5;
    let sub = 4usize;
    let mut fwd = state.clone();
    let mut bwd = state.clone();
    for _ in 0..sub {
        fwd = fwd.rk4_step(dt / sub as f64, gamma);
        bwd = bwd.rk4_step(-dt / sub as f64, gamma);
    }
    let qdot = |st: &KzState| -> Vec<C64> {
        let f = st.f_mat();
        (0..n).map(|j| C64::new(0.0, -2.0) * f[(j, j)]).collect()
    };
    let qp = qdot(&fwd);
    let qm = qdot(&bwd);
    let mut res = 0.0f64;
    for j in 0..n {
        let fd = (qp[j] - qm[j]) / (2.0 * dt);
        res = res.max((fd - closed[j]).norm());
    }
    Ok(res)
}

// --- trajectory integration -----------------------------------------------------

/// Real spin-RS state: phases q, spins v and w.
#[derive(Clone, Debug)]
pub struct RsState {
    pub q: Vec<f64>,
    pub v: Vec<Vec<C64>>,
    pub w: Vec<Vec<C64>>,
}

/// Trajectory sample with monitors.
#[derive(Clone, Debug)]
pub struct RsSample {
    pub t: f64,
    pub state: RsState,
    pub f: CMat,
    pub leaf_drift: f64,
}

/// Trajectory with the worst-case drifts along the way.
#[derive(Clone, Debug)]
pub struct RsTrajectory {
    pub samples: Vec<RsSample>,
    pub max_leaf_drift: f64,
    pub max_spec_drift: f64,
    pub max_det_drift: f64,
    pub max_trf_drift: f64,
}

fn rs_rhs(state: &RsState, gamma: f64) -> Result<RsState> {
    let n = state.q.len();
    let f = CMat::from_fn(n, |j, k| {
        state
            .v
            .iter()
            .zip(&state.w)
            .map(|(v, w)| v[j] * w[k].conj())
            .sum()
    });
    let a = reconstruct_a(&state.q, &f, gamma)?;
    let pref = (C64::from_polar(1.0, gamma) - 1.0).inv();
    let qdot: Vec<f64> = (0..n).map(|j| (pref * f[(j, j)]).im).collect();
    let kernel = |j: usize, k: usize| -> C64 {
        let half = 0.5 * (state.q[j] - state.q[k]);
        C64::new(0.25, 0.0) * C64::new(1.0, -cot(half)) * (a[(j, k)] - a[(k, j)].conj())
    };
    let apply = |vecs: &[Vec<C64>]| -> Vec<Vec<C64>> {
        vecs.iter()
            .map(|v| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .filter(|&k| k != j)
                            .map(|k| kernel(j, k) * v[k])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    };
    Ok(RsState { q: qdot, v: apply(&state.v), w: apply(&state.w) })
}

fn rs_axpy(a: &RsState, c: f64, b: &RsState) -> RsState {
    let addv = |x: &Vec<Vec<C64>>, y: &Vec<Vec<C64>>| {
        x.iter()
            .zip(y)
            .map(|(u, w)| u.iter().zip(w).map(|(p, q)| p + q * c).collect())
            .collect()
    };
    RsState {
        q: a.q.iter().zip(&b.q).map(|(p, q)| p + c * q).collect(),
        v: addv(&a.v, &b.v),
        w: addv(&a.w, &b.w),
    }
}

/// Integrate the real spin-RS flow (the Y_{H^Re} evolution) by fixed-step
/// RK4, monitoring the leaf constraint, torus regularity, ball membership,
/// the spectrum of A, the determinant constraint and tr F.
pub fn integrate_rs(
    s0: &SlicePoint,
    gamma: f64,
    t_final: f64,
    dt: f64,
) -> Result<RsTrajectory> {
    if dt <= 0.0 || t_final <= 0.0 {
        return Err(Error::Config("need positive T and dt".into()));
    }
    let spin0 = spin_data(s0, gamma)?;
    let xs: Vec<f64> = s0.balls.iter().map(|b| b.x).collect();
    let n = s0.n();
    let mut state = RsState {
        q: s0.q.phases().to_vec(),
        v: s0.balls.iter().map(|b| b.v.clone()).collect(),
        w: spin0.w.clone(),
    };
    let spec0 = unitary_eig(&s0.a);
    let det0 = xs
        .iter()
        .zip(&state.v)
        .map(|(&x, v)| x * vnorm_sqr(v))
        .sum::<f64>();
    let trf0 = spin0.f.trace();

    let steps = (t_final / dt).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut max_leaf = 0.0f64;
    let mut max_spec = 0.0f64;
    let mut max_det = 0.0f64;
    let mut max_trf = 0.0f64;
    let mut t = 0.0;
    for step in 0..=steps {
        // Monitors on the current state.
        let f = CMat::from_fn(n, |j, k| {
            state
                .v
                .iter()
                .zip(&state.w)
                .map(|(v, w)| v[j] * w[k].conj())
                .sum()
        });
        let a = reconstruct_a(&state.q, &f, gamma)?;
        let qd = DiagUnitary::new(state.q.clone());
        let gap = qd.min_gap();
        if n > 1 && gap < DELTA_REG {
            return Err(Error::RegularityLost(t, gap));
        }
        for (&x, v) in xs.iter().zip(&state.v) {
            let arg = x * vnorm_sqr(v);
            if arg.abs() >= TWO_PI {
                return Err(Error::BallExit(arg));
            }
        }
        let au = UnitaryMat::new_unchecked(a.clone());
        let balls: Vec<BallVec> = xs
            .iter()
            .zip(&state.v)
            .map(|(&x, v)| BallVec { v: v.clone(), x })
            .collect();
        let mpt = MPoint::new(au.clone(), UnitaryMat::new_unchecked(qd.as_matrix()), balls)
            .expect("state dimensions are consistent");
        let leaf_drift = leaf_residual(&mpt, gamma);
        max_leaf = max_leaf.max(leaf_drift);
        if leaf_drift > 1e-5 {
            return Err(Error::ConstraintDrift(leaf_drift, 1e-5));
        }
        let spec = unitary_eig(&au);
        let sd = spec0
            .q
            .phases()
            .iter()
            .zip(spec.q.phases())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        max_spec = max_spec.max(sd);
        let det = xs
            .iter()
            .zip(&state.v)
            .map(|(&x, v)| x * vnorm_sqr(v))
            .sum::<f64>();
        let ddrift = {
            let raw = (det - det0).rem_euclid(TWO_PI);
            raw.min(TWO_PI - raw)
        };
        max_det = max_det.max(ddrift);
        max_trf = max_trf.max((f.trace() - trf0).norm());
        samples.push(RsSample { t, state: state.clone(), f, leaf_drift });
        if step == steps {
            break;
        }
        // RK4 step.
        let k1 = rs_rhs(&state, gamma)?;
        let k2 = rs_rhs(&rs_axpy(&state, 0.5 * dt, &k1), gamma)?;
        let k3 = rs_rhs(&rs_axpy(&state, 0.5 * dt, &k2), gamma)?;
        let k4 = rs_rhs(&rs_axpy(&state, dt, &k3), gamma)?;
        let mut next = rs_axpy(&state, dt / 6.0, &k1);
        next = rs_axpy(&next, dt / 3.0, &k2);
        next = rs_axpy(&next, dt / 3.0, &k3);
        state = rs_axpy(&next, dt / 6.0, &k4);
        t += dt;
    }
    Ok(RsTrajectory {
        samples,
        max_leaf_drift: max_leaf,
        max_spec_drift: max_spec,
        max_det_drift: max_det,
        max_trf_drift: max_trf,
    })
}

/// Build a gauge-fixed leaf slice point, resampling until B has a regular
/// spectrum (the construction does not guarantee it).
pub fn build_leaf_slice(spec: &LeafSpec, seed: u64) -> Result<(SlicePoint, MPoint)> {
    for attempt in 0..16 {
        let m = build_leaf_point(spec, seed.wrapping_add(attempt * 7919))?;
        match crate::dynamics::gauge_fix(&m) {
            Ok((s, _)) => {
                if check_potential_poles(s.q.phases(), spec.gamma).is_ok() {
                    return Ok((s, m));
                }
            }
            Err(Error::DegenerateSpectrum(_, _)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotConverged(f64::NAN))
}
