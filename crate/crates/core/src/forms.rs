//! Quasi-Hamiltonian 2-forms: the ball form, the double form, the fused
//! pencil form ω_z, Maurer-Cartan pullbacks through the moment maps, and the
//! bivector/2-form compatibility identity
//! P♯∘ω♭ = id − ¼ Σ_a (e_a)_M ⊗ Φ*(θ_a^L − θ_a^R).

use num_complex::Complex64 as C64;

use crate::bivector::{
    assemble_p, BivectorKind, MatFactor, MatWord, PencilParams, PointCtx, RawPoint, RawTangent,
    Slot,
};
use crate::matlie::{inner_raw, vdot, CMat, OrthBasis};

/// Maurer-Cartan side of a pullback.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaSide {
    Left,
    Right,
}

/// Which map the form machinery differentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapVariant {
    /// Φ = A B A⁻¹ B⁻¹ E_1 ⋯ E_d.
    Moment,
    /// Φ̃ = A B̃⁻¹ E_1 ⋯ E_d (B slot holds B̃).
    TildeMoment,
    /// Φ_{𝓜_{α-1}} = A B A⁻¹ B⁻¹ E_1 ⋯ E_{α-1}.
    Partial(usize),
    /// Φ_α = E_α.
    Ball(usize),
}

impl MapVariant {
    fn word(self, d: usize) -> MatWord {
        match self {
            MapVariant::Moment => MatWord::moment(d),
            MapVariant::TildeMoment => MatWord::tilde_moment(d),
            MapVariant::Partial(alpha) => {
                let mut f = vec![MatFactor::A, MatFactor::B, MatFactor::ADag, MatFactor::BDag];
                f.extend((0..alpha).map(MatFactor::Ball));
                MatWord(f)
            }
            MapVariant::Ball(alpha) => MatWord(vec![MatFactor::Ball(alpha)]),
        }
    }
}

/// Pullback of θ^L or θ^R through the chosen map: Φ⁻¹·DΦ(X) or DΦ(X)·Φ⁻¹,
/// with DΦ taken analytically through the word product rule.
pub fn pullback_theta(p: &RawPoint, x: &RawTangent, side: ThetaSide, map: MapVariant) -> CMat {
    let word = map.word(p.d());
    let val = word.value(p);
    let dif = word.diff(p, x);
    match side {
        ThetaSide::Left => val.dagger() * dif,
        ThetaSide::Right => dif * val.dagger(),
    }
}

fn sinc_family(x: f64, s: f64) -> (f64, f64) {
    // σ = sin(x s)/s and c2 = (x − σ)/s, both smooth at s = 0.
    if s < 1e-6 {
        let u = x * s;
        let sigma = x * (1.0 - u * u / 6.0 + u * u * u * u / 120.0);
        let c2 = x * x * x * s / 6.0 - x * x * x * x * x * s * s * s / 120.0;
        (sigma, c2)
    } else {
        let sigma = (x * s).sin() / s;
        ((x * s).sin() / s, (x - sigma) / s)
    }
}

/// The quasi-Hamiltonian 2-form of the ball D(x) on two displacements of v.
pub fn omega_ball(v: &[C64], x: f64, xv: &[C64], yv: &[C64]) -> f64 {
    let n = v.len();
    let s = crate::matlie::vnorm_sqr(v);
    let (sigma, c2) = sinc_family(x, s);
    let i = C64::new(0.0, 1.0);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let w = xv[j] * yv[j].conj() - yv[j] * xv[j].conj();
        acc += i * sigma * w;
        acc += i * c2 * v[j].norm_sqr() * w;
    }
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let dvdv = xv[j] * yv[k] - yv[j] * xv[k];
            let dbdb = xv[j].conj() * yv[k].conj() - yv[j].conj() * xv[k].conj();
            let dvdb = xv[j] * yv[k].conj() - yv[j] * xv[k].conj();
            acc += i * c2 * (v[j].conj() * v[k].conj() * dvdv + v[j] * v[k] * dbdb
                + v[j].conj() * v[k] * dvdb);
        }
    }
    acc.re
}

/// The 2-form of the internally fused double on (δA, δB) pairs.
pub fn omega_double(p: &RawPoint, x: &RawTangent, y: &RawTangent) -> f64 {
    let adag = p.a.dagger();
    let bdag = p.b.dagger();
    let pair = |ax: &CMat, bx: &CMat, ay: &CMat, by: &CMat| -> C64 {
        (ax * by).trace() - (ay * bx).trace()
    };
    // A⁻¹dA ∧ dB B⁻¹
    let a1x = &adag * &x.da;
    let a1y = &adag * &y.da;
    let b1x = &x.db * &bdag;
    let b1y = &y.db * &bdag;
    // dA A⁻¹ ∧ B⁻¹dB
    let a2x = &x.da * &adag;
    let a2y = &y.da * &adag;
    let b2x = &bdag * &x.db;
    let b2y = &bdag * &y.db;
    // (AB)⁻¹ d(AB) ∧ (BA)⁻¹ d(BA)
    let abdag = &bdag * &adag;
    let badag = &adag * &bdag;
    let dab = |t: &RawTangent| &t.da * &p.b + &p.a * &t.db;
    let dba = |t: &RawTangent| &t.db * &p.a + &p.b * &t.da;
    let a3x = &abdag * &dab(x);
    let a3y = &abdag * &dab(y);
    let b3x = &badag * &dba(x);
    let b3y = &badag * &dba(y);
    let total = pair(&a1x, &b1x, &a1y, &b1y) + pair(&a2x, &b2x, &a2y, &b2y)
        - pair(&a3x, &b3x, &a3y, &b3y);
    0.5 * total.re
}

/// Differential of |v_α|² on a displacement.
pub fn d_radial(p: &RawPoint, alpha: usize, x: &RawTangent) -> f64 {
    2.0 * vdot(&p.v[alpha], &x.dv[alpha]).re
}

/// The full pencil 2-form ω_z = ω_double + Σ ω_ball + fusion + ω̃_z.
pub fn omega_pencil(p: &RawPoint, z: &PencilParams, x: &RawTangent, y: &RawTangent) -> f64 {
    let d = p.d();
    let mut acc = omega_double(p, x, y);
    for alpha in 0..d {
        acc += omega_ball(&p.v[alpha], p.x[alpha], &x.dv[alpha], &y.dv[alpha]);
    }
    // Fusion terms −½ Σ_α Σ_a Φ*_{𝓜_{α-1}}θ_a^L ∧ Φ*_α θ_a^R; the basis sum
    // contracts to the invariant pairing of the skew projections.
    for alpha in 0..d {
        let lx = pullback_theta(p, x, ThetaSide::Left, MapVariant::Partial(alpha)).skew();
        let ly = pullback_theta(p, y, ThetaSide::Left, MapVariant::Partial(alpha)).skew();
        let rx = pullback_theta(p, x, ThetaSide::Right, MapVariant::Ball(alpha)).skew();
        let ry = pullback_theta(p, y, ThetaSide::Right, MapVariant::Ball(alpha)).skew();
        acc -= 0.5 * (inner_raw(&lx, &ry) - inner_raw(&ly, &rx));
    }
    // ω̃_z = Σ_{α<β} x_α x_β z_αβ d|v_α|² ∧ d|v_β|².
    for alpha in 0..d {
        for beta in (alpha + 1)..d {
            let za = z.zstar(alpha, beta);
            if za == 0.0 {
                continue;
            }
            acc += p.x[alpha]
                * p.x[beta]
                * za
                * (d_radial(p, alpha, x) * d_radial(p, beta, y)
                    - d_radial(p, alpha, y) * d_radial(p, beta, x));
        }
    }
    acc
}

/// Deterministic tangent frame at a point: left-translated basis directions
/// in A and B plus coordinate directions in each v_α.
pub fn tangent_frame(p: &RawPoint, basis: &OrthBasis) -> Vec<RawTangent> {
    let n = p.n();
    let d = p.d();
    let mut frame = Vec::with_capacity(2 * n * n + 2 * n * d);
    for e in basis.iter() {
        let mut t = RawTangent::zero(n, d);
        t.da = e * &p.a;
        frame.push(t);
    }
    for e in basis.iter() {
        let mut t = RawTangent::zero(n, d);
        t.db = e * &p.b;
        frame.push(t);
    }
    for alpha in 0..d {
        for i in 0..n {
            for im in [false, true] {
                let mut t = RawTangent::zero(n, d);
                t.dv[alpha][i] = if im { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
                frame.push(t);
            }
        }
    }
    frame
}

/// Tangency residual of a displacement at a point with unitary A, B.
pub fn tangency_residual(p: &RawPoint, t: &RawTangent) -> f64 {
    let ra = (p.a.dagger() * &t.da).antiherm_residual();
    let rb = (p.b.dagger() * &t.db).antiherm_residual();
    ra.max(rb)
}

fn tangent_norm(t: &RawTangent) -> f64 {
    let mut s = t.da.norm_fro().powi(2) + t.db.norm_fro().powi(2);
    for dv in &t.dv {
        s += crate::matlie::vnorm_sqr(dv);
    }
    s.sqrt()
}

fn tangent_sub(a: &RawTangent, b: &RawTangent) -> RawTangent {
    RawTangent {
        da: &a.da - &b.da,
        db: &a.db - &b.db,
        dv: a
            .dv
            .iter()
            .zip(&b.dv)
            .map(|(u, w)| u.iter().zip(w).map(|(x, y)| x - y).collect())
            .collect(),
    }
}

/// Axiom (B2) residual: max over basis elements and frame vectors of
/// |ι_{(e_a)_M} ω_z (Y) − ½⟨e_a, Φ*(θ^R + θ^L)(Y)⟩|.
pub fn b2_residual(p: &RawPoint, z: &PencilParams, basis: &OrthBasis) -> f64 {
    let frame = tangent_frame(p, basis);
    let mut max_res = 0.0f64;
    for e in basis.iter() {
        let xa = RawTangent::infinitesimal(e, p);
        for y in &frame {
            let lhs = omega_pencil(p, z, &xa, y);
            let l = pullback_theta(p, y, ThetaSide::Left, MapVariant::Moment);
            let r = pullback_theta(p, y, ThetaSide::Right, MapVariant::Moment);
            let rhs = 0.5 * inner_raw(e, &(l + r));
            max_res = max_res.max((lhs - rhs).abs());
        }
    }
    max_res
}

/// Compatibility residual of P♯∘ω♭ = id − ¼Σ_a (e_a)_M ⊗ Φ*(θ_a^L − θ_a^R),
/// evaluated on the deterministic tangent frame; returns the max defect.
pub fn compat_residual(p: &RawPoint, z: &PencilParams, basis: &OrthBasis) -> f64 {
    let ctx = PointCtx::new(p.clone(), BivectorKind::Standard(z.clone()));
    let chart = ctx.chart;
    let pm = assemble_p(&ctx);
    let frame = tangent_frame(p, basis);
    let mut max_res = 0.0f64;
    for xv in &frame {
        // ω♭(X) as a chart covector: λ_r = ω(X, ∂_r) on ambient directions.
        let lambda: Vec<f64> = (0..chart.len())
            .map(|r| omega_pencil(p, z, xv, &RawTangent::unit(&chart, r)))
            .collect();
        // P♯λ: Y_s = Σ_r λ_r P^{rs}.
        let mut y = vec![0.0f64; chart.len()];
        for (r, &lr) in lambda.iter().enumerate() {
            if lr == 0.0 {
                continue;
            }
            for (s, ys) in y.iter_mut().enumerate() {
                *ys += lr * pm[r][s];
            }
        }
        let mut yt = RawTangent::zero(chart.n, chart.d);
        for cs in 0..chart.slots() {
            let zc = C64::new(y[2 * cs], y[2 * cs + 1]);
            match chart.slot_of(cs) {
                Slot::A(i, j) => yt.da[(i, j)] = zc,
                Slot::B(i, j) => yt.db[(i, j)] = zc,
                Slot::V(alpha, i) => yt.dv[alpha][i] = zc,
            }
        }
        // RHS: X − ¼ (ζ_X)_M with ζ_X the u(n) part of Φ*(θ^L − θ^R)(X).
        let l = pullback_theta(p, xv, ThetaSide::Left, MapVariant::Moment);
        let r = pullback_theta(p, xv, ThetaSide::Right, MapVariant::Moment);
        let zeta = (l - r).skew();
        let corr = RawTangent::infinitesimal(&zeta, p);
        let rhs = RawTangent {
            da: &xv.da - &corr.da.scale(C64::new(0.25, 0.0)),
            db: &xv.db - &corr.db.scale(C64::new(0.25, 0.0)),
            dv: xv
                .dv
                .iter()
                .zip(&corr.dv)
                .map(|(u, w)| u.iter().zip(w).map(|(a, b)| a - b * 0.25).collect())
                .collect(),
        };
        let defect = tangent_norm(&tangent_sub(&yt, &rhs));
        max_res = max_res.max(defect);
    }
    max_res
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlie::{haar_random, random_antiherm, UnitaryMat};
    use crate::phasespace::{act, random_point, BallVec, MPoint, BALL_MARGIN};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn xs_for(d: usize) -> Vec<f64> {
        (0..d).map(|i| if i % 2 == 0 { 1.0 } else { -1.5 }).collect()
    }

    fn raw(n: usize, d: usize, seed: u64) -> RawPoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RawPoint::from_point(&random_point(n, d, &xs_for(d), &mut rng, BALL_MARGIN).unwrap())
    }

    fn rand_pencil(d: usize, rng: &mut impl Rng) -> PencilParams {
        let v: Vec<f64> = (0..d * (d - 1) / 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PencilParams::new(d, v).unwrap()
    }

    fn random_tangent(p: &RawPoint, rng: &mut impl Rng) -> RawTangent {
        let n = p.n();
        RawTangent {
            da: random_antiherm(n, 1.0, rng) * &p.a,
            db: random_antiherm(n, 1.0, rng) * &p.b,
            dv: (0..p.d())
                .map(|_| {
                    (0..n)
                        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn omega_ball_limit_and_antisymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // v → 0 limit is i x Σ dv ∧ dv̄, i.e. 2x Im(X†Y).
        let v = vec![C64::new(0.0, 0.0); 3];
        let x: Vec<C64> = (0..3).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let y: Vec<C64> = (0..3).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let par = 1.3;
        let got = omega_ball(&v, par, &x, &y);
        let want = 2.0 * par * vdot(&x, &y).im;
        assert!((got - want).abs() < 1e-12);
        // Antisymmetry at a generic point.
        let p = raw(3, 1, 2);
        let w1 = &p.v[0];
        for _ in 0..10 {
            let xx: Vec<C64> = (0..3).map(|_| C64::new(rng.gen(), rng.gen())).collect();
            let yy: Vec<C64> = (0..3).map(|_| C64::new(rng.gen(), rng.gen())).collect();
            let fwd = omega_ball(w1, p.x[0], &xx, &yy);
            let bwd = omega_ball(w1, p.x[0], &yy, &xx);
            assert!((fwd + bwd).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_ball_rank_one_point() {
        // At v = (r, 0, …, 0) the diagonal mixing coefficient on orthogonal
        // directions reduces to sin(x r²)/r².
        let r = 0.8;
        let x = 1.1;
        let v = vec![C64::new(r, 0.0), C64::new(0.0, 0.0)];
        let e2 = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let ie2 = vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)];
        let got = omega_ball(&v, x, &e2, &ie2);
        // i σ (dv₂∧dv̄₂)(e₂, i e₂) = σ·(i(1·(−i) − i·1)) = 2σ.
        let sigma = (x * r * r).sin() / (r * r);
        assert!((got - 2.0 * sigma).abs() < 1e-13);
    }

    #[test]
    fn omega_double_identity_oracle() {
        // At A = B = 1 with X = (ξ, ζ), Y = (ξ′, ζ′):
        // ω = tr(ξ ζ′) − tr(ξ′ ζ); the third term cancels by trace symmetry.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 3;
        let p = RawPoint {
            a: crate::matlie::CMat::identity(n),
            b: crate::matlie::CMat::identity(n),
            v: vec![vec![C64::new(0.0, 0.0); n]],
            x: vec![1.0],
        };
        for _ in 0..10 {
            let xi = random_antiherm(n, 1.0, &mut rng);
            let ze = random_antiherm(n, 1.0, &mut rng);
            let xip = random_antiherm(n, 1.0, &mut rng);
            let zep = random_antiherm(n, 1.0, &mut rng);
            let mk = |da: &crate::matlie::CMat, db: &crate::matlie::CMat| RawTangent {
                da: da.clone(),
                db: db.clone(),
                dv: vec![vec![C64::new(0.0, 0.0); n]],
            };
            let got = omega_double(&p, &mk(&xi, &ze), &mk(&xip, &zep));
            let want = ((&xi * &zep).trace() - (&xip * &ze).trace()).re;
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_invariance_under_simultaneous_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs = xs_for(2);
        let mut prng = ChaCha8Rng::seed_from_u64(11);
        let m = random_point(2, 2, &xs, &mut prng, BALL_MARGIN).unwrap();
        let p = RawPoint::from_point(&m);
        let z = rand_pencil(2, &mut rng);
        let g = haar_random(2, &mut rng);
        let moved = RawPoint::from_point(&act(&g, &m));
        for _ in 0..6 {
            let x = random_tangent(&p, &mut rng);
            let y = random_tangent(&p, &mut rng);
            let push = |t: &RawTangent| RawTangent {
                da: g.mat() * &t.da * g.mat().dagger(),
                db: g.mat() * &t.db * g.mat().dagger(),
                dv: t.dv.iter().map(|dv| g.mat().mulv(dv)).collect(),
            };
            let before = omega_pencil(&p, &z, &x, &y);
            let after = omega_pencil(&moved, &z, &push(&x), &push(&y));
            assert!((before - after).abs() < 1e-10, "{before} vs {after}");
        }
    }

    #[test]
    fn omega_pencil_reduces_to_double_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 2;
        let a = haar_random(n, &mut rng);
        let b = haar_random(n, &mut rng);
        let m = MPoint::new(
            a,
            b,
            vec![
                BallVec::new(vec![C64::new(0.0, 0.0); n], 1.0).unwrap(),
                BallVec::new(vec![C64::new(0.0, 0.0); n], -2.0).unwrap(),
            ],
        )
        .unwrap();
        let p = RawPoint::from_point(&m);
        let z = PencilParams::new(2, vec![0.7]).unwrap();
        for _ in 0..5 {
            let mut x = random_tangent(&p, &mut rng);
            let mut y = random_tangent(&p, &mut rng);
            for dv in x.dv.iter_mut().chain(y.dv.iter_mut()) {
                for c in dv.iter_mut() {
                    *c = C64::new(0.0, 0.0);
                }
            }
            let full = omega_pencil(&p, &z, &x, &y);
            let double = omega_double(&p, &x, &y);
            assert!((full - double).abs() < 1e-12);
        }
    }

    #[test]
    fn pullback_theta_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // d = 0-like case: at A = 1 and X = (ξ, 0), the right pullback of the
        // commutator word is ξ − BξB⁻¹.
        let n = 3;
        let b = haar_random(n, &mut rng);
        let p = RawPoint {
            a: crate::matlie::CMat::identity(n),
            b: b.mat().clone(),
            v: vec![vec![C64::new(0.0, 0.0); n]],
            x: vec![1.0],
        };
        let xi = random_antiherm(n, 1.0, &mut rng);
        let t = RawTangent {
            da: xi.clone(),
            db: crate::matlie::CMat::zeros(n),
            dv: vec![vec![C64::new(0.0, 0.0); n]],
        };
        let got = pullback_theta(&p, &t, ThetaSide::Right, MapVariant::Moment);
        let want = &xi - &(b.mat() * &xi * b.mat().dagger());
        assert!((got - want).norm_fro() < 1e-12);
        // Zero displacement maps to zero.
        let zero = RawTangent::zero(n, 1);
        assert!(pullback_theta(&p, &zero, ThetaSide::Left, MapVariant::Moment).norm_fro() == 0.0);
    }

    #[test]
    fn pullback_theta_fd_oracle() {
        // Analytic DΦ against central differences of the moment word along a
        // curve through the displacement.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = raw(2, 2, 8);
        let t = random_tangent(&p, &mut rng);
        let word = MapVariant::Moment.word(2);
        let eps = 1e-6;
        let shift = |sign: f64| {
            let mut q = p.clone();
            q.a = &q.a + &t.da.scale(C64::new(sign * eps, 0.0));
            q.b = &q.b + &t.db.scale(C64::new(sign * eps, 0.0));
            for (v, dv) in q.v.iter_mut().zip(&t.dv) {
                for (c, d) in v.iter_mut().zip(dv) {
                    *c += d * sign * eps;
                }
            }
            word.value(&q)
        };
        let fd = (shift(1.0) - shift(-1.0)).scale(C64::new(1.0 / (2.0 * eps), 0.0));
        let analytic = word.diff(&p, &t);
        assert!((fd - analytic).norm_fro() < 1e-6);
    }

    #[test]
    fn d_radial_is_twice_real_overlap() {
        let p = raw(2, 2, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t = random_tangent(&p, &mut rng);
        let got = d_radial(&p, 1, &t);
        let want = 2.0 * vdot(&p.v[1], &t.dv[1]).re;
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn b2_axiom_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, d) in [(1usize, 1usize), (2, 1), (2, 2)] {
            let basis = OrthBasis::new(n);
            let p = raw(n, d, 20 + n as u64 * 3 + d as u64);
            let z = if d > 1 { rand_pencil(d, &mut rng) } else { PencilParams::zero(d) };
            let r = b2_residual(&p, &z, &basis);
            assert!(r < 1e-8, "B2 at n={n} d={d}: {r}");
        }
    }

    #[test]
    fn compat_identity_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (n, d) in [(1usize, 1usize), (2, 2)] {
            let basis = OrthBasis::new(n);
            let p = raw(n, d, 30 + n as u64 * 3 + d as u64);
            let z0 = PencilParams::zero(d);
            let r0 = compat_residual(&p, &z0, &basis);
            let tol = if n == 1 { 1e-8 } else { 1e-6 };
            assert!(r0 < tol, "compat z=0 at n={n} d={d}: {r0}");
            if d > 1 {
                let z = rand_pencil(d, &mut rng);
                let r = compat_residual(&p, &z, &basis);
                assert!(r < tol, "compat random z at n={n} d={d}: {r}");
            }
        }
    }

    #[test]
    fn tangent_frame_is_tangent() {
        let p = raw(2, 2, 13);
        let basis = OrthBasis::new(2);
        for t in tangent_frame(&p, &basis) {
            assert!(tangency_residual(&p, &t) < 1e-12);
        }
    }

    #[test]
    fn omega_tilde_superposition_exact() {
        // ω̃_z is exactly linear in z.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p = raw(2, 3, 15);
        let z1 = rand_pencil(3, &mut rng);
        let z2 = rand_pencil(3, &mut rng);
        let zs = PencilParams::lincomb(1.0, &z1, 1.0, &z2);
        let z0 = PencilParams::zero(3);
        for _ in 0..5 {
            let x = random_tangent(&p, &mut rng);
            let y = random_tangent(&p, &mut rng);
            let w0 = omega_pencil(&p, &z0, &x, &y);
            let w1 = omega_pencil(&p, &z1, &x, &y) - w0;
            let w2 = omega_pencil(&p, &z2, &x, &y) - w0;
            let ws = omega_pencil(&p, &zs, &x, &y) - w0;
            assert!((ws - w1 - w2).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_point_unitary_guard() {
        let u = UnitaryMat::identity(2);
        assert_eq!(u.n(), 2);
    }
}
