//! The quasi-Poisson engine: assembles P on the real chart, contracts it with
//! observable gradients, and evaluates the structural residuals (twisted
//! Jacobi, moment-map condition, Ψ-morphism).

use num_complex::Complex64 as C64;

use super::chart::{RawPoint, RawTangent, Slot};
use super::ctx::{BivectorKind, PointCtx};
use super::observable::{MatWord, Observable};
use super::tables::{bk, bk_conj, bracket_slots};
use crate::matlie::{CMat, OrthBasis};

/// Gradient in Wirtinger form: per complex slot the pair (∂f/∂u, ∂f/∂ū).
pub struct WGrad {
    pub holo: Vec<C64>,
    pub anti: Vec<C64>,
}

impl WGrad {
    /// From real-chart components g_r = ∂f/∂x_r.
    pub fn from_real(grad: &[C64]) -> Self {
        let slots = grad.len() / 2;
        let mut holo = Vec::with_capacity(slots);
        let mut anti = Vec::with_capacity(slots);
        let i = C64::new(0.0, 1.0);
        for u in 0..slots {
            let gre = grad[2 * u];
            let gim = grad[2 * u + 1];
            holo.push((gre - i * gim) * 0.5);
            anti.push((gre + i * gim) * 0.5);
        }
        WGrad { holo, anti }
    }

    fn support(&self) -> Vec<usize> {
        (0..self.holo.len())
            .filter(|&u| self.holo[u].norm_sqr() + self.anti[u].norm_sqr() > 0.0)
            .collect()
    }
}

/// {f, g} = Σ_{u,w} ∂f/∂u ∂g/∂w {u,w} + ... over the Wirtinger expansion.
pub fn bracket_grads(ctx: &PointCtx, gf: &WGrad, gg: &WGrad) -> C64 {
    let chart = ctx.chart;
    let mut acc = C64::new(0.0, 0.0);
    for &u in gf.support().iter() {
        let su = chart.slot_of(u);
        let fu = gf.holo[u];
        let fub = gf.anti[u];
        for &w in gg.support().iter() {
            let sw = chart.slot_of(w);
            let gw = gg.holo[w];
            let gwb = gg.anti[w];
            let zz = bk(ctx, su, sw);
            let zc = bk_conj(ctx, su, sw);
            acc += fu * gw * zz + fu * gwb * zc + fub * gw * zc.conj() + fub * gwb * zz.conj();
        }
    }
    acc
}

/// Bracket of two observables at a point.
pub fn bracket(ctx: &PointCtx, f: &Observable, g: &Observable) -> C64 {
    let gf = WGrad::from_real(&f.grad(ctx));
    let gg = WGrad::from_real(&g.grad(ctx));
    bracket_grads(ctx, &gf, &gg)
}

/// P on the real chart as a dense antisymmetric matrix.
pub fn assemble_p(ctx: &PointCtx) -> Vec<Vec<f64>> {
    let chart = ctx.chart;
    let r = chart.len();
    let mut p = vec![vec![0.0; r]; r];
    for cu in 0..chart.slots() {
        let su = chart.slot_of(cu);
        for cw in cu..chart.slots() {
            let sw = chart.slot_of(cw);
            let zz = bk(ctx, su, sw);
            let zc = bk_conj(ctx, su, sw);
            // {Re u, Re w}, {Re u, Im w}, {Im u, Re w}, {Im u, Im w}.
            let rr = 0.5 * (zz + zc).re;
            let ri = 0.5 * (zz - zc).im;
            let ir = 0.5 * (zz + zc).im;
            let ii = 0.5 * (zc - zz).re;
            let (ur, ui, wr, wi) = (2 * cu, 2 * cu + 1, 2 * cw, 2 * cw + 1);
            p[ur][wr] = rr;
            p[ur][wi] = ri;
            p[ui][wr] = ir;
            p[ui][wi] = ii;
            p[wr][ur] = -rr;
            p[wi][ur] = -ri;
            p[wr][ui] = -ir;
            p[wi][ui] = -ii;
        }
    }
    p
}

/// Quasi-Hamiltonian vector field X_H = P ∇H of a real observable,
/// reassembled into ambient (δA, δB, δv) form.
pub fn hamiltonian_vf(ctx: &PointCtx, h: &Observable) -> RawTangent {
    let chart = ctx.chart;
    let gh = WGrad::from_real(&h.grad(ctx));
    let mut xh = vec![C64::new(0.0, 0.0); chart.len()];
    // X^r = Σ_s P^{rs} (∇H)_s, computed per complex slot pair.
    for cu in 0..chart.slots() {
        let su = chart.slot_of(cu);
        let mut acc_holo = C64::new(0.0, 0.0);
        for &w in gh.support().iter() {
            let sw = chart.slot_of(w);
            let zz = bk(ctx, su, sw);
            let zc = bk_conj(ctx, su, sw);
            // d(x_u)/dt = {u, H} with u the holomorphic coordinate.
            acc_holo += gh.holo[w] * zz + gh.anti[w] * zc;
        }
        xh[2 * cu] = C64::new(acc_holo.re, 0.0);
        xh[2 * cu + 1] = C64::new(acc_holo.im, 0.0);
    }
    let mut t = RawTangent::zero(chart.n, chart.d);
    for cu in 0..chart.slots() {
        let z = C64::new(xh[2 * cu].re, xh[2 * cu + 1].re);
        match chart.slot_of(cu) {
            Slot::A(i, j) => t.da[(i, j)] = z,
            Slot::B(i, j) => t.db[(i, j)] = z,
            Slot::V(alpha, i) => t.dv[alpha][i] = z,
        }
    }
    t
}

/// Action of the Cartan trivector on three observables:
/// φ_M(f1,f2,f3) = (1/12) Σ C_abc Σ_{σ∈S3} sgn(σ) (e_a)_M(f_σ(1)) ⋯.
pub fn cartan_trivector(
    ctx: &PointCtx,
    basis: &OrthBasis,
    f1: &Observable,
    f2: &Observable,
    f3: &Observable,
) -> C64 {
    let m = basis.len();
    let tangents: Vec<RawTangent> = basis
        .iter()
        .map(|e| RawTangent::infinitesimal(e, &ctx.p))
        .collect();
    let v1: Vec<C64> = tangents.iter().map(|t| f1.dir_deriv(&ctx.p, t)).collect();
    let v2: Vec<C64> = tangents.iter().map(|t| f2.dir_deriv(&ctx.p, t)).collect();
    let v3: Vec<C64> = tangents.iter().map(|t| f3.dir_deriv(&ctx.p, t)).collect();
    let cs = basis.structure_constants();
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let cab = cs[(a * m + b) * m + c];
                if cab == 0.0 {
                    continue;
                }
                let perm = v1[a] * v2[b] * v3[c] + v1[b] * v2[c] * v3[a] + v1[c] * v2[a] * v3[b]
                    - v1[a] * v2[c] * v3[b]
                    - v1[b] * v2[a] * v3[c]
                    - v1[c] * v2[b] * v3[a];
                acc += perm * (cab / 12.0);
            }
        }
    }
    acc
}

/// Finite-difference step per chart coordinate.
fn fd_step(p: &RawPoint, r: usize, h_fd: f64) -> f64 {
    h_fd * p.coord(r).abs().max(1.0)
}

/// Gradient of the scalar m ↦ {f, g}(m) by central differences. The b-factors
/// of the tables are replaced by their first-order expansion around the base
/// point: the derivative at the base point is unchanged, but the stencil only
/// ever differentiates polynomials, so the truncation error stays benign even
/// when a spin vector sits near the ball boundary where b has a pole.
fn bracket_grad_fd(
    p: &RawPoint,
    kind: &BivectorKind,
    f: &Observable,
    g: &Observable,
    h_fd: f64,
) -> Vec<C64> {
    let chart = p.chart();
    let d = p.d();
    let t0: Vec<f64> = (0..d)
        .map(|alpha| p.x[alpha] * crate::matlie::vnorm_sqr(&p.v[alpha]))
        .collect();
    let b0: Vec<f64> = t0.iter().map(|&t| crate::scalars::b_unchecked(t)).collect();
    let b0p: Vec<f64> = t0.iter().map(|&t| crate::scalars::b_prime_unchecked(t)).collect();
    let linearized = |q: RawPoint| -> PointCtx {
        let bfn = (0..d)
            .map(|alpha| {
                let t = q.x[alpha] * crate::matlie::vnorm_sqr(&q.v[alpha]);
                b0[alpha] + b0p[alpha] * (t - t0[alpha])
            })
            .collect();
        PointCtx::with_b_override(q, kind.clone(), bfn)
    };
    (0..chart.len())
        .map(|r| {
            let h = fd_step(p, r, h_fd);
            let cp = linearized(p.displaced(r, h));
            let cm = linearized(p.displaced(r, -h));
            (bracket(&cp, f, g) - bracket(&cm, f, g)) / (2.0 * h)
        })
        .collect()
}

/// Σ_cyc {f1, {f2, f3}} with the inner bracket differentiated by central
/// finite differences of the assembled bivector contraction.
pub fn jacobiator(
    p: &RawPoint,
    kind: &BivectorKind,
    f1: &Observable,
    f2: &Observable,
    f3: &Observable,
    h_fd: f64,
) -> C64 {
    let ctx = PointCtx::new(p.clone(), kind.clone());
    let mut acc = C64::new(0.0, 0.0);
    for (fa, fb, fc) in [(f1, f2, f3), (f2, f3, f1), (f3, f1, f2)] {
        let ga = WGrad::from_real(&fa.grad(&ctx));
        let ginner = WGrad::from_real(&bracket_grad_fd(p, kind, fb, fc, h_fd));
        acc += bracket_grads(&ctx, &ga, &ginner);
    }
    acc
}

/// Quasi-Jacobi residual: jacobiator − ½·φ_M.
pub fn quasi_jacobi_residual(
    p: &RawPoint,
    kind: &BivectorKind,
    basis: &OrthBasis,
    f1: &Observable,
    f2: &Observable,
    f3: &Observable,
    h_fd: f64,
) -> f64 {
    let ctx = PointCtx::new(p.clone(), kind.clone());
    let jac = jacobiator(p, kind, f1, f2, f3, h_fd);
    let phi = cartan_trivector(&ctx, basis, f1, f2, f3);
    (jac - phi * 0.5).norm()
}

/// Max residual of the moment-map condition over all entries (i,j) of the
/// moment word and all generator slot functions:
/// {Φ_ij, G} − ½ Σ_a (Φ e_a + e_a Φ)_ij (e_a)_M(G).
pub fn momentmap_residual(ctx: &PointCtx, basis: &OrthBasis) -> f64 {
    let n = ctx.n();
    let d = ctx.d();
    let word = if ctx.kind.is_degenerate() {
        MatWord::tilde_moment(d)
    } else {
        MatWord::moment(d)
    };
    let phi_mat = word.value(&ctx.p);
    let tangents: Vec<RawTangent> = basis
        .iter()
        .map(|e| RawTangent::infinitesimal(e, &ctx.p))
        .collect();
    // Generators: every slot function and its conjugate.
    let mut gens: Vec<Observable> = Vec::new();
    for cs in 0..ctx.chart.slots() {
        let slot = ctx.chart.slot_of(cs);
        gens.push(Observable::entry(slot, false));
        gens.push(Observable::entry(slot, true));
    }
    let gen_grads: Vec<WGrad> = gens.iter().map(|g| WGrad::from_real(&g.grad(ctx))).collect();
    let gen_infact: Vec<Vec<C64>> = gens
        .iter()
        .map(|g| tangents.iter().map(|t| g.dir_deriv(&ctx.p, t)).collect())
        .collect();
    let mut max_res = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let phi_ij = Observable::Entry { word: word.clone(), i, j, conj: false };
            let gphi = WGrad::from_real(&phi_ij.grad(ctx));
            // ½ (Φ e_a + e_a Φ)_ij per basis element.
            let coeffs: Vec<C64> = basis
                .iter()
                .map(|e| {
                    let m = &phi_mat * e + e * &phi_mat;
                    m[(i, j)] * 0.5
                })
                .collect();
            for (g_idx, ggrad) in gen_grads.iter().enumerate() {
                let lhs = bracket_grads(ctx, &gphi, ggrad);
                let rhs: C64 = coeffs
                    .iter()
                    .zip(&gen_infact[g_idx])
                    .map(|(c, act)| c * act)
                    .sum();
                max_res = max_res.max((lhs - rhs).norm());
            }
        }
    }
    max_res
}

/// |{f∘Ψ, g∘Ψ}_z(m) − {f,g}_{z,c}(Ψ(m))| for generator pairs of the target
/// chart (A, B̃, v) with conjugation flags.
pub fn psi_morphism_residual(
    p: &RawPoint,
    z: &super::ctx::PencilParams,
    f: (Slot, bool),
    g: (Slot, bool),
) -> f64 {
    let ctx_std = PointCtx::new(p.clone(), BivectorKind::Standard(z.clone()));
    // Pullback under Ψ: A stays, B̃ becomes the word B A B†, v stays.
    let pull = |slot: Slot, conj: bool| -> Observable {
        match slot {
            Slot::B(i, j) => Observable::Entry {
                word: MatWord(vec![super::observable::MatFactor::Bab]),
                i,
                j,
                conj,
            },
            other => Observable::entry(other, conj),
        }
    };
    let lhs = bracket(&ctx_std, &pull(f.0, f.1), &pull(g.0, g.1));
    // Ψ(m) in raw form: the B slot now holds B̃.
    let mut psi_p = p.clone();
    psi_p.b = &p.b * &p.a * p.b.dagger();
    let ctx_deg = PointCtx::new(psi_p, BivectorKind::Degenerate(z.clone()));
    let rhs = bracket_slots(&ctx_deg, f.0, f.1, g.0, g.1);
    (lhs - rhs).norm()
}

/// Numerical rank of the assembled bivector: eigenvalues of PᵀP above
/// tol²·max.
pub fn p_rank(p_mat: &[Vec<f64>], tol: f64) -> usize {
    let r = p_mat.len();
    let gram = CMat::from_fn(r, |i, j| {
        C64::new((0..r).map(|k| p_mat[k][i] * p_mat[k][j]).sum::<f64>(), 0.0)
    });
    let (vals, _) = crate::matlie::hermitian_eig(&gram);
    let max = vals.iter().cloned().fold(0.0f64, f64::max);
    vals.iter().filter(|&&v| v > tol * tol * max).count()
}
