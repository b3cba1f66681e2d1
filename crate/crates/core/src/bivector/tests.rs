use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::matlie::{ClassFn, OrthBasis, UnitaryMat};
use crate::phasespace::{random_point, BallVec, MPoint, BALL_MARGIN};

fn xs_for(d: usize) -> Vec<f64> {
    (0..d).map(|i| if i % 2 == 0 { 1.0 } else { -1.5 }).collect()
}

fn raw(n: usize, d: usize, seed: u64) -> RawPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RawPoint::from_point(&random_point(n, d, &xs_for(d), &mut rng, BALL_MARGIN).unwrap())
}

fn rand_pencil(d: usize, rng: &mut impl Rng) -> PencilParams {
    let z: Vec<f64> = (0..d * (d - 1) / 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PencilParams::new(d, z).unwrap()
}

fn std_ctx(n: usize, d: usize, seed: u64) -> PointCtx {
    PointCtx::new(raw(n, d, seed), BivectorKind::Standard(PencilParams::zero(d)))
}

#[test]
fn slot_bracket_antisymmetry_and_reality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for kindsel in 0..2 {
        let p = raw(2, 2, 77);
        let z = rand_pencil(2, &mut rng);
        let kind = if kindsel == 0 {
            BivectorKind::Standard(z)
        } else {
            BivectorKind::Degenerate(z)
        };
        let ctx = PointCtx::new(p, kind);
        let chart = ctx.chart;
        for cu in 0..chart.slots() {
            for cw in 0..chart.slots() {
                let (su, sw) = (chart.slot_of(cu), chart.slot_of(cw));
                for cf in [false, true] {
                    for cg in [false, true] {
                        let fw = bracket_slots(&ctx, su, cf, sw, cg);
                        let bw = bracket_slots(&ctx, sw, cg, su, cf);
                        assert!((fw + bw).norm() < 1e-12, "antisymmetry {su:?} {sw:?}");
                        let conj_both = bracket_slots(&ctx, su, !cf, sw, !cg);
                        assert!(
                            (conj_both - fw.conj()).norm() < 1e-12,
                            "reality {su:?} {sw:?}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn ball_bracket_at_origin() {
    // {(v_1)_i, (v̄_1)_k} at v = 0 is (i/x)δ_ik.
    let a = UnitaryMat::identity(2);
    let x = -1.7;
    let m = MPoint::new(
        a.clone(),
        a,
        vec![BallVec::new(vec![C64::new(0.0, 0.0); 2], x).unwrap()],
    )
    .unwrap();
    let ctx = PointCtx::new(
        RawPoint::from_point(&m),
        BivectorKind::Standard(PencilParams::zero(1)),
    );
    for i in 0..2 {
        for k in 0..2 {
            let got = bk_conj(&ctx, Slot::V(0, i), Slot::V(0, k));
            let want = if i == k { C64::new(0.0, 1.0 / x) } else { C64::new(0.0, 0.0) };
            assert!((got - want).norm() < 1e-15);
        }
    }
    // Diagonal self-bracket vanishes by antisymmetry.
    let ctx2 = std_ctx(2, 2, 3);
    let z = bk(&ctx2, Slot::A(0, 1), Slot::A(0, 1));
    assert!(z.norm() < 1e-14);
}

#[test]
fn pencil_term_on_spin_pairs() {
    // {(v_1)_i, (v_2)_k}_z − {..}_0 = −z12 (v_1)_i (v_2)_k, and the
    // conjugated variant gains +z12.
    let p = raw(2, 2, 9);
    let z12 = 0.37;
    let z = PencilParams::new(2, vec![z12]).unwrap();
    let c0 = PointCtx::new(p.clone(), BivectorKind::Standard(PencilParams::zero(2)));
    let cz = PointCtx::new(p.clone(), BivectorKind::Standard(z));
    for i in 0..2 {
        for k in 0..2 {
            let dif = bk(&cz, Slot::V(0, i), Slot::V(1, k)) - bk(&c0, Slot::V(0, i), Slot::V(1, k));
            let want = -z12 * p.v[0][i] * p.v[1][k];
            assert!((dif - want).norm() < 1e-14);
            let difc =
                bk_conj(&cz, Slot::V(0, i), Slot::V(1, k)) - bk_conj(&c0, Slot::V(0, i), Slot::V(1, k));
            let wantc = z12 * p.v[0][i] * p.v[1][k].conj();
            assert!((difc - wantc).norm() < 1e-14);
        }
    }
}

#[test]
fn assemble_p_antisymmetric_and_affine() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let p = raw(2, 3, 4);
    let z1 = rand_pencil(3, &mut rng);
    let z2 = rand_pencil(3, &mut rng);
    let zsum = PencilParams::lincomb(1.0, &z1, 1.0, &z2);
    let assemble = |z: &PencilParams| {
        assemble_p(&PointCtx::new(p.clone(), BivectorKind::Standard(z.clone())))
    };
    let p0 = assemble(&PencilParams::zero(3));
    let p1 = assemble(&z1);
    let p2 = assemble(&z2);
    let ps = assemble(&zsum);
    let r = p0.len();
    for i in 0..r {
        for j in 0..r {
            assert!((p1[i][j] + p1[j][i]).abs() < 1e-12, "antisymmetry");
            // Superposition: P(z1+z2) − P(0) = (P(z1) − P(0)) + (P(z2) − P(0)).
            let lhs = ps[i][j] - p0[i][j];
            let rhs = (p1[i][j] - p0[i][j]) + (p2[i][j] - p0[i][j]);
            assert!((lhs - rhs).abs() < 1e-13, "pencil affinity");
        }
    }
}

#[test]
fn p_rank_is_manifold_dimension() {
    // Near (1, 1, 0, …, 0) the rank equals dim 𝓜_d = 2n² + 2nd.
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for (n, d) in [(2usize, 1usize), (2, 2)] {
        let eps = 1e-2;
        let da = crate::matlie::random_antiherm(n, eps, &mut rng);
        let db = crate::matlie::random_antiherm(n, eps, &mut rng);
        let a = crate::matlie::mat_exp(&crate::matlie::AntiHermMat::new_unchecked(da));
        let b = crate::matlie::mat_exp(&crate::matlie::AntiHermMat::new_unchecked(db));
        let balls = (0..d)
            .map(|alpha| {
                let v: Vec<C64> = (0..n)
                    .map(|_| C64::new(rng.gen_range(-eps..eps), rng.gen_range(-eps..eps)))
                    .collect();
                BallVec::new(v, xs_for(d)[alpha]).unwrap()
            })
            .collect();
        let m = MPoint::new(a, b, balls).unwrap();
        let mut zr = ChaCha8Rng::seed_from_u64(7);
        let z = rand_pencil(d, &mut zr);
        let ctx = PointCtx::new(RawPoint::from_point(&m), BivectorKind::Standard(z));
        let pm = assemble_p(&ctx);
        assert_eq!(p_rank(&pm, 1e-7), 2 * n * n + 2 * n * d, "n={n} d={d}");
    }
}

#[test]
fn hamiltonian_vf_matches_master_flow_form() {
    // H = h∘E1 gives (0, −B∇h(A), 0); H = h∘E2 gives (A∇h(B), 0, 0).
    let ctx = std_ctx(3, 2, 10);
    let h = ClassFn::parse("re_tr:1 + 0.4*im_tr:2").unwrap();
    let a = UnitaryMat::new_unchecked(ctx.p.a.clone());
    let b = UnitaryMat::new_unchecked(ctx.p.b.clone());

    let h1 = Observable::class_pull(&h, PullTarget::E1, 2);
    let x1 = hamiltonian_vf(&ctx, &h1);
    let want_db = -(ctx.p.b.clone() * h.grad(&a));
    assert!(x1.da.norm_fro() < 1e-10, "A is constant");
    assert!((x1.db.clone() - want_db).norm_fro() < 1e-10, "X_H(E2) = −E2 ∇h(E1)");
    for dv in &x1.dv {
        assert!(dv.iter().map(|z| z.norm()).sum::<f64>() < 1e-10);
    }

    let h2 = Observable::class_pull(&h, PullTarget::E2, 2);
    let x2 = hamiltonian_vf(&ctx, &h2);
    let want_da = ctx.p.a.clone() * h.grad(&b);
    assert!((x2.da.clone() - want_da).norm_fro() < 1e-10, "X_H(E1) = E1 ∇h(E2)");
    assert!(x2.db.norm_fro() < 1e-10);

    // Constant Hamiltonian gives the zero field.
    let hc = Observable::Scaled(C64::new(3.0, 0.0), Box::new(Observable::Radial(0)));
    let sum = Observable::Sum(vec![
        hc.clone(),
        Observable::Scaled(C64::new(-1.0, 0.0), Box::new(hc)),
    ]);
    let x0 = hamiltonian_vf(&ctx, &sum);
    assert!(x0.da.norm_fro() + x0.db.norm_fro() < 1e-14);
}

#[test]
fn cartan_trivector_properties() {
    let ctx = std_ctx(2, 2, 6);
    let basis = OrthBasis::new(2);
    let f_inv = Observable::Trace { word: MatWord::a_pow(1), conj: false };
    let g = Observable::entry(Slot::B(0, 1), false);
    let h = Observable::entry(Slot::V(0, 0), false);
    // Invariant first argument kills the trivector.
    let phi = cartan_trivector(&ctx, &basis, &f_inv, &g, &h);
    assert!(phi.norm() < 1e-12, "invariant argument");
    // Repeated argument kills it by antisymmetry.
    let phi2 = cartan_trivector(&ctx, &basis, &g, &g, &h);
    assert!(phi2.norm() < 1e-13);
    // Abelian case n = 1.
    let ctx1 = std_ctx(1, 1, 8);
    let basis1 = OrthBasis::new(1);
    let f1 = Observable::entry(Slot::A(0, 0), false);
    let g1 = Observable::entry(Slot::V(0, 0), false);
    let h1 = Observable::entry(Slot::V(0, 0), true);
    assert!(cartan_trivector(&ctx1, &basis1, &f1, &g1, &h1).norm() < 1e-15);
}

fn generator_pool(chart: &ChartIndex) -> Vec<(Slot, bool)> {
    let mut out = Vec::new();
    for cs in 0..chart.slots() {
        out.push((chart.slot_of(cs), false));
        out.push((chart.slot_of(cs), true));
    }
    out
}

#[test]
fn quasi_jacobi_on_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let (n, d) = (2, 2);
    let basis = OrthBasis::new(n);
    let p = raw(n, d, 55);
    let pool = generator_pool(&p.chart());
    for kindsel in 0..2 {
        let z = rand_pencil(d, &mut rng);
        let kind = if kindsel == 0 {
            BivectorKind::Standard(z)
        } else {
            BivectorKind::Degenerate(z)
        };
        for _ in 0..8 {
            let pick = |rng: &mut ChaCha8Rng| {
                let (s, c) = pool[rng.gen_range(0..pool.len())];
                Observable::entry(s, c)
            };
            let (f1, f2, f3) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let res = quasi_jacobi_residual(&p, &kind, &basis, &f1, &f2, &f3, 1e-5);
            assert!(res < 1e-6, "kind {kindsel}: residual {res}");
        }
    }
}

#[test]
fn jacobi_plain_on_invariants_and_abelian_case() {
    // Three invariant observables satisfy the ordinary Jacobi identity.
    let (n, d) = (2, 2);
    let p = raw(n, d, 56);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let kind = BivectorKind::Standard(rand_pencil(d, &mut rng));
    let f1 = Observable::Trace { word: MatWord::a_pow(1), conj: false };
    let f2 = Observable::ifn(1, 0, 1);
    let f3 = Observable::Radial(1);
    let jac = jacobiator(&p, &kind, &f1, &f2, &f3, 1e-5);
    assert!(jac.norm() < 1e-6, "invariant triple: {jac}");
    // n = d = 1: honest Poisson bracket, zero jacobiator on generators.
    let p1 = raw(1, 1, 57);
    let kind1 = BivectorKind::Standard(PencilParams::zero(1));
    let g1 = Observable::entry(Slot::A(0, 0), false);
    let g2 = Observable::entry(Slot::V(0, 0), false);
    let g3 = Observable::entry(Slot::V(0, 0), true);
    let jac1 = jacobiator(&p1, &kind1, &g1, &g2, &g3, 1e-5);
    assert!(jac1.norm() < 1e-8, "abelian case: {jac1}");
}

#[test]
fn momentmap_condition_both_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (n, d) in [(2usize, 2usize), (2, 1)] {
        let basis = OrthBasis::new(n);
        let z = rand_pencil(d, &mut rng);
        let p = raw(n, d, 60 + n as u64 + d as u64);
        let std = PointCtx::new(p.clone(), BivectorKind::Standard(z.clone()));
        let r_std = momentmap_residual(&std, &basis);
        assert!(r_std < 1e-8, "standard kind residual {r_std}");
        // Degenerate kind on the pushed point.
        let mut psi_p = p.clone();
        psi_p.b = &p.b * &p.a * p.b.dagger();
        let deg = PointCtx::new(psi_p, BivectorKind::Degenerate(z));
        let r_deg = momentmap_residual(&deg, &basis);
        assert!(r_deg < 1e-8, "degenerate kind residual {r_deg}");
    }
}

#[test]
fn ball_alone_moment_condition() {
    // At A = B = 1 the moment word reduces to the single ball factor and the
    // condition becomes Lemma-style: {Φ_ij, v_k} = ½δ_kj(Φv)_i + ½Φ_kj v_i.
    let n = 3;
    let x = 0.9;
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
        .collect();
    let a = UnitaryMat::identity(n);
    let m = MPoint::new(a.clone(), a, vec![BallVec::new(v.clone(), x).unwrap()]).unwrap();
    let ctx = PointCtx::new(
        RawPoint::from_point(&m),
        BivectorKind::Standard(PencilParams::zero(1)),
    );
    let phi = crate::phasespace::ball_exp(&v, x);
    let phiv = phi.mat().mulv(&v);
    for i in 0..n {
        for j in 0..n {
            let phi_ij = Observable::moment_entry(i, j, 1);
            for k in 0..n {
                let got = bracket(&ctx, &phi_ij, &Observable::entry(Slot::V(0, k), false));
                let want = C64::new(0.5, 0.0)
                    * (if k == j { phiv[i] } else { C64::new(0.0, 0.0) }
                        + phi.mat()[(k, j)] * v[i]);
                assert!((got - want).norm() < 1e-12, "Lemma-form moment condition");
            }
        }
    }
}

#[test]
fn psi_is_quasi_poisson_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let (n, d) = (2, 2);
    let p = raw(n, d, 70);
    let z = rand_pencil(d, &mut rng);
    let pool = generator_pool(&p.chart());
    for &f in &pool {
        for &g in &pool {
            let res = psi_morphism_residual(&p, &z, f, g);
            assert!(res < 1e-9, "pair {f:?} {g:?}: residual {res}");
        }
    }
}

#[test]
fn casimirs_and_centrality() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let (n, d) = (2, 2);
    let p = raw(n, d, 71);
    let z = rand_pencil(d, &mut rng);
    let std = PointCtx::new(p.clone(), BivectorKind::Standard(z.clone()));
    // Class functions of Φ Poisson-commute with invariant observables.
    let h = ClassFn::re_tr(1);
    let hphi = Observable::class_pull(&h, PullTarget::Moment, d);
    let invariants = [
        Observable::Trace { word: MatWord::a_pow(2), conj: false },
        Observable::ifn(1, 0, 1),
        Observable::Radial(0),
    ];
    for f in &invariants {
        let v = bracket(&std, &hphi, f);
        assert!(v.norm() < 1e-8, "Casimir upstairs: {v}");
    }
    // In the degenerate structure tr(A^ℓ) and tr(B̃^ℓ) are central.
    let mut psi_p = p.clone();
    psi_p.b = &p.b * &p.a * p.b.dagger();
    let deg = PointCtx::new(psi_p, BivectorKind::Degenerate(z));
    let chart = deg.chart;
    for l in 1..=n as i32 {
        let tra = Observable::Trace { word: MatWord::a_pow(l), conj: false };
        let trb = Observable::Trace {
            word: MatWord(vec![MatFactor::B; l as usize]),
            conj: false,
        };
        for cs in 0..chart.slots() {
            for conj in [false, true] {
                let g = Observable::entry(chart.slot_of(cs), conj);
                assert!(bracket(&deg, &tra, &g).norm() < 1e-10, "tr A^l central");
                assert!(bracket(&deg, &trb, &g).norm() < 1e-10, "tr B̃^l central");
            }
        }
    }
}

#[test]
fn invariant_bracket_is_invariant() {
    // {f, g}_z of invariants evaluated at m and at g·m agree.
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let (n, d) = (2, 2);
    let xs = xs_for(d);
    let mut prng = ChaCha8Rng::seed_from_u64(72);
    let m = random_point(n, d, &xs, &mut prng, BALL_MARGIN).unwrap();
    let g = crate::matlie::haar_random(n, &mut rng);
    let moved = crate::phasespace::act(&g, &m);
    let z = rand_pencil(d, &mut rng);
    let f1 = Observable::ifn(1, 0, 1);
    let f2 = Observable::ifn(2, 1, 0);
    let c1 = PointCtx::new(RawPoint::from_point(&m), BivectorKind::Standard(z.clone()));
    let c2 = PointCtx::new(RawPoint::from_point(&moved), BivectorKind::Standard(z));
    let v1 = bracket(&c1, &f1, &f2);
    let v2 = bracket(&c2, &f1, &f2);
    assert!((v1 - v2).norm() < 1e-9, "{v1} vs {v2}");
}

#[test]
fn bracket_reality_and_leibniz() {
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    let ctx = std_ctx(2, 2, 73);
    let pool = generator_pool(&ctx.chart);
    for _ in 0..20 {
        let (s1, c1) = pool[rng.gen_range(0..pool.len())];
        let (s2, c2) = pool[rng.gen_range(0..pool.len())];
        let f = Observable::entry(s1, c1);
        let g = Observable::entry(s2, c2);
        let fb = Observable::entry(s1, !c1);
        let gb = Observable::entry(s2, !c2);
        let plain = bracket(&ctx, &f, &g);
        let conjd = bracket(&ctx, &fb, &gb);
        assert!((conjd - plain.conj()).norm() < 1e-12, "reality");
        // Leibniz in the second argument against a product observable.
        let h = Observable::ifn(1, 0, 1);
        let prod = Observable::Product(Box::new(g.clone()), Box::new(h.clone()));
        let lhs = bracket(&ctx, &f, &prod);
        let rhs = bracket(&ctx, &f, &g) * h.value(&ctx) + g.value(&ctx) * bracket(&ctx, &f, &h);
        assert!((lhs - rhs).norm() < 1e-11, "Leibniz");
    }
}

#[test]
fn prop_c1_bracket_examples() {
    // {tr A, tr A²}_z = 0; {|v_α|², |v_γ|²}_z = 0;
    // {|v_α|², I^l_{γε}}_z = (i/x_α)(δ_αγ − δ_αε) I^l_{γε}.
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    let (n, d) = (2, 3);
    let p = raw(n, d, 74);
    let z = rand_pencil(d, &mut rng);
    let ctx = PointCtx::new(p.clone(), BivectorKind::Standard(z));
    let tr1 = Observable::Trace { word: MatWord::a_pow(1), conj: false };
    let tr2 = Observable::Trace { word: MatWord::a_pow(2), conj: false };
    assert!(bracket(&ctx, &tr1, &tr2).norm() < 1e-12);
    for alpha in 0..d {
        for gamma in 0..d {
            let ra = Observable::Radial(alpha);
            let rg = Observable::Radial(gamma);
            assert!(bracket(&ctx, &ra, &rg).norm() < 1e-12);
            for eps in 0..d {
                for l in 0..=2i32 {
                    let ifn = Observable::ifn(l, gamma, eps);
                    let got = bracket(&ctx, &ra, &ifn);
                    let coeff = (crate::bivector::tests::delta(alpha, gamma)
                        - crate::bivector::tests::delta(alpha, eps))
                        / p.x[alpha];
                    let want = C64::new(0.0, coeff) * ifn.value(&ctx);
                    assert!((got - want).norm() < 1e-11, "radial bracket law");
                }
            }
        }
    }
}

pub(crate) fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}
