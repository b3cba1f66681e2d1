//! Projections onto the torus subalgebra and the classical dynamical
//! r-matrix R(Q) = ½((Ad_Q − id)|⊥)⁻¹ ∘ (Ad_Q + id) on off-diagonal u(n).

use num_complex::Complex64 as C64;

use super::cmat::CMat;
use super::eig::{DiagUnitary, DELTA_REG};
use crate::error::{Error, Result};

/// Diagonal part, the t(n) component.
pub fn project_t(xi: &CMat) -> CMat {
    CMat::from_fn(xi.n(), |i, j| if i == j { xi[(i, j)] } else { C64::new(0.0, 0.0) })
}

/// Off-diagonal part, the t(n)-orthogonal component.
pub fn project_tperp(xi: &CMat) -> CMat {
    CMat::from_fn(xi.n(), |i, j| if i != j { xi[(i, j)] } else { C64::new(0.0, 0.0) })
}

/// Entrywise cotangent kernel: (R(Q)ξ)_{jk} = −(i/2)·cot((q_j − q_k)/2)·ξ_{jk}
/// off the diagonal, zero on it.
pub fn rmatrix_apply(q: &DiagUnitary, xi: &CMat) -> Result<CMat> {
    let gap = q.min_gap();
    if q.n() > 1 && gap < DELTA_REG {
        return Err(Error::NearDegenerate(gap, DELTA_REG));
    }
    let ph = q.phases();
    Ok(CMat::from_fn(xi.n(), |j, k| {
        if j == k {
            C64::new(0.0, 0.0)
        } else {
            let half = 0.5 * (ph[j] - ph[k]);
            C64::new(0.0, -0.5 * (half.cos() / half.sin())) * xi[(j, k)]
        }
    }))
}

/// R(Q) evaluated from its operator definition: solve (Ad_Q − id)η = (Ad_Q + id)ξ_⊥
/// entry by entry as a numerical linear system. Oracle route for testing the
/// cotangent kernel; also reused by the reduced-flow right-hand side.
pub fn rmatrix_apply_operator(q: &DiagUnitary, xi: &CMat) -> Result<CMat> {
    let gap = q.min_gap();
    if q.n() > 1 && gap < DELTA_REG {
        return Err(Error::NearDegenerate(gap, DELTA_REG));
    }
    let n = q.n();
    let ph = q.phases();
    let mut out = CMat::zeros(n);
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let w = C64::from_polar(1.0, ph[j] - ph[k]);
            // 2x2 real system (a - 1)·η = (a + 1)·rhs over C viewed as R².
            let rhs = (w + C64::new(1.0, 0.0)) * xi[(j, k)] * 0.5;
            let a = w - C64::new(1.0, 0.0);
            let det = a.norm_sqr();
            out[(j, k)] = a.conj() * rhs / det;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlie::random::random_antiherm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projections_split_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xi = random_antiherm(4, 1.0, &mut rng);
        let t = project_t(&xi);
        let p = project_tperp(&xi);
        assert!((t + p - xi).norm_fro() == 0.0);
    }

    #[test]
    fn projection_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xi = random_antiherm(3, 1.0, &mut rng);
        let ze = random_antiherm(3, 1.0, &mut rng);
        let ip = crate::matlie::basis::inner_raw(&project_t(&xi), &project_tperp(&ze));
        assert_eq!(ip, 0.0);
    }

    #[test]
    fn rmatrix_kills_diagonal() {
        let q = DiagUnitary::new(vec![0.3, 1.1, -2.0]);
        let xi = CMat::from_fn(3, |i, j| {
            if i == j {
                C64::new(0.0, (i + 1) as f64)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let r = rmatrix_apply(&q, &xi).unwrap();
        assert_eq!(r.norm_fro(), 0.0);
    }

    #[test]
    fn rmatrix_cot_zero_at_half_turn() {
        // q = (0, π): cot(±π/2) = 0, so the kernel annihilates E12 − E21.
        let q = DiagUnitary::new(vec![0.0, std::f64::consts::PI]);
        let xi = CMat::elem(2, 0, 1, C64::new(1.0, 0.0)) - CMat::elem(2, 1, 0, C64::new(1.0, 0.0));
        let r = rmatrix_apply(&q, &xi).unwrap();
        assert!(r.norm_fro() < 1e-15);
    }

    #[test]
    fn rmatrix_matches_operator_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = 3;
            let phases: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let q = DiagUnitary::new(phases);
            if !q.is_regular(1e-3) {
                continue;
            }
            let xi = random_antiherm(n, 1.0, &mut rng);
            let a = rmatrix_apply(&q, &xi).unwrap();
            let b = rmatrix_apply_operator(&q, &xi).unwrap();
            assert!((a.clone() - b).norm_fro() < 1e-10);
            assert!(a.antiherm_residual() < 1e-12, "output must stay in u(n)");
        }
    }

    #[test]
    fn rmatrix_rejects_degenerate() {
        let q = DiagUnitary::new(vec![0.5, 0.5 + 1e-9]);
        let xi = CMat::elem(2, 0, 1, C64::new(1.0, 0.0)) - CMat::elem(2, 1, 0, C64::new(1.0, 0.0));
        assert!(matches!(rmatrix_apply(&q, &xi), Err(Error::NearDegenerate(_, _))));
    }
}
