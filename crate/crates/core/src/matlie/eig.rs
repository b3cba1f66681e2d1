//! Eigendecompositions for the unitary-group numerics.
//!
//! Everything here targets small dense matrices, so a complex Jacobi sweep is
//! accurate and has no failure modes worth trading for a LAPACK dependency.
//! Unitary matrices are diagonalized through the commuting Hermitian pair
//! (U + U†)/2 and (U − U†)/(2i): eigenvectors of the first are refined inside
//! degenerate clusters by the second, which pins the full eigenphase.

use num_complex::Complex64 as C64;

use super::cmat::{AntiHermMat, CMat, UnitaryMat};
use crate::error::{Error, Result};

/// Regularity threshold on eigenphase gaps (radians).
pub const DELTA_REG: f64 = 1e-6;

const JACOBI_TOL: f64 = 1e-15;
const CLUSTER_TOL: f64 = 1e-8;

/// Diagonal unitary, stored by its phases q_j with Q = diag(e^{i q_j}).
#[derive(Clone, Debug, PartialEq)]
pub struct DiagUnitary {
    phases: Vec<f64>,
}

impl DiagUnitary {
    pub fn new(phases: Vec<f64>) -> Self {
        DiagUnitary { phases }
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn as_matrix(&self) -> CMat {
        let mut m = CMat::zeros(self.phases.len());
        for (j, &q) in self.phases.iter().enumerate() {
            m[(j, j)] = C64::from_polar(1.0, q);
        }
        m
    }

    /// Smallest circular distance between two phases.
    pub fn min_gap(&self) -> f64 {
        let n = self.phases.len();
        if n < 2 {
            return std::f64::consts::TAU;
        }
        let mut gap = f64::MAX;
        for j in 0..n {
            for k in (j + 1)..n {
                let d = (self.phases[j] - self.phases[k]).rem_euclid(std::f64::consts::TAU);
                gap = gap.min(d.min(std::f64::consts::TAU - d));
            }
        }
        gap
    }

    pub fn is_regular(&self, delta: f64) -> bool {
        self.min_gap() > delta
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
/// Returns (eigenvalues, V) with h = V diag(λ) V†, eigenvalues unsorted.
pub fn hermitian_eig(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.n();
    let mut a = h.clone();
    let mut v = CMat::identity(n);
    let scale = h.norm_fro().max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= JACOBI_TOL * scale {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Unitary 2x2 rotation diagonalizing [[app, apq], [conj(apq), aqq]].
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                let cp = phase * s;
                // Columns p, q of a and v: right-multiply by the rotation.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * cp.conj();
                    a[(i, q)] = -aip * cp + aiq * c;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * cp.conj();
                    v[(i, q)] = -vip * cp + viq * c;
                }
                // Rows p, q: left-multiply by the adjoint rotation.
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * cp;
                    a[(q, j)] = -apj * cp.conj() + aqj * c;
                }
            }
        }
    }
    let evals = (0..n).map(|i| a[(i, i)].re).collect();
    (evals, v)
}

/// Result of a unitary eigendecomposition U = C Q C⁻¹.
#[derive(Clone, Debug)]
pub struct UnitaryEig {
    pub q: DiagUnitary,
    pub c: UnitaryMat,
    /// Set when the minimal phase gap fell below [`DELTA_REG`]; the
    /// decomposition is still returned.
    pub degenerate: bool,
}

/// Diagonalize a unitary matrix with the deterministic convention: phases
/// ascending in (−π, π], each eigenvector column scaled so its
/// largest-modulus entry is real positive.
pub fn unitary_eig(u: &UnitaryMat) -> UnitaryEig {
    let n = u.n();
    let um = u.mat();
    let h = um.herm();
    let k = (um - &um.dagger()).scale(C64::new(0.0, -0.5));
    let (hvals, mut v) = hermitian_eig(&h);

    // Refine within clusters of equal cos-eigenvalue using the sine part.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| hvals[i].partial_cmp(&hvals[j]).unwrap());
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (hvals[order[end]] - hvals[order[start]]).abs() < CLUSTER_TOL {
            end += 1;
        }
        if end - start > 1 {
            let idx = &order[start..end];
            let m = idx.len();
            let block = CMat::from_fn(m, |r, s| {
                let (cr, cs) = (idx[r], idx[s]);
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| v[(i, cr)].conj() * k[(i, j)] * v[(j, cs)])
                            .sum::<C64>()
                    })
                    .sum()
            });
            let (_, w) = hermitian_eig(&block.herm());
            let old: Vec<Vec<C64>> = idx
                .iter()
                .map(|&col| (0..n).map(|i| v[(i, col)]).collect())
                .collect();
            for (s, &col) in idx.iter().enumerate() {
                for i in 0..n {
                    v[(i, col)] = (0..m).map(|r| old[r][i] * w[(r, s)]).sum();
                }
            }
        }
        start = end;
    }

    // Eigenphases from Rayleigh quotients; wrap into (−π, π].
    let mut pairs: Vec<(f64, usize)> = (0..n)
        .map(|col| {
            let uv = um.mulv(&(0..n).map(|i| v[(i, col)]).collect::<Vec<_>>());
            let ray: C64 = (0..n).map(|i| v[(i, col)].conj() * uv[i]).sum();
            let mut q = ray.arg();
            if q <= -std::f64::consts::PI + 1e-300 {
                q = std::f64::consts::PI;
            }
            (q, col)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let mut c = CMat::zeros(n);
    let mut phases = Vec::with_capacity(n);
    for (slot, (q, col)) in pairs.into_iter().enumerate() {
        phases.push(q);
        let column: Vec<C64> = (0..n).map(|i| v[(i, col)]).collect();
        // Positive-real pivot on the largest-modulus entry, lowest index wins ties.
        let mut pivot = 0;
        for i in 1..n {
            if column[i].norm() > column[pivot].norm() + 1e-15 {
                pivot = i;
            }
        }
        let ph = column[pivot] / column[pivot].norm();
        for i in 0..n {
            c[(i, slot)] = column[i] * ph.conj();
        }
    }

    let q = DiagUnitary::new(phases);
    let degenerate = !q.is_regular(DELTA_REG);
    UnitaryEig { q, c: UnitaryMat::new_unchecked(c), degenerate }
}

/// exp of an anti-Hermitian matrix, computed by eigendecomposition of iξ.
pub fn mat_exp(xi: &AntiHermMat) -> UnitaryMat {
    let m = xi.mat().scale(C64::new(0.0, 1.0));
    let (vals, v) = hermitian_eig(&m.herm());
    let n = xi.n();
    let mut out = CMat::zeros(n);
    for a in 0..n {
        let e = C64::from_polar(1.0, -vals[a]);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[(i, a)] * e * v[(j, a)].conj();
            }
        }
    }
    UnitaryMat::new_unchecked(out)
}

/// Principal logarithm with eigenphases in (−π, π).
pub fn mat_log(u: &UnitaryMat) -> Result<AntiHermMat> {
    let dec = unitary_eig(u);
    let n = u.n();
    for &q in dec.q.phases() {
        if (std::f64::consts::PI - q.abs()) < 1e-8 {
            return Err(Error::BranchCut(q, 1e-8));
        }
    }
    let c = dec.c.mat();
    let mut out = CMat::zeros(n);
    for a in 0..n {
        let e = C64::new(0.0, dec.q.phases()[a]);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += c[(i, a)] * e * c[(j, a)].conj();
            }
        }
    }
    Ok(AntiHermMat::new_unchecked(out.skew()))
}

/// Nearest unitary in Frobenius norm (polar factor), via m (m†m)^{-1/2}.
pub fn polar_unitary(m: &CMat) -> UnitaryMat {
    let gram = m.dagger() * m;
    let (vals, v) = hermitian_eig(&gram.herm());
    let n = m.n();
    let mut isqrt = CMat::zeros(n);
    for a in 0..n {
        let s = C64::new(vals[a].max(1e-300).sqrt().recip(), 0.0);
        for i in 0..n {
            for j in 0..n {
                isqrt[(i, j)] += v[(i, a)] * s * v[(j, a)].conj();
            }
        }
    }
    UnitaryMat::new_unchecked(m * isqrt)
}
