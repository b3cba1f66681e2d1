//! Orthonormal basis of u(n) and the invariant inner product ⟨ξ,ζ⟩ = tr(ξζ†).

use num_complex::Complex64 as C64;

use super::cmat::{AntiHermMat, CMat};
use crate::error::{Error, Result};

/// Re tr(ξ ζ†); on u(n) this equals −tr(ξζ) and is the Ad-invariant inner
/// product used everywhere in this crate.
pub fn inner(xi: &AntiHermMat, zeta: &AntiHermMat) -> Result<f64> {
    if xi.n() != zeta.n() {
        return Err(Error::DimensionMismatch(xi.n(), zeta.n()));
    }
    Ok(inner_raw(xi.mat(), zeta.mat()))
}

/// Same pairing on raw matrices, for callers holding near-tangent data.
pub fn inner_raw(x: &CMat, z: &CMat) -> f64 {
    let n = x.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (x[(i, j)] * z[(i, j)].conj()).re;
        }
    }
    s
}

/// Standard orthonormal basis of u(n):
/// {iE_kk}, {(E_kl − E_lk)/√2}, {i(E_kl + E_lk)/√2} for k < l.
#[derive(Clone, Debug)]
pub struct OrthBasis {
    n: usize,
    elems: Vec<CMat>,
}

impl OrthBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let i = C64::new(0.0, 1.0);
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut elems = Vec::with_capacity(n * n);
        for k in 0..n {
            elems.push(CMat::elem(n, k, k, i));
        }
        for k in 0..n {
            for l in (k + 1)..n {
                elems.push(CMat::elem(n, k, l, s) - CMat::elem(n, l, k, s));
                elems.push(CMat::elem(n, k, l, i * s) + CMat::elem(n, l, k, i * s));
            }
        }
        OrthBasis { n, elems }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CMat> {
        self.elems.iter()
    }

    pub fn elem(&self, a: usize) -> &CMat {
        &self.elems[a]
    }

    /// Expand an anti-Hermitian matrix in the basis: ξ = Σ_a c_a e_a.
    pub fn coeffs(&self, xi: &CMat) -> Vec<f64> {
        self.elems.iter().map(|e| inner_raw(xi, e)).collect()
    }

    /// Structure constants C_abc = ⟨e_a, [e_b, e_c]⟩.
    pub fn structure_constants(&self) -> Vec<f64> {
        let m = self.len();
        let mut c = vec![0.0; m * m * m];
        for b in 0..m {
            for cc in 0..m {
                let br = CMat::comm(&self.elems[b], &self.elems[cc]);
                for a in 0..m {
                    c[(a * m + b) * m + cc] = inner_raw(&self.elems[a], &br);
                }
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlie::random::haar_random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_count_and_gram() {
        for n in 1..=4 {
            let b = OrthBasis::new(n);
            assert_eq!(b.len(), n * n);
            for (a, ea) in b.iter().enumerate() {
                assert!(ea.antiherm_residual() < 1e-15);
                for (c, ec) in b.iter().enumerate() {
                    let g = inner_raw(ea, ec);
                    let expect = if a == c { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn short_ee_contraction() {
        // Σ_a e_a M e_a = −tr(M)·1 follows from Σ_a e_a ⊗ e_a = −Σ E_kl ⊗ E_lk.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=4 {
            let basis = OrthBasis::new(n);
            let g = haar_random(n, &mut rng);
            let m = g.mat().scale(C64::new(1.3, -0.4));
            let mut lhs = CMat::zeros(n);
            for e in basis.iter() {
                lhs = lhs + e * &m * e;
            }
            let rhs = CMat::identity(n).scale(-m.trace());
            assert!((lhs - rhs).norm_fro() < 1e-12);
        }
    }

    #[test]
    fn short_ee_bilinear_contraction() {
        // Σ_a tr(X e_a) tr(Y e_a) = −tr(XY) by the same identity.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=4 {
            let basis = OrthBasis::new(n);
            let x = haar_random(n, &mut rng).into_mat().scale(C64::new(0.7, 0.2));
            let y = haar_random(n, &mut rng).into_mat().scale(C64::new(-0.3, 1.1));
            let lhs: C64 = basis.iter().map(|e| (&x * e).trace() * (&y * e).trace()).sum();
            let rhs = -(&x * &y).trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn ad_invariance_of_inner() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let g = haar_random(3, &mut rng);
            let xi = haar_random(3, &mut rng).into_mat().skew();
            let ze = haar_random(3, &mut rng).into_mat().skew();
            let adg = |m: &CMat| g.mat() * m * g.mat().dagger();
            let lhs = inner_raw(&adg(&xi), &adg(&ze));
            let rhs = inner_raw(&xi, &ze);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_of_projector() {
        let e = AntiHermMat::new_unchecked(CMat::elem(2, 0, 0, C64::new(0.0, 1.0)));
        assert!((inner(&e, &e).unwrap() - 1.0).abs() < 1e-15);
    }
}
