//! Seeded random matrices. Haar sampling goes through QR of a complex
//! Gaussian matrix with the R-diagonal phase correction.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::cmat::{vdot, CMat, UnitaryMat};

fn gaussian_c64(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary matrix, deterministic for a fixed RNG state.
pub fn haar_random(n: usize, rng: &mut impl Rng) -> UnitaryMat {
    let g = CMat::from_fn(n, |_, _| gaussian_c64(rng));
    // Modified Gram-Schmidt with one re-orthogonalization pass.
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| g[(i, j)]).collect())
        .collect();
    let mut rdiag = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let proj = vdot(&cols[k], &cols[j]);
                let prev = cols[k].clone();
                for (cj, ck) in cols[j].iter_mut().zip(&prev) {
                    *cj -= proj * ck;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
        // Phase of what would be R_jj: overlap of the original column with
        // the orthonormalized one.
        let orig: Vec<C64> = (0..n).map(|i| g[(i, j)]).collect();
        rdiag[j] = vdot(&cols[j], &orig);
    }
    let q = CMat::from_fn(n, |i, j| cols[j][i] * (rdiag[j] / rdiag[j].norm()));
    UnitaryMat::new_unchecked(q)
}

/// Random u(n) element with independent Gaussian coefficients in the
/// orthonormal basis, scaled to a target Frobenius norm.
pub fn random_antiherm(n: usize, scale: f64, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(n, |_, _| gaussian_c64(rng));
    let s = g.skew();
    let norm = s.norm_fro().max(1e-300);
    s.scale(C64::new(scale / norm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary_and_deterministic() {
        for n in 1..=5 {
            let mut r1 = ChaCha8Rng::seed_from_u64(42);
            let mut r2 = ChaCha8Rng::seed_from_u64(42);
            let u1 = haar_random(n, &mut r1);
            let u2 = haar_random(n, &mut r2);
            assert!(u1.mat().unitarity_residual() < 1e-12);
            assert_eq!(u1.mat(), u2.mat(), "haar sampling must be reproducible");
        }
    }

    #[test]
    fn haar_first_entry_moment() {
        // E|U_11|^2 = 1/n for Haar measure; Monte-Carlo with 10^4 samples.
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let samples = 10_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..samples {
            let u = haar_random(n, &mut rng);
            let x = u.mat()[(0, 0)].norm_sqr();
            acc += x;
            acc2 += x * x;
        }
        let mean = acc / samples as f64;
        let var = acc2 / samples as f64 - mean * mean;
        let sigma = (var / samples as f64).sqrt();
        assert!(
            (mean - 1.0 / n as f64).abs() < 3.0 * sigma,
            "mean {mean} vs {} (σ {sigma})",
            1.0 / n as f64
        );
    }
}
