//! Dense complex square matrices at desk scale (n ≤ 8) and the wrappers
//! enforcing unitarity / anti-hermiticity.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const UNITARITY_TOL: f64 = 1e-10;

/// Square complex matrix, row major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat[{}x{}]", self.n, self.n)?;
        for i in 0..self.n {
            for j in 0..self.n {
                write!(f, " {:+.4}{:+.4}i", self[(i, j)].re, self[(i, j)].im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        Self::from_fn(n, |i, j| rows[i][j])
    }

    /// Elementary matrix E_kl scaled by `c`.
    pub fn elem(n: usize, k: usize, l: usize, c: C64) -> Self {
        let mut m = Self::zeros(n);
        m[(k, l)] = c;
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn conj_entrywise(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(i, j)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: C64) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Matrix-vector product.
    pub fn mulv(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Commutator [a, b] = ab - ba.
    pub fn comm(a: &CMat, b: &CMat) -> CMat {
        a * b - b * a
    }

    /// Anti-Hermitian part (m - m†)/2.
    pub fn skew(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| (self[(i, j)] - self[(j, i)].conj()) * 0.5)
    }

    /// Hermitian part (m + m†)/2.
    pub fn herm(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Integer power; negative exponents use the conjugate transpose, so the
    /// receiver must be unitary for k < 0 to mean an inverse.
    pub fn pow_unitary(&self, k: i32) -> CMat {
        if k == 0 {
            return CMat::identity(self.n);
        }
        let base = if k > 0 { self.clone() } else { self.dagger() };
        let mut out = base.clone();
        for _ in 1..k.abs() {
            out = &out * &base;
        }
        out
    }

    pub fn unitarity_residual(&self) -> f64 {
        (self * &self.dagger() - CMat::identity(self.n)).norm_fro()
    }

    pub fn antiherm_residual(&self) -> f64 {
        (self + &self.dagger()).norm_fro()
    }

    /// Solve m x = b by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch(n, b.len()));
        }
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| {
                    a[p * n + col].norm().partial_cmp(&a[q * n + col].norm()).unwrap()
                })
                .unwrap();
            if a[piv * n + col].norm() < 1e-14 {
                return Err(Error::Config("singular linear system".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = a[col * n + col];
            for row in (col + 1)..n {
                let f = a[row * n + col] / d;
                if f.norm() == 0.0 {
                    continue;
                }
                for j in col..n {
                    let t = a[col * n + j];
                    a[row * n + j] -= f * t;
                }
                let t = x[col];
                x[row] -= f * t;
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in (col + 1)..n {
                s -= a[col * n + j] * x[j];
            }
            x[col] = s / a[col * n + col];
        }
        Ok(x)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

macro_rules! impl_binop {
    ($trait:ident, $meth:ident, $op:tt) => {
        impl $trait for &CMat {
            type Output = CMat;
            fn $meth(self, rhs: &CMat) -> CMat {
                assert_eq!(self.n, rhs.n);
                CMat {
                    n: self.n,
                    data: self
                        .data
                        .iter()
                        .zip(rhs.data.iter())
                        .map(|(a, b)| a $op b)
                        .collect(),
                }
            }
        }
        impl $trait for CMat {
            type Output = CMat;
            fn $meth(self, rhs: CMat) -> CMat {
                (&self).$meth(&rhs)
            }
        }
        impl $trait<&CMat> for CMat {
            type Output = CMat;
            fn $meth(self, rhs: &CMat) -> CMat {
                (&self).$meth(rhs)
            }
        }
        impl $trait<CMat> for &CMat {
            type Output = CMat;
            fn $meth(self, rhs: CMat) -> CMat {
                self.$meth(&rhs)
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Mul for CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        &self * &rhs
    }
}
impl Mul<&CMat> for CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        &self * rhs
    }
}
impl Mul<CMat> for &CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        self * &rhs
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale(C64::new(-1.0, 0.0))
    }
}
impl Neg for CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        -&self
    }
}

/// Unitary matrix: ‖U U† − 1‖_F within tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMat(CMat);

impl UnitaryMat {
    pub fn new(m: CMat) -> Result<Self> {
        let r = m.unitarity_residual();
        if !m.is_finite() || r > UNITARITY_TOL {
            return Err(Error::Config(format!("unitarity residual {r:.3e}")));
        }
        Ok(UnitaryMat(m))
    }

    /// Skip validation; for matrices produced by constructions that are
    /// unitary by algebra (products of unitaries, exponentials).
    pub fn new_unchecked(m: CMat) -> Self {
        UnitaryMat(m)
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMat(CMat::identity(n))
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn inv(&self) -> UnitaryMat {
        UnitaryMat(self.0.dagger())
    }
}

/// Anti-Hermitian matrix, the u(n) model.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiHermMat(CMat);

impl AntiHermMat {
    pub fn new(m: CMat) -> Result<Self> {
        let r = m.antiherm_residual();
        if !m.is_finite() || r > UNITARITY_TOL {
            return Err(Error::Config(format!("anti-hermiticity residual {r:.3e}")));
        }
        Ok(AntiHermMat(m))
    }

    pub fn new_unchecked(m: CMat) -> Self {
        AntiHermMat(m)
    }

    pub fn zero(n: usize) -> Self {
        AntiHermMat(CMat::zeros(n))
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }
}

// --- complex vector helpers -------------------------------------------------

/// v† w.
pub fn vdot(v: &[C64], w: &[C64]) -> C64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

pub fn vnorm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Outer product v w†.
pub fn outer(v: &[C64], w: &[C64]) -> CMat {
    assert_eq!(v.len(), w.len());
    CMat::from_fn(v.len(), |i, j| v[i] * w[j].conj())
}

pub fn vsub(v: &[C64], w: &[C64]) -> Vec<C64> {
    v.iter().zip(w).map(|(a, b)| a - b).collect()
}

pub fn vadd(v: &[C64], w: &[C64]) -> Vec<C64> {
    v.iter().zip(w).map(|(a, b)| a + b).collect()
}

pub fn vscale(v: &[C64], c: C64) -> Vec<C64> {
    v.iter().map(|z| z * c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mul_and_dagger() {
        let a = CMat::from_fn(2, |i, j| c((i + 2 * j) as f64, 1.0));
        let b = CMat::from_fn(2, |i, j| c(1.0, (i * j) as f64));
        let ab = &a * &b;
        let check = (ab.dagger() - b.dagger() * a.dagger()).norm_fro();
        assert!(check < 1e-14);
    }

    #[test]
    fn solve_roundtrip() {
        let a = CMat::from_rows(&[
            vec![c(2.0, 1.0), c(0.5, -0.3)],
            vec![c(-1.0, 0.2), c(3.0, 0.0)],
        ]);
        let x = vec![c(1.0, -2.0), c(0.25, 0.75)];
        let b = a.mulv(&x);
        let got = a.solve(&b).unwrap();
        for (u, v) in got.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn pow_unitary_negative_is_inverse() {
        let th = 0.37f64;
        let u = CMat::from_rows(&[
            vec![c(th.cos(), 0.0), c(-th.sin(), 0.0)],
            vec![c(th.sin(), 0.0), c(th.cos(), 0.0)],
        ]);
        let p = u.pow_unitary(3) * u.pow_unitary(-3);
        assert!((p - CMat::identity(2)).norm_fro() < 1e-14);
    }
}
