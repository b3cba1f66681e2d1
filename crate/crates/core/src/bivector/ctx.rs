//! Per-point evaluation context: which bivector of the family is meant and
//! the matrix products the bracket tables read.

use num_complex::Complex64 as C64;

use super::chart::{ChartIndex, RawPoint};
use crate::error::{Error, Result};
use crate::matlie::{vdot, CMat};
use crate::scalars;

/// Pencil parameters z_{αβ}, stored for α < β, with the antisymmetric
/// extension z*_{βα} = −z_{αβ} available through [`PencilParams::zstar`].
#[derive(Clone, Debug, PartialEq)]
pub struct PencilParams {
    d: usize,
    z: Vec<f64>,
}

impl PencilParams {
    pub fn zero(d: usize) -> Self {
        PencilParams { d, z: vec![0.0; d * (d - 1) / 2] }
    }

    pub fn new(d: usize, z: Vec<f64>) -> Result<Self> {
        if z.len() != d * (d - 1) / 2 {
            return Err(Error::Config(format!(
                "pencil needs d(d-1)/2 = {} entries, got {}",
                d * (d - 1) / 2,
                z.len()
            )));
        }
        Ok(PencilParams { d, z })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn upper(&self) -> &[f64] {
        &self.z
    }

    fn pos(&self, alpha: usize, beta: usize) -> usize {
        // Row-major upper triangle: (0,1), (0,2), ..., (1,2), ...
        debug_assert!(alpha < beta && beta < self.d);
        alpha * self.d - alpha * (alpha + 1) / 2 + (beta - alpha - 1)
    }

    /// Antisymmetric extension z*_{αβ}.
    pub fn zstar(&self, alpha: usize, beta: usize) -> f64 {
        use std::cmp::Ordering::*;
        match alpha.cmp(&beta) {
            Equal => 0.0,
            Less => self.z[self.pos(alpha, beta)],
            Greater => -self.z[self.pos(beta, alpha)],
        }
    }

    /// Linear combination c1·z1 + c2·z2 (for superposition tests).
    pub fn lincomb(c1: f64, z1: &PencilParams, c2: f64, z2: &PencilParams) -> PencilParams {
        assert_eq!(z1.d, z2.d);
        PencilParams {
            d: z1.d,
            z: z1.z.iter().zip(&z2.z).map(|(a, b)| c1 * a + c2 * b).collect(),
        }
    }
}

/// Which member of the family of quasi-Poisson structures to evaluate.
#[derive(Clone, Debug, PartialEq)]
pub enum BivectorKind {
    /// P_z on 𝓜_d: internally fused double block plus pencil term.
    Standard(PencilParams),
    /// P_{z,c}: the degenerate double block for the (A, B̃) pair.
    Degenerate(PencilParams),
}

impl BivectorKind {
    pub fn pencil(&self) -> &PencilParams {
        match self {
            BivectorKind::Standard(z) | BivectorKind::Degenerate(z) => z,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, BivectorKind::Degenerate(_))
    }
}

/// Point context: the raw point plus every product the fundamental tables
/// and the observable catalog need.
pub struct PointCtx {
    pub p: RawPoint,
    pub kind: BivectorKind,
    pub chart: ChartIndex,
    pub a2: CMat,
    pub b2: CMat,
    pub ab: CMat,
    pub ba: CMat,
    pub adag: CMat,
    pub bdag: CMat,
    pub ab_dag: CMat,  // A B†
    pub bdag_a: CMat,  // B† A
    pub b_adag: CMat,  // B A†
    pub adag_b: CMat,  // A† B
    pub av: Vec<Vec<C64>>,
    pub bv: Vec<Vec<C64>>,
    pub vdag_a: Vec<Vec<C64>>, // (v_α† A)_j
    pub vdag_b: Vec<Vec<C64>>,
    /// gram[β][α] = v_β† v_α.
    pub gram: Vec<Vec<C64>>,
    pub s: Vec<f64>,
    pub bfn: Vec<f64>,
}

impl PointCtx {
    pub fn new(p: RawPoint, kind: BivectorKind) -> Self {
        Self::build(p, kind, None)
    }

    /// Context with the b(x_α|v_α|²) values replaced by a caller-supplied
    /// linearization. The finite-difference jacobiator uses this so the only
    /// transcendental factor of the tables is differentiated analytically;
    /// everything the stencil sees is then polynomial in the chart.
    pub fn with_b_override(p: RawPoint, kind: BivectorKind, bfn: Vec<f64>) -> Self {
        Self::build(p, kind, Some(bfn))
    }

    fn build(p: RawPoint, kind: BivectorKind, bfn_override: Option<Vec<f64>>) -> Self {
        let n = p.n();
        let d = p.d();
        assert_eq!(kind.pencil().d(), d, "pencil dimension mismatch");
        let chart = ChartIndex::new(n, d);
        let adag = p.a.dagger();
        let bdag = p.b.dagger();
        let a2 = &p.a * &p.a;
        let b2 = &p.b * &p.b;
        let ab = &p.a * &p.b;
        let ba = &p.b * &p.a;
        let ab_dag = &p.a * &bdag;
        let bdag_a = &bdag * &p.a;
        let b_adag = &p.b * &adag;
        let adag_b = &adag * &p.b;
        let av: Vec<_> = p.v.iter().map(|v| p.a.mulv(v)).collect();
        let bv: Vec<_> = p.v.iter().map(|v| p.b.mulv(v)).collect();
        let vdag_a: Vec<_> = p
            .v
            .iter()
            .map(|v| {
                (0..n)
                    .map(|j| (0..n).map(|q| v[q].conj() * p.a[(q, j)]).sum())
                    .collect()
            })
            .collect();
        let vdag_b: Vec<_> = p
            .v
            .iter()
            .map(|v| {
                (0..n)
                    .map(|j| (0..n).map(|q| v[q].conj() * p.b[(q, j)]).sum())
                    .collect()
            })
            .collect();
        let gram: Vec<Vec<C64>> = (0..d)
            .map(|beta| (0..d).map(|alpha| vdot(&p.v[beta], &p.v[alpha])).collect())
            .collect();
        let s: Vec<f64> = (0..d).map(|alpha| gram[alpha][alpha].re).collect();
        let bfn: Vec<f64> = bfn_override.unwrap_or_else(|| {
            (0..d)
                .map(|alpha| scalars::b_unchecked(p.x[alpha] * s[alpha]))
                .collect()
        });
        PointCtx {
            p,
            kind,
            chart,
            a2,
            b2,
            ab,
            ba,
            adag,
            bdag,
            ab_dag,
            bdag_a,
            b_adag,
            adag_b,
            av,
            bv,
            vdag_a,
            vdag_b,
            gram,
            s,
            bfn,
        }
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn d(&self) -> usize {
        self.p.d()
    }
}
