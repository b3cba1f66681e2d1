//! Observable catalog: scalar functions on the chart carrying a value and an
//! analytic directional derivative. Gradients over the real chart follow by
//! pairing with unit displacements; a finite-difference self-check lives in
//! the tests.

use num_complex::Complex64 as C64;

use super::chart::{RawPoint, RawTangent, Slot};
use super::ctx::PointCtx;
use crate::matlie::{outer, vdot, ClassFn, CMat, TracePart};
use crate::scalars;

/// One factor of a matrix word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatFactor {
    A,
    ADag,
    B,
    BDag,
    /// B A B† (the Ψ-pushed second component as a function of (A, B)).
    Bab,
    /// Rank-1 exponential E_α = exp(i x_α v_α v_α†), closed form.
    Ball(usize),
    /// v_α v_β†.
    VV(usize, usize),
}

impl MatFactor {
    fn value(self, p: &RawPoint) -> CMat {
        match self {
            MatFactor::A => p.a.clone(),
            MatFactor::ADag => p.a.dagger(),
            MatFactor::B => p.b.clone(),
            MatFactor::BDag => p.b.dagger(),
            MatFactor::Bab => &p.b * &p.a * p.b.dagger(),
            MatFactor::Ball(alpha) => {
                let s = crate::matlie::vnorm_sqr(&p.v[alpha]);
                let g = C64::new(0.0, p.x[alpha]) * scalars::c_fn(p.x[alpha] * s);
                CMat::identity(p.n()) + outer(&p.v[alpha], &p.v[alpha]).scale(g)
            }
            MatFactor::VV(alpha, beta) => outer(&p.v[alpha], &p.v[beta]),
        }
    }

    fn diff(self, p: &RawPoint, t: &RawTangent) -> CMat {
        match self {
            MatFactor::A => t.da.clone(),
            MatFactor::ADag => t.da.dagger(),
            MatFactor::B => t.db.clone(),
            MatFactor::BDag => t.db.dagger(),
            MatFactor::Bab => {
                &t.db * &p.a * p.b.dagger()
                    + &p.b * &t.da * p.b.dagger()
                    + &p.b * &p.a * t.db.dagger()
            }
            MatFactor::Ball(alpha) => {
                let v = &p.v[alpha];
                let dv = &t.dv[alpha];
                let x = p.x[alpha];
                let s = crate::matlie::vnorm_sqr(v);
                let ds = 2.0 * vdot(v, dv).re;
                let g = C64::new(0.0, x) * scalars::c_fn(x * s);
                let dg = C64::new(0.0, x) * scalars::c_prime(x * s) * (x * ds);
                (outer(dv, v) + outer(v, dv)).scale(g) + outer(v, v).scale(dg)
            }
            MatFactor::VV(alpha, beta) => {
                outer(&t.dv[alpha], &p.v[beta]) + outer(&p.v[alpha], &t.dv[beta])
            }
        }
    }
}

/// A product of factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatWord(pub Vec<MatFactor>);

impl MatWord {
    pub fn moment(d: usize) -> Self {
        let mut f = vec![MatFactor::A, MatFactor::B, MatFactor::ADag, MatFactor::BDag];
        f.extend((0..d).map(MatFactor::Ball));
        MatWord(f)
    }

    /// Φ̃ = A B̃⁻¹ E_1 ⋯ E_d on a degenerate-target point (B slot holds B̃).
    pub fn tilde_moment(d: usize) -> Self {
        let mut f = vec![MatFactor::A, MatFactor::BDag];
        f.extend((0..d).map(MatFactor::Ball));
        MatWord(f)
    }

    /// A^k with the conjugate transpose for negative powers.
    pub fn a_pow(k: i32) -> Self {
        let f = if k >= 0 { MatFactor::A } else { MatFactor::ADag };
        MatWord(vec![f; k.unsigned_abs() as usize])
    }

    pub fn value(&self, p: &RawPoint) -> CMat {
        let mut out = CMat::identity(p.n());
        for f in &self.0 {
            out = out * f.value(p);
        }
        out
    }

    pub fn diff(&self, p: &RawPoint, t: &RawTangent) -> CMat {
        let n = p.n();
        let vals: Vec<CMat> = self.0.iter().map(|f| f.value(p)).collect();
        // Prefix and suffix products around each factor.
        let mut prefix = vec![CMat::identity(n)];
        for v in &vals {
            prefix.push(prefix.last().unwrap() * v);
        }
        let mut suffix = vec![CMat::identity(n); vals.len() + 1];
        for (idx, v) in vals.iter().enumerate().rev() {
            suffix[idx] = v * &suffix[idx + 1];
        }
        let mut out = CMat::zeros(n);
        for (q, f) in self.0.iter().enumerate() {
            out = out + &prefix[q] * f.diff(p, t) * &suffix[q + 1];
        }
        out
    }
}

/// Scalar observable on the chart.
#[derive(Clone, Debug)]
pub enum Observable {
    /// Entry (word)_{ij}, optionally conjugated.
    Entry { word: MatWord, i: usize, j: usize, conj: bool },
    /// Component (v_α)_k, optionally conjugated.
    VComp { alpha: usize, k: usize, conj: bool },
    /// tr(word), optionally conjugated.
    Trace { word: MatWord, conj: bool },
    /// |v_α|².
    Radial(usize),
    /// b(x_α |v_α|²).
    StructB(usize),
    Scaled(C64, Box<Observable>),
    Sum(Vec<Observable>),
    Product(Box<Observable>, Box<Observable>),
    Re(Box<Observable>),
    Im(Box<Observable>),
}

impl Observable {
    pub fn entry(slot: Slot, conj: bool) -> Self {
        match slot {
            Slot::A(i, j) => {
                Observable::Entry { word: MatWord(vec![MatFactor::A]), i, j, conj }
            }
            Slot::B(i, j) => {
                Observable::Entry { word: MatWord(vec![MatFactor::B]), i, j, conj }
            }
            Slot::V(alpha, k) => Observable::VComp { alpha, k, conj },
        }
    }

    /// I^k_{αβ} = v_α† A^k v_β = tr(v_β v_α† A^k).
    pub fn ifn(k: i32, alpha: usize, beta: usize) -> Self {
        let mut factors = vec![MatFactor::VV(beta, alpha)];
        factors.extend(MatWord::a_pow(k).0);
        Observable::Trace { word: MatWord(factors), conj: false }
    }

    /// Pullback of a class function through A, B, Φ or Φ̃.
    pub fn class_pull(h: &ClassFn, target: PullTarget, d: usize) -> Self {
        let base: MatWord = match target {
            PullTarget::E1 => MatWord(vec![MatFactor::A]),
            PullTarget::E2 => MatWord(vec![MatFactor::B]),
            PullTarget::Moment => MatWord::moment(d),
            PullTarget::TildeMoment => MatWord::tilde_moment(d),
        };
        let terms = h
            .terms()
            .iter()
            .map(|t| {
                let mut w = Vec::new();
                for _ in 0..t.power {
                    w.extend(base.0.iter().copied());
                }
                let tr = Observable::Trace { word: MatWord(w), conj: false };
                let part = match t.part {
                    TracePart::Re => Observable::Re(Box::new(tr)),
                    TracePart::Im => Observable::Im(Box::new(tr)),
                };
                Observable::Scaled(C64::new(t.coeff, 0.0), Box::new(part))
            })
            .collect();
        Observable::Sum(terms)
    }

    pub fn moment_entry(i: usize, j: usize, d: usize) -> Self {
        Observable::Entry { word: MatWord::moment(d), i, j, conj: false }
    }

    pub fn value(&self, ctx: &PointCtx) -> C64 {
        self.value_raw(&ctx.p)
    }

    pub fn value_raw(&self, p: &RawPoint) -> C64 {
        match self {
            Observable::Entry { word, i, j, conj } => {
                let z = word.value(p)[(*i, *j)];
                if *conj {
                    z.conj()
                } else {
                    z
                }
            }
            Observable::VComp { alpha, k, conj } => {
                let z = p.v[*alpha][*k];
                if *conj {
                    z.conj()
                } else {
                    z
                }
            }
            Observable::Trace { word, conj } => {
                let z = word.value(p).trace();
                if *conj {
                    z.conj()
                } else {
                    z
                }
            }
            Observable::Radial(alpha) => {
                C64::new(crate::matlie::vnorm_sqr(&p.v[*alpha]), 0.0)
            }
            Observable::StructB(alpha) => {
                let s = crate::matlie::vnorm_sqr(&p.v[*alpha]);
                C64::new(scalars::b_unchecked(p.x[*alpha] * s), 0.0)
            }
            Observable::Scaled(c, o) => c * o.value_raw(p),
            Observable::Sum(os) => os.iter().map(|o| o.value_raw(p)).sum(),
            Observable::Product(f, g) => f.value_raw(p) * g.value_raw(p),
            Observable::Re(o) => C64::new(o.value_raw(p).re, 0.0),
            Observable::Im(o) => C64::new(o.value_raw(p).im, 0.0),
        }
    }

    /// Directional derivative along an ambient displacement.
    pub fn dir_deriv(&self, p: &RawPoint, t: &RawTangent) -> C64 {
        match self {
            Observable::Entry { word, i, j, conj } => {
                let z = word.diff(p, t)[(*i, *j)];
                if *conj {
                    z.conj()
                } else {
                    z
                }
            }
            Observable::VComp { alpha, k, conj } => {
                let z = t.dv[*alpha][*k];
                if *conj {
                    z.conj()
                } else {
                    z
                }
            }
            Observable::Trace { word, conj } => {
                let z = word.diff(p, t).trace();
                if *conj {
                    z.conj()
                } else {
                    z
                }
            }
            Observable::Radial(alpha) => {
                C64::new(2.0 * vdot(&p.v[*alpha], &t.dv[*alpha]).re, 0.0)
            }
            Observable::StructB(alpha) => {
                let s = crate::matlie::vnorm_sqr(&p.v[*alpha]);
                let x = p.x[*alpha];
                let ds = 2.0 * vdot(&p.v[*alpha], &t.dv[*alpha]).re;
                C64::new(scalars::b_prime_unchecked(x * s) * x * ds, 0.0)
            }
            Observable::Scaled(c, o) => c * o.dir_deriv(p, t),
            Observable::Sum(os) => os.iter().map(|o| o.dir_deriv(p, t)).sum(),
            Observable::Product(f, g) => {
                f.dir_deriv(p, t) * g.value_raw(p) + f.value_raw(p) * g.dir_deriv(p, t)
            }
            Observable::Re(o) => C64::new(o.dir_deriv(p, t).re, 0.0),
            Observable::Im(o) => C64::new(o.dir_deriv(p, t).im, 0.0),
        }
    }

    /// Gradient over the real chart: component r = ∂f/∂x_r.
    pub fn grad(&self, ctx: &PointCtx) -> Vec<C64> {
        let chart = ctx.chart;
        (0..chart.len())
            .map(|r| self.dir_deriv(&ctx.p, &RawTangent::unit(&chart, r)))
            .collect()
    }
}

/// Pullback targets for class functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PullTarget {
    E1,
    E2,
    Moment,
    TildeMoment,
}
