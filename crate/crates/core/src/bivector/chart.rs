//! Real chart on the ambient space of 𝓜_d: the Re/Im parts of the entries of
//! A, B and of the spin vectors v_α. Conjugate coordinates are derived, not
//! stored; brackets of conjugated slot functions come from the reality rule.

use num_complex::Complex64 as C64;

use crate::matlie::CMat;
use crate::phasespace::MPoint;

/// A complex coordinate slot of the chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Entry A_ij.
    A(usize, usize),
    /// Entry B_ij (holds B̃ when a point of the degenerate target is meant).
    B(usize, usize),
    /// Component (v_α)_i.
    V(usize, usize),
}

impl Slot {
    pub(crate) fn kind_rank(self) -> u8 {
        match self {
            Slot::A(_, _) => 0,
            Slot::B(_, _) => 1,
            Slot::V(_, _) => 2,
        }
    }
}

/// Index bookkeeping between slots and the flat real chart.
#[derive(Clone, Copy, Debug)]
pub struct ChartIndex {
    pub n: usize,
    pub d: usize,
}

impl ChartIndex {
    pub fn new(n: usize, d: usize) -> Self {
        ChartIndex { n, d }
    }

    /// Number of complex slots.
    pub fn slots(&self) -> usize {
        2 * self.n * self.n + self.n * self.d
    }

    /// Number of real coordinates.
    pub fn len(&self) -> usize {
        2 * self.slots()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn slot_index(&self, s: Slot) -> usize {
        let n = self.n;
        match s {
            Slot::A(i, j) => i * n + j,
            Slot::B(i, j) => n * n + i * n + j,
            Slot::V(alpha, i) => 2 * n * n + alpha * n + i,
        }
    }

    pub fn slot_of(&self, cs: usize) -> Slot {
        let n = self.n;
        if cs < n * n {
            Slot::A(cs / n, cs % n)
        } else if cs < 2 * n * n {
            let r = cs - n * n;
            Slot::B(r / n, r % n)
        } else {
            let r = cs - 2 * n * n;
            Slot::V(r / n, r % n)
        }
    }

    /// Real index of (slot, imaginary-part?).
    pub fn real_index(&self, s: Slot, im: bool) -> usize {
        2 * self.slot_index(s) + usize::from(im)
    }

    pub fn decode(&self, r: usize) -> (Slot, bool) {
        (self.slot_of(r / 2), r % 2 == 1)
    }
}

/// Ambient point data: the chart values without unitarity constraints, so
/// finite-difference displacements stay representable.
#[derive(Clone, Debug)]
pub struct RawPoint {
    pub a: CMat,
    pub b: CMat,
    pub v: Vec<Vec<C64>>,
    pub x: Vec<f64>,
}

impl RawPoint {
    pub fn from_point(m: &MPoint) -> Self {
        RawPoint {
            a: m.a.mat().clone(),
            b: m.b.mat().clone(),
            v: m.balls.iter().map(|bv| bv.v.clone()).collect(),
            x: m.xs(),
        }
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn d(&self) -> usize {
        self.v.len()
    }

    pub fn chart(&self) -> ChartIndex {
        ChartIndex::new(self.n(), self.d())
    }

    pub fn coord(&self, r: usize) -> f64 {
        let (slot, im) = self.chart().decode(r);
        let z = match slot {
            Slot::A(i, j) => self.a[(i, j)],
            Slot::B(i, j) => self.b[(i, j)],
            Slot::V(alpha, i) => self.v[alpha][i],
        };
        if im {
            z.im
        } else {
            z.re
        }
    }

    pub fn displaced(&self, r: usize, h: f64) -> RawPoint {
        let mut out = self.clone();
        let (slot, im) = self.chart().decode(r);
        let dz = if im { C64::new(0.0, h) } else { C64::new(h, 0.0) };
        match slot {
            Slot::A(i, j) => out.a[(i, j)] += dz,
            Slot::B(i, j) => out.b[(i, j)] += dz,
            Slot::V(alpha, i) => out.v[alpha][i] += dz,
        }
        out
    }
}

/// Ambient displacement (a chart tangent in matrix/vector form).
#[derive(Clone, Debug)]
pub struct RawTangent {
    pub da: CMat,
    pub db: CMat,
    pub dv: Vec<Vec<C64>>,
}

impl RawTangent {
    pub fn zero(n: usize, d: usize) -> Self {
        RawTangent {
            da: CMat::zeros(n),
            db: CMat::zeros(n),
            dv: vec![vec![C64::new(0.0, 0.0); n]; d],
        }
    }

    /// Unit displacement of one real chart coordinate.
    pub fn unit(chart: &ChartIndex, r: usize) -> Self {
        let mut out = Self::zero(chart.n, chart.d);
        let (slot, im) = chart.decode(r);
        let dz = if im { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
        match slot {
            Slot::A(i, j) => out.da[(i, j)] = dz,
            Slot::B(i, j) => out.db[(i, j)] = dz,
            Slot::V(alpha, i) => out.dv[alpha][i] = dz,
        }
        out
    }

    /// Infinitesimal diagonal action of ξ ∈ u(n):
    /// δA = Aξ − ξA, δB = Bξ − ξB, δv_α = −ξ v_α.
    pub fn infinitesimal(xi: &CMat, p: &RawPoint) -> Self {
        RawTangent {
            da: &p.a * xi - xi * &p.a,
            db: &p.b * xi - xi * &p.b,
            dv: p
                .v
                .iter()
                .map(|v| xi.mulv(v).into_iter().map(|z| -z).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_roundtrip() {
        let chart = ChartIndex::new(3, 2);
        assert_eq!(chart.len(), 2 * (2 * 9 + 6));
        for r in 0..chart.len() {
            let (slot, im) = chart.decode(r);
            assert_eq!(chart.real_index(slot, im), r);
        }
    }
}
