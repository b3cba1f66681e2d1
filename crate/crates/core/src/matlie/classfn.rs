//! Class functions on U(n) built from Re tr(gᵏ) and Im tr(gᵏ), their u(n)-valued
//! derivatives, and the flow-Hamiltonian grammar `c1*re_tr:k1 + c2*im_tr:k2 + ...`
//! used by the CLI.
//!
//! The derivative convention pairs through ⟨ξ,∇h⟩ + ⟨ξ′,∇′h⟩ = d/dt h(e^{tξ} g e^{tξ′}),
//! which gives ∇Re tr(gᵏ) = (k/2)(g⁻ᵏ − gᵏ) and ∇Im tr(gᵏ) = (ik/2)(gᵏ + g⁻ᵏ);
//! in particular ∇Re tr(g) = −½(g − g†).

use num_complex::Complex64 as C64;

use super::cmat::{CMat, UnitaryMat};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracePart {
    Re,
    Im,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassTerm {
    pub coeff: f64,
    pub part: TracePart,
    pub power: u32,
}

/// Real linear combination of Re tr(gᵏ), Im tr(gᵏ).
#[derive(Clone, Debug, PartialEq)]
pub struct ClassFn {
    terms: Vec<ClassTerm>,
}

impl ClassFn {
    pub fn new(terms: Vec<ClassTerm>) -> Self {
        assert!(terms.iter().all(|t| t.power >= 1));
        ClassFn { terms }
    }

    pub fn re_tr(k: u32) -> Self {
        Self::new(vec![ClassTerm { coeff: 1.0, part: TracePart::Re, power: k }])
    }

    pub fn im_tr(k: u32) -> Self {
        Self::new(vec![ClassTerm { coeff: 1.0, part: TracePart::Im, power: k }])
    }

    pub fn terms(&self) -> &[ClassTerm] {
        &self.terms
    }

    pub fn value(&self, g: &UnitaryMat) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let tr = g.mat().pow_unitary(t.power as i32).trace();
                t.coeff
                    * match t.part {
                        TracePart::Re => tr.re,
                        TracePart::Im => tr.im,
                    }
            })
            .sum()
    }

    /// u(n)-valued derivative ∇h(g); commutes with g.
    pub fn grad(&self, g: &UnitaryMat) -> CMat {
        let n = g.n();
        let mut out = CMat::zeros(n);
        for t in &self.terms {
            let k = t.power as i32;
            let gp = g.mat().pow_unitary(k);
            let gm = gp.dagger();
            let kf = t.coeff * t.power as f64 / 2.0;
            let term = match t.part {
                TracePart::Re => (gm - gp).scale(C64::new(kf, 0.0)),
                TracePart::Im => (gp + gm).scale(C64::new(0.0, kf)),
            };
            out = out + term;
        }
        out
    }

    /// Parse the flow-Hamiltonian grammar: terms `re_tr:k` / `im_tr:k` with
    /// optional real coefficients, joined by `+` or `-`.
    pub fn parse(spec: &str) -> Result<Self> {
        let cleaned = spec.replace(' ', "");
        if cleaned.is_empty() {
            return Err(Error::Config("empty hamiltonian spec".into()));
        }
        // Split on +/- while keeping signs attached; a sign directly after
        // another operator (or at the start) belongs to the coefficient.
        let mut pieces: Vec<String> = Vec::new();
        let mut cur = String::new();
        for ch in cleaned.chars() {
            let splits = (ch == '+' || ch == '-')
                && !cur.is_empty()
                && !matches!(cur.chars().last(), Some('+') | Some('-') | Some('*') | Some('e') | Some('E'));
            if splits {
                pieces.push(std::mem::take(&mut cur));
            }
            if !(ch == '+' && cur.is_empty()) {
                cur.push(ch);
            }
        }
        pieces.push(cur);
        let mut terms = Vec::new();
        for piece in &pieces {
            let (coeff, rest) = match piece.split_once('*') {
                Some((c, r)) => {
                    let c = c
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad coefficient in `{piece}`")))?;
                    (c, r)
                }
                None => {
                    let (sign, r) = match piece.strip_prefix('-') {
                        Some(r) => (-1.0, r),
                        None => (1.0, piece.strip_prefix('+').unwrap_or(piece)),
                    };
                    (sign, r)
                }
            };
            let (name, k) = rest
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("missing `:k` in `{piece}`")))?;
            let power: u32 = k
                .parse()
                .map_err(|_| Error::Config(format!("bad power in `{piece}`")))?;
            if power == 0 {
                return Err(Error::Config("power must be >= 1".into()));
            }
            let part = match name {
                "re_tr" => TracePart::Re,
                "im_tr" => TracePart::Im,
                other => return Err(Error::Config(format!("unknown term `{other}`"))),
            };
            terms.push(ClassTerm { coeff, part, power });
        }
        Ok(ClassFn::new(terms))
    }
}
