//! Fundamental bracket tables of the master structure and its degenerate
//! twin, on the coordinate slot functions and their conjugates.
//!
//! Base entries are hand-coded for pairs in canonical kind order (A, B, V);
//! every other combination reduces through antisymmetry and the reality rule
//! {f̄, ḡ} = conj{f, g}. Brackets with conjugated slots come from
//! differentiating U U† = 1 through the base table, which extends the
//! formulas polynomially off the unitary locus — legitimate for the
//! finite-difference machinery because the assembled bivector is tangent to
//! the manifold, so only tangential data ever contributes on it.

use num_complex::Complex64 as C64;

use super::chart::Slot;
use super::ctx::PointCtx;

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn sgn(beta: usize, alpha: usize) -> f64 {
    use std::cmp::Ordering::*;
    match beta.cmp(&alpha) {
        Greater => 1.0,
        Less => -1.0,
        Equal => 0.0,
    }
}

/// {f, g} on unconjugated slot functions.
pub fn bk(ctx: &PointCtx, f: Slot, g: Slot) -> C64 {
    if f.kind_rank() > g.kind_rank() {
        return -bk(ctx, g, f);
    }
    let p = &ctx.p;
    let half = C64::new(0.5, 0.0);
    match (f, g) {
        (Slot::A(i, j), Slot::A(k, l)) => {
            half * (ctx.a2[(i, l)] * delta(k, j) - ctx.a2[(k, j)] * delta(i, l))
        }
        (Slot::B(i, j), Slot::B(k, l)) => {
            half * (ctx.b2[(k, j)] * delta(i, l) - ctx.b2[(i, l)] * delta(k, j))
        }
        (Slot::A(i, j), Slot::B(k, l)) => {
            let cross = if ctx.kind.is_degenerate() {
                -p.b[(k, j)] * p.a[(i, l)] - p.a[(k, j)] * p.b[(i, l)]
            } else {
                p.b[(k, j)] * p.a[(i, l)] - p.a[(k, j)] * p.b[(i, l)]
            };
            -half * (ctx.ab[(i, l)] * delta(k, j) + ctx.ba[(k, j)] * delta(i, l) + cross)
        }
        (Slot::A(i, j), Slot::V(alpha, k)) => {
            half * (p.a[(k, j)] * p.v[alpha][i] - ctx.av[alpha][i] * delta(k, j))
        }
        (Slot::B(i, j), Slot::V(alpha, k)) => {
            half * (p.b[(k, j)] * p.v[alpha][i] - ctx.bv[alpha][i] * delta(k, j))
        }
        (Slot::V(alpha, i), Slot::V(beta, k)) => {
            let zs = ctx.kind.pencil().zstar(alpha, beta);
            half * sgn(beta, alpha) * p.v[alpha][k] * p.v[beta][i]
                - zs * p.v[alpha][i] * p.v[beta][k]
        }
        _ => unreachable!("ordering handled above"),
    }
}

/// {f, ḡ} on slot functions, second argument conjugated.
pub fn bk_conj(ctx: &PointCtx, f: Slot, g: Slot) -> C64 {
    if f.kind_rank() > g.kind_rank() {
        // {f, ḡ} = −{ḡ, f} = −conj({g, f̄}).
        return -bk_conj(ctx, g, f).conj();
    }
    let p = &ctx.p;
    let half = C64::new(0.5, 0.0);
    match (f, g) {
        (Slot::A(i, j), Slot::A(k, l)) => {
            half * (p.a[(l, j)] * p.a[(k, i)].conj() - p.a[(j, l)].conj() * p.a[(i, k)])
        }
        (Slot::B(i, j), Slot::B(k, l)) => {
            half * (p.b[(j, l)].conj() * p.b[(i, k)] - p.b[(l, j)] * p.b[(k, i)].conj())
        }
        (Slot::A(i, j), Slot::B(k, l)) => {
            let sigma = if ctx.kind.is_degenerate() { -1.0 } else { 1.0 };
            half * (p.b[(j, l)].conj() * p.a[(i, k)]
                + p.a[(l, j)] * p.b[(k, i)].conj()
                + sigma * delta(l, j) * ctx.ab_dag[(i, k)]
                - delta(i, k) * ctx.bdag_a[(l, j)])
        }
        (Slot::B(i, j), Slot::A(k, l)) => {
            let sigma = if ctx.kind.is_degenerate() { -1.0 } else { 1.0 };
            -half
                * (p.b[(l, j)] * p.a[(k, i)].conj()
                    + p.a[(j, l)].conj() * p.b[(i, k)]
                    + sigma * delta(l, j) * ctx.b_adag[(i, k)]
                    - delta(i, k) * ctx.adag_b[(l, j)])
        }
        (Slot::A(i, j), Slot::V(alpha, l)) => {
            half * (p.a[(i, l)] * p.v[alpha][j].conj() - delta(i, l) * ctx.vdag_a[alpha][j])
        }
        (Slot::B(i, j), Slot::V(alpha, l)) => {
            half * (p.b[(i, l)] * p.v[alpha][j].conj() - delta(i, l) * ctx.vdag_b[alpha][j])
        }
        (Slot::V(alpha, i), Slot::V(beta, l)) => {
            let i_ = C64::new(0.0, 1.0);
            let mut out = C64::new(0.0, 0.0);
            if alpha == beta {
                out += i_ / p.x[alpha] * delta(i, l);
                out += i_ * 0.5
                    * ctx.bfn[alpha]
                    * (C64::new(ctx.s[alpha] * delta(i, l), 0.0)
                        - p.v[alpha][i] * p.v[beta][l].conj());
            } else {
                out -= half * sgn(beta, alpha) * delta(i, l) * ctx.gram[beta][alpha];
                out += ctx.kind.pencil().zstar(alpha, beta)
                    * p.v[alpha][i]
                    * p.v[beta][l].conj();
            }
            out
        }
        _ => {
            // V before A or B: handled by the reduction at the top.
            unreachable!()
        }
    }
}

/// Bracket of two slot functions with conjugation flags; the single entry
/// point used by the engine. Reality: {f̄, g} = conj({f, ḡ}) and
/// {f̄, ḡ} = conj({f, g}).
pub fn bracket_slots(ctx: &PointCtx, f: Slot, cf: bool, g: Slot, cg: bool) -> C64 {
    match (cf, cg) {
        (false, false) => bk(ctx, f, g),
        (false, true) => bk_conj(ctx, f, g),
        (true, false) => bk_conj(ctx, f, g).conj(),
        (true, true) => bk(ctx, f, g).conj(),
    }
}
