//! Cells given by at most three half-plane constraints, and the
//! Ornstein–Uhlenbeck operator applied to their indicators.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::quadrature::adaptive_gk;
use crate::gaussian::{bvn_lower, norm_cdf, phi, CorrelatedGaussianModel};
use crate::geom::{cross2, dot, dot2, norm2, perp, V2};

/// `{x : ⟨x, u⟩ ≤ b}` with `‖u‖ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub u: V2,
    pub b: f64,
}

impl HalfPlane {
    /// Normalizes `u` (and `b` with it).
    pub fn new(u: V2, b: f64) -> Result<Self> {
        let len = norm2(u);
        if !(len > 0.0 && len.is_finite() && b.is_finite()) {
            return Err(domain("half-plane needs a finite nonzero normal and finite offset"));
        }
        Ok(Self { u: [u[0] / len, u[1] / len], b: b / len })
    }

    #[inline]
    pub fn contains(&self, x: V2) -> bool {
        dot2(self.u, x) <= self.b
    }
}

/// A convex planar cell `∩_m {⟨x, u_m⟩ ≤ b_m}` with at most three constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeCell2D {
    constraints: Vec<HalfPlane>,
    apex: Option<V2>,
}

impl ConeCell2D {
    /// Validates normalization and that the cell has nonempty interior.
    pub fn new(constraints: Vec<HalfPlane>, apex: Option<V2>) -> Result<Self> {
        if constraints.len() > 3 {
            return Err(domain("a planar cone cell takes at most three constraints"));
        }
        for h in &constraints {
            if (norm2(h.u) - 1.0).abs() > 1e-12 {
                return Err(domain("cone constraints must have unit normals"));
            }
        }
        if !has_interior(&constraints) {
            return Err(domain("cell has empty interior"));
        }
        Ok(Self { constraints, apex })
    }

    pub fn constraints(&self) -> &[HalfPlane] {
        &self.constraints
    }

    pub fn apex(&self) -> Option<V2> {
        self.apex
    }

    pub fn contains(&self, x: V2) -> bool {
        self.constraints.iter().all(|h| h.contains(x))
    }

    /// The same cell with the offset of constraint `m` replaced.
    pub fn with_offset(&self, m: usize, b: f64) -> Result<Self> {
        let mut c = self.constraints.clone();
        c[m].b = b;
        Self::new(c, None)
    }
}

/// Motzkin's alternative in the plane: the strict system `⟨x,u_m⟩ < b_m` is
/// infeasible iff some nonnegative combination of the normals vanishes while
/// the same combination of offsets is nonpositive.
fn has_interior(cons: &[HalfPlane]) -> bool {
    for a in 0..cons.len() {
        for b in (a + 1)..cons.len() {
            if dot2(cons[a].u, cons[b].u) < -1.0 + 1e-12 && cons[a].b + cons[b].b <= 0.0 {
                return false;
            }
        }
    }
    if cons.len() == 3 {
        let l = [
            cross2(cons[1].u, cons[2].u),
            cross2(cons[2].u, cons[0].u),
            cross2(cons[0].u, cons[1].u),
        ];
        let positive = l.iter().all(|&v| v > 1e-12);
        let negative = l.iter().all(|&v| v < -1e-12);
        if positive || negative {
            let s = if positive { 1.0 } else { -1.0 };
            let combo: f64 = (0..3).map(|m| s * l[m] * cons[m].b).sum();
            if combo <= 0.0 {
                return false;
            }
        }
    }
    true
}

/// `Φ(hi) − Φ(lo)` evaluated on the side of zero that avoids cancellation.
#[inline]
pub(crate) fn phi_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > 0.0 {
        norm_cdf(-lo) - norm_cdf(-hi)
    } else {
        norm_cdf(hi) - norm_cdf(lo)
    }
}

/// Outer integration range for the nested representation.
pub(crate) const TRUNCATION: f64 = 10.0;

/// Standard Gaussian measure of `∩_m {⟨z, u_m⟩ ≤ b_m}`.
///
/// Writes `z = s·u_0 + r·u_0^⊥`. Constraints parallel to `u_0` bound `s`;
/// the others bound `r` by affine functions of `s`, so the inner integral is
/// a difference of normal CDFs. The outer integral over `s ∈ [−10, 10]` is
/// adaptive Gauss–Kronrod with breakpoints where two inner bounds cross.
pub(crate) fn polygon_measure(cons: &[(V2, f64)], tol: f64) -> f64 {
    if cons.is_empty() {
        return 1.0;
    }
    let e = cons[0].0;
    let f = perp(e);
    let mut s_lo = -TRUNCATION;
    let mut s_hi = TRUNCATION;
    // r-bounds as (slope, intercept): r ≤ (or ≥) intercept + slope·s.
    let mut uppers: Vec<(f64, f64)> = Vec::new();
    let mut lowers: Vec<(f64, f64)> = Vec::new();
    for &(u, b) in cons {
        let alpha = dot2(e, u);
        let beta = dot2(f, u);
        if beta.abs() < 1e-14 {
            if alpha > 0.0 {
                s_hi = s_hi.min(b / alpha);
            } else {
                s_lo = s_lo.max(b / alpha);
            }
        } else if beta > 0.0 {
            uppers.push((-alpha / beta, b / beta));
        } else {
            lowers.push((-alpha / beta, b / beta));
        }
    }
    if s_hi <= s_lo {
        return 0.0;
    }
    let lines: Vec<(f64, f64)> = uppers.iter().chain(lowers.iter()).copied().collect();
    let mut breaks = vec![s_lo, s_hi];
    for a in 0..lines.len() {
        for b in (a + 1)..lines.len() {
            let ds = lines[a].0 - lines[b].0;
            if ds.abs() > 1e-14 {
                let s = (lines[b].1 - lines[a].1) / ds;
                if s > s_lo && s < s_hi {
                    breaks.push(s);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let inner = |s: f64| {
        let hi = uppers.iter().map(|&(m, q)| q + m * s).fold(f64::INFINITY, f64::min);
        let lo = lowers.iter().map(|&(m, q)| q + m * s).fold(f64::NEG_INFINITY, f64::max);
        phi(s) * phi_interval(lo, hi)
    };
    let r = adaptive_gk(inner, &breaks, tol, tol, 2_000);
    r.value.clamp(0.0, 1.0)
}

/// Gaussian measure of `∩_m {⟨z, u_m⟩ ≤ b_m}` for unit normals. One or two
/// constraints reduce to the univariate and bivariate normal CDFs; three go
/// through the nested quadrature.
pub(crate) fn cell_measure(cons: &[(V2, f64)], tol: f64) -> f64 {
    match cons {
        [] => 1.0,
        [(_, b)] => norm_cdf(*b),
        [(u1, b1), (u2, b2)] => {
            let r = dot2(*u1, *u2);
            if r.abs() <= 1.0 - 1e-12 {
                bvn_lower(*b1, *b2, r)
            } else if r > 0.0 {
                norm_cdf(b1.min(*b2))
            } else {
                phi_interval(-b2, *b1)
            }
        }
        _ => polygon_measure(cons, tol),
    }
}

/// Default absolute tolerance of the nested quadrature.
pub const CONE_TOL: f64 = 1e-13;

/// `T_ρ 1_H(x) = Φ((a − ρ⟨x,u⟩)/√(1−ρ²))` for `H = {⟨·,u⟩ ≤ a}`.
pub fn t_rho_halfspace(a_offset: f64, u: &[f64], rho: f64, x: &[f64]) -> Result<f64> {
    let m = CorrelatedGaussianModel::new(x.len().max(1), rho)?;
    if u.len() != x.len() {
        return Err(domain("normal and point have different dimensions"));
    }
    Ok(norm_cdf((a_offset - rho * dot(x, u)) / m.sigma()))
}

/// `T_ρ 1_A(x)` for a planar cell `A`, i.e. the Gaussian measure of
/// `(A − ρx)/√(1−ρ²)`. At `ρ = 0` this is `γ_2(A)`.
pub fn t_rho_cone2d(cell: &ConeCell2D, rho: f64, x: V2) -> Result<f64> {
    t_rho_cone2d_tol(cell, rho, x, CONE_TOL)
}

/// [`t_rho_cone2d`] with an explicit quadrature tolerance.
pub fn t_rho_cone2d_tol(cell: &ConeCell2D, rho: f64, x: V2, tol: f64) -> Result<f64> {
    let m = CorrelatedGaussianModel::new(2, rho)?;
    if !(x[0].is_finite() && x[1].is_finite()) {
        return Err(domain("evaluation point must be finite"));
    }
    let sigma = m.sigma();
    let shifted: Vec<(V2, f64)> = cell
        .constraints
        .iter()
        .map(|h| (h.u, (h.b - rho * dot2(x, h.u)) / sigma))
        .collect();
    Ok(cell_measure(&shifted, tol))
}

/// Gaussian measure of a planar cell.
pub fn cone_measure(cell: &ConeCell2D) -> f64 {
    let c: Vec<(V2, f64)> = cell.constraints.iter().map(|h| (h.u, h.b)).collect();
    cell_measure(&c, CONE_TOL)
}
