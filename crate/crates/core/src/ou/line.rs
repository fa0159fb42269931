//! Restrictions of `T_ρ(1_{A_i} − 1_{A_j})` to lines inside a shared facet,
//! and their limits at the two ends.

use serde::{Deserialize, Serialize};

use super::cone::t_rho_cone2d;
use crate::error::{domain, Error, Result};
use crate::gaussian::{norm_cdf, CorrelatedGaussianModel};
use crate::geom::{dot, norm, to_v2};
use crate::partition::FlatPartition;

/// The line `t ↦ cN + tw` in the hyperplane `{⟨x, N⟩ = c}` separating
/// cells `pair.0` and `pair.1`, with `N` the exterior normal of `pair.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRestriction {
    pub c: f64,
    pub normal: Vec<f64>,
    pub w: Vec<f64>,
    pub pair: (usize, usize),
}

impl LineRestriction {
    pub fn new(c: f64, normal: Vec<f64>, w: Vec<f64>, pair: (usize, usize)) -> Result<Self> {
        if normal.len() != w.len() || normal.is_empty() {
            return Err(domain("normal and direction must have the same nonzero length"));
        }
        if (norm(&normal) - 1.0).abs() > 1e-12 {
            return Err(domain("facet normal must be a unit vector"));
        }
        if dot(&normal, &w).abs() > 1e-12 {
            return Err(domain("line direction must be orthogonal to the facet normal"));
        }
        if norm(&w) == 0.0 || !c.is_finite() {
            return Err(domain("line direction must be nonzero and offset finite"));
        }
        Ok(Self { c, normal, w, pair })
    }

    /// `cN + tw`.
    pub fn point(&self, t: f64) -> Vec<f64> {
        self.normal
            .iter()
            .zip(&self.w)
            .map(|(n, w)| self.c * n + t * w)
            .collect()
    }

    pub fn w_norm(&self) -> f64 {
        norm(&self.w)
    }

    /// The same line seen from the other cell: `N → −N`, `c → −c`.
    pub fn reversed(&self) -> Self {
        Self {
            c: -self.c,
            normal: self.normal.iter().map(|v| -v).collect(),
            w: self.w.clone(),
            pair: (self.pair.1, self.pair.0),
        }
    }
}

/// `T_ρ(1_{A_i} − 1_{A_j})(cN + tw)` for a planar flat partition.
pub fn line_difference(p: &FlatPartition, lr: &LineRestriction, rho: f64, t: f64) -> Result<f64> {
    if p.n() != 2 {
        return Err(crate::error::unsupported("line restriction is implemented for the plane"));
    }
    CorrelatedGaussianModel::new(2, rho)?;
    let (i, j) = lr.pair;
    match p.facet(i, j) {
        Ok(_) => {}
        Err(Error::NotAdjacent(..)) => {
            return Err(domain(format!("cells {i} and {j} do not share a facet")))
        }
        Err(e) => return Err(e),
    }
    let x = to_v2(&lr.point(t));
    let a = t_rho_cone2d(&p.cell_cone(i)?, rho, x)?;
    let b = t_rho_cone2d(&p.cell_cone(j)?, rho, x)?;
    Ok(a - b)
}

fn plateau(c: f64, rho: f64) -> f64 {
    let sigma = ((1.0 - rho) * (1.0 + rho)).sqrt();
    2.0 * c.signum() * (norm_cdf(c.abs() * (1.0 - rho) / sigma) - 0.5)
}

/// Limit of the line difference as `t → +∞` along a facet ray, for
/// `ρ ∈ (0, 1)`: `2·sign(c)·(Φ(|c|(1−ρ)/√(1−ρ²)) − 1/2)`.
pub fn limit_at_infinity(c: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(domain(format!(
            "limit at +∞ is stated for rho in (0,1), got {rho}; use limit_swapped for negative rho"
        )));
    }
    if !c.is_finite() {
        return Err(domain("facet offset must be finite"));
    }
    Ok(if c == 0.0 { 0.0 } else { plateau(c, rho) })
}

/// For `ρ ∈ (−1, 0)` the nonzero plateau moves to `t → −∞`, where `ρx`
/// lands back on the facet ray. Same closed form as [`limit_at_infinity`].
pub fn limit_swapped(c: f64, rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 0.0) {
        return Err(domain(format!("swapped limit is stated for rho in (-1,0), got {rho}")));
    }
    if !c.is_finite() {
        return Err(domain("facet offset must be finite"));
    }
    Ok(if c == 0.0 { 0.0 } else { plateau(c, rho) })
}

/// Expected `(t → −∞, t → +∞)` plateaus for a facet ray of a planar flat
/// partition. The far end of a ray sees only the two cells; the other end
/// leaves both.
pub fn expected_plateaus(c: f64, rho: f64) -> Result<(f64, f64)> {
    if rho > 0.0 {
        Ok((0.0, limit_at_infinity(c, rho)?))
    } else if rho < 0.0 {
        Ok((limit_swapped(c, rho)?, 0.0))
    } else {
        Err(domain("plateaus are degenerate at rho = 0"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_standard_simplex, StandardSimplexSpec};

    fn simplex_with_offset(c: f64) -> (FlatPartition, LineRestriction) {
        let base = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.0, 0.0] }).unwrap();
        let d = base.directions();
        let raw = [d[1][0] - d[0][0], d[1][1] - d[0][1]];
        let len = raw[0].hypot(raw[1]);
        let shift = vec![c * raw[0] / len, c * raw[1] / len];
        let p = base.with_shift(shift).unwrap();
        let lr = p.line_restriction(0, 1).unwrap();
        (p, lr)
    }

    #[test]
    fn limit_values() {
        assert_eq!(limit_at_infinity(0.0, 0.5).unwrap(), 0.0);
        let v = limit_at_infinity(1.0, 0.5).unwrap();
        assert!((v - 0.436_297_138_349_227).abs() < 1e-13);
        assert_eq!(limit_at_infinity(-1.0, 0.5).unwrap(), -v);
        assert!(limit_at_infinity(1.0, -0.5).is_err());
        assert!(limit_swapped(1.0, 0.5).is_err());
    }

    #[test]
    fn line_restriction_invariants() {
        let (p, lr) = simplex_with_offset(1.0);
        assert!((lr.c - 1.0).abs() < 1e-12);
        assert!((norm(&lr.normal) - 1.0).abs() < 1e-12);
        assert!(dot(&lr.normal, &lr.w).abs() < 1e-12);
        let start = p.facet_start(&lr).unwrap();
        assert!(start <= 1.0);
    }

    #[test]
    fn plateaus_for_shifted_facet() {
        let (p, lr) = simplex_with_offset(1.0);
        let far = line_difference(&p, &lr, 0.5, 50.0).unwrap();
        assert!((far - limit_at_infinity(1.0, 0.5).unwrap()).abs() < 1e-5);
        assert!(line_difference(&p, &lr, 0.5, -50.0).unwrap().abs() < 1e-6);
        let near = line_difference(&p, &lr, -0.5, -50.0).unwrap();
        assert!((near - limit_swapped(1.0, -0.5).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn centered_simplex_difference_vanishes() {
        let (p, lr) = simplex_with_offset(0.0);
        for t in [-50.0, -3.0, 0.0, 0.5, 2.0, 50.0] {
            assert!(line_difference(&p, &lr, 0.5, t).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn reversed_line_flips_the_sign() {
        let (p, lr) = simplex_with_offset(0.7);
        let a = line_difference(&p, &lr, 0.3, 1.5).unwrap();
        let b = line_difference(&p, &lr.reversed(), 0.3, 1.5).unwrap();
        assert!((a + b).abs() < 1e-13);
    }
}
