use serde::{Deserialize, Serialize};

use super::build::DEFAULT_HALF_WIDTH;
use crate::error::{domain, unsupported, Error, Result};
use crate::gaussian::{phi, CorrelatedGaussianModel};
use crate::ou::{line_difference, LineRestriction};
use crate::partition::FlatPartition;

/// The scan grid covers `t ∈ [−SCAN_RADIUS, SCAN_RADIUS]`.
pub const SCAN_RADIUS: f64 = 50.0;
pub const SCAN_POINTS: usize = 513;
/// Spreads at or below this count as constant.
pub const SPREAD_TOL: f64 = 1e-7;

/// Range of `t ↦ T_ρ(1_{A_i} − 1_{A_j})(cN + tw)` over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetSpread {
    pub facet: (usize, usize),
    pub spread: f64,
}

/// Where to push out (`t1`) and pull in (`t2`) along a facet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub line: LineRestriction,
    pub t1: f64,
    pub t2: f64,
    pub h1: f64,
    pub h2: f64,
    pub spread: f64,
    /// `sgn(ρ)(h1 − h2)` times the smaller Gaussian line density of the two
    /// points, a proxy for the first-order gain per unit height.
    pub gain: f64,
}

/// Outcome of the facet scan. `witnesses` is sorted by decreasing gain and
/// empty when no facet has spread above [`SPREAD_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetScan {
    pub spreads: Vec<FacetSpread>,
    pub witnesses: Vec<Witness>,
}

impl FacetScan {
    pub fn best(&self) -> Option<&Witness> {
        self.witnesses.first()
    }

    pub fn max_spread(&self) -> f64 {
        self.spreads.iter().map(|s| s.spread).fold(0.0, f64::max)
    }
}

fn scan_facet(p: &FlatPartition, lr: &LineRestriction, rho: f64) -> Result<(f64, Option<Witness>)> {
    let step = 2.0 * SCAN_RADIUS / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|m| -SCAN_RADIUS + step * m as f64).collect();
    let h: Vec<f64> = grid.iter().map(|&t| line_difference(p, lr, rho, t)).collect::<Result<_>>()?;
    let (lo, hi) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let spread = hi - lo;
    if spread <= SPREAD_TOL {
        return Ok((spread, None));
    }
    // Bumps need room between the facet's start and their support.
    let start = p.facet_start(lr)?;
    let wn = lr.w_norm();
    let margin = 2.0 * DEFAULT_HALF_WIDTH;
    let usable: Vec<usize> = (0..SCAN_POINTS).filter(|&m| grid[m] >= start + margin).collect();
    let sgn = rho.signum();
    let mut best: Option<(f64, usize, usize)> = None;
    for &a in &usable {
        for &b in &usable {
            if (grid[a] - grid[b]).abs() < margin + step {
                continue;
            }
            let lift = sgn * (h[a] - h[b]);
            if lift <= 0.0 {
                continue;
            }
            let g = lift * phi(grid[a] * wn).min(phi(grid[b] * wn));
            if best.is_none_or(|(v, ..)| g > v) {
                best = Some((g, a, b));
            }
        }
    }
    Ok((
        spread,
        best.map(|(gain, a, b)| Witness {
            line: lr.clone(),
            t1: grid[a],
            t2: grid[b],
            h1: h[a],
            h2: h[b],
            spread,
            gain,
        }),
    ))
}

/// Samples the line difference on every facet of `p` and ranks the facets
/// by how much a matched pair of bumps could gain.
pub fn find_improving_facet(p: &FlatPartition, rho: f64) -> Result<FacetScan> {
    if p.n() != 2 || p.k() != 3 {
        return Err(unsupported("the facet scan handles three cells in the plane"));
    }
    CorrelatedGaussianModel::new(2, rho)?;
    if rho == 0.0 {
        return Err(domain("rho must be nonzero"));
    }
    let pairs = p.adjacent_pairs()?;
    if pairs.is_empty() {
        return Err(domain("partition has no facet-adjacent pairs"));
    }
    let mut spreads = Vec::new();
    let mut witnesses = Vec::new();
    for (i, j) in pairs {
        let lr = match p.line_restriction(i, j) {
            Ok(lr) => lr,
            Err(Error::Unsupported(_)) => continue,
            Err(e) => return Err(e),
        };
        let (spread, w) = scan_facet(p, &lr, rho)?;
        spreads.push(FacetSpread { facet: (i, j), spread });
        witnesses.extend(w);
    }
    witnesses.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    Ok(FacetScan { spreads, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ou::limit_at_infinity;
    use crate::partition::{make_standard_simplex, simplex_directions, StandardSimplexSpec};

    fn shifted(scale: f64) -> FlatPartition {
        let y1 = &simplex_directions(2)[0];
        let shift = y1.iter().map(|v| scale * v).collect();
        make_standard_simplex(&StandardSimplexSpec { n: 2, shift }).unwrap()
    }

    #[test]
    fn centered_simplex_has_no_witness() {
        let s = find_improving_facet(&shifted(0.0), 0.5).unwrap();
        assert!(s.best().is_none());
        assert_eq!(s.spreads.len(), 3);
        assert!(s.max_spread() <= SPREAD_TOL);
    }

    #[test]
    fn shifted_simplex_spread_reflects_the_limit() {
        let p = shifted(0.3);
        let s = find_improving_facet(&p, 0.5).unwrap();
        let w = s.best().expect("witness");
        let bound = limit_at_infinity(w.line.c, 0.5).unwrap().abs() / 2.0;
        assert!(w.spread >= bound && bound > 0.0);
        assert!(w.h1 > w.h2);
        assert!((w.t1 - w.t2).abs() >= 2.0 * DEFAULT_HALF_WIDTH);
    }

    #[test]
    fn negative_rho_keeps_the_facet_and_reverses_the_pair() {
        let p = shifted(0.3);
        let pos = find_improving_facet(&p, 0.5).unwrap();
        let neg = find_improving_facet(&p, -0.5).unwrap();
        let (wp, wn) = (pos.best().unwrap(), neg.best().unwrap());
        assert_eq!(wp.line.pair, wn.line.pair);
        assert!(wn.h1 < wn.h2);
        assert!(neg.max_spread() > SPREAD_TOL);
    }
}
