use rayon::prelude::*;

use super::{Method, StabilityEstimate};
use crate::error::{domain, unsupported, Error, Result};
use crate::gaussian::quadrature::Legendre;
use crate::gaussian::{phi, CorrelatedGaussianModel};
use crate::geom::{add2, cross2, dot2, norm2, perp, scale2, V2};
use crate::ou::{t_rho_cone2d_tol, ConeCell2D};
use crate::partition::FlatPartition;

/// Nodes per axis used when the caller has no preference.
pub const DEFAULT_ORDER: usize = 80;

/// Agreement demanded between `order` and `2·order`.
const ORDER_TOL: f64 = 1e-6;

/// Radial reach beyond the polar origin. The Gaussian mass further out is
/// far below double precision.
const REACH: f64 = 10.0;

const INNER_TOL: f64 = 1e-12;

/// A cell in polar form around `origin`: directions `rotate(start, θ)` for
/// `θ ∈ [0, opening]`, radii in `[0, reach]`.
struct Polar {
    origin: V2,
    start: V2,
    opening: f64,
    reach: f64,
}

fn rotate(v: V2, angle: f64) -> V2 {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

fn polar(cell: &ConeCell2D) -> Result<Polar> {
    let cons = cell.constraints();
    match cons {
        [] => Ok(Polar { origin: [0.0, 0.0], start: [1.0, 0.0], opening: std::f64::consts::TAU, reach: REACH }),
        [h] => {
            // Start along the line; a quarter turn counterclockwise from
            // perp(u) points to −u, into the cell.
            let origin = scale2(h.b, h.u);
            Ok(Polar { origin, start: perp(h.u), opening: std::f64::consts::PI, reach: norm2(origin) + REACH })
        }
        [a, b] => {
            let apex = cell.apex().ok_or_else(|| domain("two-sided cell without an apex"))?;
            // Each edge runs along one line and stays inside the other
            // half-plane.
            let edge = |line: V2, other: V2| {
                let d = perp(line);
                if dot2(d, other) <= 0.0 {
                    d
                } else {
                    [-d[0], -d[1]]
                }
            };
            let d1 = edge(a.u, b.u);
            let d2 = edge(b.u, a.u);
            let mut opening = dot2(d1, d2).clamp(-1.0, 1.0).acos();
            if cross2(d1, d2) < 0.0 {
                opening = -opening;
            }
            Ok(Polar { origin: apex, start: d1, opening, reach: norm2(apex) + REACH })
        }
        _ => Err(unsupported("cells with three constraints")),
    }
}

fn cell_integral(cell: &ConeCell2D, rho: f64, order: usize) -> Result<f64> {
    let pol = polar(cell)?;
    let rule = Legendre::new(order);
    let (lo, hi) = if pol.opening >= 0.0 { (0.0, pol.opening) } else { (pol.opening, 0.0) };
    let nodes: Vec<(f64, f64)> = rule.points(lo, hi).collect();
    let rows: Vec<Result<f64>> = nodes
        .par_iter()
        .map(|&(theta, wt)| {
            let e = rotate(pol.start, theta);
            let mut acc = 0.0;
            for (r, wr) in rule.points(0.0, pol.reach) {
                let x = add2(pol.origin, scale2(r, e));
                let dens = phi(x[0]) * phi(x[1]);
                if dens < 1e-300 {
                    continue;
                }
                acc += wr * r * dens * t_rho_cone2d_tol(cell, rho, x, INNER_TOL)?;
            }
            Ok(wt * acc)
        })
        .collect();
    rows.into_iter().sum()
}

fn total(cells: &[ConeCell2D], rho: f64, order: usize) -> Result<f64> {
    cells.iter().map(|c| cell_integral(c, rho, order)).sum()
}

/// `Σ_i ∫_{A_i} T_ρ 1_{A_i} dγ_2` by Gauss–Legendre in polar coordinates
/// around the apex of each cell, with `order` nodes per axis. The result is
/// recomputed at `2·order` and rejected if the two differ by more than
/// `1e−6`.
pub fn stability_quadrature(
    p: &FlatPartition,
    model: &CorrelatedGaussianModel,
    order: usize,
) -> Result<StabilityEstimate> {
    if p.n() != 2 || model.n() != 2 {
        return Err(unsupported("quadrature is implemented for the plane"));
    }
    if model.rho() == 0.0 {
        return Err(domain("quadrature needs rho != 0"));
    }
    if order < 2 {
        return Err(domain("quadrature order must be at least 2"));
    }
    let cells: Vec<ConeCell2D> = (0..p.k()).map(|i| p.cell_cone(i)).collect::<Result<_>>()?;
    let coarse = total(&cells, model.rho(), order)?;
    let fine = total(&cells, model.rho(), 2 * order)?;
    if (coarse - fine).abs() > ORDER_TOL {
        return Err(Error::Accuracy(format!(
            "orders {order} and {} disagree: {coarse} vs {fine}",
            2 * order
        )));
    }
    Ok(StabilityEstimate {
        value: fine.clamp(0.0, 1.0),
        std_error: 0.0,
        method: Method::Quadrature,
        samples_or_order: order as u64,
        seed: None,
        partition_digest: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_standard_simplex, StandardSimplexSpec};

    #[test]
    fn half_planes_match_arcsine_law() {
        let p = FlatPartition::new(vec![0.0, 0.0], vec![vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let s = stability_quadrature(&p, &m, 40).unwrap();
        assert!((s.value - 2.0 / 3.0).abs() < 1e-6, "{}", s.value);
    }

    #[test]
    fn offset_half_planes_match_bivariate_cdf() {
        let p = FlatPartition::new(vec![0.4, 0.0], vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let rho = 0.3;
        let m = CorrelatedGaussianModel::new(2, rho).unwrap();
        let s = stability_quadrature(&p, &m, 40).unwrap();
        // Cells {x₁ ≤ 0.4} and {x₁ > 0.4} with a one-dimensional pair.
        let lo = crate::gaussian::bvn_lower(0.4, 0.4, rho);
        let hi = crate::gaussian::bvn_lower(-0.4, -0.4, rho);
        assert!((s.value - lo - hi).abs() < 1e-6, "{} vs {}", s.value, lo + hi);
    }

    #[test]
    fn small_rho_approaches_sum_of_squares() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.0, 0.0] }).unwrap();
        let m = CorrelatedGaussianModel::new(2, 0.001).unwrap();
        let s = stability_quadrature(&p, &m, 30).unwrap();
        assert!((s.value - 1.0 / 3.0).abs() < 1e-3, "{}", s.value);
        // First order in rho: each 120° sector has |E[X 1_A]|² = sin²(π/3)/(2π),
        // so S ≈ 1/3 + 9ρ/(8π).
        let rho = 0.01;
        let m = CorrelatedGaussianModel::new(2, rho).unwrap();
        let s = stability_quadrature(&p, &m, 30).unwrap();
        let linear = 1.0 / 3.0 + 9.0 * rho / (8.0 * std::f64::consts::PI);
        assert!((s.value - linear).abs() < 1e-4, "{} vs {linear}", s.value);
    }

    #[test]
    fn rejects_rho_zero() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.0, 0.0] }).unwrap();
        let m = CorrelatedGaussianModel::new(2, 0.0).unwrap();
        assert!(stability_quadrature(&p, &m, 10).is_err());
    }
}
