//! A rectangle competitor to plurality built from an improving perturbation
//! of plurality's Gaussian limit.
//!
//! The Gaussian bump regions are moved into whitened statistic coordinates
//! and rasterized on a fine grid. Votes whose statistic falls in a grid cell
//! of a bump get that bump's receiving candidate; all other votes follow
//! plurality. Because the count lattice is coarse on the scale of a bump,
//! both bump heights are retuned so the count vectors that actually change
//! winner carry the same exact probability under the biased measure. Near
//! the limit facet the outcome difference `T_ρ(1_i − 1_j)` is far from zero,
//! so any mismatch there costs stability at first order and would swamp the
//! gain, which only comes from how that difference varies along the facet.

use serde::{Deserialize, Serialize};

use super::embedding::{multinomial_log_pmf, StatisticEmbedding};
use super::function::{build_competitor, Fallback, VotingFunction};
use super::measure::{BiasedMeasure, Counts};
use super::words::plurality_counts;
use super::rectangles::{Rect, RectangleSet};
use crate::error::{domain, Result};
use crate::geom::V2;
use crate::partition::{FlatPartition, Partition, PatchGeometry, PerturbedPartition};
use crate::perturbation::{improve, ImproveOptions, ImprovementReport};

/// Grid step, in whitened coordinates, used to rasterize bump regions.
pub const DEFAULT_GRID_STEP: f64 = 0.004;

/// Relative ranges and step counts searched when retuning the heights.
const OUTWARD_SCAN: (f64, f64, usize) = (0.9, 1.1, 40);
const INWARD_SCAN: (f64, f64, usize) = (0.5, 1.5, 400);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompetitorOptions {
    pub improve: ImproveOptions,
    pub grid_step: f64,
}

/// A rasterized bump in statistic coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePatch {
    pub facet: (usize, usize),
    pub sign: i8,
    pub label: usize,
    /// Height of the Gaussian bump.
    pub gaussian_height: f64,
    /// Height used for the rasterized region after mass matching.
    pub height: f64,
    /// Exact probability of the count vectors whose winner the bump changes.
    pub mass: f64,
    pub rectangles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Competitor {
    pub function: VotingFunction,
    /// Plurality's limit in Gaussian coordinates.
    pub limit: FlatPartition,
    /// Whitened statistic `z` corresponds to the Gaussian point `z − offset`.
    pub offset: V2,
    pub patches: Vec<DiscretePatch>,
    pub grid_step: f64,
}

impl Competitor {
    /// Where the competitor can differ from plurality.
    pub fn region(&self) -> Option<&RectangleSet> {
        self.function.rectangles()
    }
}

/// Lattice points near one bump that the bump would flip, with their exact
/// probabilities and the Gaussian point at the center of their raster cell.
struct Raster {
    points: Vec<(f64, V2)>,
}

fn cell_index(z: V2, step: f64) -> (i64, i64) {
    ((z[0] / step).floor() as i64, (z[1] / step).floor() as i64)
}

fn cell_center(ij: (i64, i64), step: f64) -> V2 {
    [(ij.0 as f64 + 0.5) * step, (ij.1 as f64 + 0.5) * step]
}

fn raster_points(geom: &PatchGeometry, offset: V2, step: f64, emb: &StatisticEmbedding, q: &[f64; 3]) -> Raster {
    let label = geom.patch.to_cell();
    let (lo, hi) = geom.bounding_box();
    let pad = 2.0 * step;
    let lo = [lo[0] + offset[0] - pad, lo[1] + offset[1] - pad];
    let hi = [hi[0] + offset[0] + pad, hi[1] + offset[1] + pad];
    let points = emb
        .lattice_in_box(lo, hi)
        .into_iter()
        .filter(|(c, _)| plurality_counts(c) != label)
        .map(|(c, z): (Counts, V2)| {
            let cz = cell_center(cell_index(z, step), step);
            (multinomial_log_pmf(&c, q).exp(), [cz[0] - offset[0], cz[1] - offset[1]])
        })
        .collect();
    Raster { points }
}

fn raster_mass(r: &Raster, geom: &PatchGeometry) -> f64 {
    r.points.iter().filter(|(_, x)| geom.contains(*x)).map(|(p, _)| p).sum()
}

fn with_height(geom: &PatchGeometry, height: f64) -> PatchGeometry {
    let mut g = *geom;
    g.patch.height = height;
    g
}

/// Grid cells whose centers lie in the bump, merged into row runs and
/// moved to statistic coordinates.
fn raster_rects(geom: &PatchGeometry, offset: V2, step: f64, label: usize) -> Vec<Rect> {
    let (lo, hi) = geom.bounding_box();
    let (i0, j0) = cell_index([lo[0] + offset[0], lo[1] + offset[1]], step);
    let (i1, j1) = cell_index([hi[0] + offset[0], hi[1] + offset[1]], step);
    let mut rects = Vec::new();
    for j in j0..=j1 {
        let mut run: Option<i64> = None;
        for i in i0..=i1 + 1 {
            let c = cell_center((i, j), step);
            let inside = i <= i1 && geom.contains([c[0] - offset[0], c[1] - offset[1]]);
            match (inside, run) {
                (true, None) => run = Some(i),
                (false, Some(s)) => {
                    rects.push(Rect {
                        x0: s as f64 * step,
                        x1: i as f64 * step,
                        y0: j as f64 * step,
                        y1: (j + 1) as f64 * step,
                        label,
                    });
                    run = None;
                }
                _ => {}
            }
        }
    }
    rects
}

/// Rasterizes a perturbation of plurality's limit into a rectangle
/// competitor for `measure`.
pub fn competitor_from_perturbation(
    p: &PerturbedPartition,
    measure: &BiasedMeasure,
    grid_step: f64,
) -> Result<Competitor> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(domain("grid step must be positive"));
    }
    let emb = StatisticEmbedding::new(measure.n())?;
    let (limit, offset) = emb.limit_partition(measure)?;
    let shift_gap = p.base().shift().iter().zip(limit.shift()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if shift_gap > 1e-9 || p.base().directions() != limit.directions() {
        return Err(domain("perturbation is not based on plurality's limit for this measure"));
    }
    let q = measure.q();
    let geoms = p.geometry();
    let mut heights: Vec<f64> = geoms.iter().map(|g| g.patch.height).collect();
    let rasters: Vec<Raster> = geoms
        .iter()
        .map(|g| {
            let tall = with_height(g, g.patch.height * INWARD_SCAN.1.max(OUTWARD_SCAN.1));
            raster_points(&tall, offset, grid_step, &emb, &q)
        })
        .collect();
    let mut masses: Vec<f64> = geoms.iter().zip(&rasters).map(|(g, r)| raster_mass(r, g)).collect();

    // Retune the heights of an outward/inward pair on one facet.
    if geoms.len() == 2 && geoms[0].patch.facet == geoms[1].patch.facet && geoms[0].patch.sign != geoms[1].patch.sign {
        let (out, inn) = if geoms[0].patch.sign > 0 { (0, 1) } else { (1, 0) };
        let grid = |(lo, hi, steps): (f64, f64, usize), base: f64| {
            (0..=steps).map(move |k| base * (lo + (hi - lo) * k as f64 / steps as f64))
        };
        let inward: Vec<(f64, f64)> = grid(INWARD_SCAN, heights[inn])
            .map(|h| (h, raster_mass(&rasters[inn], &with_height(&geoms[inn], h))))
            .collect();
        // Key: mass mismatch, then distance from the Gaussian heights.
        let mut best = (f64::INFINITY, f64::INFINITY, heights[out], heights[inn], masses[out], masses[inn]);
        for ho in grid(OUTWARD_SCAN, heights[out]) {
            let mo = raster_mass(&rasters[out], &with_height(&geoms[out], ho));
            for &(hi, mi) in &inward {
                let moved = (ho / heights[out] - 1.0).abs() + (hi / heights[inn] - 1.0).abs();
                let key = ((mo - mi).abs(), moved);
                if key < (best.0, best.1) {
                    best = (key.0, key.1, ho, hi, mo, mi);
                }
            }
        }
        heights[out] = best.2;
        heights[inn] = best.3;
        masses[out] = best.4;
        masses[inn] = best.5;
    }

    let mut rects = Vec::new();
    let mut patches = Vec::new();
    for (k, g) in geoms.iter().enumerate() {
        let label = g.patch.to_cell();
        let r = raster_rects(&with_height(g, heights[k]), offset, grid_step, label);
        patches.push(DiscretePatch {
            facet: g.patch.facet,
            sign: g.patch.sign,
            label,
            gaussian_height: g.patch.height,
            height: heights[k],
            mass: masses[k],
            rectangles: r.len(),
        });
        rects.extend(r);
    }
    let function = build_competitor(RectangleSet::new(rects)?, Fallback::Plurality)?;
    Ok(Competitor { function, limit, offset, patches, grid_step })
}

/// Finds an improving perturbation of plurality's Gaussian limit and turns
/// it into a rectangle competitor. Without an improving trial the
/// competitor has no rectangles and equals plurality.
pub fn plurality_competitor(
    measure: &BiasedMeasure,
    rho: f64,
    opts: CompetitorOptions,
) -> Result<(Competitor, ImprovementReport)> {
    let emb = StatisticEmbedding::new(measure.n())?;
    let (limit, offset) = emb.limit_partition(measure)?;
    let (improved, report) = improve(&limit, rho, opts.improve)?;
    let competitor = match (&improved, report.best()) {
        (Partition::Perturbed(pp), Some(_)) => competitor_from_perturbation(pp, measure, opts.grid_step)?,
        _ => Competitor {
            function: build_competitor(RectangleSet::new(Vec::new())?, Fallback::Plurality)?,
            limit,
            offset,
            patches: Vec::new(),
            grid_step: opts.grid_step,
        },
    };
    Ok((competitor, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::build_perturbation;
    use crate::voting::words::plurality_counts;

    fn setup(n: u64) -> (BiasedMeasure, PerturbedPartition) {
        let m = BiasedMeasure::new(n, 1.0, 0.0).unwrap();
        let (limit, _) = StatisticEmbedding::new(n).unwrap().limit_partition(&m).unwrap();
        let lr = limit.line_restriction(0, 2).unwrap();
        let start = limit.facet_start(&lr).unwrap();
        let pp = build_perturbation(&limit, &lr, start + 1.0, start + 2.0, 0.08).unwrap();
        (m, pp)
    }

    #[test]
    fn rasterized_bumps_match_masses_and_follow_plurality_elsewhere() {
        let (m, pp) = setup(10_000);
        let c = competitor_from_perturbation(&pp, &m, DEFAULT_GRID_STEP).unwrap();
        assert_eq!(c.patches.len(), 2);
        let (a, b) = (c.patches[0].mass, c.patches[1].mass);
        assert!(a > 0.0 && b > 0.0);
        assert!((a - b).abs() < 0.01 * a.max(b), "masses {a} {b}");
        let emb = StatisticEmbedding::new(10_000).unwrap();
        let region = c.region().unwrap();
        let ev = c.function.evaluator(10_000).unwrap();
        for n1 in (3000..3700).step_by(7) {
            for n2 in (3000..3500).step_by(5) {
                let x = [n1, n2, 10_000 - n1 - n2];
                match region.lookup(emb.embed(&x)) {
                    Some(l) => assert_eq!(ev.eval(&x), l),
                    None => assert_eq!(ev.eval(&x), plurality_counts(&x)),
                }
            }
        }
    }

    #[test]
    fn rejects_foreign_base() {
        let (_, pp) = setup(10_000);
        let other = BiasedMeasure::new(10_000, 0.0, 1.0).unwrap();
        assert!(competitor_from_perturbation(&pp, &other, DEFAULT_GRID_STEP).is_err());
    }
}
