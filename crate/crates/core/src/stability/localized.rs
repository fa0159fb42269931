//! Difference of stabilities of two partitions that agree outside a union
//! `R` of small patch regions.
//!
//! Writing `D = 1[b(X)=b(Y)] − 1[a(X)=a(Y)]`, `D` vanishes unless `X ∈ R`
//! or `Y ∈ R`. Splitting on which of the two lands in `R` and using the
//! exchangeability of `(X, Y)` gives
//!
//! `ΔS = E[D · 1[X ∈ R] · (2 − 1[Y ∈ R])]`,
//!
//! so it suffices to sample `X` from `γ` restricted to `R`. That restriction
//! is drawn by picking a patch with probability proportional to its exact
//! Gaussian area, rejection sampling inside the patch and weighting by the
//! inverse of the number of patches covering the point.
//!
//! Given `X = x`, both partitions agree with the common flat base `F`
//! outside `R`, so
//!
//! `E[D | x] = T_ρ1_{F_{b(x)}}(x) − T_ρ1_{F_{a(x)}}(x) + E[1[Y ∈ R]·r(x, Y)]`
//!
//! where `r` collects the corrections inside `R`. The first two terms are
//! computed exactly and only the rare event `Y ∈ R` is left to sampling.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::{phi, CorrelatedGaussianModel, RngStream};
use crate::geom::V2;
use crate::mc::{map_blocks, reduce_moments, Moments};
use crate::ou::{t_rho_cone2d_tol, ConeCell2D};
use crate::partition::{Classify, FlatPartition, Partition, PatchGeometry};

/// Absolute accuracy of the conditional cell probabilities.
const COND_TOL: f64 = 1e-11;

/// `S(b) − S(a)` estimated from samples concentrated on the patches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceEstimate {
    pub difference: f64,
    pub std_error: f64,
    /// Gaussian measure of the sampled region, counted with multiplicity.
    pub region_mass: f64,
    pub samples: u64,
    pub seed: RngStream,
}

fn split(p: &Partition) -> Result<(&FlatPartition, &[PatchGeometry])> {
    match p {
        Partition::Flat(f) => Ok((f, &[])),
        Partition::Perturbed(q) => Ok((q.base(), q.geometry())),
        Partition::Strips(_) => Err(domain("localized comparison needs flat or perturbed partitions")),
    }
}

struct Sampler<'a> {
    regions: Vec<&'a PatchGeometry>,
    cumulative: Vec<f64>,
    /// Box maxima of the density, used as rejection envelopes.
    envelope: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(regions: Vec<&'a PatchGeometry>) -> Self {
        let mut acc = 0.0;
        let cumulative = regions
            .iter()
            .map(|g| {
                acc += g.area;
                acc
            })
            .collect();
        let envelope = regions
            .iter()
            .map(|g| {
                let (t0, t1, s0, s1) = bounds(g);
                let t = 0.0f64.clamp(t0, t1);
                let s = (-g.c).clamp(s0, s1);
                phi(g.c + s) * phi(t * g.w_norm) * g.w_norm
            })
            .collect();
        Self { regions, cumulative, envelope }
    }

    fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    fn draw<R: Rng + ?Sized>(&self, r: &mut R) -> V2 {
        let u = r.gen::<f64>() * self.total();
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.regions.len() - 1);
        let g = self.regions[k];
        let (t0, t1, s0, s1) = bounds(g);
        loop {
            let t = t0 + (t1 - t0) * r.gen::<f64>();
            let s = s0 + (s1 - s0) * r.gen::<f64>();
            if !g.contains_local(t, s) {
                continue;
            }
            let f = phi(g.c + s) * phi(t * g.w_norm) * g.w_norm;
            if r.gen::<f64>() * self.envelope[k] <= f {
                return g.point(t, s);
            }
        }
    }

    fn multiplicity(&self, x: V2) -> usize {
        self.regions.iter().filter(|g| g.contains(x)).count()
    }
}

fn bounds(g: &PatchGeometry) -> (f64, f64, f64, f64) {
    let p = &g.patch;
    let (s0, s1) = if p.sign > 0 { (0.0, p.height) } else { (-p.height, 0.0) };
    (p.center_t - p.half_width, p.center_t + p.half_width, s0, s1)
}

/// Estimates `S(b) − S(a)` for two partitions built on the same flat base.
/// Both partitions see the same draws, so comparisons made from one stream
/// share their random numbers.
pub fn compare_localized(
    a: &Partition,
    b: &Partition,
    model: &CorrelatedGaussianModel,
    samples: u64,
    rng: RngStream,
) -> Result<DifferenceEstimate> {
    let (base_a, ga) = split(a)?;
    let (base_b, gb) = split(b)?;
    if base_a != base_b {
        return Err(domain("localized comparison needs a common flat base"));
    }
    if model.n() != 2 {
        return Err(domain("localized comparison is planar"));
    }
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let sampler = Sampler::new(ga.iter().chain(gb).collect());
    let mass = sampler.total();
    if sampler.regions.is_empty() || mass == 0.0 {
        return Ok(DifferenceEstimate { difference: 0.0, std_error: 0.0, region_mass: 0.0, samples, seed: rng });
    }
    let (rho, sigma) = (model.rho(), model.sigma());
    let cells: Vec<ConeCell2D> = (0..base_a.k()).map(|i| base_a.cell_cone(i)).collect::<Result<_>>()?;
    let parts = map_blocks(rng, samples, |r, count| {
        let mut m = Moments::default();
        let mut failure = None;
        for _ in 0..count {
            let x = sampler.draw(r);
            let z0: f64 = r.sample(StandardNormal);
            let z1: f64 = r.sample(StandardNormal);
            let y = [rho * x[0] + sigma * z0, rho * x[1] + sigma * z1];
            let (ax, bx) = (a.classify(&x), b.classify(&x));
            let mut v = 0.0;
            if ax != bx {
                let tb = t_rho_cone2d_tol(&cells[bx], rho, x, COND_TOL);
                let ta = t_rho_cone2d_tol(&cells[ax], rho, x, COND_TOL);
                match (tb, ta) {
                    (Ok(tb), Ok(ta)) => v += 2.0 * (tb - ta),
                    (Err(e), _) | (_, Err(e)) => {
                        failure.get_or_insert(e);
                    }
                }
            }
            if sampler.multiplicity(y) > 0 {
                let (ay, by, fy) = (a.classify(&y), b.classify(&y), base_a.classify(&y));
                let ind = |c: bool| f64::from(u8::from(c));
                let residual = ind(by == bx) - ind(fy == bx) - ind(ay == ax) + ind(fy == ax);
                let d = ind(by == bx) - ind(ay == ax);
                v += 2.0 * residual - d;
            }
            m.push(v / sampler.multiplicity(x) as f64);
        }
        (m, failure)
    });
    let mut moments = Vec::with_capacity(parts.len());
    for (m, failure) in parts {
        if let Some(e) = failure {
            return Err(e);
        }
        moments.push(m);
    }
    let m = reduce_moments(&moments);
    Ok(DifferenceEstimate {
        difference: mass * m.mean(),
        std_error: mass * m.std_error(),
        region_mass: mass,
        samples,
        seed: rng,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_standard_simplex, BumpPatch, PerturbedPartition, Profile, StandardSimplexSpec};
    use crate::stability::compare_mc;

    fn base() -> FlatPartition {
        make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.6, 0.0] }).unwrap()
    }

    fn perturbed(p: &FlatPartition, h: f64) -> PerturbedPartition {
        let (i, j) = p.adjacent_pairs().unwrap()[0];
        let lr = p.line_restriction(i, j).unwrap();
        let mk = |t: f64, sign: i8, height: f64| BumpPatch {
            facet: (i, j),
            center_t: t,
            half_width: 0.25,
            height,
            sign,
            profile: Profile::SmoothBump,
        };
        let g1 = PatchGeometry::new(mk(1.5, 1, h), &lr);
        // Match the areas by bisection on the second height.
        let (mut lo, mut hi) = (0.0, 20.0 * h);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if PatchGeometry::new(mk(2.1, -1, mid), &lr).area < g1.area {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        PerturbedPartition::new(p.clone(), vec![mk(1.5, 1, h), mk(2.1, -1, 0.5 * (lo + hi))]).unwrap()
    }

    #[test]
    fn identical_partitions_give_zero() {
        let p = base();
        let q = Partition::from(perturbed(&p, 0.1));
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let d = compare_localized(&q, &q, &m, 10_000, RngStream::new(1, 0)).unwrap();
        assert_eq!(d.difference, 0.0);
    }

    #[test]
    fn antisymmetric_in_the_arguments() {
        let p = base();
        let q = Partition::from(perturbed(&p, 0.1));
        let f = Partition::from(p);
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let d1 = compare_localized(&f, &q, &m, 10_000, RngStream::new(2, 0)).unwrap();
        let d2 = compare_localized(&q, &f, &m, 10_000, RngStream::new(2, 0)).unwrap();
        assert_eq!(d1.difference, -d2.difference);
    }

    #[test]
    fn agrees_with_plain_common_random_numbers() {
        let p = base();
        let q = Partition::from(perturbed(&p, 0.2));
        let f = Partition::from(p);
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let loc = compare_localized(&f, &q, &m, 400_000, RngStream::new(3, 0)).unwrap();
        let plain = compare_mc(&f, &q, &m, 2_000_000, RngStream::new(3, 1)).unwrap();
        let se = (loc.std_error.powi(2) + plain.difference_se.powi(2)).sqrt();
        assert!(
            (loc.difference - plain.difference).abs() < 4.0 * se,
            "{} vs {} (se {se})",
            loc.difference,
            plain.difference
        );
        assert!(loc.std_error < plain.difference_se);
    }
}
