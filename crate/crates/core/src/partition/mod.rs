//! Partitions of `R^n`: flat, perturbed and parallel-strip.

mod flat;
mod perturbed;
mod strips;

use serde::{Deserialize, Serialize};

pub use flat::{make_standard_simplex, simplex_directions, Facet, FlatPartition, StandardSimplexSpec};
pub use perturbed::{BumpPatch, PatchGeometry, PerturbedPartition, Profile, BALANCE_TOL};
pub use strips::ParallelStrips;

use crate::error::{domain, Error, Result};
use crate::gaussian::{CorrelatedGaussianModel, RngStream};
use crate::mc::{map_blocks, proportion_se};

/// Anything that assigns points to one of `k` cells.
pub trait Classify: Sync {
    fn dim(&self) -> usize;
    fn cells(&self) -> usize;
    fn classify(&self, x: &[f64]) -> usize;
}

impl Classify for FlatPartition {
    fn dim(&self) -> usize {
        self.n()
    }
    fn cells(&self) -> usize {
        self.k()
    }
    #[inline]
    fn classify(&self, x: &[f64]) -> usize {
        FlatPartition::classify(self, x)
    }
}

impl Classify for PerturbedPartition {
    fn dim(&self) -> usize {
        2
    }
    fn cells(&self) -> usize {
        self.base().k()
    }
    #[inline]
    fn classify(&self, x: &[f64]) -> usize {
        PerturbedPartition::classify(self, x)
    }
}

impl Classify for ParallelStrips {
    fn dim(&self) -> usize {
        self.n()
    }
    fn cells(&self) -> usize {
        self.k()
    }
    #[inline]
    fn classify(&self, x: &[f64]) -> usize {
        ParallelStrips::classify(self, x)
    }
}

/// Any supported partition.
#[derive(Debug, Clone, PartialEq)]
pub enum Partition {
    Flat(FlatPartition),
    Perturbed(PerturbedPartition),
    Strips(ParallelStrips),
}

impl Classify for Partition {
    fn dim(&self) -> usize {
        match self {
            Partition::Flat(p) => p.dim(),
            Partition::Perturbed(p) => p.dim(),
            Partition::Strips(p) => p.dim(),
        }
    }
    fn cells(&self) -> usize {
        match self {
            Partition::Flat(p) => p.cells(),
            Partition::Perturbed(p) => p.cells(),
            Partition::Strips(p) => p.cells(),
        }
    }
    #[inline]
    fn classify(&self, x: &[f64]) -> usize {
        match self {
            Partition::Flat(p) => p.classify(x),
            Partition::Perturbed(p) => p.classify(x),
            Partition::Strips(p) => p.classify(x),
        }
    }
}

impl From<FlatPartition> for Partition {
    fn from(p: FlatPartition) -> Self {
        Partition::Flat(p)
    }
}

impl From<PerturbedPartition> for Partition {
    fn from(p: PerturbedPartition) -> Self {
        Partition::Perturbed(p)
    }
}

impl From<ParallelStrips> for Partition {
    fn from(p: ParallelStrips) -> Self {
        Partition::Strips(p)
    }
}

/// JSON form of a partition. Flat and perturbed partitions use
/// `{n, k, shift, directions, patches}`; strips use
/// `{n, k, normal, cuts, labels}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionDoc {
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patches: Option<Vec<BumpPatch>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
}

impl TryFrom<PartitionDoc> for Partition {
    type Error = Error;

    fn try_from(d: PartitionDoc) -> Result<Self> {
        if let Some(normal) = d.normal {
            let s = ParallelStrips::new(
                d.k,
                normal,
                d.cuts.unwrap_or_default(),
                d.labels.ok_or_else(|| domain("strip partition needs labels"))?,
            )?;
            if s.n() != d.n {
                return Err(domain("declared n does not match the normal"));
            }
            return Ok(Partition::Strips(s));
        }
        let shift = d.shift.ok_or_else(|| domain("partition needs a shift"))?;
        let directions = d.directions.ok_or_else(|| domain("partition needs directions"))?;
        let flat = FlatPartition::new(shift, directions)?;
        if flat.n() != d.n || flat.k() != d.k {
            return Err(domain("declared n/k do not match shift and directions"));
        }
        match d.patches {
            Some(p) if !p.is_empty() => Ok(Partition::Perturbed(PerturbedPartition::new(flat, p)?)),
            _ => Ok(Partition::Flat(flat)),
        }
    }
}

impl From<&Partition> for PartitionDoc {
    fn from(p: &Partition) -> Self {
        match p {
            Partition::Flat(f) => PartitionDoc {
                n: f.n(),
                k: f.k(),
                shift: Some(f.shift().to_vec()),
                directions: Some(f.directions().to_vec()),
                patches: Some(Vec::new()),
                ..Default::default()
            },
            Partition::Perturbed(q) => PartitionDoc {
                n: 2,
                k: q.base().k(),
                shift: Some(q.base().shift().to_vec()),
                directions: Some(q.base().directions().to_vec()),
                patches: Some(q.patches().to_vec()),
                ..Default::default()
            },
            Partition::Strips(s) => PartitionDoc {
                n: s.n(),
                k: s.k(),
                normal: Some(s.normal().to_vec()),
                cuts: Some(s.cuts().to_vec()),
                labels: Some(s.labels().to_vec()),
                ..Default::default()
            },
        }
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PartitionDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PartitionDoc::deserialize(d)?;
        Partition::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// Monte Carlo cell volumes with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub volumes: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub samples: u64,
    pub seed: RngStream,
}

/// Minimum sample count accepted by the Monte Carlo estimators.
pub const MIN_SAMPLES: u64 = 1_000;

/// Counts of `X`-samples per cell. Uses the `X` half of each correlated pair
/// so that volume and stability runs on the same stream see the same points.
pub fn estimate_volumes<P: Classify + ?Sized>(
    p: &P,
    model: &CorrelatedGaussianModel,
    samples: u64,
    rng: RngStream,
) -> Result<VolumeEstimate> {
    if samples < MIN_SAMPLES {
        return Err(domain(format!("need at least {MIN_SAMPLES} samples")));
    }
    if model.n() != p.dim() {
        return Err(domain("model and partition dimensions differ"));
    }
    let k = p.cells();
    let n = model.n();
    let parts = map_blocks(rng, samples, |r, count| {
        let mut counts = vec![0u64; k];
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        for _ in 0..count {
            model.fill_pair(r, &mut x, &mut y);
            counts[p.classify(&x)] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; k];
    for c in &parts {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    let volumes: Vec<f64> = counts.iter().map(|&c| c as f64 / samples as f64).collect();
    let std_errors = volumes.iter().map(|&v| proportion_se(v, samples)).collect();
    Ok(VolumeEstimate { volumes, std_errors, samples, seed: rng })
}

/// Exact cell volumes of a planar flat partition.
pub fn exact_volumes(p: &FlatPartition) -> Result<Vec<f64>> {
    (0..p.k())
        .map(|i| p.cell_cone(i).map(|c| crate::ou::cone_measure(&c)))
        .collect()
}

/// Exact volumes of a planar flat or perturbed partition, or of strips.
pub fn partition_volumes(p: &Partition) -> Result<Vec<f64>> {
    match p {
        Partition::Flat(f) => exact_volumes(f),
        Partition::Perturbed(q) => Ok(q.adjust_volumes(&exact_volumes(q.base())?)),
        Partition::Strips(s) => {
            let mut v = vec![0.0; s.k()];
            for (lo, hi, l) in s.slabs() {
                v[l] += crate::ou::phi_interval(lo, hi);
            }
            Ok(v)
        }
    }
}

/// Shifted planar standard simplex with the given three cell volumes,
/// found by damped Newton iteration on the shift.
pub fn simplex_with_volumes(target: [f64; 3]) -> Result<FlatPartition> {
    if target.iter().any(|v| !(*v > 0.0 && *v < 1.0)) || (target.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(domain("target volumes must be positive and sum to 1"));
    }
    let base = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.0, 0.0] })?;
    let resid = |y: [f64; 2]| -> Result<[f64; 2]> {
        let v = exact_volumes(&base.with_shift(y.to_vec())?)?;
        Ok([v[0] - target[0], v[1] - target[1]])
    };
    let mut y = [0.0, 0.0];
    let mut r = resid(y)?;
    for _ in 0..100 {
        let size = r[0].hypot(r[1]);
        if size < 1e-13 {
            return base.with_shift(y.to_vec());
        }
        let h = 1e-6;
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let (mut a, mut b) = (y, y);
            a[k] += h;
            b[k] -= h;
            let (ra, rb) = (resid(a)?, resid(b)?);
            for i in 0..2 {
                jac[i][k] = (ra[i] - rb[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let step = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
        ];
        let mut lambda = 1.0;
        loop {
            let cand = [y[0] - lambda * step[0], y[1] - lambda * step[1]];
            let rc = resid(cand)?;
            if rc[0].hypot(rc[1]) < size || lambda < 1e-4 {
                y = cand;
                r = rc;
                break;
            }
            lambda *= 0.5;
        }
    }
    Err(Error::Accuracy("volume targeting did not converge".into()))
}

pub use crate::gaussian::halfspace_volume;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targeted_volumes_are_reached() {
        let p = simplex_with_volumes([0.4, 0.3, 0.3]).unwrap();
        let v = exact_volumes(&p).unwrap();
        for (a, b) in v.iter().zip([0.4, 0.3, 0.3]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(simplex_with_volumes([0.5, 0.5, 0.0]).is_err());
    }

    #[test]
    fn centered_simplex_volumes() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.0, 0.0] }).unwrap();
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let v = estimate_volumes(&p, &m, 200_000, RngStream::new(1, 0)).unwrap();
        assert_eq!(v.volumes.iter().sum::<f64>(), 1.0);
        for (a, se) in v.volumes.iter().zip(&v.std_errors) {
            assert!((a - 1.0 / 3.0).abs() < 4.0 * se);
        }
        for e in exact_volumes(&p).unwrap() {
            assert!((e - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(estimate_volumes(&p, &m, 10, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn half_space_volumes_match_the_cdf() {
        let s = 0.6;
        let p = FlatPartition::new(vec![s, 0.0], vec![vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let m = CorrelatedGaussianModel::new(2, 0.0).unwrap();
        let v = estimate_volumes(&p, &m, 200_000, RngStream::new(2, 0)).unwrap();
        // Cell 0 is {x_1 ≤ s}, where ⟨x − y, −e_1⟩ ≥ ⟨x − y, e_1⟩.
        let expect = [crate::gaussian::norm_cdf(s), crate::gaussian::norm_cdf(-s)];
        for i in 0..2 {
            assert!((v.volumes[i] - expect[i]).abs() < 4.0 * v.std_errors[i]);
        }
    }

    #[test]
    fn halfspace_volume_mc_cross_check() {
        let exact = halfspace_volume(1.0).unwrap();
        let p = FlatPartition::new(vec![1.0], vec![vec![1.0], vec![-1.0]]).unwrap();
        let m = CorrelatedGaussianModel::new(1, 0.0).unwrap();
        let v = estimate_volumes(&p, &m, 1_000_000, RngStream::new(3, 0)).unwrap();
        assert!((v.volumes[1] - exact).abs() < 4.0 * v.std_errors[1]);
    }

    #[test]
    fn document_round_trip() {
        let p: Partition = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.1, 0.0] })
            .unwrap()
            .into();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"patches\":[]"));
        let q: Partition = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let strips: Partition = ParallelStrips::new(2, vec![1.0, 0.0], vec![0.0], vec![0, 1]).unwrap().into();
        let t: Partition = serde_json::from_str(&serde_json::to_string(&strips).unwrap()).unwrap();
        assert_eq!(strips, t);
        assert!(serde_json::from_str::<Partition>("{\"n\":2,\"k\":3}").is_err());
    }
}
