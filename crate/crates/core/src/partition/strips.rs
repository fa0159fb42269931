//! Partitions into parallel slabs `{cuts[m−1] < ⟨x, u⟩ ≤ cuts[m]}`.
//!
//! Several slabs may share a label and a label may own no slab at all, which
//! is how a partition with an empty cell is written down.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geom::{dot, norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StripsDoc", into = "StripsDoc")]
pub struct ParallelStrips {
    n: usize,
    k: usize,
    normal: Vec<f64>,
    cuts: Vec<f64>,
    labels: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct StripsDoc {
    n: usize,
    k: usize,
    normal: Vec<f64>,
    cuts: Vec<f64>,
    labels: Vec<usize>,
}

impl TryFrom<StripsDoc> for ParallelStrips {
    type Error = Error;
    fn try_from(d: StripsDoc) -> Result<Self> {
        let s = ParallelStrips::new(d.k, d.normal, d.cuts, d.labels)?;
        if s.n != d.n {
            return Err(domain("declared n does not match the normal"));
        }
        Ok(s)
    }
}

impl From<ParallelStrips> for StripsDoc {
    fn from(s: ParallelStrips) -> Self {
        StripsDoc { n: s.n, k: s.k, normal: s.normal, cuts: s.cuts, labels: s.labels }
    }
}

impl ParallelStrips {
    /// `labels[m]` names the cell of the `m`-th slab, counted along `normal`.
    pub fn new(k: usize, normal: Vec<f64>, cuts: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        let len = norm(&normal);
        if normal.is_empty() || !(len > 0.0 && len.is_finite()) {
            return Err(domain("strip normal must be finite and nonzero"));
        }
        if labels.len() != cuts.len() + 1 {
            return Err(domain("need exactly one more label than cuts"));
        }
        if cuts.iter().any(|c| c.is_nan()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("cuts must be strictly increasing"));
        }
        if labels.iter().any(|&l| l >= k) {
            return Err(domain("strip label out of range"));
        }
        let normal: Vec<f64> = normal.iter().map(|v| v / len).collect();
        Ok(Self { n: normal.len(), k, normal, cuts, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn classify(&self, x: &[f64]) -> usize {
        let v = dot(x, &self.normal);
        let m = self.cuts.partition_point(|&c| c < v);
        self.labels[m]
    }

    /// Slabs as `(lo, hi, label)` in the coordinate `⟨x, u⟩`.
    pub fn slabs(&self) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::with_capacity(self.labels.len());
        let mut lo = f64::NEG_INFINITY;
        for (m, &l) in self.labels.iter().enumerate() {
            let hi = self.cuts.get(m).copied().unwrap_or(f64::INFINITY);
            out.push((lo, hi, l));
            lo = hi;
        }
        out
    }

    /// The same partition described with the opposite normal.
    pub fn flipped(&self) -> Self {
        let cuts: Vec<f64> = self.cuts.iter().rev().map(|c| -c).collect();
        let labels: Vec<usize> = self.labels.iter().rev().copied().collect();
        Self {
            n: self.n,
            k: self.k,
            normal: self.normal.iter().map(|v| -v).collect(),
            cuts,
            labels,
        }
    }
}
