//! Whitened count statistics and the limiting Gaussian partition.
//!
//! For counts `N` of `n` votes the statistic is
//! `X_i = (N_i − n/3)/√n = (3N_i − n)/(3√n)`, `i = 1, 2`. Under the uniform
//! measure its covariance is the one-vote covariance `Σ` of the indicators
//! of candidates 1 and 2. The whitened point `z = Σ^{−1/2} X` is
//! asymptotically standard Gaussian up to the mean shift `Σ^{−1/2}(α, β)`.

use serde::{Deserialize, Serialize};

use super::measure::{BiasedMeasure, Counts, CANDIDATES};
use crate::error::{domain, Result};
use crate::geom::V2;
use crate::partition::FlatPartition;

pub type Mat2 = [[f64; 2]; 2];

/// Covariance of `(1(ω=1), 1(ω=2))` for one uniform vote, by enumeration.
pub fn uniform_vote_covariance() -> Mat2 {
    let p = 1.0 / CANDIDATES as f64;
    let ind = |w: usize, i: usize| if w == i { 1.0 } else { 0.0 };
    let mut cov = [[0.0; 2]; 2];
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let joint: f64 = (0..CANDIDATES).map(|w| p * ind(w, i) * ind(w, j)).sum();
            let mi: f64 = (0..CANDIDATES).map(|w| p * ind(w, i)).sum();
            let mj: f64 = (0..CANDIDATES).map(|w| p * ind(w, j)).sum();
            *cell = joint - mi * mj;
        }
    }
    cov
}

/// `m^power` for a symmetric positive definite 2×2 matrix.
pub fn sym_power(m: &Mat2, power: f64) -> Result<Mat2> {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    if (m[1][0] - b).abs() > 1e-15 * (1.0 + b.abs()) {
        return Err(domain("matrix is not symmetric"));
    }
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (mean + rad, mean - rad);
    if l2 <= 0.0 {
        return Err(domain("matrix is not positive definite"));
    }
    // Unit eigenvector for l1; the other is its perpendicular.
    let (vx, vy) = if b.abs() > 0.0 {
        let (x, y) = (b, l1 - a);
        let r = x.hypot(y);
        (x / r, y / r)
    } else if a >= c {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let (p1, p2) = (l1.powf(power), l2.powf(power));
    Ok([
        [p1 * vx * vx + p2 * vy * vy, (p1 - p2) * vx * vy],
        [(p1 - p2) * vx * vy, p1 * vy * vy + p2 * vx * vx],
    ])
}

fn apply(m: &Mat2, v: V2) -> V2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// The whitened statistic map for `n` voters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticEmbedding {
    n: u64,
    #[serde(skip)]
    whitening: Mat2,
    #[serde(skip)]
    coloring: Mat2,
}

impl StatisticEmbedding {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain("need at least one voter"));
        }
        let cov = uniform_vote_covariance();
        Ok(Self { n, whitening: sym_power(&cov, -0.5)?, coloring: sym_power(&cov, 0.5)? })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `Σ^{−1/2}`.
    pub fn whitening(&self) -> &Mat2 {
        &self.whitening
    }

    /// `Σ^{1/2}`.
    pub fn coloring(&self) -> &Mat2 {
        &self.coloring
    }

    /// Exact integer numerators `3N_i − n` of the statistic.
    pub fn numerators(&self, c: &Counts) -> [i64; 2] {
        [3 * c[0] as i64 - self.n as i64, 3 * c[1] as i64 - self.n as i64]
    }

    /// `(X_1, X_2)`.
    pub fn statistic(&self, c: &Counts) -> V2 {
        let s = 3.0 * (self.n as f64).sqrt();
        let [a, b] = self.numerators(c);
        [a as f64 / s, b as f64 / s]
    }

    pub fn whiten(&self, x: V2) -> V2 {
        apply(&self.whitening, x)
    }

    pub fn color(&self, z: V2) -> V2 {
        apply(&self.coloring, z)
    }

    /// Whitened statistic of a count vector.
    #[inline]
    pub fn embed(&self, c: &Counts) -> V2 {
        self.whiten(self.statistic(c))
    }

    /// Mean of the limiting whitened statistic under `measure`.
    pub fn limit_offset(&self, measure: &BiasedMeasure) -> V2 {
        self.whiten(measure.limit_mean())
    }

    /// Limit of plurality, as a flat partition of standard Gaussian space.
    /// A whitened statistic `z` corresponds to the point `z − offset`.
    pub fn limit_partition(&self, measure: &BiasedMeasure) -> Result<(FlatPartition, V2)> {
        let off = self.limit_offset(measure);
        let dirs: Vec<Vec<f64>> = [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]
            .iter()
            .map(|&e| {
                let v = self.color(e);
                let r = v[0].hypot(v[1]);
                vec![v[0] / r, v[1] / r]
            })
            .collect();
        Ok((FlatPartition::new(vec![-off[0], -off[1]], dirs)?, off))
    }

    /// Count vectors whose whitened statistic lies in `[lo, hi]`, with
    /// their whitened points.
    pub fn lattice_in_box(&self, lo: V2, hi: V2) -> Vec<(Counts, V2)> {
        let n = self.n as f64;
        let sn = n.sqrt();
        let corners = [[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]].map(|z| self.color(z));
        let range = |i: usize| {
            let xs = corners.map(|c| c[i]);
            let a = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let b = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = (n / 3.0 + sn * a).floor().max(0.0) as u64;
            let hi = ((n / 3.0 + sn * b).ceil().max(0.0) as u64).min(self.n);
            (lo, hi)
        };
        let (a0, a1) = range(0);
        let (b0, b1) = range(1);
        let mut out = Vec::new();
        for n1 in a0..=a1 {
            for n2 in b0..=b1.min(self.n - n1) {
                let c = [n1, n2, self.n - n1 - n2];
                let z = self.embed(&c);
                if z[0] >= lo[0] && z[0] <= hi[0] && z[1] >= lo[1] && z[1] <= hi[1] {
                    out.push((c, z));
                }
            }
        }
        out
    }
}

/// `log P[N = c]` for `n = Σc` votes from `q`.
pub fn multinomial_log_pmf(c: &Counts, q: &[f64; CANDIDATES]) -> f64 {
    let n: u64 = c.iter().sum();
    let mut v = libm::lgamma(n as f64 + 1.0);
    for a in 0..CANDIDATES {
        v -= libm::lgamma(c[a] as f64 + 1.0);
        if c[a] > 0 {
            v += c[a] as f64 * q[a].ln();
        }
    }
    v
}
