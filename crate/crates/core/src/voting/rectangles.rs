//! Disjoint axis-parallel rectangles in whitened statistic coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::RngStream;
use crate::geom::V2;
use crate::mc::{map_blocks, proportion_se};
use crate::partition::Classify;
use rand_distr::{Distribution, StandardNormal};

/// The half-open box `[x0, x1) × [y0, y1)` carrying a 0-based label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub label: usize,
}

impl Rect {
    #[inline]
    pub fn contains(&self, z: V2) -> bool {
        z[0] >= self.x0 && z[0] < self.x1 && z[1] >= self.y0 && z[1] < self.y1
    }

    pub fn translated(&self, d: V2) -> Rect {
        Rect { x0: self.x0 + d[0], x1: self.x1 + d[0], y0: self.y0 + d[1], y1: self.y1 + d[1], label: self.label }
    }
}

/// Pairwise disjoint rectangles with constant-time-ish lookup through a
/// coordinate-compressed table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rect>", into = "Vec<Rect>")]
pub struct RectangleSet {
    rects: Vec<Rect>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// `label + 1` per compressed cell, row-major in `y`; 0 when uncovered.
    table: Vec<u32>,
}

impl TryFrom<Vec<Rect>> for RectangleSet {
    type Error = crate::Error;
    fn try_from(r: Vec<Rect>) -> Result<Self> {
        RectangleSet::new(r)
    }
}

impl From<RectangleSet> for Vec<Rect> {
    fn from(s: RectangleSet) -> Self {
        s.rects
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

fn index_of(grid: &[f64], v: f64) -> usize {
    grid.partition_point(|&g| g < v)
}

impl RectangleSet {
    pub fn new(rects: Vec<Rect>) -> Result<Self> {
        for r in &rects {
            let finite = [r.x0, r.x1, r.y0, r.y1].iter().all(|v| v.is_finite());
            if !finite || r.x0 >= r.x1 || r.y0 >= r.y1 {
                return Err(domain(format!("degenerate rectangle {r:?}")));
            }
            if r.label >= u32::MAX as usize {
                return Err(domain("rectangle label out of range"));
            }
        }
        let xs = sorted_unique(rects.iter().flat_map(|r| [r.x0, r.x1]).collect());
        let ys = sorted_unique(rects.iter().flat_map(|r| [r.y0, r.y1]).collect());
        let nx = xs.len().saturating_sub(1);
        let ny = ys.len().saturating_sub(1);
        let mut table = vec![0u32; nx * ny];
        for (k, r) in rects.iter().enumerate() {
            let (i0, i1) = (index_of(&xs, r.x0), index_of(&xs, r.x1));
            let (j0, j1) = (index_of(&ys, r.y0), index_of(&ys, r.y1));
            for j in j0..j1 {
                for i in i0..i1 {
                    let cell = &mut table[j * nx + i];
                    if *cell != 0 {
                        return Err(domain(format!("rectangles {} and {k} overlap", *cell - 1)));
                    }
                    *cell = k as u32 + 1;
                }
            }
        }
        // Store labels instead of rectangle indices once overlaps are ruled out.
        for cell in table.iter_mut().filter(|c| **c != 0) {
            *cell = rects[*cell as usize - 1].label as u32 + 1;
        }
        Ok(Self { rects, xs, ys, table })
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// Label of the rectangle containing `z`, if any.
    #[inline]
    pub fn lookup(&self, z: V2) -> Option<usize> {
        let nx = self.xs.len().checked_sub(1)?;
        let i = self.xs.partition_point(|&g| g <= z[0]).checked_sub(1)?;
        let j = self.ys.partition_point(|&g| g <= z[1]).checked_sub(1)?;
        if i >= nx || j + 1 >= self.ys.len() {
            return None;
        }
        match self.table[j * nx + i] {
            0 => None,
            l => Some(l as usize - 1),
        }
    }

    pub fn translated(&self, d: V2) -> Result<Self> {
        Self::new(self.rects.iter().map(|r| r.translated(d)).collect())
    }

    /// Smallest box containing every rectangle, as `(lo, hi)`.
    pub fn bounding_box(&self) -> Option<(V2, V2)> {
        if self.rects.is_empty() {
            return None;
        }
        Some(([self.xs[0], self.ys[0]], [*self.xs.last()?, *self.ys.last()?]))
    }

    /// Rectangles carrying `label`.
    pub fn with_label(&self, label: usize) -> Result<Self> {
        Self::new(self.rects.iter().copied().filter(|r| r.label == label).collect())
    }
}

/// Labels on a uniform grid over `[−radius, radius]²`, row-major with rows
/// running upward in the second coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    pub radius: f64,
    pub resolution: usize,
    pub labels: Vec<usize>,
}

/// Smallest grid accepted by [`rectangle_approximate`].
pub const MIN_RESOLUTION: usize = 16;

impl GridPartition {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(domain("grid radius must be positive"));
        }
        if self.resolution == 0 || self.labels.len() != self.resolution * self.resolution {
            return Err(domain("grid label count must equal resolution squared"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        2.0 * self.radius / self.resolution as f64
    }

    /// Label of the grid cell containing `z`, or `None` off the grid.
    #[inline]
    pub fn lookup(&self, z: V2) -> Option<usize> {
        let h = self.step();
        let i = ((z[0] + self.radius) / h).floor();
        let j = ((z[1] + self.radius) / h).floor();
        let r = self.resolution as f64;
        if i < 0.0 || j < 0.0 || i >= r || j >= r {
            return None;
        }
        Some(self.labels[j as usize * self.resolution + i as usize])
    }

    /// The grid as rectangles, merging equal-label runs along each row.
    pub fn to_rectangles(&self) -> Result<RectangleSet> {
        self.validate()?;
        let h = self.step();
        let edge = |k: usize| -self.radius + k as f64 * h;
        let mut rects = Vec::new();
        for j in 0..self.resolution {
            let row = &self.labels[j * self.resolution..(j + 1) * self.resolution];
            let mut start = 0;
            for i in 1..=self.resolution {
                if i == self.resolution || row[i] != row[start] {
                    rects.push(Rect { x0: edge(start), x1: edge(i), y0: edge(j), y1: edge(j + 1), label: row[start] });
                    start = i;
                }
            }
        }
        RectangleSet::new(rects)
    }
}

/// Labels each grid cell of `[−radius, radius]²` by classifying its center.
pub fn rectangle_approximate<P: Classify + ?Sized>(p: &P, resolution: usize, radius: f64) -> Result<GridPartition> {
    if p.dim() != 2 {
        return Err(domain("rectangle approximation needs a planar partition"));
    }
    if resolution < MIN_RESOLUTION {
        return Err(domain(format!("resolution must be at least {MIN_RESOLUTION}")));
    }
    let g = GridPartition { radius, resolution, labels: Vec::new() };
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(domain("grid radius must be positive"));
    }
    let h = g.step();
    let mut labels = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        let y = -radius + (j as f64 + 0.5) * h;
        for i in 0..resolution {
            let x = -radius + (i as f64 + 0.5) * h;
            labels.push(p.classify(&[x, y]));
        }
    }
    Ok(GridPartition { labels, ..g })
}

/// Monte Carlo estimate of the Gaussian measure where `grid` disagrees with
/// `p`, counting off-grid points as disagreement. Returns `(value, se)`.
pub fn symmetric_difference<P: Classify + ?Sized>(
    grid: &GridPartition,
    p: &P,
    samples: u64,
    stream: RngStream,
) -> Result<(f64, f64)> {
    grid.validate()?;
    if p.dim() != 2 || samples == 0 {
        return Err(domain("need a planar partition and a positive sample count"));
    }
    let hits: u64 = map_blocks(stream, samples, |rng, count| {
        let mut miss = 0u64;
        for _ in 0..count {
            let x: V2 = [StandardNormal.sample(rng), StandardNormal.sample(rng)];
            if grid.lookup(x) != Some(p.classify(&x)) {
                miss += 1;
            }
        }
        miss
    })
    .iter()
    .sum();
    let v = hits as f64 / samples as f64;
    Ok((v, proportion_se(v, samples)))
}
