//! Flat planar partitions with smooth bump patches that move pieces of a
//! facet neighbourhood from one cell to the other.

use serde::{Deserialize, Serialize};

use super::flat::FlatPartition;
use crate::error::{domain, unsupported, Error, Result};
use crate::gaussian::quadrature::adaptive_gk;
use crate::gaussian::phi;
use crate::geom::{dot2, norm2, to_v2, V2};
use crate::ou::{phi_interval, LineRestriction};

/// Shape of a bump patch in its normalized coordinate `u ∈ (−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(1 − 1/(1 − u²))`, smooth with compact support and peak 1.
    #[default]
    SmoothBump,
}

impl Profile {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Profile::SmoothBump => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                }
            }
        }
    }
}

/// A bump on facet `(i, j)`.
///
/// In facet coordinates `t` (along `w`) and `s = ⟨x, N⟩ − c` it occupies
/// `|t − center_t| ≤ half_width`, `0 ≤ sign·s ≤ height·profile(·)`. With
/// `sign = +1` that region lies on the side of cell `j` and is handed to
/// cell `i`; `sign = −1` hands a region of cell `i` to `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpPatch {
    pub facet: (usize, usize),
    pub center_t: f64,
    pub half_width: f64,
    pub height: f64,
    pub sign: i8,
    #[serde(default)]
    pub profile: Profile,
}

impl BumpPatch {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(domain("patch half_width must be positive"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(domain("patch height must be positive"));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(domain("patch sign must be +1 or -1"));
        }
        if !self.center_t.is_finite() {
            return Err(domain("patch center must be finite"));
        }
        if self.facet.0 == self.facet.1 {
            return Err(domain("patch facet must join two different cells"));
        }
        Ok(())
    }

    /// Cell losing the region.
    pub fn from_cell(&self) -> usize {
        if self.sign > 0 {
            self.facet.1
        } else {
            self.facet.0
        }
    }

    /// Cell gaining the region.
    pub fn to_cell(&self) -> usize {
        if self.sign > 0 {
            self.facet.0
        } else {
            self.facet.1
        }
    }
}

/// A patch resolved against the geometry of its facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    pub patch: BumpPatch,
    pub normal: V2,
    pub c: f64,
    pub w: V2,
    pub w_norm: f64,
    /// Exact Gaussian measure of the region.
    pub area: f64,
}

impl PatchGeometry {
    pub fn new(patch: BumpPatch, lr: &LineRestriction) -> Self {
        let w = to_v2(&lr.w);
        let mut g = Self {
            patch,
            normal: to_v2(&lr.normal),
            c: lr.c,
            w,
            w_norm: norm2(w),
            area: 0.0,
        };
        g.area = g.area_with_height(patch.height);
        g
    }

    /// Facet coordinates `(t, s)` of `x`.
    #[inline]
    pub fn local(&self, x: V2) -> (f64, f64) {
        let t = dot2(x, self.w) / (self.w_norm * self.w_norm);
        let s = dot2(x, self.normal) - self.c;
        (t, s)
    }

    /// Point with facet coordinates `(t, s)`.
    #[inline]
    pub fn point(&self, t: f64, s: f64) -> V2 {
        [
            (self.c + s) * self.normal[0] + t * self.w[0],
            (self.c + s) * self.normal[1] + t * self.w[1],
        ]
    }

    #[inline]
    pub fn contains_local(&self, t: f64, s: f64) -> bool {
        let p = &self.patch;
        let u = (t - p.center_t) / p.half_width;
        if u.abs() >= 1.0 {
            return false;
        }
        let ss = f64::from(p.sign) * s;
        ss >= 0.0 && ss <= p.height * p.profile.eval(u)
    }

    #[inline]
    pub fn contains(&self, x: V2) -> bool {
        let (t, s) = self.local(x);
        self.contains_local(t, s)
    }

    /// Gaussian measure of the region for a given height. The density at
    /// `(t, s)` factors as `φ(c + s)·φ(t‖w‖)·‖w‖`.
    pub fn area_with_height(&self, height: f64) -> f64 {
        let p = self.patch;
        let c = self.c;
        let wn = self.w_norm;
        let f = |u: f64| {
            let t = p.center_t + p.half_width * u;
            let d = height * p.profile.eval(u);
            let normal_mass = if p.sign > 0 {
                phi_interval(c, c + d)
            } else {
                phi_interval(c - d, c)
            };
            normal_mass * phi(t * wn) * wn * p.half_width
        };
        adaptive_gk(f, &[-1.0, 0.0, 1.0], 1e-18, 1e-13, 400).value
    }

    /// First-order area per unit height: `φ(c)·∫ profile·φ(t‖w‖)‖w‖ dt`.
    pub fn linear_mass(&self) -> f64 {
        let p = self.patch;
        let wn = self.w_norm;
        let f = |u: f64| {
            let t = p.center_t + p.half_width * u;
            p.profile.eval(u) * phi(t * wn) * wn * p.half_width
        };
        phi(self.c) * adaptive_gk(f, &[-1.0, 0.0, 1.0], 1e-18, 1e-13, 400).value
    }

    /// Axis-aligned box `(lo, hi)` containing the region.
    pub fn bounding_box(&self) -> (V2, V2) {
        let c = self.corners();
        let lo = [c.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min), c.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min)];
        let hi = [c.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max), c.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max)];
        (lo, hi)
    }

    /// The four corners of the bounding box in the plane.
    fn corners(&self) -> [V2; 4] {
        let p = &self.patch;
        let top = f64::from(p.sign) * p.height;
        [
            self.point(p.center_t - p.half_width, 0.0),
            self.point(p.center_t + p.half_width, 0.0),
            self.point(p.center_t + p.half_width, top),
            self.point(p.center_t - p.half_width, top),
        ]
    }
}

/// Separating-axis test for two convex quadrilaterals. Touching boundaries
/// do not count as overlap.
fn boxes_overlap(a: &[V2; 4], b: &[V2; 4]) -> bool {
    for poly in [a, b] {
        for e in 0..4 {
            let p0 = poly[e];
            let p1 = poly[(e + 1) % 4];
            let axis = [p0[1] - p1[1], p1[0] - p0[0]];
            let proj = |q: &[V2; 4]| {
                q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    let d = dot2(*v, axis);
                    (lo.min(d), hi.max(d))
                })
            };
            let (a0, a1) = proj(a);
            let (b0, b1) = proj(b);
            if a1 <= b0 + 1e-12 || b1 <= a0 + 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Tolerance on the net signed area moved across each facet.
pub const BALANCE_TOL: f64 = 1e-6;

/// A planar flat partition with bump patches.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedPartition {
    base: FlatPartition,
    patches: Vec<BumpPatch>,
    geometry: Vec<PatchGeometry>,
}

impl PerturbedPartition {
    pub fn new(base: FlatPartition, patches: Vec<BumpPatch>) -> Result<Self> {
        if base.n() != 2 {
            return Err(unsupported("perturbed partitions are implemented in the plane only"));
        }
        let mut geometry = Vec::with_capacity(patches.len());
        for p in &patches {
            p.validate()?;
            let (i, j) = p.facet;
            if i >= base.k() || j >= base.k() {
                return Err(domain("patch facet refers to a missing cell"));
            }
            let lr = match base.line_restriction(i, j) {
                Ok(lr) => lr,
                Err(Error::NotAdjacent(..)) => {
                    return Err(domain(format!("patch facet ({i},{j}) is not a shared facet")))
                }
                Err(e) => return Err(e),
            };
            let g = PatchGeometry::new(*p, &lr);
            // The box must sit inside the cell it takes from, so the patch
            // only ever trades area between the two cells of its facet.
            let from = p.from_cell();
            let cell = base.cell_cone(from)?;
            for corner in g.corners() {
                let inside = cell
                    .constraints()
                    .iter()
                    .all(|h| dot2(h.u, corner) <= h.b + 1e-12);
                if !inside {
                    return Err(domain(format!(
                        "patch at t={} on facet ({i},{j}) leaves cell {from}",
                        p.center_t
                    )));
                }
            }
            geometry.push(g);
        }
        for a in 0..patches.len() {
            for b in (a + 1)..patches.len() {
                let (pa, pb) = (&patches[a], &patches[b]);
                let same_facet = pa.facet == pb.facet || pa.facet == (pb.facet.1, pb.facet.0);
                let clash = if same_facet {
                    let (ga, gb) = (&geometry[a], &geometry[b]);
                    // Compare supports in a common parametrization.
                    let ta = (pa.center_t * ga.w_norm, pa.half_width * ga.w_norm);
                    let tb = (pb.center_t * gb.w_norm, pb.half_width * gb.w_norm);
                    (ta.0 - tb.0).abs() < ta.1 + tb.1 - 1e-12
                } else {
                    boxes_overlap(&geometry[a].corners(), &geometry[b].corners())
                };
                if clash {
                    return Err(domain(format!("patches {a} and {b} have overlapping supports")));
                }
            }
        }
        let out = Self { base, patches, geometry };
        for (facet, net) in out.net_transfers() {
            if net.abs() > BALANCE_TOL {
                return Err(domain(format!(
                    "patches on facet {facet:?} move a net Gaussian area of {net:e}"
                )));
            }
        }
        Ok(out)
    }

    pub fn base(&self) -> &FlatPartition {
        &self.base
    }

    pub fn patches(&self) -> &[BumpPatch] {
        &self.patches
    }

    pub fn geometry(&self) -> &[PatchGeometry] {
        &self.geometry
    }

    /// Net signed Gaussian area moved into the first cell of each facet,
    /// with facets reported as `(min, max)`.
    pub fn net_transfers(&self) -> Vec<((usize, usize), f64)> {
        let mut out: Vec<((usize, usize), f64)> = Vec::new();
        for g in &self.geometry {
            let (i, j) = g.patch.facet;
            let key = (i.min(j), i.max(j));
            let toward_min = if g.patch.to_cell() == key.0 { 1.0 } else { -1.0 };
            match out.iter_mut().find(|e| e.0 == key) {
                Some(e) => e.1 += toward_min * g.area,
                None => out.push((key, toward_min * g.area)),
            }
        }
        out
    }

    #[inline]
    pub fn classify(&self, x: &[f64]) -> usize {
        let label = self.base.classify(x);
        let p = [x[0], x[1]];
        for g in &self.geometry {
            if g.patch.from_cell() == label && g.contains(p) {
                return g.patch.to_cell();
            }
        }
        label
    }

    /// Exact cell volumes given the exact volumes of the base cells.
    pub fn adjust_volumes(&self, base_volumes: &[f64]) -> Vec<f64> {
        let mut v = base_volumes.to_vec();
        for g in &self.geometry {
            v[g.patch.from_cell()] -= g.area;
            v[g.patch.to_cell()] += g.area;
        }
        v
    }
}
