//! Flat partitions: argmax cells of affine functionals `x ↦ ⟨x − y, y_i⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, unsupported, Error, Result};
use crate::geom::{cross2, dot, dot2, norm, norm2, perp, to_v2, V2};
use crate::ou::{ConeCell2D, HalfPlane, LineRestriction};

/// A flat partition of `R^n` into `k ≤ n + 1` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlatDoc", into = "FlatDoc")]
pub struct FlatPartition {
    n: usize,
    k: usize,
    shift: Vec<f64>,
    directions: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct FlatDoc {
    n: usize,
    k: usize,
    shift: Vec<f64>,
    directions: Vec<Vec<f64>>,
}

impl TryFrom<FlatDoc> for FlatPartition {
    type Error = Error;

    fn try_from(d: FlatDoc) -> Result<Self> {
        let p = FlatPartition::new(d.shift, d.directions)?;
        if p.n != d.n || p.k != d.k {
            return Err(domain("declared n/k do not match shift and directions"));
        }
        Ok(p)
    }
}

impl From<FlatPartition> for FlatDoc {
    fn from(p: FlatPartition) -> Self {
        FlatDoc { n: p.n, k: p.k, shift: p.shift, directions: p.directions }
    }
}

/// The shared boundary of two adjacent cells in the plane.
///
/// The facet is `{c·normal + τ·dir : τ ∈ [tau_lo, tau_hi]}` where `normal` is
/// the exterior unit normal of the first cell of `pair`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub pair: (usize, usize),
    pub normal: V2,
    pub c: f64,
    pub dir: V2,
    pub tau_lo: f64,
    pub tau_hi: f64,
}

impl FlatPartition {
    pub fn new(shift: Vec<f64>, directions: Vec<Vec<f64>>) -> Result<Self> {
        let n = shift.len();
        let k = directions.len();
        if n == 0 {
            return Err(domain("partition dimension must be at least 1"));
        }
        if k == 0 || k > n + 1 {
            return Err(domain(format!("need 1 ≤ k ≤ n+1 cells, got k={k} with n={n}")));
        }
        if shift.iter().any(|v| !v.is_finite()) {
            return Err(domain("shift must be finite"));
        }
        for (i, d) in directions.iter().enumerate() {
            if d.len() != n {
                return Err(domain(format!("direction {i} has length {} but n={n}", d.len())));
            }
            if d.iter().any(|v| !v.is_finite()) || norm(d) == 0.0 {
                return Err(domain(format!("direction {i} must be finite and nonzero")));
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = (&directions[i], &directions[j]);
                let (na, nb) = (norm(a), norm(b));
                let same = a.iter().zip(b).all(|(x, y)| (x / na - y / nb).abs() <= 1e-12);
                if same {
                    return Err(domain(format!(
                        "directions {i} and {j} are positive multiples of each other"
                    )));
                }
            }
        }
        let p = Self { n, k, shift, directions };
        if n == 2 {
            for i in 0..k {
                p.cell_cone(i)?;
            }
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn is_centered(&self) -> bool {
        self.shift.iter().all(|&v| v == 0.0)
    }

    /// Same directions, different shift.
    pub fn with_shift(&self, shift: Vec<f64>) -> Result<Self> {
        Self::new(shift, self.directions.clone())
    }

    /// `argmax_i ⟨x − y, y_i⟩`, ties to the lowest index.
    #[inline]
    pub fn classify(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, d) in self.directions.iter().enumerate() {
            let v: f64 = x
                .iter()
                .zip(&self.shift)
                .zip(d)
                .map(|((xi, yi), di)| (xi - yi) * di)
                .sum();
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        best
    }

    /// Largest and second largest scores differ by at most `tol`.
    pub fn is_tie(&self, x: &[f64], tol: f64) -> bool {
        let mut vals: Vec<f64> = self
            .directions
            .iter()
            .map(|d| {
                let shifted: Vec<f64> = x.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
                dot(&shifted, d)
            })
            .collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        vals.len() > 1 && vals[0] - vals[1] <= tol
    }

    fn require_plane(&self) -> Result<()> {
        if self.n != 2 {
            return Err(unsupported(format!(
                "planar geometry requested for a partition of R^{}",
                self.n
            )));
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.k {
            return Err(domain(format!("cell index {i} out of range for k={}", self.k)));
        }
        Ok(())
    }

    /// Exterior unit normal of cell `i` towards cell `j` and the offset of
    /// their separating line.
    fn separator(&self, i: usize, j: usize) -> (V2, f64) {
        let di = to_v2(&self.directions[i]);
        let dj = to_v2(&self.directions[j]);
        let raw = [dj[0] - di[0], dj[1] - di[1]];
        let len = norm2(raw);
        let u = [raw[0] / len, raw[1] / len];
        (u, dot2(u, to_v2(&self.shift)))
    }

    /// Cell `i` as an intersection of half-planes.
    pub fn cell_cone(&self, i: usize) -> Result<ConeCell2D> {
        self.require_plane()?;
        self.check_index(i)?;
        let mut constraints: Vec<HalfPlane> = Vec::with_capacity(self.k - 1);
        for j in 0..self.k {
            if j == i {
                continue;
            }
            let (u, b) = self.separator(i, j);
            // Two separators with the same normal describe the same line
            // here because every separator passes through the shift.
            if constraints.iter().any(|h| dot2(h.u, u) > 1.0 - 1e-14) {
                continue;
            }
            constraints.push(HalfPlane { u, b });
        }
        let apex = match constraints.as_slice() {
            [a, b] if cross2(a.u, b.u).abs() > 1e-12 => Some(to_v2(&self.shift)),
            _ => None,
        };
        ConeCell2D::new(constraints, apex)
    }

    /// The shared boundary of cells `i` and `j`, or `NotAdjacent`.
    pub fn facet(&self, i: usize, j: usize) -> Result<Facet> {
        self.require_plane()?;
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::NotAdjacent(i, j));
        }
        let (normal, c) = self.separator(i, j);
        let mut dir = perp(normal);
        let base = [c * normal[0], c * normal[1]];
        let y = to_v2(&self.shift);
        let di = to_v2(&self.directions[i]);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for m in 0..self.k {
            if m == i || m == j {
                continue;
            }
            let dm = to_v2(&self.directions[m]);
            let g = [di[0] - dm[0], di[1] - dm[1]];
            // Need ⟨base + τ·dir − y, g⟩ ≥ 0.
            let a = dot2([base[0] - y[0], base[1] - y[1]], g);
            let b = dot2(dir, g);
            if b.abs() < 1e-15 {
                if a < 0.0 {
                    return Err(Error::NotAdjacent(i, j));
                }
            } else if b > 0.0 {
                lo = lo.max(-a / b);
            } else {
                hi = hi.min(-a / b);
            }
        }
        if hi - lo <= 1e-9 {
            return Err(Error::NotAdjacent(i, j));
        }
        if hi.is_finite() && lo == f64::NEG_INFINITY {
            dir = [-dir[0], -dir[1]];
            (lo, hi) = (-hi, f64::INFINITY);
        }
        Ok(Facet { pair: (i, j), normal, c, dir, tau_lo: lo, tau_hi: hi })
    }

    /// All unordered facet-adjacent pairs `(i, j)` with `i < j`.
    pub fn adjacent_pairs(&self) -> Result<Vec<(usize, usize)>> {
        self.require_plane()?;
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in (i + 1)..self.k {
                match self.facet(i, j) {
                    Ok(_) => out.push((i, j)),
                    Err(Error::NotAdjacent(..)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(out)
    }

    /// Canonical line restriction `t ↦ cN + tw` of the facet between `i`
    /// and `j`, scaled so that the whole ray `t ≥ 1` lies on the facet.
    pub fn line_restriction(&self, i: usize, j: usize) -> Result<LineRestriction> {
        let f = self.facet(i, j)?;
        if f.tau_hi.is_finite() {
            return Err(unsupported("bounded facets have no ray to restrict to"));
        }
        let lambda = if f.tau_lo.is_finite() { f.tau_lo.max(1.0) } else { 1.0 };
        LineRestriction::new(
            f.c,
            f.normal.to_vec(),
            vec![lambda * f.dir[0], lambda * f.dir[1]],
            (i, j),
        )
    }

    /// Parameter `t` at which the facet starts (`−∞` for a full line).
    pub fn facet_start(&self, lr: &LineRestriction) -> Result<f64> {
        let (i, j) = lr.pair;
        let f = self.facet(i, j)?;
        let wn = norm(&lr.w);
        Ok(if f.tau_lo.is_finite() { f.tau_lo / wn } else { f64::NEG_INFINITY })
    }
}

/// Dimension and shift of a standard simplex partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardSimplexSpec {
    pub n: usize,
    pub shift: Vec<f64>,
}

/// `k = n + 1` unit vectors with pairwise inner products `−1/n`.
///
/// Built recursively: the first vector is `e_1` and the remaining ones are
/// `(−1/n, √(1 − 1/n²)·v)` for the simplex directions `v` of `R^{n−1}`.
pub fn simplex_directions(n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 1);
    if n == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let nf = n as f64;
    let tail = (1.0 - 1.0 / (nf * nf)).sqrt();
    let mut out = Vec::with_capacity(n + 1);
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    out.push(first);
    for v in simplex_directions(n - 1) {
        let mut d = Vec::with_capacity(n);
        d.push(-1.0 / nf);
        d.extend(v.iter().map(|x| tail * x));
        out.push(d);
    }
    out
}

pub fn make_standard_simplex(spec: &StandardSimplexSpec) -> Result<FlatPartition> {
    if spec.n == 0 {
        return Err(domain("simplex dimension must be at least 1"));
    }
    if spec.shift.len() != spec.n {
        return Err(domain("shift length must equal n"));
    }
    FlatPartition::new(spec.shift.clone(), simplex_directions(spec.n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centered(n: usize) -> FlatPartition {
        make_standard_simplex(&StandardSimplexSpec { n, shift: vec![0.0; n] }).unwrap()
    }

    #[test]
    fn simplex_inner_products() {
        for n in 1..=6 {
            let d = simplex_directions(n);
            assert_eq!(d.len(), n + 1);
            for i in 0..=n {
                assert!((norm(&d[i]) - 1.0).abs() < 1e-12);
                for j in 0..i {
                    assert!((dot(&d[i], &d[j]) + 1.0 / n as f64).abs() < 1e-10);
                }
            }
        }
        assert_eq!(simplex_directions(1), vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn classify_basics() {
        let p = centered(2);
        assert_eq!(p.classify(&p.directions()[0].clone()), 0);
        assert_eq!(p.classify(&p.directions()[2].clone()), 2);
        // On the bisector of cells 1 and 2 both score equally.
        assert_eq!(p.classify(&[-1.0, 0.0]), 1);
        assert!(p.is_tie(&[-1.0, 0.0], 1e-12));
    }

    #[test]
    fn rejects_positive_multiples_and_bad_shapes() {
        assert!(FlatPartition::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![2.0, 0.0]]).is_err());
        assert!(FlatPartition::new(vec![0.0], vec![vec![1.0], vec![-1.0], vec![-2.0]]).is_err());
        assert!(FlatPartition::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(FlatPartition::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).is_ok());
    }

    #[test]
    fn facets_of_the_simplex_are_rays_from_the_shift() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.3, -0.2] }).unwrap();
        assert_eq!(p.adjacent_pairs().unwrap(), vec![(0, 1), (0, 2), (1, 2)]);
        for (i, j) in p.adjacent_pairs().unwrap() {
            let f = p.facet(i, j).unwrap();
            let start = [f.c * f.normal[0] + f.tau_lo * f.dir[0], f.c * f.normal[1] + f.tau_lo * f.dir[1]];
            assert!((start[0] - 0.3).abs() < 1e-12 && (start[1] + 0.2).abs() < 1e-12);
            assert!(f.tau_hi.is_infinite());
            let lr = p.line_restriction(i, j).unwrap();
            for t in [1.0, 2.0, 5.0, 10.0] {
                let x = lr.point(t);
                let eps = 1e-7;
                let a = [x[0] - eps * f.normal[0], x[1] - eps * f.normal[1]];
                let b = [x[0] + eps * f.normal[0], x[1] + eps * f.normal[1]];
                assert_eq!(p.classify(&a), i);
                assert_eq!(p.classify(&b), j);
            }
        }
    }

    #[test]
    fn half_plane_partition_has_a_full_line_facet() {
        let p = FlatPartition::new(vec![0.5, 0.0], vec![vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let f = p.facet(0, 1).unwrap();
        assert!(f.tau_lo.is_infinite() && f.tau_hi.is_infinite());
        assert!((f.c - 0.5).abs() < 1e-15);
        assert!(p.facet(0, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.1, 0.2] }).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: FlatPartition = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = s.replace("\"k\":3", "\"k\":2");
        assert!(serde_json::from_str::<FlatPartition>(&bad).is_err());
    }
}
