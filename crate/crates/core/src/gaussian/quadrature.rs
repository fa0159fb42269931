//! Quadrature rules: probabilists' Gauss–Hermite, Gauss–Legendre, a
//! truncated trapezoid rule, and adaptive Gauss–Kronrod integration.

use serde::{Deserialize, Serialize};

use crate::error::{domain, unsupported, Result};

/// Largest Gauss–Hermite order whose accuracy has been validated.
pub const MAX_HERMITE_ORDER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    GaussHermiteProbabilist,
    TruncatedTrapezoid,
}

/// Nodes and weights for integrals against the standard normal density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
    pub truncation_radius: Option<f64>,
}

impl QuadratureRule {
    /// Approximates `∫ f dγ_1`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Hermite rule for the weight `φ(x)`, exact for polynomials of degree
/// up to `2·order − 1`.
///
/// Nodes are the eigenvalues of the Jacobi matrix of the probabilists'
/// Hermite recurrence (off-diagonal `√k`), found by implicit QL. Each node is
/// then polished by Newton steps on the orthonormal recurrence and weighted
/// by the Christoffel formula `w = 1/Σ_{j<n} p_j(x)²`.
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(domain("Gauss-Hermite order must be at least 1"));
    }
    if order > MAX_HERMITE_ORDER {
        return Err(unsupported(format!(
            "Gauss-Hermite order {order} exceeds the validated maximum {MAX_HERMITE_ORDER}"
        )));
    }
    let n = order;
    let mut d = vec![0.0; n];
    let mut e: Vec<f64> = (1..=n).map(|k| if k < n { (k as f64).sqrt() } else { 0.0 }).collect();
    tridiagonal_eigenvalues(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    // Orthonormal probabilists' Hermite values p_0..p_n at x.
    let recur = |x: f64| {
        let (mut p0, mut p1, mut sum) = (0.0, 1.0, 0.0);
        for j in 1..=n {
            sum += p1 * p1;
            let jf = j as f64;
            let p2 = (x * p1 - (jf - 1.0).sqrt() * p0) / jf.sqrt();
            p0 = p1;
            p1 = p2;
        }
        // (p_n, p_{n−1}, Σ_{j<n} p_j²)
        (p1, p0, sum)
    };
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in &d {
        let mut x = x0;
        for _ in 0..3 {
            let (pn, pn1, _) = recur(x);
            let dp = (n as f64).sqrt() * pn1;
            if dp != 0.0 {
                x -= pn / dp;
            }
        }
        let (_, _, sum) = recur(x);
        nodes.push(x);
        weights.push(1.0 / sum);
    }
    // Symmetrize: the rule is exactly symmetric about zero.
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    // Remove the last few ulps so the weights sum to one.
    let total: f64 = weights.iter().sum();
    Ok(QuadratureRule {
        nodes,
        weights: weights.iter().map(|w| w / total).collect(),
        kind: QuadratureKind::GaussHermiteProbabilist,
        truncation_radius: None,
    })
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e[i]` between rows `i` and `i+1` (`e[n−1]` unused), by the
/// implicit QL algorithm with Wilkinson shifts. Eigenvalues overwrite `d`.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(crate::error::Error::Accuracy(
                    "tridiagonal eigenvalue iteration did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Trapezoid rule for `∫ f dγ_1` on `[−radius, radius]` with the given step.
pub fn truncated_trapezoid_rule(radius: f64, step: f64) -> Result<QuadratureRule> {
    if !(radius > 0.0 && step > 0.0 && step < radius) {
        return Err(domain("trapezoid rule needs 0 < step < radius"));
    }
    let m = (2.0 * radius / step).round() as usize;
    let h = 2.0 * radius / m as f64;
    let mut nodes = Vec::with_capacity(m + 1);
    let mut weights = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let x = -radius + h * i as f64;
        let end = if i == 0 || i == m { 0.5 } else { 1.0 };
        nodes.push(x);
        weights.push(end * h * super::phi(x));
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        kind: QuadratureKind::TruncatedTrapezoid,
        truncation_radius: Some(radius),
    })
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[m - 1] = 0.0;
    }
    (x, w)
}

/// A Gauss–Legendre rule that can be mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct Legendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Legendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }

    /// Composite rule on `[a, b]` with panels no wider than `max_panel`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, max_panel: f64, mut f: F) -> f64 {
        if b <= a {
            return 0.0;
        }
        let panels = ((b - a) / max_panel).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive 7/15-point Gauss–Kronrod integration of `f` over the
/// given breakpoints. Stops when the summed error estimate is below
/// `max(abs_tol, rel_tol·|value|)` or after `max_intervals` subdivisions.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Integral {
    let mut pieces: Vec<(f64, f64, f64, f64)> = Vec::new();
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b > a {
            let (v, e) = kronrod15(&mut f, a, b);
            pieces.push((a, b, v, e));
        }
    }
    loop {
        let value: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || pieces.len() >= max_intervals {
            return Integral { value, error };
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one interval");
        let (a, b, _, _) = pieces.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = kronrod15(&mut f, a, m);
        let (v2, e2) = kronrod15(&mut f, m, b);
        pieces.push((a, m, v1, e1));
        pieces.push((m, b, v2, e2));
    }
}
