use crate::error::{domain, Result};
use crate::ou::LineRestriction;
use crate::partition::{BumpPatch, FlatPartition, PatchGeometry, PerturbedPartition, Profile};

pub const DEFAULT_HALF_WIDTH: f64 = 0.25;
/// Narrower bumps than this are refused.
pub const MIN_HALF_WIDTH: f64 = 1e-3;

const AREA_TOL: f64 = 1e-12;

fn bump(lr: &LineRestriction, t: f64, half_width: f64, height: f64, sign: i8) -> BumpPatch {
    BumpPatch { facet: lr.pair, center_t: t, half_width, height, sign, profile: Profile::SmoothBump }
}

/// Height of the inward bump at `t` whose Gaussian area equals `target`.
fn matching_height(lr: &LineRestriction, t: f64, half_width: f64, target: f64, guess: f64) -> Result<f64> {
    let area = |h: f64| PatchGeometry::new(bump(lr, t, half_width, h, -1), lr).area;
    let mut hi = guess.max(1e-12);
    while area(hi) < target {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(domain("no bump height at the second point matches the first bump's area"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if area(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let h = 0.5 * (lo + hi);
    let miss = (area(h) - target).abs();
    if miss > AREA_TOL.max(1e-9 * target) {
        return Err(domain(format!("bump areas could not be matched (residual {miss:e})")));
    }
    Ok(h)
}

/// Half-width used for bumps at `t1` and `t2`: the default unless the two
/// supports would overlap, in which case a quarter of the gap.
pub fn bump_half_width(t1: f64, t2: f64) -> Result<f64> {
    let gap = (t1 - t2).abs();
    let hw = if gap >= 2.0 * DEFAULT_HALF_WIDTH { DEFAULT_HALF_WIDTH } else { gap / 4.0 };
    if hw < MIN_HALF_WIDTH {
        return Err(domain("t1 and t2 are too close for disjoint bumps"));
    }
    Ok(hw)
}

/// Pushes cell `i` out by a bump of height `delta` at `t1` and pulls it back
/// by an area-matched bump at `t2`, where `(i, j) = lr.pair`.
///
/// A negative `delta` follows the same normal field backwards: the outward
/// bump moves to `t2` with the height that first-order matching assigns to
/// `t2`, and the inward bump at `t1` is matched exactly.
pub fn build_perturbation(
    p: &FlatPartition,
    lr: &LineRestriction,
    t1: f64,
    t2: f64,
    delta: f64,
) -> Result<PerturbedPartition> {
    if !(delta.is_finite() && delta != 0.0) {
        return Err(domain("delta must be finite and nonzero"));
    }
    if !(t1.is_finite() && t2.is_finite()) || t1 == t2 {
        return Err(domain("t1 and t2 must be distinct finite points"));
    }
    let half_width = bump_half_width(t1, t2)?;
    let (out_t, in_t, out_h) = if delta > 0.0 {
        (t1, t2, delta)
    } else {
        let (a, b) = linear_matched_pair(lr, t1, t2, half_width)?;
        (t2, t1, -delta * b.height / a.height)
    };
    let outward = bump(lr, out_t, half_width, out_h, 1);
    let target = PatchGeometry::new(outward, lr).area;
    let h2 = matching_height(lr, in_t, half_width, target, out_h)?;
    PerturbedPartition::new(p.clone(), vec![outward, bump(lr, in_t, half_width, h2, -1)])
}

/// Unit-height outward bump at `t1` and an inward bump at `t2` whose height
/// matches the first-order masses exactly.
pub fn linear_matched_pair(lr: &LineRestriction, t1: f64, t2: f64, half_width: f64) -> Result<(BumpPatch, BumpPatch)> {
    if (t1 - t2).abs() < 2.0 * half_width {
        return Err(domain("bump supports overlap"));
    }
    let a = bump(lr, t1, half_width, 1.0, 1);
    let m1 = PatchGeometry::new(a, lr).linear_mass();
    let m2 = PatchGeometry::new(bump(lr, t2, half_width, 1.0, -1), lr).linear_mass();
    if !(m2 > 0.0) {
        return Err(domain("second bump carries no mass"));
    }
    Ok((a, bump(lr, t2, half_width, m1 / m2, -1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_standard_simplex, StandardSimplexSpec};

    fn setup() -> (FlatPartition, LineRestriction) {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.3, 0.0] }).unwrap();
        let lr = p.line_restriction(0, 1).unwrap();
        (p, lr)
    }

    #[test]
    fn areas_balance() {
        let (p, lr) = setup();
        for delta in [0.005, 0.02, 0.08, -0.04] {
            let q = build_perturbation(&p, &lr, 2.0, 2.6, delta).unwrap();
            for (_, net) in q.net_transfers() {
                assert!(net.abs() <= 1e-8, "{net}");
            }
        }
    }

    #[test]
    fn negative_delta_swaps_the_points() {
        let (p, lr) = setup();
        let q = build_perturbation(&p, &lr, 2.0, 2.6, -0.02).unwrap();
        let out = q.patches().iter().find(|b| b.sign == 1).unwrap();
        let back = q.patches().iter().find(|b| b.sign == -1).unwrap();
        assert_eq!(out.center_t, 2.6);
        assert_eq!(back.center_t, 2.0);
        // The pull-back at t1 is the forward bump's height to first order.
        assert!((back.height - 0.02).abs() < 1e-3, "{}", back.height);
    }

    #[test]
    fn close_points_shrink_the_bumps() {
        let (p, lr) = setup();
        let q = build_perturbation(&p, &lr, 2.0, 2.2, 0.01).unwrap();
        assert!((q.patches()[0].half_width - 0.05).abs() < 1e-15);
        let q = build_perturbation(&p, &lr, 2.0, 2.6, 0.01).unwrap();
        assert_eq!(q.patches()[0].half_width, DEFAULT_HALF_WIDTH);
        assert!(build_perturbation(&p, &lr, 2.0, 2.002, 0.01).is_err());
    }

    #[test]
    fn linear_pair_masses_agree() {
        let (_, lr) = setup();
        let (a, b) = linear_matched_pair(&lr, 1.5, 3.0, 0.25).unwrap();
        let ma = a.height * PatchGeometry::new(a, &lr).linear_mass();
        let mb = b.height * PatchGeometry::new(b, &lr).linear_mass();
        assert!((ma - mb).abs() < 1e-14);
    }
}
