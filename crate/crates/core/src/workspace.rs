//! Adjustment ranges of an adaptive gripper whose arms each carry one rotary
//! and one radial axis around a common gripper axis.
//!
//! Every constellation is first expressed in its own gripper frame and then
//! laid onto the first constellation with the planar rigid motion that moves
//! the arms least in total (L1 sum of arm displacements). Candidate motions
//! are the identity, the least-squares fit over all arms, and for every
//! ordered pair of arms the motion that fixes the first arm and aligns the
//! direction to the second. An arm that sits elsewhere on one workpiece then
//! shows up as a range on that arm alone instead of being spread over all of
//! them by a shifted centroid.

use nalgebra::{Point2, Rotation2, Vector2};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::search::{Constellation, Polar};

#[derive(Debug, Error, PartialEq)]
pub enum WorkspaceError {
    #[error("no constellations given")]
    Empty,
    #[error("constellations have differing cup counts ({expected} and {found})")]
    MixedArity { expected: usize, found: usize },
}

/// Ranges this small count as fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapTolerance<T: Scalar> {
    /// mm
    pub length: T,
    /// degrees
    pub angle: T,
}

impl<T: Scalar> Default for SnapTolerance<T> {
    fn default() -> Self {
        Self { length: T::one(), angle: T::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range<T: Scalar> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> Range<T> {
    pub fn extent(&self) -> T {
        self.max - self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmRange<T: Scalar> {
    /// Degrees; `min` in `[0, 360)`, `max` may exceed 360 when the range wraps.
    pub angle: Range<T>,
    /// mm from the gripper axis.
    pub radius: Range<T>,
    pub angle_adjustable: bool,
    pub radius_adjustable: bool,
}

impl<T: Scalar> ArmRange<T> {
    /// Whether a pose lies in the range, boundaries included.
    pub fn contains(&self, p: &Polar<T>) -> bool {
        let full = T::lit(360.0);
        let mut off = (p.angle - self.angle.min) % full;
        if off < T::zero() {
            off += full;
        }
        let wrapped_ok = off <= self.angle.extent() + T::angle_eps() || full - off <= T::angle_eps();
        wrapped_ok
            && p.radius >= self.radius.min - T::length_eps()
            && p.radius <= self.radius.max + T::length_eps()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceSpec<T: Scalar> {
    pub arm_count: usize,
    pub per_arm: Vec<ArmRange<T>>,
    /// Adjustable scalar ranges (angle and radius counted separately).
    pub dof_required: usize,
    pub fixed: bool,
    /// Arm poses of every input constellation after alignment.
    pub poses: Vec<Vec<Polar<T>>>,
}

fn planar<T: Scalar>(c: &Constellation<T>) -> Vec<Point2<T>> {
    c.local_points().iter().map(|p| Point2::new(p.x, p.y)).collect()
}

fn procrustes<T: Scalar>(src: &[Point2<T>], dst: &[Point2<T>]) -> (Rotation2<T>, Vector2<T>) {
    let n = T::lit(src.len() as f64);
    let sc = src.iter().fold(Vector2::zeros(), |a, p| a + p.coords) / n;
    let dc = dst.iter().fold(Vector2::zeros(), |a, p| a + p.coords) / n;
    let (mut dot, mut cross) = (T::zero(), T::zero());
    for (s, d) in src.iter().zip(dst) {
        let (a, b) = (s.coords - sc, d.coords - dc);
        dot += a.dot(&b);
        cross += a.perp(&b);
    }
    let rot = Rotation2::new(if dot == T::zero() && cross == T::zero() { T::zero() } else { cross.atan2(dot) });
    (rot, dc - rot * sc)
}

fn pair_alignment<T: Scalar>(
    src: &[Point2<T>],
    dst: &[Point2<T>],
    i: usize,
    j: usize,
) -> Option<(Rotation2<T>, Vector2<T>)> {
    let (u, v) = (src[j] - src[i], dst[j] - dst[i]);
    if u.norm() <= T::length_eps() || v.norm() <= T::length_eps() {
        return None;
    }
    let rot = Rotation2::new(u.perp(&v).atan2(u.dot(&v)));
    Some((rot, dst[i].coords - rot * src[i].coords))
}

/// Lays `src` onto `dst` with the candidate motion of least L1 displacement.
fn align<T: Scalar>(src: &[Point2<T>], dst: &[Point2<T>]) -> Vec<Point2<T>> {
    let k = src.len();
    let mut motions = vec![(Rotation2::identity(), Vector2::zeros()), procrustes(src, dst)];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                motions.extend(pair_alignment(src, dst, i, j));
            }
        }
    }
    let cost = |(r, t): &(Rotation2<T>, Vector2<T>)| {
        src.iter().zip(dst).fold(T::zero(), |acc, (s, d)| acc + (r * s + t - d).norm())
    };
    let mut best = motions[0];
    let mut best_cost = cost(&best);
    for m in &motions[1..] {
        let c = cost(m);
        if c < best_cost - T::length_eps() {
            best = *m;
            best_cost = c;
        }
    }
    src.iter().map(|s| best.0 * s + best.1).collect()
}

fn polar_of<T: Scalar>(p: &Point2<T>) -> Polar<T> {
    let mut angle = p.y.atan2(p.x).to_degrees();
    if angle < T::zero() {
        angle += T::lit(360.0);
    }
    if angle >= T::lit(360.0) {
        angle -= T::lit(360.0);
    }
    Polar { angle, radius: p.coords.norm() }
}

/// Smallest arc covering all angles (degrees).
fn angle_envelope<T: Scalar>(angles: &[T]) -> Range<T> {
    let mut a = angles.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = a.len();
    let full = T::lit(360.0);
    // the arc starts right after the widest gap between neighbours
    let mut widest = (a[0] + full - a[n - 1], 0);
    for i in 1..n {
        let gap = a[i] - a[i - 1];
        if gap > widest.0 {
            widest = (gap, i);
        }
    }
    let start = a[widest.1];
    let end = if widest.1 == 0 { a[n - 1] } else { a[widest.1 - 1] + full };
    Range { min: start, max: end }
}

/// Per-arm envelopes over a family of constellations with matching arm order.
pub fn plan_workspace<T: Scalar>(
    constellations: &[Constellation<T>],
    snap: &SnapTolerance<T>,
) -> Result<WorkspaceSpec<T>, WorkspaceError> {
    let first = constellations.first().ok_or(WorkspaceError::Empty)?;
    let k = first.len();
    if let Some(c) = constellations.iter().find(|c| c.len() != k) {
        return Err(WorkspaceError::MixedArity { expected: k, found: c.len() });
    }
    let reference = planar(first);
    let poses: Vec<Vec<Polar<T>>> = constellations
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let aligned = if n == 0 { reference.clone() } else { align(&planar(c), &reference) };
            aligned.iter().map(polar_of).collect()
        })
        .collect();

    let mut per_arm = Vec::with_capacity(k);
    let mut dof = 0;
    for arm in 0..k {
        let angles: Vec<T> = poses.iter().map(|p| p[arm].angle).collect();
        let radii = poses.iter().map(|p| p[arm].radius);
        let radius = Range {
            min: radii.clone().fold(T::max_value().unwrap(), |m, r| if r < m { r } else { m }),
            max: radii.fold(-T::max_value().unwrap(), |m, r| if r > m { r } else { m }),
        };
        let angle = angle_envelope(&angles);
        let angle_adjustable = angle.extent() > snap.angle;
        let radius_adjustable = radius.extent() > snap.length;
        dof += usize::from(angle_adjustable) + usize::from(radius_adjustable);
        per_arm.push(ArmRange { angle, radius, angle_adjustable, radius_adjustable });
    }
    Ok(WorkspaceSpec { arm_count: k, per_arm, dof_required: dof, fixed: dof == 0, poses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_wraps_through_zero() {
        let r = angle_envelope(&[350.0f64, 10.0, 5.0]);
        assert_eq!(r.min, 350.0);
        assert!((r.extent() - 20.0).abs() < 1e-12);
        let r = angle_envelope(&[90.0f64]);
        assert_eq!(r.extent(), 0.0);
        let r = angle_envelope(&[10.0f64, 100.0]);
        assert_eq!((r.min, r.max), (10.0, 100.0));
    }

    #[test]
    fn contains_wrapped_range() {
        let arm = ArmRange {
            angle: Range { min: 350.0f64, max: 370.0 },
            radius: Range { min: 10.0, max: 20.0 },
            angle_adjustable: true,
            radius_adjustable: true,
        };
        assert!(arm.contains(&Polar { angle: 5.0, radius: 15.0 }));
        assert!(arm.contains(&Polar { angle: 350.0, radius: 10.0 }));
        assert!(!arm.contains(&Polar { angle: 20.0, radius: 15.0 }));
        assert!(!arm.contains(&Polar { angle: 0.0, radius: 21.0 }));
    }

    #[test]
    fn pair_alignment_fixes_two_arms() {
        let dst = [Point2::new(0.0f64, 0.0), Point2::new(10.0, 0.0), Point2::new(0.0, 10.0)];
        let rot = Rotation2::new(0.7);
        let src: Vec<_> = dst.iter().map(|p| rot * p + Vector2::new(3.0, -1.0)).collect();
        let aligned = align(&src, &dst);
        for (a, b) in aligned.iter().zip(&dst) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
