use nalgebra::{Point3, Rotation3, Vector3};

use crate::constraints::{check_all, ConstellationConstraints};
use crate::params::ToleranceSpec;
use crate::patch::GrippingPoint;
use crate::scalar::{angle_between_deg, Scalar};

use super::Constellation;

/// Target candidates considered per constellation point.
pub const MAX_CANDIDATES_PER_POINT: usize = 32;

/// Upper bound on the assignments fitted in one match.
const MAX_ASSIGNMENTS: usize = 200_000;

/// Deviation of one assigned point after alignment, in the gripper frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<T: Scalar> {
    /// In-plane distance, mm.
    pub transverse: T,
    /// Distance along the frame z-axis, mm.
    pub height: T,
    /// Angle between the aligned source normal and the target normal, degrees.
    pub tilt: T,
    /// Difference of patch normal spread, degrees.
    pub curvature: T,
}

impl<T: Scalar> Residual<T> {
    pub fn zero() -> Self {
        Self { transverse: T::zero(), height: T::zero(), tilt: T::zero(), curvature: T::zero() }
    }

    pub fn infinite() -> Self {
        let inf = T::max_value().unwrap();
        Self { transverse: inf, height: inf, tilt: inf, curvature: inf }
    }

    /// Component-wise maximum.
    pub fn max(self, other: Self) -> Self {
        let m = |a: T, b: T| if b > a { b } else { a };
        Self {
            transverse: m(self.transverse, other.transverse),
            height: m(self.height, other.height),
            tilt: m(self.tilt, other.tilt),
            curvature: m(self.curvature, other.curvature),
        }
    }

    /// Largest residual-to-bound ratio; at most 1 when within `tol`.
    pub fn score(&self, tol: &ToleranceSpec<T>) -> T {
        let ratio = |r: T, t: T, eps: T| r / (t + eps);
        let (l, a) = (T::length_eps(), T::angle_eps());
        [
            ratio(self.transverse, tol.pos_transverse_tol, l),
            ratio(self.height, tol.pos_height_tol, l),
            ratio(self.tilt, tol.normal_tilt_tol, a),
            ratio(self.curvature, tol.curvature_tol, a),
        ]
        .into_iter()
        .fold(T::zero(), |m, r| if r > m { r } else { m })
    }

    pub fn within(&self, tol: &ToleranceSpec<T>) -> bool {
        self.transverse <= tol.pos_transverse_tol + T::length_eps()
            && self.height <= tol.pos_height_tol + T::length_eps()
            && self.tilt <= tol.normal_tilt_tol + T::angle_eps()
            && self.curvature <= tol.curvature_tol + T::angle_eps()
    }
}

/// Candidate set of the workpiece a constellation is carried over to.
#[derive(Debug, Clone, Copy)]
pub struct MatchTarget<'a, T: Scalar> {
    pub candidates: &'a [GrippingPoint<T>],
    pub com: Point3<T>,
    pub constraints: ConstellationConstraints<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<T: Scalar> {
    pub matched: bool,
    pub per_point_residuals: Vec<Residual<T>>,
    pub worst_case: Residual<T>,
    /// Target candidate index per constellation point, when any was found.
    pub assignment: Option<Vec<usize>>,
    /// Rotation about the gripper z-axis applied by the fit, degrees.
    pub yaw: T,
    /// Number of assignments fitted.
    pub assignments_tried: usize,
}

impl<T: Scalar> MatchResult<T> {
    fn unmatched(k: usize) -> Self {
        Self {
            matched: false,
            per_point_residuals: vec![Residual::infinite(); k],
            worst_case: Residual::infinite(),
            assignment: None,
            yaw: T::zero(),
            assignments_tried: 0,
        }
    }

    /// The matched points on the target, in constellation order.
    pub fn assigned_points(&self, target: &[GrippingPoint<T>]) -> Option<Vec<GrippingPoint<T>>> {
        self.assignment.as_ref().map(|a| a.iter().map(|&i| target[i]).collect())
    }
}

struct Fit<T: Scalar> {
    residuals: Vec<Residual<T>>,
    worst: Residual<T>,
    yaw: T,
}

/// Least-squares rotation about the frame z-axis plus a translation, then
/// per-point residuals. Tilting is not fitted, so a height offset at one
/// cup shows up as a height residual instead of being spread into a tilt.
fn fit<T: Scalar>(c: &Constellation<T>, targets: &[GrippingPoint<T>]) -> Fit<T> {
    let frame = &c.frame;
    let k = T::lit(c.len() as f64);
    let src: Vec<Point3<T>> = c.local_points();
    let dst: Vec<Point3<T>> = targets.iter().map(|t| frame.to_local(&t.position)).collect();
    let sc = src.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / k;
    let dc = dst.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / k;
    let (mut dot, mut cross) = (T::zero(), T::zero());
    for (s, d) in src.iter().zip(&dst) {
        let (a, b) = (s.coords - sc, d.coords - dc);
        dot += a.x * b.x + a.y * b.y;
        cross += a.x * b.y - a.y * b.x;
    }
    let yaw = if dot == T::zero() && cross == T::zero() { T::zero() } else { cross.atan2(dot) };
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);

    let mut residuals = Vec::with_capacity(src.len());
    let mut worst = Residual::zero();
    for (i, (s, d)) in src.iter().zip(&dst).enumerate() {
        let moved = rot * (s.coords - sc) + dc;
        let delta = d.coords - moved;
        let normal = rot * frame.vector_to_local(&c.points[i].normal);
        let r = Residual {
            transverse: delta.xy().norm(),
            height: delta.z.abs(),
            tilt: angle_between_deg(&normal, &frame.vector_to_local(&targets[i].normal)),
            curvature: (c.points[i].max_normal_spread - targets[i].max_normal_spread).abs(),
        };
        worst = worst.max(r);
        residuals.push(r);
    }
    Fit { residuals, worst, yaw: yaw.to_degrees() }
}

/// Looks for `c` on another workpiece.
///
/// The constellation is first carried over by the translation between the
/// two centers of mass. Each point then admits the target candidates whose
/// offset, measured in the gripper frame, is within the transverse and
/// height bounds (at most [`MAX_CANDIDATES_PER_POINT`], nearest first).
/// Every assignment of distinct candidates is aligned and scored; only
/// assignments that also form a valid constellation on the target count.
/// When none is admitted, the nearest candidates are fitted instead so the
/// result still reports how far off the target is.
pub fn match_constellation<T: Scalar>(
    c: &Constellation<T>,
    target: &MatchTarget<'_, T>,
    tol: &ToleranceSpec<T>,
) -> MatchResult<T> {
    let k = c.len();
    if target.candidates.len() < k {
        return MatchResult::unmatched(k);
    }
    let frame = &c.frame;
    let shift = target.com - c.reference;
    let eps = T::length_eps();

    let gates: Vec<Vec<usize>> = c
        .points
        .iter()
        .map(|p| {
            let expected = p.position + shift;
            let mut near: Vec<(T, usize)> = target
                .candidates
                .iter()
                .enumerate()
                .filter_map(|(j, q)| {
                    let off = frame.vector_to_local(&(q.position - expected));
                    let inside = off.xy().norm() <= tol.pos_transverse_tol + eps && off.z.abs() <= tol.pos_height_tol + eps;
                    inside.then(|| (off.norm(), j))
                })
                .collect();
            near.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            near.truncate(MAX_CANDIDATES_PER_POINT);
            near.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    let mut best: Option<(T, Vec<usize>, Fit<T>)> = None;
    let mut tried = 0usize;
    let mut assignment = Vec::with_capacity(k);
    let mut visit = |assignment: &[usize], tried: &mut usize| {
        *tried += 1;
        let pts: Vec<GrippingPoint<T>> = assignment.iter().map(|&j| target.candidates[j]).collect();
        if check_all(&pts, &target.com, &target.constraints).is_none() {
            return;
        }
        let f = fit(c, &pts);
        let score = f.worst.score(tol);
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, assignment.to_vec(), f));
        }
    };
    assign(&gates, &mut assignment, &mut tried, &mut visit);

    if let Some((_, assignment, f)) = best {
        return MatchResult {
            matched: f.worst.within(tol),
            per_point_residuals: f.residuals,
            worst_case: f.worst,
            assignment: Some(assignment),
            yaw: f.yaw,
            assignments_tried: tried,
        };
    }

    // Diagnostic: greedily take the nearest unused candidate per point.
    let mut used = Vec::with_capacity(k);
    for p in &c.points {
        let expected = p.position + shift;
        let j = (0..target.candidates.len())
            .filter(|j| !used.contains(j))
            .min_by(|&a, &b| {
                let da = (target.candidates[a].position - expected).norm();
                let db = (target.candidates[b].position - expected).norm();
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .expect("at least k candidates");
        used.push(j);
    }
    let pts: Vec<GrippingPoint<T>> = used.iter().map(|&j| target.candidates[j]).collect();
    let f = fit(c, &pts);
    MatchResult {
        matched: false,
        per_point_residuals: f.residuals,
        worst_case: f.worst,
        assignment: Some(used),
        yaw: f.yaw,
        assignments_tried: tried,
    }
}

fn assign(
    gates: &[Vec<usize>],
    current: &mut Vec<usize>,
    tried: &mut usize,
    visit: &mut impl FnMut(&[usize], &mut usize),
) {
    if *tried >= MAX_ASSIGNMENTS {
        return;
    }
    let depth = current.len();
    if depth == gates.len() {
        visit(current, tried);
        return;
    }
    for &j in &gates[depth] {
        if current.contains(&j) {
            continue;
        }
        current.push(j);
        assign(gates, current, tried, visit);
        current.pop();
    }
}
