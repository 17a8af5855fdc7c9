//! The surface segment under one cup footprint and the seal tests run on it.
//!
//! A patch is cut by an infinite cylinder of the cup's radius whose axis
//! passes through the seed along the seed normal. Only surface reachable from
//! the seed triangle through edges inside the cylinder is collected, so the
//! opposite wall of a thin part is never captured. Triangles that face away
//! from the cup, and open mesh edges inside the footprint, mark the patch as
//! clipped by a boundary.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use nalgebra::{Point3, Vector2, Vector3};
use thiserror::Error;

use crate::mesh::{SeedPoint, TriangleMesh};
use crate::params::AnalysisParams;
use crate::scalar::{angle_between_deg, Scalar};

/// Minimum number of samples for a usable patch.
pub const MIN_PATCH_SAMPLES: usize = 6;

/// `normal · axis` below this marks a triangle as facing away from the cup.
const BACKFACE_COS: f64 = -1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchSample<T: Scalar> {
    pub point: Point3<T>,
    pub normal: Vector3<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch<T: Scalar> {
    pub center: Point3<T>,
    /// Surface normal estimated around the center (area-weighted over the
    /// inner quarter of the footprint); the tangent plane for deviations.
    pub center_normal: Vector3<T>,
    /// Cylinder axis used for the cut (the seed normal).
    pub axis: Vector3<T>,
    /// `samples[0]` is the center itself.
    pub samples: Vec<PatchSample<T>>,
    pub cup_radius: T,
    /// The footprint runs over an open edge or around onto back faces.
    pub boundary_clipped: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum PatchError {
    #[error("patch has only {samples} samples")]
    PatchTooSparse { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessReport<T: Scalar> {
    /// Largest |axial distance| of a sample from the tangent plane, mm.
    pub max_abs_deviation: T,
    /// Largest angle between a sample normal and the center normal, degrees.
    pub max_normal_spread: T,
    /// Least-squares paraboloid estimate, 1/mm (positive for convex caps).
    /// Informational only.
    pub mean_curvature: T,
    pub cone_violated: bool,
}

/// Why a seed was not accepted as a gripping point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rejection {
    BoundaryOverhang,
    ConeViolation,
    NormalSpread,
    PrefilterTilt,
}

impl Rejection {
    pub const ALL: [Rejection; 4] =
        [Rejection::BoundaryOverhang, Rejection::ConeViolation, Rejection::NormalSpread, Rejection::PrefilterTilt];

    pub fn name(self) -> &'static str {
        match self {
            Rejection::BoundaryOverhang => "boundary_overhang",
            Rejection::ConeViolation => "cone_violation",
            Rejection::NormalSpread => "normal_spread",
            Rejection::PrefilterTilt => "prefilter_tilt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An accepted cup contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrippingPoint<T: Scalar> {
    pub position: Point3<T>,
    pub normal: Vector3<T>,
    /// `1 − deviation / flatness_tol`, clamped to `[0, 1]`.
    pub quality: T,
    pub max_abs_deviation: T,
    pub max_normal_spread: T,
    pub mean_curvature: T,
    pub triangle_id: usize,
    /// Index of the originating seed in the workpiece's raster.
    pub seed: usize,
}

impl<T: Scalar> GrippingPoint<T> {
    /// A bare point with perfect quality, for constraint checks and tests.
    pub fn at(position: Point3<T>, normal: Vector3<T>) -> Self {
        Self {
            position,
            normal,
            quality: T::one(),
            max_abs_deviation: T::zero(),
            max_normal_spread: T::zero(),
            mean_curvature: T::zero(),
            triangle_id: 0,
            seed: 0,
        }
    }
}

/// In-plane coordinates relative to the cylinder axis.
struct Projector<T: Scalar> {
    origin: Point3<T>,
    u: Vector3<T>,
    v: Vector3<T>,
}

impl<T: Scalar> Projector<T> {
    fn new(origin: Point3<T>, axis: &Vector3<T>) -> Self {
        let helper = if axis.x.abs() < T::lit(0.9) { Vector3::x() } else { Vector3::y() };
        let u = axis.cross(&helper).normalize();
        let v = axis.cross(&u);
        Self { origin, u, v }
    }

    fn project(&self, p: &Point3<T>) -> Vector2<T> {
        let rel = p - self.origin;
        Vector2::new(rel.dot(&self.u), rel.dot(&self.v))
    }
}

fn segment_distance<T: Scalar>(a: &Vector2<T>, b: &Vector2<T>) -> T {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 > T::zero() { (-a.dot(&d) / len2).max(T::zero()).min(T::one()) } else { T::zero() };
    (a + d * t).norm()
}

/// Does the projected triangle reach within `radius` of the origin?
fn reaches_disk<T: Scalar>(q: &[Vector2<T>; 3], radius: T) -> bool {
    let det = (q[1] - q[0]).perp(&(q[2] - q[0]));
    if det.abs() > T::zero() {
        let s0 = q[0].perp(&q[1]) / det;
        let s1 = q[1].perp(&q[2]) / det;
        let s2 = q[2].perp(&q[0]) / det;
        if s0 >= T::zero() && s1 >= T::zero() && s2 >= T::zero() {
            return true;
        }
    }
    (0..3).any(|e| segment_distance(&q[e], &q[(e + 1) % 3]) <= radius)
}

/// Parameter where the segment `a → b` crosses the circle of `radius`.
fn circle_crossing<T: Scalar>(a: &Vector2<T>, b: &Vector2<T>, radius: T) -> T {
    let d = b - a;
    let qa = d.norm_squared();
    let qb = T::lit(2.0) * a.dot(&d);
    let qc = a.norm_squared() - radius * radius;
    let disc = (qb * qb - T::lit(4.0) * qa * qc).max(T::zero()).sqrt();
    let t = if qc <= T::zero() { (-qb + disc) / (T::lit(2.0) * qa) } else { (-qb - disc) / (T::lit(2.0) * qa) };
    t.max(T::zero()).min(T::one())
}

/// Inside-footprint flags for one row of the subdivision grid, covering
/// columns `start..start + inside.len()`; columns outside are outside.
struct Row {
    start: usize,
    inside: Vec<bool>,
}

impl Row {
    fn get(&self, j: usize) -> bool {
        j >= self.start && self.inside.get(j - self.start).copied().unwrap_or(false)
    }

    fn end(&self) -> usize {
        self.start + self.inside.len()
    }
}

/// Subdivides one triangle with pitch ≤ `pitch` and keeps the grid points
/// whose projection lies in the footprint, plus rim crossings on grid edges.
///
/// Grid point `(i, j)` is `w0 + (w1 − w0)·i/n + (w2 − w0)·j/n`. Per row the
/// footprint is an interval in `j` (a quadratic in the projected plane), so
/// only columns near that interval are visited.
#[allow(clippy::too_many_arguments)]
fn sample_triangle<T: Scalar>(
    world: &[Point3<T>; 3],
    q: &[Vector2<T>; 3],
    normal: Vector3<T>,
    area: T,
    radius: T,
    pitch: T,
    samples: &mut Vec<PatchSample<T>>,
    weights: &mut Vec<T>,
) {
    let eps = T::length_eps();
    let longest = [world[1] - world[0], world[2] - world[1], world[0] - world[2]]
        .iter()
        .map(|e| e.norm())
        .fold(T::zero(), |m, l| if l > m { l } else { m });
    let n = ((longest / pitch).ceil().as_f64() as usize).max(1);
    let nf = T::lit(n as f64);
    let weight = area / T::lit(((n + 1) * (n + 2) / 2) as f64);
    let frac = |i: usize| T::lit(i as f64) / nf;
    let point = |i: usize, j: usize| world[0] + (world[1] - world[0]) * frac(i) + (world[2] - world[0]) * frac(j);
    let planar = |i: usize, j: usize| q[0] + (q[1] - q[0]) * frac(i) + (q[2] - q[0]) * frac(j);
    let limit = radius + eps;

    let (d1, d2) = (q[1] - q[0], q[2] - q[0]);
    let qa = d2.norm_squared();
    let rows: Vec<Row> = (0..=n)
        .map(|i| {
            let last = n - i;
            let c = q[0] + d1 * frac(i);
            let qb = T::lit(2.0) * c.dot(&d2);
            let qc = c.norm_squared() - limit * limit;
            let span = if qa <= T::lit(1e-24) * (T::one() + limit * limit) {
                (qc <= limit * eps).then_some((0, last))
            } else {
                let disc = qb * qb - T::lit(4.0) * qa * qc;
                if disc < -(qb * qb).abs() * T::lit(1e-12) {
                    None
                } else {
                    let root = disc.max(T::zero()).sqrt();
                    let lo = ((-qb - root) / (T::lit(2.0) * qa) * nf).floor().as_f64() - 1.0;
                    let hi = ((-qb + root) / (T::lit(2.0) * qa) * nf).ceil().as_f64() + 1.0;
                    (hi >= 0.0 && lo <= last as f64).then(|| (lo.max(0.0) as usize, (hi as usize).min(last)))
                }
            };
            match span {
                Some((a, b)) => Row { start: a, inside: (a..=b).map(|j| planar(i, j).norm() <= limit).collect() },
                None => Row { start: 0, inside: Vec::new() },
            }
        })
        .collect();

    for (i, row) in rows.iter().enumerate() {
        for (o, &inside) in row.inside.iter().enumerate() {
            if inside {
                samples.push(PatchSample { point: point(i, row.start + o), normal });
                weights.push(weight);
            }
        }
    }
    let mut crossing = |(i0, j0): (usize, usize), (i1, j1): (usize, usize)| {
        if rows[i0].get(j0) != rows[i1].get(j1) {
            let t = circle_crossing(&planar(i0, j0), &planar(i1, j1), radius);
            let (p0, p1) = (point(i0, j0), point(i1, j1));
            samples.push(PatchSample { point: p0 + (p1 - p0) * t, normal });
            weights.push(T::zero());
        }
    };
    for i in 0..n {
        let (a, b) = (&rows[i], &rows[i + 1]);
        let lo = a.start.min(b.start).saturating_sub(1);
        let hi = a.end().max(b.end()).min(n - i);
        for j in lo..hi {
            crossing((i, j), (i + 1, j));
            crossing((i, j), (i, j + 1));
            crossing((i + 1, j), (i, j + 1));
        }
    }
}

/// Cuts the surface segment under a cup of `cup_diameter` centered at `seed`.
///
/// Samples are the vertices of a uniform subdivision of every reachable
/// triangle (pitch at most `cup_diameter / 8`) that fall inside the
/// footprint, plus the points where subdivision edges leave the footprint.
pub fn extract_patch<T: Scalar>(
    mesh: &TriangleMesh<T>,
    seed: &SeedPoint<T>,
    cup_diameter: T,
) -> Result<SurfacePatch<T>, PatchError> {
    assert!(cup_diameter > T::zero(), "cup diameter must be positive");
    let radius = cup_diameter * T::lit(0.5);
    let pitch = cup_diameter / T::lit(8.0);
    let eps = T::length_eps();
    let axis = seed.normal.normalize();
    let proj = Projector::new(seed.position, &axis);
    let backface = T::lit(BACKFACE_COS);

    let mut samples = vec![PatchSample { point: seed.position, normal: seed.normal }];
    let mut weights = vec![T::zero()];
    let mut clipped = false;

    let mut visited = HashSet::new();
    let mut queue = VecDeque::new();
    visited.insert(seed.triangle_id);
    queue.push_back(seed.triangle_id);
    while let Some(t) = queue.pop_front() {
        let world = mesh.triangle_points(t);
        let q = world.map(|p| proj.project(&p));
        if !reaches_disk(&q, radius + eps) {
            continue;
        }
        let normal = mesh.face_normal(t);
        if normal.dot(&axis) < backface {
            clipped = true;
            continue;
        }
        for e in 0..3 {
            let neighbors = mesh.edge_neighbors(t, e);
            if neighbors.is_empty() {
                if segment_distance(&q[e], &q[(e + 1) % 3]) <= radius {
                    clipped = true;
                }
                continue;
            }
            for &n in neighbors {
                if visited.insert(n) {
                    queue.push_back(n);
                }
            }
        }

        let weight_total = mesh.face_area(t);
        sample_triangle(&world, &q, normal, weight_total, radius, pitch, &mut samples, &mut weights);
    }

    if samples.len() < MIN_PATCH_SAMPLES {
        return Err(PatchError::PatchTooSparse { samples: samples.len() });
    }

    let inner = radius * T::lit(0.25);
    let mut accum = Vector3::zeros();
    for (s, &w) in samples.iter().zip(&weights) {
        if (s.point - seed.position).norm() <= inner {
            accum += s.normal * w;
        }
    }
    let center_normal = if accum.norm() > T::zero() { accum.normalize() } else { axis };

    Ok(SurfacePatch {
        center: seed.position,
        center_normal,
        axis,
        samples,
        cup_radius: radius,
        boundary_clipped: clipped,
    })
}

/// Deviation statistics and the cone envelope test.
///
/// A sample at radial distance `r` from the center axis passes when its
/// axial distance from the tangent plane satisfies
/// `|d| ≤ flatness_tol + cone_slope · r`.
pub fn flatness_check<T: Scalar>(patch: &SurfacePatch<T>, flatness_tol: T, cone_slope: T) -> FlatnessReport<T> {
    let cn = patch.center_normal;
    let mut max_dev = T::zero();
    let mut max_spread = T::zero();
    let mut violated = false;
    let (mut num, mut den) = (T::zero(), T::zero());
    for s in &patch.samples {
        let rel = s.point - patch.center;
        let axial = rel.dot(&cn);
        let radial = (rel - cn * axial).norm();
        let dev = axial.abs();
        if dev > max_dev {
            max_dev = dev;
        }
        if dev > flatness_tol + cone_slope * radial + T::length_eps() {
            violated = true;
        }
        let spread = angle_between_deg(&s.normal, &cn);
        if spread > max_spread {
            max_spread = spread;
        }
        let r2 = radial * radial;
        num += axial * r2;
        den += r2 * r2;
    }
    let mean_curvature = if den > T::zero() { -T::lit(2.0) * num / den } else { T::zero() };
    FlatnessReport { max_abs_deviation: max_dev, max_normal_spread: max_spread, mean_curvature, cone_violated: violated }
}

/// Runs the patch cut and the seal tests in fixed order: boundary/sparsity,
/// cone envelope, normal spread. The first failing rule is returned.
pub fn evaluate_candidate<T: Scalar>(
    mesh: &TriangleMesh<T>,
    seed: &SeedPoint<T>,
    params: &AnalysisParams<T>,
) -> Result<GrippingPoint<T>, Rejection> {
    let patch = extract_patch(mesh, seed, params.cup_diameter).map_err(|_| Rejection::BoundaryOverhang)?;
    if patch.boundary_clipped && !params.allow_boundary {
        return Err(Rejection::BoundaryOverhang);
    }
    let report = flatness_check(&patch, params.flatness_tol, params.cone_slope);
    if report.cone_violated {
        return Err(Rejection::ConeViolation);
    }
    if report.max_normal_spread > params.max_curvature_angle + T::angle_eps() {
        return Err(Rejection::NormalSpread);
    }
    Ok(GrippingPoint {
        position: seed.position,
        normal: seed.normal,
        quality: quality(report.max_abs_deviation, params.flatness_tol),
        max_abs_deviation: report.max_abs_deviation,
        max_normal_spread: report.max_normal_spread,
        mean_curvature: report.mean_curvature,
        triangle_id: seed.triangle_id,
        seed: 0,
    })
}

fn quality<T: Scalar>(deviation: T, tol: T) -> T {
    if tol <= T::zero() {
        return if deviation <= T::length_eps() { T::one() } else { T::zero() };
    }
    (T::one() - deviation / tol).max(T::zero()).min(T::one())
}
