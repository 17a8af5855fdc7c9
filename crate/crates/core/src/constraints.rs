//! Constellation-level rules: cup spacing, non-collinearity and support of
//! the center of mass.
//!
//! All comparisons are boundary-inclusive. Thresholds get a slack of
//! [`Scalar::length_eps`] so a value that equals its limit up to rounding
//! is treated as equal.

use nalgebra::{DMatrix, Point2, Point3, Vector3};
use thiserror::Error;

use crate::mesh::SeedPoint;
use crate::patch::GrippingPoint;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("projected gripping points collapse onto a line; the support polygon is empty")]
    DegenerateProjection,
}

/// Parameters of the three constellation rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationConstraints<T: Scalar> {
    pub min_spacing: T,
    pub min_line_offset: T,
    pub stability_margin: T,
    /// Unit vector.
    pub gravity: Vector3<T>,
}

impl<T: Scalar> Default for ConstellationConstraints<T> {
    fn default() -> Self {
        Self {
            min_spacing: T::lit(30.0),
            min_line_offset: T::lit(5.0),
            stability_margin: T::lit(5.0),
            gravity: -Vector3::z(),
        }
    }
}

/// Anything with a location in space.
pub trait Located<T: Scalar> {
    fn location(&self) -> Point3<T>;
}

impl<T: Scalar> Located<T> for Point3<T> {
    fn location(&self) -> Point3<T> {
        *self
    }
}

impl<T: Scalar> Located<T> for SeedPoint<T> {
    fn location(&self) -> Point3<T> {
        self.position
    }
}

impl<T: Scalar> Located<T> for GrippingPoint<T> {
    fn location(&self) -> Point3<T> {
        self.position
    }
}

impl<T: Scalar, L: Located<T>> Located<T> for &L {
    fn location(&self) -> Point3<T> {
        (*self).location()
    }
}

/// Smallest pairwise distance, or infinity for fewer than two points.
pub fn min_pairwise_distance<T: Scalar, P: Located<T>>(points: &[P]) -> T {
    let mut best = T::max_value().unwrap();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i].location() - points[j].location()).norm();
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Every pair of points is at least `min_spacing` apart.
pub fn spacing_ok<T: Scalar, P: Located<T>>(points: &[P], min_spacing: T) -> bool {
    min_pairwise_distance(points) >= min_spacing - T::length_eps()
}

/// The seeds left after cutting a ball of radius `min_spacing` around
/// `placed`: those strictly farther away.
pub fn exclusion_region<T: Scalar, S: Located<T> + Clone>(seeds: &[S], placed: &Point3<T>, min_spacing: T) -> Vec<S> {
    seeds.iter().filter(|s| outside_exclusion(&s.location(), placed, min_spacing)).cloned().collect()
}

pub fn outside_exclusion<T: Scalar>(p: &Point3<T>, placed: &Point3<T>, min_spacing: T) -> bool {
    (p - placed).norm() > min_spacing + T::length_eps()
}

fn point_line_distance<T: Scalar>(p: &Point3<T>, a: &Point3<T>, b: &Point3<T>) -> T {
    let dir = b - a;
    let len = dir.norm();
    if len <= T::zero() {
        return (p - a).norm();
    }
    dir.cross(&(p - a)).norm() / len
}

/// Distance of the remaining points from the line through the farthest pair
/// (the largest of them). Ties between equally distant pairs go to the
/// lexicographically first pair. Zero for fewer than three points.
pub fn line_offset<T: Scalar, P: Located<T>>(points: &[P]) -> T {
    let pts: Vec<Point3<T>> = points.iter().map(Located::location).collect();
    if pts.len() < 3 {
        return T::zero();
    }
    let (mut a, mut b, mut far) = (0, 1, -T::one());
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i] - pts[j]).norm();
            if d > far {
                (a, b, far) = (i, j, d);
            }
        }
    }
    (0..pts.len())
        .filter(|&i| i != a && i != b)
        .map(|i| point_line_distance(&pts[i], &pts[a], &pts[b]))
        .fold(T::zero(), |m, d| if d > m { d } else { m })
}

/// RMS distance from the best-fit line (second singular value of the
/// centered coordinates over √k). Diagnostic only.
pub fn line_fit_residual<T: Scalar, P: Located<T>>(points: &[P]) -> T {
    let k = points.len();
    if k < 3 {
        return T::zero();
    }
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.location().coords) / T::lit(k as f64);
    let m = DMatrix::from_fn(k, 3, |r, c| points[r].location().coords[c] - centroid[c]);
    let mut sv: Vec<T> = m.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv.get(1).copied().unwrap_or_else(T::zero) / T::lit(k as f64).sqrt()
}

/// The points do not lie (nearly) on one line.
pub fn collinearity_ok<T: Scalar, P: Located<T>>(points: &[P], min_line_offset: T) -> bool {
    let offset = line_offset(points);
    let ok = offset >= min_line_offset - T::length_eps();
    if !ok && log::log_enabled!(log::Level::Trace) {
        log::trace!(
            "collinear set: offset {:.4} < {:.4}, line-fit residual {:.4}",
            offset.as_f64(),
            min_line_offset.as_f64(),
            line_fit_residual(points).as_f64()
        );
    }
    ok
}

/// Orthonormal coordinates in the plane perpendicular to `gravity`.
fn ground_plane<T: Scalar>(gravity: &Vector3<T>) -> (Vector3<T>, Vector3<T>) {
    let g = gravity.normalize();
    let helper = if g.x.abs() < T::lit(0.9) { Vector3::x() } else { Vector3::y() };
    let u = g.cross(&helper).normalize();
    let v = g.cross(&u);
    (u, v)
}

fn cross2<T: Scalar>(o: &Point2<T>, a: &Point2<T>, b: &Point2<T>) -> T {
    (a - o).perp(&(b - o))
}

/// Counter-clockwise convex hull without collinear vertices (monotone chain).
pub fn convex_hull_2d<T: Scalar>(points: &[Point2<T>]) -> Vec<Point2<T>> {
    let mut pts = points.to_vec();
    pts.sort_by(|p, q| p.x.partial_cmp(&q.x).unwrap().then(p.y.partial_cmp(&q.y).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2<T>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2<T>>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= T::zero() {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

/// Signed clearance of the projected center of mass from the boundary of the
/// projected support polygon: the distance to the nearest edge when inside
/// (positive), negative when outside.
pub fn stability_clearance<T: Scalar, P: Located<T>>(
    points: &[P],
    com: &Point3<T>,
    gravity: &Vector3<T>,
) -> Result<T, ConstraintError> {
    let (u, v) = ground_plane(gravity);
    let flat = |p: &Point3<T>| Point2::new(p.coords.dot(&u), p.coords.dot(&v));
    let projected: Vec<Point2<T>> = points.iter().map(|p| flat(&p.location())).collect();
    let hull = convex_hull_2d(&projected);
    let extent = projected
        .iter()
        .flat_map(|p| projected.iter().map(move |q| (p - q).norm()))
        .fold(T::zero(), |m, d| if d > m { d } else { m });
    let area2 = (1..hull.len().saturating_sub(1))
        .map(|i| cross2(&hull[0], &hull[i], &hull[i + 1]))
        .fold(T::zero(), |a, x| a + x);
    if hull.len() < 3 || area2 <= T::length_eps() * extent.max(T::one()) {
        return Err(ConstraintError::DegenerateProjection);
    }
    let c = flat(com);
    let mut clearance = T::max_value().unwrap();
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        let d = cross2(&a, &b, &c) / (b - a).norm();
        if d < clearance {
            clearance = d;
        }
    }
    Ok(clearance)
}

/// The projected center of mass sits inside the support polygon with at
/// least `stability_margin` to spare.
pub fn stability_ok<T: Scalar, P: Located<T>>(
    points: &[P],
    com: &Point3<T>,
    constraints: &ConstellationConstraints<T>,
) -> Result<bool, ConstraintError> {
    let clearance = stability_clearance(points, com, &constraints.gravity)?;
    Ok(clearance >= constraints.stability_margin - T::length_eps())
}

/// All three rules at once; returns the stability clearance when they pass.
pub fn check_all<T: Scalar, P: Located<T>>(
    points: &[P],
    com: &Point3<T>,
    constraints: &ConstellationConstraints<T>,
) -> Option<T> {
    if !spacing_ok(points, constraints.min_spacing) || !collinearity_ok(points, constraints.min_line_offset) {
        return None;
    }
    match stability_clearance(points, com, &constraints.gravity) {
        Ok(c) if c >= constraints.stability_margin - T::length_eps() => Some(c),
        _ => None,
    }
}
