use nalgebra::{Isometry3, Matrix3, Point3, Vector3};

use crate::constraints::{stability_clearance, ConstraintError};
use crate::patch::GrippingPoint;
use crate::scalar::Scalar;

/// Gripper frame: origin at the centroid of the cup centers, z along the
/// mean cup normal, x toward the first cup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperFrame<T: Scalar> {
    pub origin: Point3<T>,
    /// Rows are the x, y and z axes in world coordinates.
    pub axes: Matrix3<T>,
}

impl<T: Scalar> GripperFrame<T> {
    pub fn x(&self) -> Vector3<T> {
        self.axes.row(0).transpose()
    }

    pub fn y(&self) -> Vector3<T> {
        self.axes.row(1).transpose()
    }

    pub fn z(&self) -> Vector3<T> {
        self.axes.row(2).transpose()
    }

    pub fn to_local(&self, p: &Point3<T>) -> Point3<T> {
        Point3::from(self.axes * (p - self.origin))
    }

    pub fn vector_to_local(&self, v: &Vector3<T>) -> Vector3<T> {
        self.axes * v
    }

    pub fn to_world(&self, p: &Point3<T>) -> Point3<T> {
        self.origin + self.axes.transpose() * p.coords
    }

    fn build(points: &[GrippingPoint<T>], first: usize, fallback_z: &Vector3<T>) -> Self {
        let k = T::lit(points.len() as f64);
        let origin = Point3::from(points.iter().fold(Vector3::zeros(), |a, p| a + p.position.coords) / k);
        let sum = points.iter().fold(Vector3::zeros(), |a, p| a + p.normal);
        let z = if sum.norm() > T::length_eps() { sum.normalize() } else { fallback_z.normalize() };
        let toward = points[first].position - origin;
        let mut x = toward - z * toward.dot(&z);
        if x.norm() <= T::length_eps() {
            let helper = if z.x.abs() < T::lit(0.9) { Vector3::x() } else { Vector3::y() };
            x = helper - z * helper.dot(&z);
        }
        let x = x.normalize();
        let y = z.cross(&x);
        GripperFrame { origin, axes: Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]) }
    }
}

/// Cup position in the gripper plane: angle around the frame z-axis
/// (degrees, `[0, 360)`) and distance from it (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar<T: Scalar> {
    pub angle: T,
    pub radius: T,
}

/// An ordered set of gripping points with its gripper frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T: Scalar> {
    pub points: Vec<GrippingPoint<T>>,
    pub frame: GripperFrame<T>,
    /// Clearance of the center of mass inside the support polygon, mm.
    pub stability_score: T,
    /// Center of mass of the workpiece the points sit on.
    pub reference: Point3<T>,
}

fn planar_angle<T: Scalar>(v: &Point3<T>) -> T {
    let a = v.y.atan2(v.x).to_degrees();
    if a < T::zero() {
        a + T::lit(360.0)
    } else {
        a
    }
}

impl<T: Scalar> Constellation<T> {
    /// Builds the canonical form: the first point is the one farthest from
    /// the centroid (near-ties go to the earlier input), the rest follow
    /// counter-clockwise around the frame z-axis.
    pub fn canonical(
        points: Vec<GrippingPoint<T>>,
        reference: Point3<T>,
        gravity: &Vector3<T>,
    ) -> Result<Self, ConstraintError> {
        assert!(points.len() >= 3, "a constellation needs at least three points");
        let k = T::lit(points.len() as f64);
        let centroid = Point3::from(points.iter().fold(Vector3::zeros(), |a, p| a + p.position.coords) / k);
        let dists: Vec<T> = points.iter().map(|p| (p.position - centroid).norm()).collect();
        let far = dists.iter().copied().fold(T::zero(), |m, d| if d > m { d } else { m });
        let slack = far * T::lit(1e-9);
        let first = dists.iter().position(|&d| d >= far - slack).unwrap_or(0);

        let frame = GripperFrame::build(&points, first, &-gravity);
        let mut keyed: Vec<(T, T, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let local = frame.to_local(&p.position);
                let angle = if i == first { T::zero() } else { planar_angle(&local) };
                (angle, local.coords.xy().norm(), i)
            })
            .collect();
        keyed.sort_by(|a, b| {
            if a.2 == first {
                return std::cmp::Ordering::Less;
            }
            if b.2 == first {
                return std::cmp::Ordering::Greater;
            }
            a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()).then(a.2.cmp(&b.2))
        });
        let ordered: Vec<GrippingPoint<T>> = keyed.iter().map(|&(_, _, i)| points[i]).collect();
        let stability_score = stability_clearance(&ordered, &reference, gravity)?;
        Ok(Self { frame: GripperFrame::build(&ordered, 0, &-gravity), points: ordered, stability_score, reference })
    }

    /// Keeps the given point order, so that arm `i` of this constellation
    /// corresponds to arm `i` of the constellation it was matched against.
    pub fn from_correspondence(
        points: Vec<GrippingPoint<T>>,
        reference: Point3<T>,
        gravity: &Vector3<T>,
    ) -> Result<Self, ConstraintError> {
        assert!(points.len() >= 3, "a constellation needs at least three points");
        let stability_score = stability_clearance(&points, &reference, gravity)?;
        Ok(Self { frame: GripperFrame::build(&points, 0, &-gravity), points, stability_score, reference })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Point3<T>> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Cup centers in the gripper frame.
    pub fn local_points(&self) -> Vec<Point3<T>> {
        self.points.iter().map(|p| self.frame.to_local(&p.position)).collect()
    }

    /// Polar coordinates of each cup in the gripper frame.
    pub fn polar(&self) -> Vec<Polar<T>> {
        self.local_points()
            .iter()
            .map(|l| Polar { angle: planar_angle(l), radius: l.coords.xy().norm() })
            .collect()
    }

    /// The same constellation on a rigidly moved workpiece.
    pub fn transformed(&self, iso: &Isometry3<T>) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| GrippingPoint { position: iso * p.position, normal: iso * p.normal, ..*p })
            .collect();
        let rot = iso.rotation.to_rotation_matrix();
        Self {
            points,
            frame: GripperFrame { origin: iso * self.frame.origin, axes: self.frame.axes * rot.matrix().transpose() },
            stability_score: self.stability_score,
            reference: iso * self.reference,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Translation3, UnitQuaternion};

    fn gp(x: f64, y: f64) -> GrippingPoint<f64> {
        GrippingPoint::at(Point3::new(x, y, 5.0), Vector3::z())
    }

    #[test]
    fn canonical_order_and_frame() {
        let pts = vec![gp(0.0, 0.0), gp(60.0, 0.0), gp(10.0, 40.0)];
        let c = Constellation::canonical(pts, Point3::new(20.0, 12.0, 2.5), &-Vector3::z()).unwrap();
        let local = c.local_points();
        assert!(local[0].y.abs() < 1e-12 && local[0].x > 0.0);
        let polar = c.polar();
        assert!(polar[1].angle < polar[2].angle);
        assert!((c.frame.z() - Vector3::z()).norm() < 1e-12);
        let centroid: Vector3<f64> = local.iter().map(|p| p.coords).sum();
        assert!(centroid.norm() < 1e-9);
        // the farthest point from the centroid leads
        assert_eq!(c.points[0].position, Point3::new(60.0, 0.0, 5.0));
    }

    #[test]
    fn canonical_is_order_independent() {
        let a = vec![gp(0.0, 0.0), gp(60.0, 0.0), gp(10.0, 40.0)];
        let b = vec![a[2], a[0], a[1]];
        let com = Point3::new(20.0, 12.0, 2.5);
        let ca = Constellation::canonical(a, com, &-Vector3::z()).unwrap();
        let cb = Constellation::canonical(b, com, &-Vector3::z()).unwrap();
        assert_eq!(ca.positions(), cb.positions());
    }

    #[test]
    fn transform_moves_frame_with_points() {
        let pts = vec![gp(0.0, 0.0), gp(60.0, 0.0), gp(10.0, 40.0)];
        let c = Constellation::canonical(pts, Point3::new(20.0, 12.0, 2.5), &-Vector3::z()).unwrap();
        let iso = Isometry3::from_parts(Translation3::new(1.0, 2.0, 3.0), UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3));
        let moved = c.transformed(&iso);
        for (a, b) in c.local_points().iter().zip(moved.local_points()) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
