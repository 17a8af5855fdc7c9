//! Seed points: where the lines of a cubic lattice pierce the workpiece surface.
//!
//! The lattice has pitch `spacing` and is offset by half a pitch from the
//! frame origin on every axis. For each of the three line families the
//! surface crossings are found per triangle; coincident crossings (lattice
//! points on shared edges) are kept once, owned by the lowest triangle index.

use std::collections::HashMap;

use nalgebra::{Matrix3, Point3, Vector2, Vector3};

use super::{MeshError, TriangleMesh};
use crate::scalar::Scalar;

/// A surface point to be examined as a potential cup center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedPoint<T: Scalar> {
    pub position: Point3<T>,
    pub normal: Vector3<T>,
    pub triangle_id: usize,
}

/// Orthonormal frame the lattice is aligned with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterFrame<T: Scalar> {
    pub origin: Point3<T>,
    /// Rows are the frame axes expressed in world coordinates.
    pub axes: Matrix3<T>,
}

impl<T: Scalar> RasterFrame<T> {
    /// The world axes through the world origin.
    pub fn world() -> Self {
        Self { origin: Point3::origin(), axes: Matrix3::identity() }
    }

    /// A frame rigidly attached to the mesh: origin at the first vertex of
    /// triangle 0, `z` along its normal, `x` along its shortest edge.
    ///
    /// Moving the mesh rigidly moves this frame with it, so the seed set is
    /// pose independent. For CAD parts whose first facet is an axis-aligned
    /// right triangle the lattice is aligned with the part's own axes.
    pub fn attached(mesh: &TriangleMesh<T>) -> Self {
        let [a, b, c] = mesh.triangle_points(0);
        let edges = [b - a, c - b, a - c];
        let lengths = edges.map(|e| e.norm());
        let shortest = lengths.iter().copied().fold(lengths[0], |m, l| if l < m { l } else { m });
        let slack = shortest * T::lit(1e-9);
        let pick = (0..3).find(|&i| lengths[i] <= shortest + slack).unwrap_or(0);
        let z = mesh.face_normal(0);
        let x = edges[pick] / lengths[pick];
        let x = (x - z * x.dot(&z)).normalize();
        let y = z.cross(&x);
        Self { origin: a, axes: Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]) }
    }

    pub fn to_local(&self, p: &Point3<T>) -> Vector3<T> {
        self.axes * (p - self.origin)
    }
}

/// Seeds on a lattice attached to the mesh (see [`RasterFrame::attached`]).
pub fn raster_sample<T: Scalar>(mesh: &TriangleMesh<T>, spacing: T) -> Result<Vec<SeedPoint<T>>, MeshError> {
    raster_sample_in(mesh, spacing, &RasterFrame::attached(mesh))
}

/// Seeds on the lattice of pitch `spacing` aligned with `frame`.
///
/// Output is ordered by `(triangle_id, line family, lattice index)`.
pub fn raster_sample_in<T: Scalar>(
    mesh: &TriangleMesh<T>,
    spacing: T,
    frame: &RasterFrame<T>,
) -> Result<Vec<SeedPoint<T>>, MeshError> {
    assert!(spacing > T::zero(), "raster spacing must be positive");
    let half = T::lit(0.5);
    let bary_eps = T::lit(1e-12);
    let mut seeds = Vec::new();
    for t in 0..mesh.triangle_count() {
        let world = mesh.triangle_points(t);
        let local = world.map(|p| frame.to_local(&p));
        for axis in 0..3 {
            // line family parallel to `axis`; (u, v) are the other two coordinates
            let (iu, iv) = ((axis + 1) % 3, (axis + 2) % 3);
            let q = local.map(|p| Vector2::new(p[iu], p[iv]));
            let det = (q[1] - q[0]).perp(&(q[2] - q[0]));
            let scale = (q[1] - q[0]).norm_squared().max((q[2] - q[0]).norm_squared());
            if det.abs() <= T::lit(1e-12) * scale {
                continue; // triangle contains the line direction
            }
            let range = |k: usize| {
                let lo = q.iter().map(|p| p[k]).fold(q[0][k], |m, x| if x < m { x } else { m });
                let hi = q.iter().map(|p| p[k]).fold(q[0][k], |m, x| if x > m { x } else { m });
                let first = (lo / spacing - half).ceil().as_f64() as i64;
                let last = (hi / spacing - half).floor().as_f64() as i64;
                first..=last
            };
            for i in range(0) {
                let u = (T::lit(i as f64) + half) * spacing;
                for j in range(1) {
                    let v = (T::lit(j as f64) + half) * spacing;
                    let p = Vector2::new(u, v);
                    let w1 = (p - q[0]).perp(&(q[2] - q[0])) / det;
                    let w2 = (q[1] - q[0]).perp(&(p - q[0])) / det;
                    let w0 = T::one() - w1 - w2;
                    if w0 < -bary_eps || w1 < -bary_eps || w2 < -bary_eps {
                        continue;
                    }
                    let position = Point3::from(world[0].coords * w0 + world[1].coords * w1 + world[2].coords * w2);
                    seeds.push(SeedPoint { position, normal: mesh.face_normal(t), triangle_id: t });
                }
            }
        }
    }
    let seeds = dedupe(seeds, T::length_eps() * T::lit(100.0));
    if seeds.is_empty() {
        return Err(MeshError::EmptyRaster { spacing: spacing.as_f64() });
    }
    Ok(seeds)
}

fn dedupe<T: Scalar>(seeds: Vec<SeedPoint<T>>, tol: T) -> Vec<SeedPoint<T>> {
    let key = |p: &Point3<T>| {
        let q = |x: T| (x / tol).floor().as_f64() as i64;
        [q(p.x), q(p.y), q(p.z)]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut kept: Vec<SeedPoint<T>> = Vec::with_capacity(seeds.len());
    for s in seeds {
        let k = key(&s.position);
        let mut duplicate = false;
        'scan: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if bucket.iter().any(|&i| (kept[i].position - s.position).norm() <= tol) {
                            duplicate = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if !duplicate {
            grid.entry(k).or_default().push(kept.len());
            kept.push(s);
        }
    }
    kept
}

/// Keeps the seeds whose normal lies within `max_tilt_deg` of `approach_axis`.
///
/// The test is `normal · axis ≥ cos(max_tilt)`; input order is preserved.
pub fn normal_prefilter<T: Scalar>(
    seeds: &[SeedPoint<T>],
    approach_axis: &Vector3<T>,
    max_tilt_deg: T,
) -> Vec<SeedPoint<T>> {
    seeds.iter().copied().filter(|s| within_tilt(&s.normal, approach_axis, max_tilt_deg)).collect()
}

/// The prefilter predicate for a single normal.
pub fn within_tilt<T: Scalar>(normal: &Vector3<T>, approach_axis: &Vector3<T>, max_tilt_deg: T) -> bool {
    max_tilt_deg >= T::lit(180.0) || normal.dot(approach_axis) >= max_tilt_deg.to_radians().cos()
}
