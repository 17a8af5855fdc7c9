//! Triangle-mesh workpieces: validation, welding, adjacency and mass properties.

mod io;
mod raster;

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use thiserror::Error;

use crate::scalar::Scalar;

pub use io::{load_mesh, write_obj, write_stl_ascii, write_stl_binary, MeshFormat};
pub use raster::{normal_prefilter, raster_sample, raster_sample_in, within_tilt, RasterFrame, SeedPoint};

/// Vertices closer than this (mm) are merged on construction.
pub const WELD_TOLERANCE: f64 = 1e-5;
/// Triangles with area at or below this (mm²) are dropped on construction.
pub const MIN_TRIANGLE_AREA: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error("triangle {triangle} references vertex {index} but only {count} vertices exist")]
    IndexOutOfRange { triangle: usize, index: usize, count: usize },
    #[error("mesh `{0}` has no valid triangles")]
    DegenerateMesh(String),
    #[error("raster with pitch {spacing} produced no seed points")]
    EmptyRaster { spacing: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MeshError {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        MeshError::Parse { context: context.into(), message: message.into() }
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T: Scalar> {
    pub min: Point3<T>,
    pub max: Point3<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn extent(&self) -> Vector3<T> {
        self.max - self.min
    }
}

/// Indexed triangle surface in millimetres.
///
/// Construction welds near-duplicate vertices, drops degenerate triangles and
/// precomputes unit face normals and edge adjacency. The mesh is immutable
/// afterwards.
#[derive(Debug, Clone)]
pub struct TriangleMesh<T: Scalar> {
    name: String,
    vertices: Vec<Point3<T>>,
    triangles: Vec<[usize; 3]>,
    face_normals: Vec<Vector3<T>>,
    face_areas: Vec<T>,
    /// For each triangle edge `(v[i], v[(i+1)%3])`, the other triangles sharing it.
    neighbors: Vec<[Vec<usize>; 3]>,
    watertight: bool,
    roughness: Option<T>,
}

impl<T: Scalar> TriangleMesh<T> {
    /// Builds a validated mesh from raw vertex and index buffers.
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Point3<T>>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        let name = name.into();
        let count = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= count) {
                return Err(MeshError::IndexOutOfRange { triangle: t, index, count });
            }
        }

        let (vertices, remap) = weld(vertices, T::lit(WELD_TOLERANCE));
        let min_area = T::lit(MIN_TRIANGLE_AREA);
        let mut kept = Vec::with_capacity(triangles.len());
        let mut face_normals = Vec::with_capacity(triangles.len());
        let mut face_areas = Vec::with_capacity(triangles.len());
        for tri in triangles {
            let tri = [remap[tri[0]], remap[tri[1]], remap[tri[2]]];
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                continue;
            }
            let cross = (vertices[tri[1]] - vertices[tri[0]]).cross(&(vertices[tri[2]] - vertices[tri[0]]));
            let double_area = cross.norm();
            let area = double_area * T::lit(0.5);
            if area <= min_area {
                continue;
            }
            kept.push(tri);
            face_normals.push(cross / double_area);
            face_areas.push(area);
        }
        if kept.is_empty() {
            return Err(MeshError::DegenerateMesh(name));
        }

        let (neighbors, watertight) = adjacency(&kept);
        Ok(Self {
            name,
            vertices,
            triangles: kept,
            face_normals,
            face_areas,
            neighbors,
            watertight,
            roughness: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Attaches a scalar surface roughness attribute.
    pub fn with_roughness(mut self, roughness: Option<T>) -> Self {
        self.roughness = roughness;
        self
    }

    pub fn roughness(&self) -> Option<T> {
        self.roughness
    }

    pub fn vertices(&self) -> &[Point3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn face_normals(&self) -> &[Vector3<T>] {
        &self.face_normals
    }

    pub fn face_normal(&self, triangle: usize) -> Vector3<T> {
        self.face_normals[triangle]
    }

    pub fn face_area(&self, triangle: usize) -> T {
        self.face_areas[triangle]
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, triangle: usize) -> [Point3<T>; 3] {
        let [a, b, c] = self.triangles[triangle];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Triangles sharing edge `edge` (0..3) of `triangle`; empty for an open edge.
    pub fn edge_neighbors(&self, triangle: usize, edge: usize) -> &[usize] {
        &self.neighbors[triangle][edge]
    }

    /// Every edge is used equally often in both directions, so the surface
    /// bounds a solid with consistent orientation.
    pub fn is_watertight(&self) -> bool {
        self.watertight
    }

    pub fn surface_area(&self) -> T {
        self.face_areas.iter().fold(T::zero(), |acc, &a| acc + a)
    }

    pub fn bounding_box(&self) -> Aabb<T> {
        let mut min = self.vertices[self.triangles[0][0]];
        let mut max = min;
        for tri in &self.triangles {
            for &v in tri {
                let p = self.vertices[v];
                for k in 0..3 {
                    if p[k] < min[k] {
                        min[k] = p[k];
                    }
                    if p[k] > max[k] {
                        max[k] = p[k];
                    }
                }
            }
        }
        Aabb { min, max }
    }

    /// Returns a copy with every vertex mapped through `f`; topology is kept.
    pub fn map_vertices(&self, f: impl Fn(&Point3<T>) -> Point3<T>) -> Result<Self, MeshError> {
        let vertices = self.vertices.iter().map(f).collect();
        Self::new(self.name.clone(), vertices, self.triangles.clone())
            .map(|m| m.with_roughness(self.roughness))
    }

    /// Applies a rigid motion (or any isometry) to the mesh.
    pub fn transformed(&self, iso: &nalgebra::Isometry3<T>) -> Result<Self, MeshError> {
        self.map_vertices(|p| iso * p)
    }

    /// Uniformly scales coordinates about the origin.
    pub fn scaled(&self, factor: T) -> Result<Self, MeshError> {
        self.map_vertices(|p| Point3::from(p.coords * factor))
    }

    /// Concatenates two meshes into one (no welding across the seam beyond
    /// the usual vertex weld).
    pub fn merged(&self, other: &Self) -> Result<Self, MeshError> {
        let offset = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]));
        Self::new(self.name.clone(), vertices, triangles)
    }
}

/// Merges vertices within `tol` of an earlier vertex. Returns the compacted
/// vertex list and the old→new index map.
fn weld<T: Scalar>(vertices: Vec<Point3<T>>, tol: T) -> (Vec<Point3<T>>, Vec<usize>) {
    let cell_of = |p: &Point3<T>| -> [i64; 3] {
        let q = |x: T| (x / tol).floor().as_f64() as i64;
        [q(p.x), q(p.y), q(p.z)]
    };
    let tol2 = tol * tol;
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut out: Vec<Point3<T>> = Vec::with_capacity(vertices.len());
    let mut remap = Vec::with_capacity(vertices.len());
    for p in vertices {
        let c = cell_of(&p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &i in bucket {
                            if (out[i] - p).norm_squared() <= tol2 {
                                found = Some(i);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        let index = found.unwrap_or_else(|| {
            out.push(p);
            let i = out.len() - 1;
            grid.entry(c).or_default().push(i);
            i
        });
        remap.push(index);
    }
    (out, remap)
}

fn adjacency(triangles: &[[usize; 3]]) -> (Vec<[Vec<usize>; 3]>, bool) {
    let mut undirected: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            undirected.entry((a.min(b), a.max(b))).or_default().push(t);
            *directed.entry((a, b)).or_default() += 1;
        }
    }
    let mut watertight = true;
    // Closed as a 2-cycle: every edge is traversed equally often in both
    // directions. Solids touching along an edge still qualify.
    for &(a, b) in undirected.keys() {
        let forward = directed.get(&(a, b)).copied().unwrap_or(0);
        let backward = directed.get(&(b, a)).copied().unwrap_or(0);
        if forward != backward {
            watertight = false;
            break;
        }
    }
    let neighbors = triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            std::array::from_fn(|e| {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                undirected[&(a.min(b), a.max(b))].iter().copied().filter(|&o| o != t).collect()
            })
        })
        .collect();
    (neighbors, watertight)
}

/// Mass properties of a workpiece assuming uniform density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassProperties<T: Scalar> {
    pub center: Point3<T>,
    /// Enclosed volume; `None` when the surface centroid fallback was used.
    pub volume: Option<T>,
    pub surface_area: T,
    /// True when the mesh was not a closed solid and the centroid is the
    /// area-weighted surface centroid instead.
    pub surface_fallback: bool,
}

/// Center of mass of the workpiece.
///
/// Closed meshes use the signed-tetrahedron (divergence theorem) sum; open or
/// inconsistent meshes fall back to the area-weighted surface centroid and
/// set `surface_fallback`.
pub fn center_of_mass<T: Scalar>(mesh: &TriangleMesh<T>) -> MassProperties<T> {
    // Accumulate relative to a vertex on the mesh to limit cancellation.
    let origin = mesh.vertices[mesh.triangles[0][0]].coords;
    let mut area = T::zero();
    let mut area_moment = Vector3::zeros();
    let mut volume6 = T::zero();
    let mut volume_moment = Vector3::zeros();
    for (t, _) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = mesh.triangle_points(t);
        let (a, b, c) = (a.coords - origin, b.coords - origin, c.coords - origin);
        let w = mesh.face_areas[t];
        area += w;
        area_moment += (a + b + c) * (w / T::lit(3.0));
        let v6 = a.dot(&b.cross(&c));
        volume6 += v6;
        volume_moment += (a + b + c) * (v6 / T::lit(4.0));
    }
    let surface_center = area_moment / area;
    let volume = volume6 / T::lit(6.0);
    // A closed mesh enclosing (numerically) nothing cannot provide a solid centroid.
    let scale = mesh.bounding_box().extent().norm();
    let meaningful = volume.abs() > T::lit(1e-12) * scale * scale * scale;
    if mesh.watertight && meaningful {
        MassProperties {
            center: Point3::from(volume_moment / volume6 + origin),
            volume: Some(volume.abs()),
            surface_area: area,
            surface_fallback: false,
        }
    } else {
        MassProperties {
            center: Point3::from(surface_center + origin),
            volume: None,
            surface_area: area,
            surface_fallback: true,
        }
    }
}
