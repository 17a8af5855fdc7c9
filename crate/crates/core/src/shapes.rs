//! Procedural workpieces with known geometry: boxes, stepped plates,
//! spheres and domes. All generators emit closed, outward-oriented meshes.

use nalgebra::{Point3, Vector3};

use crate::mesh::TriangleMesh;
use crate::scalar::Scalar;

fn build<T: Scalar>(name: &str, vertices: Vec<Point3<T>>, triangles: Vec<[usize; 3]>) -> TriangleMesh<T> {
    TriangleMesh::new(name, vertices, triangles).expect("generator emitted an invalid mesh")
}

/// Axis-aligned box with its minimum corner at `min`.
pub fn cuboid<T: Scalar>(min: Point3<T>, size: Vector3<T>) -> TriangleMesh<T> {
    let p = |x: usize, y: usize, z: usize| {
        Point3::new(
            min.x + size.x * T::lit(x as f64),
            min.y + size.y * T::lit(y as f64),
            min.z + size.z * T::lit(z as f64),
        )
    };
    let vertices = vec![
        p(0, 0, 0),
        p(1, 0, 0),
        p(1, 1, 0),
        p(0, 1, 0),
        p(0, 0, 1),
        p(1, 0, 1),
        p(1, 1, 1),
        p(0, 1, 1),
    ];
    let triangles = vec![
        [4, 5, 6],
        [4, 6, 7], // top
        [0, 2, 1],
        [0, 3, 2], // bottom
        [0, 1, 5],
        [0, 5, 4], // -y
        [1, 2, 6],
        [1, 6, 5], // +x
        [2, 3, 7],
        [2, 7, 6], // +y
        [3, 0, 4],
        [3, 4, 7], // -x
    ];
    build("cuboid", vertices, triangles)
}

/// Closed stepped solid over an `nx × ny` grid of square cells.
///
/// `height(i, j)` gives the top of cell `(i, j)` above `origin.z`; every height
/// must be positive. Vertical walls are split at every distinct height so the
/// result has no T-junctions. Top faces are emitted first, starting at cell
/// `(0, 0)`, so the first triangle lies on the top of that cell.
#[allow(clippy::needless_range_loop)]
pub fn heightfield<T: Scalar>(
    origin: Point3<T>,
    cell: T,
    nx: usize,
    ny: usize,
    height: impl Fn(usize, usize) -> T,
) -> TriangleMesh<T> {
    let h: Vec<Vec<T>> = (0..nx).map(|i| (0..ny).map(|j| height(i, j)).collect()).collect();
    let mut levels: Vec<T> = vec![T::zero()];
    for col in &h {
        for &z in col {
            assert!(z > T::zero(), "heightfield cell heights must be positive");
            levels.push(z);
        }
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-12));

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let corner = |i: usize, j: usize, z: T| {
        Point3::new(
            origin.x + cell * T::lit(i as f64),
            origin.y + cell * T::lit(j as f64),
            origin.z + z,
        )
    };
    let mut quad = |a: Point3<T>, b: Point3<T>, c: Point3<T>, d: Point3<T>| {
        let base = vertices.len();
        vertices.extend_from_slice(&[a, b, c, d]);
        triangles.push([base, base + 1, base + 2]);
        triangles.push([base, base + 2, base + 3]);
    };

    for j in 0..ny {
        for i in 0..nx {
            let z = h[i][j];
            quad(corner(i, j, z), corner(i + 1, j, z), corner(i + 1, j + 1, z), corner(i, j + 1, z));
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let z = T::zero();
            quad(corner(i, j, z), corner(i, j + 1, z), corner(i + 1, j + 1, z), corner(i + 1, j, z));
        }
    }

    // Wall strips between `lo` and `hi`, split at every level in between.
    let mut wall = |p: (usize, usize), q: (usize, usize), lo: T, hi: T| {
        let inner: Vec<T> = levels.iter().copied().filter(|&l| l >= lo && l <= hi).collect();
        for w in inner.windows(2) {
            let (z0, z1) = (w[0], w[1]);
            quad(corner(p.0, p.1, z0), corner(q.0, q.1, z0), corner(q.0, q.1, z1), corner(p.0, p.1, z1));
        }
    };
    // The wall between corners p→q faces the right-hand side of p→q seen from above.
    for i in 0..nx {
        wall((i, 0), (i + 1, 0), T::zero(), h[i][0]);
        wall((i + 1, ny), (i, ny), T::zero(), h[i][ny - 1]);
    }
    for j in 0..ny {
        wall((nx, j), (nx, j + 1), T::zero(), h[nx - 1][j]);
        wall((0, j + 1), (0, j), T::zero(), h[0][j]);
    }
    for i in 0..nx {
        for j in 0..ny {
            if i + 1 < nx {
                let (a, b) = (h[i][j], h[i + 1][j]);
                if a > b {
                    wall((i + 1, j), (i + 1, j + 1), b, a);
                } else if b > a {
                    wall((i + 1, j + 1), (i + 1, j), a, b);
                }
            }
            if j + 1 < ny {
                let (a, b) = (h[i][j], h[i][j + 1]);
                if a > b {
                    wall((i + 1, j + 1), (i, j + 1), b, a);
                } else if b > a {
                    wall((i, j + 1), (i + 1, j + 1), a, b);
                }
            }
        }
    }
    build("heightfield", vertices, triangles)
}

/// Flat plate `size_x × size_y × thickness` with its minimum corner at the
/// origin, tessellated into square cells of edge `cell`.
pub fn plate<T: Scalar>(size_x: T, size_y: T, thickness: T, cell: T) -> TriangleMesh<T> {
    let nx = (size_x / cell).round().as_f64() as usize;
    let ny = (size_y / cell).round().as_f64() as usize;
    heightfield(Point3::origin(), cell, nx, ny, |_, _| thickness).with_name("plate")
}

/// Plate with a rectangular block of cells raised by `rise`. The block spans
/// cells `[i0, i1) × [j0, j1)`.
pub fn plate_with_step<T: Scalar>(
    size: T,
    thickness: T,
    cell: T,
    cells_x: (usize, usize),
    cells_y: (usize, usize),
    rise: T,
) -> TriangleMesh<T> {
    let n = (size / cell).round().as_f64() as usize;
    heightfield(Point3::origin(), cell, n, n, |i, j| {
        if (cells_x.0..cells_x.1).contains(&i) && (cells_y.0..cells_y.1).contains(&j) {
            thickness + rise
        } else {
            thickness
        }
    })
    .with_name("stepped-plate")
}

/// L-shaped solid: a 100×100×5 floor with a 20×100×10 wall standing on its
/// `x ∈ [0, 20]` strip.
pub fn l_solid<T: Scalar>() -> TriangleMesh<T> {
    heightfield(Point3::origin(), T::lit(20.0), 5, 5, |i, _| if i == 0 { T::lit(15.0) } else { T::lit(5.0) })
        .with_name("l-solid")
}

/// Latitude/longitude sphere. `stacks` rings from pole to pole, `slices`
/// meridians. Vertex 0 is the north pole `center + (0, 0, r)`.
pub fn uv_sphere<T: Scalar>(center: Point3<T>, radius: T, slices: usize, stacks: usize) -> TriangleMesh<T> {
    assert!(slices >= 3 && stacks >= 2);
    let mut vertices = vec![center + Vector3::z() * radius];
    for s in 1..stacks {
        let theta = T::pi() * T::lit(s as f64) / T::lit(stacks as f64);
        for m in 0..slices {
            let phi = T::two_pi() * T::lit(m as f64) / T::lit(slices as f64);
            vertices.push(
                center
                    + Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()) * radius,
            );
        }
    }
    let south = vertices.len();
    vertices.push(center - Vector3::z() * radius);
    let ring = |s: usize, m: usize| 1 + (s - 1) * slices + (m % slices);
    let mut triangles = Vec::new();
    for m in 0..slices {
        triangles.push([0, ring(1, m), ring(1, m + 1)]);
    }
    for s in 1..stacks - 1 {
        for m in 0..slices {
            let (a, b, c, d) = (ring(s, m), ring(s + 1, m), ring(s + 1, m + 1), ring(s, m + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    for m in 0..slices {
        triangles.push([south, ring(stacks - 1, m + 1), ring(stacks - 1, m)]);
    }
    build("sphere", vertices, triangles)
}

/// Closed hemisphere (upper half of a sphere plus a flat base disk).
pub fn dome<T: Scalar>(center: Point3<T>, radius: T, slices: usize, stacks: usize) -> TriangleMesh<T> {
    assert!(slices >= 3 && stacks >= 1);
    let mut vertices = vec![center + Vector3::z() * radius];
    for s in 1..=stacks {
        let theta = T::frac_pi_2() * T::lit(s as f64) / T::lit(stacks as f64);
        for m in 0..slices {
            let phi = T::two_pi() * T::lit(m as f64) / T::lit(slices as f64);
            vertices.push(
                center
                    + Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()) * radius,
            );
        }
    }
    let base = vertices.len();
    vertices.push(center);
    let ring = |s: usize, m: usize| 1 + (s - 1) * slices + (m % slices);
    let mut triangles = Vec::new();
    for m in 0..slices {
        triangles.push([0, ring(1, m), ring(1, m + 1)]);
    }
    for s in 1..stacks {
        for m in 0..slices {
            let (a, b, c, d) = (ring(s, m), ring(s + 1, m), ring(s + 1, m + 1), ring(s, m + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    for m in 0..slices {
        triangles.push([base, ring(stacks, m + 1), ring(stacks, m)]);
    }
    build("dome", vertices, triangles)
}
