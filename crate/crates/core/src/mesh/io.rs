//! STL (binary and ASCII) and Wavefront OBJ readers and writers.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Point3;

use super::{MeshError, TriangleMesh};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    StlBinary,
    StlAscii,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from the extension and, for `.stl`, the content.
    pub fn detect(path: &Path, bytes: &[u8]) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(MeshFormat::Obj),
            "stl" => {
                // Binary files may also start with "solid"; trust the size field.
                if bytes.len() >= 84 {
                    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
                    if bytes.len() == 84 + 50 * n {
                        return Some(MeshFormat::StlBinary);
                    }
                }
                if bytes.trim_ascii_start().starts_with(b"solid") {
                    Some(MeshFormat::StlAscii)
                } else {
                    Some(MeshFormat::StlBinary)
                }
            }
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stl-binary" => Ok(MeshFormat::StlBinary),
            "stl-ascii" => Ok(MeshFormat::StlAscii),
            "obj" => Ok(MeshFormat::Obj),
            other => Err(format!("unknown mesh format `{other}`")),
        }
    }
}

/// Loads a mesh, scaling every coordinate by `unit_scale` (file units → mm).
///
/// With `format = None` the format is detected from the file. The mesh is
/// named after the file stem.
pub fn load_mesh<T: Scalar>(
    path: &Path,
    format: Option<MeshFormat>,
    unit_scale: T,
) -> Result<TriangleMesh<T>, MeshError> {
    let bytes = fs::read(path)?;
    let context = path.display().to_string();
    let format = match format {
        Some(f) => f,
        None => MeshFormat::detect(path, &bytes)
            .ok_or_else(|| MeshError::parse(&context, "cannot determine mesh format"))?,
    };
    let (raw, tris) = match format {
        MeshFormat::StlBinary => parse_stl_binary(&bytes, &context)?,
        MeshFormat::StlAscii => parse_stl_ascii(&bytes, &context)?,
        MeshFormat::Obj => parse_obj(&bytes, &context)?,
    };
    let scale = unit_scale.as_f64();
    let vertices = raw
        .into_iter()
        .map(|p| Point3::new(T::lit(p[0] * scale), T::lit(p[1] * scale), T::lit(p[2] * scale)))
        .collect();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh").to_string();
    TriangleMesh::new(name, vertices, tris)
}

type Raw = (Vec<[f64; 3]>, Vec<[usize; 3]>);

fn parse_stl_binary(bytes: &[u8], context: &str) -> Result<Raw, MeshError> {
    if bytes.len() < 84 {
        return Err(MeshError::parse(context, "binary STL shorter than its header"));
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() < 84 + 50 * n {
        return Err(MeshError::parse(context, format!("binary STL truncated: {n} triangles declared")));
    }
    let mut vertices = Vec::with_capacity(3 * n);
    let mut tris = Vec::with_capacity(n);
    for t in 0..n {
        let rec = &bytes[84 + 50 * t..84 + 50 * (t + 1)];
        let f = |o: usize| f32::from_le_bytes(rec[o..o + 4].try_into().unwrap()) as f64;
        for v in 0..3 {
            let o = 12 + 12 * v;
            vertices.push([f(o), f(o + 4), f(o + 8)]);
        }
        tris.push([3 * t, 3 * t + 1, 3 * t + 2]);
    }
    Ok((vertices, tris))
}

fn parse_stl_ascii(bytes: &[u8], context: &str) -> Result<Raw, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| MeshError::parse(context, e.to_string()))?;
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    let mut pending = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("vertex") => {
                let coords = parse_coords(&mut it)
                    .ok_or_else(|| MeshError::parse(context, format!("line {}: bad vertex", lineno + 1)))?;
                vertices.push(coords);
                pending += 1;
            }
            Some("endloop") => {
                if pending != 3 {
                    return Err(MeshError::parse(
                        context,
                        format!("line {}: facet with {pending} vertices", lineno + 1),
                    ));
                }
                let b = vertices.len() - 3;
                tris.push([b, b + 1, b + 2]);
                pending = 0;
            }
            _ => {}
        }
    }
    if pending != 0 {
        return Err(MeshError::parse(context, "unterminated facet"));
    }
    Ok((vertices, tris))
}

fn parse_coords<'a>(it: &mut impl Iterator<Item = &'a str>) -> Option<[f64; 3]> {
    let x = it.next()?.parse().ok()?;
    let y = it.next()?.parse().ok()?;
    let z = it.next()?.parse().ok()?;
    Some([x, y, z])
}

fn parse_obj(bytes: &[u8], context: &str) -> Result<Raw, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| MeshError::parse(context, e.to_string()))?;
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let coords = parse_coords(&mut it)
                    .ok_or_else(|| MeshError::parse(context, format!("line {}: bad vertex", lineno + 1)))?;
                vertices.push(coords);
            }
            Some("f") => {
                let mut face = Vec::new();
                for token in it {
                    let index = token.split('/').next().unwrap_or("");
                    let i: i64 = index.parse().map_err(|_| {
                        MeshError::parse(context, format!("line {}: bad face index `{token}`", lineno + 1))
                    })?;
                    // OBJ indices are 1-based; negative values count back from the end.
                    let resolved = if i > 0 { i - 1 } else { vertices.len() as i64 + i };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(MeshError::parse(
                            context,
                            format!("line {}: face index {i} out of range", lineno + 1),
                        ));
                    }
                    face.push(resolved as usize);
                }
                if face.len() < 3 {
                    return Err(MeshError::parse(context, format!("line {}: face with < 3 vertices", lineno + 1)));
                }
                for k in 1..face.len() - 1 {
                    tris.push([face[0], face[k], face[k + 1]]);
                }
            }
            _ => {}
        }
    }
    // Faces may reference vertices declared later in the file.
    if let Some(bad) = tris.iter().flatten().find(|&&i| i >= vertices.len()) {
        return Err(MeshError::parse(context, format!("face index {} out of range", bad + 1)));
    }
    Ok((vertices, tris))
}

pub fn write_stl_binary<T: Scalar>(mesh: &TriangleMesh<T>, path: &Path) -> Result<(), MeshError> {
    let mut buf = Vec::with_capacity(84 + 50 * mesh.triangle_count());
    let mut header = [0u8; 80];
    let tag = b"binary stl";
    header[..tag.len()].copy_from_slice(tag);
    buf.extend_from_slice(&header);
    buf.extend_from_slice(&(mesh.triangle_count() as u32).to_le_bytes());
    for t in 0..mesh.triangle_count() {
        let n = mesh.face_normal(t);
        for k in 0..3 {
            buf.extend_from_slice(&(n[k].as_f64() as f32).to_le_bytes());
        }
        for p in mesh.triangle_points(t) {
            for k in 0..3 {
                buf.extend_from_slice(&(p[k].as_f64() as f32).to_le_bytes());
            }
        }
        buf.extend_from_slice(&[0, 0]);
    }
    fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn write_stl_ascii<T: Scalar>(mesh: &TriangleMesh<T>, path: &Path) -> Result<(), MeshError> {
    let mut s = format!("solid {}\n", mesh.name());
    for t in 0..mesh.triangle_count() {
        let n = mesh.face_normal(t);
        let _ = writeln!(s, "  facet normal {:e} {:e} {:e}", n.x.as_f64(), n.y.as_f64(), n.z.as_f64());
        s.push_str("    outer loop\n");
        for p in mesh.triangle_points(t) {
            let _ = writeln!(s, "      vertex {:?} {:?} {:?}", p.x.as_f64(), p.y.as_f64(), p.z.as_f64());
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(s, "endsolid {}", mesh.name());
    fs::write(path, s)?;
    Ok(())
}

pub fn write_obj<T: Scalar>(mesh: &TriangleMesh<T>, path: &Path) -> Result<(), MeshError> {
    let mut s = String::new();
    for p in mesh.vertices() {
        let _ = writeln!(s, "v {:?} {:?} {:?}", p.x.as_f64(), p.y.as_f64(), p.z.as_f64());
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use nalgebra::Vector3;

    fn cube() -> TriangleMesh<f64> {
        shapes::cuboid(Point3::origin(), Vector3::new(10.0, 10.0, 10.0))
    }

    #[test]
    fn binary_stl_round_trip_welds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.stl");
        write_stl_binary(&cube(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(MeshFormat::detect(&path, &bytes), Some(MeshFormat::StlBinary));
        let m = load_mesh::<f64>(&path, None, 1.0).unwrap();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.triangle_count(), 12);
        assert_eq!(m.name(), "cube");
    }

    #[test]
    fn ascii_stl_round_trip_with_unit_scale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.stl");
        write_stl_ascii(&cube(), &path).unwrap();
        let m = load_mesh::<f64>(&path, Some(MeshFormat::StlAscii), 25.4).unwrap();
        assert_eq!(m.vertices().len(), 8);
        assert!((m.bounding_box().extent().x - 254.0).abs() < 1e-9);
    }

    #[test]
    fn obj_quads_are_fan_triangulated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("quad.obj");
        fs::write(&path, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        let m = load_mesh::<f64>(&path, None, 1.0).unwrap();
        assert_eq!(m.triangle_count(), 2);
    }

    #[test]
    fn obj_out_of_range_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.obj");
        let mut s = String::new();
        for p in cube().vertices() {
            s.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
        }
        s.push_str("f 1 2 999\n");
        fs::write(&path, s).unwrap();
        let err = load_mesh::<f64>(&path, None, 1.0).unwrap_err();
        assert!(matches!(err, MeshError::Parse { .. }), "{err}");
    }

    #[test]
    fn truncated_binary_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.stl");
        let mut bytes = vec![0u8; 80];
        bytes.extend_from_slice(&5u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 60]);
        fs::write(&path, bytes).unwrap();
        let err = load_mesh::<f64>(&path, Some(MeshFormat::StlBinary), 1.0).unwrap_err();
        assert!(matches!(err, MeshError::Parse { .. }));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_mesh::<f64>(Path::new("/nonexistent/x.stl"), None, 1.0).unwrap_err();
        assert!(matches!(err, MeshError::Io(_)));
    }
}
