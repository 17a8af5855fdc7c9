//! Flat exports of a report's selected gripping points.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use gripplan::mesh::{load_mesh, TriangleMesh};
use gripplan::shapes;
use serde_json::Value;

use crate::report::{stored_constellations, StoredConstellation};

pub const CSV_HEADER: &str = "workpiece,index,x,y,z,nx,ny,nz,quality";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    MarkerPly,
}

#[derive(Debug, thiserror::Error)]
#[error("unknown export format `{0}` (expected `csv` or `marker-ply`)")]
pub struct UnknownFormat(String);

impl FromStr for ExportFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "marker-ply" | "ply" => Ok(Self::MarkerPly),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

fn selected(report: &Value) -> Result<Vec<StoredConstellation>> {
    Ok(stored_constellations(report)?.into_iter().filter(|c| c.selected).collect())
}

/// One row per selected gripping point. Values are written as stored in the
/// report, so parsing the CSV gives back the report's numbers exactly.
pub fn to_csv(report: &Value) -> Result<String> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in selected(report)? {
        for (i, p) in c.points.iter().enumerate() {
            let (x, n) = (p.position, p.normal);
            writeln!(out, "{},{},{},{},{},{},{},{},{}", c.workpiece, i, x.x, x.y, x.z, n.x, n.y, n.z, p.quality).unwrap();
        }
    }
    Ok(out)
}

/// ASCII PLY with the workpiece meshes, a small sphere at every selected
/// cup center and a line segment along each cup normal. Mesh vertices are
/// grey, markers red, normal segments blue. Relative mesh paths that do not
/// resolve from the working directory are looked up under `base`.
pub fn to_marker_ply(report: &Value, base: &Path) -> Result<String> {
    let scale = report["params"]["analysis"]["unit_scale"].as_f64().unwrap_or(1.0);
    let cup = report["params"]["analysis"]["cup_diameter"].as_f64().unwrap_or(20.0);
    let workpieces = report["workpieces"].as_array().ok_or_else(|| anyhow!("report has no workpieces"))?;

    let mut vertices: Vec<([f64; 3], [u8; 3])> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut add_mesh = |m: &TriangleMesh<f64>, color: [u8; 3], vertices: &mut Vec<([f64; 3], [u8; 3])>| {
        let base = vertices.len();
        vertices.extend(m.vertices().iter().map(|v| ([v.x, v.y, v.z], color)));
        faces.extend(m.triangles().iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    };

    for w in workpieces {
        let path = w["path"].as_str().ok_or_else(|| anyhow!("workpiece without path"))?;
        let given = Path::new(path);
        let full = if given.exists() { given.to_path_buf() } else { base.join(given) };
        let mesh: TriangleMesh<f64> =
            load_mesh(&full, None, scale).with_context(|| format!("loading {}", full.display()))?;
        add_mesh(&mesh, [180, 180, 180], &mut vertices);
    }
    for c in selected(report)? {
        for p in &c.points {
            let marker = shapes::uv_sphere(p.position, cup / 10.0, 12, 6);
            add_mesh(&marker, [220, 40, 40], &mut vertices);
            let tip = p.position + p.normal * (cup / 2.0);
            let a = vertices.len();
            vertices.push(([p.position.x, p.position.y, p.position.z], [40, 40, 220]));
            vertices.push(([tip.x, tip.y, tip.z], [40, 40, 220]));
            edges.push([a, a + 1]);
        }
    }

    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    writeln!(out, "element vertex {}", vertices.len()).unwrap();
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    writeln!(out, "element face {}", faces.len()).unwrap();
    out.push_str("property list uchar int vertex_indices\n");
    writeln!(out, "element edge {}", edges.len()).unwrap();
    out.push_str("property int vertex1\nproperty int vertex2\nend_header\n");
    for (v, c) in &vertices {
        writeln!(out, "{} {} {} {} {} {}", v[0], v[1], v[2], c[0], c[1], c[2]).unwrap();
    }
    for f in &faces {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    for e in &edges {
        writeln!(out, "{} {}", e[0], e[1]).unwrap();
    }
    Ok(out)
}
