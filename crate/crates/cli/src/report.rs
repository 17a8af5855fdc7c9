//! JSON report layout.
//!
//! Every float is rounded to 9 significant digits before serialization and
//! object keys are sorted, so identical runs give identical bytes.

use anyhow::{anyhow, bail, Context, Result};
use gripplan::mesh::TriangleMesh;
use gripplan::patch::{GrippingPoint, Rejection};
use gripplan::pipeline::WorkpieceAnalysis;
use gripplan::search::{Constellation, MatchResult, Residual};
use gripplan::workspace::{SnapTolerance, WorkspaceSpec};
use nalgebra::{Point3, Vector3};
use serde_json::{json, Map, Value};

use crate::config::Settings;

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to 9 significant digits; non-finite and overflow values become null.
pub fn round9(x: f64) -> Value {
    if !x.is_finite() || x.abs() >= f64::MAX {
        return Value::Null;
    }
    let r: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    json!(if r == 0.0 { 0.0 } else { r })
}

fn round_all(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => *v = round9(n.as_f64().unwrap()),
        Value::Array(items) => items.iter_mut().for_each(round_all),
        Value::Object(map) => map.values_mut().for_each(round_all),
        _ => {}
    }
}

fn vec3(x: f64, y: f64, z: f64) -> Value {
    json!([x, y, z])
}

fn point(p: &Point3<f64>) -> Value {
    vec3(p.x, p.y, p.z)
}

fn vector(v: &Vector3<f64>) -> Value {
    vec3(v.x, v.y, v.z)
}

pub struct Report {
    root: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, settings: &Settings) -> Self {
        let mut root = Map::new();
        root.insert("schema_version".into(), json!(SCHEMA_VERSION));
        root.insert("command".into(), json!(command));
        root.insert("params".into(), serde_json::to_value(settings.to_config()).expect("config serializes"));
        for key in ["workpieces", "candidates", "constellations"] {
            root.insert(key.into(), json!([]));
        }
        root.insert("common".into(), Value::Null);
        root.insert("workspace".into(), Value::Null);
        root.insert("diagnostics".into(), json!({ "status": "ok", "messages": [] }));
        Self { root }
    }

    fn push(&mut self, key: &str, v: Value) {
        self.root.get_mut(key).and_then(Value::as_array_mut).expect("array key").push(v);
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.root.insert(key.into(), v);
    }

    pub fn status(&mut self, status: &str) {
        self.root["diagnostics"]["status"] = json!(status);
    }

    pub fn message(&mut self, text: impl Into<String>) {
        self.root["diagnostics"]["messages"].as_array_mut().unwrap().push(json!(text.into()));
    }

    pub fn diagnostic(&mut self, key: &str, v: Value) {
        self.root["diagnostics"][key] = v;
    }

    pub fn add_workpiece(&mut self, path: &str, sha256: &str, mesh: &TriangleMesh<f64>, a: &WorkpieceAnalysis<f64>) {
        let index = self.root["workpieces"].as_array().unwrap().len();
        let rejections: Map<String, Value> =
            Rejection::ALL.iter().map(|r| (r.name().to_string(), json!(a.rejections.get(r).copied().unwrap_or(0)))).collect();
        self.push(
            "workpieces",
            json!({
                "index": index,
                "name": a.name,
                "path": path,
                "sha256": sha256,
                "triangles": mesh.triangle_count(),
                "watertight": mesh.is_watertight(),
                "roughness": mesh.roughness(),
                "center_of_mass": point(&a.mass.center),
                "volume": a.mass.volume,
                "surface_area": a.mass.surface_area,
                "surface_fallback": a.mass.surface_fallback,
                "seeds": a.seed_count,
                "examined": a.examined,
                "candidates": a.candidates.len(),
                "rejections": rejections,
                "roughness_exceeded": a.roughness_exceeded,
                "empty_raster": a.empty_raster,
            }),
        );
        for (i, g) in a.candidates.iter().enumerate() {
            self.push("candidates", candidate(index, i, g));
        }
    }

    /// `selected` marks the constellations that make up the result.
    pub fn add_constellation(
        &mut self,
        workpiece: usize,
        c: &Constellation<f64>,
        candidates: &[usize],
        selected: bool,
    ) {
        let index = self.root["constellations"].as_array().unwrap().len();
        self.push("constellations", constellation(workpiece, index, c, candidates, selected));
    }

    pub fn into_string(self) -> String {
        let mut v = Value::Object(self.root);
        round_all(&mut v);
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }
}

fn candidate(workpiece: usize, index: usize, g: &GrippingPoint<f64>) -> Value {
    json!({
        "workpiece": workpiece,
        "index": index,
        "seed": g.seed,
        "triangle": g.triangle_id,
        "position": point(&g.position),
        "normal": vector(&g.normal),
        "quality": g.quality,
        "max_abs_deviation": g.max_abs_deviation,
        "max_normal_spread": g.max_normal_spread,
        "mean_curvature": g.mean_curvature,
    })
}

fn constellation(workpiece: usize, index: usize, c: &Constellation<f64>, candidates: &[usize], selected: bool) -> Value {
    let f = &c.frame;
    let points: Vec<Value> = c
        .points
        .iter()
        .zip(c.polar())
        .enumerate()
        .map(|(arm, (p, polar))| {
            json!({
                "arm": arm,
                "candidate": candidates.get(arm),
                "position": point(&p.position),
                "normal": vector(&p.normal),
                "quality": p.quality,
                "max_normal_spread": p.max_normal_spread,
                "angle": polar.angle,
                "radius": polar.radius,
            })
        })
        .collect();
    json!({
        "workpiece": workpiece,
        "index": index,
        "selected": selected,
        "points": points,
        "frame": { "origin": point(&f.origin), "x": vector(&f.x()), "y": vector(&f.y()), "z": vector(&f.z()) },
        "stability_score": c.stability_score,
        "reference": point(&c.reference),
    })
}

pub fn residual(r: &Residual<f64>) -> Value {
    json!({
        "transverse": round9(r.transverse),
        "height": round9(r.height),
        "tilt": round9(r.tilt),
        "curvature": round9(r.curvature),
    })
}

pub fn match_result(workpiece: usize, m: &MatchResult<f64>) -> Value {
    json!({
        "workpiece": workpiece,
        "matched": m.matched,
        "assignment": m.assignment,
        "yaw": m.yaw,
        "worst_case": residual(&m.worst_case),
        "residuals": m.per_point_residuals.iter().map(residual).collect::<Vec<_>>(),
        "assignments_tried": m.assignments_tried,
    })
}

pub fn workspace(ws: &WorkspaceSpec<f64>, snap: &SnapTolerance<f64>) -> Value {
    let arms: Vec<Value> = ws
        .per_arm
        .iter()
        .enumerate()
        .map(|(i, a)| {
            json!({
                "arm": i,
                "angle_range": [a.angle.min, a.angle.max],
                "radius_range": [a.radius.min, a.radius.max],
                "angle_adjustable": a.angle_adjustable,
                "radius_adjustable": a.radius_adjustable,
            })
        })
        .collect();
    let poses: Vec<Value> = ws
        .poses
        .iter()
        .map(|pose| Value::Array(pose.iter().map(|p| json!({"angle": p.angle, "radius": p.radius})).collect()))
        .collect();
    json!({
        "arm_count": ws.arm_count,
        "per_arm": arms,
        "dof_required": ws.dof_required,
        "fixed": ws.fixed,
        "snap": { "length": snap.length, "angle": snap.angle },
        "poses": poses,
    })
}

/// A constellation read back from a report.
#[derive(Debug, Clone)]
pub struct StoredConstellation {
    pub workpiece: usize,
    pub selected: bool,
    pub points: Vec<GrippingPoint<f64>>,
    pub reference: Point3<f64>,
}

fn read_vec3(v: &Value, what: &str) -> Result<[f64; 3]> {
    let a = v.as_array().filter(|a| a.len() == 3).ok_or_else(|| anyhow!("`{what}` is not a 3-vector"))?;
    let mut out = [0.0; 3];
    for (o, x) in out.iter_mut().zip(a) {
        *o = x.as_f64().ok_or_else(|| anyhow!("`{what}` has a non-numeric entry"))?;
    }
    Ok(out)
}

pub fn parse_report(text: &str) -> Result<Value> {
    let v: Value = serde_json::from_str(text).context("report is not valid JSON")?;
    match v.get("schema_version").and_then(Value::as_u64) {
        Some(n) if n == u64::from(SCHEMA_VERSION) => Ok(v),
        Some(n) => bail!("unsupported schema_version {n}"),
        None => bail!("report has no schema_version"),
    }
}

pub fn stored_constellations(report: &Value) -> Result<Vec<StoredConstellation>> {
    let list = report["constellations"].as_array().ok_or_else(|| anyhow!("report has no constellations list"))?;
    list.iter()
        .map(|c| {
            let points = c["points"]
                .as_array()
                .ok_or_else(|| anyhow!("constellation without points"))?
                .iter()
                .map(|p| {
                    let pos = read_vec3(&p["position"], "position")?;
                    let n = read_vec3(&p["normal"], "normal")?;
                    let mut g = GrippingPoint::at(Point3::from(pos), Vector3::from(n));
                    g.quality = p["quality"].as_f64().unwrap_or(0.0);
                    g.max_normal_spread = p["max_normal_spread"].as_f64().unwrap_or(0.0);
                    Ok(g)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(StoredConstellation {
                workpiece: c["workpiece"].as_u64().unwrap_or(0) as usize,
                selected: c["selected"].as_bool().unwrap_or(false),
                points,
                reference: Point3::from(read_vec3(&c["reference"], "reference")?),
            })
        })
        .collect()
}

/// Gravity direction recorded in a report's params (against the approach axis).
pub fn stored_gravity(report: &Value) -> Result<Vector3<f64>> {
    let a = read_vec3(&report["params"]["analysis"]["approach"], "params.analysis.approach")?;
    Ok(-Vector3::from(a).normalize())
}
