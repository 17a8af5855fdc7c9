#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use gripplan::mesh::{write_stl_binary, TriangleMesh};
use gripplan::shapes;
use nalgebra::Point3;
use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn gripplan<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_gripplan")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn write_mesh(dir: &Path, file: &str, mesh: &TriangleMesh<f64>) -> PathBuf {
    let path = dir.join(file);
    write_stl_binary(mesh, &path).unwrap();
    path
}

pub fn plate() -> TriangleMesh<f64> {
    shapes::plate(100.0, 100.0, 5.0, 10.0)
}

/// Plate with a 20 mm boss on the 10 × 10 mm cell at [70, 80]².
pub fn boss_plate() -> TriangleMesh<f64> {
    shapes::plate_with_step(100.0, 5.0, 10.0, (7, 8), (7, 8), 20.0)
}

pub fn small_sphere() -> TriangleMesh<f64> {
    shapes::uv_sphere(Point3::new(0.0, 0.0, 5.0), 5.0, 32, 16)
}

pub fn json(text: &str) -> Value {
    serde_json::from_str(text).expect("report is JSON")
}

pub fn vec3(v: &Value) -> [f64; 3] {
    let a = v.as_array().unwrap();
    [a[0].as_f64().unwrap(), a[1].as_f64().unwrap(), a[2].as_f64().unwrap()]
}

/// Positions of the selected constellations' points, per constellation.
pub fn selected_points(report: &Value) -> Vec<(usize, Vec<[f64; 3]>)> {
    report["constellations"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["selected"].as_bool().unwrap())
        .map(|c| {
            let pts = c["points"].as_array().unwrap().iter().map(|p| vec3(&p["position"])).collect();
            (c["workpiece"].as_u64().unwrap() as usize, pts)
        })
        .collect()
}
