//! Run settings: built-in defaults, overridden by a TOML file, overridden by
//! command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use gripplan::params::{AnalysisParams, ToleranceSpec};
use gripplan::search::DEFAULT_BUDGET;
use gripplan::workspace::SnapTolerance;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub const DEFAULT_LIMIT: usize = 10;

/// File layout. Every key is optional; missing keys keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub analysis: AnalysisSection,
    pub tolerance: ToleranceSection,
    pub search: SearchSection,
    pub workspace: WorkspaceSection,
    /// Roughness attribute per workpiece, keyed by file stem.
    pub roughness: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub cup_diameter: Option<f64>,
    pub cup_count: Option<usize>,
    pub min_spacing: Option<f64>,
    pub flatness_tol: Option<f64>,
    pub cone_slope: Option<f64>,
    pub max_curvature_angle: Option<f64>,
    pub max_tilt: Option<f64>,
    pub approach: Option<[f64; 3]>,
    pub min_line_offset: Option<f64>,
    pub stability_margin: Option<f64>,
    pub raster_spacing: Option<f64>,
    pub roughness_limit: Option<f64>,
    pub unit_scale: Option<f64>,
    pub allow_boundary: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub transverse: Option<f64>,
    pub height: Option<f64>,
    pub tilt: Option<f64>,
    pub curvature: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub budget: Option<usize>,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceSection {
    pub snap_length: Option<f64>,
    pub snap_angle: Option<f64>,
}

/// Flags shared by every subcommand that runs an analysis.
#[derive(Debug, Clone, Default, Args)]
pub struct SettingsArgs {
    /// TOML settings file; flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<std::path::PathBuf>,
    /// Suction cup diameter, mm
    #[arg(long)]
    pub cup_diameter: Option<f64>,
    /// Number of cups
    #[arg(long)]
    pub cup_count: Option<usize>,
    /// Minimum distance between cup centers, mm
    #[arg(long)]
    pub min_spacing: Option<f64>,
    /// Allowed deviation from the tangent plane under a cup, mm
    #[arg(long)]
    pub flatness_tol: Option<f64>,
    /// Growth of the allowed deviation per mm of radius
    #[arg(long)]
    pub cone_slope: Option<f64>,
    /// Largest normal spread under a cup, degrees
    #[arg(long)]
    pub max_curvature_angle: Option<f64>,
    /// Largest angle between a surface normal and the approach axis, degrees
    #[arg(long)]
    pub max_tilt: Option<f64>,
    /// Approach axis as x,y,z
    #[arg(long, value_name = "X,Y,Z", value_parser = parse_vector)]
    pub approach: Option<[f64; 3]>,
    /// Smallest distance of a cup from the line through the farthest pair, mm
    #[arg(long)]
    pub min_line_offset: Option<f64>,
    /// Required clearance of the center of mass inside the cup polygon, mm
    #[arg(long)]
    pub stability_margin: Option<f64>,
    /// Seed lattice pitch, mm (default: cup diameter / 4)
    #[arg(long)]
    pub raster_spacing: Option<f64>,
    /// Upper bound for per-workpiece roughness values
    #[arg(long)]
    pub roughness_limit: Option<f64>,
    /// Roughness of one workpiece as STEM=VALUE (repeatable)
    #[arg(long, value_name = "STEM=VALUE", value_parser = parse_roughness)]
    pub roughness: Vec<(String, f64)>,
    /// Factor converting mesh units to mm
    #[arg(long)]
    pub unit_scale: Option<f64>,
    /// Accept cup footprints that run over a mesh boundary
    #[arg(long)]
    pub allow_boundary: bool,
    /// In-plane tolerance when carrying a constellation over, mm
    #[arg(long)]
    pub transverse_tol: Option<f64>,
    /// Along-axis tolerance when carrying a constellation over, mm
    #[arg(long)]
    pub height_tol: Option<f64>,
    /// Normal tilt tolerance, degrees
    #[arg(long)]
    pub tilt_tol: Option<f64>,
    /// Normal spread difference tolerance, degrees
    #[arg(long)]
    pub curvature_tol: Option<f64>,
    /// First-workpiece constellations tried by `solve`
    #[arg(long)]
    pub budget: Option<usize>,
    /// Constellations listed by `analyze`
    #[arg(long)]
    pub limit: Option<usize>,
    /// Arm ranges up to this length count as fixed, mm
    #[arg(long)]
    pub snap_length: Option<f64>,
    /// Arm ranges up to this angle count as fixed, degrees
    #[arg(long)]
    pub snap_angle: Option<f64>,
}

fn parse_vector(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(v)
}

fn parse_roughness(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected STEM=VALUE, got `{s}`"))?;
    let value = value.trim().parse().map_err(|e| format!("`{value}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub params: AnalysisParams<f64>,
    pub tolerance: ToleranceSpec<f64>,
    pub budget: usize,
    pub limit: usize,
    pub snap: SnapTolerance<f64>,
    pub unit_scale: f64,
    pub roughness: BTreeMap<String, f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            params: AnalysisParams::default(),
            tolerance: ToleranceSpec::default(),
            budget: DEFAULT_BUDGET,
            limit: DEFAULT_LIMIT,
            snap: SnapTolerance::default(),
            unit_scale: 1.0,
            roughness: BTreeMap::new(),
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Lays flag values over the file values.
    fn overlay(mut self, a: &SettingsArgs) -> Self {
        fn set<V: Clone>(slot: &mut Option<V>, flag: &Option<V>) {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        let s = &mut self.analysis;
        set(&mut s.cup_diameter, &a.cup_diameter);
        set(&mut s.cup_count, &a.cup_count);
        set(&mut s.min_spacing, &a.min_spacing);
        set(&mut s.flatness_tol, &a.flatness_tol);
        set(&mut s.cone_slope, &a.cone_slope);
        set(&mut s.max_curvature_angle, &a.max_curvature_angle);
        set(&mut s.max_tilt, &a.max_tilt);
        set(&mut s.approach, &a.approach);
        set(&mut s.min_line_offset, &a.min_line_offset);
        set(&mut s.stability_margin, &a.stability_margin);
        set(&mut s.raster_spacing, &a.raster_spacing);
        set(&mut s.roughness_limit, &a.roughness_limit);
        set(&mut s.unit_scale, &a.unit_scale);
        if a.allow_boundary {
            s.allow_boundary = Some(true);
        }
        let t = &mut self.tolerance;
        set(&mut t.transverse, &a.transverse_tol);
        set(&mut t.height, &a.height_tol);
        set(&mut t.tilt, &a.tilt_tol);
        set(&mut t.curvature, &a.curvature_tol);
        set(&mut self.search.budget, &a.budget);
        set(&mut self.search.limit, &a.limit);
        set(&mut self.workspace.snap_length, &a.snap_length);
        set(&mut self.workspace.snap_angle, &a.snap_angle);
        for (name, value) in &a.roughness {
            self.roughness.insert(name.clone(), *value);
        }
        self
    }

    /// Fills in defaults and validates.
    pub fn resolve(&self) -> Result<Settings> {
        let d = Settings::default();
        let s = &self.analysis;
        let cup = s.cup_diameter.unwrap_or(d.params.cup_diameter);
        let base = AnalysisParams::<f64>::for_cup(cup);
        let params = AnalysisParams {
            cup_diameter: cup,
            cup_count: s.cup_count.unwrap_or(base.cup_count),
            min_spacing: s.min_spacing.unwrap_or(base.min_spacing),
            flatness_tol: s.flatness_tol.unwrap_or(base.flatness_tol),
            cone_slope: s.cone_slope.unwrap_or(base.cone_slope),
            max_curvature_angle: s.max_curvature_angle.unwrap_or(base.max_curvature_angle),
            max_tilt: s.max_tilt.unwrap_or(base.max_tilt),
            approach_axis: s.approach.map(Vector3::from).unwrap_or(base.approach_axis),
            min_line_offset: s.min_line_offset.unwrap_or(base.min_line_offset),
            stability_margin: s.stability_margin.unwrap_or(base.stability_margin),
            raster_spacing: s.raster_spacing.unwrap_or(base.raster_spacing),
            roughness_limit: s.roughness_limit,
            allow_boundary: s.allow_boundary.unwrap_or(false),
        }
        .validated()?;
        let t = &self.tolerance;
        let tolerance = ToleranceSpec {
            pos_transverse_tol: t.transverse.unwrap_or(d.tolerance.pos_transverse_tol),
            pos_height_tol: t.height.unwrap_or(d.tolerance.pos_height_tol),
            normal_tilt_tol: t.tilt.unwrap_or(d.tolerance.normal_tilt_tol),
            curvature_tol: t.curvature.unwrap_or(d.tolerance.curvature_tol),
        }
        .validated()?;
        let snap = SnapTolerance {
            length: self.workspace.snap_length.unwrap_or(d.snap.length),
            angle: self.workspace.snap_angle.unwrap_or(d.snap.angle),
        };
        if snap.length < 0.0 || snap.angle < 0.0 {
            bail!("snap tolerances must be non-negative");
        }
        let limit = self.search.limit.unwrap_or(d.limit);
        if limit == 0 {
            bail!("limit must be at least 1");
        }
        let unit_scale = s.unit_scale.unwrap_or(d.unit_scale);
        if unit_scale <= 0.0 {
            bail!("unit_scale must be positive");
        }
        Ok(Settings {
            params,
            tolerance,
            budget: self.search.budget.unwrap_or(d.budget),
            limit,
            snap,
            unit_scale,
            roughness: self.roughness.clone(),
        })
    }
}

impl Settings {
    pub fn from_args(args: &SettingsArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        file.overlay(args).resolve()
    }

    /// The settings as a complete config file.
    pub fn to_config(&self) -> ConfigFile {
        let p = &self.params;
        ConfigFile {
            analysis: AnalysisSection {
                cup_diameter: Some(p.cup_diameter),
                cup_count: Some(p.cup_count),
                min_spacing: Some(p.min_spacing),
                flatness_tol: Some(p.flatness_tol),
                cone_slope: Some(p.cone_slope),
                max_curvature_angle: Some(p.max_curvature_angle),
                max_tilt: Some(p.max_tilt),
                approach: Some([p.approach_axis.x, p.approach_axis.y, p.approach_axis.z]),
                min_line_offset: Some(p.min_line_offset),
                stability_margin: Some(p.stability_margin),
                raster_spacing: Some(p.raster_spacing),
                roughness_limit: p.roughness_limit,
                unit_scale: Some(self.unit_scale),
                allow_boundary: Some(p.allow_boundary),
            },
            tolerance: ToleranceSection {
                transverse: Some(self.tolerance.pos_transverse_tol),
                height: Some(self.tolerance.pos_height_tol),
                tilt: Some(self.tolerance.normal_tilt_tol),
                curvature: Some(self.tolerance.curvature_tol),
            },
            search: SearchSection { budget: Some(self.budget), limit: Some(self.limit) },
            workspace: WorkspaceSection { snap_length: Some(self.snap.length), snap_angle: Some(self.snap.angle) },
            roughness: self.roughness.clone(),
        }
    }
}
