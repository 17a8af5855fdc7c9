mod config;
mod export;
mod report;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gripplan::mesh::{load_mesh, TriangleMesh};
use gripplan::pipeline::{analyze_workpiece, WorkpieceAnalysis};
use gripplan::search::{solve_analyzed, Constellation, SearchError};
use gripplan::workspace::plan_workspace;
use serde_json::json;
use sha2::{Digest, Sha256};

use config::{Settings, SettingsArgs};
use export::ExportFormat;
use report::Report;

/// Exit code when a single workpiece has no valid constellation.
const EXIT_NO_CONSTELLATION: u8 = 2;
/// Exit code when no constellation fits every workpiece.
const EXIT_NO_COMMON: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "gripplan", version, about = "Suction-cup gripping point search on triangle meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find gripping points and constellations on one workpiece
    Analyze {
        mesh: PathBuf,
        #[command(flatten)]
        settings: SettingsArgs,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find one constellation that grips every workpiece
    Solve {
        #[arg(required = true)]
        meshes: Vec<PathBuf>,
        #[command(flatten)]
        settings: SettingsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adjustment ranges covering the selected constellations of earlier reports
    Workspace {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[command(flatten)]
        settings: SettingsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the selected gripping points of a report as CSV or PLY
    Export {
        report: PathBuf,
        /// `csv` or `marker-ply`
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the resolved settings as a config file
    Config {
        #[command(flatten)]
        settings: SettingsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

struct Loaded {
    path: String,
    sha256: String,
    mesh: TriangleMesh<f64>,
}

fn load(path: &Path, settings: &Settings) -> Result<Loaded> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let mesh: TriangleMesh<f64> =
        load_mesh(path, None, settings.unit_scale).with_context(|| format!("loading {}", path.display()))?;
    let roughness = settings.roughness.get(mesh.name()).copied();
    Ok(Loaded { path: path.display().to_string(), sha256, mesh: mesh.with_roughness(roughness) })
}

fn analyze(path: &Path, args: &SettingsArgs, out: Option<&Path>) -> Result<u8> {
    let settings = Settings::from_args(args)?;
    let loaded = load(path, &settings)?;
    let analysis = analyze_workpiece(&loaded.mesh, &settings.params);
    let mut report = Report::new("analyze", &settings);
    report.add_workpiece(&loaded.path, &loaded.sha256, &loaded.mesh, &analysis);

    let mut walk = analysis.constellations();
    let found: Vec<(Vec<usize>, Constellation<f64>)> = walk.by_ref().take(settings.limit).collect();
    for (i, (indices, c)) in found.iter().enumerate() {
        report.add_constellation(0, c, indices, i == 0);
    }
    report.diagnostic("sets_examined", json!(walk.examined));
    let code = if found.is_empty() {
        report.status("no_constellation");
        report.message(format!(
            "{}: no valid constellation among {} candidates",
            analysis.name,
            analysis.candidates.len()
        ));
        EXIT_NO_CONSTELLATION
    } else {
        0
    };
    emit(out, &report.into_string())?;
    Ok(code)
}

fn solve(paths: &[PathBuf], args: &SettingsArgs, out: Option<&Path>) -> Result<u8> {
    let settings = Settings::from_args(args)?;
    let loaded: Vec<Loaded> = paths.iter().map(|p| load(p, &settings)).collect::<Result<_>>()?;
    let analyses: Vec<WorkpieceAnalysis<f64>> =
        loaded.iter().map(|l| analyze_workpiece(&l.mesh, &settings.params)).collect();
    let mut report = Report::new("solve", &settings);
    for (l, a) in loaded.iter().zip(&analyses) {
        report.add_workpiece(&l.path, &l.sha256, &l.mesh, a);
    }

    let code = match solve_analyzed(&analyses, &settings.tolerance, settings.budget) {
        Ok(sol) => {
            for (w, (c, indices)) in sol.constellations.iter().zip(&sol.assignments).enumerate() {
                report.add_constellation(w, c, indices, true);
            }
            let matches: Vec<_> = sol.matches.iter().enumerate().map(|(i, m)| report::match_result(i + 1, m)).collect();
            report.set(
                "common",
                json!({
                    "found": true,
                    "tried": sol.tried + 1,
                    "best_prefix": sol.constellations.len(),
                    "assignments": sol.assignments,
                    "matches": matches,
                }),
            );
            let ws = plan_workspace(&sol.constellations, &settings.snap)?;
            report.set("workspace", report::workspace(&ws, &settings.snap));
            0
        }
        Err(SearchError::NoCommonConstellation(failure)) => {
            for (w, c) in failure.best.iter().enumerate() {
                report.add_constellation(w, c, &[], false);
            }
            report.set(
                "common",
                json!({
                    "found": false,
                    "tried": failure.tried,
                    "best_prefix": failure.best_prefix,
                    "assignments": null,
                    "matches": [],
                }),
            );
            report.status("no_common_constellation");
            let k = settings.params.cup_count;
            for w in &failure.workpieces {
                if w.candidate_count < k {
                    report.message(format!(
                        "{}: {} candidates from {} seeds, {} needed",
                        w.name, w.candidate_count, w.seed_count, k
                    ));
                }
            }
            report.message(format!(
                "no common constellation after {} tries; best prefix {} of {}",
                failure.tried,
                failure.best_prefix,
                failure.workpieces.len()
            ));
            EXIT_NO_COMMON
        }
        Err(e @ SearchError::NoConstellation { .. }) => {
            report.status("no_common_constellation");
            report.message(e.to_string());
            EXIT_NO_COMMON
        }
    };
    emit(out, &report.into_string())?;
    Ok(code)
}

fn workspace(paths: &[PathBuf], args: &SettingsArgs, out: Option<&Path>) -> Result<u8> {
    let settings = Settings::from_args(args)?;
    let mut constellations = Vec::new();
    let mut sources = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let stored = report::parse_report(&text).with_context(|| format!("parsing {}", path.display()))?;
        let gravity = report::stored_gravity(&stored)?;
        let mut count = 0;
        for c in report::stored_constellations(&stored)?.into_iter().filter(|c| c.selected) {
            if c.points.len() < 3 {
                bail!("{}: constellation with only {} points", path.display(), c.points.len());
            }
            let c = Constellation::from_correspondence(c.points, c.reference, &gravity)
                .with_context(|| format!("rebuilding a constellation from {}", path.display()))?;
            constellations.push(c);
            count += 1;
        }
        sources.push(json!({ "path": path.display().to_string(), "constellations": count }));
    }
    if constellations.is_empty() {
        bail!("the given reports contain no selected constellation");
    }
    let ws = plan_workspace(&constellations, &settings.snap)?;
    let mut report = Report::new("workspace", &settings);
    for (i, c) in constellations.iter().enumerate() {
        report.add_constellation(i, c, &[], true);
    }
    report.set("sources", json!(sources));
    report.set("workspace", report::workspace(&ws, &settings.snap));
    emit(out, &report.into_string())?;
    Ok(0)
}

fn export(path: &Path, format: ExportFormat, out: Option<&Path>) -> Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let stored = report::parse_report(&text).with_context(|| format!("parsing {}", path.display()))?;
    let body = match format {
        ExportFormat::Csv => export::to_csv(&stored)?,
        ExportFormat::MarkerPly => {
            let base = path.parent().unwrap_or(Path::new("."));
            export::to_marker_ply(&stored, base)?
        }
    };
    emit(out, &body)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Analyze { mesh, settings, out } => analyze(mesh, settings, out.as_deref()),
        Command::Solve { meshes, settings, out } => solve(meshes, settings, out.as_deref()),
        Command::Workspace { reports, settings, out } => workspace(reports, settings, out.as_deref()),
        Command::Export { report, format, out } => export(report, *format, out.as_deref()),
        Command::Config { settings, out } => {
            let s = Settings::from_args(settings)?;
            emit(out.as_deref(), &toml::to_string(&s.to_config())?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
