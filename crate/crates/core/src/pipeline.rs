//! Per-workpiece analysis: raster, normal prefilter and patch tests.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::constraints::ConstellationConstraints;
use crate::mesh::{center_of_mass, raster_sample, within_tilt, MassProperties, MeshError, SeedPoint, TriangleMesh};
use crate::params::AnalysisParams;
use crate::patch::{evaluate_candidate, GrippingPoint, Rejection};
use crate::scalar::Scalar;
use crate::search::{Constellation, Constellations};

/// Everything learned about one workpiece before constellations are formed.
#[derive(Debug, Clone)]
pub struct WorkpieceAnalysis<T: Scalar> {
    pub name: String,
    pub seed_count: usize,
    /// Seeds that survived the normal prefilter.
    pub examined: usize,
    /// Accepted points, best quality first, then in seed order.
    pub candidates: Vec<GrippingPoint<T>>,
    /// Rejected seeds per reason. Every reason is present, possibly with 0.
    pub rejections: BTreeMap<Rejection, usize>,
    pub mass: MassProperties<T>,
    /// The mesh's roughness attribute exceeds the configured bound; no
    /// candidates are produced.
    pub roughness_exceeded: bool,
    /// The raster produced no seeds at this spacing.
    pub empty_raster: bool,
    pub constraints: ConstellationConstraints<T>,
    pub cup_count: usize,
}

impl<T: Scalar> WorkpieceAnalysis<T> {
    pub fn com(&self) -> nalgebra::Point3<T> {
        self.mass.center
    }

    /// Valid constellations on this workpiece in enumeration order.
    pub fn constellations(&self) -> Constellations<'_, T> {
        Constellations::new(&self.candidates, self.mass.center, self.constraints, self.cup_count)
    }

    /// Up to `limit` constellations.
    pub fn first_constellations(&self, limit: usize) -> Vec<Constellation<T>> {
        self.constellations().take(limit).map(|(_, c)| c).collect()
    }
}

fn quality_key<T: Scalar>(q: T) -> i64 {
    (q.as_f64() * 1e9).round() as i64
}

/// Runs raster sampling, the prefilter and the patch tests on one mesh.
///
/// Seeds are evaluated in parallel; results are gathered back in seed order,
/// so the output does not depend on scheduling.
pub fn analyze_workpiece<T: Scalar>(mesh: &TriangleMesh<T>, params: &AnalysisParams<T>) -> WorkpieceAnalysis<T> {
    let mass = center_of_mass(mesh);
    let mut rejections: BTreeMap<Rejection, usize> = Rejection::ALL.iter().map(|&r| (r, 0)).collect();
    let mut analysis = WorkpieceAnalysis {
        name: mesh.name().to_string(),
        seed_count: 0,
        examined: 0,
        candidates: Vec::new(),
        rejections: BTreeMap::new(),
        mass,
        roughness_exceeded: false,
        empty_raster: false,
        constraints: params.constraints(),
        cup_count: params.cup_count,
    };
    if let (Some(r), Some(limit)) = (mesh.roughness(), params.roughness_limit) {
        if r > limit {
            log::warn!("{}: roughness {} exceeds limit {}", mesh.name(), r, limit);
            analysis.roughness_exceeded = true;
            analysis.rejections = rejections;
            return analysis;
        }
    }

    let seeds = match raster_sample(mesh, params.raster_spacing) {
        Ok(s) => s,
        Err(MeshError::EmptyRaster { .. }) => {
            analysis.empty_raster = true;
            analysis.rejections = rejections;
            return analysis;
        }
        Err(e) => unreachable!("raster sampling failed: {e}"),
    };
    let kept: Vec<(usize, SeedPoint<T>)> = seeds
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, s)| within_tilt(&s.normal, &params.approach_axis, params.max_tilt))
        .collect();
    *rejections.get_mut(&Rejection::PrefilterTilt).unwrap() = seeds.len() - kept.len();

    let results: Vec<(usize, Result<GrippingPoint<T>, Rejection>)> =
        kept.par_iter().map(|(i, seed)| (*i, evaluate_candidate(mesh, seed, params))).collect();

    let mut candidates = Vec::new();
    for (i, r) in results {
        match r {
            Ok(mut g) => {
                g.seed = i;
                candidates.push(g);
            }
            Err(reason) => *rejections.get_mut(&reason).unwrap() += 1,
        }
    }
    candidates.sort_by(|a, b| quality_key(b.quality).cmp(&quality_key(a.quality)).then(a.seed.cmp(&b.seed)));

    analysis.seed_count = seeds.len();
    analysis.examined = kept.len();
    analysis.candidates = candidates;
    analysis.rejections = rejections;
    analysis
}
