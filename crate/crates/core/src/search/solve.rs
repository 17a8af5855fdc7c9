use thiserror::Error;

use crate::mesh::{center_of_mass, TriangleMesh};
use crate::params::{AnalysisParams, ToleranceSpec};
use crate::patch::GrippingPoint;
use crate::pipeline::{analyze_workpiece, WorkpieceAnalysis};
use crate::scalar::Scalar;

use super::{match_constellation, Constellation, Constellations, MatchResult, MatchTarget};

/// First-workpiece constellations tried before giving up.
pub const DEFAULT_BUDGET: usize = 10_000;

/// Per-workpiece counts reported when a search fails.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkpieceSummary {
    pub name: String,
    pub seed_count: usize,
    pub candidate_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommonFailure<T: Scalar> {
    pub workpieces: Vec<WorkpieceSummary>,
    /// First-workpiece constellations tried.
    pub tried: usize,
    /// Most leading workpieces (counting the first) any constellation fit.
    pub best_prefix: usize,
    /// Matched constellations for that prefix, one per workpiece.
    pub best: Vec<Constellation<T>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SearchError<T: Scalar> {
    #[error("no valid constellation among {candidates} candidates ({examined} sets examined)")]
    NoConstellation { candidates: usize, examined: usize },
    #[error("no common constellation after {} tries; best prefix {} of {}", .0.tried, .0.best_prefix, .0.workpieces.len())]
    NoCommonConstellation(Box<CommonFailure<T>>),
}

/// A constellation that grips every workpiece.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonSolution<T: Scalar> {
    /// One per workpiece, arm `i` corresponding across all of them. The first
    /// is the canonical constellation found on the first workpiece.
    pub constellations: Vec<Constellation<T>>,
    /// Match against workpieces 2..n.
    pub matches: Vec<MatchResult<T>>,
    /// Candidate indices per workpiece.
    pub assignments: Vec<Vec<usize>>,
    /// Zero-based position of the winner among first-workpiece constellations.
    pub tried: usize,
}

/// Valid constellations on one workpiece, at most `limit`.
pub fn enumerate_constellations<T: Scalar>(
    mesh: &TriangleMesh<T>,
    candidates: &[GrippingPoint<T>],
    params: &AnalysisParams<T>,
    limit: usize,
) -> Result<Vec<Constellation<T>>, SearchError<T>> {
    let com = center_of_mass(mesh).center;
    let mut walk = Constellations::new(candidates, com, params.constraints(), params.cup_count);
    let out: Vec<Constellation<T>> = walk.by_ref().take(limit).map(|(_, c)| c).collect();
    if out.is_empty() {
        return Err(SearchError::NoConstellation { candidates: candidates.len(), examined: walk.examined });
    }
    Ok(out)
}

/// Analyzes every workpiece, then runs [`solve_analyzed`].
pub fn solve_common<T: Scalar>(
    workpieces: &[TriangleMesh<T>],
    params: &AnalysisParams<T>,
    tol: &ToleranceSpec<T>,
    budget: usize,
) -> Result<CommonSolution<T>, SearchError<T>> {
    let analyses: Vec<WorkpieceAnalysis<T>> = workpieces.iter().map(|m| analyze_workpiece(m, params)).collect();
    solve_analyzed(&analyses, tol, budget)
}

/// Tries constellations of the first workpiece in enumeration order and
/// carries each over to the others until one fits all of them.
pub fn solve_analyzed<T: Scalar>(
    analyses: &[WorkpieceAnalysis<T>],
    tol: &ToleranceSpec<T>,
    budget: usize,
) -> Result<CommonSolution<T>, SearchError<T>> {
    assert!(!analyses.is_empty(), "at least one workpiece is required");
    let summaries = || {
        analyses
            .iter()
            .map(|a| WorkpieceSummary {
                name: a.name.clone(),
                seed_count: a.seed_count,
                candidate_count: a.candidates.len(),
            })
            .collect::<Vec<_>>()
    };
    let mut failure = CommonFailure { workpieces: summaries(), tried: 0, best_prefix: 0, best: Vec::new() };
    let k = analyses[0].cup_count;
    if analyses.iter().any(|a| a.candidates.len() < k) {
        return Err(SearchError::NoCommonConstellation(Box::new(failure)));
    }

    for (tried, (indices, c)) in analyses[0].constellations().take(budget).enumerate() {
        failure.tried = tried + 1;
        let mut found = vec![c.clone()];
        let mut matches = Vec::new();
        let mut assignments = vec![indices];
        for target in &analyses[1..] {
            let m = match_constellation(
                &c,
                &MatchTarget { candidates: &target.candidates, com: target.com(), constraints: target.constraints },
                tol,
            );
            if !m.matched {
                break;
            }
            let pts = m.assigned_points(&target.candidates).expect("matched implies an assignment");
            match Constellation::from_correspondence(pts, target.com(), &target.constraints.gravity) {
                Ok(on_target) => found.push(on_target),
                Err(_) => break,
            }
            assignments.push(m.assignment.clone().unwrap());
            matches.push(m);
        }
        if found.len() > failure.best_prefix {
            failure.best_prefix = found.len();
            failure.best = found.clone();
        }
        if found.len() == analyses.len() {
            log::debug!("common constellation found after {} tries", tried + 1);
            return Ok(CommonSolution { constellations: found, matches, assignments, tried });
        }
    }
    Err(SearchError::NoCommonConstellation(Box::new(failure)))
}
