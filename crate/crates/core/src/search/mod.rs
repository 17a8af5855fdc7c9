//! Constellations on one workpiece and the search for one that fits a
//! whole family of workpieces.

mod constellation;
mod enumerate;
mod matching;
mod solve;

pub use constellation::{Constellation, GripperFrame, Polar};
pub use enumerate::Constellations;
pub use matching::{match_constellation, MatchResult, MatchTarget, Residual, MAX_CANDIDATES_PER_POINT};
pub use solve::{
    enumerate_constellations, solve_analyzed, solve_common, CommonFailure, CommonSolution, SearchError,
    WorkpieceSummary, DEFAULT_BUDGET,
};
