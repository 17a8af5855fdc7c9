//! Input parameters: per-cup surface conditions and cross-workpiece tolerances.

use nalgebra::Vector3;
use thiserror::Error;

use crate::constraints::ConstellationConstraints;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("`{0}` must be non-negative")]
    Negative(&'static str),
    #[error("`{0}` must be positive")]
    NotPositive(&'static str),
    #[error("cup_count must be at least 3, got {0}")]
    TooFewCups(usize),
    #[error("approach axis must be a non-zero vector")]
    ZeroApproach,
    #[error("`{0}` must lie in [0, 180] degrees")]
    AngleRange(&'static str),
}

/// Everything the per-workpiece search needs. Lengths in mm, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisParams<T: Scalar> {
    pub cup_diameter: T,
    pub cup_count: usize,
    pub min_spacing: T,
    /// Allowed axial deviation from the tangent plane under the cup.
    pub flatness_tol: T,
    /// Growth of the allowed deviation per mm of radius (cone envelope).
    pub cone_slope: T,
    /// Largest angle between any normal under the cup and the center normal.
    pub max_curvature_angle: T,
    /// Largest angle between a seed normal and the approach axis.
    pub max_tilt: T,
    /// Unit direction the surface normals must face (opposite to gravity).
    pub approach_axis: Vector3<T>,
    pub min_line_offset: T,
    pub stability_margin: T,
    pub raster_spacing: T,
    /// Upper bound for a workpiece's roughness attribute, when it has one.
    pub roughness_limit: Option<T>,
    /// Accept cup footprints that run over a surface boundary.
    pub allow_boundary: bool,
}

impl<T: Scalar> Default for AnalysisParams<T> {
    fn default() -> Self {
        let cup = T::lit(20.0);
        Self {
            cup_diameter: cup,
            cup_count: 3,
            min_spacing: T::lit(30.0),
            flatness_tol: T::lit(0.5),
            cone_slope: T::zero(),
            max_curvature_angle: T::lit(10.0),
            max_tilt: T::lit(30.0),
            approach_axis: Vector3::z(),
            min_line_offset: T::lit(5.0),
            stability_margin: T::lit(5.0),
            raster_spacing: cup / T::lit(4.0),
            roughness_limit: None,
            allow_boundary: false,
        }
    }
}

impl<T: Scalar> AnalysisParams<T> {
    /// Default parameters for a given cup diameter (raster pitch = diameter / 4).
    pub fn for_cup(cup_diameter: T) -> Self {
        Self { cup_diameter, raster_spacing: cup_diameter / T::lit(4.0), ..Self::default() }
    }

    pub fn cup_radius(&self) -> T {
        self.cup_diameter * T::lit(0.5)
    }

    /// Checks ranges and normalizes the approach axis.
    pub fn validated(mut self) -> Result<Self, ParamError> {
        let non_negative = [
            ("min_spacing", self.min_spacing),
            ("flatness_tol", self.flatness_tol),
            ("cone_slope", self.cone_slope),
            ("min_line_offset", self.min_line_offset),
            ("stability_margin", self.stability_margin),
        ];
        for (name, v) in non_negative {
            if v < T::zero() {
                return Err(ParamError::Negative(name));
            }
        }
        if let Some(r) = self.roughness_limit {
            if r < T::zero() {
                return Err(ParamError::Negative("roughness_limit"));
            }
        }
        for (name, v) in [("cup_diameter", self.cup_diameter), ("raster_spacing", self.raster_spacing)] {
            if v <= T::zero() {
                return Err(ParamError::NotPositive(name));
            }
        }
        for (name, v) in [("max_curvature_angle", self.max_curvature_angle), ("max_tilt", self.max_tilt)] {
            if v < T::zero() || v > T::lit(180.0) {
                return Err(ParamError::AngleRange(name));
            }
        }
        if self.cup_count < 3 {
            return Err(ParamError::TooFewCups(self.cup_count));
        }
        let norm = self.approach_axis.norm();
        if norm <= T::length_eps() {
            return Err(ParamError::ZeroApproach);
        }
        self.approach_axis /= norm;
        Ok(self)
    }

    /// Constellation rules derived from these parameters. Gravity acts
    /// against the approach axis.
    pub fn constraints(&self) -> ConstellationConstraints<T> {
        ConstellationConstraints {
            min_spacing: self.min_spacing,
            min_line_offset: self.min_line_offset,
            stability_margin: self.stability_margin,
            gravity: -self.approach_axis,
        }
    }
}

/// Allowed deviations when one constellation is carried over to another
/// workpiece, measured in the constellation's gripper frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec<T: Scalar> {
    /// In-plane (perpendicular to the frame z-axis) position deviation, mm.
    pub pos_transverse_tol: T,
    /// Position deviation along the frame z-axis, mm.
    pub pos_height_tol: T,
    /// Angle between corresponding surface normals, degrees.
    pub normal_tilt_tol: T,
    /// Difference in patch normal spread, degrees.
    pub curvature_tol: T,
}

impl<T: Scalar> Default for ToleranceSpec<T> {
    fn default() -> Self {
        Self {
            pos_transverse_tol: T::lit(2.0),
            pos_height_tol: T::lit(1.0),
            normal_tilt_tol: T::lit(5.0),
            curvature_tol: T::lit(5.0),
        }
    }
}

impl<T: Scalar> ToleranceSpec<T> {
    pub fn zero() -> Self {
        Self {
            pos_transverse_tol: T::zero(),
            pos_height_tol: T::zero(),
            normal_tilt_tol: T::zero(),
            curvature_tol: T::zero(),
        }
    }

    pub fn validated(self) -> Result<Self, ParamError> {
        let fields = [
            ("pos_transverse_tol", self.pos_transverse_tol),
            ("pos_height_tol", self.pos_height_tol),
            ("normal_tilt_tol", self.normal_tilt_tol),
            ("curvature_tol", self.curvature_tol),
        ];
        for (name, v) in fields {
            if v < T::zero() {
                return Err(ParamError::Negative(name));
            }
        }
        Ok(self)
    }
}
