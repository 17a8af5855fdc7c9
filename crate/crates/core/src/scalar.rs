//! Scalar abstraction shared by every geometric routine in the crate.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real number type the geometry is generic over (`f32` or `f64`).
///
/// Besides the arithmetic supplied by [`RealField`], each implementation
/// carries the absolute slack used for boundary-inclusive comparisons. The
/// slack sits far below any physical cup dimension but above the rounding
/// noise that rigid transforms introduce into millimetre-scale coordinates.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + fmt::Debug + fmt::Display + Send + Sync
{
    /// Slack for length comparisons, in model units (mm).
    fn length_eps() -> Self;

    /// Slack for angle comparisons, in degrees.
    fn angle_eps() -> Self;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal not representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn to_degrees(self) -> Self {
        self * Self::lit(180.0) / Self::pi()
    }

    #[inline]
    fn to_radians(self) -> Self {
        self * Self::pi() / Self::lit(180.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn length_eps() -> Self {
        1e-9
    }
    #[inline]
    fn angle_eps() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn length_eps() -> Self {
        1e-4
    }
    #[inline]
    fn angle_eps() -> Self {
        1e-3
    }
}

/// Angle between two unit vectors in degrees, accurate near 0 and 180.
pub fn angle_between_deg<T: Scalar>(a: &nalgebra::Vector3<T>, b: &nalgebra::Vector3<T>) -> T {
    let cross = a.cross(b).norm();
    let dot = a.dot(b);
    cross.atan2(dot).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn angle_small_and_straight() {
        let z = Vector3::<f64>::z();
        assert_eq!(angle_between_deg(&z, &z), 0.0);
        assert!((angle_between_deg(&z, &-z) - 180.0).abs() < 1e-12);
        assert!((angle_between_deg(&z, &Vector3::x()) - 90.0).abs() < 1e-12);
        let tiny = Vector3::new(1e-10, 0.0, 1.0).normalize();
        assert!(angle_between_deg(&z, &tiny) > 0.0);
    }

    #[test]
    fn f32_literals() {
        assert_eq!(<f32 as Scalar>::lit(0.5), 0.5f32);
        assert!((<f32 as Scalar>::lit(90.0).to_radians() - std::f32::consts::FRAC_PI_2).abs() < 1e-6);
    }
}
