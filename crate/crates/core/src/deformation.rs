//! Prescribed analytic deformations used by the experiments.

use nalgebra::Matrix3;

use crate::error::{MeshError, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticDeformation {
    Identity,
    /// f(x, y, z) = (x², y², z).
    SquareQuadratic,
    /// g = (r cos θ + sin z, 1.5 r sin θ, z) in cylindrical coordinates,
    /// which is (x + sin z, 1.5 y, z) in Cartesian ones.
    CylinderSinusoidal,
    /// x(t) = x₀ + (t / t_end)(f(x₀) − x₀), sampled at `time`.
    TimeInterpolatedQuadratic { time: f64, t_end: f64 },
}

impl AnalyticDeformation {
    /// Snapshot of the time-interpolated deformation, rejecting times
    /// outside `[0, t_end]`.
    pub fn time_interpolated(time: f64, t_end: f64) -> Result<Self> {
        if t_end.is_nan() || t_end <= 0.0 || !(0.0..=t_end).contains(&time) {
            return Err(MeshError::Argument(format!(
                "time {time} outside [0, {t_end}]"
            )));
        }
        Ok(AnalyticDeformation::TimeInterpolatedQuadratic { time, t_end })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticDeformation::Identity => "identity",
            AnalyticDeformation::SquareQuadratic => "square-quadratic",
            AnalyticDeformation::CylinderSinusoidal => "cylinder-sinusoidal",
            AnalyticDeformation::TimeInterpolatedQuadratic { .. } => "time-interpolated-quadratic",
        }
    }

    pub fn evaluate(&self, p: &Vec3) -> Vec3 {
        match *self {
            AnalyticDeformation::Identity => *p,
            AnalyticDeformation::SquareQuadratic => Vec3::new(p.x * p.x, p.y * p.y, p.z),
            AnalyticDeformation::CylinderSinusoidal => Vec3::new(p.x + p.z.sin(), 1.5 * p.y, p.z),
            AnalyticDeformation::TimeInterpolatedQuadratic { time, t_end } => {
                let s = time / t_end;
                let f = Vec3::new(p.x * p.x, p.y * p.y, p.z);
                p + (f - p) * s
            }
        }
    }

    pub fn jacobian(&self, p: &Vec3) -> Matrix3<f64> {
        match *self {
            AnalyticDeformation::Identity => Matrix3::identity(),
            AnalyticDeformation::SquareQuadratic => Matrix3::from_diagonal(&Vec3::new(2.0 * p.x, 2.0 * p.y, 1.0)),
            AnalyticDeformation::CylinderSinusoidal => {
                let mut j = Matrix3::from_diagonal(&Vec3::new(1.0, 1.5, 1.0));
                j[(0, 2)] = p.z.cos();
                j
            }
            AnalyticDeformation::TimeInterpolatedQuadratic { time, t_end } => {
                let s = time / t_end;
                Matrix3::from_diagonal(&Vec3::new(
                    1.0 + s * (2.0 * p.x - 1.0),
                    1.0 + s * (2.0 * p.y - 1.0),
                    1.0,
                ))
            }
        }
    }
}
