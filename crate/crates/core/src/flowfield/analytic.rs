use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FieldError, FlowField};
use crate::geom::{Rect, Vec2};
use crate::math;

/// The same velocity everywhere.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformField {
    pub workspace: Rect,
    pub velocity: Vec2,
}

impl UniformField {
    pub fn new(workspace: Rect, velocity: Vec2) -> Self {
        Self {
            workspace,
            velocity,
        }
    }
}

impl FlowField for UniformField {
    fn workspace(&self) -> Rect {
        self.workspace
    }

    fn sample(&self, _p: Vec2, _t: f64) -> Result<Vec2, FieldError> {
        Ok(self.velocity)
    }
}

/// Rigid rotation about `center` at `omega` rad/s (counter-clockwise positive).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolidBodyRotation {
    pub workspace: Rect,
    pub center: Vec2,
    pub omega: f64,
}

impl FlowField for SolidBodyRotation {
    fn workspace(&self) -> Rect {
        self.workspace
    }

    fn sample(&self, p: Vec2, _t: f64) -> Result<Vec2, FieldError> {
        Ok((p - self.center).perp() * self.omega)
    }
}

/// A scalar stream function with an analytic gradient.
pub trait StreamFunction: Send + Sync {
    fn psi(&self, p: Vec2) -> f64;
    fn gradient(&self, p: Vec2) -> Vec2;
}

/// Velocity `(dpsi/dy, -dpsi/dx)` of a stream function. Divergence-free by
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamField<S> {
    pub workspace: Rect,
    pub stream: S,
}

impl<S: StreamFunction> StreamField<S> {
    pub fn new(workspace: Rect, stream: S) -> Self {
        Self { workspace, stream }
    }
}

impl<S: StreamFunction> FlowField for StreamField<S> {
    fn workspace(&self) -> Rect {
        self.workspace
    }

    fn sample(&self, p: Vec2, _t: f64) -> Result<Vec2, FieldError> {
        let g = self.stream.gradient(p);
        Ok(Vec2::new(g.y, -g.x))
    }
}

/// One closed gyre filling the rectangle `domain`:
/// `psi = a * sin(pi (x - x0) / w) * sin(pi (y - y0) / h)`.
///
/// Velocity is tangential on the domain boundary, so drifters released inside
/// stay inside. Positive amplitude circulates clockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SingleGyre {
    pub domain: Rect,
    pub amplitude: f64,
}

impl SingleGyre {
    /// Gyre whose largest speed (reached mid-edge) equals `peak_speed`.
    pub fn with_peak_speed(domain: Rect, peak_speed: f64) -> Self {
        let l = domain.width().min(domain.height());
        Self {
            domain,
            amplitude: peak_speed * l / PI,
        }
    }

    pub fn peak_speed(&self) -> f64 {
        self.amplitude.abs() * PI / self.domain.width().min(self.domain.height())
    }
}

impl StreamFunction for SingleGyre {
    fn psi(&self, p: Vec2) -> f64 {
        let kx = PI / self.domain.width();
        let ky = PI / self.domain.height();
        let d = p - self.domain.min;
        self.amplitude * math::sin(kx * d.x) * math::sin(ky * d.y)
    }

    fn gradient(&self, p: Vec2) -> Vec2 {
        let kx = PI / self.domain.width();
        let ky = PI / self.domain.height();
        let d = p - self.domain.min;
        Vec2::new(
            self.amplitude * kx * math::cos(kx * d.x) * math::sin(ky * d.y),
            self.amplitude * ky * math::sin(kx * d.x) * math::cos(ky * d.y),
        )
    }
}

/// Sum of Gaussian eddies `a_k * exp(-|p - c_k|^2 / (2 r_k^2))`.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianEddies {
    pub eddies: Vec<Eddy>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Eddy {
    pub center: Vec2,
    pub radius: f64,
    pub strength: f64,
}

impl StreamFunction for GaussianEddies {
    fn psi(&self, p: Vec2) -> f64 {
        self.eddies
            .iter()
            .map(|e| {
                e.strength * math::exp(-(p - e.center).norm_sq() / (2.0 * e.radius * e.radius))
            })
            .sum()
    }

    fn gradient(&self, p: Vec2) -> Vec2 {
        self.eddies.iter().fold(Vec2::ZERO, |acc, e| {
            let d = p - e.center;
            let r2 = e.radius * e.radius;
            let g = e.strength * math::exp(-d.norm_sq() / (2.0 * r2));
            acc + d * (-g / r2)
        })
    }
}

/// Surface signature of Langmuir circulation: a steady along-wind drift plus
/// a periodic cross-wind component that piles floats onto convergence lines
/// spaced one wavelength apart.
///
/// With `s` the signed cross-wind coordinate (measured along the wind
/// direction rotated +90 degrees), the cross-wind velocity is
/// `-A sin(2 pi (s - x0) / lambda)`. Convergence lines sit at
/// `s - x0 = k lambda`. The field is compressible with divergence
/// `-(2 pi A / lambda) cos(2 pi (s - x0) / lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LangmuirField {
    pub workspace: Rect,
    pub along_wind_speed: f64,
    pub cross_amplitude: f64,
    pub wavelength: f64,
    pub phase: f64,
    pub wind_direction: f64,
}

impl LangmuirField {
    pub fn new(
        workspace: Rect,
        along_wind_speed: f64,
        cross_amplitude: f64,
        wavelength: f64,
        phase: f64,
        wind_direction: f64,
    ) -> Result<Self, FieldError> {
        if !(wavelength > 0.0) {
            return Err(FieldError::Invalid("Langmuir wavelength must be positive"));
        }
        if !(cross_amplitude >= 0.0) {
            return Err(FieldError::Invalid(
                "Langmuir cross amplitude must be non-negative",
            ));
        }
        Ok(Self {
            workspace,
            along_wind_speed,
            cross_amplitude,
            wavelength,
            phase,
            wind_direction,
        })
    }

    pub fn wind_unit(&self) -> Vec2 {
        Vec2::from_polar(1.0, self.wind_direction)
    }

    pub fn cross_unit(&self) -> Vec2 {
        self.wind_unit().perp()
    }

    /// Signed cross-wind coordinate of `p`.
    pub fn cross_coordinate(&self, p: Vec2) -> f64 {
        p.dot(self.cross_unit())
    }

    /// Largest divergence magnitude, `2 pi A / lambda`.
    pub fn peak_divergence(&self) -> f64 {
        2.0 * PI * self.cross_amplitude / self.wavelength
    }
}

impl FlowField for LangmuirField {
    fn workspace(&self) -> Rect {
        self.workspace
    }

    fn sample(&self, p: Vec2, _t: f64) -> Result<Vec2, FieldError> {
        let s = self.cross_coordinate(p);
        let cross =
            -self.cross_amplitude * math::sin(2.0 * PI * (s - self.phase) / self.wavelength);
        Ok(self.wind_unit() * self.along_wind_speed + self.cross_unit() * cross)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws() -> Rect {
        Rect::from_size(390.0, 390.0)
    }

    #[test]
    fn uniform_field_everywhere() {
        let f = UniformField::new(ws(), Vec2::new(0.1, 0.0));
        for (p, t) in [(Vec2::new(0.0, 0.0), 0.0), (Vec2::new(200.0, 17.0), 1e5)] {
            assert_eq!(f.velocity(p, t).unwrap(), Vec2::new(0.1, 0.0));
        }
        assert!(matches!(
            f.velocity(Vec2::new(-1.0, 0.0), 0.0),
            Err(FieldError::OutsideWorkspace { .. })
        ));
    }

    #[test]
    fn langmuir_cross_component_quarter_wavelength() {
        let f = LangmuirField::new(
            Rect::centered(Vec2::ZERO, 200.0, 200.0),
            0.0,
            0.05,
            50.0,
            0.0,
            0.0,
        )
        .unwrap();
        let v = f.velocity(Vec2::new(3.0, 12.5), 0.0).unwrap();
        assert!(v.x.abs() < 1e-15);
        assert!((v.y + 0.05).abs() < 1e-15);
    }

    #[test]
    fn langmuir_rejects_bad_parameters() {
        assert!(LangmuirField::new(ws(), 0.0, 0.05, 0.0, 0.0, 0.0).is_err());
        assert!(LangmuirField::new(ws(), 0.0, -0.01, 50.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn gyre_peak_speed_mid_edge() {
        let g = SingleGyre::with_peak_speed(ws(), 0.15);
        let f = StreamField::new(ws(), g);
        let v = f.velocity(Vec2::new(195.0, 0.0), 0.0).unwrap();
        assert!((v.norm() - 0.15).abs() < 1e-12);
        assert!((g.peak_speed() - 0.15).abs() < 1e-15);
        // tangential on the boundary
        assert!(v.y.abs() < 1e-15);
    }

    #[test]
    fn eddy_gradient_matches_finite_difference() {
        let e = GaussianEddies {
            eddies: alloc::vec![
                Eddy {
                    center: Vec2::new(100.0, 120.0),
                    radius: 60.0,
                    strength: 4.0
                },
                Eddy {
                    center: Vec2::new(250.0, 260.0),
                    radius: 90.0,
                    strength: -7.0
                },
            ],
        };
        let p = Vec2::new(170.0, 190.0);
        let h = 1e-4;
        let fd = Vec2::new(
            (e.psi(p + Vec2::new(h, 0.0)) - e.psi(p - Vec2::new(h, 0.0))) / (2.0 * h),
            (e.psi(p + Vec2::new(0.0, h)) - e.psi(p - Vec2::new(0.0, h))) / (2.0 * h),
        );
        assert!((fd - e.gradient(p)).norm() < 1e-9);
    }
}
