//! Surface current fields and the operations that consume them.
//!
//! Every field answers [`FlowField::velocity`] for a position in its
//! workspace and a time. Static fields ignore the time argument; the
//! [`PiecewiseConstantField`] and [`RotatingField`] wrappers make a field
//! drift over a mission.

mod analytic;
mod diagnostics;
mod grid;
mod integrate;
mod temporal;

use alloc::boxed::Box;
use alloc::sync::Arc;

use thiserror::Error;

use crate::geom::{Rect, Vec2};

pub use analytic::{
    Eddy, GaussianEddies, LangmuirField, SingleGyre, SolidBodyRotation, StreamField,
    StreamFunction, UniformField,
};
pub use diagnostics::{
    divergence_at, incompressibility_report, DivergenceSample, IncompressibilityReport,
    DEFAULT_STENCIL,
};
pub use grid::GridField;
pub use integrate::{advect, integrate_trajectory, position_at, Sample, Trajectory, DEFAULT_DT};
pub use temporal::{PiecewiseConstantField, RotatingField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("query ({x:.3}, {y:.3}) m lies outside the workspace")]
    OutsideWorkspace { x: f64, y: f64 },
    #[error("query time {t} s lies outside the field's time span")]
    OutsideTimeSpan { t: f64 },
    #[error("finite-difference stencil of {h} m leaves the workspace")]
    StencilOutside { h: f64 },
    #[error("invalid field parameter: {0}")]
    Invalid(&'static str),
}

/// A queryable 2D velocity field over a bounded workspace.
pub trait FlowField: Send + Sync {
    /// Bounding rectangle in meters. Queries outside are errors.
    fn workspace(&self) -> Rect;

    /// Velocity at `p` (m/s) without the workspace check.
    ///
    /// Implementations may still reject times outside [`FlowField::time_span`].
    fn sample(&self, p: Vec2, t: f64) -> Result<Vec2, FieldError>;

    /// Times (s) for which the field is defined, as a half-open span.
    fn time_span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    /// First time strictly after `after` where the field jumps.
    ///
    /// The integrator splits steps there so that every RK stage sees one
    /// interval's field.
    fn next_breakpoint(&self, _after: f64) -> Option<f64> {
        None
    }

    /// Checked velocity query.
    fn velocity(&self, p: Vec2, t: f64) -> Result<Vec2, FieldError> {
        if !p.is_finite() || !self.workspace().contains(p) {
            return Err(FieldError::OutsideWorkspace { x: p.x, y: p.y });
        }
        let (t0, t1) = self.time_span();
        if !(t >= t0 && t < t1) {
            return Err(FieldError::OutsideTimeSpan { t });
        }
        self.sample(p, t)
    }
}

/// Free-function form of [`FlowField::velocity`].
#[inline]
pub fn velocity_at<F: FlowField + ?Sized>(field: &F, p: Vec2, t: f64) -> Result<Vec2, FieldError> {
    field.velocity(p, t)
}

macro_rules! forward_flow_field {
    ($($ptr:ty),*) => {$(
        impl<F: FlowField + ?Sized> FlowField for $ptr {
            fn workspace(&self) -> Rect {
                (**self).workspace()
            }
            fn sample(&self, p: Vec2, t: f64) -> Result<Vec2, FieldError> {
                (**self).sample(p, t)
            }
            fn time_span(&self) -> (f64, f64) {
                (**self).time_span()
            }
            fn next_breakpoint(&self, after: f64) -> Option<f64> {
                (**self).next_breakpoint(after)
            }
            fn velocity(&self, p: Vec2, t: f64) -> Result<Vec2, FieldError> {
                (**self).velocity(p, t)
            }
        }
    )*};
}

forward_flow_field!(&F, Box<F>, Arc<F>);
