use alloc::vec::Vec;

use super::{FieldError, FlowField};
use crate::geom::{Rect, Vec2};
use crate::math;

/// Default finite-difference step (m), matching the 1 m field resolution.
pub const DEFAULT_STENCIL: f64 = 1.0;

/// Central-difference divergence `du/dx + dv/dy` (1/s) with step `h`.
pub fn divergence_at<F: FlowField + ?Sized>(
    field: &F,
    p: Vec2,
    t: f64,
    h: f64,
) -> Result<f64, FieldError> {
    if !(h > 0.0) {
        return Err(FieldError::Invalid("stencil step must be positive"));
    }
    let ws = field.workspace();
    let inner = ws.shrink(h).ok_or(FieldError::StencilOutside { h })?;
    if !inner.contains(p) {
        return Err(FieldError::StencilOutside { h });
    }
    let ex = Vec2::new(h, 0.0);
    let ey = Vec2::new(0.0, h);
    let du = field.velocity(p + ex, t)?.x - field.velocity(p - ex, t)?.x;
    let dv = field.velocity(p + ey, t)?.y - field.velocity(p - ey, t)?.y;
    Ok((du + dv) / (2.0 * h))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DivergenceSample {
    pub pos: Vec2,
    pub divergence: f64,
}

/// Divergence sampled on a regular grid.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IncompressibilityReport {
    pub tolerance: f64,
    pub samples: usize,
    pub max_abs_divergence: f64,
    pub max_location: Vec2,
    /// Grid points where `|div| > tolerance`.
    pub violations: Vec<DivergenceSample>,
}

impl IncompressibilityReport {
    pub fn is_incompressible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples divergence every `grid_step` meters over `region` at time `t`.
///
/// Grid points closer than [`DEFAULT_STENCIL`] to the workspace edge are
/// skipped so the stencil stays inside.
pub fn incompressibility_report<F: FlowField + ?Sized>(
    field: &F,
    region: &Rect,
    grid_step: f64,
    t: f64,
    tol: f64,
) -> Result<IncompressibilityReport, FieldError> {
    if !(grid_step > 0.0) {
        return Err(FieldError::Invalid("grid step must be positive"));
    }
    let ws = field.workspace();
    if !ws.contains_rect(region) {
        return Err(FieldError::Invalid("region must lie inside the workspace"));
    }
    let h = DEFAULT_STENCIL;
    let inner = ws.shrink(h).ok_or(FieldError::StencilOutside { h })?;
    let nx = math::floor(region.width() / grid_step + 1e-9) as usize + 1;
    let ny = math::floor(region.height() / grid_step + 1e-9) as usize + 1;
    let mut report = IncompressibilityReport {
        tolerance: tol,
        samples: 0,
        max_abs_divergence: 0.0,
        max_location: region.center(),
        violations: Vec::new(),
    };
    for j in 0..ny {
        for i in 0..nx {
            let p = region.min + Vec2::new(i as f64 * grid_step, j as f64 * grid_step);
            if !inner.contains(p) {
                continue;
            }
            let d = divergence_at(field, p, t, h)?;
            report.samples += 1;
            if d.abs() > report.max_abs_divergence {
                report.max_abs_divergence = d.abs();
                report.max_location = p;
            }
            if d.abs() > tol {
                report.violations.push(DivergenceSample {
                    pos: p,
                    divergence: d,
                });
            }
        }
    }
    Ok(report)
}
