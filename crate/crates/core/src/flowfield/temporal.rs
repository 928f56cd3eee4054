use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{FieldError, FlowField};
use crate::geom::{Rect, Vec2};

/// A sequence of fields, each valid over `[breakpoints[k], breakpoints[k+1])`.
///
/// `breakpoints` has one more entry than `fields`. The last entry may be
/// `f64::INFINITY`.
pub struct PiecewiseConstantField {
    breakpoints: Vec<f64>,
    fields: Vec<Box<dyn FlowField>>,
}

impl PiecewiseConstantField {
    pub fn new(breakpoints: Vec<f64>, fields: Vec<Box<dyn FlowField>>) -> Result<Self, FieldError> {
        if fields.is_empty() || breakpoints.len() != fields.len() + 1 {
            return Err(FieldError::Invalid("need one more breakpoint than fields"));
        }
        if breakpoints.iter().any(|t| t.is_nan()) || breakpoints.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(FieldError::Invalid(
                "breakpoints must be strictly increasing",
            ));
        }
        let ws = fields[0].workspace();
        if fields.iter().any(|f| f.workspace() != ws) {
            return Err(FieldError::Invalid(
                "all intervals must share one workspace",
            ));
        }
        Ok(Self {
            breakpoints,
            fields,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Index of the interval holding `t`.
    pub fn interval_of(&self, t: f64) -> Option<usize> {
        let (t0, t1) = self.time_span();
        if !(t >= t0 && t < t1) {
            return None;
        }
        // first breakpoint strictly greater than t, minus one
        Some(self.breakpoints.partition_point(|&b| b <= t) - 1)
    }

    pub fn field(&self, k: usize) -> &dyn FlowField {
        self.fields[k].as_ref()
    }
}

impl FlowField for PiecewiseConstantField {
    fn workspace(&self) -> Rect {
        self.fields[0].workspace()
    }

    fn sample(&self, p: Vec2, t: f64) -> Result<Vec2, FieldError> {
        let k = self
            .interval_of(t)
            .ok_or(FieldError::OutsideTimeSpan { t })?;
        self.fields[k].sample(p, t)
    }

    fn time_span(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    fn next_breakpoint(&self, after: f64) -> Option<f64> {
        let inner = &self.breakpoints[1..self.breakpoints.len() - 1];
        let own = inner.iter().copied().find(|&b| b > after);
        let nested = self
            .interval_of(after)
            .and_then(|k| self.fields[k].next_breakpoint(after));
        match (own, nested) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Wraps a field and turns its velocity vectors at a constant angular rate:
/// at time `t` every vector is rotated by `angle0 + rate * (t - t_ref)`.
///
/// Positions are not rotated, only the current direction veers.
#[derive(Clone, Debug)]
pub struct RotatingField<F> {
    pub base: F,
    pub angle0: f64,
    pub rate: f64,
    pub t_ref: f64,
}

impl<F: FlowField> RotatingField<F> {
    /// `rate_deg_per_hour` positive turns the current counter-clockwise.
    pub fn from_degrees_per_hour(base: F, rate_deg_per_hour: f64) -> Self {
        Self {
            base,
            angle0: 0.0,
            rate: rate_deg_per_hour.to_radians() / 3600.0,
            t_ref: 0.0,
        }
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.angle0 + self.rate * (t - self.t_ref)
    }
}

impl<F: FlowField> FlowField for RotatingField<F> {
    fn workspace(&self) -> Rect {
        self.base.workspace()
    }

    fn sample(&self, p: Vec2, t: f64) -> Result<Vec2, FieldError> {
        Ok(self.base.sample(p, t)?.rotated(self.angle_at(t)))
    }

    fn time_span(&self) -> (f64, f64) {
        self.base.time_span()
    }

    fn next_breakpoint(&self, after: f64) -> Option<f64> {
        self.base.next_breakpoint(after)
    }
}
