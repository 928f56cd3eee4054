use alloc::vec::Vec;

use super::{FieldError, FlowField};
use crate::geom::{point_polyline_distance, Vec2};
use crate::math;

/// Default integration step in seconds.
pub const DEFAULT_DT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub t: f64,
    pub pos: Vec2,
}

/// Time-ordered positions of an advected particle.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
    /// Set when integration stopped early because the particle left the
    /// workspace.
    pub truncated: bool,
}

impl Trajectory {
    pub fn start(&self) -> Sample {
        self.samples[0]
    }

    pub fn end(&self) -> Sample {
        *self.samples.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        self.end().t - self.start().t
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.samples.iter().map(|s| s.pos).collect()
    }

    /// Linear interpolation in time, clamped to the end points.
    pub fn position_at(&self, t: f64) -> Vec2 {
        position_at(&self.samples, t)
    }

    /// Positions from time `t` onwards, starting with the interpolated
    /// position at `t`.
    pub fn remaining_path(&self, t: f64) -> Vec<Vec2> {
        let mut out = Vec::new();
        out.push(self.position_at(t));
        out.extend(self.samples.iter().filter(|s| s.t > t).map(|s| s.pos));
        out
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        point_polyline_distance(p, &self.positions())
    }

    /// Same path with every time shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Trajectory {
        Trajectory {
            dt: self.dt,
            samples: self
                .samples
                .iter()
                .map(|s| Sample {
                    t: s.t + offset,
                    pos: s.pos,
                })
                .collect(),
            truncated: self.truncated,
        }
    }
}

/// Linear interpolation over time-ordered samples, clamped at both ends.
pub fn position_at(samples: &[Sample], t: f64) -> Vec2 {
    let k = samples.partition_point(|s| s.t <= t);
    if k == 0 {
        return samples[0].pos;
    }
    if k == samples.len() {
        return samples[k - 1].pos;
    }
    let (a, b) = (samples[k - 1], samples[k]);
    let span = b.t - a.t;
    if span <= 0.0 {
        return b.pos;
    }
    a.pos.lerp(b.pos, (t - a.t) / span)
}

fn just_before(b: f64) -> f64 {
    b - b.abs().max(1.0) * 1e-12
}

fn rk4<F: FlowField + ?Sized>(
    field: &F,
    p: Vec2,
    t: f64,
    h: f64,
    extra: Vec2,
    limit: Option<f64>,
) -> Result<Vec2, FieldError> {
    let at = |s: f64| match limit {
        Some(b) if s >= b => just_before(b),
        _ => s,
    };
    let k1 = field.velocity(p, at(t))? + extra;
    let k2 = field.velocity(p + k1 * (h / 2.0), at(t + h / 2.0))? + extra;
    let k3 = field.velocity(p + k2 * (h / 2.0), at(t + h / 2.0))? + extra;
    let k4 = field.velocity(p + k3 * h, at(t + h))? + extra;
    Ok(p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// One classic RK4 step of length `h` with an extra velocity held constant
/// over the step.
///
/// Steps that straddle a breakpoint of the field are split there so no
/// stage mixes two intervals.
pub fn advect<F: FlowField + ?Sized>(
    field: &F,
    p: Vec2,
    t: f64,
    h: f64,
    extra: Vec2,
) -> Result<Vec2, FieldError> {
    let end = t + h;
    let mut pos = p;
    let mut now = t;
    while now < end {
        match field.next_breakpoint(now) {
            Some(b) if b < end => {
                pos = rk4(field, pos, now, b - now, extra, Some(b))?;
                now = b;
            }
            Some(b) if b == end => {
                pos = rk4(field, pos, now, end - now, extra, Some(b))?;
                now = end;
            }
            _ => {
                pos = rk4(field, pos, now, end - now, extra, None)?;
                now = end;
            }
        }
    }
    let ws = field.workspace();
    if !ws.contains(pos) {
        return Err(FieldError::OutsideWorkspace { x: pos.x, y: pos.y });
    }
    Ok(pos)
}

/// Advects `start` from `t0` for `duration` seconds with fixed-step RK4.
///
/// The last step is shortened so the trajectory ends exactly at
/// `t0 + duration`. If the particle leaves the workspace the trajectory is
/// cut at the last inside sample and flagged as truncated.
pub fn integrate_trajectory<F: FlowField + ?Sized>(
    field: &F,
    start: Vec2,
    t0: f64,
    duration: f64,
    dt: f64,
) -> Result<Trajectory, FieldError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(FieldError::Invalid("integration step must be positive"));
    }
    if !(duration >= dt) {
        return Err(FieldError::Invalid("duration must be at least one step"));
    }
    field.velocity(start, t0)?;
    let steps = math::ceil(duration / dt - 1e-9) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(Sample { t: t0, pos: start });
    let mut pos = start;
    let mut truncated = false;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let t_next = if k + 1 == steps {
            t0 + duration
        } else {
            t0 + (k + 1) as f64 * dt
        };
        match advect(field, pos, t, t_next - t, Vec2::ZERO) {
            Ok(next) => {
                pos = next;
                samples.push(Sample { t: t_next, pos });
            }
            Err(FieldError::OutsideWorkspace { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Trajectory {
        dt,
        samples,
        truncated,
    })
}
