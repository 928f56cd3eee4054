use alloc::vec::Vec;

use super::{DrifterTrack, EstimatorError, Measurement};
use crate::math;

/// Default spacing between velocity measurements (s).
pub const DEFAULT_SUBSAMPLE: f64 = 30.0;

/// Turns a (usually smoothed) track into point velocity measurements.
///
/// Each measurement is a central difference over a window of
/// `subsample_interval` seconds, located at the window's middle fix.
/// Windows are laid end to end; a window containing any fix that was not
/// received, or a missing stretch of time, is skipped and the scan slides
/// forward one fix at a time until a clean window starts.
pub fn track_to_measurements(
    track: &DrifterTrack,
    subsample_interval: f64,
) -> Result<Vec<Measurement>, EstimatorError> {
    track.validate()?;
    let native = track
        .native_interval()
        .ok_or_else(|| EstimatorError::TrackTooShort {
            id: track.id.clone(),
        })?;
    if subsample_interval < native * (1.0 - 1e-9) {
        return Err(EstimatorError::IntervalTooShort {
            interval: subsample_interval,
            native,
        });
    }
    let fixes = &track.fixes;
    let span = fixes.last().unwrap().time - fixes[0].time;
    if span < subsample_interval * (1.0 - 1e-9) {
        return Err(EstimatorError::TrackTooShort {
            id: track.id.clone(),
        });
    }
    let m = (math::round(subsample_interval / native) as usize).max(1);
    let usable = |k: usize| fixes[k].received && !fixes[k].interpolated;

    let mut out = Vec::new();
    let mut a = 0;
    while a + m < fixes.len() {
        let b = a + m;
        let dt = fixes[b].time - fixes[a].time;
        let clean = (a..=b).all(usable) && dt <= 1.5 * subsample_interval;
        if !clean {
            a += 1;
            continue;
        }
        let velocity = (fixes[b].position - fixes[a].position) / dt;
        let (position, time) = if m.is_multiple_of(2) {
            let c = &fixes[a + m / 2];
            (c.position, c.time)
        } else {
            let (c0, c1) = (&fixes[a + m / 2], &fixes[a + m / 2 + 1]);
            ((c0.position + c1.position) * 0.5, 0.5 * (c0.time + c1.time))
        };
        let sigma = 0.5 * (fixes[a].noise_std + fixes[b].noise_std);
        out.push(Measurement {
            position,
            velocity,
            time,
            velocity_noise_std: core::f64::consts::SQRT_2 * sigma / dt,
        });
        a = b;
    }
    Ok(out)
}
