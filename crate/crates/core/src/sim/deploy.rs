use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::SimError;
use crate::estimator::{DrifterTrack, RawFix};
use crate::flowfield::{integrate_trajectory, FlowField, Trajectory};
use crate::geom::Vec2;
use crate::math;

/// Corners of an equilateral triangle with the given centroid and side
/// length, the first one due north of the centroid.
pub fn triangle_formation(center: Vec2, side: f64) -> [Vec2; 3] {
    let r = side / math::sqrt(3.0);
    let up = core::f64::consts::FRAC_PI_2;
    let third = 2.0 * core::f64::consts::PI / 3.0;
    [0.0, 1.0, 2.0].map(|k| center + Vec2::from_polar(r, up + k * third))
}

/// Drifter release for field estimation.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Deployment {
    pub starts: Vec<Vec2>,
    pub t0: f64,
    pub duration: f64,
    pub fix_interval: f64,
    /// Per-axis GPS noise (m).
    pub gps_noise: f64,
    /// Fixes broadcast from farther than `range` (m) of `receiver` are lost.
    pub receiver: Option<(Vec2, f64)>,
}

impl Deployment {
    pub fn new(starts: Vec<Vec2>, duration: f64) -> Self {
        Self {
            starts,
            t0: 0.0,
            duration,
            fix_interval: 1.0,
            gps_noise: 3.0,
            receiver: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticTracks {
    /// Noisy GPS tracks named `d0`, `d1`, ...
    pub tracks: Vec<DrifterTrack>,
    /// Noise-free positions at the fix times.
    pub truth: Vec<Trajectory>,
}

/// Drifts each deployed drifter through `truth` and records noisy fixes.
///
/// A drifter that leaves the workspace stops reporting there.
pub fn synthesize_tracks<F: FlowField + ?Sized>(
    truth: &F,
    deployment: &Deployment,
    seed: u64,
) -> Result<SyntheticTracks, SimError> {
    let d = deployment;
    if d.starts.is_empty() || !(d.duration > 0.0) || !(d.fix_interval > 0.0) || !(d.gps_noise > 0.0)
    {
        return Err(SimError::Invalid(
            "deployment needs drifters, a positive duration, fix interval and GPS noise",
        ));
    }
    let noise = Normal::new(0.0, d.gps_noise).map_err(|_| SimError::Invalid("bad GPS noise"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracks = Vec::new();
    let mut paths = Vec::new();
    for (i, &start) in d.starts.iter().enumerate() {
        let traj = integrate_trajectory(truth, start, d.t0, d.duration, d.fix_interval)?;
        let fixes = traj
            .samples
            .iter()
            .map(|s| {
                let jitter = Vec2::new(noise.sample(&mut rng), noise.sample(&mut rng));
                let heard = d
                    .receiver
                    .is_none_or(|(at, range)| s.pos.distance(at) <= range);
                if heard {
                    RawFix::received(s.t, s.pos + jitter, d.gps_noise)
                } else {
                    RawFix::dropped(s.t, d.gps_noise)
                }
            })
            .collect();
        tracks.push(
            DrifterTrack::new(format!("d{i}"), fixes)
                .map_err(|e| SimError::Inconsistent(format!("{e}")))?,
        );
        paths.push(traj);
    }
    Ok(SyntheticTracks {
        tracks,
        truth: paths,
    })
}
