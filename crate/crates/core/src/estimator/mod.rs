//! Dense current estimation from sparse drifter fixes.
//!
//! The pipeline is: [`kalman_smooth`] each track, extract point velocity
//! [`Measurement`]s with [`track_to_measurements`], pick [`Hyperparams`] with
//! [`grid_search`], then [`fit_divergence_free_gp`].
//!
//! The regression uses a matrix-valued kernel obtained by taking the curl of a
//! squared-exponential stream-function kernel twice, so every posterior mean
//! is exactly divergence-free as a function of position.

mod gp;
mod kalman;
mod measure;
mod search;

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::flowfield::FieldError;
use crate::geom::Vec2;

pub use gp::{fit_divergence_free_gp, kernel_block, EstimatedField, ScalarRaster, JITTER};
pub use kalman::{kalman_smooth, DEFAULT_MEAS_NOISE, DEFAULT_PROCESS_NOISE};
pub use measure::{track_to_measurements, DEFAULT_SUBSAMPLE};
pub use search::{
    default_grid, estimate_field, grid_search, select_best, trajectory_prediction_error,
    EstimationOptions, EstimationOutcome, GridPointScore, GridSearchOutcome,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("track {id} has {count} received fixes, need at least 2")]
    TooFewFixes { id: String, count: usize },
    #[error("track {id}: fix times must be strictly increasing")]
    NonMonotonicTime { id: String },
    #[error("track {id}: fix noise std must be positive")]
    BadNoise { id: String },
    #[error("subsample interval {interval} s is shorter than the native fix interval {native} s")]
    IntervalTooShort { interval: f64, native: f64 },
    #[error("track {id} spans less than one subsample interval")]
    TrackTooShort { id: String },
    #[error("no measurements to fit")]
    NoMeasurements,
    #[error("hyperparameters must be strictly positive")]
    InvalidHyperparams,
    #[error("kernel matrix is numerically singular at pivot {index} (length scale too large or duplicate inputs)")]
    KernelSingular { index: usize },
    #[error("grid search needs at least 2 tracks, got {0}")]
    TooFewTracks(usize),
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("holdout track {0} not found")]
    HoldoutMissing(String),
    #[error("every grid point failed to fit; first failure: {0}")]
    AllGridPointsFailed(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One GPS position fix.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawFix {
    pub time: f64,
    pub position: Vec2,
    pub noise_std: f64,
    /// False when the broadcast was lost; `position` is then meaningless
    /// until a smoother fills it in.
    pub received: bool,
    /// Set by the smoother on fixes it bridged by prediction.
    pub interpolated: bool,
}

impl RawFix {
    pub fn received(time: f64, position: Vec2, noise_std: f64) -> Self {
        Self {
            time,
            position,
            noise_std,
            received: true,
            interpolated: false,
        }
    }

    pub fn dropped(time: f64, noise_std: f64) -> Self {
        Self {
            time,
            position: Vec2::ZERO,
            noise_std,
            received: false,
            interpolated: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DrifterTrack {
    pub id: String,
    pub fixes: Vec<RawFix>,
}

impl DrifterTrack {
    pub fn new(id: impl Into<String>, fixes: Vec<RawFix>) -> Result<Self, EstimatorError> {
        let t = Self {
            id: id.into(),
            fixes,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.fixes.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(EstimatorError::NonMonotonicTime {
                id: self.id.clone(),
            });
        }
        if self.fixes.iter().any(|f| !(f.noise_std > 0.0)) {
            return Err(EstimatorError::BadNoise {
                id: self.id.clone(),
            });
        }
        Ok(())
    }

    pub fn received(&self) -> impl Iterator<Item = &RawFix> {
        self.fixes.iter().filter(|f| f.received)
    }

    pub fn received_count(&self) -> usize {
        self.received().count()
    }

    /// Median spacing between consecutive fixes.
    pub fn native_interval(&self) -> Option<f64> {
        let mut d: Vec<f64> = self
            .fixes
            .windows(2)
            .map(|w| w[1].time - w[0].time)
            .collect();
        if d.is_empty() {
            return None;
        }
        d.sort_by(f64::total_cmp);
        Some(d[d.len() / 2])
    }
}

/// Point velocity observation derived from two fixes.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Measurement {
    pub position: Vec2,
    pub velocity: Vec2,
    pub time: f64,
    pub velocity_noise_std: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperparams {
    /// Stream-function correlation length (m).
    pub length_scale: f64,
    /// Prior velocity standard deviation (m/s).
    pub signal_std: f64,
    /// Measurement noise standard deviation (m/s).
    pub noise_std: f64,
}

impl Hyperparams {
    pub fn new(length_scale: f64, signal_std: f64, noise_std: f64) -> Self {
        Self {
            length_scale,
            signal_std,
            noise_std,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.length_scale, self.signal_std, self.noise_std]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0)
    }
}
