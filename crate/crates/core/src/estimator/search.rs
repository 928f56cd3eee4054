use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{
    fit_divergence_free_gp, kalman_smooth, track_to_measurements, DrifterTrack, EstimatedField,
    EstimatorError, Hyperparams, Measurement, DEFAULT_MEAS_NOISE, DEFAULT_PROCESS_NOISE,
    DEFAULT_SUBSAMPLE,
};
use crate::flowfield::{integrate_trajectory, position_at, FlowField, DEFAULT_DT};
use crate::geom::Rect;

/// Length scales 25-200 m, signal 0.05-0.2 m/s, noise 0.005-0.02 m/s.
pub fn default_grid() -> Vec<Hyperparams> {
    let mut g = Vec::new();
    for &l in &[25.0, 50.0, 100.0, 200.0] {
        for &sf in &[0.05, 0.1, 0.2] {
            for &sn in &[0.005, 0.01, 0.02] {
                g.push(Hyperparams::new(l, sf, sn));
            }
        }
    }
    g
}

/// Mean distance (m) between a track's received fixes and the path predicted
/// by advecting its first received fix through `field`.
///
/// If the predicted path leaves the workspace its last position is held.
pub fn trajectory_prediction_error<F: FlowField + ?Sized>(
    field: &F,
    track: &DrifterTrack,
    dt: f64,
) -> Result<f64, EstimatorError> {
    let observed: Vec<_> = track
        .fixes
        .iter()
        .filter(|f| f.received && !f.interpolated)
        .collect();
    let Some(first) = observed.first() else {
        return Err(EstimatorError::TooFewFixes {
            id: track.id.clone(),
            count: 0,
        });
    };
    let duration = observed.last().unwrap().time - first.time;
    if observed.len() < 2 || duration <= 0.0 {
        return Ok(0.0);
    }
    let predicted = integrate_trajectory(
        field,
        first.position,
        first.time,
        duration,
        dt.min(duration),
    )?;
    let total: f64 = observed
        .iter()
        .map(|f| position_at(&predicted.samples, f.time).distance(f.position))
        .sum();
    Ok(total / observed.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridPointScore {
    pub hyperparams: Hyperparams,
    /// Holdout error in meters, absent when the fit failed.
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSearchOutcome {
    pub best: Hyperparams,
    pub best_score: f64,
    pub holdout: String,
    pub scores: Vec<GridPointScore>,
}

/// Argmin over `(hyperparams, score)` pairs. Ties go to the larger noise std,
/// then the larger length scale; remaining ties keep the earliest entry.
pub fn select_best(scored: &[(Hyperparams, f64)]) -> Option<(Hyperparams, f64)> {
    let key = |a: &(Hyperparams, f64), b: &(Hyperparams, f64)| {
        a.1.total_cmp(&b.1)
            .then(b.0.noise_std.total_cmp(&a.0.noise_std))
            .then(b.0.length_scale.total_cmp(&a.0.length_scale))
    };
    let mut best: Option<(Hyperparams, f64)> = None;
    for s in scored {
        best = match best {
            Some(b) if key(s, &b) != Ordering::Less => Some(b),
            _ => Some(*s),
        };
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationOptions {
    pub workspace: Rect,
    pub subsample_interval: f64,
    pub process_noise: f64,
    pub meas_noise: f64,
    pub dt: f64,
    pub grid: Vec<Hyperparams>,
    /// Track held out during the grid search; the last track when `None`.
    pub holdout: Option<String>,
}

impl EstimationOptions {
    pub fn new(workspace: Rect) -> Self {
        Self {
            workspace,
            subsample_interval: DEFAULT_SUBSAMPLE,
            process_noise: DEFAULT_PROCESS_NOISE,
            meas_noise: DEFAULT_MEAS_NOISE,
            dt: DEFAULT_DT,
            grid: default_grid(),
            holdout: None,
        }
    }
}

/// Leave-one-track-out grid search.
///
/// Every grid point is fitted on the measurements of all tracks except
/// `holdout` and scored by [`trajectory_prediction_error`] on the holdout.
pub fn grid_search(
    tracks: &[DrifterTrack],
    grid: &[Hyperparams],
    holdout: &str,
    opts: &EstimationOptions,
) -> Result<GridSearchOutcome, EstimatorError> {
    if tracks.len() < 2 {
        return Err(EstimatorError::TooFewTracks(tracks.len()));
    }
    if grid.is_empty() {
        return Err(EstimatorError::EmptyGrid);
    }
    let held = tracks
        .iter()
        .find(|t| t.id == holdout)
        .ok_or_else(|| EstimatorError::HoldoutMissing(holdout.to_string()))?;
    let mut training: Vec<Measurement> = Vec::new();
    for t in tracks.iter().filter(|t| t.id != holdout) {
        training.extend(track_to_measurements(t, opts.subsample_interval)?);
    }

    let scores: Vec<GridPointScore> = grid
        .iter()
        .map(|&hp| {
            let result = fit_divergence_free_gp(&training, hp, opts.workspace)
                .and_then(|field| trajectory_prediction_error(&field, held, opts.dt));
            match result {
                Ok(s) => GridPointScore {
                    hyperparams: hp,
                    score: Some(s),
                    error: None,
                },
                Err(e) => GridPointScore {
                    hyperparams: hp,
                    score: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ok: Vec<(Hyperparams, f64)> = scores
        .iter()
        .filter_map(|s| s.score.map(|v| (s.hyperparams, v)))
        .collect();
    match select_best(&ok) {
        Some((best, best_score)) => Ok(GridSearchOutcome {
            best,
            best_score,
            holdout: holdout.to_string(),
            scores,
        }),
        None => Err(EstimatorError::AllGridPointsFailed(
            scores
                .iter()
                .find_map(|s| s.error.clone())
                .unwrap_or_default(),
        )),
    }
}

#[derive(Clone, Debug)]
pub struct EstimationOutcome {
    pub smoothed: Vec<DrifterTrack>,
    pub measurements: Vec<Measurement>,
    pub search: GridSearchOutcome,
    pub field: EstimatedField,
}

/// Smooth, extract, grid-search and fit the final field on all tracks.
pub fn estimate_field(
    tracks: &[DrifterTrack],
    opts: &EstimationOptions,
) -> Result<EstimationOutcome, EstimatorError> {
    if tracks.len() < 2 {
        return Err(EstimatorError::TooFewTracks(tracks.len()));
    }
    let smoothed = tracks
        .iter()
        .map(|t| kalman_smooth(t, opts.process_noise, opts.meas_noise))
        .collect::<Result<Vec<_>, _>>()?;
    let holdout = opts
        .holdout
        .clone()
        .unwrap_or_else(|| tracks.last().unwrap().id.clone());
    let search = grid_search(&smoothed, &opts.grid, &holdout, opts)?;
    let mut measurements = Vec::new();
    for t in &smoothed {
        measurements.extend(track_to_measurements(t, opts.subsample_interval)?);
    }
    let field = fit_divergence_free_gp(&measurements, search.best, opts.workspace)?;
    Ok(EstimationOutcome {
        smoothed,
        measurements,
        search,
        field,
    })
}
