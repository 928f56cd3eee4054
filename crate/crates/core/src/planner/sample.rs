use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CandidateAction, PlanError, Poi};
use crate::flowfield::{integrate_trajectory, FlowField, DEFAULT_DT};
use crate::geom::{Rect, Vec2};

/// Draws `n` drop positions uniformly in `region` and drifts each for
/// `drift_duration` seconds through `field`.
///
/// A drift that leaves the workspace keeps its truncated trajectory; the
/// action's duration is then the truncated one and `exits_workspace` is set.
/// Action ids are `0..n` in sampling order.
pub fn sample_actions<F: FlowField + ?Sized>(
    field: &F,
    region: Rect,
    n: usize,
    drift_duration: f64,
    pois: &[Poi],
    seed: u64,
) -> Result<Vec<CandidateAction>, PlanError> {
    if n == 0 {
        return Err(PlanError::Invalid("need at least one sample"));
    }
    if !(drift_duration > 0.0) || !drift_duration.is_finite() {
        return Err(PlanError::Invalid("drift duration must be positive"));
    }
    if !region.is_valid() || !field.workspace().contains_rect(&region) {
        return Err(PlanError::Invalid(
            "sampling region must lie inside the field workspace",
        ));
    }
    if pois.iter().any(|q| !(q.r_obs > 0.0)) {
        return Err(PlanError::Invalid("observation radius must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = DEFAULT_DT.min(drift_duration);
    (0..n)
        .map(|id| {
            let drop = Vec2::new(
                rng.random_range(region.min.x..=region.max.x),
                rng.random_range(region.min.y..=region.max.y),
            );
            let traj = integrate_trajectory(field, drop, 0.0, drift_duration, dt)?;
            Ok(CandidateAction::from_trajectory(id, traj, pois))
        })
        .collect()
}
