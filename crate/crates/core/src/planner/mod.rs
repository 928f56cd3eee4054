//! Two-level drop-off/pick-up planning.
//!
//! 1. [`sample_actions`] draws candidate drop positions and advects each for
//!    the drift duration to get its pick position and covered POIs.
//! 2. [`select_actions_mcts`] picks a POI-covering subset with UCT.
//! 3. [`schedule_decmcts`] allocates and orders the subset across vessels
//!    with decentralised MCTS, minimising makespan plus a penalty on floats
//!    left waiting after their drift.
//! 4. [`plan_wake_safe_transits`] optionally reroutes vessel transits so they
//!    keep clear of drifting floats and their upcoming paths.
//!
//! [`exhaustive_schedule`] is the brute-force reference for small instances.

mod decmcts;
mod exhaustive;
mod sample;
mod schedule;
mod select;
mod wake_safe;

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::flowfield::{FieldError, Trajectory};
use crate::geom::Vec2;

pub use decmcts::schedule_decmcts;
pub use exhaustive::{exhaustive_schedule, MAX_EXHAUSTIVE_EVENTS};
pub use sample::sample_actions;
pub use schedule::{
    makespan, schedule_cost, time_sequence, unattended_time, EventKind, FloatAssignment, Schedule,
    ScheduledEvent, VesselPlan,
};
pub use select::{coverage_of, greedy_set_cover, select_actions_mcts};
pub use wake_safe::{delayed_float_windows, plan_wake_safe_transits, TransitPlan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("no candidate actions to select from")]
    NoActions,
    #[error("invalid planner input: {0}")]
    Invalid(&'static str),
    #[error("infeasible schedule: {0}")]
    Infeasible(String),
    #[error("instance has {events} events, exhaustive search allows at most {limit}")]
    TooLarge { events: usize, limit: usize },
    #[error("no wake-clear path from ({:.1}, {:.1}) to ({:.1}, {:.1})", from.x, from.y, to.x, to.y)]
    NoClearPath { from: Vec2, to: Vec2 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Point of interest that a drift should pass within `r_obs` of.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Poi {
    pub id: usize,
    pub position: Vec2,
    pub r_obs: f64,
}

/// A paired drop-off and pick-up.
///
/// The drift trajectory is stored with times relative to the drop, so
/// `trajectory.end().t == drift_duration` and
/// `trajectory.end().pos == pick`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CandidateAction {
    pub id: usize,
    pub drop: Vec2,
    /// Earliest time the drop may happen (s since mission start).
    pub earliest_drop: f64,
    pub pick: Vec2,
    pub drift_duration: f64,
    pub trajectory: Trajectory,
    /// Ids of covered POIs, ascending.
    pub covered: Vec<usize>,
    /// The drift left the workspace and was cut short.
    pub exits_workspace: bool,
}

impl CandidateAction {
    /// Builds an action from a drift that starts at its first sample.
    pub fn from_trajectory(id: usize, trajectory: Trajectory, pois: &[Poi]) -> Self {
        let start = trajectory.start();
        let rel = trajectory.shifted(-start.t);
        let end = rel.end();
        let path = rel.positions();
        let mut covered: Vec<usize> = pois
            .iter()
            .filter(|q| crate::geom::point_polyline_distance(q.position, &path) <= q.r_obs)
            .map(|q| q.id)
            .collect();
        covered.sort_unstable();
        covered.dedup();
        Self {
            id,
            drop: start.pos,
            earliest_drop: 0.0,
            pick: end.pos,
            drift_duration: end.t,
            exits_workspace: rel.truncated,
            trajectory: rel,
            covered,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vessel {
    pub id: usize,
    pub start: Vec2,
    /// Transit speed (m/s).
    pub speed: f64,
    /// Floats aboard at the start, and the most it can have adrift at once.
    pub capacity: usize,
}

impl Vessel {
    pub fn is_valid(&self) -> bool {
        self.speed > 0.0 && self.speed.is_finite() && self.capacity >= 1 && self.start.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlannerConfig {
    pub seed: u64,
    /// Iterations of the coverage-selection search.
    pub mcts_iterations: usize,
    /// UCT exploration constant on rewards normalised to [0, 1].
    pub exploration: f64,
    /// Random moves per rollout before it is completed greedily.
    pub rollout_depth: usize,
    /// Reward deducted per selected action, in POIs.
    pub action_cost: f64,
    pub decmcts_rounds: usize,
    pub decmcts_iterations: usize,
    /// Number of plans each vessel publishes per round.
    pub plan_distribution_size: usize,
    /// Cost seconds charged per second a float waits after its drift.
    pub unattended_penalty: f64,
    /// Keep actions whose drift leaves the workspace eligible for selection.
    pub allow_exiting_actions: bool,
    pub wake_avoidance: bool,
    pub wake_radius: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mcts_iterations: 5000,
            exploration: core::f64::consts::SQRT_2,
            rollout_depth: 16,
            action_cost: 0.01,
            decmcts_rounds: 10,
            decmcts_iterations: 400,
            plan_distribution_size: 5,
            unattended_penalty: 0.5,
            allow_exiting_actions: false,
            wake_avoidance: false,
            wake_radius: 15.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.mcts_iterations == 0 || self.decmcts_iterations == 0 || self.decmcts_rounds == 0 {
            return Err(PlanError::Invalid("iteration counts must be positive"));
        }
        if self.plan_distribution_size == 0 {
            return Err(PlanError::Invalid(
                "plan distribution size must be positive",
            ));
        }
        if !(self.unattended_penalty >= 0.0) {
            return Err(PlanError::Invalid(
                "unattended penalty must be non-negative",
            ));
        }
        if !(self.exploration >= 0.0) || !(self.action_cost >= 0.0) || !(self.wake_radius >= 0.0) {
            return Err(PlanError::Invalid(
                "exploration, action cost and wake radius must be non-negative",
            ));
        }
        Ok(())
    }
}
