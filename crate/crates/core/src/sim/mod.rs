//! Mission execution against a ground-truth current.
//!
//! [`World`] steps floats and vessels forward in time: floats are advected
//! by the truth field plus velocity noise and vessel wakes, vessels follow
//! their schedule and chase floats that are not where the plan put them.
//! Everything that happens lands in a [`MissionLog`], from which
//! [`tardiness_report`] and [`drift_deviations`] are computed.

mod crossings;
mod deploy;
mod report;
pub(crate) mod wake;
mod world;

use alloc::string::String;

use thiserror::Error;

use crate::flowfield::FieldError;
use crate::planner::PlanError;

pub use crossings::{detect_crossings, Crossing};
pub use deploy::{synthesize_tracks, triangle_formation, Deployment, SyntheticTracks};
pub use report::{
    arc_position, drift_deviations, executed_float_windows, tardiness_report, ActionTardiness,
    DriftDeviation, TardinessReport,
};
pub use wake::{
    schedule_float_windows, wake_conflicts, wake_perturbation, FloatWindow, WakeConflict, WakeModel,
};
pub use world::{
    execute_schedule, CommModel, DriftTrack, FixRecord, FloatState, LogEvent, LogEventKind,
    MissionLog, SimConfig, VesselTrack, WaitPolicy, World,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation input: {0}")]
    Invalid(&'static str),
    #[error("plan does not match the scenario: {0}")]
    Inconsistent(String),
    #[error("action {0} is missing from the mission log")]
    MissingAction(usize),
    #[error("mission did not settle by t = {time} s")]
    Stalled { time: f64 },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
