use alloc::vec::Vec;

use super::{FloatWindow, LogEventKind, MissionLog, SimError};
use crate::flowfield::position_at;
use crate::geom::{closest_on_segment, Vec2};
use crate::planner::{CandidateAction, EventKind, Schedule};

/// Lateness of one action's events (s, never negative).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActionTardiness {
    pub action: usize,
    pub drop: f64,
    /// `None` when the float was never picked up.
    pub pick: Option<f64>,
    pub lost: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TardinessReport {
    pub actions: Vec<ActionTardiness>,
    /// Over completed picks.
    pub mean_pick: f64,
    pub max_pick: f64,
    pub lost: usize,
}

/// Planned float drifts placed at the logged drop times and ending at the
/// logged pick or loss times. Actions never dropped are left out.
pub fn executed_float_windows(log: &MissionLog, actions: &[CandidateAction]) -> Vec<FloatWindow> {
    let mut out = Vec::new();
    for a in actions {
        let first = |k: LogEventKind| log.events_of(a.id).find(|e| e.kind == k).map(|e| e.time);
        let Some(drop) = first(LogEventKind::Drop) else {
            continue;
        };
        let end = first(LogEventKind::Pick)
            .or(first(LogEventKind::Loss))
            .unwrap_or(f64::INFINITY);
        out.push(FloatWindow {
            action: a.id,
            trajectory: a.trajectory.shifted(drop - a.trajectory.start().t),
            drop_time: drop,
            pick_time: end,
            exempt: [a.drop, a.pick],
        });
    }
    out
}

/// Drop and pick tardiness per action, measured from the log's shifted
/// schedule.
pub fn tardiness_report(
    log: &MissionLog,
    schedule: &Schedule,
) -> Result<TardinessReport, SimError> {
    let shift = log.start_delay;
    let mut actions = Vec::new();
    for id in schedule.action_ids() {
        let first = |k: LogEventKind| log.events_of(id).find(|e| e.kind == k).map(|e| e.time);
        let sched = |k: EventKind| {
            schedule
                .event(id, k)
                .map(|(_, e)| e.time + shift)
                .expect("action ids come from events")
        };
        let drop = first(LogEventKind::Drop).ok_or(SimError::MissingAction(id))?;
        let pick = first(LogEventKind::Pick);
        let lost = first(LogEventKind::Loss).is_some();
        if pick.is_none() && !lost {
            return Err(SimError::MissingAction(id));
        }
        actions.push(ActionTardiness {
            action: id,
            drop: (drop - sched(EventKind::Drop)).max(0.0),
            pick: pick.map(|t| (t - sched(EventKind::Pick)).max(0.0)),
            lost,
        });
    }
    let picks: Vec<f64> = actions.iter().filter_map(|a| a.pick).collect();
    let mean_pick = if picks.is_empty() {
        0.0
    } else {
        picks.iter().sum::<f64>() / picks.len() as f64
    };
    let max_pick = picks.iter().copied().fold(0.0, f64::max);
    let lost = actions.iter().filter(|a| a.lost).count();
    Ok(TardinessReport {
        actions,
        mean_pick,
        max_pick,
        lost,
    })
}

/// How an executed drift departed from the planned one.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriftDeviation {
    pub action: usize,
    /// Mean distance (m) between executed and expected positions at equal
    /// time since drop.
    pub mean: f64,
    /// Mean signed offset (m) left of the planned drop-to-pick direction.
    pub cross_track: f64,
    /// Distance (m) along the planned path reached at the end of the planned
    /// drift.
    pub progress: f64,
    /// Length (m) of the planned path.
    pub planned_length: f64,
}

impl DriftDeviation {
    pub fn progress_deficit(&self) -> f64 {
        self.planned_length - self.progress
    }
}

/// Executed-versus-planned drift comparison for every dropped action.
///
/// Only the planned drift window `[drop, drop + T]` is compared; the time
/// spent waiting for a late pick is ignored.
pub fn drift_deviations(log: &MissionLog, actions: &[CandidateAction]) -> Vec<DriftDeviation> {
    let mut out = Vec::new();
    for d in &log.drifts {
        let Some(act) = actions.iter().find(|a| a.id == d.action) else {
            continue;
        };
        let t0 = d.samples[0].t;
        let t_end = t0 + act.drift_duration;
        let along = (act.pick - act.drop)
            .normalized()
            .unwrap_or(Vec2::new(1.0, 0.0));
        let (mut sum, mut cross, mut n) = (0.0, 0.0, 0usize);
        for s in d.samples.iter().filter(|s| s.t <= t_end + 1e-9) {
            let off = s.pos - act.trajectory.position_at(s.t - t0);
            sum += off.norm();
            cross += along.cross(off);
            n += 1;
        }
        let path = act.trajectory.positions();
        let reached = position_at(&d.samples, t_end);
        out.push(DriftDeviation {
            action: act.id,
            mean: sum / n as f64,
            cross_track: cross / n as f64,
            progress: arc_position(&path, reached),
            planned_length: path.windows(2).map(|w| w[0].distance(w[1])).sum(),
        });
    }
    out
}

/// Arc length along `path` to its point closest to `p`.
pub fn arc_position(path: &[Vec2], p: Vec2) -> f64 {
    if path.len() < 2 {
        return 0.0;
    }
    let (mut best, mut at, mut walked) = (f64::INFINITY, 0.0, 0.0);
    for w in path.windows(2) {
        let (q, s) = closest_on_segment(p, w[0], w[1]);
        let len = w[0].distance(w[1]);
        let d = q.distance(p);
        if d < best {
            best = d;
            at = walked + s * len;
        }
        walked += len;
    }
    at
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{Sample, Trajectory};
    use crate::planner::{FloatAssignment, ScheduledEvent, VesselPlan};
    use crate::sim::LogEvent;
    use alloc::vec;

    fn ev(action: usize, kind: EventKind, time: f64) -> ScheduledEvent {
        ScheduledEvent {
            action,
            kind,
            time,
            position: Vec2::ZERO,
        }
    }

    fn two_action_schedule() -> Schedule {
        Schedule {
            plans: vec![VesselPlan {
                vessel: 0,
                events: vec![
                    ev(0, EventKind::Drop, 0.0),
                    ev(1, EventKind::Drop, 10.0),
                    ev(0, EventKind::Pick, 600.0),
                    ev(1, EventKind::Pick, 610.0),
                ],
            }],
            floats: vec![
                FloatAssignment {
                    action: 0,
                    vessel: 0,
                    float: 0,
                },
                FloatAssignment {
                    action: 1,
                    vessel: 0,
                    float: 1,
                },
            ],
        }
    }

    fn log_with(events: &[(usize, LogEventKind, f64)]) -> MissionLog {
        MissionLog {
            events: events
                .iter()
                .map(|&(action, kind, time)| LogEvent {
                    time,
                    kind,
                    vessel: 0,
                    action,
                    float: action,
                    position: Vec2::ZERO,
                })
                .collect(),
            ..MissionLog::default()
        }
    }

    #[test]
    fn mixed_tardiness_arithmetic() {
        let log = log_with(&[
            (0, LogEventKind::Drop, 0.0),
            (1, LogEventKind::Drop, 9.0),
            (0, LogEventKind::PickAttempt, 600.0),
            (0, LogEventKind::Pick, 660.0),
            (1, LogEventKind::Pick, 655.0),
        ]);
        let r = tardiness_report(&log, &two_action_schedule()).unwrap();
        assert_eq!(r.actions[0].pick, Some(60.0));
        assert_eq!(r.actions[1].pick, Some(45.0));
        assert_eq!(r.actions[1].drop, 0.0);
        assert_eq!(r.mean_pick, 52.5);
        assert_eq!(r.max_pick, 60.0);
    }

    #[test]
    fn missing_action_is_an_error() {
        let log = log_with(&[(0, LogEventKind::Drop, 0.0), (0, LogEventKind::Pick, 600.0)]);
        assert_eq!(
            tardiness_report(&log, &two_action_schedule()),
            Err(SimError::MissingAction(1))
        );
    }

    #[test]
    fn start_delay_shifts_the_reference() {
        let mut log = log_with(&[
            (0, LogEventKind::Drop, 100.0),
            (1, LogEventKind::Drop, 110.0),
            (0, LogEventKind::Pick, 700.0),
            (1, LogEventKind::Pick, 710.0),
        ]);
        log.start_delay = 100.0;
        let r = tardiness_report(&log, &two_action_schedule()).unwrap();
        assert_eq!((r.mean_pick, r.max_pick), (0.0, 0.0));
    }

    #[test]
    fn deviation_of_offset_drift() {
        let traj = Trajectory {
            dt: 1.0,
            samples: (0..=10)
                .map(|k| Sample {
                    t: k as f64,
                    pos: Vec2::new(k as f64, 0.0),
                })
                .collect(),
            truncated: false,
        };
        let act = CandidateAction::from_trajectory(3, traj, &[]);
        let drift = super::super::DriftTrack {
            action: 3,
            float: 0,
            samples: (0..=10)
                .map(|k| Sample {
                    t: 50.0 + k as f64,
                    pos: Vec2::new(0.5 * k as f64, 2.0),
                })
                .collect(),
        };
        let log = MissionLog {
            drifts: vec![drift],
            ..MissionLog::default()
        };
        let d = drift_deviations(&log, &[act])[0];
        assert!((d.cross_track - 2.0).abs() < 1e-12);
        assert!((d.progress - 5.0).abs() < 1e-12);
        assert!((d.progress_deficit() - 5.0).abs() < 1e-12);
    }
}
