use alloc::format;
use alloc::vec::Vec;

use super::{CandidateAction, PlanError, Vessel};
use crate::geom::Vec2;

/// Slack allowed when checking timing constraints (s).
const TIME_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EventKind {
    Drop,
    Pick,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduledEvent {
    /// Id of the [`CandidateAction`].
    pub action: usize,
    pub kind: EventKind,
    /// Seconds since mission start.
    pub time: f64,
    pub position: Vec2,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VesselPlan {
    pub vessel: usize,
    pub events: Vec<ScheduledEvent>,
}

/// Which physical float serves an action.
///
/// Floats are numbered fleet-wide: vessel `k` owns the ids following the
/// capacities of vessels `0..k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FloatAssignment {
    pub action: usize,
    pub vessel: usize,
    pub float: usize,
}

/// A joint drop/pick schedule. Each vessel waits at its next event position
/// if it arrives early.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schedule {
    pub plans: Vec<VesselPlan>,
    pub floats: Vec<FloatAssignment>,
}

/// A vessel's event order as `(index into actions, kind)`.
pub(crate) type Sequence = Vec<(usize, EventKind)>;

/// Walks a sequence, calling `visit` with `(index, kind, time, position)`.
///
/// Returns `(finish time, unattended seconds)` or `None` when the order is
/// invalid: a pick before its drop, a repeated event or more floats adrift
/// than the vessel carries.
pub(crate) fn walk_sequence(
    vessel: &Vessel,
    seq: &[(usize, EventKind)],
    actions: &[CandidateAction],
    mut visit: impl FnMut(usize, EventKind, f64, Vec2),
) -> Option<(f64, f64)> {
    let mut pos = vessel.start;
    let mut now = 0.0;
    let mut unattended = 0.0;
    // (action index, drop time, picked)
    let mut dropped: Vec<(usize, f64, bool)> = Vec::with_capacity(seq.len());
    let mut adrift = 0usize;
    for &(a, kind) in seq {
        let act = actions.get(a)?;
        let target = match kind {
            EventKind::Drop => act.drop,
            EventKind::Pick => act.pick,
        };
        let arrival = now + pos.distance(target) / vessel.speed;
        match kind {
            EventKind::Drop => {
                if adrift >= vessel.capacity || dropped.iter().any(|d| d.0 == a) {
                    return None;
                }
                now = arrival.max(act.earliest_drop);
                dropped.push((a, now, false));
                adrift += 1;
            }
            EventKind::Pick => {
                let d = dropped.iter_mut().find(|d| d.0 == a && !d.2)?;
                d.2 = true;
                let due = d.1 + act.drift_duration;
                now = arrival.max(due);
                unattended += now - due;
                adrift -= 1;
            }
        }
        pos = target;
        visit(a, kind, now, target);
    }
    Some((now, unattended))
}

/// Finish time and unattended seconds of one vessel's sequence.
pub(crate) fn sequence_cost(
    vessel: &Vessel,
    seq: &[(usize, EventKind)],
    actions: &[CandidateAction],
) -> Option<(f64, f64)> {
    walk_sequence(vessel, seq, actions, |_, _, _, _| {})
}

/// Times the events of one vessel's sequence.
///
/// Each leg starts as soon as the previous event is done; the vessel waits
/// at the destination until the drop is allowed or the drift has elapsed.
pub fn time_sequence(
    vessel: &Vessel,
    seq: &[(usize, EventKind)],
    actions: &[CandidateAction],
) -> Option<Vec<ScheduledEvent>> {
    let mut out = Vec::with_capacity(seq.len());
    walk_sequence(vessel, seq, actions, |a, kind, time, position| {
        out.push(ScheduledEvent {
            action: actions[a].id,
            kind,
            time,
            position,
        });
    })?;
    Some(out)
}

impl Schedule {
    /// Builds a timed schedule from per-vessel event orders (indices into
    /// `actions`), one per vessel in `vessels` order.
    pub fn from_sequences(
        vessels: &[Vessel],
        actions: &[CandidateAction],
        seqs: &[Vec<(usize, EventKind)>],
    ) -> Result<Schedule, PlanError> {
        let mut plans = Vec::with_capacity(vessels.len());
        let mut floats = Vec::new();
        let mut offset = 0;
        for (v, seq) in vessels.iter().zip(seqs) {
            let events = time_sequence(v, seq, actions).ok_or_else(|| {
                PlanError::Infeasible(format!(
                    "vessel {}: invalid event order or capacity exceeded",
                    v.id
                ))
            })?;
            // lowest free float on each drop
            let mut aboard: Vec<bool> = alloc::vec![true; v.capacity];
            let mut held: Vec<(usize, usize)> = Vec::new();
            for e in &events {
                match e.kind {
                    EventKind::Drop => {
                        let f = aboard.iter().position(|&b| b).expect("capacity checked");
                        aboard[f] = false;
                        held.push((e.action, f));
                        floats.push(FloatAssignment {
                            action: e.action,
                            vessel: v.id,
                            float: offset + f,
                        });
                    }
                    EventKind::Pick => {
                        let k = held
                            .iter()
                            .position(|h| h.0 == e.action)
                            .expect("order checked");
                        aboard[held.swap_remove(k).1] = true;
                    }
                }
            }
            offset += v.capacity;
            plans.push(VesselPlan {
                vessel: v.id,
                events,
            });
        }
        floats.sort_by_key(|f| f.action);
        Ok(Schedule { plans, floats })
    }

    pub fn events(&self) -> impl Iterator<Item = (usize, &ScheduledEvent)> {
        self.plans
            .iter()
            .flat_map(|p| p.events.iter().map(move |e| (p.vessel, e)))
    }

    /// Ids of scheduled actions, ascending.
    pub fn action_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .events()
            .filter(|(_, e)| e.kind == EventKind::Drop)
            .map(|(_, e)| e.action)
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn event(&self, action: usize, kind: EventKind) -> Option<(usize, &ScheduledEvent)> {
        self.events()
            .find(|(_, e)| e.action == action && e.kind == kind)
    }

    pub fn float_of(&self, action: usize) -> Option<&FloatAssignment> {
        self.floats.iter().find(|f| f.action == action)
    }

    /// Checks every schedule invariant against the fleet and action set.
    ///
    /// Returns the first violated constraint as [`PlanError::Infeasible`].
    pub fn validate(
        &self,
        vessels: &[Vessel],
        actions: &[CandidateAction],
    ) -> Result<(), PlanError> {
        let bad = |msg: alloc::string::String| Err(PlanError::Infeasible(msg));
        let find_action = |id: usize| actions.iter().find(|a| a.id == id);
        let mut seen_vessels = Vec::new();
        for plan in &self.plans {
            let Some(v) = vessels.iter().find(|v| v.id == plan.vessel) else {
                return bad(format!("plan for unknown vessel {}", plan.vessel));
            };
            if seen_vessels.contains(&v.id) {
                return bad(format!("vessel {} has two plans", v.id));
            }
            seen_vessels.push(v.id);
            let mut pos = v.start;
            let mut now = 0.0;
            let mut adrift: Vec<usize> = Vec::new();
            for e in &plan.events {
                let Some(act) = find_action(e.action) else {
                    return bad(format!("unknown action {}", e.action));
                };
                let expected = match e.kind {
                    EventKind::Drop => act.drop,
                    EventKind::Pick => act.pick,
                };
                if e.position.distance(expected) > 1e-9 {
                    return bad(format!(
                        "action {} {:?} position does not match the action",
                        e.action, e.kind
                    ));
                }
                if e.time + TIME_EPS < now + pos.distance(e.position) / v.speed {
                    return bad(format!(
                        "vessel {} cannot reach action {} {:?} in time",
                        v.id, e.action, e.kind
                    ));
                }
                match e.kind {
                    EventKind::Drop => {
                        if e.time + TIME_EPS < act.earliest_drop {
                            return bad(format!(
                                "action {} dropped before its earliest time",
                                e.action
                            ));
                        }
                        adrift.push(e.action);
                        if adrift.len() > v.capacity {
                            return bad(format!(
                                "vessel {} exceeds float capacity {}",
                                v.id, v.capacity
                            ));
                        }
                    }
                    EventKind::Pick => {
                        let Some(k) = adrift.iter().position(|&a| a == e.action) else {
                            return bad(format!(
                                "action {} picked by vessel {} without its drop",
                                e.action, v.id
                            ));
                        };
                        adrift.swap_remove(k);
                    }
                }
                now = e.time;
                pos = e.position;
            }
            if let Some(a) = adrift.first() {
                return bad(format!("action {a} is dropped but never picked"));
            }
        }
        let mut ids = Vec::new();
        for (_, e) in self.events().filter(|(_, e)| e.kind == EventKind::Drop) {
            if ids.contains(&e.action) {
                return bad(format!("action {} is scheduled twice", e.action));
            }
            ids.push(e.action);
            let (_, pick) = self
                .event(e.action, EventKind::Pick)
                .expect("checked per vessel");
            let act = find_action(e.action).expect("checked per vessel");
            if pick.time + TIME_EPS < e.time + act.drift_duration {
                return bad(format!(
                    "action {} picked before its drift of {} s ends",
                    e.action, act.drift_duration
                ));
            }
        }
        for id in &ids {
            let Some(f) = self.float_of(*id) else {
                return bad(format!("action {id} has no float assigned"));
            };
            let (vessel, _) = self.event(*id, EventKind::Drop).unwrap();
            if f.vessel != vessel {
                return bad(format!(
                    "action {id} float belongs to vessel {} but vessel {vessel} drops it",
                    f.vessel
                ));
            }
        }
        // one float cannot be adrift twice at once
        for (i, a) in self.floats.iter().enumerate() {
            for b in &self.floats[i + 1..] {
                if a.float != b.float {
                    continue;
                }
                let span = |id| {
                    let d = self
                        .event(id, EventKind::Drop)
                        .map(|x| x.1.time)
                        .unwrap_or(0.0);
                    let p = self
                        .event(id, EventKind::Pick)
                        .map(|x| x.1.time)
                        .unwrap_or(0.0);
                    (d, p)
                };
                let (sa, sb) = (span(a.action), span(b.action));
                if sa.0 < sb.1 - TIME_EPS && sb.0 < sa.1 - TIME_EPS {
                    return bad(format!(
                        "float {} serves overlapping actions {} and {}",
                        a.float, a.action, b.action
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Latest event time over all vessels; 0 for an empty schedule.
pub fn makespan(s: &Schedule) -> f64 {
    s.events().map(|(_, e)| e.time).fold(0.0, f64::max)
}

/// Total seconds floats wait past the end of their drift before pick-up.
pub fn unattended_time(s: &Schedule, actions: &[CandidateAction]) -> f64 {
    s.events()
        .filter(|(_, e)| e.kind == EventKind::Pick)
        .filter_map(|(_, pick)| {
            let act = actions.iter().find(|a| a.id == pick.action)?;
            let (_, drop) = s.event(pick.action, EventKind::Drop)?;
            Some((pick.time - drop.time - act.drift_duration).max(0.0))
        })
        .sum()
}

/// `makespan + penalty * unattended_time`.
pub fn schedule_cost(s: &Schedule, actions: &[CandidateAction], penalty: f64) -> f64 {
    makespan(s) + penalty * unattended_time(s, actions)
}
