use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{wake_perturbation, SimError, WakeModel};
use crate::flowfield::{advect, FieldError, FlowField, Sample};
use crate::geom::Vec2;
use crate::planner::{makespan, CandidateAction, EventKind, Schedule, TransitPlan, Vessel};

/// Float-to-vessel radio link.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CommModel {
    /// Range (m) within which a broadcast fix reaches the receiver.
    pub range: f64,
    /// Id of the vessel that receives fixes.
    pub receiver: usize,
}

impl Default for CommModel {
    fn default() -> Self {
        Self {
            range: 500.0,
            receiver: 0,
        }
    }
}

/// Where a vessel spends the time between arriving early and its next
/// scheduled event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WaitPolicy {
    /// Go to the middle of the workspace when there is time to spare, then
    /// leave just in time for the event.
    #[default]
    IdleAtCentroid,
    /// Go straight to the event position and wait there.
    AtDestination,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    /// Step length (s).
    pub dt: f64,
    /// `None` disables wakes.
    pub wake: Option<WakeModel>,
    pub comm: CommModel,
    /// Per-axis GPS fix noise (m).
    pub gps_noise: f64,
    /// Per-axis float velocity noise (m/s), redrawn every step.
    pub velocity_noise: f64,
    pub fix_interval: f64,
    /// A float within this distance (m) of the vessel is picked up.
    pub capture_radius: f64,
    /// A float still adrift this long (s) after its scheduled pick is lost.
    pub loss_horizon: f64,
    /// Every scheduled time is shifted by this much (s).
    pub start_delay: f64,
    pub wait: WaitPolicy,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1.0,
            wake: Some(WakeModel::default()),
            comm: CommModel::default(),
            gps_noise: 3.0,
            velocity_noise: 0.01,
            fix_interval: 1.0,
            capture_radius: 5.0,
            loss_horizon: 1800.0,
            start_delay: 0.0,
            wait: WaitPolicy::IdleAtCentroid,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Truth-equals-plan settings: no wake and no noise.
    pub fn ideal() -> Self {
        Self {
            wake: None,
            gps_noise: 0.0,
            velocity_noise: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.dt > 0.0
            && self.dt.is_finite()
            && self.wake.is_none_or(|w| w.is_valid())
            && self.comm.range > 0.0
            && self.gps_noise >= 0.0
            && self.velocity_noise >= 0.0
            && self.fix_interval > 0.0
            && self.capture_radius > 0.0
            && self.loss_horizon >= 0.0
            && self.start_delay >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::Invalid("simulation parameters out of range"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FloatState {
    Aboard,
    Adrift,
    Retrieved,
    Lost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LogEventKind {
    Drop,
    PickAttempt,
    Detour,
    Pick,
    Loss,
    /// The float for this action was not available.
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogEvent {
    pub time: f64,
    pub kind: LogEventKind,
    pub vessel: usize,
    pub action: usize,
    pub float: usize,
    pub position: Vec2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixRecord {
    pub float: usize,
    pub action: usize,
    pub time: f64,
    pub position: Vec2,
    pub received: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VesselTrack {
    pub vessel: usize,
    pub samples: Vec<Sample>,
}

/// True positions of one float over one action's drift.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriftTrack {
    pub action: usize,
    pub float: usize,
    pub samples: Vec<Sample>,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MissionLog {
    pub start_delay: f64,
    pub vessels: Vec<VesselTrack>,
    pub drifts: Vec<DriftTrack>,
    pub fixes: Vec<FixRecord>,
    /// Sorted by time.
    pub events: Vec<LogEvent>,
}

impl MissionLog {
    pub fn events_of(&self, action: usize) -> impl Iterator<Item = &LogEvent> {
        self.events.iter().filter(move |e| e.action == action)
    }

    pub fn drift_of(&self, action: usize) -> Option<&DriftTrack> {
        self.drifts.iter().find(|d| d.action == action)
    }

    pub fn received_fraction(&self) -> f64 {
        if self.fixes.is_empty() {
            return 1.0;
        }
        self.fixes.iter().filter(|f| f.received).count() as f64 / self.fixes.len() as f64
    }
}

struct Leg {
    to: Vec2,
    not_before: f64,
}

enum Mode {
    Scheduled,
    /// Chasing a float after a missed pick; `fix` is the fix being chased.
    Pursue {
        action: usize,
        fix: Option<(f64, Vec2)>,
        attempted: bool,
    },
    Done,
}

struct VesselSim {
    id: usize,
    speed: f64,
    pos: Vec2,
    /// `(action slot, kind, shifted time, position)`
    events: Vec<(usize, EventKind, f64, Vec2)>,
    next: usize,
    route: Vec<Leg>,
    routed_for: Option<usize>,
    mode: Mode,
    track: Vec<Sample>,
}

impl VesselSim {
    fn record(&mut self, t: f64) {
        match self.track.last_mut() {
            Some(s) if s.t >= t => s.pos = self.pos,
            _ => self.track.push(Sample { t, pos: self.pos }),
        }
    }

    /// Moves toward `to` from `now`, never past `end`. Returns the new time
    /// and whether `to` was reached.
    fn move_toward(&mut self, to: Vec2, now: f64, end: f64) -> (f64, bool) {
        let d = self.pos.distance(to);
        let reach = self.speed * (end - now);
        if d <= reach {
            self.pos = to;
            let t = now + d / self.speed;
            if d > 0.0 {
                self.record(t);
            }
            (t, true)
        } else {
            self.pos = self.pos + (to - self.pos) * (reach / d);
            (end, false)
        }
    }
}

struct FloatSim {
    state: FloatState,
    slot: Option<usize>,
    prev: Sample,
    cur: Sample,
    last_fix: Option<(f64, Vec2)>,
}

impl FloatSim {
    fn position_at(&self, t: f64) -> Vec2 {
        let span = self.cur.t - self.prev.t;
        if span <= 0.0 {
            return self.cur.pos;
        }
        self.prev
            .pos
            .lerp(self.cur.pos, ((t - self.prev.t) / span).clamp(0.0, 1.0))
    }
}

/// One scheduled action as the simulator tracks it.
struct Slot {
    id: usize,
    float: usize,
    exempt: [Vec2; 2],
    scheduled_pick: f64,
    drift: Option<usize>,
    skipped: bool,
}

/// Ground truth plus everything moving in it.
pub struct World<'a, F: FlowField + ?Sized> {
    field: &'a F,
    cfg: SimConfig,
    clock: f64,
    next_fix: f64,
    horizon: f64,
    vessels: Vec<VesselSim>,
    floats: Vec<FloatSim>,
    slots: Vec<Slot>,
    transits: Vec<TransitPlan>,
    rng: ChaCha8Rng,
    velocity_noise: Option<Normal<f64>>,
    gps_noise: Option<Normal<f64>>,
    log: MissionLog,
}

impl<'a, F: FlowField + ?Sized> World<'a, F> {
    /// Sets up a run of `schedule` against the truth `field`. The clock
    /// starts at the configured start delay.
    pub fn new(
        field: &'a F,
        vessels: &[Vessel],
        schedule: &Schedule,
        actions: &[CandidateAction],
        cfg: SimConfig,
    ) -> Result<Self, SimError> {
        cfg.validate()?;
        schedule.validate(vessels, actions)?;
        let shift = cfg.start_delay;
        let ws = field.workspace();

        let mut slots = Vec::new();
        for id in schedule.action_ids() {
            let act = actions.iter().find(|a| a.id == id).expect("validated");
            let f = schedule.float_of(id).ok_or_else(|| {
                SimError::Inconsistent(alloc::format!("action {id} has no float"))
            })?;
            let (_, pick) = schedule.event(id, EventKind::Pick).expect("validated");
            if !ws.contains(act.drop) || !ws.contains(act.pick) {
                return Err(SimError::Inconsistent(alloc::format!(
                    "action {id} lies outside the truth workspace"
                )));
            }
            slots.push(Slot {
                id,
                float: f.float,
                exempt: [act.drop, act.pick],
                scheduled_pick: pick.time + shift,
                drift: None,
                skipped: false,
            });
        }
        let slot_of = |id: usize| slots.iter().position(|s| s.id == id).expect("validated");

        let mut sims = Vec::new();
        for v in vessels {
            let events = schedule
                .plans
                .iter()
                .find(|p| p.vessel == v.id)
                .map(|p| {
                    p.events
                        .iter()
                        .map(|e| (slot_of(e.action), e.kind, e.time + shift, e.position))
                        .collect()
                })
                .unwrap_or_default();
            sims.push(VesselSim {
                id: v.id,
                speed: v.speed,
                pos: v.start,
                events,
                next: 0,
                route: Vec::new(),
                routed_for: None,
                mode: Mode::Scheduled,
                track: alloc::vec![Sample {
                    t: shift,
                    pos: v.start
                }],
            });
        }
        if !sims.iter().any(|v| v.id == cfg.comm.receiver) {
            return Err(SimError::Inconsistent(alloc::format!(
                "receiver vessel {} is not in the fleet",
                cfg.comm.receiver
            )));
        }

        let fleet: usize = vessels.iter().map(|v| v.capacity).sum();
        let idle = Sample {
            t: shift,
            pos: Vec2::ZERO,
        };
        let floats = (0..fleet)
            .map(|_| FloatSim {
                state: FloatState::Aboard,
                slot: None,
                prev: idle,
                cur: idle,
                last_fix: None,
            })
            .collect();

        let normal = |s: f64| {
            if s > 0.0 {
                Normal::new(0.0, s).ok()
            } else {
                None
            }
        };
        Ok(Self {
            field,
            clock: shift,
            next_fix: shift,
            horizon: shift + makespan(schedule) + cfg.loss_horizon,
            vessels: sims,
            floats,
            slots,
            transits: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            velocity_noise: normal(cfg.velocity_noise),
            gps_noise: normal(cfg.gps_noise),
            log: MissionLog {
                start_delay: shift,
                ..MissionLog::default()
            },
            cfg,
        })
    }

    /// Follow these routes between events and wait at the destination.
    pub fn with_transits(mut self, transits: &[TransitPlan]) -> Self {
        self.transits = transits.to_vec();
        self.cfg.wait = WaitPolicy::AtDestination;
        self
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn float_states(&self) -> Vec<FloatState> {
        self.floats.iter().map(|f| f.state).collect()
    }

    pub fn vessel_positions(&self) -> Vec<(usize, Vec2)> {
        self.vessels.iter().map(|v| (v.id, v.pos)).collect()
    }

    /// Current position of every float in the water.
    pub fn adrift(&self) -> Vec<(usize, Vec2)> {
        self.floats
            .iter()
            .enumerate()
            .filter(|(_, f)| f.state == FloatState::Adrift)
            .map(|(i, f)| (i, f.cur.pos))
            .collect()
    }

    pub fn log(&self) -> &MissionLog {
        &self.log
    }

    /// True once every vessel has worked through its events and no float
    /// is left in the water.
    pub fn is_finished(&self) -> bool {
        self.vessels.iter().all(|v| matches!(v.mode, Mode::Done))
            && self.floats.iter().all(|f| f.state != FloatState::Adrift)
    }

    /// Advances the world by `dt` seconds.
    pub fn step(&mut self, dt: f64) -> Result<(), SimError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SimError::Invalid("step must be positive"));
        }
        let (t0, t1) = (self.clock, self.clock + dt);

        for k in 0..self.floats.len() {
            if self.floats[k].state == FloatState::Adrift {
                let p = self.floats[k].cur.pos;
                self.advance_float(k, p, t0, t1)?;
            }
        }
        for v in 0..self.vessels.len() {
            self.advance_vessel(v, t0, t1)?;
        }

        self.clock = t1;
        for v in &mut self.vessels {
            v.record(t1);
        }
        for k in 0..self.floats.len() {
            let f = &self.floats[k];
            if f.state != FloatState::Adrift {
                continue;
            }
            let slot = f.slot.expect("adrift floats serve an action");
            let pos = f.cur.pos;
            if let Some(d) = self.slots[slot].drift {
                self.log.drifts[d].samples.push(Sample { t: t1, pos });
            }
            if t1 > self.slots[slot].scheduled_pick + self.cfg.loss_horizon {
                self.lose(k, t1);
            }
        }
        if t1 >= self.next_fix - 1e-9 {
            self.broadcast(t1);
            while self.next_fix <= t1 + 1e-9 {
                self.next_fix += self.cfg.fix_interval;
            }
        }
        Ok(())
    }

    fn lose(&mut self, k: usize, t: f64) {
        let f = &mut self.floats[k];
        f.state = FloatState::Lost;
        let slot = f.slot.expect("adrift floats serve an action");
        let pos = f.cur.pos;
        let vessel = self.owner(slot);
        self.log.events.push(LogEvent {
            time: t,
            kind: LogEventKind::Loss,
            vessel,
            action: self.slots[slot].id,
            float: k,
            position: pos,
        });
    }

    fn owner(&self, slot: usize) -> usize {
        self.vessels
            .iter()
            .find(|v| v.events.iter().any(|e| e.0 == slot))
            .map_or(usize::MAX, |v| v.id)
    }

    fn broadcast(&mut self, t: f64) {
        let rx = self
            .vessels
            .iter()
            .find(|v| v.id == self.cfg.comm.receiver)
            .expect("checked")
            .pos;
        for k in 0..self.floats.len() {
            if self.floats[k].state != FloatState::Adrift {
                continue;
            }
            let truth = self.floats[k].cur.pos;
            let noise = match self.gps_noise {
                Some(n) => Vec2::new(n.sample(&mut self.rng), n.sample(&mut self.rng)),
                None => Vec2::ZERO,
            };
            let received = truth.distance(rx) <= self.cfg.comm.range;
            let position = truth + noise;
            let slot = self.floats[k].slot.expect("adrift floats serve an action");
            self.log.fixes.push(FixRecord {
                float: k,
                action: self.slots[slot].id,
                time: t,
                position,
                received,
            });
            if received {
                self.floats[k].last_fix = Some((t, position));
            }
        }
    }

    /// Moves float `k` from `p` at `from` to `to`, losing it if it leaves
    /// the workspace.
    fn advance_float(&mut self, k: usize, p: Vec2, from: f64, to: f64) -> Result<(), SimError> {
        let mut extra = match self.velocity_noise {
            Some(n) => Vec2::new(n.sample(&mut self.rng), n.sample(&mut self.rng)),
            None => Vec2::ZERO,
        };
        if let Some(wm) = self.cfg.wake.filter(|w| w.radius > 0.0) {
            let slot = &self.slots[self.floats[k].slot.expect("adrift floats serve an action")];
            if slot.exempt.iter().all(|e| e.distance(p) >= wm.radius) {
                let base = self.field.velocity(p, from)?;
                let mut best = Vec2::ZERO;
                for v in &self.vessels {
                    let w = wake_perturbation(&v.track, p, from, &wm, base);
                    if w.norm() > best.norm() {
                        best = w;
                    }
                }
                extra += best;
            }
        }
        let f = &mut self.floats[k];
        f.prev = Sample { t: from, pos: p };
        match advect(self.field, p, from, to - from, extra) {
            Ok(q) => {
                f.cur = Sample { t: to, pos: q };
                Ok(())
            }
            Err(FieldError::OutsideWorkspace { .. }) => {
                f.cur = f.prev;
                self.lose(k, from);
                Ok(())
            }
            Err(e) => Err(e.into()),
        }
    }

    fn route_to(&self, v: &VesselSim, now: f64) -> Vec<Leg> {
        let (_, _, at, target) = v.events[v.next];
        if let Some(tp) = self
            .transits
            .iter()
            .find(|t| t.vessel == v.id && t.event == v.next)
        {
            return tp
                .waypoints
                .iter()
                .map(|&to| Leg {
                    to,
                    not_before: now,
                })
                .collect();
        }
        if self.cfg.wait == WaitPolicy::IdleAtCentroid {
            let c = self.field.workspace().center();
            let back = c.distance(target) / v.speed;
            let spare = at - now - 2.0 * self.cfg.dt;
            if v.pos != c && (v.pos.distance(c) / v.speed) + back <= spare {
                return alloc::vec![
                    Leg {
                        to: c,
                        not_before: now
                    },
                    Leg {
                        to: target,
                        not_before: at - back
                    }
                ];
            }
        }
        alloc::vec![Leg {
            to: target,
            not_before: now
        }]
    }

    fn push_event(
        &mut self,
        time: f64,
        kind: LogEventKind,
        vessel: usize,
        slot: usize,
        position: Vec2,
    ) {
        let s = &self.slots[slot];
        self.log.events.push(LogEvent {
            time,
            kind,
            vessel,
            action: s.id,
            float: s.float,
            position,
        });
    }

    fn advance_vessel(&mut self, vi: usize, t0: f64, t1: f64) -> Result<(), SimError> {
        let mut now = t0;
        loop {
            let v = &mut self.vessels[vi];
            match v.mode {
                Mode::Done => return Ok(()),
                Mode::Pursue {
                    action,
                    fix,
                    attempted,
                } => {
                    let k = self.slots[action].float;
                    if self.floats[k].state != FloatState::Adrift {
                        v.mode = Mode::Scheduled;
                        v.next += 1;
                        continue;
                    }
                    // chase a newer fix once the last one led nowhere
                    let newer = self.floats[k]
                        .last_fix
                        .filter(|nf| fix.is_none_or(|f| nf.0 > f.0));
                    if attempted || fix.is_none() {
                        let Some(nf) = newer else { return Ok(()) };
                        v.mode = Mode::Pursue {
                            action,
                            fix: Some(nf),
                            attempted: false,
                        };
                        let (id, pos) = (v.id, v.pos);
                        self.push_event(now, LogEventKind::Detour, id, action, pos);
                        continue;
                    }
                    let (_, target) = fix.expect("checked above");
                    let (t, arrived) = v.move_toward(target, now, t1);
                    now = t;
                    if !arrived {
                        return Ok(());
                    }
                    self.attempt_pick(vi, action, now);
                }
                Mode::Scheduled => {
                    if v.next >= v.events.len() {
                        v.mode = Mode::Done;
                        return Ok(());
                    }
                    if v.routed_for != Some(v.next) {
                        let route = self.route_to(&self.vessels[vi], now);
                        let v = &mut self.vessels[vi];
                        v.route = route;
                        v.routed_for = Some(v.next);
                        continue;
                    }
                    if let Some(leg) = v.route.first() {
                        let (to, not_before) = (leg.to, leg.not_before);
                        if now < not_before {
                            if not_before >= t1 {
                                return Ok(());
                            }
                            v.record(now);
                            now = not_before;
                            v.record(now);
                        }
                        let (t, arrived) = v.move_toward(to, now, t1);
                        now = t;
                        if !arrived {
                            return Ok(());
                        }
                        v.route.remove(0);
                        continue;
                    }
                    let (slot, kind, at, _) = v.events[v.next];
                    if now < at {
                        if at >= t1 {
                            return Ok(());
                        }
                        v.record(now);
                        now = at;
                        v.record(now);
                    }
                    match kind {
                        EventKind::Drop => self.drop_float(vi, slot, now, t1)?,
                        EventKind::Pick => self.attempt_pick(vi, slot, now),
                    }
                }
            }
        }
    }

    fn drop_float(&mut self, vi: usize, slot: usize, now: f64, t1: f64) -> Result<(), SimError> {
        let (id, pos) = (self.vessels[vi].id, self.vessels[vi].pos);
        self.vessels[vi].next += 1;
        let k = self.slots[slot].float;
        if !matches!(
            self.floats[k].state,
            FloatState::Aboard | FloatState::Retrieved
        ) {
            self.slots[slot].skipped = true;
            self.push_event(now, LogEventKind::Skip, id, slot, pos);
            return Ok(());
        }
        let f = &mut self.floats[k];
        f.state = FloatState::Adrift;
        f.slot = Some(slot);
        f.last_fix = None;
        f.prev = Sample { t: now, pos };
        f.cur = f.prev;
        self.slots[slot].drift = Some(self.log.drifts.len());
        self.log.drifts.push(DriftTrack {
            action: self.slots[slot].id,
            float: k,
            samples: alloc::vec![f.prev],
        });
        self.push_event(now, LogEventKind::Drop, id, slot, pos);
        if now < t1 {
            self.advance_float(k, pos, now, t1)?;
        }
        Ok(())
    }

    fn attempt_pick(&mut self, vi: usize, slot: usize, now: f64) {
        let (id, pos) = (self.vessels[vi].id, self.vessels[vi].pos);
        let k = self.slots[slot].float;
        if self.slots[slot].skipped {
            self.vessels[vi].next += 1;
            self.push_event(now, LogEventKind::Skip, id, slot, pos);
            return;
        }
        if self.floats[k].state != FloatState::Adrift {
            self.vessels[vi].next += 1;
            self.vessels[vi].mode = Mode::Scheduled;
            return;
        }
        let fp = self.floats[k].position_at(now);
        if fp.distance(pos) <= self.cfg.capture_radius {
            let f = &mut self.floats[k];
            f.state = FloatState::Retrieved;
            f.cur = Sample { t: now, pos: fp };
            if let Some(d) = self.slots[slot].drift {
                self.log.drifts[d].samples.push(Sample { t: now, pos: fp });
            }
            self.push_event(now, LogEventKind::Pick, id, slot, fp);
            let v = &mut self.vessels[vi];
            v.next += 1;
            v.mode = Mode::Scheduled;
            return;
        }
        self.push_event(now, LogEventKind::PickAttempt, id, slot, pos);
        let v = &mut self.vessels[vi];
        v.mode = match v.mode {
            Mode::Pursue { fix, .. } => Mode::Pursue {
                action: slot,
                fix,
                attempted: true,
            },
            _ => Mode::Pursue {
                action: slot,
                fix: None,
                attempted: true,
            },
        };
    }

    /// Runs the world to completion and returns the log.
    pub fn run(mut self) -> Result<MissionLog, SimError> {
        let dt = self.cfg.dt;
        // vessels finish their own events after every float is settled
        let travel: f64 = self
            .vessels
            .iter()
            .map(|v| v.events.len() as f64)
            .sum::<f64>()
            * libm::hypot(
                self.field.workspace().width(),
                self.field.workspace().height(),
            )
            / self
                .vessels
                .iter()
                .map(|v| v.speed)
                .fold(f64::INFINITY, f64::min)
                .max(1e-9);
        let limit = self.horizon + travel + 10.0 * dt;
        while !self.is_finished() {
            if self.clock > limit {
                return Err(SimError::Stalled { time: self.clock });
            }
            self.step(dt)?;
        }
        self.log.events.sort_by(|a, b| a.time.total_cmp(&b.time));
        self.log.vessels = self
            .vessels
            .iter()
            .map(|v| VesselTrack {
                vessel: v.id,
                samples: v.track.clone(),
            })
            .collect();
        Ok(self.log)
    }
}

/// Executes `schedule` against the truth field and returns the mission log.
///
/// Vessels keep to the schedule, waiting when early. A pick that misses its
/// float turns into a chase of the float's last received fix, repeated with
/// each newer fix until capture or loss.
pub fn execute_schedule<F: FlowField + ?Sized>(
    field: &F,
    vessels: &[Vessel],
    schedule: &Schedule,
    actions: &[CandidateAction],
    transits: Option<&[TransitPlan]>,
    cfg: SimConfig,
) -> Result<MissionLog, SimError> {
    let mut w = World::new(field, vessels, schedule, actions, cfg)?;
    if let Some(t) = transits {
        w = w.with_transits(t);
    }
    w.run()
}
