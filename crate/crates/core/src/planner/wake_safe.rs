//! Vessel transits that keep clear of drifting floats.
//!
//! Each transit is checked against the floats that can be in the water
//! while it happens. Their paths from the transit's departure onwards are
//! treated as static obstacles of radius `d_wake`, with the stretches near
//! each float's own drop and pick positions removed. A blocked straight leg is replaced by a grid
//! A* route that is then pulled taut.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{CandidateAction, EventKind, PlanError, Schedule, Vessel};
use crate::flowfield::Sample;
use crate::geom::{closest_points_segments, point_segment_distance, Rect, Vec2};
use crate::sim::wake::{trimmed_path, TRIM_SLACK};
use crate::sim::{schedule_float_windows, wake_conflicts, FloatWindow};

/// Clearance kept beyond the wake radius to absorb rounding (m).
const CLEAR_MARGIN: f64 = 1e-7;

/// The route a vessel takes to one scheduled event.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransitPlan {
    pub vessel: usize,
    /// Index of the destination event in the vessel's plan.
    pub event: usize,
    pub from: Vec2,
    /// Route after `from`, ending at the event position.
    pub waypoints: Vec<Vec2>,
    pub depart: f64,
    pub arrive: f64,
    /// Event time in the schedule.
    pub scheduled: f64,
    /// How much later than scheduled the event can now happen (s).
    pub delay: f64,
    pub rerouted: bool,
}

impl TransitPlan {
    pub fn length(&self) -> f64 {
        let mut prev = self.from;
        let mut len = 0.0;
        for &w in &self.waypoints {
            len += prev.distance(w);
            prev = w;
        }
        len
    }
}

struct Obstacle {
    pieces: Vec<(Vec2, Vec2)>,
    reach: Rect,
}

struct Clearance {
    obstacles: Vec<Obstacle>,
    radius: f64,
}

impl Clearance {
    /// Float paths from `from_time` on, trimmed exactly as the conflict
    /// test does.
    fn new(windows: &[&FloatWindow], from_time: f64, radius: f64, pad: f64) -> Self {
        let obstacles = windows
            .iter()
            .filter_map(|w| {
                let path = w.trajectory.remaining_path(from_time.max(w.drop_time));
                let pieces = trimmed_path(&path, &w.exempt, radius + TRIM_SLACK);
                let first = pieces.first()?.0;
                let mut reach = Rect::new(first, first);
                for &(a, b) in &pieces {
                    for p in [a, b] {
                        reach.min = Vec2::new(reach.min.x.min(p.x), reach.min.y.min(p.y));
                        reach.max = Vec2::new(reach.max.x.max(p.x), reach.max.y.max(p.y));
                    }
                }
                let r = radius + CLEAR_MARGIN + pad;
                reach = Rect::new(reach.min - Vec2::new(r, r), reach.max + Vec2::new(r, r));
                Some(Obstacle { pieces, reach })
            })
            .collect();
        Self { obstacles, radius }
    }

    fn point_ok(&self, p: Vec2, inflate: f64) -> bool {
        let need = self.radius + CLEAR_MARGIN + inflate;
        self.obstacles.iter().all(|o| {
            !o.reach.contains(p)
                || o.pieces
                    .iter()
                    .all(|&(a, b)| point_segment_distance(p, a, b) >= need)
        })
    }

    fn segment_ok(&self, a: Vec2, b: Vec2) -> bool {
        let need = self.radius + CLEAR_MARGIN;
        let lo = Vec2::new(a.x.min(b.x), a.y.min(b.y));
        let hi = Vec2::new(a.x.max(b.x), a.y.max(b.y));
        self.obstacles.iter().all(|o| {
            let apart = hi.x < o.reach.min.x
                || lo.x > o.reach.max.x
                || hi.y < o.reach.min.y
                || lo.y > o.reach.max.y;
            apart
                || o.pieces
                    .iter()
                    .all(|&(p, q)| closest_points_segments(a, b, p, q).2 >= need)
        })
    }
}

#[derive(PartialEq)]
struct Open(f64, usize);

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Grid A* from `a` to `b`, then string pulling. `None` if no route.
fn route(clear: &Clearance, ws: &Rect, a: Vec2, b: Vec2) -> Option<Vec<Vec2>> {
    let h = (clear.radius / 3.0).max(1.0);
    let inflate = 0.75 * h;
    let nx = (ws.width() / h) as usize + 1;
    let ny = (ws.height() / h) as usize + 1;
    let cell = |i: usize, j: usize| ws.min + Vec2::new(i as f64 * h, j as f64 * h);
    let cells = nx * ny;
    let free: Vec<bool> = (0..cells)
        .map(|k| clear.point_ok(cell(k % nx, k / nx), inflate))
        .collect();
    let (start, goal) = (cells, cells + 1);
    let pos = |k: usize| match k {
        k if k == start => a,
        k if k == goal => b,
        k => cell(k % nx, k / nx),
    };
    // the terminals link straight to free cells nearby
    let link = 2.0 * clear.radius + 4.0 * h;
    let near = |p: Vec2| -> Vec<usize> {
        let (i0, j0) = (
            libm::floor((p.x - ws.min.x - link) / h).max(0.0) as usize,
            libm::floor((p.y - ws.min.y - link) / h).max(0.0) as usize,
        );
        let (i1, j1) = (
            (libm::ceil((p.x - ws.min.x + link) / h) as usize).min(nx - 1),
            (libm::ceil((p.y - ws.min.y + link) / h) as usize).min(ny - 1),
        );
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                let k = j * nx + i;
                if free[k] && cell(i, j).distance(p) <= link && clear.segment_ok(p, cell(i, j)) {
                    out.push(k);
                }
            }
        }
        out
    };
    let from_start = near(a);
    let to_goal = near(b);

    let mut g = vec![f64::INFINITY; cells + 2];
    let mut parent = vec![usize::MAX; cells + 2];
    let mut heap = BinaryHeap::new();
    g[start] = 0.0;
    heap.push(Open(a.distance(b), start));
    while let Some(Open(_, k)) = heap.pop() {
        if k == goal {
            break;
        }
        let here = pos(k);
        let mut relax = |m: usize, heap: &mut BinaryHeap<Open>| {
            let cost = g[k] + here.distance(pos(m));
            if cost < g[m] {
                g[m] = cost;
                parent[m] = k;
                heap.push(Open(cost + pos(m).distance(b), m));
            }
        };
        if k == start {
            for &m in &from_start {
                relax(m, &mut heap);
            }
            continue;
        }
        let (i, j) = ((k % nx) as i64, (k / nx) as i64);
        for dj in -1..=1i64 {
            for di in -1..=1i64 {
                let (ii, jj) = (i + di, j + dj);
                if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                    continue;
                }
                let m = jj as usize * nx + ii as usize;
                if free[m] {
                    relax(m, &mut heap);
                }
            }
        }
        if to_goal.contains(&k) {
            relax(goal, &mut heap);
        }
    }
    if parent[goal] == usize::MAX {
        return None;
    }
    let mut chain = vec![goal];
    while *chain.last().unwrap() != start {
        chain.push(parent[*chain.last().unwrap()]);
    }
    chain.reverse();
    let pts: Vec<Vec2> = chain.into_iter().map(pos).collect();

    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < pts.len() {
        let mut j = pts.len() - 1;
        while j > i + 1 && !clear.segment_ok(pts[i], pts[j]) {
            j -= 1;
        }
        out.push(pts[j]);
        i = j;
    }
    Some(out)
}

/// Timed vessel positions along a route, one sample per second plus every
/// corner.
fn timed_track(from: Vec2, waypoints: &[Vec2], depart: f64, speed: f64) -> Vec<Sample> {
    let mut out = vec![Sample {
        t: depart,
        pos: from,
    }];
    let mut prev = from;
    let mut t = depart;
    for &w in waypoints {
        let leg = prev.distance(w) / speed;
        let n = libm::ceil(leg).max(1.0) as usize;
        for k in 1..=n {
            let s = k as f64 / n as f64;
            out.push(Sample {
                t: t + s * leg,
                pos: prev.lerp(w, s),
            });
        }
        t += leg;
        prev = w;
    }
    out
}

/// Reroutes vessel transits that would pass within `d_wake` of a drifting
/// float or of the part of its path it has not yet travelled.
///
/// Straight legs that are already clear are kept. Longer routes shift the
/// arrival time; the induced delay of each event is reported, never hidden
/// in the schedule. With `d_wake == 0` every leg stays straight. Every
/// returned route is checked with [`wake_conflicts`].
pub fn plan_wake_safe_transits(
    schedule: &Schedule,
    vessels: &[Vessel],
    actions: &[CandidateAction],
    workspace: Rect,
    d_wake: f64,
) -> Result<Vec<TransitPlan>, PlanError> {
    if !(d_wake >= 0.0) {
        return Err(PlanError::Invalid("wake radius must be non-negative"));
    }
    schedule.validate(vessels, actions)?;
    let planned = schedule_float_windows(schedule, actions);
    // floats as currently known: a pending drop keeps its whole path, an
    // unfinished pick keeps the float in the water
    let mut known: Vec<FloatWindow> = planned
        .iter()
        .map(|w| FloatWindow {
            trajectory: w.trajectory.shifted(PENDING),
            pick_time: f64::INFINITY,
            ..w.clone()
        })
        .collect();
    let mut order: Vec<(usize, usize)> = schedule
        .plans
        .iter()
        .enumerate()
        .flat_map(|(p, plan)| (0..plan.events.len()).map(move |k| (p, k)))
        .collect();
    order.sort_by(|&(p, k), &(q, l)| {
        let (a, b) = (&schedule.plans[p], &schedule.plans[q]);
        a.events[k]
            .time
            .total_cmp(&b.events[l].time)
            .then(a.vessel.cmp(&b.vessel))
            .then(k.cmp(&l))
    });
    let mut state: Vec<(Vec2, f64)> = schedule
        .plans
        .iter()
        .map(|plan| {
            (
                vessels
                    .iter()
                    .find(|v| v.id == plan.vessel)
                    .expect("validated")
                    .start,
                0.0,
            )
        })
        .collect();
    let mut out = Vec::new();
    for (p, k) in order {
        let plan = &schedule.plans[p];
        let v = vessels
            .iter()
            .find(|v| v.id == plan.vessel)
            .expect("validated");
        let e = plan.events[k];
        let (at, now) = state[p];
        let mut waypoints = vec![e.position];
        let mut rerouted = false;
        if d_wake > 0.0 && at != e.position {
            // the float about to be dropped is still aboard
            let others: Vec<FloatWindow> = known
                .iter()
                .filter(|w| !(e.kind == EventKind::Drop && w.action == e.action))
                .cloned()
                .collect();
            let reach = e.time.max(now + at.distance(e.position) / v.speed);
            let active: Vec<&FloatWindow> = others
                .iter()
                .filter(|w| w.pick_time > now && w.drop_time < reach)
                .collect();
            let quick = Clearance::new(&active, now, d_wake, 0.0);
            if !quick.segment_ok(at, e.position) {
                let h = (d_wake / 3.0).max(1.0);
                let clear = Clearance::new(&active, now, d_wake, 0.75 * h);
                waypoints =
                    route(&clear, &workspace, at, e.position).ok_or(PlanError::NoClearPath {
                        from: at,
                        to: e.position,
                    })?;
                rerouted = true;
            }
            let track = timed_track(at, &waypoints, now, v.speed);
            if !wake_conflicts(v.id, &track, &others, d_wake).is_empty() {
                return Err(PlanError::NoClearPath {
                    from: at,
                    to: e.position,
                });
            }
        }
        let mut t = TransitPlan {
            vessel: v.id,
            event: k,
            from: at,
            waypoints,
            depart: now,
            arrive: 0.0,
            scheduled: e.time,
            delay: 0.0,
            rerouted,
        };
        t.arrive = now + t.length() / v.speed;
        let happens = t.arrive.max(e.time);
        t.delay = happens - e.time;
        if let Some(i) = planned.iter().position(|w| w.action == e.action) {
            match e.kind {
                EventKind::Drop => {
                    known[i].drop_time = happens;
                    known[i].trajectory = planned[i]
                        .trajectory
                        .shifted(happens - planned[i].drop_time);
                }
                EventKind::Pick => known[i].pick_time = happens,
            }
        }
        state[p] = (e.position, happens);
        out.push(t);
    }
    out.sort_by_key(|t| {
        (
            schedule.plans.iter().position(|p| p.vessel == t.vessel),
            t.event,
        )
    });
    Ok(out)
}

/// Start time given to the path of a float that has not been dropped yet,
/// so that all of it counts as not yet travelled.
const PENDING: f64 = 1e12;

/// Float windows with drop and pick times moved by the transit delays.
pub fn delayed_float_windows(
    schedule: &Schedule,
    actions: &[CandidateAction],
    transits: &[TransitPlan],
) -> Vec<FloatWindow> {
    let delay = |action: usize, kind: EventKind| {
        schedule
            .plans
            .iter()
            .find_map(|p| {
                let k = p
                    .events
                    .iter()
                    .position(|e| e.action == action && e.kind == kind)?;
                transits
                    .iter()
                    .find(|t| t.vessel == p.vessel && t.event == k)
            })
            .map_or(0.0, |t| t.delay)
    };
    schedule_float_windows(schedule, actions)
        .into_iter()
        .map(|w| {
            let d = delay(w.action, EventKind::Drop);
            FloatWindow {
                trajectory: w.trajectory.shifted(d),
                drop_time: w.drop_time + d,
                pick_time: w.pick_time + delay(w.action, EventKind::Pick),
                ..w
            }
        })
        .collect()
}
