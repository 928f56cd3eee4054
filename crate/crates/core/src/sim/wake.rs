use alloc::vec::Vec;

use crate::flowfield::{Sample, Trajectory};
use crate::geom::{closest_on_segment, closest_points_segments, segment_disk_overlap, Rect, Vec2};

/// Phenomenological vessel wake.
///
/// A float whose position came within `radius` of a moving vessel during
/// the last `persistence` seconds has its current velocity scaled by
/// `1 - stall` and is pushed away from the vessel's path at `push` m/s.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WakeModel {
    pub radius: f64,
    pub persistence: f64,
    pub stall: f64,
    pub push: f64,
}

impl Default for WakeModel {
    fn default() -> Self {
        Self {
            radius: 15.0,
            persistence: 120.0,
            stall: 0.5,
            push: 0.02,
        }
    }
}

impl WakeModel {
    pub fn is_valid(&self) -> bool {
        self.radius >= 0.0
            && self.persistence >= 0.0
            && (0.0..=1.0).contains(&self.stall)
            && self.push >= 0.0
    }
}

/// Wake correction (m/s) to add to a float's current velocity `base`.
///
/// Only segments where the vessel moved count; a stationary vessel leaves
/// no wake. Returns zero when no such segment in `[t - persistence, t]`
/// came within the wake radius of `float_pos`.
pub fn wake_perturbation(
    track: &[Sample],
    float_pos: Vec2,
    t: f64,
    wm: &WakeModel,
    base: Vec2,
) -> Vec2 {
    let since = t - wm.persistence;
    let start = track.partition_point(|s| s.t < since).saturating_sub(1);
    let mut nearest: Option<(f64, Vec2, Vec2)> = None;
    for w in track[start..].windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.t > t {
            break;
        }
        if b.t < since || a.pos == b.pos {
            continue;
        }
        let (q, _) = closest_on_segment(float_pos, a.pos, b.pos);
        let d = q.distance(float_pos);
        if d <= wm.radius && nearest.is_none_or(|n| d < n.0) {
            nearest = Some((d, q, b.pos - a.pos));
        }
    }
    let Some((_, q, heading)) = nearest else {
        return Vec2::ZERO;
    };
    let away = (float_pos - q)
        .normalized()
        .or_else(|| heading.perp().normalized())
        .unwrap_or(Vec2::ZERO);
    base * -wm.stall + away * wm.push
}

/// A float in the water between its drop and pick times, with its
/// predicted drift in absolute time.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatWindow {
    pub action: usize,
    pub trajectory: Trajectory,
    pub drop_time: f64,
    pub pick_time: f64,
    /// The float's own drop and pick positions; its path near them is not
    /// protected.
    pub exempt: [Vec2; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WakeConflict {
    pub vessel: usize,
    pub action: usize,
    pub time: f64,
    pub vessel_pos: Vec2,
    pub distance: f64,
}

/// Extra clearance around the exempt disks so that trimmed path ends sit
/// strictly outside the wake radius.
pub(crate) const TRIM_SLACK: f64 = 1e-6;

/// Pieces of `path` farther than `radius` from both exempt points.
///
/// A float is never disturbed by its own vessel near its drop and pick
/// positions, so those stretches of its path impose no constraint.
pub(crate) fn trimmed_path(path: &[Vec2], exempt: &[Vec2; 2], radius: f64) -> Vec<(Vec2, Vec2)> {
    let mut out = Vec::new();
    if path.len() == 1 {
        if exempt.iter().all(|e| e.distance(path[0]) >= radius) {
            out.push((path[0], path[0]));
        }
        return out;
    }
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut cut: Vec<(f64, f64)> = exempt
            .iter()
            .filter_map(|&e| segment_disk_overlap(a, b, e, radius))
            .collect();
        cut.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut s = 0.0;
        for (c0, c1) in cut {
            if c0 > s {
                out.push((a.lerp(b, s), a.lerp(b, c0)));
            }
            s = s.max(c1);
        }
        if s < 1.0 {
            out.push((a.lerp(b, s), b));
        }
    }
    out
}

/// Moving vessel positions, while a float is adrift, closer than `radius`
/// to that float's not yet travelled path (its current position included).
///
/// The parts of that path within `radius` of the float's own drop or pick
/// position are left out. Distances are exact segment-to-segment; at most
/// one conflict (the closest approach) is reported per float and vessel
/// segment.
pub fn wake_conflicts(
    vessel: usize,
    track: &[Sample],
    floats: &[FloatWindow],
    radius: f64,
) -> Vec<WakeConflict> {
    let mut out = Vec::new();
    if radius <= 0.0 {
        return out;
    }
    for f in floats {
        let path_box = bounding_box(&f.trajectory.samples, radius);
        for w in track.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.pos == b.pos || b.t < f.drop_time || a.t > f.pick_time {
                continue;
            }
            // only the part of the segment while the float is adrift
            let (t0, t1) = (a.t.max(f.drop_time), b.t.min(f.pick_time));
            let at = |t: f64| {
                if b.t > a.t {
                    a.pos.lerp(b.pos, (t - a.t) / (b.t - a.t))
                } else {
                    a.pos
                }
            };
            let (p0, p1) = (at(t0), at(t1));
            if !segment_may_touch(p0, p1, &path_box) {
                continue;
            }
            let remaining = f.trajectory.remaining_path(t0);
            let pieces = trimmed_path(&remaining, &f.exempt, radius + TRIM_SLACK);
            let mut best: Option<(Vec2, f64)> = None;
            for (q0, q1) in pieces {
                let (pv, _, d) = closest_points_segments(p0, p1, q0, q1);
                if d < radius && best.is_none_or(|x| d < x.1) {
                    best = Some((pv, d));
                }
            }
            if let Some((pv, d)) = best {
                let len = p0.distance(p1);
                let s = if len > 0.0 {
                    pv.distance(p0) / len
                } else {
                    0.0
                };
                out.push(WakeConflict {
                    vessel,
                    action: f.action,
                    time: t0 + s * (t1 - t0),
                    vessel_pos: pv,
                    distance: d,
                });
            }
        }
    }
    out.sort_by(|x, y| x.time.total_cmp(&y.time).then(x.action.cmp(&y.action)));
    out
}

fn bounding_box(samples: &[Sample], pad: f64) -> Rect {
    let mut r = Rect::new(samples[0].pos, samples[0].pos);
    for s in samples {
        r.min = Vec2::new(r.min.x.min(s.pos.x), r.min.y.min(s.pos.y));
        r.max = Vec2::new(r.max.x.max(s.pos.x), r.max.y.max(s.pos.y));
    }
    Rect::new(r.min - Vec2::new(pad, pad), r.max + Vec2::new(pad, pad))
}

fn segment_may_touch(a: Vec2, b: Vec2, r: &Rect) -> bool {
    !(a.x.max(b.x) < r.min.x
        || a.x.min(b.x) > r.max.x
        || a.y.max(b.y) < r.min.y
        || a.y.min(b.y) > r.max.y)
}

/// Builds the float windows of a schedule from its actions.
pub fn schedule_float_windows(
    schedule: &crate::planner::Schedule,
    actions: &[crate::planner::CandidateAction],
) -> Vec<FloatWindow> {
    use crate::planner::EventKind;
    let mut out = Vec::new();
    for (_, drop) in schedule.events().filter(|(_, e)| e.kind == EventKind::Drop) {
        let Some(act) = actions.iter().find(|a| a.id == drop.action) else {
            continue;
        };
        let Some((_, pick)) = schedule.event(drop.action, EventKind::Pick) else {
            continue;
        };
        out.push(FloatWindow {
            action: act.id,
            trajectory: act.trajectory.shifted(drop.time),
            drop_time: drop.time,
            pick_time: pick.time,
            exempt: [act.drop, act.pick],
        });
    }
    out
}
