use alloc::vec::Vec;

use crate::flowfield::Sample;
use crate::geom::{segment_intersection, Vec2};

/// A point where two tracks intersect, with the time each passed it.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Crossing {
    pub position: Vec2,
    pub t_a: f64,
    pub t_b: f64,
    /// Segment indices in each track.
    pub segment_a: usize,
    pub segment_b: usize,
}

impl Crossing {
    /// Both tracks were at the crossing within `dt` of each other.
    pub fn is_simultaneous(&self, dt: f64) -> bool {
        (self.t_a - self.t_b).abs() <= dt
    }
}

/// Every intersection between the polylines of two tracks.
///
/// A crossing exactly at a shared vertex is reported once. Collinear
/// overlaps are not crossings.
pub fn detect_crossings(a: &[Sample], b: &[Sample]) -> Vec<Crossing> {
    let mut out = Vec::new();
    let (na, nb) = (a.len().saturating_sub(1), b.len().saturating_sub(1));
    for i in 0..na {
        let (p0, p1) = (a[i], a[i + 1]);
        let (ax0, ax1) = (p0.pos.x.min(p1.pos.x), p0.pos.x.max(p1.pos.x));
        let (ay0, ay1) = (p0.pos.y.min(p1.pos.y), p0.pos.y.max(p1.pos.y));
        for j in 0..nb {
            let (q0, q1) = (b[j], b[j + 1]);
            if q0.pos.x.max(q1.pos.x) < ax0
                || q0.pos.x.min(q1.pos.x) > ax1
                || q0.pos.y.max(q1.pos.y) < ay0
                || q0.pos.y.min(q1.pos.y) > ay1
            {
                continue;
            }
            let Some((s, u)) = segment_intersection(p0.pos, p1.pos, q0.pos, q1.pos) else {
                continue;
            };
            // half-open segments, except the last one of each track
            if (s == 1.0 && i + 1 < na) || (u == 1.0 && j + 1 < nb) {
                continue;
            }
            out.push(Crossing {
                position: p0.pos.lerp(p1.pos, s),
                t_a: p0.t + s * (p1.t - p0.t),
                t_b: q0.t + u * (q1.t - q0.t),
                segment_a: i,
                segment_b: j,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(from: Vec2, to: Vec2, n: usize) -> Vec<Sample> {
        (0..=n)
            .map(|k| Sample {
                t: k as f64,
                pos: from.lerp(to, k as f64 / n as f64),
            })
            .collect()
    }

    #[test]
    fn parallel_tracks_never_cross() {
        let a = line(Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0), 10);
        let b = line(Vec2::new(0.0, 5.0), Vec2::new(100.0, 5.0), 10);
        assert!(detect_crossings(&a, &b).is_empty());
    }

    #[test]
    fn x_shape_crosses_once_at_the_intersection() {
        let a = line(Vec2::new(0.0, 0.0), Vec2::new(100.0, 100.0), 7);
        let b = line(Vec2::new(0.0, 100.0), Vec2::new(100.0, 0.0), 9);
        let c = detect_crossings(&a, &b);
        assert_eq!(c.len(), 1);
        assert!((c[0].position - Vec2::new(50.0, 50.0)).norm() < 1e-9);
        assert!((c[0].t_a - 3.5).abs() < 1e-9);
        assert!((c[0].t_b - 4.5).abs() < 1e-9);
        assert!(c[0].is_simultaneous(1.0) && !c[0].is_simultaneous(0.5));
    }

    #[test]
    fn crossing_at_a_vertex_counts_once() {
        // both tracks have a vertex at (50, 50)
        let a = line(Vec2::new(0.0, 0.0), Vec2::new(100.0, 100.0), 2);
        let b = line(Vec2::new(0.0, 100.0), Vec2::new(100.0, 0.0), 2);
        assert_eq!(detect_crossings(&a, &b).len(), 1);
    }
}
