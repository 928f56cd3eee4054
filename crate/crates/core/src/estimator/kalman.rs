use alloc::vec::Vec;

use super::{DrifterTrack, EstimatorError, RawFix};
use crate::geom::Vec2;
use crate::math;

/// Default white-acceleration standard deviation (m/s^2).
pub const DEFAULT_PROCESS_NOISE: f64 = 1e-3;
/// Default GPS position noise (m).
pub const DEFAULT_MEAS_NOISE: f64 = 3.0;

type M2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug)]
struct State {
    x: [f64; 2],
    p: M2,
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn add(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

fn sub(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

fn inv(a: &M2) -> M2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ]
}

fn apply(a: &M2, x: &[f64; 2]) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1],
        a[1][0] * x[0] + a[1][1] * x[1],
    ]
}

fn transition(dt: f64) -> M2 {
    [[1.0, dt], [0.0, 1.0]]
}

fn process_cov(dt: f64, sigma_a: f64) -> M2 {
    let q = sigma_a * sigma_a;
    let (d2, d3, d4) = (dt * dt, dt * dt * dt, dt * dt * dt * dt);
    [[q * d4 / 4.0, q * d3 / 2.0], [q * d3 / 2.0, q * d2]]
}

/// Per-axis constant-velocity RTS smoother. Returns smoothed (position, var)
/// for every time in `times`; `obs[k]` is `None` where no fix arrived.
fn smooth_axis(times: &[f64], obs: &[Option<f64>], sigma_a: f64, r: f64) -> Vec<(f64, f64)> {
    let n = times.len();
    let received: Vec<usize> = (0..n).filter(|&k| obs[k].is_some()).collect();
    let (k0, k1) = (received[0], received[1]);
    let z0 = obs[k0].unwrap();
    let span = times[k1] - times[k0];
    let v0 = (obs[k1].unwrap() - z0) / span;
    // two-point initialisation, anchored at the second received fix
    let start = k1;
    let init = State {
        x: [obs[k1].unwrap(), v0],
        p: [[r, r / span], [r / span, 2.0 * r / (span * span)]],
    };

    let mut pred: Vec<State> = Vec::with_capacity(n);
    let mut filt: Vec<State> = Vec::with_capacity(n);
    for k in 0..n {
        if k < start {
            // filled by back-extrapolation below
            pred.push(init);
            filt.push(init);
            continue;
        }
        let prior = if k == start {
            init
        } else {
            let f = transition(times[k] - times[k - 1]);
            let prev = filt[k - 1];
            State {
                x: apply(&f, &prev.x),
                p: add(
                    &mul(&mul(&f, &prev.p), &transpose(&f)),
                    &process_cov(times[k] - times[k - 1], sigma_a),
                ),
            }
        };
        pred.push(prior);
        let post = match obs[k] {
            Some(z) if k != start => {
                let s = prior.p[0][0] + r;
                let gain = [prior.p[0][0] / s, prior.p[1][0] / s];
                let innov = z - prior.x[0];
                let x = [prior.x[0] + gain[0] * innov, prior.x[1] + gain[1] * innov];
                let p = [
                    [
                        (1.0 - gain[0]) * prior.p[0][0],
                        (1.0 - gain[0]) * prior.p[0][1],
                    ],
                    [
                        prior.p[1][0] - gain[1] * prior.p[0][0],
                        prior.p[1][1] - gain[1] * prior.p[0][1],
                    ],
                ];
                State { x, p }
            }
            _ => prior,
        };
        filt.push(post);
    }

    let mut smooth = filt.clone();
    for k in (start..n - 1).rev() {
        let f = transition(times[k + 1] - times[k]);
        let c = mul(&mul(&filt[k].p, &transpose(&f)), &inv(&pred[k + 1].p));
        let dx = [
            smooth[k + 1].x[0] - pred[k + 1].x[0],
            smooth[k + 1].x[1] - pred[k + 1].x[1],
        ];
        let corr = apply(&c, &dx);
        let x = [filt[k].x[0] + corr[0], filt[k].x[1] + corr[1]];
        let dp = sub(&smooth[k + 1].p, &pred[k + 1].p);
        let p = add(&filt[k].p, &mul(&mul(&c, &dp), &transpose(&c)));
        smooth[k] = State { x, p };
    }
    let anchor = smooth[start];
    for k in 0..start {
        let dt = times[k] - times[start];
        let f = transition(dt);
        smooth[k] = State {
            x: apply(&f, &anchor.x),
            p: add(
                &mul(&mul(&f, &anchor.p), &transpose(&f)),
                &process_cov(dt.abs(), sigma_a),
            ),
        };
    }
    smooth.iter().map(|s| (s.x[0], s.p[0][0])).collect()
}

/// Constant-velocity Kalman filter plus Rauch-Tung-Striebel smoother.
///
/// `process_noise` is the white-acceleration standard deviation (m/s^2) and
/// `meas_noise` the GPS position standard deviation (m). Fixes that were not
/// received are bridged by prediction and come back flagged `interpolated`
/// with their times untouched.
pub fn kalman_smooth(
    track: &DrifterTrack,
    process_noise: f64,
    meas_noise: f64,
) -> Result<DrifterTrack, EstimatorError> {
    track.validate()?;
    let count = track.received_count();
    if count < 2 {
        return Err(EstimatorError::TooFewFixes {
            id: track.id.clone(),
            count,
        });
    }
    let times: Vec<f64> = track.fixes.iter().map(|f| f.time).collect();
    let r = meas_noise * meas_noise;
    let obs_x: Vec<Option<f64>> = track
        .fixes
        .iter()
        .map(|f| f.received.then_some(f.position.x))
        .collect();
    let obs_y: Vec<Option<f64>> = track
        .fixes
        .iter()
        .map(|f| f.received.then_some(f.position.y))
        .collect();
    let sx = smooth_axis(&times, &obs_x, process_noise, r);
    let sy = smooth_axis(&times, &obs_y, process_noise, r);
    let fixes = track
        .fixes
        .iter()
        .zip(sx.iter().zip(&sy))
        .map(|(f, (&(x, vx), &(y, vy)))| RawFix {
            time: f.time,
            position: Vec2::new(x, y),
            noise_std: math::sqrt(0.5 * (vx + vy)).max(f64::MIN_POSITIVE),
            received: f.received,
            interpolated: !f.received,
        })
        .collect();
    Ok(DrifterTrack {
        id: track.id.clone(),
        fixes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn line_track(noise: f64, seed: u64) -> (DrifterTrack, Vec<Vec2>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise.max(1e-300)).unwrap();
        let mut truth = Vec::new();
        let mut fixes = Vec::new();
        for k in 0..=600 {
            let t = k as f64;
            let p = Vec2::new(20.0 + 0.1 * t, 40.0 - 0.05 * t);
            truth.push(p);
            let z = if noise > 0.0 {
                p + Vec2::new(normal.sample(&mut rng), normal.sample(&mut rng))
            } else {
                p
            };
            fixes.push(RawFix::received(t, z, noise.max(1.0)));
        }
        (DrifterTrack::new("d", fixes).unwrap(), truth)
    }

    #[test]
    fn noiseless_line_is_fixed_point() {
        let (track, truth) = line_track(0.0, 1);
        let s = kalman_smooth(&track, 1e-3, 3.0).unwrap();
        for (f, p) in s.fixes.iter().zip(&truth) {
            assert!(
                f.position.distance(*p) < 1e-9,
                "{:?} vs {:?}",
                f.position,
                p
            );
        }
    }

    #[test]
    fn smoothing_reduces_rms_error() {
        // 100 simulated tracks with 3 m GPS noise
        let (mut raw_sq, mut smooth_sq, mut n) = (0.0, 0.0, 0.0);
        for seed in 0..100 {
            let (track, truth) = line_track(3.0, seed);
            let s = kalman_smooth(&track, 1e-3, 3.0).unwrap();
            for ((r, f), p) in track.fixes.iter().zip(&s.fixes).zip(&truth) {
                raw_sq += r.position.distance(*p).powi(2);
                smooth_sq += f.position.distance(*p).powi(2);
                n += 1.0;
            }
        }
        let (raw, smooth) = (math::sqrt(raw_sq / n), math::sqrt(smooth_sq / n));
        assert!(smooth < raw, "smoothed {smooth} raw {raw}");
        assert!(smooth < 0.5 * raw);
    }

    #[test]
    fn gap_is_bridged_and_flagged() {
        let mut fixes = Vec::new();
        for k in 0..=300 {
            let t = k as f64;
            if (100..160).contains(&k) {
                fixes.push(RawFix::dropped(t, 3.0));
            } else {
                fixes.push(RawFix::received(t, Vec2::new(0.1 * t, 0.0), 3.0));
            }
        }
        let track = DrifterTrack::new("gap", fixes).unwrap();
        let s = kalman_smooth(&track, 1e-3, 3.0).unwrap();
        assert_eq!(s.fixes.len(), track.fixes.len());
        for (k, (a, b)) in track.fixes.iter().zip(&s.fixes).enumerate() {
            assert_eq!(a.time, b.time);
            assert_eq!(b.interpolated, (100..160).contains(&k));
            assert_eq!(b.received, a.received);
            assert!(b.position.distance(Vec2::new(0.1 * a.time, 0.0)) < 1e-9);
        }
    }

    #[test]
    fn leading_dropouts_are_extrapolated() {
        let mut fixes = vec![RawFix::dropped(0.0, 3.0), RawFix::dropped(1.0, 3.0)];
        for k in 2..20 {
            fixes.push(RawFix::received(k as f64, Vec2::new(k as f64, 1.0), 3.0));
        }
        let s = kalman_smooth(&DrifterTrack::new("lead", fixes).unwrap(), 1e-3, 3.0).unwrap();
        assert!(s.fixes[0].position.distance(Vec2::new(0.0, 1.0)) < 1e-9);
        assert!(s.fixes[0].interpolated);
    }

    #[test]
    fn too_few_fixes() {
        let fixes = vec![
            RawFix::received(0.0, Vec2::ZERO, 3.0),
            RawFix::dropped(1.0, 3.0),
        ];
        let track = DrifterTrack::new("short", fixes).unwrap();
        assert!(matches!(
            kalman_smooth(&track, 1e-3, 3.0),
            Err(EstimatorError::TooFewFixes { count: 1, .. })
        ));
    }
}
