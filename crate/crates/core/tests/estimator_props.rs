use mvmf_core::estimator::{
    estimate_field, fit_divergence_free_gp, grid_search, kalman_smooth,
    trajectory_prediction_error, EstimationOptions, Hyperparams, Measurement,
};
use mvmf_core::flowfield::{divergence_at, RotatingField, UniformField};
use mvmf_core::sim::{synthesize_tracks, triangle_formation, Deployment};
use mvmf_core::{Rect, Vec2};
use proptest::prelude::*;

fn ws() -> Rect {
    Rect::from_size(390.0, 390.0)
}

fn measurement() -> impl Strategy<Value = Measurement> {
    (20.0..370.0f64, 20.0..370.0f64, -0.2..0.2f64, -0.2..0.2f64).prop_map(|(x, y, u, v)| {
        Measurement {
            position: Vec2::new(x, y),
            velocity: Vec2::new(u, v),
            time: 0.0,
            velocity_noise_std: 0.01,
        }
    })
}

fn hyperparams() -> impl Strategy<Value = Hyperparams> {
    (25.0..200.0f64, 0.05..0.2f64, 0.005..0.02f64)
        .prop_map(|(l, sf, sn)| Hyperparams::new(l, sf, sn))
}

fn point() -> impl Strategy<Value = Vec2> {
    (1.0..389.0f64, 1.0..389.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fitted_fields_are_divergence_free(
        ms in prop::collection::vec(measurement(), 1..40),
        hp in hyperparams(),
        pts in prop::collection::vec(point(), 100),
    ) {
        let f = fit_divergence_free_gp(&ms, hp, ws()).unwrap();
        for p in pts {
            let d = divergence_at(&f, p, 0.0, 0.01).unwrap();
            prop_assert!(d.abs() < 1e-6, "div {d:e} at {p:?}");
        }
    }

    #[test]
    fn posterior_mean_interpolates_as_noise_vanishes(
        ms in prop::collection::vec(measurement(), 1..8),
        l in 25.0..60.0f64,
    ) {
        // well separated inputs keep the noiseless Gram matrix conditioned
        for (i, a) in ms.iter().enumerate() {
            for b in &ms[..i] {
                prop_assume!(a.position.distance(b.position) > 2.0 * l);
            }
        }
        let err = |sn: f64| {
            let f = fit_divergence_free_gp(&ms, Hyperparams::new(l, 0.1, sn), ws()).unwrap();
            ms.iter().map(|m| f.mean(m.position).distance(m.velocity)).fold(0.0, f64::max)
        };
        let (loose, tight) = (err(0.05), err(1e-4));
        prop_assert!(tight <= loose + 1e-12);
        prop_assert!(tight < 1e-3, "residual {tight:e}");
    }

    #[test]
    fn another_measurement_never_raises_covariance(
        ms in prop::collection::vec(measurement(), 1..20),
        extra in measurement(),
        hp in hyperparams(),
        pts in prop::collection::vec(point(), 10),
    ) {
        let before = fit_divergence_free_gp(&ms, hp, ws()).unwrap();
        let mut more = ms.clone();
        more.push(extra);
        let after = fit_divergence_free_gp(&more, hp, ws()).unwrap();
        for p in pts {
            prop_assert!(after.covariance_trace(p) <= before.covariance_trace(p) + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn grid_search_returns_the_minimum(seed in 0u64..1000, heading in 0.0..std::f64::consts::TAU) {
        let truth = UniformField::new(ws(), Vec2::from_polar(0.1, heading));
        let starts = triangle_formation(Vec2::new(195.0, 195.0), 60.0).to_vec();
        let tracks = synthesize_tracks(&truth, &Deployment::new(starts, 600.0), seed).unwrap().tracks;
        let opts = EstimationOptions::new(ws());
        let smoothed: Vec<_> = tracks.iter().map(|t| kalman_smooth(t, opts.process_noise, opts.meas_noise).unwrap()).collect();
        let out = grid_search(&smoothed, &opts.grid, "d2", &opts).unwrap();
        for s in &out.scores {
            prop_assert!(out.best_score <= s.score.unwrap());
        }
    }

    #[test]
    fn quasi_static_error_grows_with_start_delay(seed in 0u64..1000) {
        let truth = RotatingField::from_degrees_per_hour(UniformField::new(ws(), Vec2::new(0.1, 0.0)), 15.0);
        let center = Vec2::new(150.0, 195.0);
        let starts = triangle_formation(center, 60.0).to_vec();
        let tracks = synthesize_tracks(&truth, &Deployment::new(starts, 600.0), seed).unwrap().tracks;
        let est = estimate_field(&tracks, &EstimationOptions::new(ws())).unwrap().field;
        let error_at = |t0: f64| {
            let dep = Deployment { t0, ..Deployment::new(vec![center], 600.0) };
            let track = &synthesize_tracks(&truth, &dep, seed + 1).unwrap().tracks[0];
            trajectory_prediction_error(&est, track, 1.0).unwrap()
        };
        let (one_hour, two_hours) = (error_at(3600.0), error_at(7200.0));
        prop_assert!(two_hours > one_hour, "{one_hour} vs {two_hours}");
    }
}
