//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mvmf::formats::PlanFile;
use mvmf::pipeline::{self, PlanArgs, SimulateArgs};
use mvmf::Scenario;
use mvmf_core::estimator::{estimate_field, EstimationOptions};
use mvmf_core::flowfield::{
    divergence_at, incompressibility_report, integrate_trajectory, position_at, Eddy,
    GaussianEddies, LangmuirField, RotatingField, Sample, SingleGyre, SolidBodyRotation,
    StreamField, Trajectory, UniformField,
};
use mvmf_core::planner::{
    coverage_of, exhaustive_schedule, greedy_set_cover, makespan, sample_actions, schedule_decmcts,
    select_actions_mcts, CandidateAction, PlannerConfig, Poi, Vessel,
};
use mvmf_core::sim::{detect_crossings, synthesize_tracks, triangle_formation, Deployment};
use mvmf_core::{FlowField, Rect, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ws() -> Rect {
    Rect::from_size(390.0, 390.0)
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Writes `toml` as a scenario in `dir` and loads it.
fn scenario(dir: &Path, name: &str, toml: &str) -> Scenario {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, toml).unwrap();
    Scenario::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

// 1. Estimator fidelity

const C1_ARC_FRACTION: f64 = 0.15;
const C1_RUNTIME: Duration = Duration::from_secs(60);

fn estimator_fidelity() -> Check {
    let truth = StreamField::new(ws(), SingleGyre::with_peak_speed(ws(), 0.15));
    let center = Vec2::new(110.0, 195.0);
    let mut lines = Vec::new();
    let mut ok = true;
    for seed in 0..3u64 {
        let start = Instant::now();
        let dep = Deployment {
            gps_noise: 3.0,
            ..Deployment::new(triangle_formation(center, 60.0).to_vec(), 600.0)
        };
        let tracks = synthesize_tracks(&truth, &dep, seed)
            .map_err(|e| e.to_string())?
            .tracks;
        let est = estimate_field(&tracks, &EstimationOptions::new(ws()))
            .map_err(|e| e.to_string())?
            .field;
        // a fourth drift, never seen by the estimator, from the formation centroid
        let actual =
            integrate_trajectory(&truth, center, 0.0, 600.0, 1.0).map_err(|e| e.to_string())?;
        let predicted =
            integrate_trajectory(&est, center, 0.0, 600.0, 1.0).map_err(|e| e.to_string())?;
        let err = actual
            .samples
            .iter()
            .map(|s| position_at(&predicted.samples, s.t).distance(s.pos))
            .sum::<f64>()
            / actual.samples.len() as f64;
        let arc: f64 = actual
            .samples
            .windows(2)
            .map(|w| w[0].pos.distance(w[1].pos))
            .sum();
        let took = start.elapsed();
        ok &= err < C1_ARC_FRACTION * arc && took < C1_RUNTIME;
        lines.push(format!(
            "seed {seed}: {err:.2} m of {arc:.1} m arc ({:.1}%) in {:.1} s",
            100.0 * err / arc,
            took.as_secs_f64()
        ));
    }
    ensure(ok, lines.join("; "))
}

// 2. Incompressibility guarantee

const C2_TOL: f64 = 1e-6;
const C2_POINTS: usize = 100;
const C2_STENCIL: f64 = 0.01;

fn incompressibility_guarantee() -> Check {
    let eddies = StreamField::new(
        ws(),
        GaussianEddies {
            eddies: vec![
                Eddy {
                    center: Vec2::new(120.0, 150.0),
                    radius: 70.0,
                    strength: 5.0,
                },
                Eddy {
                    center: Vec2::new(270.0, 240.0),
                    radius: 90.0,
                    strength: -6.0,
                },
            ],
        },
    );
    let truths: Vec<(&str, Box<dyn FlowField>)> = vec![
        (
            "gyre",
            Box::new(StreamField::new(
                ws(),
                SingleGyre::with_peak_speed(ws(), 0.15),
            )),
        ),
        ("eddies", Box::new(eddies)),
        (
            "uniform",
            Box::new(UniformField::new(ws(), Vec2::new(0.08, -0.05))),
        ),
        (
            "solid body",
            Box::new(SolidBodyRotation {
                workspace: ws(),
                center: Vec2::new(195.0, 195.0),
                omega: 8e-4,
            }),
        ),
        (
            "veering",
            Box::new(RotatingField::from_degrees_per_hour(
                UniformField::new(ws(), Vec2::new(0.1, 0.0)),
                15.0,
            )),
        ),
        (
            "langmuir",
            Box::new(LangmuirField::new(ws(), 0.05, 0.05, 50.0, 195.0, 0.0).unwrap()),
        ),
    ];
    let mut worst = 0.0f64;
    let mut violations = 0;
    let mut fits = 0;
    for (k, (_, truth)) in truths.iter().enumerate() {
        for seed in 0..2u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 * k as u64 + seed);
            let center = Vec2::new(
                rng.random_range(120.0..270.0),
                rng.random_range(120.0..270.0),
            );
            let dep = Deployment::new(triangle_formation(center, 60.0).to_vec(), 600.0);
            let tracks = synthesize_tracks(truth, &dep, seed)
                .map_err(|e| e.to_string())?
                .tracks;
            let field = estimate_field(&tracks, &EstimationOptions::new(ws()))
                .map_err(|e| e.to_string())?
                .field;
            fits += 1;
            for _ in 0..C2_POINTS {
                let p = Vec2::new(rng.random_range(1.0..389.0), rng.random_range(1.0..389.0));
                let d = divergence_at(&field, p, 0.0, C2_STENCIL)
                    .map_err(|e| e.to_string())?
                    .abs();
                worst = worst.max(d);
                violations += (d >= C2_TOL) as usize;
            }
        }
    }
    ensure(
        violations == 0,
        format!(
            "{fits} fits x {C2_POINTS} points, max |div| {worst:.2e} /s, {violations} violations"
        ),
    )
}

// 3. Planner optimality on small instances

const C3_RATIO: f64 = 1.05;
const C3_REQUIRED: usize = 19;
const C3_RUNTIME: Duration = Duration::from_secs(60);

fn straight(id: usize, drop: Vec2, v: Vec2, t: f64) -> CandidateAction {
    let samples = (0..=t as usize)
        .map(|k| Sample {
            t: k as f64,
            pos: drop + v * k as f64,
        })
        .collect();
    CandidateAction::from_trajectory(
        id,
        Trajectory {
            dt: 1.0,
            samples,
            truncated: false,
        },
        &[],
    )
}

fn random_instance(
    rng: &mut ChaCha8Rng,
    n_vessels: usize,
    n_actions: usize,
) -> (Vec<Vessel>, Vec<CandidateAction>) {
    let pos = |rng: &mut ChaCha8Rng| {
        Vec2::new(rng.random_range(40.0..350.0), rng.random_range(40.0..350.0))
    };
    let vessels = (0..n_vessels)
        .map(|id| Vessel {
            id,
            start: pos(rng),
            speed: rng.random_range(1.0..3.0),
            capacity: rng.random_range(1..3),
        })
        .collect();
    let actions = (0..n_actions)
        .map(|id| {
            let v = Vec2::from_polar(0.05, rng.random_range(0.0..std::f64::consts::TAU));
            straight(id, pos(rng), v, rng.random_range(200.0..600.0))
        })
        .collect();
    (vessels, actions)
}

fn planner_optimality() -> Check {
    let field = UniformField::new(ws(), Vec2::ZERO);
    let mut within = 0;
    let mut worst = 1.0f64;
    let mut slowest = Duration::ZERO;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=4);
        let (vessels, actions) = random_instance(&mut rng, 2, n);
        let start = Instant::now();
        let cfg = PlannerConfig {
            seed,
            unattended_penalty: 0.0,
            ..PlannerConfig::default()
        };
        let dec = makespan(
            &schedule_decmcts(&vessels, &actions, &field, &cfg).map_err(|e| e.to_string())?,
        );
        let exact = makespan(&exhaustive_schedule(&vessels, &actions).map_err(|e| e.to_string())?);
        slowest = slowest.max(start.elapsed());
        worst = worst.max(dec / exact);
        within += (dec <= C3_RATIO * exact) as usize;
    }
    let mut exact_single = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.random_range(1..=2);
        let (vessels, actions) = random_instance(&mut rng, 1, n);
        let start = Instant::now();
        let cfg = PlannerConfig {
            seed,
            unattended_penalty: 0.0,
            ..PlannerConfig::default()
        };
        let dec = makespan(
            &schedule_decmcts(&vessels, &actions, &field, &cfg).map_err(|e| e.to_string())?,
        );
        let exact = makespan(&exhaustive_schedule(&vessels, &actions).map_err(|e| e.to_string())?);
        slowest = slowest.max(start.elapsed());
        exact_single += ((dec - exact).abs() < 1e-9) as usize;
    }
    ensure(
        within >= C3_REQUIRED && exact_single == 20 && slowest < C3_RUNTIME,
        format!(
            "two vessels: {within}/20 within {C3_RATIO}x (worst {worst:.4}); one vessel: {exact_single}/20 exact; slowest instance {:.2} s",
            slowest.as_secs_f64()
        ),
    )
}

// 4. Coverage selection

fn coverage_selection() -> Check {
    let field = StreamField::new(
        ws(),
        GaussianEddies {
            eddies: vec![Eddy {
                center: Vec2::new(195.0, 195.0),
                radius: 90.0,
                strength: 6.0,
            }],
        },
    );
    let mut at_least = 0;
    let mut totals = (0, 0);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pois: Vec<Poi> = (0..10)
            .map(|id| Poi {
                id,
                position: Vec2::new(rng.random_range(40.0..350.0), rng.random_range(40.0..350.0)),
                r_obs: 15.0,
            })
            .collect();
        let actions = sample_actions(&field, ws().shrink(20.0).unwrap(), 200, 600.0, &pois, seed)
            .map_err(|e| e.to_string())?;
        let cfg = PlannerConfig {
            seed,
            ..PlannerConfig::default()
        };
        let mcts = coverage_of(
            &select_actions_mcts(&actions, &pois, 5, &cfg).map_err(|e| e.to_string())?,
            &pois,
        );
        let greedy: Vec<CandidateAction> = greedy_set_cover(&actions, &pois, 5, false)
            .into_iter()
            .map(|i| actions[i].clone())
            .collect();
        let greedy = coverage_of(&greedy, &pois);
        at_least += (mcts >= greedy) as usize;
        totals.0 += mcts;
        totals.1 += greedy;
    }
    ensure(
        at_least == 20,
        format!(
            "MCTS >= greedy on {at_least}/20; POIs covered {} vs {}",
            totals.0, totals.1
        ),
    )
}

// 5. Wake reproduction

const WAKE_SCENARIO: &str = r#"
seed = 3
[workspace]
width = 390.0
height = 390.0
[truth]
kind = "uniform"
velocity = [0.1, 0.0]
[planner]
drops = [[145.0, 195.0], [135.0, 345.0]]
[[vessels]]
start = [135.0, 375.0]
speed = 1.2
capacity = 2
[sim]
wake = true
"#;

fn wake_reproduction(dir: &Path) -> Check {
    let sc = scenario(dir, "wake", WAKE_SCENARIO);
    let dt = sc.sim.dt;
    let e = |e: mvmf::CliError| e.to_string();
    let plain = dir.join("wake-plain");
    pipeline::plan(
        &sc,
        &PlanArgs {
            out_dir: plain.clone(),
            wake_safe: Some(false),
            ..PlanArgs::default()
        },
    )
    .map_err(e)?;
    let run = |wake: bool, plan_dir: &Path, tag: &str| {
        let args = SimulateArgs {
            plan: plan_dir.join(pipeline::PLAN_FILE),
            out_dir: dir.join(tag),
            wake: Some(wake),
            ..SimulateArgs::default()
        };
        pipeline::simulate(&sc, &args).map(|(_, r)| r).map_err(e)
    };
    let on = run(true, &plain, "wake-on")?;
    let off = run(false, &plain, "wake-off")?;
    // the drifter the vessel cut across is the one picked up late
    let hit = on
        .tardiness
        .actions
        .iter()
        .max_by(|a, b| {
            a.pick
                .unwrap_or(f64::INFINITY)
                .total_cmp(&b.pick.unwrap_or(f64::INFINITY))
        })
        .unwrap();
    let progress = |r: &mvmf::formats::MissionReport| {
        r.deviations
            .iter()
            .find(|d| d.action == hit.action)
            .map(|d| d.progress)
            .unwrap_or(f64::NAN)
    };
    let (p_on, p_off) = (progress(&on), progress(&off));
    let late = hit.pick.unwrap_or(f64::INFINITY);

    let safe = dir.join("wake-safe");
    pipeline::plan(
        &sc,
        &PlanArgs {
            out_dir: safe.clone(),
            wake_safe: Some(true),
            ..PlanArgs::default()
        },
    )
    .map_err(e)?;
    let guarded = run(true, &safe, "wake-safe-run")?;
    let worst = guarded
        .tardiness
        .actions
        .iter()
        .map(|a| a.drop.max(a.pick.unwrap_or(f64::INFINITY)))
        .fold(0.0, f64::max);
    ensure(
        on.detours > 0 && late > 0.0 && p_on < p_off && guarded.wake_conflicts.is_empty() && worst <= dt,
        format!(
            "wake on: {} detours, action {} pick {late:.2} s late, progress {p_on:.2} m vs {p_off:.2} m wake off; \
             wake-safe: {} conflicts, worst tardiness {worst:.3} s (dt {dt} s)",
            on.detours,
            hit.action,
            guarded.wake_conflicts.len()
        ),
    )
}

// 6. Quasi-static window

const VEER_SCENARIO: &str = r#"
seed = 11
truth_rotation_deg_per_hour = 15.0
[workspace]
width = 390.0
height = 390.0
[truth]
kind = "uniform"
velocity = [0.1, 0.0]
# drops on two of the release points of the estimation drifters
[deployment]
center = [155.0, 195.0]
[planner]
drops = [[125.0, 177.68], [155.0, 229.64]]
[[vessels]]
start = [140.0, 205.0]
speed = 2.0
capacity = 2
[sim]
wake = false
"#;

const C6_AT_ZERO: f64 = 1.0;

fn quasi_static_window(dir: &Path) -> Check {
    let sc = scenario(dir, "veer", VEER_SCENARIO);
    let e = |e: mvmf::CliError| e.to_string();
    let est = dir.join("veer-estimate");
    pipeline::estimate(
        &sc,
        &pipeline::EstimateArgs {
            synthesize: true,
            out_dir: est.clone(),
            ..Default::default()
        },
    )
    .map_err(e)?;
    let plan_dir = dir.join("veer-plan");
    pipeline::plan(
        &sc,
        &PlanArgs {
            field: Some(est.join(pipeline::FIELD_FILE)),
            out_dir: plan_dir.clone(),
            ..PlanArgs::default()
        },
    )
    .map_err(e)?;
    let mut dev = Vec::new();
    for delay in [0.0, 3600.0, 7200.0] {
        let args = SimulateArgs {
            plan: plan_dir.join(pipeline::PLAN_FILE),
            out_dir: dir.join(format!("veer-{delay}")),
            start_delay: Some(delay),
            ..SimulateArgs::default()
        };
        dev.push(pipeline::simulate(&sc, &args).map_err(e)?.1.mean_deviation);
    }
    ensure(
        dev[2] > dev[1] && dev[0] < C6_AT_ZERO,
        format!(
            "mean deviation {:.2} m at 0 s, {:.2} m at 3600 s, {:.2} m at 7200 s",
            dev[0], dev[1], dev[2]
        ),
    )
}

// 7. Langmuir crossings

const LANGMUIR_SCENARIO: &str = r#"
seed = 5
[workspace]
width = 390.0
height = 390.0
[truth]
kind = "langmuir"
along_wind_speed = 0.05
cross_amplitude = 0.1
wavelength = 50.0
phase = 195.0
[planner]
drops = [[60.0, 185.0], [60.0, 205.0]]
drift_duration = 600.0
[[vessels]]
start = [60.0, 185.0]
speed = 2.0
capacity = 1
[[vessels]]
start = [60.0, 205.0]
speed = 2.0
capacity = 1
[sim]
wake = false
"#;

const C7_DIV_TOL: f64 = 0.10;

fn langmuir_crossings(dir: &Path) -> Check {
    let sc = scenario(dir, "langmuir", LANGMUIR_SCENARIO);
    let e = |e: mvmf::CliError| e.to_string();
    let plan_dir = dir.join("langmuir");
    pipeline::plan(
        &sc,
        &PlanArgs {
            out_dir: plan_dir.clone(),
            ..PlanArgs::default()
        },
    )
    .map_err(e)?;
    let args = SimulateArgs {
        plan: plan_dir.join(pipeline::PLAN_FILE),
        out_dir: plan_dir,
        ..SimulateArgs::default()
    };
    let (log, report) = pipeline::simulate(&sc, &args).map_err(e)?;
    // crossings while both drift, within 600 s of release
    let t0 = log
        .events
        .iter()
        .map(|e| e.time)
        .fold(f64::INFINITY, f64::min);
    let early = report
        .crossings
        .iter()
        .filter(|c| c.t_a.max(c.t_b) <= t0 + 600.0)
        .count();

    let field = LangmuirField::new(ws(), 0.05, 0.1, 50.0, 195.0, 0.0).unwrap();
    let analytic = field.peak_divergence();
    let flagged = incompressibility_report(&field, &ws().shrink(1.0).unwrap(), 1.0, 0.0, C2_TOL)
        .map_err(|e| e.to_string())?;
    let rel = (flagged.max_abs_divergence - analytic).abs() / analytic;

    // no crossings between noise-free drifts in steady divergence-free fields
    let mut converse = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pos = || Vec2::new(rng.random_range(80.0..310.0), rng.random_range(80.0..310.0));
        let a = pos();
        let b = a + Vec2::from_polar(20.0, seed as f64);
        let field: Box<dyn FlowField> = match seed % 4 {
            0 => Box::new(StreamField::new(
                ws(),
                SingleGyre::with_peak_speed(ws(), 0.15),
            )),
            1 => Box::new(SolidBodyRotation {
                workspace: ws(),
                center: pos(),
                omega: 5e-4,
            }),
            2 => Box::new(UniformField::new(ws(), Vec2::from_polar(0.1, seed as f64))),
            _ => Box::new(StreamField::new(
                ws(),
                GaussianEddies {
                    eddies: vec![
                        Eddy {
                            center: pos(),
                            radius: 80.0,
                            strength: 5.0,
                        },
                        Eddy {
                            center: pos(),
                            radius: 60.0,
                            strength: -4.0,
                        },
                    ],
                },
            )),
        };
        let ta = integrate_trajectory(&field, a, 0.0, 600.0, 1.0).map_err(|e| e.to_string())?;
        let tb = integrate_trajectory(&field, b, 0.0, 600.0, 1.0).map_err(|e| e.to_string())?;
        converse += detect_crossings(&ta.samples, &tb.samples).len();
    }
    ensure(
        early >= 1 && !flagged.is_incompressible() && rel < C7_DIV_TOL && converse == 0,
        format!(
            "{early} crossings within 600 s; max |div| {:.5} /s vs 2piA/lambda {analytic:.5} /s ({:.2}% off); \
             divergence-free fields: {converse} crossings in 20 runs",
            flagged.max_abs_divergence,
            100.0 * rel
        ),
    )
}

// 8. Closed-loop consistency

const CLOSED_LOOP_SCENARIO: &str = r#"
seed = 2
[workspace]
width = 390.0
height = 390.0
[truth]
kind = "single_gyre"
peak_speed = 0.15
[planner]
samples = 60
budget = 3
region = [[40.0, 40.0], [350.0, 350.0]]
[[vessels]]
start = [20.0, 20.0]
speed = 2.0
capacity = 2
[[vessels]]
start = [370.0, 370.0]
speed = 2.0
capacity = 1
[[pois]]
position = [100.0, 100.0]
r_obs = 25.0
[[pois]]
position = [290.0, 120.0]
r_obs = 25.0
[[pois]]
position = [195.0, 300.0]
r_obs = 25.0
[sim]
wake = false
gps_noise = 0.0
velocity_noise = 0.0
"#;

const C8_TRACK_TOL: f64 = 0.5;

fn closed_loop(dir: &Path) -> Check {
    let sc = scenario(dir, "closed", CLOSED_LOOP_SCENARIO);
    let e = |e: mvmf::CliError| e.to_string();
    let out = dir.join("closed");
    let plan = pipeline::plan(
        &sc,
        &PlanArgs {
            out_dir: out.clone(),
            ..PlanArgs::default()
        },
    )
    .map_err(e)?;
    let args = SimulateArgs {
        plan: out.join(pipeline::PLAN_FILE),
        out_dir: out,
        ..SimulateArgs::default()
    };
    let (log, report) = pipeline::simulate(&sc, &args).map_err(e)?;
    let tardy = report
        .tardiness
        .actions
        .iter()
        .map(|a| a.drop.max(a.pick.unwrap_or(f64::INFINITY)))
        .fold(0.0, f64::max);
    let mut gap = 0.0f64;
    let mut compared = 0;
    for d in &log.drifts {
        let a = plan
            .actions
            .iter()
            .find(|a| a.id == d.action)
            .ok_or("drift of an unplanned action")?;
        let t0 = d.samples[0].t;
        let planned = a.trajectory.shifted(t0);
        for s in d.samples.iter().filter(|s| s.t - t0 <= 600.0) {
            gap = gap.max(position_at(&planned.samples, s.t).distance(s.pos));
            compared += 1;
        }
    }
    ensure(
        tardy <= sc.sim.dt && gap <= C8_TRACK_TOL && compared > 0,
        format!(
            "{} actions, worst tardiness {tardy:.3} s, max executed-vs-planned gap {gap:.2e} m over {compared} samples",
            plan.actions.len()
        ),
    )
}

// 9. Determinism

fn digest_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mvmf"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "mvmf {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn determinism(dir: &Path) -> Check {
    let scenario = dir.join("determinism.toml");
    let text = format!(
        "{}\n[[pois]]\nposition = [150.0, 150.0]\nr_obs = 30.0\n",
        WAKE_SCENARIO.replace(
            "[planner]\ndrops = [[145.0, 195.0], [135.0, 345.0]]\n",
            "[planner]\nsamples = 40\nbudget = 2\n"
        )
    );
    std::fs::write(&scenario, text).unwrap();
    let sc = scenario.to_str().unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let out: PathBuf = dir.join(format!("det-{k}"));
        let o = out.to_str().unwrap();
        let plan = out.join(pipeline::PLAN_FILE);
        let log = out.join(pipeline::LOG_FILE);
        let replay = out.join("replay");
        run_cli(&[
            "--scenario",
            sc,
            "--out-dir",
            o,
            "--seed",
            "9",
            "estimate",
            "--synthesize",
        ])?;
        let field = out.join(pipeline::FIELD_FILE);
        run_cli(&[
            "--scenario",
            sc,
            "--out-dir",
            o,
            "--seed",
            "9",
            "plan",
            "--field",
            field.to_str().unwrap(),
            "--oracle-check",
        ])?;
        run_cli(&[
            "--scenario",
            sc,
            "--out-dir",
            o,
            "--seed",
            "9",
            "simulate",
            "--plan",
            plan.to_str().unwrap(),
            "--start-delay-s",
            "60",
            "--rotate-deg-per-hour",
            "15",
        ])?;
        run_cli(&[
            "--scenario",
            sc,
            "--out-dir",
            o,
            "--seed",
            "9",
            "evaluate",
            "--plan",
            plan.to_str().unwrap(),
            "--log",
            log.to_str().unwrap(),
            "--rotate-deg-per-hour",
            "15",
        ])?;
        run_cli(&[
            "--scenario",
            sc,
            "--out-dir",
            replay.to_str().unwrap(),
            "replay",
            "--log",
            log.to_str().unwrap(),
        ])?;
        let mut files = digest_dir(&out);
        files.retain(|(name, _)| name != "replay");
        files.extend(
            digest_dir(&replay)
                .into_iter()
                .map(|(n, b)| (format!("replay/{n}"), b)),
        );
        runs.push(files);
    }
    // the plan records the field path, which differs between the two runs
    let normalize = |files: &mut Vec<(String, Vec<u8>)>, k: usize| {
        for (name, bytes) in files.iter_mut() {
            if name == pipeline::PLAN_FILE {
                let mut p: PlanFile = serde_json::from_slice(bytes).unwrap();
                p.field_source = p.field_source.replace(&format!("det-{k}"), "det");
                *bytes = serde_json::to_vec(&p).unwrap();
            }
        }
    };
    normalize(&mut runs[0], 0);
    normalize(&mut runs[1], 1);
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    let same = runs[0] == runs[1];
    let exports_match = {
        let get = |n: &str| runs[0].iter().find(|(m, _)| m == n).map(|(_, b)| b.clone());
        ["events.jsonl", "trajectories.csv", "mission.geojson"]
            .iter()
            .all(|n| get(n).is_some() && get(n) == get(&format!("replay/{n}")))
    };
    ensure(
        same && exports_match,
        format!("{} artifacts identical across runs: {same}; replay reproduces exports: {exports_match} ({})", names.len(), names.join(", ")),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let d = dir.path();
    let criteria: Vec<Criterion> = vec![
        ("estimator fidelity", Box::new(estimator_fidelity)),
        (
            "incompressibility guarantee",
            Box::new(incompressibility_guarantee),
        ),
        (
            "planner optimality on small instances",
            Box::new(planner_optimality),
        ),
        ("coverage selection", Box::new(coverage_selection)),
        (
            "wake disturbance and wake-safe transits",
            Box::new(|| wake_reproduction(d)),
        ),
        ("quasi-static window", Box::new(|| quasi_static_window(d))),
        (
            "Langmuir convergence crossings",
            Box::new(|| langmuir_crossings(d)),
        ),
        ("closed-loop consistency", Box::new(|| closed_loop(d))),
        ("determinism", Box::new(|| determinism(d))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|p| {
                Err(format!(
                    "panicked: {:?}",
                    p.downcast_ref::<String>().cloned().unwrap_or_default()
                ))
            });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(m) => println!("PASS criterion {}: {name} ({secs:.1} s): {m}", k + 1),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({secs:.1} s): {m}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
