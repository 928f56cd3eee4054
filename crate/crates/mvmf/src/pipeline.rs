//! The subcommands as library functions. Each one reads its inputs, runs a
//! pipeline stage and writes its artifacts under an output directory.

use std::path::{Path, PathBuf};

use mvmf_core::estimator::{estimate_field, DrifterTrack};
use mvmf_core::flowfield::{
    divergence_at, incompressibility_report, integrate_trajectory, GridField,
};
use mvmf_core::planner::{
    exhaustive_schedule, makespan, plan_wake_safe_transits, sample_actions, schedule_cost,
    schedule_decmcts, select_actions_mcts, CandidateAction,
};
use mvmf_core::sim::{
    detect_crossings, drift_deviations, execute_schedule, executed_float_windows,
    synthesize_tracks, tardiness_report, wake_conflicts, LogEventKind, MissionLog,
};
use mvmf_core::{FlowField, Vec2};

use crate::error::{CliError, Result};
use crate::formats::{
    mission_geojson, read_json, read_tracks, write_events, write_json, write_tracks,
    write_trajectories, CandidateSummary, CrossingRecord, DivergenceCheck, EstimateSummary,
    MissionReport, OracleCheck, PlanFile,
};
use crate::scenario::Scenario;

pub const FIELD_FILE: &str = "field.json";
pub const COVARIANCE_FILE: &str = "covariance.json";
pub const ESTIMATE_FILE: &str = "estimate.json";
pub const TRACKS_FILE: &str = "tracks.csv";
pub const PLAN_FILE: &str = "plan.json";
pub const LOG_FILE: &str = "log.json";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const GEOJSON_FILE: &str = "mission.geojson";
pub const REPORT_FILE: &str = "report.json";

/// Points and tolerance of the divergence check on fitted fields.
pub const DIVERGENCE_POINTS: usize = 100;
pub const DIVERGENCE_STENCIL: f64 = 0.01;
pub const DIVERGENCE_TOL: f64 = 1e-6;
/// Cells per side of the grid the truth divergence is sampled on.
pub const REPORT_GRID_CELLS: f64 = 100.0;

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))
}

/// Element `i` of the base-`b` van der Corput sequence.
fn radical_inverse(mut i: usize, b: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// `n` well-spread interior points (Halton bases 2 and 3), 1 m clear of
/// the workspace edge.
pub fn check_points(field: &dyn FlowField, n: usize) -> Vec<Vec2> {
    let ws = field.workspace();
    let inner = ws.shrink(1.0).unwrap_or(ws);
    (1..=n)
        .map(|i| {
            Vec2::new(
                inner.min.x + radical_inverse(i, 2) * inner.width(),
                inner.min.y + radical_inverse(i, 3) * inner.height(),
            )
        })
        .collect()
}

pub fn divergence_check(field: &dyn FlowField) -> Result<DivergenceCheck> {
    let mut worst = 0.0f64;
    for p in check_points(field, DIVERGENCE_POINTS) {
        worst = worst.max(divergence_at(field, p, 0.0, DIVERGENCE_STENCIL)?.abs());
    }
    Ok(DivergenceCheck {
        points: DIVERGENCE_POINTS,
        stencil: DIVERGENCE_STENCIL,
        tolerance: DIVERGENCE_TOL,
        max_abs_divergence: worst,
        passed: worst < DIVERGENCE_TOL,
    })
}

#[derive(Clone, Debug, Default)]
pub struct EstimateArgs {
    pub tracks: Option<PathBuf>,
    pub synthesize: bool,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
}

/// Fits a field to drifter tracks, synthesized from the truth when asked.
///
/// Writes the mean field raster, the covariance-trace raster and a summary
/// with the chosen hyperparameters; synthesized tracks are written too.
pub fn estimate(sc: &Scenario, args: &EstimateArgs) -> Result<EstimateSummary> {
    let seed = args.seed.unwrap_or(sc.seed);
    let tracks: Vec<DrifterTrack> = match (&args.tracks, args.synthesize) {
        (Some(_), true) => {
            return Err(CliError::Input(
                "give either a tracks file or --synthesize, not both".into(),
            ))
        }
        (None, false) => {
            return Err(CliError::Input(
                "estimate needs a tracks file or --synthesize".into(),
            ))
        }
        (Some(path), false) => read_tracks(path, sc.deployment.gps_noise)?,
        (None, true) => {
            let truth = sc.truth_field(sc.truth_rotation_deg_per_hour)?;
            synthesize_tracks(&truth, &sc.deployment(), seed)?.tracks
        }
    };
    prepare(&args.out_dir)?;
    if args.synthesize {
        write_tracks(&args.out_dir.join(TRACKS_FILE), &tracks)?;
    }
    let out = estimate_field(&tracks, &sc.estimation_options())?;
    let check = divergence_check(&out.field)?;
    if !check.passed {
        return Err(CliError::Internal(format!(
            "fitted field fails the divergence check: {:e} /s",
            check.max_abs_divergence
        )));
    }
    let raster = out.field.rasterize(sc.estimator.raster_spacing)?;
    let cov = out
        .field
        .covariance_raster(sc.estimator.covariance_spacing)?;
    write_json(&args.out_dir.join(FIELD_FILE), &raster)?;
    write_json(&args.out_dir.join(COVARIANCE_FILE), &cov)?;
    let summary = EstimateSummary {
        seed,
        tracks: tracks.iter().map(|t| t.id.clone()).collect(),
        measurements: out.measurements.len(),
        hyperparams: out.field.hyperparams(),
        search: out.search,
        divergence_check: check,
    };
    write_json(&args.out_dir.join(ESTIMATE_FILE), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, Default)]
pub struct PlanArgs {
    /// GridField JSON to plan in; the scenario truth when absent.
    pub field: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub oracle_check: bool,
    /// Overrides the scenario's `planner.wake_safe`.
    pub wake_safe: Option<bool>,
}

fn fixed_actions(sc: &Scenario, field: &dyn FlowField) -> Result<Vec<CandidateAction>> {
    let pois = sc.pois();
    let ws = field.workspace();
    sc.planner
        .drops
        .iter()
        .enumerate()
        .map(|(id, d)| {
            let drop = Vec2::new(d[0], d[1]);
            if !ws.contains(drop) {
                return Err(CliError::Input(format!(
                    "drop {id} lies outside the workspace"
                )));
            }
            let dt = sc.sim.dt.min(sc.planner.drift_duration);
            let t = integrate_trajectory(field, drop, 0.0, sc.planner.drift_duration, dt)?;
            let a = CandidateAction::from_trajectory(id, t, &pois);
            if a.exits_workspace && !sc.planner.allow_exiting_actions {
                return Err(CliError::Infeasible(format!(
                    "drop {id} drifts out of the workspace"
                )));
            }
            Ok(a)
        })
        .collect()
}

/// Chooses drifts and schedules them across the fleet.
pub fn plan(sc: &Scenario, args: &PlanArgs) -> Result<PlanFile> {
    let seed = args.seed.unwrap_or(sc.seed);
    let mut cfg = sc.planner_config(seed);
    if let Some(w) = args.wake_safe {
        cfg.wake_avoidance = w;
    }
    let (field, field_source): (Box<dyn FlowField>, String) = match &args.field {
        Some(path) => {
            let g: GridField = read_json(path)?;
            g.validate()?;
            (Box::new(g), path.display().to_string())
        }
        None => (sc.truth_field(0.0)?, "truth".into()),
    };
    let vessels = sc.vessels();
    let (candidates, actions) = if sc.planner.drops.is_empty() {
        let sampled = sample_actions(
            &field,
            sc.sampling_region(),
            sc.planner.samples,
            sc.planner.drift_duration,
            &sc.pois(),
            seed,
        )?;
        let chosen = select_actions_mcts(&sampled, &sc.pois(), sc.planner.budget, &cfg)?;
        (sampled.iter().map(CandidateSummary::from).collect(), chosen)
    } else {
        (Vec::new(), fixed_actions(sc, &field)?)
    };
    let schedule = schedule_decmcts(&vessels, &actions, &field, &cfg)?;
    let transits = if cfg.wake_avoidance {
        Some(plan_wake_safe_transits(
            &schedule,
            &vessels,
            &actions,
            field.workspace(),
            cfg.wake_radius,
        )?)
    } else {
        None
    };
    let span = makespan(&schedule);
    let oracle = if args.oracle_check {
        let exact = makespan(&exhaustive_schedule(&vessels, &actions)?);
        Some(OracleCheck {
            exhaustive_makespan: exact,
            planner_makespan: span,
            ratio: if exact > 0.0 { span / exact } else { 1.0 },
            matches: (span - exact).abs() < 1e-9,
        })
    } else {
        None
    };
    let out = PlanFile {
        seed,
        cost: schedule_cost(&schedule, &actions, cfg.unattended_penalty),
        config: cfg,
        field_source,
        vessels,
        candidates,
        actions,
        schedule,
        transits,
        makespan: span,
        oracle,
    };
    prepare(&args.out_dir)?;
    write_json(&args.out_dir.join(PLAN_FILE), &out)?;
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct SimulateArgs {
    pub plan: PathBuf,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub wake: Option<bool>,
    pub start_delay: Option<f64>,
    pub rotate_deg_per_hour: Option<f64>,
}

pub fn load_plan(sc: &Scenario, path: &Path) -> Result<PlanFile> {
    let plan: PlanFile = read_json(path)?;
    if plan.vessels != sc.vessels() {
        return Err(CliError::Input(format!(
            "{}: plan fleet does not match the scenario",
            path.display()
        )));
    }
    plan.schedule.validate(&plan.vessels, &plan.actions)?;
    Ok(plan)
}

/// Runs a plan against the truth field and writes the log, its exports and
/// the mission report.
pub fn simulate(sc: &Scenario, args: &SimulateArgs) -> Result<(MissionLog, MissionReport)> {
    let seed = args.seed.unwrap_or(sc.seed);
    let plan = load_plan(sc, &args.plan)?;
    let rotation = args
        .rotate_deg_per_hour
        .unwrap_or(sc.truth_rotation_deg_per_hour);
    let truth = sc.truth_field(rotation)?;
    let mut cfg = sc.sim_config(seed);
    if let Some(on) = args.wake {
        cfg.wake = on.then(|| sc.wake_model());
    }
    if let Some(d) = args.start_delay {
        cfg.start_delay = d;
    }
    cfg.validate()?;
    let log = execute_schedule(
        &truth,
        &plan.vessels,
        &plan.schedule,
        &plan.actions,
        plan.transits.as_deref(),
        cfg,
    )?;
    let report = mission_report(
        sc,
        &plan,
        &log,
        &truth,
        rotation,
        args.wake.unwrap_or(sc.sim.wake),
    )?;
    prepare(&args.out_dir)?;
    write_json(&args.out_dir.join(LOG_FILE), &log)?;
    export_log(sc, &log, &args.out_dir)?;
    write_json(&args.out_dir.join(REPORT_FILE), &report)?;
    Ok((log, report))
}

/// Tardiness, deviations, wake conflicts, drift crossings and the truth
/// field's divergence at the mission start.
pub fn mission_report(
    sc: &Scenario,
    plan: &PlanFile,
    log: &MissionLog,
    truth: &dyn FlowField,
    rotation: f64,
    wake: bool,
) -> Result<MissionReport> {
    let tardiness = tardiness_report(log, &plan.schedule)?;
    let deviations = drift_deviations(log, &plan.actions);
    let mean_deviation = if deviations.is_empty() {
        0.0
    } else {
        deviations.iter().map(|d| d.mean).sum::<f64>() / deviations.len() as f64
    };
    let windows = executed_float_windows(log, &plan.actions);
    let radius = sc.sim.wake_radius;
    let wake_conflicts = log
        .vessels
        .iter()
        .flat_map(|v| wake_conflicts(v.vessel, &v.samples, &windows, radius))
        .collect();
    let mut crossings = Vec::new();
    for (i, a) in log.drifts.iter().enumerate() {
        for b in &log.drifts[i + 1..] {
            crossings.extend(
                detect_crossings(&a.samples, &b.samples)
                    .into_iter()
                    .map(|c| CrossingRecord {
                        action_a: a.action,
                        action_b: b.action,
                        position: c.position,
                        t_a: c.t_a,
                        t_b: c.t_b,
                    }),
            );
        }
    }
    let ws = truth.workspace();
    let region = ws.shrink(1.0).unwrap_or(ws);
    let step = region.width().min(region.height()) / REPORT_GRID_CELLS;
    let truth_incompressibility =
        incompressibility_report(truth, &region, step, log.start_delay, DIVERGENCE_TOL)?;
    Ok(MissionReport {
        start_delay: log.start_delay,
        wake,
        rotation_deg_per_hour: rotation,
        detours: log
            .events
            .iter()
            .filter(|e| e.kind == LogEventKind::Detour)
            .count(),
        tardiness,
        deviations,
        mean_deviation,
        wake_radius: radius,
        wake_conflicts,
        crossings,
        received_fraction: log.received_fraction(),
        truth_incompressibility,
    })
}

#[derive(Clone, Debug, Default)]
pub struct EvaluateArgs {
    pub plan: PathBuf,
    pub log: PathBuf,
    pub out_dir: PathBuf,
    pub rotate_deg_per_hour: Option<f64>,
    pub wake: Option<bool>,
}

/// Recomputes the mission report from a stored log.
pub fn evaluate(sc: &Scenario, args: &EvaluateArgs) -> Result<MissionReport> {
    let plan = load_plan(sc, &args.plan)?;
    let log: MissionLog = read_json(&args.log)?;
    let rotation = args
        .rotate_deg_per_hour
        .unwrap_or(sc.truth_rotation_deg_per_hour);
    let truth = sc.truth_field(rotation)?;
    let report = mission_report(
        sc,
        &plan,
        &log,
        &truth,
        rotation,
        args.wake.unwrap_or(sc.sim.wake),
    )?;
    prepare(&args.out_dir)?;
    write_json(&args.out_dir.join(REPORT_FILE), &report)?;
    Ok(report)
}

/// Events as JSON lines, trajectories as CSV and the GeoJSON collection.
pub fn export_log(sc: &Scenario, log: &MissionLog, out_dir: &Path) -> Result<()> {
    prepare(out_dir)?;
    write_events(&out_dir.join(EVENTS_FILE), &log.events)?;
    write_trajectories(&out_dir.join(TRAJECTORIES_FILE), log)?;
    write_json(&out_dir.join(GEOJSON_FILE), &mission_geojson(log, sc.geo))
}

/// Re-emits the exports of a stored log.
pub fn replay(sc: &Scenario, log: &Path, out_dir: &Path) -> Result<()> {
    let log: MissionLog = read_json(log)?;
    export_log(sc, &log, out_dir)
}
