//! Scenario files.
//!
//! A scenario is one TOML document. Every section except `workspace`,
//! `truth` and `vessels` may be left out, in which case the library
//! defaults apply; every default can be overridden. Unknown keys are
//! rejected so that a typo never silently falls back to a default.
//!
//! ```toml
//! seed = 7
//!
//! [workspace]
//! width = 390.0
//! height = 390.0
//!
//! [truth]
//! kind = "single_gyre"
//! peak_speed = 0.15
//!
//! [[vessels]]
//! start = [20.0, 20.0]
//! speed = 2.0
//! capacity = 2
//! ```
//!
//! Positions are `[x, y]` pairs in meters.

use std::path::{Path, PathBuf};

use mvmf_core::estimator::{
    default_grid, EstimationOptions, Hyperparams, DEFAULT_MEAS_NOISE, DEFAULT_PROCESS_NOISE,
    DEFAULT_SUBSAMPLE,
};
use mvmf_core::flowfield::{
    Eddy, GaussianEddies, GridField, LangmuirField, PiecewiseConstantField, RotatingField,
    SingleGyre, SolidBodyRotation, StreamField, UniformField, DEFAULT_DT,
};
use mvmf_core::planner::{PlannerConfig, Poi, Vessel};
use mvmf_core::sim::{triangle_formation, CommModel, Deployment, SimConfig, WaitPolicy, WakeModel};
use mvmf_core::{FlowField, Rect, Vec2};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub type Point = [f64; 2];

fn v(p: Point) -> Vec2 {
    Vec2::new(p[0], p[1])
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    pub workspace: WorkspaceSpec,
    pub truth: TruthSpec,
    /// Linear veering of the truth current (degrees per hour, CCW positive).
    #[serde(default)]
    pub truth_rotation_deg_per_hour: f64,
    #[serde(default)]
    pub deployment: DeploymentSpec,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub planner: PlannerSpec,
    pub vessels: Vec<VesselSpec>,
    #[serde(default)]
    pub pois: Vec<PoiSpec>,
    #[serde(default)]
    pub sim: SimSpec,
    #[serde(default)]
    pub geo: Option<GeoOrigin>,
    /// Directory that relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceSpec {
    #[serde(default)]
    pub origin: Point,
    pub width: f64,
    pub height: f64,
}

/// Ground-truth current.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruthSpec {
    Uniform {
        velocity: Point,
    },
    /// One gyre over `domain` (the workspace when omitted).
    SingleGyre {
        peak_speed: f64,
        #[serde(default)]
        domain: Option<[Point; 2]>,
    },
    SolidBody {
        center: Point,
        /// rad/s, counter-clockwise positive.
        omega: f64,
    },
    GaussianEddies {
        eddies: Vec<EddySpec>,
    },
    Langmuir {
        along_wind_speed: f64,
        cross_amplitude: f64,
        wavelength: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        wind_direction_deg: f64,
    },
    /// A GridField JSON file.
    Grid {
        path: PathBuf,
    },
    /// `fields[k]` holds on `[breakpoints[k], breakpoints[k + 1])`.
    Piecewise {
        breakpoints: Vec<f64>,
        fields: Vec<TruthSpec>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EddySpec {
    pub center: Point,
    pub radius: f64,
    pub strength: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Formation {
    /// Three drifters on an equilateral triangle of side `spacing`.
    Triangle,
    /// `count` drifters on a west-east line, `spacing` apart.
    Line,
    /// Exactly the listed `starts`.
    Custom,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DeploymentSpec {
    pub formation: Formation,
    pub count: usize,
    /// Formation centroid; the workspace center when omitted.
    pub center: Option<Point>,
    pub spacing: f64,
    pub starts: Vec<Point>,
    pub t0: f64,
    pub duration: f64,
    pub fix_interval: f64,
    pub gps_noise: f64,
    /// Fixes broadcast beyond `receiver_range` of `receiver` are lost.
    pub receiver: Option<Point>,
    pub receiver_range: Option<f64>,
}

impl Default for DeploymentSpec {
    fn default() -> Self {
        Self {
            formation: Formation::Triangle,
            count: 3,
            center: None,
            spacing: 60.0,
            starts: Vec::new(),
            t0: 0.0,
            duration: 600.0,
            fix_interval: 1.0,
            gps_noise: 3.0,
            receiver: None,
            receiver_range: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSpec {
    pub subsample_interval: f64,
    pub process_noise: f64,
    pub meas_noise: f64,
    pub dt: f64,
    /// `[length_scale, signal_std, noise_std]` triples; the built-in grid
    /// when empty.
    pub grid: Vec<[f64; 3]>,
    /// Track held out during the grid search; the last one when omitted.
    pub holdout: Option<String>,
    /// Node spacing of the exported mean field (m).
    pub raster_spacing: f64,
    /// Node spacing of the exported covariance-trace raster (m).
    pub covariance_spacing: f64,
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        Self {
            subsample_interval: DEFAULT_SUBSAMPLE,
            process_noise: DEFAULT_PROCESS_NOISE,
            meas_noise: DEFAULT_MEAS_NOISE,
            dt: DEFAULT_DT,
            grid: Vec::new(),
            holdout: None,
            raster_spacing: 1.0,
            covariance_spacing: 5.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSpec {
    /// Candidate drops sampled for coverage selection.
    pub samples: usize,
    /// Sampling rectangle `[min, max]`; the workspace when omitted.
    pub region: Option<[Point; 2]>,
    pub drift_duration: f64,
    /// Most actions the selection may keep.
    pub budget: usize,
    /// Fixed drop positions. When set, sampling and selection are skipped
    /// and these drifts are scheduled as given.
    pub drops: Vec<Point>,
    pub mcts_iterations: usize,
    pub exploration: f64,
    pub rollout_depth: usize,
    pub action_cost: f64,
    pub decmcts_rounds: usize,
    pub decmcts_iterations: usize,
    pub plan_distribution_size: usize,
    pub unattended_penalty: f64,
    pub allow_exiting_actions: bool,
    /// Reroute transits around drifting floats.
    pub wake_safe: bool,
    pub wake_radius: f64,
}

impl Default for PlannerSpec {
    fn default() -> Self {
        let c = PlannerConfig::default();
        Self {
            samples: 200,
            region: None,
            drift_duration: 600.0,
            budget: 5,
            drops: Vec::new(),
            mcts_iterations: c.mcts_iterations,
            exploration: c.exploration,
            rollout_depth: c.rollout_depth,
            action_cost: c.action_cost,
            decmcts_rounds: c.decmcts_rounds,
            decmcts_iterations: c.decmcts_iterations,
            plan_distribution_size: c.plan_distribution_size,
            unattended_penalty: c.unattended_penalty,
            allow_exiting_actions: c.allow_exiting_actions,
            wake_safe: c.wake_avoidance,
            wake_radius: c.wake_radius,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VesselSpec {
    /// Defaults to the position in the list.
    #[serde(default)]
    pub id: Option<usize>,
    pub start: Point,
    pub speed: f64,
    pub capacity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PoiSpec {
    #[serde(default)]
    pub id: Option<usize>,
    pub position: Point,
    pub r_obs: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub dt: f64,
    pub wake: bool,
    pub wake_radius: f64,
    pub wake_persistence: f64,
    pub wake_stall: f64,
    pub wake_push: f64,
    pub comm_range: f64,
    pub receiver: usize,
    pub gps_noise: f64,
    pub velocity_noise: f64,
    pub fix_interval: f64,
    pub capture_radius: f64,
    pub loss_horizon: f64,
    pub start_delay: f64,
    pub wait: WaitPolicy,
}

impl Default for SimSpec {
    fn default() -> Self {
        let c = SimConfig::default();
        let w = WakeModel::default();
        Self {
            dt: c.dt,
            wake: c.wake.is_some(),
            wake_radius: w.radius,
            wake_persistence: w.persistence,
            wake_stall: w.stall,
            wake_push: w.push,
            comm_range: c.comm.range,
            receiver: c.comm.receiver,
            gps_noise: c.gps_noise,
            velocity_noise: c.velocity_noise,
            fix_interval: c.fix_interval,
            capture_radius: c.capture_radius,
            loss_horizon: c.loss_horizon,
            start_delay: c.start_delay,
            wait: c.wait,
        }
    }
}

/// Geographic position of the local origin, for GeoJSON export.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeoOrigin {
    pub lat: f64,
    pub lon: f64,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut s = Self::parse(&text).map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        })?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        s.validate()?;
        Ok(s)
    }

    /// Parses without resolving or checking referenced files.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))
    }

    /// Range checks and referenced-file existence.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Input(format!("scenario: {m}")));
        let ws = self.workspace_rect();
        if !ws.is_valid() {
            return bad("workspace width and height must be positive");
        }
        if self.vessels.is_empty() {
            return bad("at least one vessel is required");
        }
        if self.vessels().iter().any(|v| !v.is_valid()) {
            return bad("vessel speed must be positive and capacity at least 1");
        }
        let ids: Vec<usize> = self.vessels().iter().map(|v| v.id).collect();
        if ids.iter().enumerate().any(|(i, id)| ids[..i].contains(id)) {
            return bad("vessel ids must be unique");
        }
        if self.pois.iter().any(|p| !(p.r_obs > 0.0)) {
            return bad("POI observation radius must be positive");
        }
        let d = &self.deployment;
        if !(d.duration > 0.0 && d.fix_interval > 0.0 && d.gps_noise > 0.0) {
            return bad("deployment duration, fix interval and GPS noise must be positive");
        }
        if d.formation == Formation::Triangle && d.count != 3 {
            return bad("a triangle formation has exactly 3 drifters");
        }
        if d.formation == Formation::Custom && d.starts.is_empty() {
            return bad("a custom formation needs `starts`");
        }
        if d.receiver.is_some() != d.receiver_range.is_some() {
            return bad("deployment receiver and receiver_range go together");
        }
        let e = &self.estimator;
        if !(e.raster_spacing > 0.0
            && e.covariance_spacing > 0.0
            && e.dt > 0.0
            && e.subsample_interval > 0.0)
        {
            return bad("estimator spacings, dt and subsample interval must be positive");
        }
        let p = &self.planner;
        if !(p.drift_duration > 0.0) || (p.drops.is_empty() && (p.samples == 0 || p.budget == 0)) {
            return bad("planner needs a positive drift duration, samples and budget");
        }
        self.planner_config(self.seed).validate()?;
        self.sim_config(self.seed).validate()?;
        if !self.vessels().iter().any(|v| v.id == self.sim.receiver) {
            return bad("sim receiver must be one of the vessels");
        }
        self.truth.check_files(&self.base_dir)?;
        Ok(())
    }

    pub fn workspace_rect(&self) -> Rect {
        let o = v(self.workspace.origin);
        Rect::new(
            o,
            o + Vec2::new(self.workspace.width, self.workspace.height),
        )
    }

    pub fn vessels(&self) -> Vec<Vessel> {
        self.vessels
            .iter()
            .enumerate()
            .map(|(i, s)| Vessel {
                id: s.id.unwrap_or(i),
                start: v(s.start),
                speed: s.speed,
                capacity: s.capacity,
            })
            .collect()
    }

    pub fn pois(&self) -> Vec<Poi> {
        self.pois
            .iter()
            .enumerate()
            .map(|(i, p)| Poi {
                id: p.id.unwrap_or(i),
                position: v(p.position),
                r_obs: p.r_obs,
            })
            .collect()
    }

    /// The truth current, veering at `rotation` deg/h when non-zero.
    pub fn truth_field(&self, rotation: f64) -> Result<Box<dyn FlowField>> {
        let base = self.truth.build(self.workspace_rect(), &self.base_dir)?;
        if rotation == 0.0 {
            Ok(base)
        } else {
            Ok(Box::new(RotatingField::from_degrees_per_hour(
                base, rotation,
            )))
        }
    }

    pub fn deployment(&self) -> Deployment {
        let d = &self.deployment;
        let center = d
            .center
            .map(v)
            .unwrap_or_else(|| self.workspace_rect().center());
        let starts = match d.formation {
            Formation::Triangle => triangle_formation(center, d.spacing).to_vec(),
            Formation::Line => {
                let half = (d.count as f64 - 1.0) / 2.0;
                (0..d.count)
                    .map(|k| center + Vec2::new((k as f64 - half) * d.spacing, 0.0))
                    .collect()
            }
            Formation::Custom => d.starts.iter().copied().map(v).collect(),
        };
        Deployment {
            starts,
            t0: d.t0,
            duration: d.duration,
            fix_interval: d.fix_interval,
            gps_noise: d.gps_noise,
            receiver: d.receiver.zip(d.receiver_range).map(|(p, r)| (v(p), r)),
        }
    }

    pub fn estimation_options(&self) -> EstimationOptions {
        let e = &self.estimator;
        let grid = if e.grid.is_empty() {
            default_grid()
        } else {
            e.grid
                .iter()
                .map(|g| Hyperparams::new(g[0], g[1], g[2]))
                .collect()
        };
        EstimationOptions {
            workspace: self.workspace_rect(),
            subsample_interval: e.subsample_interval,
            process_noise: e.process_noise,
            meas_noise: e.meas_noise,
            dt: e.dt,
            grid,
            holdout: e.holdout.clone(),
        }
    }

    pub fn planner_config(&self, seed: u64) -> PlannerConfig {
        let p = &self.planner;
        PlannerConfig {
            seed,
            mcts_iterations: p.mcts_iterations,
            exploration: p.exploration,
            rollout_depth: p.rollout_depth,
            action_cost: p.action_cost,
            decmcts_rounds: p.decmcts_rounds,
            decmcts_iterations: p.decmcts_iterations,
            plan_distribution_size: p.plan_distribution_size,
            unattended_penalty: p.unattended_penalty,
            allow_exiting_actions: p.allow_exiting_actions,
            wake_avoidance: p.wake_safe,
            wake_radius: p.wake_radius,
        }
    }

    pub fn sampling_region(&self) -> Rect {
        self.planner
            .region
            .map_or_else(|| self.workspace_rect(), |r| Rect::new(v(r[0]), v(r[1])))
    }

    pub fn wake_model(&self) -> WakeModel {
        let s = &self.sim;
        WakeModel {
            radius: s.wake_radius,
            persistence: s.wake_persistence,
            stall: s.wake_stall,
            push: s.wake_push,
        }
    }

    pub fn sim_config(&self, seed: u64) -> SimConfig {
        let s = &self.sim;
        SimConfig {
            dt: s.dt,
            wake: s.wake.then(|| self.wake_model()),
            comm: CommModel {
                range: s.comm_range,
                receiver: s.receiver,
            },
            gps_noise: s.gps_noise,
            velocity_noise: s.velocity_noise,
            fix_interval: s.fix_interval,
            capture_radius: s.capture_radius,
            loss_horizon: s.loss_horizon,
            start_delay: s.start_delay,
            wait: s.wait,
            seed,
        }
    }
}

impl TruthSpec {
    fn check_files(&self, base: &Path) -> Result<()> {
        match self {
            TruthSpec::Grid { path } => {
                let p = base.join(path);
                if p.is_file() {
                    Ok(())
                } else {
                    Err(CliError::Input(format!(
                        "truth grid file {} does not exist",
                        p.display()
                    )))
                }
            }
            TruthSpec::Piecewise { fields, .. } => {
                fields.iter().try_for_each(|f| f.check_files(base))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, ws: Rect, base: &Path) -> Result<Box<dyn FlowField>> {
        Ok(match self {
            TruthSpec::Uniform { velocity } => Box::new(UniformField::new(ws, v(*velocity))),
            TruthSpec::SingleGyre { peak_speed, domain } => {
                let d = domain.map_or(ws, |r| Rect::new(v(r[0]), v(r[1])));
                if !d.is_valid() {
                    return Err(CliError::Input(
                        "gyre domain must be a non-empty rectangle".into(),
                    ));
                }
                Box::new(StreamField::new(
                    ws,
                    SingleGyre::with_peak_speed(d, *peak_speed),
                ))
            }
            TruthSpec::SolidBody { center, omega } => Box::new(SolidBodyRotation {
                workspace: ws,
                center: v(*center),
                omega: *omega,
            }),
            TruthSpec::GaussianEddies { eddies } => {
                if eddies.iter().any(|e| !(e.radius > 0.0)) {
                    return Err(CliError::Input("eddy radius must be positive".into()));
                }
                let eddies = eddies
                    .iter()
                    .map(|e| Eddy {
                        center: v(e.center),
                        radius: e.radius,
                        strength: e.strength,
                    })
                    .collect();
                Box::new(StreamField::new(ws, GaussianEddies { eddies }))
            }
            TruthSpec::Langmuir {
                along_wind_speed,
                cross_amplitude,
                wavelength,
                phase,
                wind_direction_deg,
            } => Box::new(LangmuirField::new(
                ws,
                *along_wind_speed,
                *cross_amplitude,
                *wavelength,
                *phase,
                wind_direction_deg.to_radians(),
            )?),
            TruthSpec::Grid { path } => {
                let g: GridField = crate::formats::read_json(&base.join(path))?;
                g.validate()?;
                Box::new(g)
            }
            TruthSpec::Piecewise {
                breakpoints,
                fields,
            } => {
                let fields = fields
                    .iter()
                    .map(|f| f.build(ws, base))
                    .collect::<Result<Vec<_>>>()?;
                Box::new(PiecewiseConstantField::new(breakpoints.clone(), fields)?)
            }
        })
    }
}
