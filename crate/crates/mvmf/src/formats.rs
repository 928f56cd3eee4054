//! On-disk formats: JSON documents, CSV tables and GeoJSON.
//!
//! All writers are deterministic: the same values always produce the same
//! bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mvmf_core::estimator::{DrifterTrack, GridSearchOutcome, Hyperparams, RawFix};
use mvmf_core::flowfield::IncompressibilityReport;
use mvmf_core::planner::{CandidateAction, PlannerConfig, Schedule, TransitPlan, Vessel};
use mvmf_core::sim::{DriftDeviation, LogEvent, MissionLog, TardinessReport, WakeConflict};
use mvmf_core::Vec2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::scenario::GeoOrigin;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

/// Pretty-printed with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::write(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::write(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::write(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct TrackRow {
    drifter_id: String,
    time_s: f64,
    x_m: Option<f64>,
    y_m: Option<f64>,
    received: u8,
}

/// Reads `drifter_id,time_s,x_m,y_m,received` rows. Tracks keep the order in
/// which their ids first appear; every fix gets noise `gps_noise`. Position
/// cells of unreceived fixes may be empty.
pub fn read_tracks(path: &Path, gps_noise: f64) -> Result<Vec<DrifterTrack>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let mut order: Vec<String> = Vec::new();
    let mut fixes: BTreeMap<String, Vec<RawFix>> = BTreeMap::new();
    for (line, row) in rdr.deserialize::<TrackRow>().enumerate() {
        let row = row.map_err(|e| CliError::io(path, e))?;
        let bad = |m: &str| CliError::Input(format!("{}: row {}: {m}", path.display(), line + 1));
        let fix = match (row.received, row.x_m, row.y_m) {
            (1, Some(x), Some(y)) => RawFix::received(row.time_s, Vec2::new(x, y), gps_noise),
            (1, _, _) => return Err(bad("received fix without a position")),
            (0, _, _) => RawFix::dropped(row.time_s, gps_noise),
            _ => return Err(bad("received must be 0 or 1")),
        };
        if !fixes.contains_key(&row.drifter_id) {
            order.push(row.drifter_id.clone());
        }
        fixes.entry(row.drifter_id).or_default().push(fix);
    }
    order
        .into_iter()
        .map(|id| {
            let f = fixes.remove(&id).unwrap_or_default();
            DrifterTrack::new(id, f).map_err(CliError::from)
        })
        .collect()
}

pub fn write_tracks(path: &Path, tracks: &[DrifterTrack]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for t in tracks {
        for f in &t.fixes {
            let pos = f.received.then_some(f.position);
            w.serialize(TrackRow {
                drifter_id: t.id.clone(),
                time_s: f.time,
                x_m: pos.map(|p| p.x),
                y_m: pos.map(|p| p.y),
                received: f.received as u8,
            })
            .map_err(|e| CliError::write(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

/// Hyperparameter search result written next to the fitted field.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EstimateSummary {
    pub seed: u64,
    pub tracks: Vec<String>,
    pub measurements: usize,
    pub hyperparams: Hyperparams,
    pub search: GridSearchOutcome,
    pub divergence_check: DivergenceCheck,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DivergenceCheck {
    pub points: usize,
    pub stencil: f64,
    pub tolerance: f64,
    pub max_abs_divergence: f64,
    pub passed: bool,
}

/// Compact description of a sampled action.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CandidateSummary {
    pub id: usize,
    pub drop: Vec2,
    pub pick: Vec2,
    pub drift_duration: f64,
    pub covered: Vec<usize>,
    pub exits_workspace: bool,
}

impl From<&CandidateAction> for CandidateSummary {
    fn from(a: &CandidateAction) -> Self {
        Self {
            id: a.id,
            drop: a.drop,
            pick: a.pick,
            drift_duration: a.drift_duration,
            covered: a.covered.clone(),
            exits_workspace: a.exits_workspace,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OracleCheck {
    pub exhaustive_makespan: f64,
    pub planner_makespan: f64,
    pub ratio: f64,
    /// Equal to within 1e-9 s.
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PlanFile {
    pub seed: u64,
    pub config: PlannerConfig,
    /// Where the planning field came from.
    pub field_source: String,
    pub vessels: Vec<Vessel>,
    /// Every sampled action; empty when drops were given.
    pub candidates: Vec<CandidateSummary>,
    /// The selected actions in full.
    pub actions: Vec<CandidateAction>,
    pub schedule: Schedule,
    pub transits: Option<Vec<TransitPlan>>,
    pub makespan: f64,
    pub cost: f64,
    pub oracle: Option<OracleCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CrossingRecord {
    pub action_a: usize,
    pub action_b: usize,
    pub position: Vec2,
    pub t_a: f64,
    pub t_b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MissionReport {
    pub start_delay: f64,
    pub wake: bool,
    pub rotation_deg_per_hour: f64,
    pub tardiness: TardinessReport,
    pub detours: usize,
    pub deviations: Vec<DriftDeviation>,
    pub mean_deviation: f64,
    pub wake_radius: f64,
    pub wake_conflicts: Vec<WakeConflict>,
    pub crossings: Vec<CrossingRecord>,
    pub received_fraction: f64,
    /// Divergence of the truth field at the mission start.
    pub truth_incompressibility: IncompressibilityReport,
}

pub fn write_events(path: &Path, events: &[LogEvent]) -> Result<()> {
    let mut w = create(path)?;
    for e in events {
        let line = serde_json::to_string(e).map_err(|e| CliError::write(path, e))?;
        writeln!(w, "{line}").map_err(|e| CliError::write(path, e))?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

#[derive(Serialize)]
struct TrajectoryRow<'a> {
    entity: &'a str,
    kind: &'a str,
    time_s: f64,
    x_m: f64,
    y_m: f64,
    received: u8,
}

fn drift_entity(float: usize, action: usize) -> String {
    format!("float-{float}/action-{action}")
}

/// Vessel tracks, float drifts and broadcast fixes in one table.
pub fn write_trajectories(path: &Path, log: &MissionLog) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    {
        let mut row = |entity: &str, kind: &str, t: f64, p: Vec2, received: bool| {
            w.serialize(TrajectoryRow {
                entity,
                kind,
                time_s: t,
                x_m: p.x,
                y_m: p.y,
                received: received as u8,
            })
            .map_err(|e| CliError::write(path, e))
        };
        for v in &log.vessels {
            let name = format!("vessel-{}", v.vessel);
            for s in &v.samples {
                row(&name, "track", s.t, s.pos, true)?;
            }
        }
        for d in &log.drifts {
            let name = drift_entity(d.float, d.action);
            for s in &d.samples {
                row(&name, "drift", s.t, s.pos, true)?;
            }
        }
        for f in &log.fixes {
            row(
                &drift_entity(f.float, f.action),
                "fix",
                f.time,
                f.position,
                f.received,
            )?;
        }
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

const EARTH_RADIUS: f64 = 6_371_008.8;

/// Local east/north meters to `[lon, lat]` degrees on an equirectangular
/// projection about `origin`. Accurate to well under a meter across a few
/// kilometers.
pub fn local_to_lonlat(origin: GeoOrigin, p: Vec2) -> [f64; 2] {
    let lat = origin.lat + (p.y / EARTH_RADIUS).to_degrees();
    let lon = origin.lon + (p.x / (EARTH_RADIUS * origin.lat.to_radians().cos())).to_degrees();
    [lon, lat]
}

/// Tracks as LineStrings and log events as Points. With a geographic
/// origin the coordinates are `[lon, lat]`; otherwise they stay in local
/// meters and the collection says so.
pub fn mission_geojson(log: &MissionLog, geo: Option<GeoOrigin>) -> Value {
    let coord = |p: Vec2| match geo {
        Some(o) => local_to_lonlat(o, p),
        None => [p.x, p.y],
    };
    let line = |pts: Vec<[f64; 2]>, props: Value| json!({"type": "Feature", "geometry": {"type": "LineString", "coordinates": pts}, "properties": props});
    let mut features = Vec::new();
    for v in &log.vessels {
        let pts = v.samples.iter().map(|s| coord(s.pos)).collect();
        features.push(line(
            pts,
            json!({"entity": format!("vessel-{}", v.vessel), "kind": "track"}),
        ));
    }
    for d in &log.drifts {
        let pts = d.samples.iter().map(|s| coord(s.pos)).collect();
        let props =
            json!({"entity": drift_entity(d.float, d.action), "kind": "drift", "action": d.action});
        features.push(line(pts, props));
    }
    for e in &log.events {
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": coord(e.position)},
            "properties": {
                "kind": e.kind,
                "time_s": e.time,
                "vessel": e.vessel,
                "action": e.action,
                "float": e.float,
            },
        }));
    }
    let origin = match geo {
        Some(o) => {
            json!({"units": "degrees", "lat": o.lat, "lon": o.lon, "local_frame": "east_north_m"})
        }
        None => json!({"units": "meters", "local_frame": "east_north_m"}),
    };
    json!({"type": "FeatureCollection", "local_origin": origin, "features": features})
}
