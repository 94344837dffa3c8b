use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use bohm_core::dynamics::{classify, integrate, StepControl, Trajectory};
use bohm_core::experiments::{
    chsh, chsh_born, contradiction_fraction, estimate_pair_correlation, pair_positions, sample_one,
    survey, two_particle_contradiction, InitialSample, PairGeometry, ProductCheck,
};
use bohm_core::physics::{derive_constants, exit_speed, packet_z, post_magnet_center, spread_at};
use bohm_core::spin::{pattern_label, Spin};
use bohm_core::states::{
    ghz4_branches, mermin_branches, singlet_branches, BranchState, Ghz4Setting, MeasurementConfig,
    MerminSetting,
};
use bohm_core::velocity::oracle_grid_deviation;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{RunConfig, ScenarioKind, TrajectoryState};
use crate::error::CliError;

/// Ambiguous share above which a run exits with code 3.
pub const AMBIGUOUS_EXIT_FRACTION: f64 = 0.05;

/// Screen distance behind the magnet (cm).
pub const SCREEN_DISTANCE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub config: RunConfig,
    pub results: Value,
    pub n_outcomes: usize,
    pub n_ambiguous: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub version: String,
    pub wall_time_s: f64,
}

impl SummaryRecord {
    pub fn ambiguous_fraction(&self) -> f64 {
        if self.n_outcomes == 0 {
            0.0
        } else {
            self.n_ambiguous as f64 / self.n_outcomes as f64
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.ambiguous_fraction() > AMBIGUOUS_EXIT_FRACTION {
            3
        } else {
            0
        }
    }
}

struct Outcome {
    results: Value,
    n_outcomes: usize,
    n_ambiguous: usize,
    warnings: Vec<String>,
    trajectory: Option<Trajectory>,
}

impl Outcome {
    fn plain(results: Value) -> Self {
        Self {
            results,
            n_outcomes: 0,
            n_ambiguous: 0,
            warnings: Vec::new(),
            trajectory: None,
        }
    }
}

/// Runs a resolved config, writes its outputs and returns the summary.
pub fn run(config: &RunConfig) -> Result<SummaryRecord, CliError> {
    let kind = config
        .scenario
        .ok_or_else(|| CliError::Config("missing field `scenario`".into()))?;
    let start = Instant::now();
    let mut out = dispatch(kind, config)?;
    if let Some(w) = config.physical.consistency_warning() {
        out.warnings.push(w);
    }
    check_finite(&out.results, kind.name())?;

    let dir = config.out_dir();
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    if let Some(traj) = &out.trajectory {
        write_trajectory_csv(&dir.join("trajectory.csv"), traj)?;
    }
    let record = SummaryRecord {
        scenario: kind,
        seed: config.seed(),
        config: config.clone(),
        results: out.results,
        n_outcomes: out.n_outcomes,
        n_ambiguous: out.n_ambiguous,
        warnings: out.warnings,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = dir.join(format!("{}.json", kind.name()));
    let text = serde_json::to_string_pretty(&record)
        .map_err(|e| CliError::Io(format!("serializing summary: {e}")))?;
    fs::write(&path, text + "\n")
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(record)
}

fn dispatch(kind: ScenarioKind, c: &RunConfig) -> Result<Outcome, CliError> {
    let p = &c.physical;
    let sense = c.rotation_sense;
    let seed = c.seed();
    let n = c.n_samples.unwrap_or(0);
    match kind {
        ScenarioKind::Constants => {
            let dc = derive_constants(p)?;
            Ok(Outcome::plain(json!({
                "k": dc.k,
                "alpha": dc.alpha,
                "beta": dc.beta,
                "class_threshold": p.class_threshold(),
            })))
        }
        ScenarioKind::Screen => {
            let t = p.tau + SCREEN_DISTANCE / p.v0;
            let up = post_magnet_center(p, Spin::Up, t)?;
            let down = post_magnet_center(p, Spin::Down, t)?;
            Ok(Outcome::plain(json!({
                "screen_distance": SCREEN_DISTANCE,
                "time_at_screen": t,
                "center_at_tau": packet_z(p, 0.0, p.tau, Spin::Up).center,
                "exit_speed": exit_speed(p),
                "center_up": up,
                "center_down": down,
                "separation": up - down,
                "spot_size": spread_at(p, t),
            })))
        }
        ScenarioKind::Trajectory => trajectory(c),
        ScenarioKind::Bell => {
            let (a, b) = match &c.axes {
                Some(axes) => (axes[0], axes[1]),
                None => (0.0, c.theta.unwrap_or(0.0)),
            };
            let e = estimate_pair_correlation(a, b, n, seed, p, sense)?;
            Ok(Outcome {
                n_outcomes: e.n_samples,
                n_ambiguous: e.n_ambiguous,
                warnings: e.warning.iter().cloned().collect(),
                results: json!({
                    "angle_left": a,
                    "angle_right": b,
                    "correlation": e,
                    "born": -(b - a).cos(),
                }),
                trajectory: None,
            })
        }
        ScenarioKind::Chsh => {
            let g = c.geometry.unwrap_or_else(PairGeometry::coplanar_120);
            let est = chsh(g.settings(), n, seed, p, sense)?;
            let n_outcomes = est.terms.iter().map(|(_, e)| e.n_samples).sum();
            let n_ambiguous = est.terms.iter().map(|(_, e)| e.n_ambiguous).sum();
            let warnings = est
                .terms
                .iter()
                .filter_map(|(l, e)| e.warning.as_ref().map(|w| format!("{l}: {w}")))
                .collect();
            Ok(Outcome {
                n_outcomes,
                n_ambiguous,
                warnings,
                results: json!({ "chsh": est, "born": chsh_born(g.settings()) }),
                trajectory: None,
            })
        }
        ScenarioKind::TwoContradiction => {
            let g = c
                .geometry
                .unwrap_or_else(PairGeometry::coplanar_120_reversed_r_prime);
            let sets: Vec<(&str, InitialSample)> = match &c.initial {
                Some(pos) => vec![("initial", InitialSample::from_positions(pos.clone()))],
                None => vec![
                    ("first", pair_positions(1.1)),
                    ("mirrored", pair_positions(-1.0)),
                ],
            };
            let mut reports = serde_json::Map::new();
            let mut n_ambiguous = 0;
            let mut n_outcomes = 0;
            for (label, sample) in sets {
                let r = two_particle_contradiction(&sample, g, p, sense)?;
                n_outcomes += r.joint_outcomes.len();
                n_ambiguous += r.joint_outcomes.values().filter(|o| o.ambiguous).count();
                let outcomes: serde_json::Map<String, Value> = r
                    .joint_outcomes
                    .iter()
                    .map(|(k, o)| (k.clone(), Value::from(pattern_label(&o.signs))))
                    .collect();
                reports.insert(
                    label.to_string(),
                    json!({ "positions": sample.transverse, "outcomes": outcomes, "report": r }),
                );
            }
            Ok(Outcome {
                n_outcomes,
                n_ambiguous,
                warnings: Vec::new(),
                results: json!({ "geometry": g, "sets": reports }),
                trajectory: None,
            })
        }
        ScenarioKind::Fraction => {
            let g = c.geometry.unwrap_or_else(PairGeometry::coplanar_120);
            let f = contradiction_fraction(n, seed, g, p, sense)?;
            Ok(Outcome {
                n_outcomes: f.n_samples,
                n_ambiguous: f.n_indeterminate,
                warnings: Vec::new(),
                results: json!({ "geometry": g, "fraction": f }),
                trajectory: None,
            })
        }
        ScenarioKind::Mermin | ScenarioKind::Ghz4 => {
            let check = if kind == ScenarioKind::Mermin {
                ProductCheck::mermin(p, sense)?
            } else {
                ProductCheck::ghz4(p, sense)?
            };
            let s = survey(&check, n, seed, p)?;
            Ok(Outcome {
                n_outcomes: s.n_samples,
                n_ambiguous: s.n_indeterminate,
                warnings: Vec::new(),
                results: json!({ "contradiction_rate": s.contradiction_rate(), "survey": s }),
                trajectory: None,
            })
        }
        ScenarioKind::OracleCheck => {
            let mut states: Vec<(String, BranchState)> = vec![
                ("singlet 0".into(), singlet_branches(0.0)),
                ("singlet 2pi/3".into(), singlet_branches(2.0 * PI / 3.0)),
            ];
            states.extend(MerminSetting::ALL.map(|s| (format!("mermin {s}"), mermin_branches(s))));
            states.extend(Ghz4Setting::ALL.map(|s| (format!("ghz4 {s}"), ghz4_branches(s))));
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            for (name, st) in &states {
                for frac in [0.25, 0.5, 1.0] {
                    let d = oracle_grid_deviation(st, p, frac * p.tau, 10)?;
                    worst = worst.max(d);
                    rows.push(json!({ "state": name, "t_over_tau": frac, "max_deviation": d }));
                }
            }
            Ok(Outcome::plain(json!({
                "grid_points_per_axis": 10,
                "max_deviation": worst,
                "tolerance": 1e-6,
                "pass": worst < 1e-6,
                "cases": rows,
            })))
        }
    }
}

fn trajectory(c: &RunConfig) -> Result<Outcome, CliError> {
    let p = &c.physical;
    let (which, n) = c.trajectory_state()?;
    let (state, config) = match which {
        TrajectoryState::Singlet => {
            let axes = c
                .axes
                .clone()
                .unwrap_or_else(|| vec![0.0, c.theta.unwrap_or(0.0)]);
            let theta = axes[1] - axes[0];
            (
                singlet_branches(theta),
                MeasurementConfig::from_angles(&axes)?,
            )
        }
        TrajectoryState::Mermin(s) => (mermin_branches(s), axes_or(c, s.measurement())?),
        TrajectoryState::Ghz4(s) => (ghz4_branches(s), axes_or(c, s.measurement())?),
    };
    let sample = match &c.initial {
        Some(pos) => InitialSample::from_positions(pos.clone()),
        None => sample_one(c.seed(), 0, p.delta_r0, n),
    };
    let z0 = sample.project(&config, c.rotation_sense);
    let traj = integrate(&state, &z0, p, &StepControl::default())?;
    let o = classify(&traj, p);
    Ok(Outcome {
        n_outcomes: 1,
        n_ambiguous: usize::from(o.ambiguous),
        warnings: Vec::new(),
        results: json!({
            "axes": config.axes,
            "positions": sample.transverse,
            "z0": z0,
            "endpoint": traj.endpoint(),
            "outcome": pattern_label(&o.signs),
            "ambiguous": o.ambiguous,
            "n_points": traj.samples.len(),
            "params_hash": traj.params_hash,
        }),
        trajectory: Some(traj),
    })
}

fn axes_or(c: &RunConfig, default: MeasurementConfig) -> Result<MeasurementConfig, CliError> {
    match &c.axes {
        Some(a) => Ok(MeasurementConfig::from_angles(a)?),
        None => Ok(default),
    }
}

fn check_finite(v: &Value, scenario: &str) -> Result<(), CliError> {
    fn walk(v: &Value) -> bool {
        match v {
            Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
            Value::Array(a) => a.iter().all(walk),
            Value::Object(o) => o.values().all(walk),
            _ => true,
        }
    }
    if walk(v) && !contains_null(v) {
        Ok(())
    } else {
        Err(CliError::Run(bohm_core::Error::Domain {
            what: "summary",
            reason: format!("{scenario} produced a non-finite value"),
        }))
    }
}

/// serde_json turns NaN into `null`; no result field is ever legitimately null.
fn contains_null(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::Array(a) => a.iter().any(contains_null),
        Value::Object(o) => o.values().any(contains_null),
        _ => false,
    }
}

/// Writes `t,z_1,...,z_n` rows with 17 significant digits.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("writing {}: {e}", path.display()));
    let n = traj.samples.first().map_or(0, |s| s.coords.len());
    let mut buf = String::from("t");
    for i in 1..=n {
        buf.push_str(&format!(",z_{i}"));
    }
    buf.push('\n');
    for s in &traj.samples {
        buf.push_str(&format!("{:.16e}", s.t));
        for z in &s.coords {
            buf.push_str(&format!(",{z:.16e}"));
        }
        buf.push('\n');
    }
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(buf.as_bytes()).map_err(io)
}
