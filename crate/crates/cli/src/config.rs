use std::path::{Path, PathBuf};

use bohm_core::experiments::PairGeometry;
use bohm_core::physics::PhysicalParams;
use bohm_core::states::{Ghz4Setting, MerminSetting, RotationSense};
use clap::Subcommand;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Derived constants k, alpha, beta of the physical parameters.
    Constants,
    /// One integrated trajectory, written as CSV.
    Trajectory,
    /// Singlet spin correlation at one magnet angle.
    Bell,
    /// Four-term CHSH combination over the 120-degree geometry.
    Chsh,
    /// Four joint settings evaluated on the same starting positions.
    TwoContradiction,
    /// Share of Gaussian starting points producing +1 = -1.
    Fraction,
    /// Three-particle product observables.
    Mermin,
    /// Four-particle product observables.
    Ghz4,
    /// Closed-form velocity field against the finite-difference oracle.
    OracleCheck,
    /// Spot positions on a screen 1 m behind the magnet.
    Screen,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Constants => "constants",
            ScenarioKind::Trajectory => "trajectory",
            ScenarioKind::Bell => "bell",
            ScenarioKind::Chsh => "chsh",
            ScenarioKind::TwoContradiction => "two-contradiction",
            ScenarioKind::Fraction => "fraction",
            ScenarioKind::Mermin => "mermin",
            ScenarioKind::Ghz4 => "ghz4",
            ScenarioKind::OracleCheck => "oracle-check",
            ScenarioKind::Screen => "screen",
        }
    }

    fn default_samples(self) -> Option<usize> {
        match self {
            ScenarioKind::Bell | ScenarioKind::Chsh | ScenarioKind::Fraction => Some(1000),
            ScenarioKind::Mermin | ScenarioKind::Ghz4 => Some(1000),
            _ => None,
        }
    }

    fn min_samples(self) -> usize {
        match self {
            ScenarioKind::Bell | ScenarioKind::Chsh => 100,
            ScenarioKind::Fraction => 1000,
            _ => 1,
        }
    }
}

/// Everything a run needs. Omitted physical fields take the silver-atom
/// defaults; after [`RunConfig::resolve`] every optional field a scenario
/// uses is filled in, so the echoed config reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub physical: PhysicalParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Angle of the right magnet relative to the left one (rad).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Explicit magnet angles, one per particle (rad).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<f64>>,
    /// Mermin (`xyy`, ...) or GHZ-4 (`xxxx`, ...) setting for `trajectory`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setting: Option<String>,
    /// Transverse starting positions `(y, z)` in cm, one per particle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<PairGeometry>,
    #[serde(default)]
    pub rotation_sense: RotationSense,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub theta: Option<f64>,
    pub out: Option<PathBuf>,
    pub rotation_sense: Option<RotationSense>,
}

/// The state a `trajectory` run integrates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryState {
    Singlet,
    Mermin(MerminSetting),
    Ghz4(Ghz4Setting),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = Some(s);
        }
        if let Some(n) = o.samples {
            self.n_samples = Some(n);
        }
        if let Some(t) = o.theta {
            self.theta = Some(t);
        }
        if let Some(p) = &o.out {
            self.out_dir = Some(p.clone());
        }
        if let Some(r) = o.rotation_sense {
            self.rotation_sense = r;
        }
    }

    /// Fixes the scenario, fills scenario defaults and validates.
    pub fn resolve(mut self, kind: ScenarioKind) -> Result<Self, CliError> {
        self.scenario = Some(kind);
        self.physical
            .validate()
            .map_err(|e| CliError::Config(format!("physical parameters: {e}")))?;
        self.seed.get_or_insert(DEFAULT_SEED);
        if self.n_samples.is_none() {
            self.n_samples = kind.default_samples();
        }
        if let Some(n) = self.n_samples {
            if n < kind.min_samples() {
                return Err(CliError::Config(format!(
                    "invalid parameter `n_samples`: {} needs at least {}, got {n}",
                    kind.name(),
                    kind.min_samples()
                )));
            }
        }
        if let Some(t) = self.theta {
            if !t.is_finite() {
                return Err(CliError::Config(format!(
                    "invalid parameter `theta`: got {t}"
                )));
            }
        }
        if let Some(axes) = &self.axes {
            if axes.iter().any(|a| !a.is_finite()) {
                return Err(CliError::Config(
                    "invalid parameter `axes`: angles must be finite".into(),
                ));
            }
        }
        match kind {
            ScenarioKind::Bell => {
                if self.axes.is_none() {
                    self.theta.get_or_insert(0.0);
                }
                if self.axes.as_ref().is_some_and(|a| a.len() != 2) {
                    return Err(CliError::Config(
                        "invalid parameter `axes`: bell needs two angles".into(),
                    ));
                }
            }
            ScenarioKind::Chsh | ScenarioKind::Fraction => {
                self.geometry.get_or_insert_with(PairGeometry::coplanar_120);
            }
            ScenarioKind::TwoContradiction => {
                self.geometry
                    .get_or_insert_with(PairGeometry::coplanar_120_reversed_r_prime);
                if self.initial.as_ref().is_some_and(|p| p.len() != 2) {
                    return Err(CliError::Config(
                        "invalid parameter `initial`: two-contradiction needs two positions".into(),
                    ));
                }
            }
            ScenarioKind::Trajectory => {
                let n = self.trajectory_state()?.1;
                if self.setting.is_none() && self.axes.is_none() {
                    self.theta.get_or_insert(0.0);
                }
                if self.axes.as_ref().is_some_and(|a| a.len() != n) {
                    return Err(CliError::Config(format!(
                        "invalid parameter `axes`: expected {n} angles"
                    )));
                }
                if self.initial.as_ref().is_some_and(|p| p.len() != n) {
                    return Err(CliError::Config(format!(
                        "invalid parameter `initial`: expected {n} positions"
                    )));
                }
            }
            _ => {}
        }
        if self
            .initial
            .as_ref()
            .is_some_and(|p| p.iter().flatten().any(|x| !x.is_finite()))
        {
            return Err(CliError::Config(
                "invalid parameter `initial`: coordinates must be finite".into(),
            ));
        }
        self.out_dir.get_or_insert_with(|| PathBuf::from("."));
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// State and particle count of a `trajectory` run.
    pub fn trajectory_state(&self) -> Result<(TrajectoryState, usize), CliError> {
        let Some(label) = &self.setting else {
            return Ok((TrajectoryState::Singlet, 2));
        };
        let bad = || {
            CliError::Config(format!(
                "invalid parameter `setting`: unknown setting `{label}`"
            ))
        };
        match label.len() {
            3 => label
                .parse::<MerminSetting>()
                .map(|s| (TrajectoryState::Mermin(s), 3))
                .map_err(|_| bad()),
            4 => label
                .parse::<Ghz4Setting>()
                .map(|s| (TrajectoryState::Ghz4(s), 4))
                .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}
