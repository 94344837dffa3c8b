//! Monte Carlo harness for the no-go experiments: correlations and CHSH
//! for the singlet, the two-particle `+1 = −1` contradiction, and the
//! Mermin and GHZ product-observable checks.
//!
//! Every sample owns a ChaCha stream derived from `(seed, index)`, so the
//! results do not depend on evaluation order or thread count. Ambiguous
//! outcomes are counted and excluded, never resolved at random.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{classify_coords, Integrator, Outcome, StepControl};
use crate::error::{Error, Result};
use crate::physics::PhysicalParams;
use crate::spin::{pattern_product, Pattern};
use crate::states::{
    axis_coordinate_with_sense, ghz4_branches, mermin_branches, singlet_branches, BranchState,
    Ghz4Setting, MagnetAxis, MeasurementConfig, MerminSetting, RotationSense,
};

/// Transverse `(y, z)` start of every particle, drawn from the initial
/// Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSample {
    pub transverse: Vec<[f64; 2]>,
    pub seed: u64,
    pub index: u64,
}

impl InitialSample {
    pub fn from_positions(transverse: Vec<[f64; 2]>) -> Self {
        Self {
            transverse,
            seed: 0,
            index: 0,
        }
    }

    pub fn n_particles(&self) -> usize {
        self.transverse.len()
    }

    /// The same sample reflected through the beam axis.
    pub fn negated(&self) -> Self {
        Self {
            transverse: self.transverse.iter().map(|[y, z]| [-y, -z]).collect(),
            ..self.clone()
        }
    }

    /// Starting coordinate of every particle along its magnet.
    pub fn project(&self, config: &MeasurementConfig, sense: RotationSense) -> Vec<f64> {
        self.transverse
            .iter()
            .zip(&config.axes)
            .map(|([y, z], axis)| axis_coordinate_with_sense(*y, *z, *axis, sense))
            .collect()
    }
}

/// Sample `index` of the stream identified by `seed`.
pub fn sample_one(seed: u64, index: u64, delta_r0: f64, n_particles: usize) -> InitialSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let transverse = (0..n_particles)
        .map(|_| {
            let y: f64 = StandardNormal.sample(&mut rng);
            let z: f64 = StandardNormal.sample(&mut rng);
            [delta_r0 * y, delta_r0 * z]
        })
        .collect();
    InitialSample {
        transverse,
        seed,
        index,
    }
}

pub fn sample_initials(
    n: usize,
    delta_r0: f64,
    n_particles: usize,
    seed: u64,
) -> Vec<InitialSample> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| sample_one(seed, i, delta_r0, n_particles))
        .collect()
}

/// Independent seed for sub-experiment `k` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Entangled state read in the bases of a measurement configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scenario {
    /// Singlet; the state depends on the angle between the two magnets.
    Singlet,
    Mermin {
        setting: MerminSetting,
    },
    Ghz4 {
        setting: Ghz4Setting,
    },
}

impl Scenario {
    pub fn state_for(&self, config: &MeasurementConfig) -> Result<BranchState> {
        let expect = |n: usize| {
            if config.n_particles() == n {
                Ok(())
            } else {
                Err(Error::ParticleMismatch {
                    expected: n,
                    got: config.n_particles(),
                })
            }
        };
        match self {
            Scenario::Singlet => {
                expect(2)?;
                Ok(singlet_branches(
                    config.axes[1].angle() - config.axes[0].angle(),
                ))
            }
            Scenario::Mermin { setting } => {
                expect(3)?;
                Ok(mermin_branches(*setting))
            }
            Scenario::Ghz4 { setting } => {
                expect(4)?;
                Ok(ghz4_branches(*setting))
            }
        }
    }
}

/// Integrates one configuration for many samples.
#[derive(Debug, Clone)]
pub struct JointRunner {
    integrator: Integrator,
    config: MeasurementConfig,
    sense: RotationSense,
    threshold: f64,
}

impl JointRunner {
    pub fn new(
        state: &BranchState,
        config: MeasurementConfig,
        params: &PhysicalParams,
        sense: RotationSense,
    ) -> Result<Self> {
        if state.n_particles() != config.n_particles() {
            return Err(Error::ParticleMismatch {
                expected: state.n_particles(),
                got: config.n_particles(),
            });
        }
        Ok(Self {
            integrator: Integrator::new(state, params, StepControl::default())?,
            config,
            sense,
            threshold: params.class_threshold(),
        })
    }

    pub fn for_scenario(
        scenario: Scenario,
        config: MeasurementConfig,
        params: &PhysicalParams,
        sense: RotationSense,
    ) -> Result<Self> {
        let state = scenario.state_for(&config)?;
        Self::new(&state, config, params, sense)
    }

    /// Integration failures come back as ambiguous outcomes carrying the
    /// error text.
    pub fn run(&self, sample: &InitialSample) -> Result<Outcome> {
        if sample.n_particles() != self.config.n_particles() {
            return Err(Error::ParticleMismatch {
                expected: self.config.n_particles(),
                got: sample.n_particles(),
            });
        }
        let start = sample.project(&self.config, self.sense);
        match self.integrator.endpoint(&start) {
            Ok(end) => Ok(classify_coords(&end, self.threshold)),
            Err(e @ Error::Stiffness { .. }) | Err(e @ Error::TooManySteps(_)) => {
                let last = match &e {
                    Error::Stiffness { coords, .. } => coords.clone(),
                    _ => start.clone(),
                };
                let mut out = classify_coords(&last, self.threshold);
                out.ambiguous = true;
                out.diagnostic = Some(e.to_string());
                Ok(out)
            }
            Err(e) => Err(e),
        }
    }

    pub fn run_all(&self, samples: &[InitialSample]) -> Result<Vec<Outcome>> {
        samples.par_iter().map(|s| self.run(s)).collect()
    }
}

/// Projects, integrates and classifies one sample.
pub fn run_joint(
    state: &BranchState,
    sample: &InitialSample,
    config: &MeasurementConfig,
    params: &PhysicalParams,
    sense: RotationSense,
) -> Result<Outcome> {
    JointRunner::new(state, config.clone(), params, sense)?.run(sample)
}

/// Share of ambiguous outcomes above which estimates carry a warning.
pub const AMBIGUOUS_WARNING_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub n_ambiguous: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn ambiguity_warning(n_ambiguous: usize, n: usize) -> Option<String> {
    (n > 0 && n_ambiguous as f64 > AMBIGUOUS_WARNING_FRACTION * n as f64).then(|| {
        format!(
            "{n_ambiguous} of {n} outcomes ambiguous ({:.2}%)",
            100.0 * n_ambiguous as f64 / n as f64
        )
    })
}

/// Mean and standard error of `±1` values.
fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// Correlation of the sign product over non-ambiguous outcomes.
pub fn correlation_from_outcomes(outcomes: &[Outcome]) -> CorrelationEstimate {
    let values: Vec<f64> = outcomes
        .iter()
        .filter(|o| !o.ambiguous)
        .map(|o| f64::from(o.product()))
        .collect();
    let n_ambiguous = outcomes.len() - values.len();
    let (value, stderr) = mean_and_stderr(&values);
    CorrelationEstimate {
        value,
        stderr,
        n_samples: outcomes.len(),
        n_ambiguous,
        warning: ambiguity_warning(n_ambiguous, outcomes.len()),
    }
}

/// Singlet correlation for magnets at `(angle_l, angle_r)`.
pub fn estimate_pair_correlation(
    angle_l: f64,
    angle_r: f64,
    n: usize,
    seed: u64,
    params: &PhysicalParams,
    sense: RotationSense,
) -> Result<CorrelationEstimate> {
    if n < 100 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            reason: format!("need at least 100 samples, got {n}"),
        });
    }
    let config = MeasurementConfig::from_angles(&[angle_l, angle_r])?;
    let runner = JointRunner::for_scenario(Scenario::Singlet, config, params, sense)?;
    let samples = sample_initials(n, params.delta_r0, 2, seed);
    Ok(correlation_from_outcomes(&runner.run_all(&samples)?))
}

/// Singlet correlation with the right magnet rotated by `theta` from the
/// left one.
pub fn estimate_correlation(
    theta: f64,
    n: usize,
    seed: u64,
    params: &PhysicalParams,
) -> Result<CorrelationEstimate> {
    estimate_pair_correlation(0.0, theta, n, seed, params, RotationSense::Positive)
}

/// Magnet directions of the two-particle contradiction: `Z_L`, `Z'_L`,
/// `Z'_R` coplanar and 120° apart, `Z'_L ∥ Z_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub z_l: f64,
    pub z_l_prime: f64,
    pub z_r: f64,
    pub z_r_prime: f64,
}

impl PairGeometry {
    pub fn coplanar_120() -> Self {
        Self {
            z_l: 0.0,
            z_l_prime: 2.0 * PI / 3.0,
            z_r: 2.0 * PI / 3.0,
            z_r_prime: 4.0 * PI / 3.0,
        }
    }

    /// Same magnet lines, but "up" along `Z'_R` points the other way
    /// (`π/3`). Both contradiction products change sign, the contradiction
    /// flag does not. This is the labelling under which the published
    /// outcome list for the hand-picked positions comes out.
    pub fn coplanar_120_reversed_r_prime() -> Self {
        Self {
            z_r_prime: PI / 3.0,
            ..Self::coplanar_120()
        }
    }

    /// `(label, angle_l, angle_r)` in CHSH order: the first three terms are
    /// added, the last subtracted.
    pub fn settings(&self) -> [(&'static str, f64, f64); 4] {
        [
            ("ZL,ZR", self.z_l, self.z_r),
            ("ZL,Z'R", self.z_l, self.z_r_prime),
            ("Z'L,Z'R", self.z_l_prime, self.z_r_prime),
            ("Z'L,ZR", self.z_l_prime, self.z_r),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub s: f64,
    pub stderr: f64,
    /// `E(Z_L,Z_R) + E(Z_L,Z'_R) + E(Z'_L,Z'_R) − E(Z'_L,Z_R)`.
    pub combination: String,
    pub terms: Vec<(String, CorrelationEstimate)>,
}

/// Four-term CHSH value; each correlation uses its own sample stream.
pub fn chsh(
    settings: [(&str, f64, f64); 4],
    n: usize,
    seed: u64,
    params: &PhysicalParams,
    sense: RotationSense,
) -> Result<ChshEstimate> {
    let mut terms = Vec::with_capacity(4);
    for (k, (label, a, b)) in settings.iter().enumerate() {
        let e = estimate_pair_correlation(*a, *b, n, derive_seed(seed, k as u64), params, sense)?;
        terms.push((label.to_string(), e));
    }
    let s = terms[0].1.value + terms[1].1.value + terms[2].1.value - terms[3].1.value;
    let stderr = terms
        .iter()
        .map(|(_, e)| e.stderr.powi(2))
        .sum::<f64>()
        .sqrt();
    let combination = format!(
        "E({}) + E({}) + E({}) - E({})",
        settings[0].0, settings[1].0, settings[2].0, settings[3].0
    );
    Ok(ChshEstimate {
        s,
        stderr,
        combination,
        terms,
    })
}

/// Born-rule CHSH value of the same combination, `E(θ) = −cos θ`.
pub fn chsh_born(settings: [(&str, f64, f64); 4]) -> f64 {
    let e = |a: f64, b: f64| -(b - a).cos();
    let [s0, s1, s2, s3] = settings;
    e(s0.1, s0.2) + e(s1.1, s1.2) + e(s2.1, s2.2) - e(s3.1, s3.2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContradictionReport {
    pub joint_outcomes: BTreeMap<String, Outcome>,
    pub product_a: i8,
    pub product_b: i8,
    pub contradiction: bool,
    /// Some outcome was ambiguous; the products are then not meaningful.
    pub indeterminate: bool,
}

impl ContradictionReport {
    fn new(joint_outcomes: BTreeMap<String, Outcome>, product_a: i8, product_b: i8) -> Self {
        let indeterminate = joint_outcomes.values().any(|o| o.ambiguous);
        Self {
            joint_outcomes,
            product_a,
            product_b,
            contradiction: !indeterminate && product_a != product_b,
            indeterminate,
        }
    }
}

fn product_of(outcomes: &[&Outcome]) -> i8 {
    outcomes.iter().map(|o| o.product()).product()
}

/// Runners for the four joint settings of the two-particle experiment.
#[derive(Debug, Clone)]
pub struct PairContradiction {
    runners: Vec<(&'static str, JointRunner)>,
}

impl PairContradiction {
    pub fn new(
        geometry: PairGeometry,
        params: &PhysicalParams,
        sense: RotationSense,
    ) -> Result<Self> {
        let runners = geometry
            .settings()
            .iter()
            .map(|(label, a, b)| {
                let config = MeasurementConfig::from_angles(&[*a, *b])?;
                Ok((
                    *label,
                    JointRunner::for_scenario(Scenario::Singlet, config, params, sense)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { runners })
    }

    /// Runs all four settings on the same sample. `product_a` multiplies the
    /// outcomes of `(Z_L,Z_R)` and `(Z'_L,Z'_R)`, `product_b` those of
    /// `(Z'_L,Z_R)` and `(Z_L,Z'_R)`.
    pub fn check(&self, sample: &InitialSample) -> Result<ContradictionReport> {
        let mut outcomes = BTreeMap::new();
        for (label, runner) in &self.runners {
            outcomes.insert(label.to_string(), runner.run(sample)?);
        }
        let get = |k: &str| &outcomes[k];
        let a = product_of(&[get("ZL,ZR"), get("Z'L,Z'R")]);
        let b = product_of(&[get("Z'L,ZR"), get("ZL,Z'R")]);
        Ok(ContradictionReport::new(outcomes, a, b))
    }
}

pub fn two_particle_contradiction(
    sample: &InitialSample,
    geometry: PairGeometry,
    params: &PhysicalParams,
    sense: RotationSense,
) -> Result<ContradictionReport> {
    PairContradiction::new(geometry, params, sense)?.check(sample)
}

/// The two hand-picked starting positions of the two-particle experiment:
/// the left particle at `1e-3 (√3/2, 1/2)` cm and the right one at `scale`
/// times the same direction.
pub fn pair_positions(right_scale: f64) -> InitialSample {
    let dir = [3f64.sqrt() / 2.0, 0.5];
    InitialSample::from_positions(vec![
        [1e-3 * dir[0], 1e-3 * dir[1]],
        [right_scale * 1e-3 * dir[0], right_scale * 1e-3 * dir[1]],
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionEstimate {
    pub fraction: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub n_indeterminate: usize,
}

impl FractionEstimate {
    fn from_flags(flags: &[Option<bool>]) -> Self {
        let values: Vec<f64> = flags
            .iter()
            .flatten()
            .map(|&c| if c { 1.0 } else { 0.0 })
            .collect();
        let (fraction, _) = mean_and_stderr(&values);
        let m = values.len().max(1) as f64;
        Self {
            fraction,
            stderr: (fraction * (1.0 - fraction) / m).sqrt(),
            n_samples: flags.len(),
            n_indeterminate: flags.len() - values.len(),
        }
    }
}

/// Share of Gaussian starting points that produce `+1 = −1` in the
/// two-particle experiment, indeterminate samples excluded.
pub fn contradiction_fraction(
    n: usize,
    seed: u64,
    geometry: PairGeometry,
    params: &PhysicalParams,
    sense: RotationSense,
) -> Result<FractionEstimate> {
    if n < 1000 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            reason: format!("need at least 1000 samples, got {n}"),
        });
    }
    let checker = PairContradiction::new(geometry, params, sense)?;
    let samples = sample_initials(n, params.delta_r0, 2, seed);
    let flags = samples
        .par_iter()
        .map(|s| {
            let r = checker.check(s)?;
            Ok((!r.indeterminate).then_some(r.contradiction))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FractionEstimate::from_flags(&flags))
}

/// Runners for a family of product observables on one GHZ-type state.
/// The first entry is the observable whose product is compared with the
/// product of the other three.
#[derive(Debug, Clone)]
pub struct ProductCheck {
    runners: Vec<(String, i8, JointRunner)>,
    implied_last: bool,
}

impl ProductCheck {
    pub fn mermin(params: &PhysicalParams, sense: RotationSense) -> Result<Self> {
        let runners = MerminSetting::ALL
            .iter()
            .map(|s| {
                let r = JointRunner::new(&mermin_branches(*s), s.measurement(), params, sense)?;
                Ok((s.label().to_string(), s.eigenvalue(), r))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            runners,
            implied_last: true,
        })
    }

    pub fn ghz4(params: &PhysicalParams, sense: RotationSense) -> Result<Self> {
        let runners = Ghz4Setting::ALL
            .iter()
            .map(|s| {
                let r = JointRunner::new(&ghz4_branches(*s), s.measurement(), params, sense)?;
                Ok((s.label().to_string(), s.eigenvalue(), r))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            runners,
            implied_last: false,
        })
    }

    pub fn n_particles(&self) -> usize {
        self.runners[0].2.config.n_particles()
    }

    /// Setting labels with their eigenvalues, in run order.
    pub fn eigenvalues(&self) -> Vec<(String, i8)> {
        self.runners
            .iter()
            .map(|(l, e, _)| (l.clone(), *e))
            .collect()
    }

    /// `product_a` is the all-x product implied by the three mixed
    /// observables, `product_b` the one observed when all magnets are
    /// along x.
    pub fn check(&self, sample: &InitialSample) -> Result<ContradictionReport> {
        let mut outcomes = BTreeMap::new();
        let mut products = Vec::with_capacity(4);
        for (label, _, runner) in &self.runners {
            let o = runner.run(sample)?;
            products.push(o.product());
            outcomes.insert(label.clone(), o);
        }
        let (observed, implied) = if self.implied_last {
            (products[3], products[..3].iter().product())
        } else {
            (products[0], products[1..].iter().product())
        };
        Ok(ContradictionReport::new(outcomes, implied, observed))
    }

    /// Whether every observed product equals its eigenvalue.
    pub fn eigenvalues_hold(&self, report: &ContradictionReport) -> bool {
        self.runners
            .iter()
            .all(|(label, e, _)| report.joint_outcomes[label].product() == *e)
    }
}

pub fn mermin_check(
    sample: &InitialSample,
    params: &PhysicalParams,
    sense: RotationSense,
) -> Result<ContradictionReport> {
    ProductCheck::mermin(params, sense)?.check(sample)
}

pub fn ghz4_check(
    sample: &InitialSample,
    params: &PhysicalParams,
    sense: RotationSense,
) -> Result<ContradictionReport> {
    ProductCheck::ghz4(params, sense)?.check(sample)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySummary {
    pub n_samples: usize,
    pub n_indeterminate: usize,
    pub n_contradiction: usize,
    /// Non-indeterminate samples where some observed product differs from
    /// its eigenvalue.
    pub n_eigenvalue_violations: usize,
    pub eigenvalues: Vec<(String, i8)>,
}

impl SurveySummary {
    pub fn n_determinate(&self) -> usize {
        self.n_samples - self.n_indeterminate
    }

    pub fn contradiction_rate(&self) -> f64 {
        match self.n_determinate() {
            0 => 0.0,
            d => self.n_contradiction as f64 / d as f64,
        }
    }
}

/// Runs the product check on `n` Gaussian samples.
pub fn survey(
    check: &ProductCheck,
    n: usize,
    seed: u64,
    params: &PhysicalParams,
) -> Result<SurveySummary> {
    let samples = sample_initials(n, params.delta_r0, check.n_particles(), seed);
    let reports = samples
        .par_iter()
        .map(|s| check.check(s))
        .collect::<Result<Vec<_>>>()?;
    let determinate: Vec<&ContradictionReport> =
        reports.iter().filter(|r| !r.indeterminate).collect();
    Ok(SurveySummary {
        n_samples: n,
        n_indeterminate: n - determinate.len(),
        n_contradiction: determinate.iter().filter(|r| r.contradiction).count(),
        n_eigenvalue_violations: determinate
            .iter()
            .filter(|r| !check.eigenvalues_hold(r))
            .count(),
        eigenvalues: check.eigenvalues(),
    })
}

/// Counts of each outcome pattern among non-ambiguous runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCounts {
    pub counts: BTreeMap<Pattern, usize>,
    pub n_ambiguous: usize,
}

impl PatternCounts {
    pub fn from_outcomes(outcomes: &[Outcome]) -> Self {
        let mut counts = BTreeMap::new();
        let mut n_ambiguous = 0;
        for o in outcomes {
            if o.ambiguous {
                n_ambiguous += 1;
            } else {
                *counts.entry(o.signs.clone()).or_insert(0) += 1;
            }
        }
        Self {
            counts,
            n_ambiguous,
        }
    }

    pub fn n_classified(&self) -> usize {
        self.counts.values().sum()
    }

    /// Total-variation distance to `probabilities`.
    pub fn total_variation(&self, probabilities: &BTreeMap<Pattern, f64>) -> f64 {
        let m = self.n_classified().max(1) as f64;
        let mut keys: Vec<&Pattern> = probabilities.keys().collect();
        keys.extend(self.counts.keys());
        keys.sort();
        keys.dedup();
        0.5 * keys
            .into_iter()
            .map(|k| {
                let emp = self.counts.get(k).copied().unwrap_or(0) as f64 / m;
                (emp - probabilities.get(k).copied().unwrap_or(0.0)).abs()
            })
            .sum::<f64>()
    }
}

/// Outcome histogram of one scenario under `config`.
pub fn outcome_histogram(
    scenario: Scenario,
    config: &MeasurementConfig,
    n: usize,
    seed: u64,
    params: &PhysicalParams,
    sense: RotationSense,
) -> Result<PatternCounts> {
    let runner = JointRunner::for_scenario(scenario, config.clone(), params, sense)?;
    let samples = sample_initials(n, params.delta_r0, config.n_particles(), seed);
    Ok(PatternCounts::from_outcomes(&runner.run_all(&samples)?))
}

/// Sign product of an outcome pattern, as ±1.0.
pub fn pattern_sign(p: &Pattern) -> f64 {
    f64::from(pattern_product(p))
}

/// Magnet axes for a singlet measured at relative angle `theta`.
pub fn singlet_config(theta: f64) -> MeasurementConfig {
    MeasurementConfig::new(vec![MagnetAxis::new(0.0), MagnetAxis::new(theta)]).expect("two magnets")
}
