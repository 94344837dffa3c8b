//! Maximally entangled spin states written as weighted sign patterns in
//! the measurement bases.
//!
//! Only squared moduli are kept: the relative phases between branches
//! multiply orthogonal spin states and never reach the density or the
//! velocity field.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{all_patterns, pattern_product, Pattern, Spin};

/// Orientation of a magnet inside the particle's transverse (y, z) plane,
/// measured from the local z reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct MagnetAxis {
    angle: f64,
}

impl MagnetAxis {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if a >= TAU {
            a = 0.0;
        }
        Self { angle: a }
    }

    pub fn angle(self) -> f64 {
        self.angle
    }

    /// The `x` basis of the Mermin and GHZ observables (normal to the
    /// propagation plane).
    pub fn x() -> Self {
        Self::new(0.0)
    }

    /// The `y` basis of the Mermin and GHZ observables.
    pub fn y() -> Self {
        Self::new(FRAC_PI_2)
    }
}

impl From<f64> for MagnetAxis {
    fn from(a: f64) -> Self {
        Self::new(a)
    }
}

impl From<MagnetAxis> for f64 {
    fn from(a: MagnetAxis) -> f64 {
        a.angle
    }
}

/// Handedness of magnet rotations about the propagation axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum RotationSense {
    #[default]
    Positive,
    Negative,
}

impl RotationSense {
    pub fn sign(self) -> f64 {
        match self {
            RotationSense::Positive => 1.0,
            RotationSense::Negative => -1.0,
        }
    }
}

impl From<RotationSense> for i8 {
    fn from(s: RotationSense) -> i8 {
        match s {
            RotationSense::Positive => 1,
            RotationSense::Negative => -1,
        }
    }
}

impl TryFrom<i8> for RotationSense {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(RotationSense::Positive),
            -1 => Ok(RotationSense::Negative),
            other => Err(format!("rotation sense must be +1 or -1, got {other}")),
        }
    }
}

impl FromStr for RotationSense {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "+1" | "1" | "+" => Ok(RotationSense::Positive),
            "-1" | "-" => Ok(RotationSense::Negative),
            other => Err(format!("rotation sense must be +1 or -1, got `{other}`")),
        }
    }
}

/// Initial coordinate along a magnet axis: `z cos a + y sin a`.
pub fn axis_coordinate(y: f64, z: f64, axis: MagnetAxis) -> f64 {
    axis_coordinate_with_sense(y, z, axis, RotationSense::Positive)
}

pub fn axis_coordinate_with_sense(y: f64, z: f64, axis: MagnetAxis, sense: RotationSense) -> f64 {
    let (s, c) = axis.angle.sin_cos();
    z * c + sense.sign() * y * s
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementConfig {
    pub axes: Vec<MagnetAxis>,
}

impl MeasurementConfig {
    pub fn new(axes: Vec<MagnetAxis>) -> Result<Self> {
        if !(2..=4).contains(&axes.len()) {
            return Err(Error::InvalidParameter {
                field: "axes",
                reason: format!("need 2 to 4 magnets, got {}", axes.len()),
            });
        }
        Ok(Self { axes })
    }

    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(angles.iter().copied().map(MagnetAxis::new).collect())
    }

    pub fn n_particles(&self) -> usize {
        self.axes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub weight: f64,
    pub pattern: Pattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchState {
    branches: Vec<Branch>,
    n_particles: usize,
}

impl BranchState {
    /// Builds a state from (weight, pattern) pairs. Zero-weight branches are
    /// dropped; weights must be non-negative and sum to 1 within 1e-12.
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        let n_particles = branches.first().ok_or(Error::EmptyState)?.pattern.len();
        let mut seen = std::collections::BTreeSet::new();
        let mut sum = 0.0;
        for b in &branches {
            if b.pattern.len() != n_particles {
                return Err(Error::ParticleMismatch {
                    expected: n_particles,
                    got: b.pattern.len(),
                });
            }
            if !(b.weight.is_finite() && b.weight >= 0.0) {
                return Err(Error::InvalidParameter {
                    field: "weight",
                    reason: format!("branch weights must be non-negative, got {}", b.weight),
                });
            }
            if !seen.insert(b.pattern.clone()) {
                return Err(Error::InvalidParameter {
                    field: "pattern",
                    reason: "duplicate branch pattern".into(),
                });
            }
            sum += b.weight;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                field: "weight",
                reason: format!("branch weights sum to {sum}, not 1"),
            });
        }
        let branches: Vec<Branch> = branches.into_iter().filter(|b| b.weight > 0.0).collect();
        Ok(Self {
            branches,
            n_particles,
        })
    }

    /// Like [`BranchState::new`] but rescales positive weights to sum to 1.
    pub fn normalized(mut branches: Vec<Branch>) -> Result<Self> {
        let sum: f64 = branches.iter().map(|b| b.weight).sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidParameter {
                field: "weight",
                reason: format!("branch weights must have a positive finite sum, got {sum}"),
            });
        }
        for b in &mut branches {
            b.weight /= sum;
        }
        Self::new(branches)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    /// Same state with particle `i` moved to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_particles {
            return Err(Error::ParticleMismatch {
                expected: self.n_particles,
                got: perm.len(),
            });
        }
        let branches = self
            .branches
            .iter()
            .map(|b| {
                let mut pattern = b.pattern.clone();
                for (i, &j) in perm.iter().enumerate() {
                    pattern[j] = b.pattern[i];
                }
                Branch {
                    weight: b.weight,
                    pattern,
                }
            })
            .collect();
        Self::new(branches)
    }
}

/// Two particles in the singlet state, measured along magnets separated by
/// `theta`.
pub fn singlet_branches(theta: f64) -> BranchState {
    let (s, c) = (theta / 2.0).sin_cos();
    let (s2, c2) = (s * s / 2.0, c * c / 2.0);
    let (u, d) = (Spin::Up, Spin::Down);
    let branches = vec![
        Branch {
            weight: s2,
            pattern: vec![u, u],
        },
        Branch {
            weight: c2,
            pattern: vec![u, d],
        },
        Branch {
            weight: c2,
            pattern: vec![d, u],
        },
        Branch {
            weight: s2,
            pattern: vec![d, d],
        },
    ];
    BranchState::new(branches).expect("singlet weights are a partition of unity")
}

/// Local basis of one particle in a product observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
}

impl Basis {
    pub fn axis(self) -> MagnetAxis {
        match self {
            Basis::X => MagnetAxis::x(),
            Basis::Y => MagnetAxis::y(),
        }
    }
}

fn parse_bases(label: &str, n: usize) -> Result<Vec<Basis>> {
    if label.len() != n {
        return Err(Error::UnknownSetting(label.to_string()));
    }
    label
        .chars()
        .map(|c| match c.to_ascii_lowercase() {
            'x' => Ok(Basis::X),
            'y' => Ok(Basis::Y),
            _ => Err(Error::UnknownSetting(label.to_string())),
        })
        .collect()
}

/// Product observables of the three-particle state `(|+++⟩ − |−−−⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MerminSetting {
    Xyy,
    Yxy,
    Yyx,
    Xxx,
}

impl MerminSetting {
    pub const ALL: [MerminSetting; 4] = [Self::Xyy, Self::Yxy, Self::Yyx, Self::Xxx];

    pub fn label(self) -> &'static str {
        match self {
            Self::Xyy => "xyy",
            Self::Yxy => "yxy",
            Self::Yyx => "yyx",
            Self::Xxx => "xxx",
        }
    }

    pub fn bases(self) -> Vec<Basis> {
        parse_bases(self.label(), 3).expect("static label")
    }

    pub fn eigenvalue(self) -> i8 {
        match self {
            Self::Xxx => -1,
            _ => 1,
        }
    }

    pub fn measurement(self) -> MeasurementConfig {
        MeasurementConfig::new(self.bases().into_iter().map(Basis::axis).collect())
            .expect("three magnets")
    }
}

impl FromStr for MerminSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownSetting(s.to_string()))
    }
}

impl fmt::Display for MerminSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Product observables of the four-particle state `(|++−−⟩ − |−−++⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ghz4Setting {
    Xxxx,
    Yxyx,
    Yxxy,
    Xxyy,
}

impl Ghz4Setting {
    pub const ALL: [Ghz4Setting; 4] = [Self::Xxxx, Self::Yxyx, Self::Yxxy, Self::Xxyy];

    pub fn label(self) -> &'static str {
        match self {
            Self::Xxxx => "xxxx",
            Self::Yxyx => "yxyx",
            Self::Yxxy => "yxxy",
            Self::Xxyy => "xxyy",
        }
    }

    pub fn bases(self) -> Vec<Basis> {
        parse_bases(self.label(), 4).expect("static label")
    }

    pub fn eigenvalue(self) -> i8 {
        match self {
            Self::Xxyy => 1,
            _ => -1,
        }
    }

    pub fn measurement(self) -> MeasurementConfig {
        MeasurementConfig::new(self.bases().into_iter().map(Basis::axis).collect())
            .expect("four magnets")
    }
}

impl FromStr for Ghz4Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownSetting(s.to_string()))
    }
}

impl fmt::Display for Ghz4Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Uniform weight over every `n`-particle pattern whose sign product is
/// `eigenvalue`. For a GHZ-type state measured in x/y bases these are
/// exactly the patterns with non-zero amplitude.
fn eigen_patterns(n: usize, eigenvalue: i8) -> BranchState {
    let patterns: Vec<Pattern> = all_patterns(n)
        .into_iter()
        .filter(|p| pattern_product(p) == eigenvalue)
        .collect();
    let w = 1.0 / patterns.len() as f64;
    BranchState::new(
        patterns
            .into_iter()
            .map(|pattern| Branch { weight: w, pattern })
            .collect(),
    )
    .expect("uniform weights")
}

pub fn mermin_branches(setting: MerminSetting) -> BranchState {
    eigen_patterns(3, setting.eigenvalue())
}

pub fn ghz4_branches(setting: Ghz4Setting) -> BranchState {
    eigen_patterns(4, setting.eigenvalue())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub probabilities: BTreeMap<Pattern, f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, pattern: &[Spin]) -> f64 {
        self.probabilities.get(pattern).copied().unwrap_or(0.0)
    }

    /// Mean of the product of all signs.
    pub fn correlation(&self) -> f64 {
        self.probabilities
            .iter()
            .map(|(p, w)| w * f64::from(pattern_product(p)))
            .sum()
    }
}

pub fn born_distribution(state: &BranchState) -> OutcomeDistribution {
    let probabilities = all_patterns(state.n_particles())
        .into_iter()
        .map(|p| {
            let w = state
                .branches()
                .iter()
                .find(|b| b.pattern == p)
                .map_or(0.0, |b| b.weight);
            (p, w)
        })
        .collect();
    OutcomeDistribution { probabilities }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spin::Spin::{Down as D, Up as U};

    #[test]
    fn singlet_parallel_and_antiparallel() {
        let born = born_distribution(&singlet_branches(0.0));
        assert_eq!(born.probability(&[U, D]), 0.5);
        assert_eq!(born.probability(&[D, U]), 0.5);
        assert_eq!(born.probability(&[U, U]), 0.0);
        assert_eq!(singlet_branches(0.0).branches().len(), 2);

        let born = born_distribution(&singlet_branches(PI));
        assert!((born.probability(&[U, U]) - 0.5).abs() < 1e-15);
        assert!((born.probability(&[D, D]) - 0.5).abs() < 1e-15);
        assert!(born.probability(&[U, D]) < 1e-30);
    }

    #[test]
    fn singlet_at_120_degrees() {
        let born = born_distribution(&singlet_branches(2.0 * PI / 3.0));
        assert!((born.probability(&[U, U]) - 3.0 / 8.0).abs() < 1e-15);
        assert!((born.probability(&[U, D]) - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn singlet_correlation_is_minus_cosine() {
        for i in 0..=24 {
            let theta = i as f64 * PI / 12.0;
            let e = born_distribution(&singlet_branches(theta)).correlation();
            assert!((e + theta.cos()).abs() < 1e-14);
            let p = born_distribution(&singlet_branches(theta)).probability(&[U, D]);
            assert!((p - (theta / 2.0).cos().powi(2) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mermin_patterns() {
        let xyy = mermin_branches(MerminSetting::Xyy);
        let expected: Vec<Pattern> =
            vec![vec![U, U, U], vec![U, D, D], vec![D, D, U], vec![D, U, D]];
        for p in &expected {
            assert_eq!(born_distribution(&xyy).probability(p), 0.25);
        }
        assert_eq!(xyy.branches().len(), 4);

        let xxx = mermin_branches(MerminSetting::Xxx);
        for b in xxx.branches() {
            assert_eq!(pattern_product(&b.pattern), -1);
            assert_eq!(b.weight, 0.25);
        }
        for p in [[D, D, D], [D, U, U], [U, D, U], [U, U, D]] {
            assert_eq!(born_distribution(&xxx).probability(&p), 0.25);
        }
    }

    #[test]
    fn ghz4_patterns() {
        for s in Ghz4Setting::ALL {
            let st = ghz4_branches(s);
            assert_eq!(st.branches().len(), 8);
            for b in st.branches() {
                assert_eq!(pattern_product(&b.pattern), s.eigenvalue());
                assert_eq!(b.weight, 0.125);
            }
        }
        // the four hyperbolic terms of the xxxx velocity and their negations
        let xxxx = born_distribution(&ghz4_branches(Ghz4Setting::Xxxx));
        for p in [[D, D, D, U], [D, U, U, U], [U, D, U, U], [U, U, D, U]] {
            assert_eq!(xxxx.probability(&p), 0.125);
            let neg: Vec<Spin> = p.iter().map(|s| s.flip()).collect();
            assert_eq!(xxxx.probability(&neg), 0.125);
        }
    }

    #[test]
    fn settings_parse() {
        assert_eq!("xyy".parse::<MerminSetting>().unwrap(), MerminSetting::Xyy);
        assert_eq!("XXYY".parse::<Ghz4Setting>().unwrap(), Ghz4Setting::Xxyy);
        assert!(matches!(
            "xxy".parse::<MerminSetting>(),
            Err(Error::UnknownSetting(_))
        ));
        assert!("zzzz".parse::<Ghz4Setting>().is_err());
        assert_eq!(MerminSetting::Yxy.measurement().axes[0], MagnetAxis::y());
    }

    #[test]
    fn axis_projection() {
        assert_eq!(axis_coordinate(0.3, 0.7, MagnetAxis::new(0.0)), 0.7);
        assert!((axis_coordinate(0.3, 0.7, MagnetAxis::new(FRAC_PI_2)) - 0.3).abs() < 1e-15);
        let (y, z) = (1e-3 * 3f64.sqrt() / 2.0, 0.5e-3);
        let zp = axis_coordinate(y, z, MagnetAxis::new(2.0 * PI / 3.0));
        assert!((zp - 0.5e-3).abs() < 1e-18);
        let zm = axis_coordinate_with_sense(
            y,
            z,
            MagnetAxis::new(2.0 * PI / 3.0),
            RotationSense::Negative,
        );
        assert!((zm + 1e-3).abs() < 1e-18);
    }

    #[test]
    fn axis_normalisation() {
        assert!((MagnetAxis::new(-FRAC_PI_2).angle() - 1.5 * PI).abs() < 1e-15);
        assert!((MagnetAxis::new(5.0 * PI).angle() - PI).abs() < 1e-14);
        assert_eq!(MagnetAxis::new(-1e-18).angle(), 0.0);
    }

    #[test]
    fn rejects_bad_states() {
        assert_eq!(BranchState::new(vec![]), Err(Error::EmptyState));
        let dup = vec![
            Branch {
                weight: 0.5,
                pattern: vec![U, D],
            },
            Branch {
                weight: 0.5,
                pattern: vec![U, D],
            },
        ];
        assert!(BranchState::new(dup).is_err());
        let short = vec![Branch {
            weight: 0.9,
            pattern: vec![U, D],
        }];
        assert!(BranchState::new(short).is_err());
        assert!(MeasurementConfig::from_angles(&[0.0]).is_err());
        assert!(MeasurementConfig::from_angles(&[0.0; 5]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn singlet_weights_normalised_and_negation_symmetric(theta in -10.0f64..10.0) {
                let st = singlet_branches(theta);
                let sum: f64 = st.branches().iter().map(|b| b.weight).sum();
                prop_assert!((sum - 1.0).abs() < 1e-12);
                let born = born_distribution(&st);
                for b in st.branches() {
                    let neg: Vec<Spin> = b.pattern.iter().map(|s| s.flip()).collect();
                    prop_assert_eq!(born.probability(&neg), b.weight);
                }
            }

            #[test]
            fn projection_preserves_norm(y in -1.0f64..1.0, z in -1.0f64..1.0, a in -7.0f64..7.0) {
                let along = axis_coordinate(y, z, MagnetAxis::new(a));
                let across = axis_coordinate(y, z, MagnetAxis::new(a + FRAC_PI_2));
                let r2 = y * y + z * z;
                prop_assert!((along * along + across * across - r2).abs() < 1e-12);
            }
        }
    }
}
