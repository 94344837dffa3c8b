//! Trajectory integration through the magnets and attractor-basin
//! classification.
//!
//! Only the magnet-axis coordinates are integrated; the transverse and
//! longitudinal motions have closed forms. Stepping is Dormand-Prince 5(4)
//! with the standard 4th-order continuous extension for output.

use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{derive_constants, PhysicalParams};
use crate::spin::{Pattern, Spin};
use crate::states::BranchState;
use crate::velocity::{BranchField, MAX_PARTICLES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    pub rtol: f64,
    /// Absolute tolerance in units of `δr0`.
    pub atol_factor: f64,
    /// Largest step as a fraction of `τ`.
    pub max_step_fraction: f64,
    /// Steps shorter than this (s) abort the integration.
    pub min_step: f64,
    /// Number of uniform output intervals on `[0, τ]`.
    pub n_output: usize,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol_factor: 1e-12,
            max_step_fraction: 1.0 / 200.0,
            min_step: 1e-15,
            n_output: 200,
            max_steps: 2_000_000,
        }
    }
}

impl StepControl {
    /// Both tolerances scaled by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            rtol: self.rtol * factor,
            atol_factor: self.atol_factor * factor,
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryPoint>,
    /// Digest of the state, initial point, parameters and controller.
    pub params_hash: u64,
}

impl Trajectory {
    pub fn endpoint(&self) -> &TrajectoryPoint {
        self.samples
            .last()
            .expect("trajectory has at least two samples")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Outcome {
    pub signs: Pattern,
    pub ambiguous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl Outcome {
    pub fn product(&self) -> i8 {
        crate::spin::pattern_product(&self.signs)
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type Vector = [f64; MAX_PARTICLES];

/// Continuous extension of one accepted step.
struct DenseStep {
    t0: f64,
    h: f64,
    r: [Vector; 5],
}

impl DenseStep {
    fn eval(&self, t: f64, n: usize) -> Vector {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; MAX_PARTICLES];
        for i in 0..n {
            let r = &self.r;
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

struct Stepper<'a> {
    field: &'a BranchField,
    n: usize,
    rtol: f64,
    atol: f64,
}

impl Stepper<'_> {
    fn f(&self, t: f64, y: &Vector) -> Vector {
        let mut out = [0.0; MAX_PARTICLES];
        self.field.velocity(t, &y[..self.n], &mut out[..self.n]);
        out
    }

    /// Integrates from 0 to `t_end`, calling `on_step` after every accepted
    /// step. Returns the final state.
    fn run(
        &self,
        y0: &[f64],
        t_end: f64,
        ctrl: &StepControl,
        mut on_step: impl FnMut(&DenseStep),
    ) -> Result<Vector> {
        let n = self.n;
        let mut y = [0.0; MAX_PARTICLES];
        y[..n].copy_from_slice(y0);
        let mut t = 0.0;
        if t_end <= 0.0 {
            return Ok(y);
        }
        let h_max = ctrl.max_step_fraction * t_end;
        let mut h = h_max * 1e-3;
        let mut k1 = self.f(t, &y);
        let mut steps = 0usize;
        let lincomb = |y: &Vector, terms: &[(f64, &Vector)], h: f64| -> Vector {
            let mut out = *y;
            for i in 0..n {
                let mut acc = 0.0;
                for (c, k) in terms {
                    acc += c * k[i];
                }
                out[i] += h * acc;
            }
            out
        };

        while t < t_end {
            steps += 1;
            if steps > ctrl.max_steps {
                return Err(Error::TooManySteps(ctrl.max_steps));
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            let k2 = self.f(t + C2 * h, &lincomb(&y, &[(A21, &k1)], h));
            let k3 = self.f(t + C3 * h, &lincomb(&y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = self.f(
                t + C4 * h,
                &lincomb(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
            );
            let k5 = self.f(
                t + C5 * h,
                &lincomb(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = self.f(
                t + h,
                &lincomb(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    h,
                ),
            );
            let y1 = lincomb(
                &y,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                h,
            );
            let t1 = if last { t_end } else { t + h };
            let k7 = self.f(t1, &y1);

            let mut err = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();

            if err <= 1.0 {
                let mut r = [[0.0; MAX_PARTICLES]; 5];
                for i in 0..n {
                    let dy = y1[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    r[0][i] = y[i];
                    r[1][i] = dy;
                    r[2][i] = bspl;
                    r[3][i] = dy - h * k7[i] - bspl;
                    r[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                on_step(&DenseStep { t0: t, h, r });
                t = t1;
                y = y1;
                k1 = k7;
                if last {
                    break;
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * fac).min(h_max);
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
            if h < ctrl.min_step {
                return Err(Error::Stiffness {
                    t,
                    coords: y[..n].to_vec(),
                });
            }
        }
        Ok(y)
    }
}

fn check_inputs(state: &BranchState, initial: &[f64], params: &PhysicalParams) -> Result<()> {
    if initial.len() != state.n_particles() {
        return Err(Error::ParticleMismatch {
            expected: state.n_particles(),
            got: initial.len(),
        });
    }
    if let Some(bad) = initial.iter().find(|z| !z.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "initial",
            reason: format!("initial coordinate {bad} is not finite"),
        });
    }
    if !(params.tau > 0.0) {
        return Err(Error::InvalidParameter {
            field: "tau",
            reason: "time of flight must be positive to integrate".into(),
        });
    }
    Ok(())
}

/// Prepared integrator for one state and parameter set.
#[derive(Debug, Clone)]
pub struct Integrator {
    field: BranchField,
    params: PhysicalParams,
    ctrl: StepControl,
}

impl Integrator {
    pub fn new(state: &BranchState, params: &PhysicalParams, ctrl: StepControl) -> Result<Self> {
        let dc = derive_constants(params)?;
        Ok(Self {
            field: BranchField::new(state, dc)?,
            params: *params,
            ctrl,
        })
    }

    fn stepper(&self) -> Stepper<'_> {
        Stepper {
            field: &self.field,
            n: self.field.n_particles(),
            rtol: self.ctrl.rtol,
            atol: self.ctrl.atol_factor * self.params.delta_r0,
        }
    }

    /// Magnet-axis coordinates at `t = τ`.
    pub fn endpoint(&self, initial: &[f64]) -> Result<Vec<f64>> {
        let n = self.field.n_particles();
        if initial.len() != n {
            return Err(Error::ParticleMismatch {
                expected: n,
                got: initial.len(),
            });
        }
        let y = self
            .stepper()
            .run(initial, self.params.tau, &self.ctrl, |_| {})?;
        Ok(y[..n].to_vec())
    }

    pub fn outcome(&self, initial: &[f64]) -> Result<Outcome> {
        Ok(classify_coords(
            &self.endpoint(initial)?,
            self.params.class_threshold(),
        ))
    }
}

/// Integrates `dz/dt = v(z, t)` over `[0, τ]` and samples the solution at
/// `ctrl.n_output + 1` uniform times.
pub fn integrate(
    state: &BranchState,
    initial: &[f64],
    params: &PhysicalParams,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    check_inputs(state, initial, params)?;
    let integrator = Integrator::new(state, params, *ctrl)?;
    let n = initial.len();
    let tau = params.tau;
    let n_out = ctrl.n_output.max(1);
    let times: Vec<f64> = (0..=n_out)
        .map(|i| {
            if i == n_out {
                tau
            } else {
                tau * i as f64 / n_out as f64
            }
        })
        .collect();

    let mut samples = Vec::with_capacity(times.len());
    samples.push(TrajectoryPoint {
        t: 0.0,
        coords: initial.to_vec(),
    });
    let mut next = 1;
    let end = integrator.stepper().run(initial, tau, ctrl, |step| {
        let t_hi = step.t0 + step.h;
        while next < n_out && times[next] <= t_hi {
            let y = step.eval(times[next], n);
            samples.push(TrajectoryPoint {
                t: times[next],
                coords: y[..n].to_vec(),
            });
            next += 1;
        }
    })?;
    samples.push(TrajectoryPoint {
        t: tau,
        coords: end[..n].to_vec(),
    });

    Ok(Trajectory {
        samples,
        params_hash: config_digest(state, initial, params, ctrl),
    })
}

fn config_digest(
    state: &BranchState,
    initial: &[f64],
    params: &PhysicalParams,
    ctrl: &StepControl,
) -> u64 {
    let mut h = DefaultHasher::new();
    for b in state.branches() {
        b.weight.to_bits().hash(&mut h);
        b.pattern.hash(&mut h);
    }
    for z in initial {
        z.to_bits().hash(&mut h);
    }
    for v in [
        params.mass,
        params.mu,
        params.a0,
        params.a1,
        params.delta_r0,
        params.v0,
        params.tau,
        params.hbar,
        ctrl.rtol,
        ctrl.atol_factor,
        ctrl.max_step_fraction,
        ctrl.min_step,
    ] {
        v.to_bits().hash(&mut h);
    }
    ctrl.n_output.hash(&mut h);
    h.finish()
}

pub fn classify_coords(coords: &[f64], threshold: f64) -> Outcome {
    Outcome {
        signs: coords.iter().map(|&z| Spin::from_sign(z)).collect(),
        ambiguous: coords.iter().any(|z| z.abs() < threshold || *z == 0.0),
        diagnostic: None,
    }
}

/// Sign of every coordinate at `τ`; ambiguous when any lies within
/// `1e-3 ατ²` of the origin.
pub fn classify(traj: &Trajectory, params: &PhysicalParams) -> Outcome {
    classify_coords(&traj.endpoint().coords, params.class_threshold())
}
