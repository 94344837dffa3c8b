//! Bohmian velocity fields along the magnet axes.
//!
//! Every branch contributes its Born weight times
//! `exp(g(t) Σ_j s_j z_j)`, `g(t) = βt² / (2(1 + k²t²))`. For particle `i`
//! the steering ratio `R_i` is the `s_i`-signed sum over the unsigned sum,
//! and the velocity is
//!
//! ```text
//! dz_i/dt = k²t/(1+k²t²) z_i + R_i (2αt − k²αt³/(1+k²t²))
//! ```
//!
//! The exponents reach several hundred near the end of the magnet, so the
//! sums are taken relative to their largest term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{packet_z, spread_at, DerivedConstants, PhysicalParams};
use crate::states::BranchState;

/// Largest branch count a [`BranchField`] handles without allocating.
pub const MAX_BRANCHES: usize = 16;
pub const MAX_PARTICLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub coords: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityVector(pub Vec<f64>);

/// Precomputed velocity field of one state; cheap to evaluate repeatedly.
#[derive(Debug, Clone)]
pub struct BranchField {
    log_weights: Vec<f64>,
    /// Branch-major sign table, `n_particles` entries per branch.
    signs: Vec<f64>,
    n_particles: usize,
    dc: DerivedConstants,
}

impl BranchField {
    pub fn new(state: &BranchState, dc: DerivedConstants) -> Result<Self> {
        let branches = state.branches();
        if branches.is_empty() {
            return Err(Error::EmptyState);
        }
        if branches.len() > MAX_BRANCHES || state.n_particles() > MAX_PARTICLES {
            return Err(Error::InvalidParameter {
                field: "state",
                reason: format!(
                    "{} branches over {} particles exceeds the supported size",
                    branches.len(),
                    state.n_particles()
                ),
            });
        }
        Ok(Self {
            log_weights: branches.iter().map(|b| b.weight.ln()).collect(),
            signs: branches
                .iter()
                .flat_map(|b| b.pattern.iter().map(|s| s.sign()))
                .collect(),
            n_particles: state.n_particles(),
            dc,
        })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.dc
    }

    fn exponent_scale(&self, t: f64) -> f64 {
        let kt = self.dc.k * t;
        self.dc.beta * t * t / (2.0 * (1.0 + kt * kt))
    }

    /// Steering ratios `R_i ∈ [-1, 1]`.
    pub fn ratios(&self, t: f64, z: &[f64], out: &mut [f64]) {
        let n = self.n_particles;
        debug_assert_eq!(z.len(), n);
        let g = self.exponent_scale(t);
        let mut expo = [0.0f64; MAX_BRANCHES];
        let nb = self.log_weights.len();
        let mut max = f64::NEG_INFINITY;
        for b in 0..nb {
            let signs = &self.signs[b * n..(b + 1) * n];
            let dot: f64 = signs.iter().zip(z).map(|(s, zi)| s * zi).sum();
            let e = self.log_weights[b] + g * dot;
            expo[b] = e;
            max = max.max(e);
        }
        let mut den = 0.0;
        let mut num = [0.0f64; MAX_PARTICLES];
        for b in 0..nb {
            let w = (expo[b] - max).exp();
            den += w;
            let signs = &self.signs[b * n..(b + 1) * n];
            for i in 0..n {
                num[i] += signs[i] * w;
            }
        }
        for i in 0..n {
            let r = num[i] / den;
            debug_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r), "R = {r}");
            out[i] = r.clamp(-1.0, 1.0);
        }
    }

    /// Writes `dz_i/dt` for every particle into `out`.
    pub fn velocity(&self, t: f64, z: &[f64], out: &mut [f64]) {
        let DerivedConstants { k, alpha, .. } = self.dc;
        let kt2 = 1.0 + k * k * t * t;
        let diffusion = k * k * t / kt2;
        let drift = 2.0 * alpha * t - k * k * alpha * t * t * t / kt2;
        self.ratios(t, z, out);
        for (o, zi) in out.iter_mut().zip(z) {
            *o = diffusion * zi + *o * drift;
        }
    }
}

/// Closed-form velocity of every particle at `p`.
pub fn branch_velocity(
    state: &BranchState,
    p: &PhaseSpacePoint,
    dc: &DerivedConstants,
) -> Result<VelocityVector> {
    if p.coords.len() != state.n_particles() {
        return Err(Error::ParticleMismatch {
            expected: state.n_particles(),
            got: p.coords.len(),
        });
    }
    let field = BranchField::new(state, *dc)?;
    let mut out = vec![0.0; p.coords.len()];
    field.velocity(p.t, &p.coords, &mut out);
    Ok(VelocityVector(out))
}

/// Transverse or longitudinal velocity: `v + k²t/(1+k²t²) (u − v t)`.
pub fn transverse_velocity(u: f64, t: f64, dc: &DerivedConstants, v_drift: f64) -> f64 {
    let k2 = dc.k * dc.k;
    v_drift + k2 * t / (1.0 + k2 * t * t) * (u - v_drift * t)
}

/// `J/ρ` from the assembled many-particle wavefunction.
///
/// Each branch amplitude is the product of the analytic packets along the
/// magnet axes; the density is the weighted sum of the branch moduli and
/// the current uses central differences of each branch phase with step
/// `1e-6 δr_t`. Spin cross terms vanish, so the branches are summed
/// incoherently. Moduli are kept as logarithms.
pub fn numeric_velocity_oracle(
    state: &BranchState,
    params: &PhysicalParams,
    p: &PhaseSpacePoint,
) -> Result<VelocityVector> {
    let n = state.n_particles();
    if p.coords.len() != n {
        return Err(Error::ParticleMismatch {
            expected: n,
            got: p.coords.len(),
        });
    }
    if state.branches().is_empty() {
        return Err(Error::EmptyState);
    }
    let h = 1e-6 * spread_at(params, p.t);

    let branch_phase = |pattern: &[crate::spin::Spin], z: &[f64]| -> f64 {
        pattern
            .iter()
            .zip(z)
            .map(|(s, zi)| packet_z(params, *zi, p.t, *s).phase)
            .sum()
    };

    let mut log_rho = Vec::with_capacity(state.branches().len());
    let mut grads = Vec::with_capacity(state.branches().len());
    for b in state.branches() {
        let log_mod: f64 = b
            .pattern
            .iter()
            .zip(&p.coords)
            .map(|(s, zi)| packet_z(params, *zi, p.t, *s).log_modulus)
            .sum();
        log_rho.push(b.weight.ln() + 2.0 * log_mod);

        let mut grad = vec![0.0; n];
        let mut shifted = p.coords.clone();
        for (i, g) in grad.iter_mut().enumerate() {
            shifted[i] = p.coords[i] + h;
            let up = branch_phase(&b.pattern, &shifted);
            shifted[i] = p.coords[i] - h;
            let down = branch_phase(&b.pattern, &shifted);
            shifted[i] = p.coords[i];
            *g = wrap_phase(up - down) / (2.0 * h);
        }
        grads.push(grad);
    }

    let max = log_rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NodeProximity { log_density: max });
    }
    let mut den = 0.0;
    let mut num = vec![0.0; n];
    for (lr, grad) in log_rho.iter().zip(&grads) {
        let w = (lr - max).exp();
        den += w;
        for (acc, g) in num.iter_mut().zip(grad) {
            *acc += w * g;
        }
    }
    let hbar_over_m = params.hbar / params.mass;
    Ok(VelocityVector(
        num.into_iter().map(|j| hbar_over_m * j / den).collect(),
    ))
}

/// Maps a phase difference into `(-π, π]`.
fn wrap_phase(d: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = (d + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Scale against which velocity discrepancies are judged: the drift speed
/// `2αt`, or the diffusive speed of a packet-width offset when there is no
/// magnet.
pub fn velocity_scale(params: &PhysicalParams, dc: &DerivedConstants, t: f64) -> f64 {
    let kt2 = 1.0 + dc.k * dc.k * t * t;
    let drift = (2.0 * dc.alpha * t).abs();
    let diffusive = dc.k * dc.k * t / kt2 * spread_at(params, t);
    drift.max(diffusive)
}

/// Largest discrepancy between [`BranchField::velocity`] and
/// [`numeric_velocity_oracle`] over an `n`-per-axis grid spanning
/// `±3 δr_t` in every coordinate at time `t`, in units of
/// `max(|v|, velocity_scale)`.
pub fn oracle_grid_deviation(
    state: &BranchState,
    params: &PhysicalParams,
    t: f64,
    n: usize,
) -> Result<f64> {
    use rayon::prelude::*;

    let dc = crate::physics::derive_constants(params)?;
    let field = BranchField::new(state, dc)?;
    let dims = state.n_particles();
    let half = 3.0 * spread_at(params, t);
    let axis: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                0.0
            } else {
                -half + 2.0 * half * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let scale = velocity_scale(params, &dc, t);
    let deviations = (0..n.pow(dims as u32))
        .into_par_iter()
        .map(|mut idx| {
            let mut z = vec![0.0; dims];
            for zi in z.iter_mut() {
                *zi = axis[idx % n];
                idx /= n;
            }
            let mut v = vec![0.0; dims];
            field.velocity(t, &z, &mut v);
            let o = numeric_velocity_oracle(state, params, &PhaseSpacePoint { coords: z, t })?;
            let norm = o.0.iter().fold(scale, |m, x| m.max(x.abs()));
            Ok(v.iter()
                .zip(&o.0)
                .map(|(a, b)| (a - b).abs() / norm)
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(deviations.into_iter().fold(0.0, f64::max))
}
