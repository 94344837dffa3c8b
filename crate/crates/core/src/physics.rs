//! Experiment parameters and the analytic single-particle wavepackets.
//!
//! Everything is in CGS units. Inside the magnet the field is
//! `B_z = a0 + a1 z`, and each spin component of a Gaussian packet stays
//! Gaussian: it spreads as `δr0 √(1 + k²t²)` and its centre accelerates
//! as `±α t²`. Outside the magnet the centres translate uniformly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::Spin;

/// Parameters of one Stern-Gerlach line. Defaults describe a silver-atom
/// beam through a 10 cm magnet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Atomic mass (g).
    pub mass: f64,
    /// Gyromagnetic coupling (g cm² s⁻² G⁻¹).
    pub mu: f64,
    /// Uniform field component (G).
    pub a0: f64,
    /// Field gradient along the magnet axis (G cm⁻¹).
    pub a1: f64,
    /// Initial packet spread (cm).
    pub delta_r0: f64,
    /// Longitudinal speed (cm s⁻¹).
    pub v0: f64,
    /// Time of flight through the magnet (s).
    pub tau: f64,
    /// Reduced Planck constant (erg s).
    pub hbar: f64,
    /// Magnet length (cm); only used to cross-check `v0 * tau`.
    pub magnet_length: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            mass: 1.80e-22,
            mu: 9.27e-21,
            a0: 0.0,
            a1: 1.0e4,
            delta_r0: 1.0e-3,
            v0: 1.0e4,
            tau: 1.0e-3,
            hbar: 1.05e-27,
            magnet_length: 10.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("delta_r0", self.delta_r0),
            ("hbar", self.hbar),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be strictly positive, got {v}"),
                });
            }
        }
        let non_negative = [
            ("a1", self.a1),
            ("v0", self.v0),
            ("tau", self.tau),
            ("magnet_length", self.magnet_length),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be non-negative, got {v}"),
                });
            }
        }
        for (field, v) in [("mu", self.mu), ("a0", self.a0)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Warning text when `tau` disagrees with `magnet_length / v0` by more
    /// than 1 %.
    pub fn consistency_warning(&self) -> Option<String> {
        if self.v0 <= 0.0 || self.magnet_length <= 0.0 {
            return None;
        }
        let expected = self.magnet_length / self.v0;
        let rel = (self.tau - expected).abs() / expected;
        (rel > 0.01).then(|| {
            format!(
                "tau = {:e} s differs from magnet_length / v0 = {:e} s by {:.1}%",
                self.tau,
                expected,
                100.0 * rel
            )
        })
    }

    /// Displacement at which an outcome is treated as undecided:
    /// 0.1 % of the basin-centre displacement `α τ²`.
    pub fn class_threshold(&self) -> f64 {
        let alpha = self.a1 * self.mu / (2.0 * self.mass);
        1e-3 * (alpha * self.tau * self.tau).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Diffusion rate `ħ / (2 m δr0²)` (s⁻¹).
    pub k: f64,
    /// Half the classical acceleration `a1 μ / 2m` (cm s⁻²).
    pub alpha: f64,
    /// `a1 μ / (m δr0²)` (cm⁻¹ s⁻²).
    pub beta: f64,
}

pub fn derive_constants(params: &PhysicalParams) -> Result<DerivedConstants> {
    params.validate()?;
    let m = params.mass;
    let d2 = params.delta_r0 * params.delta_r0;
    Ok(DerivedConstants {
        k: params.hbar / (2.0 * m * d2),
        alpha: params.a1 * params.mu / (2.0 * m),
        beta: params.a1 * params.mu / (m * d2),
    })
}

fn diffusion_rate(params: &PhysicalParams) -> f64 {
    params.hbar / (2.0 * params.mass * params.delta_r0 * params.delta_r0)
}

/// Packet spread `δr0 √(1 + k²t²)`.
pub fn spread_at(params: &PhysicalParams, t: f64) -> f64 {
    let kt = diffusion_rate(params) * t;
    params.delta_r0 * (1.0 + kt * kt).sqrt()
}

/// One axis factor of a packet, kept in polar form so that the far tails
/// stay representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketValue {
    pub amplitude: Complex64,
    pub log_modulus: f64,
    pub phase: f64,
    pub center: f64,
    pub spread: f64,
}

impl PacketValue {
    fn new(log_modulus: f64, phase: f64, center: f64, spread: f64) -> Self {
        Self {
            amplitude: Complex64::from_polar(log_modulus.exp(), phase),
            log_modulus,
            phase,
            center,
            spread,
        }
    }
}

/// Normalised Gaussian envelope: `ln[(2π)^{-1/4} δr_t^{-1/2}] - (u-c)²/(4 δr_t²)`.
fn gaussian_log_modulus(u: f64, center: f64, spread: f64) -> f64 {
    let d = u - center;
    -0.25 * (2.0 * PI).ln() - 0.5 * spread.ln() - d * d / (4.0 * spread * spread)
}

/// Common spreading phase `k t (u-c)² / (4 δr_t²) - ½ arccos(δr0/δr_t)`.
fn spreading_phase(params: &PhysicalParams, u: f64, center: f64, spread: f64, t: f64) -> f64 {
    let k = diffusion_rate(params);
    let d = u - center;
    k * t * d * d / (4.0 * spread * spread) - 0.5 * (params.delta_r0 / spread).min(1.0).acos()
}

/// Magnet-axis factor of the spin-`spin` component inside the magnet,
/// `0 ≤ t ≤ τ`. The phase carries every term of the exact solution,
/// including the uniform-field and cubic-in-time pieces.
pub fn packet_z(params: &PhysicalParams, z: f64, t: f64, spin: Spin) -> PacketValue {
    let s = spin.sign();
    let alpha = params.a1 * params.mu / (2.0 * params.mass);
    let center = s * alpha * t * t;
    let spread = spread_at(params, t);
    let field_phase = s * params.mu * t * (params.a0 + params.a1 * z) / params.hbar;
    let cubic_phase = params.mu * params.mu * params.a1 * params.a1 * t.powi(3)
        / (6.0 * params.mass * params.hbar);
    let phase = spreading_phase(params, z, center, spread, t) + field_phase - cubic_phase;
    PacketValue::new(
        gaussian_log_modulus(z, center, spread),
        phase,
        center,
        spread,
    )
}

/// Free Gaussian factor drifting at `v_drift` (`v0` along the beam, 0 for
/// the transverse direction).
pub fn packet_free(params: &PhysicalParams, u: f64, t: f64, v_drift: f64) -> PacketValue {
    let center = v_drift * t;
    let spread = spread_at(params, t);
    let k0 = params.mass * v_drift / params.hbar;
    let plane_wave = k0 * u - params.hbar * k0 * k0 * t / (2.0 * params.mass);
    let phase = spreading_phase(params, u, center, spread, t) + plane_wave;
    PacketValue::new(
        gaussian_log_modulus(u, center, spread),
        phase,
        center,
        spread,
    )
}

/// Centre of the `spin` packet after it has left the magnet (`t ≥ τ`).
pub fn post_magnet_center(params: &PhysicalParams, spin: Spin, t: f64) -> Result<f64> {
    if !(t >= params.tau) {
        return Err(Error::Domain {
            what: "post-magnet time",
            reason: format!(
                "t = {t:e} s precedes the magnet exit at tau = {:e} s",
                params.tau
            ),
        });
    }
    let alpha = params.a1 * params.mu / (2.0 * params.mass);
    let tau = params.tau;
    Ok(spin.sign() * (alpha * tau * tau + 2.0 * alpha * tau * (t - tau)))
}

/// Velocity of the packet centres after the magnet, `±2ατ`.
pub fn exit_speed(params: &PhysicalParams) -> f64 {
    params.a1 * params.mu / params.mass * params.tau
}
