//! Resonator power model.
//!
//! The physical CSDR is folded into a two-mirror power cycle around the gain
//! medium: an equivalent left reflectivity (SHG crystal plus M1) and an
//! equivalent right reflectivity (L2 plus the extra-sub-resonator acting as a
//! Fabry-Perot reflector). Rigrod analysis then gives threshold, slope
//! efficiency and output power. The SHG efficiency depends on the fundamental
//! power that itself depends on the SHG loss, so the operating point is a
//! fixed point solved by iteration from zero conversion.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cavity::Cavity;
use crate::config::CsdrConfig;
use crate::error::{Error, Result};

/// Powers below this are reported as exactly zero.
pub const POWER_FLOOR: f64 = 1e-12;

pub const FIXED_POINT_TOLERANCE: f64 = 1e-10;
pub const FIXED_POINT_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityLosses {
    pub t_2o: f64,
    pub t_2s: f64,
    pub t_s: f64,
    pub t_diff: f64,
    pub t_ier: f64,
    pub t_air: f64,
    pub r_1: f64,
    pub r_2: f64,
    pub r_er_hat: f64,
    pub t_er_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBreakdown {
    pub p_th: f64,
    pub eta_slop: f64,
    pub eta_slop_prime: f64,
    pub p_out: f64,
    /// Fundamental power incident on the SHG crystal.
    pub p_nu: f64,
    pub p_nu_ext_fwd: f64,
    pub p_nu_ext_bwd: f64,
    pub eta_shg: f64,
    pub p_2nu_minus: f64,
    pub p_2nu_plus: f64,
    /// Fixed-point iterations used.
    pub iterations: usize,
}

/// Operating point plus the intermediate quantities it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub losses: CavityLosses,
    pub power: PowerBreakdown,
    /// Multimode beam radius in the SHG crystal.
    pub w_s: f64,
    pub w00_gl: f64,
}

fn floor(p: f64) -> f64 {
    if p < POWER_FLOOR {
        0.0
    } else {
        p
    }
}

fn fp_denominator(r_m2: f64, r_m3: f64, t_ier: f64, phi: f64) -> f64 {
    1.0 + r_m2 * r_m3 * t_ier * t_ier + 2.0 * t_ier * (r_m2 * r_m3).sqrt() * phi.cos()
}

/// Extra-sub-resonator transmittance at round-trip phase `phi`.
pub fn fp_transmittance_with(r_m2: f64, r_m3: f64, t_ier: f64, phi: f64) -> f64 {
    (1.0 - r_m2) * (1.0 - r_m3) * t_ier / fp_denominator(r_m2, r_m3, t_ier, phi)
}

/// Extra-sub-resonator reflectance seen from inside the intra-sub-resonator.
pub fn fp_reflectance_with(r_m2: f64, r_m3: f64, t_ier: f64, phi: f64) -> f64 {
    let num = r_m2 + r_m3 * t_ier * t_ier + 2.0 * t_ier * (r_m2 * r_m3).sqrt() * phi.cos();
    num / fp_denominator(r_m2, r_m3, t_ier, phi)
}

/// `(t_er_hat, r_er_hat)` at the reflectance peak, cos(phi) = 1.
pub fn resonant_fp_with(r_m2: f64, r_m3: f64, t_ier: f64) -> (f64, f64) {
    let den = (1.0 + t_ier * (r_m2 * r_m3).sqrt()).powi(2);
    let t = (1.0 - r_m2) * (1.0 - r_m3) * t_ier / den;
    let r = (r_m2.sqrt() + t_ier * r_m3.sqrt()).powi(2) / den;
    (t, r)
}

pub fn fp_transmittance(config: &CsdrConfig, phi: f64) -> f64 {
    fp_transmittance_with(config.r_m2, config.r_m3, config.t_ier(), phi)
}

pub fn fp_reflectance(config: &CsdrConfig, phi: f64) -> f64 {
    fp_reflectance_with(config.r_m2, config.r_m3, config.t_ier(), phi)
}

pub fn resonant_fp(config: &CsdrConfig) -> (f64, f64) {
    resonant_fp_with(config.r_m2, config.r_m3, config.t_ier())
}

/// Round-trip phase of the air-gap cavity for the configured geometry.
pub fn round_trip_phase(config: &CsdrConfig) -> f64 {
    4.0 * PI * (config.d5 + config.d_w + config.d6) / config.lambda_nu
}

/// Single-pass aperture transmittance `1 - exp(-2 (a / w)^2)`.
pub fn aperture_transmittance(aperture: f64, w00: f64) -> f64 {
    -(-2.0 * (aperture / w00).powi(2)).exp_m1()
}

pub fn diffraction_loss(config: &CsdrConfig) -> Result<f64> {
    let cavity = Cavity::new(config)?;
    let w = cavity
        .eigenmode(config.a_g)?
        .mode_radius(cavity.breakpoints().z_gl)?;
    Ok(aperture_transmittance(config.a_g, w))
}

/// Equivalent losses for a given diffraction factor and SHG efficiency.
pub fn losses_with(config: &CsdrConfig, t_diff: f64, eta_shg: f64) -> CavityLosses {
    let t_face = config.t_face();
    let t_lens = config.t_lens();
    let t_ier = config.t_ier();
    let (t_er_hat, r_er_hat) = resonant_fp_with(config.r_m2, config.r_m3, t_ier);
    let t_s = (1.0 - eta_shg) * t_face * t_face;
    CavityLosses {
        t_2o: t_face * t_lens * t_er_hat,
        t_2s: t_face * t_lens,
        t_s,
        t_diff,
        t_ier,
        t_air: config.t_air(),
        r_1: t_diff * t_face.powi(2) * t_lens.powi(2) * t_s.powi(2) * config.r_m1(),
        r_2: t_diff * t_face.powi(2) * t_lens.powi(2) * r_er_hat,
        r_er_hat,
        t_er_hat,
    }
}

/// Cavity losses at a given SHG efficiency (zero for the cold cavity).
pub fn cavity_losses(config: &CsdrConfig, eta_shg: f64) -> Result<CavityLosses> {
    Ok(losses_with(config, diffraction_loss(config)?, eta_shg))
}

/// Threshold and both slope efficiencies. `w_g = a_g`, so the overlap prefactor is 1.
fn rigrod(config: &CsdrConfig, l: &CavityLosses) -> (f64, f64, f64) {
    let rr = (l.r_1 * l.r_2).sqrt();
    let p_th = PI * config.a_g * config.a_g * config.i_s / config.eta_c * (1.0 / rr).ln();
    let eta_slop = config.eta_c * l.t_2o / ((1.0 + (l.r_2 / l.r_1).sqrt()) * (1.0 - rr));
    let eta_slop_prime = config.eta_c * l.t_2s / ((1.0 + (l.r_1 / l.r_2).sqrt()) * (1.0 - rr));
    (p_th, eta_slop, eta_slop_prime)
}

/// Single-pass SHG efficiency for fundamental power `p_nu` in a beam of radius `w_s`.
pub fn shg_efficiency(config: &CsdrConfig, p_nu: f64, w_s: f64) -> f64 {
    let c = config;
    let coeff = 8.0 * PI * PI * c.d_eff * c.d_eff * c.l_s * c.l_s
        / (c.eps_0 * c.c * c.lambda_nu * c.lambda_nu * c.n_s.powi(3));
    coeff * p_nu / (PI * w_s * w_s)
}

/// Solves the self-consistent SHG efficiency and all resulting powers.
pub fn solve_operating_point(config: &CsdrConfig) -> Result<OperatingPoint> {
    let cavity = Cavity::new(config)?;
    let mode = cavity.eigenmode(config.a_g)?;
    let w00_gl = mode.mode_radius(cavity.breakpoints().z_gl)?;
    let w_s = mode.multimode_radius(0.0)?;
    let t_diff = aperture_transmittance(config.a_g, w00_gl);

    let pump_excess = |p_th: f64| (config.p_in - p_th).max(0.0);

    let mut eta = 0.0;
    let mut damping = 1.0;
    let mut last_sign = 0.0f64;
    let mut flips = 0;
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    while iterations < FIXED_POINT_MAX_ITERATIONS {
        iterations += 1;
        let l = losses_with(config, t_diff, eta);
        let (p_th, _, eta_slop_prime) = rigrod(config, &l);
        let p_nu = eta_slop_prime * pump_excess(p_th);
        let next = shg_efficiency(config, p_nu, w_s);
        delta = next - eta;
        if !delta.is_finite() || !(0.0..1.0).contains(&next) {
            return Err(Error::FixedPointDivergence {
                iterations,
                last_delta: delta,
            });
        }
        if delta.abs() < FIXED_POINT_TOLERANCE {
            eta = next;
            break;
        }
        let sign = delta.signum();
        if last_sign != 0.0 && sign != last_sign {
            flips += 1;
            if flips >= 2 {
                damping = 0.5;
            }
        }
        last_sign = sign;
        eta += damping * delta;
    }
    if delta.abs() >= FIXED_POINT_TOLERANCE {
        return Err(Error::FixedPointDivergence {
            iterations,
            last_delta: delta,
        });
    }

    let losses = losses_with(config, t_diff, eta);
    let (p_th, eta_slop, eta_slop_prime) = rigrod(config, &losses);
    let p_out = eta_slop * pump_excess(p_th);
    let p_nu = eta_slop_prime * pump_excess(p_th);
    // a perfect M3 transmits nothing, so the forward power is not observable from P_out
    let p_nu_ext_fwd = if config.r_m3 < 1.0 {
        p_out / (1.0 - config.r_m3)
    } else {
        0.0
    };
    let t_s = losses.t_s;
    let power = PowerBreakdown {
        p_th,
        eta_slop,
        eta_slop_prime,
        p_out: floor(p_out),
        p_nu: floor(p_nu),
        p_nu_ext_fwd: floor(p_nu_ext_fwd),
        p_nu_ext_bwd: floor(config.r_m3 * p_nu_ext_fwd),
        eta_shg: eta,
        p_2nu_minus: floor(eta * t_s * p_nu),
        p_2nu_plus: floor(eta * (1.0 - eta) * config.r_m1() * t_s * t_s * p_nu),
        iterations,
    };
    Ok(OperatingPoint {
        losses,
        power,
        w_s,
        w00_gl,
    })
}
