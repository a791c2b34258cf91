//! Second-harmonic duplex link: received powers, receiver noise and achievable rates.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::config::CsdrConfig;
use crate::power::PowerBreakdown;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub p_down: f64,
    pub p_up: f64,
    /// Unused leftward second harmonic reaching PD1.
    pub p_res: f64,
    pub c1: f64,
    pub c2: f64,
    pub sigma_n_sq_up: f64,
    pub sigma_n_sq_down: f64,
    /// bit/s/Hz
    pub r_b_up: f64,
    /// bit/s/Hz
    pub r_b_down: f64,
}

impl LinkBudget {
    pub fn bps_up(&self, config: &CsdrConfig) -> f64 {
        self.r_b_up * config.b_r
    }

    pub fn bps_down(&self, config: &CsdrConfig) -> f64 {
        self.r_b_down * config.b_r
    }
}

/// Path from the SHG crystal out through M3 and M5 to PD2.
pub fn downlink_power(config: &CsdrConfig, p_2nu_plus: f64) -> f64 {
    let c = config;
    let tl = c.t_lens();
    c.t_pd2
        * c.tp_mirror() // M5
        * tl // L6
        * c.tp_m3()
        * tl // L4
        * c.rp_eom()
        * c.t_air()
        * c.rp_eom()
        * tl // L3
        * c.tp_mirror() // M2
        * tl // L2
        * tl // gain medium
        * tl // L1
        * p_2nu_plus
}

/// Transmitter to M3 and back onto the uplink path.
pub fn uplink_c1(config: &CsdrConfig) -> f64 {
    let c = config;
    let tl = c.t_lens();
    c.rp_m3 * tl * c.rp_eom() * c.t_air() * c.rp_eom() * tl * c.tp_mirror() * tl * tl * tl
}

/// Return trip of the reflected second harmonic through the transmitter to PD1.
pub fn uplink_c2(config: &CsdrConfig) -> f64 {
    let c = config;
    let tl = c.t_lens();
    c.t_pd1
        * c.tp_mirror() // M4
        * tl // L5
        * c.tp_mirror() // M1
        * tl // SHG crystal
        * tl // L1
        * tl // gain medium
        * tl // L2
        * c.tp_mirror() // M2
        * tl // L3
        * tl // L4
        * c.rp_eom()
        * c.t_air()
        * c.rp_eom()
}

/// `(p_up, p_res)` at PD1.
pub fn uplink_power(config: &CsdrConfig, p_2nu_plus: f64, p_2nu_minus: f64) -> (f64, f64) {
    let c = config;
    let p_up = uplink_c1(c) * uplink_c2(c) * p_2nu_plus;
    let p_res = c.t_pd1 * c.tp_mirror() * c.t_lens() * c.tp_mirror() * p_2nu_minus;
    (p_up, p_res)
}

/// Shot plus thermal noise variance (A^2) for total optical power `p_pd_total` on the detector.
pub fn noise_variance(config: &CsdrConfig, p_pd_total: f64) -> f64 {
    let c = config;
    2.0 * c.q_e * (c.rho_pd * p_pd_total + c.i_bk) * c.b_r + 4.0 * c.k_b * c.t_t * c.b_r / c.r_il
}

/// IM/DD lower-bound spectral efficiency in bit/s/Hz.
pub fn rate(config: &CsdrConfig, p_signal: f64, sigma_n_sq: f64) -> f64 {
    let i = config.rho_pd * p_signal;
    let snr = i * i / (2.0 * PI * E * sigma_n_sq);
    0.5 * snr.ln_1p() / std::f64::consts::LN_2
}

pub fn link_budget(config: &CsdrConfig, power: &PowerBreakdown) -> LinkBudget {
    let p_down = downlink_power(config, power.p_2nu_plus);
    let (p_up, p_res) = uplink_power(config, power.p_2nu_plus, power.p_2nu_minus);
    let sigma_n_sq_down = noise_variance(config, p_down);
    let sigma_n_sq_up = noise_variance(config, p_up + p_res);
    LinkBudget {
        p_down,
        p_up,
        p_res,
        c1: uplink_c1(config),
        c2: uplink_c2(config),
        sigma_n_sq_up,
        sigma_n_sq_down,
        r_b_up: rate(config, p_up, sigma_n_sq_up),
        r_b_down: rate(config, p_down, sigma_n_sq_down),
    }
}
