//! PV energy harvesting: photocurrent, single-diode I-V solve and the static maximum power point.

use serde::Serialize;

use crate::config::CsdrConfig;
use crate::error::{Error, Result};
use crate::numeric::{bisect_decreasing, golden_max};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PvOperatingPoint {
    pub i_pv: f64,
    /// Junction voltage.
    pub v_d: f64,
    pub v_chg: f64,
    pub i_chg: f64,
    pub p_chg: f64,
    pub v_oc: f64,
    /// Load resistance realising this point; `None` when no current flows.
    pub r_pl: Option<f64>,
}

/// Optical power reaching the PV panel after L6 and M5.
pub fn received_power(config: &CsdrConfig, p_out: f64) -> f64 {
    config.t_lens() * config.r_m5 * p_out
}

pub fn photocurrent(config: &CsdrConfig, p_out: f64) -> Result<f64> {
    if !(p_out >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "output power must be >= 0, got {p_out}"
        )));
    }
    Ok(config.rho_pv * config.t_pv * received_power(config, p_out))
}

/// Diode model of the panel for a fixed photocurrent.
#[derive(Debug, Clone, Copy)]
struct Panel {
    i_pv: f64,
    i_0: f64,
    /// N_s n_d V_t
    v_scale: f64,
    r_s: f64,
    r_sh: f64,
}

impl Panel {
    fn new(config: &CsdrConfig, i_pv: f64) -> Result<Self> {
        if !(i_pv >= 0.0) || !i_pv.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "photocurrent must be finite and >= 0, got {i_pv}"
            )));
        }
        Ok(Panel {
            i_pv,
            i_0: config.i_0,
            v_scale: config.n_series * config.n_d * config.thermal_voltage(),
            r_s: config.r_s,
            r_sh: config.r_sh,
        })
    }

    /// Current delivered to the terminals at junction voltage `v_d`.
    fn terminal_current(&self, v_d: f64) -> f64 {
        self.i_pv - self.i_0 * (v_d / self.v_scale).exp_m1() - v_d / self.r_sh
    }

    /// Upper junction-voltage bound where the terminal current is already <= 0.
    fn v_bound(&self) -> f64 {
        let mut hi = if self.i_0 > 0.0 {
            self.v_scale * (self.i_pv / self.i_0).ln_1p()
        } else {
            self.i_pv * self.r_sh
        };
        if !hi.is_finite() || hi <= 0.0 {
            hi = 1.0;
        }
        while self.terminal_current(hi) > 0.0 && hi < 1e9 {
            hi *= 2.0;
        }
        hi
    }

    fn open_circuit_voltage(&self) -> f64 {
        if self.i_pv == 0.0 {
            return 0.0;
        }
        bisect_decreasing(|v| self.terminal_current(v), 0.0, self.v_bound())
    }

    /// Terminal current at charging voltage `v_chg` (series drop included).
    fn current_at(&self, v_chg: f64) -> f64 {
        let g = |i: f64| self.terminal_current(v_chg + i * self.r_s) - i;
        bisect_decreasing(g, 0.0, self.i_pv)
    }
}

fn point(panel: &Panel, v_oc: f64, v_chg: f64, i_chg: f64) -> PvOperatingPoint {
    PvOperatingPoint {
        i_pv: panel.i_pv,
        v_d: v_chg + i_chg * panel.r_s,
        v_chg,
        i_chg,
        p_chg: v_chg * i_chg,
        v_oc,
        r_pl: (i_chg > 0.0).then(|| v_chg / i_chg),
    }
}

/// Operating point with a fixed resistive load.
pub fn solve_iv(config: &CsdrConfig, i_pv: f64, r_load: f64) -> Result<PvOperatingPoint> {
    if !(r_load > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "load resistance must be > 0, got {r_load}"
        )));
    }
    let panel = Panel::new(config, i_pv)?;
    let v_oc = panel.open_circuit_voltage();
    if i_pv == 0.0 {
        return Ok(point(&panel, 0.0, 0.0, 0.0));
    }
    let r_total = r_load + panel.r_s;
    let v_d = bisect_decreasing(
        |v| panel.terminal_current(v) - v / r_total,
        0.0,
        panel.v_bound(),
    );
    let i_chg = v_d / r_total;
    Ok(PvOperatingPoint {
        i_pv,
        v_d,
        v_chg: i_chg * r_load,
        i_chg,
        p_chg: i_chg * i_chg * r_load,
        v_oc,
        r_pl: Some(r_load),
    })
}

/// Residual of the coupled diode and load equations at `op` (amperes).
pub fn iv_residual(config: &CsdrConfig, op: &PvOperatingPoint) -> f64 {
    let Ok(panel) = Panel::new(config, op.i_pv) else {
        return f64::NAN;
    };
    panel.terminal_current(op.v_d) - op.i_chg
}

/// Maximum charging power over `0 <= V_chg <= V_oc`.
pub fn mppt(config: &CsdrConfig, i_pv: f64) -> Result<PvOperatingPoint> {
    let panel = Panel::new(config, i_pv)?;
    let v_oc = panel.open_circuit_voltage();
    if v_oc == 0.0 {
        return Ok(point(&panel, 0.0, 0.0, 0.0));
    }
    let (v, _) = golden_max(|v| v * panel.current_at(v), 0.0, v_oc, 1e-13 * v_oc);
    Ok(point(&panel, v_oc, v, panel.current_at(v)))
}

/// Charging power on an explicit voltage grid, for scan-based checks.
pub fn power_at_voltage(config: &CsdrConfig, i_pv: f64, v_chg: f64) -> Result<f64> {
    let panel = Panel::new(config, i_pv)?;
    Ok(v_chg * panel.current_at(v_chg))
}
