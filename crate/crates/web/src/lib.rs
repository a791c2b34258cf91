//! Browser bindings: three interactive curves computed by the core model.
//! Each export returns a flat `Float64Array` of fixed-width records.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

use csdr_core::cavity::{stability, Cavity};
use csdr_core::sweep::run_point;
use csdr_core::{CsdrConfig, Error};

fn config(d_w: f64) -> Result<CsdrConfig, String> {
    CsdrConfig::default()
        .with("d_w", d_w)
        .map_err(|e| e.to_string())
}

fn grid(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>, String> {
    if steps < 2 || !(start < stop) {
        return Err("need start < stop and at least two steps".into());
    }
    Ok((0..steps)
        .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
        .collect())
}

/// `[d_w, g1g2, stable]` records for spacing `d5_mm` over a working-distance range.
pub fn stability_records(
    d5_mm: f64,
    d_w_start: f64,
    d_w_stop: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    let base = CsdrConfig::default()
        .with("d5", d5_mm * 1e-3)
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * steps);
    for d_w in grid(d_w_start, d_w_stop, steps)? {
        let c = base.with("d_w", d_w).map_err(|e| e.to_string())?;
        let s = stability(&c).map_err(|e| e.to_string())?;
        out.extend([d_w, s.product, if s.stable { 1.0 } else { 0.0 }]);
    }
    Ok(out)
}

/// `[z, w00, w]` records along the cavity; empty when there is no eigenmode.
pub fn profile_records(d_w: f64, samples: usize) -> Result<Vec<f64>, String> {
    let c = config(d_w)?;
    let cav = Cavity::new(&c).map_err(|e| e.to_string())?;
    let mode = match cav.eigenmode(c.a_g) {
        Ok(m) => m,
        Err(Error::UnstableCavity { .. }) | Err(Error::DegeneratePropagation { .. }) => {
            return Ok(Vec::new())
        }
        Err(e) => return Err(e.to_string()),
    };
    let mut out = Vec::new();
    for z in cav.profile_grid(samples) {
        let w00 = mode.mode_radius(z).map_err(|e| e.to_string())?;
        out.extend([z, w00, mode.m_factor() * w00]);
    }
    Ok(out)
}

/// `[Rp_M3, r_b_down, r_b_up, p_chg]` records; rates are NaN for unstable distances.
pub fn rate_records(d_w: f64, steps: usize) -> Result<Vec<f64>, String> {
    let base = config(d_w)?;
    let mut out = Vec::with_capacity(4 * steps);
    for rp in grid(0.0, 1.0, steps)? {
        let c = base.with("Rp_M3", rp).map_err(|e| e.to_string())?;
        let r = run_point(&c).map_err(|e| e.to_string())?;
        let (down, up) = r
            .link
            .map_or((f64::NAN, f64::NAN), |l| (l.r_b_down, l.r_b_up));
        let p_chg = r.charging.map_or(f64::NAN, |ch| ch.point.p_chg);
        out.extend([rp, down, up, p_chg]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = stabilityCurve)]
pub fn stability_curve(
    d5_mm: f64,
    d_w_start: f64,
    d_w_stop: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    stability_records(d5_mm, d_w_start, d_w_stop, steps)
}

#[wasm_bindgen(js_name = radiusProfile)]
pub fn radius_profile(d_w: f64, samples: usize) -> Result<Vec<f64>, String> {
    profile_records(d_w, samples)
}

#[wasm_bindgen(js_name = rateCurves)]
pub fn rate_curves(d_w: f64, steps: usize) -> Result<Vec<f64>, String> {
    rate_records(d_w, steps)
}
