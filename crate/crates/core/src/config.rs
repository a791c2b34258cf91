//! The full CSDR parameter set, its defaults and the flat `key = value` file format.
//!
//! Every field is SI. In a config file, length keys additionally accept the
//! suffixes `m`, `mm`, `um` and `nm`; all other keys take bare SI numbers.
//! `#` starts a comment. Unknown keys, unparsable numbers and out-of-range
//! values are rejected with the offending key in the message.
//!
//! If `l_s` or `n_s` is overridden but `d1` is not, `d1` is recomputed as
//! `50 mm - l_s / n_s` so that the SHG crystal's optical path plus `d1` stays
//! at the focal plane of L1.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsdrConfig {
    // geometry
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
    pub d_w: f64,
    pub f_l1: f64,
    pub f_l2: f64,
    pub f_l3: f64,
    pub f_l4: f64,
    pub l_s: f64,
    pub l_g: f64,
    pub l_m: f64,
    pub n_s: f64,
    pub n_g: f64,
    pub n_m: f64,
    /// Concentrator index. Carried for completeness; no model consumes it.
    pub n_c: f64,
    pub a_g: f64,
    pub lambda_nu: f64,

    // coatings and mirrors
    pub r_hr: f64,
    pub t_ar: f64,
    pub r_m2: f64,
    pub r_m3: f64,
    /// Reflectivity of M3 at the second harmonic.
    pub rp_m3: f64,
    /// Reflectivity of the dichroic M5 towards the PV panel at the fundamental.
    pub r_m5: f64,
    pub t_pv: f64,
    pub t_pd1: f64,
    pub t_pd2: f64,

    // gain medium, pump, SHG crystal, air
    pub d_eff: f64,
    pub i_s: f64,
    pub p_in: f64,
    pub eta_c: f64,
    pub alpha_air: f64,

    // photovoltaic panel
    pub rho_pv: f64,
    pub i_0: f64,
    pub n_series: f64,
    pub n_d: f64,
    pub r_s: f64,
    pub r_sh: f64,

    // photodetector receivers
    pub rho_pd: f64,
    pub b_r: f64,
    pub r_il: f64,
    pub i_bk: f64,

    // physical constants, at the values used for the published results
    pub eps_0: f64,
    pub c: f64,
    pub k_b: f64,
    pub q_e: f64,
    pub t_t: f64,
}

const MM: f64 = 1e-3;

impl Default for CsdrConfig {
    fn default() -> Self {
        let l_s = 1.0 * MM;
        let n_s = 2.23;
        CsdrConfig {
            d1: 50.0 * MM - l_s / n_s,
            d2: 50.0 * MM,
            d3: 50.0 * MM,
            d4: 50.0 * MM,
            d5: 97.0 * MM,
            d6: 50.0 * MM,
            d_w: 6.0,
            f_l1: 50.0 * MM,
            f_l2: 50.0 * MM,
            f_l3: 100.0 * MM,
            f_l4: 50.0 * MM,
            l_s,
            l_g: 1.0 * MM,
            l_m: 6.0 * MM,
            n_s,
            n_g: 1.96,
            n_m: 1.5,
            n_c: 1.5,
            a_g: 1.4 * MM,
            lambda_nu: 1064e-9,

            r_hr: 0.997,
            t_ar: 0.995,
            r_m2: 0.72,
            r_m3: 0.1,
            rp_m3: 0.69,
            r_m5: 0.997,
            t_pv: 1.0,
            t_pd1: 1.0,
            t_pd2: 1.0,

            d_eff: 4.7e-12,
            i_s: 1.1976e7,
            p_in: 60.0,
            eta_c: 0.439,
            alpha_air: 1e-4,

            rho_pv: 0.6,
            i_0: 0.32e-6,
            n_series: 1.0,
            n_d: 1.48,
            r_s: 37e-3,
            r_sh: 53.82,

            rho_pd: 0.4,
            b_r: 800e6,
            r_il: 10e3,
            i_bk: 5100e-6,

            eps_0: 8.854e-12,
            c: 3e8,
            k_b: 1.38e-23,
            q_e: 1.602e-19,
            t_t: 300.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Strictly positive length.
    Length,
    /// Length that may be zero.
    LengthNonNeg,
    /// Non-zero focal length (sign allowed).
    Focal,
    Index,
    /// Reflectivity, transmissivity or efficiency in [0, 1].
    Fraction,
    Positive,
    NonNeg,
}

/// One entry of the canonical key list.
pub struct Key {
    pub name: &'static str,
    pub unit: &'static str,
    kind: Kind,
    get: fn(&CsdrConfig) -> f64,
    set: fn(&mut CsdrConfig, f64),
}

impl Key {
    pub fn get(&self, config: &CsdrConfig) -> f64 {
        (self.get)(config)
    }

    pub fn is_length(&self) -> bool {
        matches!(self.kind, Kind::Length | Kind::LengthNonNeg | Kind::Focal)
    }

    fn check(&self, v: f64) -> Result<()> {
        let ok = match self.kind {
            Kind::Length => v.is_finite() && v > 0.0,
            Kind::LengthNonNeg => v.is_finite() && v >= 0.0,
            Kind::Focal => v.is_finite() && v != 0.0,
            Kind::Index => v.is_finite() && v >= 1.0,
            Kind::Fraction => (0.0..=1.0).contains(&v),
            // shunt resistance may be infinite for an ideal panel
            Kind::Positive => v > 0.0 && !v.is_nan(),
            Kind::NonNeg => v.is_finite() && v >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            let rule = match self.kind {
                Kind::Length => "must be a finite length > 0",
                Kind::LengthNonNeg => "must be a finite length >= 0",
                Kind::Focal => "must be non-zero and finite",
                Kind::Index => "must be >= 1",
                Kind::Fraction => "must lie in [0, 1]",
                Kind::Positive => "must be > 0",
                Kind::NonNeg => "must be finite and >= 0",
            };
            Err(Error::Config(format!("{} = {v} {rule}", self.name)))
        }
    }
}

macro_rules! keys {
    ($( $name:literal => $field:ident, $kind:ident, $unit:literal; )*) => {
        /// Canonical, exhaustive key list in file order.
        pub static KEYS: &[Key] = &[
            $( Key {
                name: $name,
                unit: $unit,
                kind: Kind::$kind,
                get: |c| c.$field,
                set: |c, v| c.$field = v,
            }, )*
        ];
    };
}

keys! {
    "d1" => d1, Length, "m";
    "d2" => d2, Length, "m";
    "d3" => d3, Length, "m";
    "d4" => d4, Length, "m";
    "d5" => d5, Length, "m";
    "d6" => d6, Length, "m";
    "d_w" => d_w, LengthNonNeg, "m";
    "f_L1" => f_l1, Focal, "m";
    "f_L2" => f_l2, Focal, "m";
    "f_L3" => f_l3, Focal, "m";
    "f_L4" => f_l4, Focal, "m";
    "l_s" => l_s, Length, "m";
    "l_g" => l_g, Length, "m";
    "l_m" => l_m, Length, "m";
    "n_s" => n_s, Index, "";
    "n_g" => n_g, Index, "";
    "n_m" => n_m, Index, "";
    "n_c" => n_c, Index, "";
    "a_g" => a_g, Length, "m";
    "lambda_nu" => lambda_nu, Length, "m";
    "R_hr" => r_hr, Fraction, "";
    "T_ar" => t_ar, Fraction, "";
    "R_M2" => r_m2, Fraction, "";
    "R_M3" => r_m3, Fraction, "";
    "Rp_M3" => rp_m3, Fraction, "";
    "R_M5" => r_m5, Fraction, "";
    "T_pv" => t_pv, Fraction, "";
    "T_pd1" => t_pd1, Fraction, "";
    "T_pd2" => t_pd2, Fraction, "";
    "d_eff" => d_eff, NonNeg, "m/V";
    "I_s" => i_s, Positive, "W/m^2";
    "P_in" => p_in, NonNeg, "W";
    "eta_c" => eta_c, Fraction, "";
    "alpha_air" => alpha_air, NonNeg, "1/m";
    "rho_pv" => rho_pv, NonNeg, "A/W";
    "I_0" => i_0, NonNeg, "A";
    "N_s" => n_series, Positive, "";
    "n_d" => n_d, Positive, "";
    "R_s" => r_s, NonNeg, "ohm";
    "R_sh" => r_sh, Positive, "ohm";
    "rho_pd" => rho_pd, NonNeg, "A/W";
    "B_r" => b_r, Positive, "Hz";
    "R_IL" => r_il, Positive, "ohm";
    "I_bk" => i_bk, NonNeg, "A";
    "eps_0" => eps_0, Positive, "F/m";
    "c" => c, Positive, "m/s";
    "k_B" => k_b, Positive, "J/K";
    "q_e" => q_e, Positive, "C";
    "T_t" => t_t, Positive, "K";
}

pub fn key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

impl CsdrConfig {
    pub fn get(&self, name: &str) -> Result<f64> {
        key(name)
            .map(|k| k.get(self))
            .ok_or_else(|| Error::Config(format!("unknown key `{name}`")))
    }

    /// Sets one parameter by canonical key, range-checking the value.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let k = key(name).ok_or_else(|| Error::Config(format!("unknown key `{name}`")))?;
        k.check(value)?;
        (k.set)(self, value);
        Ok(())
    }

    /// Same as `set` but returns the modified copy.
    pub fn with(&self, name: &str, value: f64) -> Result<CsdrConfig> {
        let mut c = self.clone();
        c.set(name, value)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for k in KEYS {
            k.check(k.get(self))?;
        }
        Ok(())
    }

    /// Parses the `key = value` text format on top of the defaults.
    pub fn from_text(text: &str) -> Result<CsdrConfig> {
        let mut config = CsdrConfig::default();
        let mut seen: Vec<&'static str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let name = name.trim();
            let k = key(name).ok_or_else(|| {
                Error::Config(format!("line {}: unknown key `{name}`", lineno + 1))
            })?;
            let v = parse_value(k, value.trim())?;
            k.check(v)?;
            (k.set)(&mut config, v);
            seen.push(k.name);
        }
        let touched = |n: &str| seen.contains(&n);
        if !touched("d1") && (touched("l_s") || touched("n_s")) {
            config.set("d1", 50.0 * MM - config.l_s / config.n_s)?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Renders every key in canonical order; `from_text` of the output is the same config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            let unit = if k.unit.is_empty() {
                String::new()
            } else {
                format!("  # {}", k.unit)
            };
            out.push_str(&format!("{} = {:?}{}\n", k.name, k.get(self), unit));
        }
        out
    }

    // Coating rules: lenses and crystals are AR coated on both faces, EOMs are
    // HR coated at the fundamental, and at the second harmonic the EOM light
    // crosses an AR face before hitting the HR modulating surface.

    /// Any lens, or the gain/SHG crystal as a whole, at either wavelength.
    pub fn t_lens(&self) -> f64 {
        self.t_ar * self.t_ar
    }

    /// One AR-coated face (gain medium ends, SHG crystal faces).
    pub fn t_face(&self) -> f64 {
        self.t_ar
    }

    pub fn r_m1(&self) -> f64 {
        self.r_hr
    }

    /// EOM reflectivity at the fundamental.
    pub fn r_eom(&self) -> f64 {
        self.r_hr
    }

    /// EOM reflectivity at the second harmonic.
    pub fn rp_eom(&self) -> f64 {
        self.t_ar * self.t_ar * self.r_hr
    }

    /// M1, M2, M4, M5 transmissivity at the second harmonic.
    pub fn tp_mirror(&self) -> f64 {
        self.t_ar * self.t_ar
    }

    pub fn tp_m3(&self) -> f64 {
        1.0 - self.rp_m3
    }

    pub fn t_air(&self) -> f64 {
        (-self.alpha_air * self.d_w).exp()
    }

    /// Single-pass internal transmittance of the extra-sub-resonator.
    pub fn t_ier(&self) -> f64 {
        self.t_air() * self.t_lens() * self.t_lens() * self.r_eom() * self.r_eom()
    }

    pub fn thermal_voltage(&self) -> f64 {
        self.k_b * self.t_t / self.q_e
    }
}

fn parse_value(k: &Key, text: &str) -> Result<f64> {
    let bad = || Error::Config(format!("{}: cannot parse `{text}` as a number", k.name));
    let (num, scale) = if k.is_length() {
        let split = text
            .find(|ch: char| ch.is_ascii_alphabetic() && ch != 'e' && ch != 'E')
            .unwrap_or(text.len());
        let (n, suffix) = text.split_at(split);
        let scale = match suffix.trim() {
            "" | "m" => 1.0,
            "mm" => 1e-3,
            "um" => 1e-6,
            "nm" => 1e-9,
            other => {
                return Err(Error::Config(format!(
                    "{}: unsupported unit `{other}` (use m, mm, um or nm)",
                    k.name
                )))
            }
        };
        (n.trim(), scale)
    } else {
        (text, 1.0)
    };
    let v: f64 = num.parse().map_err(|_| bad())?;
    Ok(v * scale)
}

/// Parses a value for `name`, accepting unit suffixes on length keys.
pub fn parse_key_value(name: &str, text: &str) -> Result<f64> {
    let k = key(name).ok_or_else(|| Error::Config(format!("unknown key `{name}`")))?;
    parse_value(k, text)
}

/// Reads a config file, applying its overrides to the defaults.
pub fn load_config(path: impl AsRef<Path>) -> Result<CsdrConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    CsdrConfig::from_text(&text)
}
