//! Single-point pipeline and 1-D/2-D parameter sweeps.
//!
//! A point runs stability, eigenmode, power fixed point, PV harvesting and the
//! link budget in that order. Points without a Gaussian eigenmode stop after
//! the stability stage and are reported with status `unstable`; their
//! stability columns stay populated (g1*g2* is defined everywhere) and every
//! later column is empty.

use serde::Serialize;

use crate::cavity::{Cavity, StabilityReport};
use crate::config::{self, CsdrConfig};
use crate::error::{Error, Result};
use crate::harvest::{mppt, photocurrent, received_power, PvOperatingPoint};
use crate::link::{link_budget, LinkBudget};
use crate::power::{solve_operating_point, OperatingPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Unstable,
    NumericFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unstable => "unstable",
            Status::NumericFailure => "numeric-failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSummary {
    pub w00_m1: f64,
    pub w00_gl: f64,
    pub m_factor: f64,
    pub w_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Charging {
    pub p_pvh: f64,
    #[serde(flatten)]
    pub point: PvOperatingPoint,
}

/// Everything computed for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub status: Status,
    pub stability: StabilityReport,
    pub mode: Option<ModeSummary>,
    pub operating_point: Option<OperatingPoint>,
    pub charging: Option<Charging>,
    pub link: Option<LinkBudget>,
    /// Absolute rates in bit/s, `(up, down)`.
    pub bps: Option<(f64, f64)>,
}

pub fn run_point(config: &CsdrConfig) -> Result<PointReport> {
    let cavity = Cavity::new(config)?;
    let stability = cavity.stability();
    let unstable = PointReport {
        status: Status::Unstable,
        stability,
        mode: None,
        operating_point: None,
        charging: None,
        link: None,
        bps: None,
    };
    let mode = match cavity.eigenmode(config.a_g) {
        Ok(m) => m,
        Err(Error::UnstableCavity { .. }) | Err(Error::DegeneratePropagation { .. }) => {
            return Ok(unstable)
        }
        Err(e) => return Err(e),
    };
    let op = match solve_operating_point(config) {
        Ok(op) => op,
        Err(Error::UnstableCavity { .. }) | Err(Error::DegeneratePropagation { .. }) => {
            return Ok(unstable)
        }
        Err(e) => return Err(e),
    };
    let p_out = op.power.p_out;
    let i_pv = photocurrent(config, p_out)?;
    let charging = Charging {
        p_pvh: received_power(config, p_out),
        point: mppt(config, i_pv)?,
    };
    let link = link_budget(config, &op.power);
    Ok(PointReport {
        status: Status::Ok,
        stability,
        mode: Some(ModeSummary {
            w00_m1: mode.radius_at_m1(),
            w00_gl: op.w00_gl,
            m_factor: mode.m_factor(),
            w_s: op.w_s,
        }),
        operating_point: Some(op),
        charging: Some(charging),
        link: Some(link),
        bps: Some((link.bps_up(config), link.bps_down(config))),
    })
}

/// Named output column groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnGroup {
    Stability,
    Radii,
    Powers,
    Charging,
    Rates,
}

impl ColumnGroup {
    pub const ALL: [ColumnGroup; 5] = [
        ColumnGroup::Stability,
        ColumnGroup::Radii,
        ColumnGroup::Powers,
        ColumnGroup::Charging,
        ColumnGroup::Rates,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "stability" => Ok(ColumnGroup::Stability),
            "radii" => Ok(ColumnGroup::Radii),
            "powers" => Ok(ColumnGroup::Powers),
            "charging" => Ok(ColumnGroup::Charging),
            "rates" => Ok(ColumnGroup::Rates),
            other => Err(Error::Config(format!(
                "unknown column group `{other}` (stability, radii, powers, charging, rates)"
            ))),
        }
    }

    pub fn parse_list(list: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for part in list.split(',').filter(|s| !s.trim().is_empty()) {
            let g = Self::parse(part)?;
            if !out.contains(&g) {
                out.push(g);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("empty column list".into()));
        }
        Ok(out)
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            ColumnGroup::Stability => &["g1_star", "g2_star", "l_star", "g1g2", "stable"],
            ColumnGroup::Radii => &["w00_m1", "w00_gl", "m_factor", "w_s", "t_diff"],
            ColumnGroup::Powers => &[
                "r_1",
                "r_2",
                "r_er_hat",
                "t_er_hat",
                "p_th",
                "eta_slop",
                "eta_slop_prime",
                "p_out",
                "p_nu",
                "p_nu_ext_fwd",
                "p_nu_ext_bwd",
                "eta_shg",
                "p_2nu_minus",
                "p_2nu_plus",
                "iterations",
            ],
            ColumnGroup::Charging => &["p_pvh", "i_pv", "v_chg", "i_chg", "p_chg", "v_oc", "r_pl"],
            ColumnGroup::Rates => &[
                "p_down",
                "p_up",
                "p_res",
                "c1",
                "c2",
                "sigma_n_sq_up",
                "sigma_n_sq_down",
                "r_b_up",
                "r_b_down",
                "bps_up",
                "bps_down",
            ],
        }
    }

    fn values(&self, r: &PointReport) -> Vec<Option<f64>> {
        let s = &r.stability;
        match self {
            ColumnGroup::Stability => vec![
                Some(s.g1_star),
                Some(s.g2_star),
                Some(s.l_star),
                Some(s.product),
                Some(if s.stable { 1.0 } else { 0.0 }),
            ],
            ColumnGroup::Radii => match (&r.mode, &r.operating_point) {
                (Some(m), Some(op)) => vec![
                    Some(m.w00_m1),
                    Some(m.w00_gl),
                    Some(m.m_factor),
                    Some(m.w_s),
                    Some(op.losses.t_diff),
                ],
                _ => vec![None; 5],
            },
            ColumnGroup::Powers => match &r.operating_point {
                Some(op) => {
                    let (l, p) = (&op.losses, &op.power);
                    [
                        l.r_1,
                        l.r_2,
                        l.r_er_hat,
                        l.t_er_hat,
                        p.p_th,
                        p.eta_slop,
                        p.eta_slop_prime,
                        p.p_out,
                        p.p_nu,
                        p.p_nu_ext_fwd,
                        p.p_nu_ext_bwd,
                        p.eta_shg,
                        p.p_2nu_minus,
                        p.p_2nu_plus,
                        p.iterations as f64,
                    ]
                    .into_iter()
                    .map(Some)
                    .collect()
                }
                None => vec![None; 15],
            },
            ColumnGroup::Charging => match &r.charging {
                Some(c) => vec![
                    Some(c.p_pvh),
                    Some(c.point.i_pv),
                    Some(c.point.v_chg),
                    Some(c.point.i_chg),
                    Some(c.point.p_chg),
                    Some(c.point.v_oc),
                    c.point.r_pl,
                ],
                None => vec![None; 7],
            },
            ColumnGroup::Rates => match (&r.link, r.bps) {
                (Some(l), Some((up, down))) => [
                    l.p_down,
                    l.p_up,
                    l.p_res,
                    l.c1,
                    l.c2,
                    l.sigma_n_sq_up,
                    l.sigma_n_sq_down,
                    l.r_b_up,
                    l.r_b_down,
                    up,
                    down,
                ]
                .into_iter()
                .map(Some)
                .collect(),
                _ => vec![None; 11],
            },
        }
    }
}

/// `name=start:stop:steps`, inclusive of both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct VarRange {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl VarRange {
    pub fn new(name: &str, start: f64, stop: f64, steps: usize) -> Result<Self> {
        let r = VarRange {
            name: name.to_string(),
            start,
            stop,
            steps,
        };
        r.check()?;
        Ok(r)
    }

    /// Parses `name=start:stop:steps`; length variables accept unit suffixes.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Config(format!("--var `{spec}`: expected name=start:stop:steps"));
        let (name, range) = spec.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let name = name.trim();
        let number = |s: &str| -> Result<f64> {
            match config::key(name) {
                Some(_) => config::parse_key_value(name, s.trim()),
                None => s.trim().parse().map_err(|_| bad()),
            }
        };
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::new(name, number(parts[0])?, number(parts[1])?, steps)
    }

    fn check(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Config(format!("{}: steps must be >= 2", self.name)));
        }
        if !(self.start < self.stop) {
            return Err(Error::Config(format!(
                "{}: start must be < stop ({} vs {})",
                self.name, self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub vars: Vec<VarRange>,
    pub groups: Vec<ColumnGroup>,
    /// Column maximised in the summary; defaults by column groups.
    pub objective: Option<String>,
}

impl SweepSpec {
    pub fn new(vars: Vec<VarRange>, groups: Vec<ColumnGroup>) -> Self {
        SweepSpec {
            vars,
            groups,
            objective: None,
        }
    }

    pub fn columns(&self) -> Vec<&'static str> {
        self.groups
            .iter()
            .flat_map(|g| g.columns().iter().copied())
            .collect()
    }

    pub fn objective_column(&self) -> Option<String> {
        if let Some(o) = &self.objective {
            return Some(o.clone());
        }
        let cols = self.columns();
        ["p_chg", "p_out", "r_b_down", "w00_m1", "g1g2"]
            .into_iter()
            .find(|c| cols.contains(c))
            .map(str::to_string)
    }

    fn validate(&self, config: &CsdrConfig) -> Result<()> {
        if self.vars.is_empty() || self.vars.len() > 2 {
            return Err(Error::Config(
                "a sweep takes one or two --var ranges".into(),
            ));
        }
        if self.groups.is_empty() {
            return Err(Error::Config("no output columns requested".into()));
        }
        for v in &self.vars {
            v.check()?;
            config.with(&v.name, v.start)?;
            config.with(&v.name, v.stop)?;
        }
        if self.vars.len() == 2 && self.vars[0].name == self.vars[1].name {
            return Err(Error::Config(format!("{} swept twice", self.vars[0].name)));
        }
        if let Some(o) = &self.objective {
            if !self.columns().contains(&o.as_str()) {
                return Err(Error::Config(format!(
                    "objective `{o}` is not an output column"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub status: Status,
    pub vars: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

/// Best inner-variable row for one outer-variable value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RidgePoint {
    pub outer: f64,
    pub inner: Option<f64>,
    pub value: Option<f64>,
    pub row: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub objective: Option<String>,
    /// Row index of the global maximum.
    pub best_row: Option<usize>,
    pub best_value: Option<f64>,
    /// Two-variable sweeps only: argmax over the second variable per first-variable value.
    pub ridge: Vec<RidgePoint>,
    pub failed_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub var_names: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        self.column_index(column)
            .and_then(|i| self.rows[row].values[i])
    }
}

fn evaluate(config: &CsdrConfig, spec: &SweepSpec, vars: &[f64]) -> Result<ResultRow> {
    let mut c = config.clone();
    for (v, x) in spec.vars.iter().zip(vars) {
        c.set(&v.name, *x)?;
    }
    let n_cols = spec.columns().len();
    match run_point(&c) {
        Ok(report) => Ok(ResultRow {
            status: report.status,
            vars: vars.to_vec(),
            values: spec.groups.iter().flat_map(|g| g.values(&report)).collect(),
        }),
        Err(e) if e.is_config() => Err(e),
        Err(_) => Ok(ResultRow {
            status: Status::NumericFailure,
            vars: vars.to_vec(),
            values: vec![None; n_cols],
        }),
    }
}

/// First index of the largest value, ignoring empty cells.
fn argmax<I: Iterator<Item = (usize, Option<f64>)>>(it: I) -> Option<(usize, f64)> {
    it.filter_map(|(i, v)| v.map(|v| (i, v)))
        .fold(None, |best, (i, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })
}

pub fn run_sweep(config: &CsdrConfig, spec: &SweepSpec) -> Result<SweepResult> {
    config.validate()?;
    spec.validate(config)?;

    let grid: Vec<Vec<f64>> = match spec.vars.as_slice() {
        [a] => a.values().into_iter().map(|x| vec![x]).collect(),
        [a, b] => a
            .values()
            .into_iter()
            .flat_map(|x| b.values().into_iter().map(move |y| vec![x, y]))
            .collect(),
        _ => unreachable!("validated"),
    };

    #[cfg(feature = "parallel")]
    let rows: Result<Vec<ResultRow>> = {
        use rayon::prelude::*;
        grid.par_iter().map(|v| evaluate(config, spec, v)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<ResultRow>> = grid.iter().map(|v| evaluate(config, spec, v)).collect();
    let rows = rows?;

    let columns: Vec<String> = spec.columns().into_iter().map(str::to_string).collect();
    let objective = spec.objective_column();
    let obj_idx = objective
        .as_ref()
        .and_then(|o| columns.iter().position(|c| c == o));

    let (best_row, best_value) = match obj_idx {
        Some(k) => argmax(rows.iter().enumerate().map(|(i, r)| (i, r.values[k])))
            .map_or((None, None), |(i, v)| (Some(i), Some(v))),
        None => (None, None),
    };

    let mut ridge = Vec::new();
    if let (Some(k), [outer, inner]) = (obj_idx, spec.vars.as_slice()) {
        for (oi, outer_value) in outer.values().into_iter().enumerate() {
            let block = oi * inner.steps..(oi + 1) * inner.steps;
            let best = argmax(block.map(|i| (i, rows[i].values[k])));
            ridge.push(RidgePoint {
                outer: outer_value,
                inner: best.map(|(i, _)| rows[i].vars[1]),
                value: best.map(|(_, v)| v),
                row: best.map(|(i, _)| i),
            });
        }
    }

    let failed_points = rows
        .iter()
        .filter(|r| r.status == Status::NumericFailure)
        .count();
    Ok(SweepResult {
        var_names: spec.vars.iter().map(|v| v.name.clone()).collect(),
        columns,
        rows,
        summary: Summary {
            objective,
            best_row,
            best_value,
            ridge,
            failed_points,
        },
    })
}

/// Selected column groups for a single configuration, as one sweep-shaped row.
pub fn point_row(config: &CsdrConfig, groups: &[ColumnGroup]) -> Result<(Vec<String>, ResultRow)> {
    let report = run_point(config)?;
    let columns = groups
        .iter()
        .flat_map(|g| g.columns().iter().map(|c| c.to_string()))
        .collect();
    let values = groups.iter().flat_map(|g| g.values(&report)).collect();
    Ok((
        columns,
        ResultRow {
            status: report.status,
            vars: Vec::new(),
            values,
        },
    ))
}
