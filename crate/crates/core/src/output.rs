//! Tabular results and their CSV / JSON encodings.

use std::io::{self, Write};

use serde_json::{json, Value};

use crate::cavity::{Cavity, DEFAULT_PROFILE_SAMPLES};
use crate::config::CsdrConfig;
use crate::error::{Error, Result};
use crate::power::{fp_reflectance, fp_transmittance};
use crate::sweep::{point_row, ColumnGroup, Status, Summary, SweepResult};

/// Significant digits in CSV output.
pub const CSV_DIGITS: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub status: Status,
    pub values: Vec<Option<f64>>,
}

/// Status column plus named numeric columns; empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub summary: Option<Summary>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        let header = std::iter::once("status").chain(self.columns.iter().map(String::as_str));
        out.write_record(header)?;
        for r in &self.rows {
            let cells = std::iter::once(r.status.as_str().to_string()).chain(r.values.iter().map(
                |v| match v {
                    Some(x) if x.is_finite() => format_sig(*x, CSV_DIGITS),
                    _ => String::new(),
                },
            ));
            out.write_record(cells)?;
        }
        out.flush()
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![json!(r.status.as_str())];
                cells.extend(r.values.iter().map(|v| match v {
                    Some(x) if x.is_finite() => json!(x),
                    _ => Value::Null,
                }));
                Value::Array(cells)
            })
            .collect();
        let mut columns = vec!["status".to_string()];
        columns.extend(self.columns.iter().cloned());
        let mut out = json!({ "columns": columns, "rows": rows });
        if let Some(s) = &self.summary {
            out["summary"] = serde_json::to_value(s).unwrap_or(Value::Null);
        }
        out
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        w.write_all(b"\n")
    }
}

impl From<SweepResult> for Table {
    fn from(r: SweepResult) -> Self {
        let mut columns = r.var_names.clone();
        columns.extend(r.columns);
        let rows = r
            .rows
            .into_iter()
            .map(|row| {
                let mut values: Vec<Option<f64>> = row.vars.into_iter().map(Some).collect();
                values.extend(row.values);
                Row {
                    status: row.status,
                    values,
                }
            })
            .collect();
        Table {
            columns,
            rows,
            summary: Some(r.summary),
        }
    }
}

/// C-style `%.{digits}g`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Selected column groups for one configuration.
pub fn point_table(config: &CsdrConfig, groups: &[ColumnGroup]) -> Result<Table> {
    let (columns, row) = point_row(config, groups)?;
    Ok(Table {
        columns,
        rows: vec![Row {
            status: row.status,
            values: row.values,
        }],
        summary: None,
    })
}

/// Fundamental and multimode radius over the cavity; one `unstable` row if there is no eigenmode.
pub fn profile_table(config: &CsdrConfig, samples: usize) -> Result<Table> {
    let cavity = Cavity::new(config)?;
    let columns = vec!["z".to_string(), "w00".to_string(), "w".to_string()];
    let mode = match cavity.eigenmode(config.a_g) {
        Ok(m) => m,
        Err(Error::UnstableCavity { .. }) | Err(Error::DegeneratePropagation { .. }) => {
            return Ok(Table {
                columns,
                rows: vec![Row {
                    status: Status::Unstable,
                    values: vec![None; 3],
                }],
                summary: None,
            })
        }
        Err(e) => return Err(e),
    };
    let samples = if samples == 0 {
        DEFAULT_PROFILE_SAMPLES
    } else {
        samples
    };
    let rows = cavity
        .profile_grid(samples)
        .into_iter()
        .map(|z| {
            let w00 = mode.mode_radius(z)?;
            Ok(Row {
                status: Status::Ok,
                values: vec![Some(z), Some(w00), Some(mode.m_factor() * w00)],
            })
        })
        .collect::<Result<_>>()?;
    Ok(Table {
        columns,
        rows,
        summary: None,
    })
}

/// Extra-cavity transmittance and reflectance over a round-trip phase grid.
pub fn spectrum_table(
    config: &CsdrConfig,
    phi_start: f64,
    phi_stop: f64,
    steps: usize,
) -> Result<Table> {
    config.validate()?;
    if steps < 2 || !(phi_start < phi_stop) || !phi_start.is_finite() || !phi_stop.is_finite() {
        return Err(Error::Config(
            "spectrum needs a finite phase range with start < stop and steps >= 2".into(),
        ));
    }
    let rows = (0..steps)
        .map(|i| {
            let phi = if i + 1 == steps {
                phi_stop
            } else {
                phi_start + (phi_stop - phi_start) * i as f64 / (steps - 1) as f64
            };
            Row {
                status: Status::Ok,
                values: vec![
                    Some(phi),
                    Some(fp_transmittance(config, phi)),
                    Some(fp_reflectance(config, phi)),
                ],
            }
        })
        .collect();
    Ok(Table {
        columns: vec!["phi".into(), "t_er".into(), "r_er".into()],
        rows,
        summary: None,
    })
}
