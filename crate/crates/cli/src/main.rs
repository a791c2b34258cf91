use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use csdr_core::cavity::DEFAULT_PROFILE_SAMPLES;
use csdr_core::output::{point_table, profile_table, spectrum_table, Table};
use csdr_core::{
    load_config, run_sweep, ColumnGroup, CsdrConfig, Error, Status, SweepSpec, VarRange,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "csdr",
    version,
    about = "Coupled spatially distributed resonator: stability, power, charging and link rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration.
    Point {
        #[command(flatten)]
        common: Common,
        /// Column groups: stability, radii, powers, charging, rates.
        #[arg(long, default_value = "stability,radii,powers,charging,rates")]
        columns: String,
    },
    /// Grid sweep over one or two parameters.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// name=start:stop:steps; give once or twice (first is the outer loop).
        #[arg(long = "var", required = true)]
        vars: Vec<String>,
        /// Column groups: stability, radii, powers, charging, rates.
        #[arg(long, default_value = "stability,radii,powers,charging,rates")]
        columns: String,
        /// Column maximised in the summary.
        #[arg(long)]
        objective: Option<String>,
        /// Print the argmax summary to stderr.
        #[arg(long)]
        summary: bool,
    },
    /// Fundamental and multimode beam radius along the cavity.
    Profile {
        #[command(flatten)]
        common: Common,
        /// Uniform samples added to the element boundaries.
        #[arg(long, default_value_t = DEFAULT_PROFILE_SAMPLES)]
        samples: usize,
    },
    /// Extra-cavity transmittance and reflectance versus round-trip phase.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// phi=start:stop:steps in radians.
        #[arg(long = "var", default_value = "phi=0:12.566370614359172:2001")]
        var: String,
    },
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, `name=value`; repeatable.
    #[arg(long = "set")]
    sets: Vec<String>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Common {
    fn config(&self) -> Result<CsdrConfig, Error> {
        let mut c = match &self.config {
            Some(p) => load_config(p)?,
            None => CsdrConfig::default(),
        };
        for s in &self.sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set `{s}`: expected name=value")))?;
            let (k, v) = (k.trim(), v.trim());
            c.set(k, csdr_core::config::parse_key_value(k, v)?)?;
        }
        c.validate()?;
        Ok(c)
    }

    fn emit(&self, table: &Table) -> Result<(), Error> {
        let io_err = |e: io::Error| Error::Config(format!("writing output: {e}"));
        let sink: Box<dyn Write> = match &self.out {
            Some(p) => Box::new(
                File::create(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            ),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = BufWriter::new(sink);
        match self.format {
            Format::Csv => table.write_csv(&mut w),
            Format::Json => table.write_json(&mut w),
        }
        .map_err(io_err)?;
        w.flush().map_err(io_err)
    }
}

fn numeric_failures(table: &Table) -> usize {
    table
        .rows
        .iter()
        .filter(|r| r.status == Status::NumericFailure)
        .count()
}

fn run(cli: Cli) -> Result<u8, Error> {
    let (common, table) = match cli.command {
        Command::Point { common, columns } => {
            let groups = ColumnGroup::parse_list(&columns)?;
            let table = point_table(&common.config()?, &groups)?;
            (common, table)
        }
        Command::Sweep {
            common,
            vars,
            columns,
            objective,
            summary,
        } => {
            let config = common.config()?;
            let vars = vars
                .iter()
                .map(|v| VarRange::parse(v))
                .collect::<Result<Vec<_>, _>>()?;
            let mut spec = SweepSpec::new(vars, ColumnGroup::parse_list(&columns)?);
            spec.objective = objective;
            let result = run_sweep(&config, &spec)?;
            if summary {
                print_summary(&result);
            }
            (common, Table::from(result))
        }
        Command::Profile { common, samples } => {
            let table = profile_table(&common.config()?, samples)?;
            (common, table)
        }
        Command::Spectrum { common, var } => {
            let range = VarRange::parse(&var)?;
            if range.name != "phi" {
                return Err(Error::Config(format!(
                    "spectrum sweeps `phi`, not `{}`",
                    range.name
                )));
            }
            let table = spectrum_table(&common.config()?, range.start, range.stop, range.steps)?;
            (common, table)
        }
    };
    common.emit(&table)?;
    Ok(if numeric_failures(&table) > 0 {
        EXIT_NUMERIC
    } else {
        0
    })
}

fn print_summary(result: &csdr_core::SweepResult) {
    let s = &result.summary;
    let Some(obj) = &s.objective else { return };
    match (s.best_row, s.best_value) {
        (Some(i), Some(v)) => {
            let at: Vec<String> = result
                .var_names
                .iter()
                .zip(&result.rows[i].vars)
                .map(|(n, x)| format!("{n}={x}"))
                .collect();
            eprintln!("max {obj} = {v} at {}", at.join(", "));
        }
        _ => eprintln!("max {obj}: no finite values"),
    }
    if let [outer, inner] = result.var_names.as_slice() {
        for r in &s.ridge {
            match (r.inner, r.value) {
                (Some(x), Some(v)) => {
                    eprintln!("{outer}={}: best {inner}={x} ({obj} = {v})", r.outer)
                }
                _ => eprintln!("{outer}={}: no finite values", r.outer),
            }
        }
    }
    if s.failed_points > 0 {
        eprintln!("{} points failed to converge", s.failed_points);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERIC
            })
        }
    }
}
