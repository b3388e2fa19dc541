//! `rqi`: run scenario simulations, convergence sweeps and dilations from
//! JSON configuration documents.
//!
//! Exit codes: 0 on success, 1 on configuration or validation problems
//! (including usage errors), 2 when a numerical procedure fails or declines
//! the input.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rqi_core::dilation::kraus_dilate;
use rqi_core::hamiltonian::unitarity_structure_check;
use rqi_core::harness::{
    builtin_scenario, coefficients_for, emit_report, emit_simulation, matrix_value,
    parse_kraus_document, parse_scenario, run_matrix_element_convergence,
    run_semigroup_convergence, run_simulation, serialize_scenario, ReportFormat, ReportMetadata,
    Scenario, SimulationMode,
};
use rqi_core::numerics::matrix::ComplexMatrix;

#[derive(Parser)]
#[command(
    name = "rqi",
    version,
    about = "Repeated quantum interactions: discrete steps, their stochastic limits, \
             and the distance between the two"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> ReportFormat {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Iterate the reduced step map at each (t, h)
    Discrete,
    /// Apply the limit Lindblad semigroup at each t
    Qsde,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Coherent-vector matrix elements: recursion vs ODE solution
    MatrixElement,
    /// Reduced dynamics: iterated step map vs Lindblad semigroup
    Semigroup,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form limit coefficients of a scenario's step family
    LimitCoeffs {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Evolve the scenario's observables under the reduced dynamics
    Simulate {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Sweep (t, h) and measure discrete-vs-continuous distances
    Converge {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Dilate a Kraus family to a unitary step on (system ⊗ copy)
    Dilate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print a resolved scenario document
    #[command(group(ArgGroup::new("source").required(true).args(["builtin", "config"])))]
    Scenario {
        /// One of: two-level, von-neumann, weak-coupling, low-density
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Core(rqi_core::Error),
    Io(PathBuf, std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<rqi_core::Error> for CliError {
    fn from(e: rqi_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

fn main() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return std::process::ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code())
        }
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_out(out: Option<&Path>, doc: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, doc).map_err(|e| CliError::Io(path.to_path_buf(), e)),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    Ok(parse_scenario(&read_config(path)?)?)
}

fn report_wall_time(meta: &ReportMetadata, rows: usize) {
    if let Some(d) = meta.wall_time {
        eprintln!("{} rows in {:.2?}", rows, d);
    }
}

/// One line per table entry: block row j, block column i, entry (row, col).
fn blocks_to_csv<'a>(e: usize, block: impl Fn(usize, usize) -> &'a ComplexMatrix) -> String {
    let mut out = String::from("j,i,row,col,re,im\n");
    for j in 0..e {
        for i in 0..e {
            let m = block(j, i);
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let z = m[(r, c)];
                    out.push_str(&format!("{j},{i},{r},{c},{},{}\n", z.re, z.im));
                }
            }
        }
    }
    out
}

fn pretty(value: &Value) -> String {
    let mut doc = serde_json::to_string_pretty(value).expect("report serialization");
    doc.push('\n');
    doc
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::LimitCoeffs { config, out, format } => {
            let s = load_scenario(&config)?;
            let c = coefficients_for(&s)?;
            let diag = unitarity_structure_check(&c, 1e-10)?;
            let e = c.dims().env_dim();
            let doc = match format {
                Format::Csv => blocks_to_csv(e, |j, i| c.block(j, i)),
                Format::Json => pretty(&json!({
                    "scenario": s.name,
                    "dims": {"n0": c.dims().n0, "n_env": c.dims().n_env},
                    "table": (0..e)
                        .map(|j| (0..e).map(|i| matrix_value(c.block(j, i))).collect())
                        .collect::<Vec<Vec<_>>>(),
                    "k": matrix_value(diag.inferred_k.as_matrix()),
                    "w": matrix_value(&c.w()),
                    "s": matrix_value(&c.s()),
                    "unitarity": {
                        "s_isometry": diag.s_isometry,
                        "s_coisometry": diag.s_coisometry,
                        "annihilation_row": diag.annihilation_row,
                        "drift": diag.drift,
                        "pass": diag.pass,
                    },
                })),
            };
            write_out(out.as_deref(), &doc)
        }
        Command::Simulate { mode, config, out, format } => {
            let s = load_scenario(&config)?;
            let mode = match mode {
                Mode::Discrete => SimulationMode::Discrete,
                Mode::Qsde => SimulationMode::Qsde,
            };
            let report = run_simulation(&s, mode)?;
            report_wall_time(&report.metadata, report.rows.len());
            write_out(out.as_deref(), &emit_simulation(&report, format.into()))
        }
        Command::Converge { kind, config, out, format } => {
            let s = load_scenario(&config)?;
            let report = match kind {
                Kind::MatrixElement => run_matrix_element_convergence(&s)?,
                Kind::Semigroup => run_semigroup_convergence(&s)?,
            };
            report_wall_time(&report.metadata, report.rows.len());
            write_out(out.as_deref(), &emit_report(&report, format.into()))
        }
        Command::Dilate { config, out, format } => {
            let family = parse_kraus_document(&read_config(&config)?)?;
            let u = kraus_dilate(&family)?;
            let e = u.dims().env_dim();
            let embedding = (0..e)
                .map(|i| (u.block(i, 0) - &family.ops()[i]).max_abs())
                .fold(0.0f64, f64::max);
            let doc = match format {
                Format::Csv => blocks_to_csv(e, |j, i| u.block(j, i)),
                Format::Json => pretty(&json!({
                    "dims": {"n0": u.dims().n0, "n_env": u.dims().n_env},
                    "blocks": (0..e)
                        .map(|j| (0..e).map(|i| matrix_value(u.block(j, i))).collect())
                        .collect::<Vec<Vec<_>>>(),
                    "unitarity_residual": u.unitarity_residual(),
                    "embedding_residual": embedding,
                })),
            };
            write_out(out.as_deref(), &doc)
        }
        Command::Scenario { builtin, config, out } => {
            let s = match (builtin, config) {
                (Some(name), None) => builtin_scenario(&name)?,
                (None, Some(path)) => load_scenario(&path)?,
                _ => unreachable!("clap enforces exactly one source"),
            };
            write_out(out.as_deref(), &pretty(&serialize_scenario(&s)))
        }
    }
}
