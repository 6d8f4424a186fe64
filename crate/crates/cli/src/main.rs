//! `mvreturn`: ingest national-accounts panels, compute cash flow, growth
//! and return rates, render reports and charts, and run the identity
//! simulator.

mod commands;
mod config;
mod fail;
mod files;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mvreturn::indicators::{DEFAULT_EPSILON_G, DEFAULT_THRESHOLD};
use mvreturn::reporting::{Band, Format, SeriesSelector, DEFAULT_DECIMALS, DEFAULT_MIN_YEARS};

use commands::{Output, SimulateArgs, TableChoice};
use config::{parse_delimiter, parse_format, RunConfig};
use fail::{Failure, Outcome};

#[derive(Parser, Debug)]
#[command(name = "mvreturn", version, about = "Rates of return on market-value capital from national accounts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse long-format files into a validated panel (panel.csv).
    Ingest(IngestArgs),
    /// Derive indicator rows and country summaries (indicators.csv, summaries.csv).
    Compute(ComputeArgs),
    /// Render the ranked f/g/r and factor-share tables.
    Report(ReportArgs),
    /// Set our cash flow rates beside a reference file of component rates.
    Compare(CompareArgs),
    /// Write one SVG line chart per country.
    Chart(ChartArgs),
    /// Generate synthetic economies and check every accounting identity.
    Simulate(SimArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Long-format input file(s): country, variable, year, value.
    #[arg(long = "input", short = 'i', value_name = "FILE")]
    inputs: Vec<PathBuf>,
    /// Two-column `source,target` file remapping variable codes.
    #[arg(long, value_name = "FILE")]
    variable_map: Option<PathBuf>,
    /// Field delimiter (`;`, `,`, `|` or `tab`); sniffed when omitted.
    #[arg(long, value_parser = parse_delimiter)]
    delimiter: Option<u8>,
}

#[derive(Args, Debug)]
struct DirArg {
    /// Directory holding the pipeline's intermediate files.
    #[arg(long, short = 'd', default_value = ".", value_name = "DIR")]
    dir: PathBuf,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    dir: DirArg,
}

#[derive(Args, Debug)]
struct ComputeArgs {
    /// Ingest these files first instead of reading panel.csv.
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    dir: DirArg,
    /// Average f(K) strictly above this is flagged.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// |g(K)| at or below this counts as near-stationary.
    #[arg(long, default_value_t = DEFAULT_EPSILON_G)]
    epsilon_g: f64,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long, short = 'f', default_value = "txt", value_parser = parse_format)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_DECIMALS)]
    decimals: usize,
    /// Write here (atomically) instead of stdout.
    #[arg(long, short = 'o', value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableArg {
    Fgr,
    Shares,
    All,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    dir: DirArg,
    #[command(flatten)]
    render: RenderArgs,
    #[arg(long, value_enum, default_value = "all")]
    table: TableArg,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Countries with fewer year pairs are left out of the tables.
    #[arg(long, default_value_t = DEFAULT_MIN_YEARS)]
    min_years: usize,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    dir: DirArg,
    #[command(flatten)]
    render: RenderArgs,
    /// Reference file: country, dividend_rate, rental_rate, bill_rate, bond_rate [, w1..w4].
    #[arg(long, value_name = "FILE")]
    reference: PathBuf,
    #[arg(long, default_value_t = 0.03)]
    band_lo: f64,
    #[arg(long, default_value_t = 0.06)]
    band_hi: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeriesArg {
    Rates,
    Shares,
}

#[derive(Args, Debug)]
struct ChartArgs {
    #[command(flatten)]
    dir: DirArg,
    #[arg(long, value_enum, default_value = "rates")]
    series: SeriesArg,
    /// Where to write the SVG files; defaults to --dir.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    households: usize,
    #[arg(long, default_value_t = 20)]
    years: usize,
    /// Number of economies, seeded seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    economies: u64,
    #[arg(long, default_value_t = mvreturn::oracle::IDENTITY_TOLERANCE)]
    tolerance: f64,
}

fn base_config(input: Option<&InputArgs>, dir: &DirArg) -> RunConfig {
    let mut cfg = RunConfig {
        dir: dir.dir.clone(),
        ..Default::default()
    };
    if let Some(input) = input {
        cfg.inputs = input.inputs.clone();
        cfg.variable_map = input.variable_map.clone();
        cfg.delimiter = input.delimiter;
    }
    cfg
}

fn emit(text: &str, out: Option<&PathBuf>) -> Outcome<Output> {
    match out {
        Some(path) => {
            files::write_atomic(path, text.as_bytes())?;
            Ok(Output::default())
        }
        None => Ok(Output {
            stdout: text.to_string(),
            ..Default::default()
        }),
    }
}

fn run(command: Command) -> Outcome<Output> {
    match command {
        Command::Ingest(a) => {
            let cfg = base_config(Some(&a.input), &a.dir);
            cfg.validate()?;
            commands::ingest(&cfg)
        }
        Command::Compute(a) => {
            let cfg = RunConfig {
                threshold: a.threshold,
                epsilon_g: a.epsilon_g,
                ..base_config(Some(&a.input), &a.dir)
            };
            cfg.validate()?;
            commands::compute(&cfg)
        }
        Command::Report(a) => {
            let cfg = RunConfig {
                threshold: a.threshold,
                min_years: a.min_years,
                decimals: a.render.decimals,
                format: a.render.format,
                ..base_config(None, &a.dir)
            };
            cfg.validate()?;
            let table = match a.table {
                TableArg::Fgr => TableChoice::Fgr,
                TableArg::Shares => TableChoice::Shares,
                TableArg::All => TableChoice::All,
            };
            emit(&commands::report(&cfg, table)?, a.render.out.as_ref())
        }
        Command::Compare(a) => {
            let cfg = RunConfig {
                decimals: a.render.decimals,
                format: a.render.format,
                band: Band { lo: a.band_lo, hi: a.band_hi },
                ..base_config(None, &a.dir)
            };
            cfg.validate()?;
            Band::new(a.band_lo, a.band_hi)?;
            emit(&commands::compare(&cfg, &a.reference)?, a.render.out.as_ref())
        }
        Command::Chart(a) => {
            let cfg = base_config(None, &a.dir);
            cfg.validate()?;
            let selector = match a.series {
                SeriesArg::Rates => SeriesSelector::Rates,
                SeriesArg::Shares => SeriesSelector::Shares,
            };
            let out_dir = a.out_dir.clone().unwrap_or_else(|| cfg.dir.clone());
            commands::chart(&cfg, selector, &out_dir)
        }
        Command::Simulate(a) => commands::simulate(&SimulateArgs {
            seed: a.seed,
            households: a.households,
            years: a.years,
            economies: a.economies,
            tolerance: a.tolerance,
        }),
    }
}

fn report_failure(f: &Failure) -> ExitCode {
    eprintln!("{}", f.line());
    ExitCode::from(f.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let detail = e.to_string();
            let message = detail.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return report_failure(&Failure::validation("Usage", message));
        }
    };
    match run(cli.command) {
        Ok(output) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout.write_all(output.stdout.as_bytes()).and_then(|_| stdout.flush()) {
                return report_failure(&Failure::io("stdout", e));
            }
            eprint!("{}", output.stderr);
            if output.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => report_failure(&f),
    }
}
