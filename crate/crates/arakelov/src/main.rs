//! Thin command-line wrapper over the library: periods, invariants, the
//! verification suites and the reference table.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use arakelov::cli::{
    self, report_to_csv, table1_to_csv, to_json_17, write_atomic, InvariantsInput, OutputFormat,
    RunConfig,
};
use arakelov::numerics::StreamKind;
use arakelov::verify::{self, Suite};
use arakelov::Error;

#[derive(Parser)]
#[command(
    name = "arakelov",
    about = "Faltings delta, Zhang-Kawazumi phi, Arakelov-Green functions and theta integrals for hyperelliptic curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Theta truncation accuracy
    #[arg(long, default_value_t = 1e-10, global = true)]
    eps: f64,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = 200_000, global = true)]
    samples: u64,
    /// Random seed (echoed into every report)
    #[arg(long, default_value_t = 42, global = true)]
    seed: u64,
    /// Quadrature order for period and Abel-Jacobi integrals
    #[arg(long = "quad-order", default_value_t = 128, global = true)]
    quad_order: usize,
    /// Sampling stream: pseudo | low-discrepancy
    #[arg(long, default_value = "low-discrepancy", global = true)]
    kind: StreamKind,
    /// Output format: json | csv
    #[arg(long, default_value = "json", global = true)]
    format: OutputFormat,
    /// Output file (stdout when absent); written atomically
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the period matrix of a curve with a validation block
    Periods {
        /// Curve JSON file or preset `xn+1:<n>`
        #[arg(long)]
        curve: String,
    },
    /// Compute the invariant report of a curve or a period matrix
    Invariants {
        #[arg(long, conflicts_with = "period")]
        curve: Option<String>,
        /// Period JSON file (restricted report)
        #[arg(long)]
        period: Option<String>,
    },
    /// Run a verification suite and report pass/fail per property
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Curve for the identity and bound suites
        #[arg(long)]
        curve: Option<String>,
        /// Genus for the Rosenhain suite
        #[arg(long, default_value_t = 2)]
        genus: usize,
        /// Curve count for the Rosenhain suite
        #[arg(long, default_value_t = 8)]
        trials: u64,
    },
    /// Recompute the reference rows for y^2 = x^n + 1 and compare
    Table1 {
        /// Rows to compute (values of n)
        #[arg(long, value_delimiter = ',', default_values_t = vec![5, 6, 7, 8])]
        rows: Vec<u32>,
    },
}

fn emit(out: &Option<PathBuf>, content: &str) -> arakelov::Result<()> {
    match out {
        Some(path) => write_atomic(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::AllCensored { .. } => 3,
        Error::DuplicateBranchPoint { .. }
        | Error::EvenCount { .. }
        | Error::NonSymmetric { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::VanishingEvenThetaConstant { .. }
        | Error::Calibration(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> arakelov::Result<u8> {
    let run_config = RunConfig {
        eps: cli.common.eps,
        samples: cli.common.samples,
        seed: cli.common.seed,
        quad_order: cli.common.quad_order,
        kind: cli.common.kind,
        format: cli.common.format,
    };
    match cli.command {
        Command::Periods { curve } => {
            let out = cli::cmd_periods(&curve, &run_config)?;
            emit(&cli.common.out, &to_json_17(&out)?)?;
            Ok(0)
        }
        Command::Invariants { curve, period } => {
            let input = match (&curve, &period) {
                (Some(c), None) => InvariantsInput::Curve(c),
                (None, Some(p)) => InvariantsInput::Period(p),
                _ => {
                    return Err(Error::InvalidInput(
                        "pass exactly one of --curve or --period".into(),
                    ))
                }
            };
            let report = cli::cmd_invariants(input, &run_config)?;
            let negative_margin = report
                .bounds
                .iter()
                .any(|b| b.margin.is_finite() && b.margin < 0.0);
            let content = match run_config.format {
                OutputFormat::Json => to_json_17(&report)?,
                OutputFormat::Csv => report_to_csv(&report),
            };
            emit(&cli.common.out, &content)?;
            Ok(if negative_margin { 4 } else { 0 })
        }
        Command::Verify {
            suite,
            curve,
            genus,
            trials,
        } => {
            let checks = verify::run_suite(suite, curve.as_deref(), genus, trials, &run_config)?;
            let mut all_ok = true;
            let mut lines = String::new();
            for c in &checks {
                all_ok &= c.pass;
                lines.push_str(&format!(
                    "{} {} (residual {:.3e}, tolerance {:.3e})\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.residual,
                    c.tolerance
                ));
            }
            emit(&cli.common.out, &lines)?;
            Ok(if all_ok { 0 } else { 1 })
        }
        Command::Table1 { rows } => {
            let table = cli::cmd_table1(&run_config, &rows)?;
            let all_ok = table.iter().all(|r| r.pass);
            let content = match run_config.format {
                OutputFormat::Json => to_json_17(&table)?,
                OutputFormat::Csv => table1_to_csv(&table),
            };
            emit(&cli.common.out, &content)?;
            Ok(if all_ok { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ARAKELOV_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let diagnostic = serde_json::json!({
                "code": err.code(),
                "error": err.to_string(),
            });
            eprintln!("{diagnostic}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
