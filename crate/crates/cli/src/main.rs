use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use switchwalk_cli::{
    cmd_ladder, cmd_report, cmd_simulate, cmd_stationary, cmd_verify, render_json,
    report_failed, write_outputs, CliError, Format, RunParams,
};

#[derive(Parser)]
#[command(
    name = "swalk",
    about = "Invariant measures of switching random walks: exact pipeline and seeded Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Walk-spec file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Half-width of the computation window (lattice indices).
    #[arg(long)]
    window: Option<i64>,
    /// Numeric tolerance for solves and verifications.
    #[arg(long)]
    tol: Option<f64>,
    /// Master RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Steps per simulated replica.
    #[arg(long)]
    steps: Option<u64>,
    /// Number of simulation replicas.
    #[arg(long)]
    replicas: Option<usize>,
    /// Chain to compare: occupation, ladder, or overshoot.
    #[arg(long)]
    chain: Option<String>,
    /// Directory to write the report into.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format for --out (json also prints to stdout).
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the six ladder-height laws and the switching constants.
    Ladder(Common),
    /// Compute the invariant measures ν, μ (windowed) and π.
    Stationary(Common),
    /// Run every exact invariance and balance check against tolerances.
    Verify(Common),
    /// Simulate the walk and compare a chain against its exact law.
    Simulate(Common),
    /// Merge prior reports in --out into one document plus CSV tables.
    Report {
        /// Directory holding prior <command>.json reports.
        #[arg(long)]
        out: PathBuf,
    },
}

fn params(c: &Common) -> RunParams {
    RunParams {
        spec: c.spec.clone(),
        window: c.window,
        tol: c.tol,
        seed: c.seed,
        steps: c.steps,
        replicas: c.replicas,
        chain: c.chain.clone(),
        out: c.out.clone(),
        format: match c.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        },
    }
}

fn run() -> Result<bool, CliError> {
    let cli = Cli::parse();
    let (doc, name, out, format) = match &cli.cmd {
        Cmd::Ladder(c) => (cmd_ladder(&params(c))?, "ladder", c.out.clone(), c.format),
        Cmd::Stationary(c) => (
            cmd_stationary(&params(c))?,
            "stationary",
            c.out.clone(),
            c.format,
        ),
        Cmd::Verify(c) => (cmd_verify(&params(c))?, "verify", c.out.clone(), c.format),
        Cmd::Simulate(c) => (
            cmd_simulate(&params(c))?,
            "simulate",
            c.out.clone(),
            c.format,
        ),
        Cmd::Report { out } => {
            let (doc, tables) = cmd_report(out)?;
            std::fs::create_dir_all(out).map_err(|e| CliError::Malformed(e.to_string()))?;
            std::fs::write(out.join("report.json"), render_json(&doc))
                .map_err(|e| CliError::Malformed(e.to_string()))?;
            for (tname, csv) in tables {
                std::fs::write(out.join(format!("{tname}.csv")), csv)
                    .map_err(|e| CliError::Malformed(e.to_string()))?;
            }
            print!("{}", render_json(&doc));
            return Ok(!report_failed(&doc));
        }
    };
    let fmt = match format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    write_outputs(&doc, name, out.as_deref(), fmt)?;
    print!("{}", render_json(&doc));
    Ok(!report_failed(&doc))
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e @ CliError::Malformed(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e @ CliError::Failed(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
