//! `fano-cqed`: simulate emitter–microdisk spectra, tabulate mode
//! properties, fit measured traces and cross-check the closed-form line
//! shape against the time-domain engine.

mod failure;
mod fit;
mod io;
mod modes;
mod regress;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fano_cqed::{Execution, SpectrumTrace};
use log::{error, info, warn};

use failure::{CliResult, Failure};

#[derive(Debug, Parser)]
#[command(name = "fano-cqed", version, about = "Emitter–microdisk Fano spectra")]
struct Cli {
    /// Input document (JSON, or CSV for `fit`). Reads stdin when omitted.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output file. Writes stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Overrides the noise seed of `simulate`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel grids and batches.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Fit tolerance for `fit`, error threshold for `regress`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a spectrum described by a JSON document and write CSV.
    Simulate,
    /// Fit a CSV trace; writes a JSON report.
    Fit {
        /// Fit model, background, response and options (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Also write data, model and residuals as CSV.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Scattering Q, doublet splitting and peak coupling for mode/scatterer rows.
    Modes,
    /// Compare the time-domain and closed-form spectra in the fast-dephasing regime.
    Regress,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            warn!("could not set thread count: {e}");
        }
    }

    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            error!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let input = cli.input.as_deref();
    let output = cli.output.as_deref();
    match &cli.command {
        Command::Simulate => {
            let doc: simulate::SimulateDoc = io::parse_doc(&io::read_input(input)?)?;
            let trace = simulate::run(&doc, cli.seed)?;
            let mut buf = Vec::new();
            trace.write_csv(&mut buf, &["generated by fano-cqed simulate".into()])?;
            io::write_output(output, &buf)?;
            info!("wrote {} points", trace.len());
            Ok(())
        }
        Command::Modes => {
            let doc: modes::ModesDoc = io::parse_doc(&io::read_input(input)?)?;
            let (table, failed) = modes::run(&doc);
            io::write_output(output, table.as_bytes())?;
            modes::check(failed)
        }
        Command::Fit { spec, overlay } => {
            let trace = SpectrumTrace::read_csv(io::read_input(input)?.as_bytes())?;
            let doc: fit::FitDoc = io::parse_doc(&io::read_input(Some(spec))?)?;
            let (result, trace) = fit::run(trace, doc, cli.tolerance)?;
            let mut json = serde_json::to_vec_pretty(&result).expect("fit result serializes");
            json.push(b'\n');
            io::write_output(output, &json)?;
            if let Some(path) = overlay {
                io::write_output(Some(path), fit::overlay_csv(&trace, &result).as_bytes())?;
            }
            info!(
                "{} after {} iterations, residual norm {:e}",
                result.status.as_str(),
                result.iterations,
                result.residual_norm
            );
            if result.converged() {
                Ok(())
            } else {
                Err(Failure::NotConverged(result.status.as_str().into()))
            }
        }
        Command::Regress => {
            let doc: regress::RegressDoc = io::parse_doc(&io::read_input(input)?)?;
            let report = regress::run(&doc, cli.tolerance, Execution::default())?;
            io::write_output(output, report.to_csv().as_bytes())?;
            info!(
                "max rel_error {:e}, relative L2 {:e}, threshold {:e}",
                report.max_rel_error, report.rel_l2, report.threshold
            );
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Numerical(format!(
                    "max rel_error {:e} exceeds {:e}",
                    report.max_rel_error, report.threshold
                )))
            }
        }
    }
}
