//! Command-line front end for the `spinwave` crate.

pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod presets;

pub use error::CliError;

use config::{Cli, Command, Format, RunConfig};
use output::Sink;

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = RunConfig::resolve(cli)?;
    let out = config.out.as_deref();
    match &cli.command {
        Command::Table | Command::Curve => {
            let rows = commands::efficiency_rows(&config.depths, config.grid)?;
            let bytes = match (config.format, &cli.command) {
                (Format::Json, _) => output::json_bytes(&serde_json::json!({ "grid": config.grid, "rows": rows }))?,
                (Format::Csv, Command::Table) => output::table_csv(&rows)?,
                (Format::Csv, _) => output::curve_csv(&rows)?,
            };
            emit(out, &bytes)
        }
        Command::Shapes => {
            let sets = commands::shape_sets(&config.depths, config.grid)?;
            let bytes = match config.format {
                Format::Json => output::json_bytes(&serde_json::json!({ "grid": config.grid, "shapes": sets }))?,
                Format::Csv => output::shapes_csv(&sets)?,
            };
            emit(out, &bytes)
        }
        Command::Feasibility(_) => {
            let params = config.physical.ok_or_else(|| CliError::config("feasibility needs physical parameters"))?;
            let report = commands::feasibility(&params, &config)?;
            emit(out, &output::json_bytes(&report)?)
        }
        Command::Simulate(_) => {
            let sim = commands::simulate(&config)?;
            match config.format {
                Format::Json => {
                    let r = &sim.record;
                    let doc = serde_json::json!({
                        "summary": sim.summary,
                        "t": r.times,
                        "flux": r.flux,
                        "emitted": r.emitted,
                        "loss": r.loss,
                        "residual": r.residual,
                    });
                    emit(out, &output::json_bytes(&doc)?)
                }
                Format::Csv => {
                    emit(out, &output::series_csv(&sim)?)?;
                    let summary = output::json_bytes(&sim.summary)?;
                    match out {
                        Some(p) => emit(Some(&output::summary_path(p)), &summary),
                        None => {
                            let mut s = Sink::stderr();
                            s.write_all(&summary)?;
                            s.finish()
                        }
                    }
                }
            }
        }
    }
}

fn emit(out: Option<&std::path::Path>, bytes: &[u8]) -> Result<(), CliError> {
    let mut sink = Sink::open(out)?;
    sink.write_all(bytes)?;
    sink.finish()
}
