//! CSV and JSON rendering.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::commands::{EfficiencyRow, ShapeSet, Simulation};
use crate::error::CliError;

pub const TABLE_HEADER: [&str; 5] = ["d", "eta_fwd", "eta_offres", "eta_res", "eta_star"];
pub const CURVE_HEADER: [&str; 5] = ["d", "eta_star", "eta_res", "eta_fwd", "eta_offres"];
pub const SHAPES_HEADER: [&str; 4] = ["d", "x", "s_opt", "s_exp"];
pub const SERIES_HEADER: [&str; 5] = ["t", "flux", "emitted", "loss", "residual"];

/// Output destination; remembers the path for error messages.
pub struct Sink {
    path: PathBuf,
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn open(out: Option<&Path>) -> Result<Self, CliError> {
        match out {
            Some(p) => {
                let f = File::create(p).map_err(|e| CliError::io(p, e))?;
                Ok(Self { path: p.to_path_buf(), inner: Box::new(BufWriter::new(f)) })
            }
            None => Ok(Self { path: PathBuf::from("<stdout>"), inner: Box::new(io::stdout().lock()) }),
        }
    }

    pub fn stderr() -> Self {
        Self { path: PathBuf::from("<stderr>"), inner: Box::new(io::stderr()) }
    }

    pub fn write_all(&mut self, bytes: &[u8]) -> Result<(), CliError> {
        self.inner.write_all(bytes).map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Fixed 4-decimal efficiency.
pub fn fixed4(v: f64) -> String {
    format!("{v:.4}")
}

/// Six significant digits in scientific notation.
pub fn sci6(v: f64) -> String {
    format!("{v:.5e}")
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let to_cli = |e: csv::Error| CliError::io("<csv buffer>", io::Error::other(e.to_string()));
    w.write_record(header).map_err(to_cli)?;
    for row in rows {
        w.write_record(row).map_err(to_cli)?;
    }
    w.into_inner().map_err(|e| CliError::io("<csv buffer>", io::Error::other(e.to_string())))
}

pub fn table_csv(rows: &[EfficiencyRow]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &TABLE_HEADER,
        rows.iter().map(|r| [depth(r.d), fixed4(r.eta_fwd), fixed4(r.eta_offres), fixed4(r.eta_res), fixed4(r.eta_star)]),
    )
}

pub fn curve_csv(rows: &[EfficiencyRow]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &CURVE_HEADER,
        rows.iter().map(|r| [depth(r.d), fixed4(r.eta_star), fixed4(r.eta_res), fixed4(r.eta_fwd), fixed4(r.eta_offres)]),
    )
}

pub fn shapes_csv(sets: &[ShapeSet]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &SHAPES_HEADER,
        sets.iter().flat_map(|s| {
            (0..s.x.len()).map(move |i| [depth(s.d), format!("{:.10}", s.x[i]), sci6(s.s_opt[i]), sci6(s.s_exp[i])])
        }),
    )
}

pub fn series_csv(sim: &Simulation) -> Result<Vec<u8>, CliError> {
    let r = &sim.record;
    csv_bytes(
        &SERIES_HEADER,
        (0..r.times.len()).map(|i| [sci6(r.times[i]), sci6(r.flux[i]), sci6(r.emitted[i]), sci6(r.loss[i]), sci6(r.residual[i])]),
    )
}

/// Depths print in shortest round-trip form.
fn depth(d: f64) -> String {
    format!("{d}")
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::config(format!("cannot encode JSON: {e}")))?;
    v.push(b'\n');
    Ok(v)
}

/// `<dir>/<stem>.summary.json` next to the time series.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "simulate".into());
    out.with_file_name(format!("{stem}.summary.json"))
}
