use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::{IterateSnapshot, TraceRecord};

use super::config::TraceFormat;

/// Column order of CSV traces; identical to the JSONL field names.
pub const TRACE_FIELDS: [&str; 13] = [
    "iter",
    "f_value",
    "norm_g_inactive",
    "norm_diag_x_g_active",
    "min_g_active",
    "step_kind",
    "dtype",
    "alpha",
    "minres_iters",
    "n_f",
    "n_g",
    "n_hvp",
    "weighted_oracle_total",
];

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| io_err(path, e))?,
    ))
}

/// 17 significant digits, enough to round-trip any `f64`.
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// Serde name of a unit enum value (`"type_i"`, `"SOL"`, …).
fn label<T: Serialize>(v: &Option<T>) -> String {
    match v.as_ref().map(serde_json::to_value) {
        Some(Ok(serde_json::Value::String(s))) => s,
        _ => String::new(),
    }
}

fn csv_row(r: &TraceRecord) -> [String; 13] {
    [
        r.iter.to_string(),
        float(r.f_value),
        float(r.norm_g_inactive),
        float(r.norm_diag_x_g_active),
        opt_float(r.min_g_active),
        label(&r.step_kind),
        label(&r.dtype),
        opt_float(r.alpha),
        r.minres_iters.to_string(),
        r.n_f.to_string(),
        r.n_g.to_string(),
        r.n_hvp.to_string(),
        float(r.weighted_oracle_total),
    ]
}

/// Writes trace records as JSON lines or as CSV with a header row.
pub fn emit_trace(
    records: &[TraceRecord],
    path: impl AsRef<Path>,
    format: TraceFormat,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    match format {
        TraceFormat::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(|e| io_err(path, e))?;
                out.write_all(b"\n").map_err(|e| io_err(path, e))?;
            }
        }
        TraceFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(TRACE_FIELDS).map_err(|e| io_err(path, e))?;
            for r in records {
                w.write_record(csv_row(r)).map_err(|e| io_err(path, e))?;
            }
            w.flush().map_err(|e| io_err(path, e))?;
        }
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// `trace.jsonl` → `trace.snapshots.jsonl`, next to the trace.
pub fn snapshot_path(trace: &Path) -> PathBuf {
    let stem = trace.file_stem().unwrap_or_default().to_string_lossy();
    trace.with_file_name(format!("{stem}.snapshots.jsonl"))
}

/// One JSON line per snapshot: `{"iter": k, "x": [...], "direction": [...] | null}`.
pub fn emit_snapshots(snapshots: &[IterateSnapshot], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    for s in snapshots {
        serde_json::to_writer(&mut out, s).map_err(|e| io_err(path, e))?;
        out.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}
