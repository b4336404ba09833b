//! On-disk run artifacts.
//!
//! Each seed of each scheme writes into `<output_dir>/<scheme>/seed_<seed>/`:
//!
//! | File | Format | Contents |
//! |------|--------|----------|
//! | `pairs.csv` | CSV | `slot,session,user_i,user_j,latency_ms` per measured pair |
//! | `sessions.csv` | CSV | `slot,session,users,mean_ms,dispersion_ms,objective_ms` |
//! | `summary.json` | JSON | [`SeedSummary`] |
//! | `handovers.jsonl` | JSON lines | one relay assignment per line |
//! | `audit.jsonl` | JSON lines | one constraint violation per line (empty when clean) |
//! | `failures.jsonl` | JSON lines | unplaceable relays and failed allocations |
//! | `flows.csv` | CSV | `slot,session,direction,src,dst,bandwidth_mbps,latency_ms,path` (with `--dump-flows`) |
//! | `graph_slot_<n>.txt` | text | slot graph dump (with `--dump-graph-slot n`) |
//!
//! Floats are written with six decimals so identical runs give identical bytes.
//! Node ids print as `s<index>` for satellites and `u<index>` for users; flow
//! paths join them with `>`.
//!
//! Graph dumps start with `# nodes=<n> links=<m> lambda=<l>`, then one
//! `node <id> isl_active=<c> adj=<id>,<id>,...` line per node and one
//! `link <i> <a> <b> <ISL|USL> latency_ms=<x> capacity=<c> remaining=<r> activated=<0|1>`
//! line per link.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::pipeline::{SeedRun, SeedSummary};
use crate::scenario::Scenario;
use crate::HarnessError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(path.to_path_buf(), e)
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let csv_err = |e: csv::Error| HarnessError::Io(path.to_path_buf(), e.into());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item)
            .map_err(|e| HarnessError::Io(path.to_path_buf(), e.into()))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| HarnessError::Io(path.to_path_buf(), e.into()))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn seed_dir(output_dir: &Path, run: &SeedRun) -> PathBuf {
    output_dir
        .join(run.scheme.name())
        .join(format!("seed_{}", run.seed))
}

/// Writes all artifacts of one seed run and returns its directory.
pub fn write_seed_run(output_dir: &Path, run: &SeedRun) -> Result<PathBuf, HarnessError> {
    let dir = seed_dir(output_dir, run);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    write_csv(
        &dir.join("pairs.csv"),
        &["slot", "session", "user_i", "user_j", "latency_ms"],
        run.pairs.iter().map(|p| {
            vec![
                p.slot.to_string(),
                p.session.to_string(),
                p.user_i.to_string(),
                p.user_j.to_string(),
                f6(p.latency_ms),
            ]
        }),
    )?;
    write_csv(
        &dir.join("sessions.csv"),
        &[
            "slot",
            "session",
            "users",
            "mean_ms",
            "dispersion_ms",
            "objective_ms",
        ],
        run.session_metrics.iter().map(|m| {
            vec![
                m.slot.to_string(),
                m.session.to_string(),
                m.users.to_string(),
                f6(m.mean_ms),
                f6(m.dispersion_ms),
                f6(m.objective_ms),
            ]
        }),
    )?;
    let summary: SeedSummary = run.summary();
    write_json(&dir.join("summary.json"), &summary)?;
    write_jsonl(&dir.join("handovers.jsonl"), &run.handovers)?;
    write_jsonl(&dir.join("audit.jsonl"), &run.audits)?;
    write_jsonl(&dir.join("failures.jsonl"), &run.failures)?;
    if !run.flows.is_empty() {
        write_csv(
            &dir.join("flows.csv"),
            &[
                "slot",
                "session",
                "direction",
                "src",
                "dst",
                "bandwidth_mbps",
                "latency_ms",
                "path",
            ],
            run.flows.iter().map(|f| {
                let dir = serde_json::to_value(f.direction)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default();
                vec![
                    f.slot.to_string(),
                    f.session.to_string(),
                    dir,
                    f.src.clone(),
                    f.dst.clone(),
                    f6(f.bandwidth_mbps),
                    f6(f.latency_ms),
                    f.path.clone(),
                ]
            }),
        )?;
    }
    for (slot, text) in &run.graph_dumps {
        let path = dir.join(format!("graph_slot_{slot}.txt"));
        fs::write(&path, text).map_err(io_err(&path))?;
    }
    Ok(dir)
}

/// Writes the scenario next to the run artifacts for replay.
pub fn write_scenario(output_dir: &Path, scenario: &Scenario) -> Result<(), HarnessError> {
    fs::create_dir_all(output_dir).map_err(io_err(output_dir))?;
    let path = output_dir.join(format!("scenario_{}.toml", scenario.scheme));
    fs::write(&path, scenario.to_toml()).map_err(io_err(&path))
}
