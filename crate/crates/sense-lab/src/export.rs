//! Output plumbing: atomic writes, the CSV and JSON-lines formats shared
//! by subcommands and fixtures, and the per-run manifest.
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! readers never observe a half-written artifact. Numbers use Rust's
//! shortest round-trip formatting, which keeps reruns byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::Serialize;

use sense_core::estimation::{AccuracyCurve, AccuracyHistogram, Detection, RdaMap};
use sense_core::mac::Event;

// ─── Atomic writes ────────────────────────────────────────────────────────

/// Writes `bytes` to `path` via a same-directory temporary and rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp-write");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", path.display()))?;
    Ok(())
}

// ─── CSV formats ──────────────────────────────────────────────────────────

/// Sequence CSV: `index, re, im`.
pub fn sequence_csv(samples: &[sense_core::Cx]) -> String {
    let mut out = String::from("index, re, im\n");
    for (i, c) in samples.iter().enumerate() {
        let _ = writeln!(out, "{}, {}, {}", i, c.re, c.im);
    }
    out
}

/// Delay-Doppler map CSV: `doppler_hz, delay_s, magnitude`, one row per cell.
pub fn map_csv(dopplers_hz: &[f64], delays_s: &[f64], magnitudes: &[Vec<f64>]) -> String {
    let mut out = String::from("doppler_hz, delay_s, magnitude\n");
    for (d, row) in magnitudes.iter().enumerate() {
        for (t, m) in row.iter().enumerate() {
            let _ = writeln!(out, "{}, {}, {}", dopplers_hz[d], delays_s[t], m);
        }
    }
    out
}

/// Range-Doppler map in the delay-Doppler CSV layout; the delay column is
/// the fast-time correlation lag.
pub fn rda_csv(map: &RdaMap, sample_rate_hz: f64) -> String {
    let delays: Vec<f64> =
        (0..map.range_bins_m.len()).map(|r| r as f64 / sample_rate_hz).collect();
    map_csv(&map.doppler_bins_hz, &delays, &map.magnitudes)
}

/// Accuracy curve CSV: `snr_db, rmse, miss_rate, trials`; an all-miss
/// point records `NaN`.
pub fn curve_csv(curve: &AccuracyCurve) -> String {
    let mut out = String::from("snr_db, rmse, miss_rate, trials\n");
    for p in &curve.points {
        let rmse = match p.rmse {
            Some(v) => format!("{v}"),
            None => "NaN".to_string(),
        };
        let _ = writeln!(out, "{}, {}, {}, {}", p.snr_db, rmse, p.miss_rate, p.trials);
    }
    out
}

/// Accuracy histogram CSV: `bin_low, bin_high, count`.
pub fn hist_csv(hist: &AccuracyHistogram) -> String {
    let mut out = String::from("bin_low, bin_high, count\n");
    for (i, count) in hist.counts.iter().enumerate() {
        let _ = writeln!(out, "{}, {}, {}", hist.bin_edges[i], hist.bin_edges[i + 1], count);
    }
    out
}

/// Power-delay-profile CSV row.
#[derive(Debug, Clone, Copy)]
pub struct PdpRow {
    pub time_s: f64,
    pub tap_index: usize,
    pub delay_s: f64,
    pub magnitude: f64,
}

/// PDP CSV: `time_s, tap_index, delay_s, magnitude`.
pub fn pdp_csv(rows: &[PdpRow]) -> String {
    let mut out = String::from("time_s, tap_index, delay_s, magnitude\n");
    for r in rows {
        let _ = writeln!(out, "{}, {}, {}, {}", r.time_s, r.tap_index, r.delay_s, r.magnitude);
    }
    out
}

/// Detection list CSV.
pub fn detections_csv(detections: &[Detection]) -> String {
    let mut out = String::from("range_m, doppler_hz, velocity_mps, magnitude, snr_estimate_db\n");
    for d in detections {
        let _ = writeln!(
            out,
            "{}, {}, {}, {}, {}",
            d.range_m, d.doppler_hz, d.velocity_mps, d.magnitude, d.snr_estimate_db
        );
    }
    out
}

// ─── Trace export ─────────────────────────────────────────────────────────

/// JSON-lines trace: one event per line with fields
/// `{t, frame, src, dst, exchange_id, session_id, tags}`.
pub fn trace_jsonl(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        let frame = serde_json::to_string(e.frame.name()).expect("plain string");
        let tags = serde_json::to_string(&e.tags).expect("string vector");
        let _ = writeln!(
            out,
            "{{\"t\":{},\"frame\":{},\"src\":{},\"dst\":{},\"exchange_id\":{},\"session_id\":{},\"tags\":{}}}",
            e.t_s, frame, e.src, e.dst, e.exchange_id, e.session_id, tags
        );
    }
    out
}

// ─── Run manifest ─────────────────────────────────────────────────────────

/// Sidecar describing one CLI run: what ran, with which resolved
/// configuration and seed, and which files it produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Resolved configuration snapshot; sufficient to reproduce the run.
    pub config: serde_json::Value,
    pub seed: u64,
    /// Output file names, relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub duration_s: f64,
}

/// Verifies every listed output exists, then writes `manifest.json`.
pub fn write_manifest(out_dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    for name in &manifest.outputs {
        ensure!(
            out_dir.join(name).exists(),
            "manifest lists {name} but it was not written"
        );
    }
    let path = out_dir.join("manifest.json");
    let mut body = serde_json::to_string_pretty(manifest).context("encoding manifest")?;
    body.push('\n');
    atomic_write(&path, body.as_bytes())?;
    Ok(path)
}

// ─── Tests ────────────────────────────────────────────────────────────────
