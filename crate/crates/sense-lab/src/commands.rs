//! Subcommand implementations: each resolves its inputs, runs the core
//! pipeline, writes its output files, and reports what it produced so the
//! dispatcher can finish the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};

use sense_core::ambiguity::{ambiguity_map, laz_metrics, LazMetrics};
use sense_core::channel::{
    apply_channel, clutter_step, realize_channel, trace_rays, ClutterModel, Ray, Scenario,
};
use sense_core::csi::{dequantize_csi, quantize_csi, CsiMatrix, QuantConfig, Scheme};
use sense_core::estimation::{
    build_rda_map, cfar_detect, cfar_scale_for, evaluate_curve, evaluate_histogram, EstimateKind,
    EvalPlan, SensingGeometry,
};
use sense_core::mac::{Event, Phase, SensingEngine, SessionAttrs, StaProfile, SIFS_SUB7_S};
use sense_core::rng;
use sense_core::seq::ComplexSequence;
use sense_core::waveform::{
    build_ce_sequence, build_sync_subfield, sync_correlation_matrix, CeVariant,
};

use crate::cli::{
    AmbiguityArgs, BurstArgs, Cli, Command, HistArgs, KindArg, QuantBenchArgs, SequencesArgs,
    SimulateArgs, SweepArgs,
};
use crate::config::{load_scenario_file, resolve_seed, snapshot};
use crate::export::{self, PdpRow, RunManifest};

/// What a finished subcommand hands back for the manifest.
struct Finished {
    out_dir: PathBuf,
    command: &'static str,
    config: serde_json::Value,
    seed: u64,
    outputs: Vec<String>,
}

/// Runs one parsed invocation end to end, manifest included.
pub fn dispatch(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let fin = match cli.command {
        Command::Sequences(a) => sequences(&a)?,
        Command::Ambiguity(a) => ambiguity(&a)?,
        Command::QuantBench(a) => quant_bench(&a)?,
        Command::Simulate(a) => simulate(&a)?,
        Command::Sweep(a) => sweep(&a)?,
        Command::Hist(a) => hist(&a)?,
    };
    let manifest = RunManifest {
        command: fin.command.to_string(),
        config: fin.config,
        seed: fin.seed,
        outputs: fin.outputs.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_s: started.elapsed().as_secs_f64(),
    };
    let path = export::write_manifest(&fin.out_dir, &manifest)?;
    println!(
        "{}: wrote {} file(s) and {}",
        fin.command,
        fin.outputs.len(),
        path.display()
    );
    Ok(())
}

fn write_output(dir: &Path, name: &str, content: &str, outputs: &mut Vec<String>) -> Result<()> {
    export::atomic_write(&dir.join(name), content.as_bytes())?;
    outputs.push(name.to_string());
    Ok(())
}

// ─── sequences ────────────────────────────────────────────────────────────

fn sequences(args: &SequencesArgs) -> Result<Finished> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut outputs = Vec::new();

    for (name, variant) in [("ce0", CeVariant::Ce0), ("ce1", CeVariant::Ce1)] {
        let seq = build_ce_sequence(variant);
        write_output(
            &args.out,
            &format!("{name}.csv"),
            &export::sequence_csv(seq.samples()),
            &mut outputs,
        )?;
    }
    for r in 1..=8u8 {
        let seq = build_sync_subfield(r).map_err(|e| anyhow::anyhow!("{e}"))?;
        write_output(
            &args.out,
            &format!("sync_{r}.csv"),
            &export::sequence_csv(seq.samples()),
            &mut outputs,
        )?;
    }

    let matrix = sync_correlation_matrix();
    let mut csv = String::from("r, s1, s2, s3, s4, s5, s6, s7, s8\n");
    for (i, row) in matrix.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        csv.push_str(&format!("{}, {}\n", i + 1, cells.join(", ")));
    }
    write_output(&args.out, "sync_correlation_matrix.csv", &csv, &mut outputs)?;

    Ok(Finished {
        out_dir: args.out.clone(),
        command: "sequences",
        config: serde_json::json!({}),
        seed: 0,
        outputs,
    })
}

// ─── ambiguity ────────────────────────────────────────────────────────────

fn named_sequence(name: &str, sample_rate_hz: f64) -> Result<ComplexSequence> {
    let seq = match name {
        "ce0" => build_ce_sequence(CeVariant::Ce0),
        "ce1" => build_ce_sequence(CeVariant::Ce1),
        _ => match name.strip_prefix("sync").and_then(|n| n.parse::<u8>().ok()) {
            Some(r @ 1..=8) => build_sync_subfield(r).map_err(|e| anyhow::anyhow!("{e}"))?,
            _ => bail!("unknown sequence {name:?} (expected ce0, ce1, or sync1..sync8)"),
        },
    };
    Ok(seq.with_sample_rate(sample_rate_hz))
}

/// Symmetric Doppler grid with an exact 0 Hz center point.
fn doppler_grid(max_doppler_hz: f64, points: usize) -> Vec<f64> {
    let half = (points.max(3) / 2) as i64;
    (-half..=half).map(|i| i as f64 * max_doppler_hz / half as f64).collect()
}

fn laz_csv(metrics: &LazMetrics) -> String {
    let ratio = match metrics.peak_to_sidelobe_db {
        Some(v) => format!("{v}"),
        None => "NaN".to_string(),
    };
    format!(
        "peak, max_sidelobe, peak_to_sidelobe_db, max_delay_s, max_doppler_hz\n{}, {}, {}, {}, {}\n",
        metrics.peak, metrics.max_sidelobe, ratio, metrics.zone.0, metrics.zone.1
    )
}

fn ambiguity(args: &AmbiguityArgs) -> Result<Finished> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut outputs = Vec::new();

    let a = named_sequence(&args.a, args.sample_rate_hz)?;
    let b = named_sequence(&args.b, args.sample_rate_hz)?;
    let grid = doppler_grid(args.max_doppler_hz, args.doppler_points);

    let aaf = ambiguity_map(&a, &a, args.max_delay_s, &grid).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_output(
        &args.out,
        &format!("aaf_{}.csv", args.a),
        &export::map_csv(&aaf.dopplers_hz, &aaf.delays_s, &aaf.magnitudes),
        &mut outputs,
    )?;
    let laz_a = laz_metrics(&aaf, args.max_delay_s, args.max_doppler_hz, true)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    write_output(&args.out, &format!("laz_aaf_{}.csv", args.a), &laz_csv(&laz_a), &mut outputs)?;

    let caf = ambiguity_map(&a, &b, args.max_delay_s, &grid).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_output(
        &args.out,
        &format!("caf_{}_{}.csv", args.a, args.b),
        &export::map_csv(&caf.dopplers_hz, &caf.delays_s, &caf.magnitudes),
        &mut outputs,
    )?;
    let laz_c = laz_metrics(&caf, args.max_delay_s, args.max_doppler_hz, false)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    write_output(
        &args.out,
        &format!("laz_caf_{}_{}.csv", args.a, args.b),
        &laz_csv(&laz_c),
        &mut outputs,
    )?;

    Ok(Finished {
        out_dir: args.out.clone(),
        command: "ambiguity",
        config: serde_json::json!({
            "a": args.a,
            "b": args.b,
            "sample_rate_hz": args.sample_rate_hz,
            "max_delay_s": args.max_delay_s,
            "max_doppler_hz": args.max_doppler_hz,
            "doppler_points": args.doppler_points,
        }),
        seed: 0,
        outputs,
    })
}

// ─── quant-bench ──────────────────────────────────────────────────────────

/// Random SISO matrix with a 21 dB per-subcarrier magnitude spread; the
/// same construction the codec's own ensemble tests use.
pub fn ensemble_matrix(seed: u64, trial: u64, n_subcarriers: usize) -> CsiMatrix {
    let mut r = rng::stream(seed, "csi-ensemble", trial);
    let values = (0..n_subcarriers)
        .map(|k| {
            let sigma = 10.0f64.powf(-(3.0 * ((k % 8) as f64)) / 20.0);
            rng::complex_gauss(&mut r, sigma * sigma)
        })
        .collect();
    CsiMatrix::siso(values, 20.0e6).expect("nonempty")
}

/// Mean absolute component error between a matrix and its reconstruction.
pub fn mean_abs_error(h: &CsiMatrix, recon: &CsiMatrix) -> f64 {
    let total: f64 = h
        .entries
        .iter()
        .zip(&recon.entries)
        .map(|(a, b)| (a.re - b.re).abs() + (a.im - b.im).abs())
        .sum();
    total / (2.0 * h.entries.len() as f64)
}

/// The four benchmarked configurations at n_b = 8.
pub fn bench_configs() -> Vec<(&'static str, QuantConfig)> {
    let mut pow2 = QuantConfig::new(Scheme::PowerOfTwo, 8);
    pow2.n_p = Some(12);
    let mut fractional = QuantConfig::new(Scheme::Fractional, 8);
    fractional.alpha_set = (1..=256).collect();
    vec![
        ("legacy_11n", QuantConfig::new(Scheme::Legacy11n, 8)),
        ("simplified_linear", QuantConfig::new(Scheme::SimplifiedLinear, 8)),
        ("power_of_two", pow2),
        ("fractional", fractional),
    ]
}

fn quant_bench(args: &QuantBenchArgs) -> Result<Finished> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let seed = resolve_seed(args.seed);
    let mut outputs = Vec::new();

    let mut csv = String::from("scheme, n_b, mean_abs_error, matrices\n");
    for (name, cfg) in bench_configs() {
        let mut total = 0.0;
        for trial in 0..args.matrices {
            let h = ensemble_matrix(seed, trial, args.n_subcarriers);
            let q = quantize_csi(&h, &cfg).map_err(|e| anyhow::anyhow!("{e}"))?;
            let recon = dequantize_csi(&q).map_err(|e| anyhow::anyhow!("{e}"))?;
            total += mean_abs_error(&h, &recon);
        }
        let mean = total / args.matrices as f64;
        csv.push_str(&format!("{}, {}, {}, {}\n", name, cfg.n_b, mean, args.matrices));
    }
    write_output(&args.out, "quant_bench.csv", &csv, &mut outputs)?;

    Ok(Finished {
        out_dir: args.out.clone(),
        command: "quant-bench",
        config: serde_json::json!({
            "matrices": args.matrices,
            "n_subcarriers": args.n_subcarriers,
            "seed": seed,
        }),
        seed,
        outputs,
    })
}

// ─── simulate ─────────────────────────────────────────────────────────────

fn burst_json(burst: &BurstArgs) -> serde_json::Value {
    serde_json::json!({
        "n_exchanges": burst.n_exchanges,
        "intra_interval_s": burst.intra_interval_s,
        "n_taps": burst.n_taps,
        "guard_cells": burst.guard_cells,
        "train_cells": burst.train_cells,
        "pfa": burst.pfa,
    })
}

/// Interior training-ring size of the CFAR window.
fn train_ring(burst: &BurstArgs) -> usize {
    let w = 2 * (burst.guard_cells + burst.train_cells) + 1;
    let g = 2 * burst.guard_cells + 1;
    w * w - g * g
}

fn build_plan(scenario: &Scenario, burst: &BurstArgs, kind: EstimateKind, seed: u64) -> EvalPlan {
    EvalPlan {
        n_exchanges: burst.n_exchanges,
        intra_interval_s: burst.intra_interval_s,
        n_taps: burst.n_taps,
        waveform: build_ce_sequence(CeVariant::Ce0).with_sample_rate(scenario.sample_rate_hz()),
        guard_cells: burst.guard_cells,
        train_cells: burst.train_cells,
        scale_factor: cfar_scale_for(burst.pfa, train_ring(burst)),
        kind,
        seed,
    }
}

fn kind_of(arg: KindArg) -> EstimateKind {
    match arg {
        KindArg::Range => EstimateKind::Range,
        KindArg::Velocity => EstimateKind::Velocity,
        KindArg::Doppler => EstimateKind::Doppler,
    }
}

fn simulate(args: &SimulateArgs) -> Result<Finished> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let (_, scenario) = load_scenario_file(&args.scenario)?;
    let seed = resolve_seed(args.seed);
    let snr_db = args.snr_db.unwrap_or(f64::INFINITY);
    ensure!(
        args.subcarriers >= args.burst.n_taps,
        "subcarriers ({}) must cover n_taps ({})",
        args.subcarriers,
        args.burst.n_taps
    );
    let fs = scenario.sample_rate_hz();
    let waveform = build_ce_sequence(CeVariant::Ce0).with_sample_rate(fs);
    let intra = args.burst.intra_interval_s;

    // Observation point: quarter of the trajectory span, as in evaluation.
    let span_start = scenario.target.waypoints.first().expect("validated").t_s;
    let span_end = scenario.target.waypoints.last().expect("validated").t_s;
    let t_obs = span_start + 0.25 * (span_end - span_start);
    let rays = trace_rays(&scenario, t_obs);

    let mut noise = rng::stream(seed ^ scenario.seed, "simulate", 0);
    let mut clutter = match scenario.clutter {
        Some(params) => {
            Some(ClutterModel::new(params, args.burst.n_taps).map_err(|e| anyhow::anyhow!("{e}"))?)
        }
        None => None,
    };

    // One TB sensing session: STA 1 (AP) sounds, STA 2 measures + reports.
    let mut engine = SensingEngine::new(SIFS_SUB7_S);
    engine.register_sta(StaProfile::new(1, true)).map_err(|e| anyhow::anyhow!("{e}"))?;
    engine.register_sta(StaProfile::new(2, false)).map_err(|e| anyhow::anyhow!("{e}"))?;
    engine.exchange_capabilities(1, 2).map_err(|e| anyhow::anyhow!("{e}"))?;
    let attrs = SessionAttrs::simple(1, 1, vec![2]);
    let session_id = attrs.session_id;
    engine.setup_session(attrs).map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut burst = Vec::with_capacity(args.burst.n_exchanges);
    let mut pdp_rows = Vec::new();
    let mut trace: Vec<Event> = Vec::new();
    for k in 0..args.burst.n_exchanges {
        let t_ex = k as f64 * intra;
        let mut all_rays: Vec<Ray> = rays.clone();
        if let Some(model) = &mut clutter {
            clutter_step(model, &mut noise);
            all_rays.extend(model.rays(fs));
        }
        let c = realize_channel(&all_rays, fs, args.burst.n_taps, scenario.carrier_hz, t_ex)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        for (tap, coeff) in c.effective_cir().iter().enumerate() {
            if coeff.norm_sqr() > 0.0 {
                pdp_rows.push(PdpRow {
                    time_s: t_ex,
                    tap_index: tap,
                    delay_s: tap as f64 / fs,
                    magnitude: coeff.norm(),
                });
            }
        }
        burst.push(apply_channel(&waveform, &c, snr_db, &mut noise));

        let csi = c.cfr(args.subcarriers);
        engine.advance_to(t_ex);
        let mut hook = |_tx, _rx, _t| csi.clone();
        let record = engine
            .run_tb_exchange(session_id, &[Phase::NdpaSounding, Phase::Reporting], &mut hook)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        trace.extend(record.trace);
    }

    let geometry = if scenario.is_monostatic() {
        SensingGeometry::Monostatic
    } else {
        SensingGeometry::Bistatic
    };
    let map = build_rda_map(&burst, &waveform, intra, scenario.carrier_hz, geometry)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let detections = cfar_detect(
        &map,
        args.burst.guard_cells,
        args.burst.train_cells,
        cfar_scale_for(args.burst.pfa, train_ring(&args.burst)),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut outputs = Vec::new();
    write_output(&args.out, "trace.jsonl", &export::trace_jsonl(&trace), &mut outputs)?;
    write_output(&args.out, "pdp.csv", &export::pdp_csv(&pdp_rows), &mut outputs)?;
    write_output(&args.out, "rda.csv", &export::rda_csv(&map, fs), &mut outputs)?;
    write_output(&args.out, "detections.csv", &export::detections_csv(&detections), &mut outputs)?;

    Ok(Finished {
        out_dir: args.out.clone(),
        command: "simulate",
        config: serde_json::json!({
            "scenario": serde_json::to_value(snapshot(&scenario))?,
            "burst": burst_json(&args.burst),
            "snr_db": args.snr_db,
            "subcarriers": args.subcarriers,
            "seed": seed,
        }),
        seed,
        outputs,
    })
}

// ─── sweep ────────────────────────────────────────────────────────────────

fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("SNR point {:?} is not a number", s.trim()))
        })
        .collect()
}

fn sweep(args: &SweepArgs) -> Result<Finished> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let (_, scenario) = load_scenario_file(&args.scenario)?;
    let seed = resolve_seed(args.seed);
    let snr_list = parse_snr_list(&args.snr)?;
    let plan = build_plan(&scenario, &args.burst, kind_of(args.kind), seed);

    let curve =
        evaluate_curve(&scenario, &plan, &snr_list, args.trials).map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut outputs = Vec::new();
    write_output(&args.out, "curve.csv", &export::curve_csv(&curve), &mut outputs)?;

    Ok(Finished {
        out_dir: args.out.clone(),
        command: "sweep",
        config: serde_json::json!({
            "scenario": serde_json::to_value(snapshot(&scenario))?,
            "burst": burst_json(&args.burst),
            "snr": snr_list,
            "trials": args.trials,
            "kind": format!("{:?}", args.kind).to_lowercase(),
            "seed": seed,
        }),
        seed,
        outputs,
    })
}

// ─── hist ─────────────────────────────────────────────────────────────────

fn hist(args: &HistArgs) -> Result<Finished> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let (_, scenario) = load_scenario_file(&args.scenario)?;
    let seed = resolve_seed(args.seed);
    let plan = build_plan(&scenario, &args.burst, kind_of(args.kind), seed);

    let histogram = evaluate_histogram(
        &scenario,
        &plan,
        args.snr_db,
        args.trials,
        args.samples,
        args.bins,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut outputs = Vec::new();
    write_output(&args.out, "hist.csv", &export::hist_csv(&histogram), &mut outputs)?;

    Ok(Finished {
        out_dir: args.out.clone(),
        command: "hist",
        config: serde_json::json!({
            "scenario": serde_json::to_value(snapshot(&scenario))?,
            "burst": burst_json(&args.burst),
            "snr_db": args.snr_db,
            "trials": args.trials,
            "samples": args.samples,
            "bins": args.bins,
            "kind": format!("{:?}", args.kind).to_lowercase(),
            "misses": histogram.misses,
            "samples_total": histogram.samples,
            "seed": seed,
        }),
        seed,
        outputs,
    })
}
