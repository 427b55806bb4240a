//! Acceptance gate: one test per release criterion, each printing a
//! `acceptance N [PASS|FAIL] <name>` line (visible with `--nocapture`)
//! before asserting. Every numeric bound, set equality, and byte
//! comparison below is a release requirement; timing caps are measured
//! on the spot.

mod common;

use std::time::Instant;

use approx::assert_relative_eq;
use rand::seq::SliceRandom;
use rand::Rng;

use sense_core::ambiguity::{
    ambiguity_map, cross_correlation, default_doppler_grid, max_doppler_for,
};
use sense_core::channel::{load_scenario, Preset};
use sense_core::csi::{
    cfr_to_cir, cir_to_cfr, decode_feedback, encode_feedback, parse_feedback, quantize_csi,
    serialize_feedback, CsiMatrix, DecodedFeedback, FeedbackPayload, QuantConfig, ReportType,
    Scheme,
};
use sense_core::estimation::{
    cfar_detect, cfar_scale_for, evaluate_curve, rmse, EstimateKind, EstimationRecord, EvalPlan,
    RdaMap, SensingGeometry,
};
use sense_core::mac::{FrameKind, Phase, Role, StaId};
use sense_core::rng;
use sense_core::waveform::{
    autocorrelation_sum, build_ce_sequence, generate_golay_pair, sync_correlation,
    sync_correlation_matrix, CeVariant, GOLAY_BLOCK_LEN,
};
use sense_core::Cx;
use sense_lab::commands::{bench_configs, ensemble_matrix, mean_abs_error};
use sense_lab::export::trace_jsonl;

fn report(n: usize, name: &str, failures: Vec<String>) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("acceptance {n} [{status}] {name}");
    assert!(failures.is_empty(), "criterion {n} ({name}):\n{}", failures.join("\n"));
}

macro_rules! check {
    ($fails:expr, $cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            $fails.push(format!($($msg)+));
        }
    }};
}

// ── 1. Complementary pairs ──

#[test]
fn acceptance_1_golay_complementarity() {
    let started = Instant::now();
    let mut fails = Vec::new();

    for order in 1..=10u8 {
        for pair_index in [7u8, 8] {
            let pair = generate_golay_pair(order, pair_index).unwrap();
            let n = pair.chips_a().len();
            check!(fails, n == 1usize << order, "pair {pair_index} order {order}: length {n}");
            let sum = autocorrelation_sum(pair.chips_a(), pair.chips_b());
            for (lag_index, &v) in sum.iter().enumerate() {
                let expected = if lag_index == n - 1 { 2 * n as i64 } else { 0 };
                check!(
                    fails,
                    v == expected,
                    "pair {pair_index} order {order} lag index {lag_index}: {v} != {expected}"
                );
            }
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    check!(fails, elapsed < 1.0, "took {elapsed:.3} s, cap 1 s");
    report(1, "golay complementarity across all generated pairs", fails);
}

// ── 2. Sync subfield correlation structure ──

#[test]
fn acceptance_2_sync_correlation_structure() {
    let started = Instant::now();
    let mut fails = Vec::new();
    let zero_lag = GOLAY_BLOCK_LEN - 1;

    for r in 1..=8u8 {
        let auto = sync_correlation(r, r).unwrap();
        check!(fails, auto[zero_lag] == 1024, "sync {r} peak {} != 1024", auto[zero_lag]);
    }

    let group = |idx: u8| usize::from(idx > 4);
    for r in 1..=8u8 {
        for s in 1..=8u8 {
            if r != s && group(r) == group(s) {
                let corr = sync_correlation(r, s).unwrap();
                check!(
                    fails,
                    corr.iter().all(|&v| v == 0),
                    "sync pair ({r}, {s}) within-group correlation is not identically zero"
                );
            }
        }
    }

    // Cross-group maxima (and all-zero elsewhere) pinned as regression
    // constants.
    let expected = [
        [0, 0, 0, 0, 76, 84, 76, 84],
        [0, 0, 0, 0, 84, 76, 84, 76],
        [0, 0, 0, 0, 76, 84, 76, 84],
        [0, 0, 0, 0, 84, 76, 84, 76],
        [76, 84, 76, 84, 0, 0, 0, 0],
        [84, 76, 84, 76, 0, 0, 0, 0],
        [76, 84, 76, 84, 0, 0, 0, 0],
        [84, 76, 84, 76, 0, 0, 0, 0],
    ];
    let matrix = sync_correlation_matrix();
    check!(fails, matrix == expected, "correlation matrix drifted: {matrix:?}");

    let elapsed = started.elapsed().as_secs_f64();
    check!(fails, elapsed < 5.0, "took {elapsed:.3} s, cap 5 s");
    report(2, "sync subfield correlation structure", fails);
}

// ── 3. Doppler zone bound and zero-Doppler cut ──

#[test]
fn acceptance_3_ambiguity_zone_and_cut() {
    let mut fails = Vec::new();

    // 60 GHz carrier, 5 m/s closing speed: the zone bound is exactly 1 kHz.
    let max_doppler = max_doppler_for(60.0e9, 5.0);
    check!(fails, max_doppler == 1000.0, "max doppler {max_doppler} != 1000");

    // The zero-Doppler cross-section of the CE0 auto-ambiguity surface is
    // the autocorrelation (squared, since the map holds |X|²).
    let ce0 = build_ce_sequence(CeVariant::Ce0);
    let fs = ce0.sample_rate_hz();
    let grid = default_doppler_grid(max_doppler);
    let map = ambiguity_map(&ce0, &ce0, 64.0 / fs, &grid).unwrap();
    let xcorr = cross_correlation(&ce0, &ce0).unwrap();
    let row = map.zero_doppler_row();
    check!(fails, row.len() == map.delays_s.len(), "row/delay length mismatch");
    for (&value, &delay) in row.iter().zip(&map.delays_s) {
        let lag = (delay * fs).round() as i64;
        let reference = xcorr[(ce0.len() as i64 - 1 + lag) as usize].powi(2);
        let tol = 1e-9 * reference.abs().max(1e-9);
        check!(
            fails,
            (value - reference).abs() <= tol,
            "cut at delay {delay}: {value} vs autocorrelation {reference}"
        );
    }

    report(3, "doppler zone bound and zero-doppler cut", fails);
}

// ── 4. Quantizer guarantees ──

#[test]
fn acceptance_4_quantizer_guarantees() {
    let started = Instant::now();
    let mut fails = Vec::new();

    // Magnitude bound: 10⁴ fuzzed matrices across schemes, sizes, scales,
    // and bit depths, zero code outside ±max_level.
    let mut r = rng::stream(97, "acceptance-fuzz", 0);
    let mut violations = 0u64;
    for i in 0..10_000u64 {
        let n_b = r.gen_range(2..=16u8);
        let n = r.gen_range(1..=64usize);
        let magnitude = 10.0f64.powf(r.gen_range(-6.0..6.0));
        let values: Vec<Cx> =
            (0..n).map(|_| rng::complex_gauss(&mut r, magnitude * magnitude)).collect();
        let h = CsiMatrix::siso(values, 20.0e6).unwrap();
        let mut cfg = match i % 4 {
            0 => QuantConfig::new(Scheme::Legacy11n, n_b),
            1 => QuantConfig::new(Scheme::SimplifiedLinear, n_b),
            2 => {
                let mut c = QuantConfig::new(Scheme::PowerOfTwo, n_b);
                c.n_p = Some(n_b + 4);
                c
            }
            _ => {
                let mut c = QuantConfig::new(Scheme::Fractional, n_b);
                c.alpha_set = (1..=u32::from(r.gen_range(1..=128u8))).collect();
                c
            }
        };
        cfg.diff_saving = 0;
        let q = quantize_csi(&h, &cfg).unwrap();
        let bound = cfg.max_level() as i32;
        if q.re.iter().chain(&q.im).any(|&c| c.abs() > bound) {
            violations += 1;
        }
    }
    check!(fails, violations == 0, "{violations} fuzzed matrices broke the magnitude bound");

    // Power-of-two scaling: the pure-shift implementation matches a
    // multiply-based reference bit for bit.
    let mut cfg = QuantConfig::new(Scheme::PowerOfTwo, 8);
    cfg.n_p = Some(12);
    let mut r = rng::stream(31, "acceptance-shift", 0);
    let mut mismatches = 0u64;
    for _ in 0..10_000 {
        let value = rng::complex_gauss(&mut r, 1.0);
        let h = CsiMatrix::siso(vec![value], 20.0e6).unwrap();
        let q = quantize_csi(&h, &cfg).unwrap();
        let sense_core::csi::ScaleDescriptor::Pow2Exponent { exponent } = q.scale else {
            fails.push("power-of-two scale descriptor missing".into());
            break;
        };
        let factor = 2.0f64.powi(exponent) * 2.0f64.powi(8 - 12);
        let max_level = cfg.max_level() as f64;
        let reference = (value.re * factor).round().clamp(-max_level, max_level) as i32;
        if q.re[0] != reference {
            mismatches += 1;
        }
    }
    check!(fails, mismatches == 0, "{mismatches} shift/multiply mismatches");

    // Ensemble ordering over 1000 seeded 64-subcarrier matrices.
    let mut errors = std::collections::BTreeMap::new();
    for (name, cfg) in bench_configs() {
        let mut total = 0.0;
        for trial in 0..1000u64 {
            let h = ensemble_matrix(11, trial, 64);
            let recon = sense_core::csi::dequantize_csi(&quantize_csi(&h, &cfg).unwrap()).unwrap();
            total += mean_abs_error(&h, &recon);
        }
        errors.insert(name, total / 1000.0);
    }
    let (legacy, fractional) = (errors["legacy_11n"], errors["fractional"]);
    let (simplified, pow2) = (errors["simplified_linear"], errors["power_of_two"]);
    check!(fails, legacy <= fractional, "legacy {legacy} > fractional {fractional}");
    check!(fails, fractional <= simplified, "fractional {fractional} > simplified {simplified}");
    check!(fails, fractional <= pow2, "fractional {fractional} > power-of-two {pow2}");

    // Enlarging the fractional ratio set never increases the mean error.
    let mut previous = f64::INFINITY;
    for top in [1u32, 2, 8, 32, 256] {
        let mut cfg = QuantConfig::new(Scheme::Fractional, 8);
        cfg.alpha_set = (1..=top).collect();
        let mut total = 0.0;
        for trial in 0..200u64 {
            let h = ensemble_matrix(11, trial, 64);
            let recon = sense_core::csi::dequantize_csi(&quantize_csi(&h, &cfg).unwrap()).unwrap();
            total += mean_abs_error(&h, &recon);
        }
        let mean = total / 200.0;
        check!(fails, mean <= previous, "alpha set 1..={top}: error rose to {mean}");
        previous = mean;
    }

    let elapsed = started.elapsed().as_secs_f64();
    check!(fails, elapsed < 30.0, "took {elapsed:.3} s, cap 30 s");
    report(4, "quantizer guarantees and ensemble ordering", fails);
}

// ── 5. Feedback codec round trips ──

#[test]
fn acceptance_5_codec_round_trips() {
    let started = Instant::now();
    let mut fails = Vec::new();

    // Truncated-CIR feedback is exact (≤ 1e-9 relative) whenever the kept
    // tap count covers the channel's true length.
    let true_taps = [Cx::new(0.8, 0.1), Cx::new(-0.3, 0.4), Cx::new(0.1, -0.2), Cx::new(0.05, 0.02)];
    let n = 64;
    let h = CsiMatrix::siso(cir_to_cfr(&true_taps, n, 1), 20.0e6).unwrap();
    let cir = cfr_to_cir(&h);
    for kept in 4..=8usize {
        let rebuilt = cir_to_cfr(&cir[..kept], n, 1);
        for (a, b) in h.entries.iter().zip(&rebuilt) {
            let err = (a - b).norm();
            let tol = 1e-9 * a.norm().max(1e-9);
            check!(fails, err <= tol, "tcir with {kept} taps: error {err}");
        }
    }

    // Differential feedback: on a smooth frequency response (the scheme's
    // design regime) the per-subcarrier error stays within half a step —
    // the closed-loop encoder never lets it accumulate.
    let h = CsiMatrix::siso(cir_to_cfr(&true_taps, n, 1), 20.0e6).unwrap();
    let cfg = QuantConfig::new(Scheme::SimplifiedLinear, 10);
    let diff = encode_feedback(&h, ReportType::Differential, &cfg, None).unwrap();
    let FeedbackPayload::Differential { scale, saturated, .. } = &diff.payload else {
        unreachable!()
    };
    check!(fails, !saturated, "differential encoder saturated on a tame ensemble matrix");
    let DecodedFeedback::Csi(recon) = decode_feedback(&diff, 64).unwrap() else { unreachable!() };
    let half_step = scale / (((1 << 9) - 1) as f64) / 2.0;
    for (k, (a, b)) in h.entries.iter().zip(&recon.entries).enumerate() {
        let (er, ei) = ((a.re - b.re).abs(), (a.im - b.im).abs());
        let bound = half_step * (1.0 + 1e-12);
        check!(fails, er <= bound && ei <= bound, "subcarrier {k}: error ({er}, {ei}) > {bound}");
    }

    // Every report type survives serialization bit-exactly.
    let h = ensemble_matrix(59, 0, 32);
    let reports = [
        (ReportType::FullCsi, QuantConfig::new(Scheme::SimplifiedLinear, 8), None),
        (ReportType::AmplitudeOnly, QuantConfig::new(Scheme::SimplifiedLinear, 9), None),
        (ReportType::PhaseOnly, QuantConfig::new(Scheme::SimplifiedLinear, 9), None),
        (ReportType::Tcir, QuantConfig::new(Scheme::SimplifiedLinear, 12), Some(8)),
        (ReportType::Differential, QuantConfig::new(Scheme::SimplifiedLinear, 10), None),
    ];
    for (report_type, cfg, taps) in reports {
        let report = encode_feedback(&h, report_type, &cfg, taps).unwrap();
        let back = parse_feedback(&serialize_feedback(&report)).unwrap();
        check!(fails, back == report, "{report_type:?} did not round trip bit-exactly");
    }

    let elapsed = started.elapsed().as_secs_f64();
    check!(fails, elapsed < 10.0, "took {elapsed:.3} s, cap 10 s");
    report(5, "feedback codec round trips", fails);
}

// ── 6. MAC golden traces ──

#[test]
fn acceptance_6_mac_golden_traces() {
    let started = Instant::now();
    let mut fails = Vec::new();

    fn expect_golden(fails: &mut Vec<String>, name: &str, trace: &[sense_core::mac::Event]) {
        let got = trace_jsonl(trace);
        match std::fs::read_to_string(common::fixture_path(name)) {
            Ok(want) if got == want => {}
            Ok(_) => fails.push(format!("trace {name} diverged from its fixture")),
            Err(e) => fails.push(format!("fixture {name} unreadable: {e}")),
        }
    }

    // Five-STA trigger-based exchange: the unresponsive STA 5 is excluded
    // everywhere, both sounding phases run, and exactly the four live
    // responders report.
    let tb = common::tb_five_sta();
    check!(fails, tb.trace.iter().all(|e| e.src != 5 && e.dst != 5), "STA 5 leaked into the trace");
    check!(
        fails,
        tb.phases_executed.contains(&Phase::NdpaSounding)
            && tb.phases_executed.contains(&Phase::TfSounding),
        "both sounding phases must run"
    );
    let sources: Vec<StaId> = tb.reports.iter().map(|r| r.source).collect();
    check!(fails, sources == [2, 3, 4, 6], "reporting set {sources:?} != [2, 3, 4, 6]");
    expect_golden(&mut fails, "tb_five_sta", &tb.trace);

    // Threshold reporting with a responder exactly on its threshold.
    let (first, second) = common::threshold_boundary();
    let first_sources: Vec<StaId> = first.reports.iter().map(|r| r.source).collect();
    let second_sources: Vec<StaId> = second.reports.iter().map(|r| r.source).collect();
    check!(fails, first_sources == [2, 3], "first threshold set {first_sources:?}");
    check!(fails, second_sources == [2], "boundary threshold set {second_sources:?}");
    let mut threshold_trace = first.trace.clone();
    threshold_trace.extend(second.trace.iter().cloned());
    expect_golden(&mut fails, "threshold_boundary", &threshold_trace);

    // Non-TB exchanges: the unmeasured NDP is minimum length per role.
    for (role, name) in
        [(Role::Tx, "non_tb_tx"), (Role::Rx, "non_tb_rx"), (Role::Both, "non_tb_both")]
    {
        let record = common::non_tb(role);
        let min_len = |kind: FrameKind| {
            record
                .trace
                .iter()
                .find(|e| e.frame == kind)
                .map(|e| e.tags.iter().any(|t| t == "minimum-length"))
                .unwrap_or(true)
        };
        check!(
            fails,
            min_len(FrameKind::NdpSi2Sr) == !role.has_tx()
                && min_len(FrameKind::NdpSr2Si) == !role.has_rx(),
            "{name}: minimum-length tagging wrong for {role:?}"
        );
        expect_golden(&mut fails, name, &record.trace);
    }

    // RX-initiated DMG bistatic: no reporting phase at all.
    let bistatic = common::dmg_bistatic_rx();
    check!(
        fails,
        bistatic.iter().all(|r| !r.phases_executed.contains(&Phase::Reporting)),
        "rx-initiated bistatic exchange must not report"
    );
    let bistatic_trace: Vec<_> = bistatic.iter().flat_map(|r| r.trace.iter().cloned()).collect();
    expect_golden(&mut fails, "dmg_bistatic_rx", &bistatic_trace);

    // DMG multistatic: Sync-field count equals the responder count, polled
    // reports arrive in order, and burst timestamps are exact.
    let multi = common::dmg_multistatic();
    for (i, r) in multi.iter().enumerate() {
        let (b, e) = (i / 2, i % 2);
        let start = b as f64 * 10e-3 + e as f64 * 1e-3;
        check!(fails, r.trace[0].t_s == start, "exchange {i} starts at {} != {start}", r.trace[0].t_s);
        let sync_ok = r
            .trace
            .iter()
            .find(|ev| ev.frame == FrameKind::SyncPpdu)
            .is_some_and(|ev| ev.tags.iter().any(|t| t == "sync-fields:3"));
        check!(fails, sync_ok, "exchange {i} PPDU lacks one Sync field per responder");
        let order: Vec<StaId> = r.reports.iter().map(|rep| rep.source).collect();
        check!(fails, order == [2, 3, 4], "exchange {i} polled reports out of order: {order:?}");
    }
    let multi_trace: Vec<_> = multi.iter().flat_map(|r| r.trace.iter().cloned()).collect();
    expect_golden(&mut fails, "dmg_multistatic", &multi_trace);

    // Sensing by proxy: forwarded reports equal the collected reports.
    let sbp = common::sbp_forwarding();
    check!(fails, sbp.accepted, "proxy rejected a capable request");
    check!(
        fails,
        sbp.forwarded == sbp.records[0].reports,
        "forwarded reports differ from the collected reports"
    );
    expect_golden(&mut fails, "sbp_forwarding", &common::sbp_full_trace(&sbp));
    let denied = common::sbp_denied();
    check!(fails, !denied.accepted && denied.forwarded.is_empty(), "denial must forward nothing");
    expect_golden(&mut fails, "sbp_denied", &denied.trace);

    let elapsed = started.elapsed().as_secs_f64();
    check!(fails, elapsed < 10.0, "took {elapsed:.3} s, cap 10 s");
    report(6, "mac golden traces", fails);
}

// ── 7. Detection and estimation accuracy ──

fn eval_plan(kind: EstimateKind, sample_rate_hz: f64) -> EvalPlan {
    EvalPlan {
        n_exchanges: 16,
        intra_interval_s: 0.025,
        n_taps: 64,
        waveform: build_ce_sequence(CeVariant::Ce0).with_sample_rate(sample_rate_hz),
        guard_cells: 1,
        train_cells: 4,
        scale_factor: cfar_scale_for(1e-3, 112),
        kind,
        seed: 5,
    }
}

#[test]
fn acceptance_7_estimation_accuracy() {
    let mut fails = Vec::new();
    let scenario = load_scenario(Preset::LivingRoom);
    let fs = scenario.sample_rate_hz();

    // Noiseless accuracy against the analytic geometry: range error within
    // half a range bin, Doppler error within half a Doppler bin.
    let half_range_bin = sense_core::SPEED_OF_LIGHT / fs / 2.0;
    let curve = evaluate_curve(&scenario, &eval_plan(EstimateKind::Range, fs), &[500.0], 3).unwrap();
    let range_rmse = curve.points[0].rmse.unwrap_or(f64::INFINITY);
    check!(fails, curve.points[0].miss_rate == 0.0, "noiseless range trials missed");
    check!(fails, range_rmse <= half_range_bin, "range rmse {range_rmse} > {half_range_bin}");

    let half_doppler_bin = 1.0 / (16.0 * 0.025) / 2.0;
    let curve =
        evaluate_curve(&scenario, &eval_plan(EstimateKind::Doppler, fs), &[500.0], 3).unwrap();
    let doppler_rmse = curve.points[0].rmse.unwrap_or(f64::INFINITY);
    check!(fails, curve.points[0].miss_rate == 0.0, "noiseless doppler trials missed");
    check!(
        fails,
        doppler_rmse <= half_doppler_bin,
        "doppler rmse {doppler_rmse} > {half_doppler_bin}"
    );

    // CFAR false-alarm rate over 10⁶ noise-only cells: within one decade
    // of the design point.
    let design_pfa = 1e-3;
    let (n_doppler, n_range) = (1000, 1000);
    let mut r = rng::stream(42, "cfar-pfa", 0);
    let magnitudes: Vec<Vec<f64>> = (0..n_doppler)
        .map(|_| (0..n_range).map(|_| rng::complex_gauss(&mut r, 1.0).norm_sqr()).collect())
        .collect();
    let map = RdaMap {
        range_bins_m: (0..n_range).map(|i| i as f64).collect(),
        doppler_bins_hz: (0..n_doppler).map(|i| i as f64 - 500.0).collect(),
        magnitudes,
        carrier_hz: 6.0e9,
        geometry: SensingGeometry::Bistatic,
    };
    let detections = cfar_detect(&map, 1, 4, cfar_scale_for(design_pfa, 112)).unwrap();
    let measured = detections.len() as f64 / (n_doppler * n_range) as f64;
    check!(
        fails,
        measured >= design_pfa / 10.0 && measured <= design_pfa * 10.0,
        "measured pfa {measured} more than a decade from {design_pfa}"
    );

    // Accuracy-vs-SNR sweep: 100 trials per point, RMSE never rises by
    // more than 10% from one SNR point to the next.
    let sweep_started = Instant::now();
    let curve =
        evaluate_curve(&scenario, &eval_plan(EstimateKind::Range, fs), &[0.0, 10.0, 20.0, 30.0], 100)
            .unwrap();
    let sweep_elapsed = sweep_started.elapsed().as_secs_f64();
    check!(fails, sweep_elapsed < 120.0, "sweep took {sweep_elapsed:.1} s, cap 120 s");
    let mut previous = f64::INFINITY;
    for p in &curve.points {
        match p.rmse {
            Some(value) => {
                check!(
                    fails,
                    value <= previous * 1.10,
                    "rmse rose from {previous} to {value} at {} dB",
                    p.snr_db
                );
                previous = value;
            }
            None => fails.push(format!("all trials missed at {} dB", p.snr_db)),
        }
    }

    report(7, "detection and estimation accuracy", fails);
}

// ── 8. Reproducibility ──

#[test]
fn acceptance_8_reproducibility() {
    let mut fails = Vec::new();

    // The sweep subcommand, rerun with an identical seed, produces a
    // byte-identical curve file.
    let scenario =
        format!("{}/scenarios/living_room.json", env!("CARGO_MANIFEST_DIR"));
    let mut curves = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_sense-lab"))
            .args([
                "sweep",
                "--scenario",
                &scenario,
                "--out",
                dir.path().to_str().unwrap(),
                "--snr",
                "0,10,20,30",
                "--trials",
                "100",
                "--seed",
                "7",
            ])
            .env_remove("SENSE_LAB_SEED")
            .output()
            .unwrap();
        if !out.status.success() {
            fails.push(format!("sweep failed: {}", String::from_utf8_lossy(&out.stderr)));
            break;
        }
        curves.push(std::fs::read(dir.path().join("curve.csv")).unwrap());
    }
    check!(fails, curves.len() == 2 && curves[0] == curves[1], "sweep reruns differ");

    // Shuffling the trial order leaves record-level aggregates unchanged.
    let mut r = rng::stream(19, "acceptance-shuffle", 0);
    let mut records: Vec<EstimationRecord> = (0..500)
        .map(|_| {
            let truth = 5.0 + rng::gauss(&mut r);
            EstimationRecord {
                kind: EstimateKind::Range,
                estimate: truth + 0.3 * rng::gauss(&mut r),
                truth,
            }
        })
        .collect();
    let baseline = rmse(&records).unwrap();
    for _ in 0..5 {
        records.shuffle(&mut r);
        let shuffled = rmse(&records).unwrap();
        assert_relative_eq!(shuffled, baseline, max_relative = 1e-12);
    }

    report(8, "reproducibility of sweeps and aggregates", fails);
}
