//! Parameter estimation and accuracy evaluation.
//!
//! [`build_rda_map`] turns a burst of received exchanges into a
//! range-Doppler power map: a matched filter against the sounding waveform
//! gives per-exchange fast-time range profiles, and a discrete Fourier
//! transform across exchanges (slow time) resolves Doppler.
//! [`cfar_detect`] applies cell-averaging CFAR, [`rmse`] evaluates
//! estimate collections, and [`evaluate_curve`] / [`evaluate_histogram`]
//! drive the full scenario → channel → sounding → map → detection →
//! metric pipeline at a list of SNRs.
//!
//! Parameter extraction is peak-based (argmax of detected cells, no
//! sub-bin interpolation); stated tolerances are therefore in bins.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::channel::{
    apply_channel, clutter_step, realize_channel, trace_rays, ClutterModel, Ray, RayOrigin,
    Scenario,
};
use crate::rng;
use crate::seq::ComplexSequence;
use crate::{Cx, SPEED_OF_LIGHT};

// ─── Errors ───────────────────────────────────────────────────────────────

/// Estimation and evaluation failures.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimationError {
    /// An operation needs at least one element.
    Empty(String),
    /// Inconsistent dimensions or parameters.
    Config(String),
}

impl fmt::Display for EstimationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty(what) => write!(f, "{what} must not be empty"),
            Self::Config(why) => write!(f, "invalid estimation configuration: {why}"),
        }
    }
}

// ─── Range-Doppler maps ───────────────────────────────────────────────────

/// Sensing geometry, which sets the range scaling of a delay bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingGeometry {
    /// TX and RX co-located: a delay covers the path twice.
    Monostatic,
    /// Separate TX and RX: range means the total path length.
    Bistatic,
}

/// Complex range-Doppler map (pre-magnitude), `cells[doppler][range]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexRdaMap {
    pub range_bins_m: Vec<f64>,
    pub doppler_bins_hz: Vec<f64>,
    pub cells: Vec<Vec<Cx>>,
    pub carrier_hz: f64,
    pub geometry: SensingGeometry,
}

impl ComplexRdaMap {
    /// Squared-magnitude (power) map.
    pub fn power_map(&self) -> RdaMap {
        RdaMap {
            range_bins_m: self.range_bins_m.clone(),
            doppler_bins_hz: self.doppler_bins_hz.clone(),
            magnitudes: self
                .cells
                .iter()
                .map(|row| row.iter().map(|c| c.norm_sqr()).collect())
                .collect(),
            carrier_hz: self.carrier_hz,
            geometry: self.geometry,
        }
    }
}

/// Range-Doppler power map, `magnitudes[doppler][range]`, all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct RdaMap {
    pub range_bins_m: Vec<f64>,
    pub doppler_bins_hz: Vec<f64>,
    pub magnitudes: Vec<Vec<f64>>,
    pub carrier_hz: f64,
    pub geometry: SensingGeometry,
}

impl RdaMap {
    /// Index of the 0 Hz Doppler row.
    pub fn zero_doppler_index(&self) -> usize {
        self.doppler_bins_hz.iter().position(|&f| f == 0.0).expect("grid contains 0")
    }
}

/// Builds the complex range-Doppler map of a burst: matched filter per
/// exchange, then a slow-time DFT per range bin. The Doppler axis has one
/// bin per exchange, spaced `1/(n_exchanges · intra_interval)`, centered
/// on 0 Hz; a single exchange yields the DC bin alone. The range axis has
/// one bin per full-overlap correlation lag.
pub fn build_complex_rda_map(
    burst: &[ComplexSequence],
    reference: &ComplexSequence,
    intra_interval_s: f64,
    carrier_hz: f64,
    geometry: SensingGeometry,
) -> Result<ComplexRdaMap, EstimationError> {
    if burst.is_empty() {
        return Err(EstimationError::Empty("exchange burst".into()));
    }
    if intra_interval_s <= 0.0 || intra_interval_s.is_nan() {
        return Err(EstimationError::Config("intra interval must be positive".into()));
    }
    let n = reference.len();
    for (k, y) in burst.iter().enumerate() {
        if y.len() != burst[0].len() {
            return Err(EstimationError::Config(format!(
                "exchange {k} has {} samples, exchange 0 has {}",
                y.len(),
                burst[0].len()
            )));
        }
        if y.sample_rate_hz() != reference.sample_rate_hz() {
            return Err(EstimationError::Config("burst and reference sample rates differ".into()));
        }
    }
    if burst[0].len() < n {
        return Err(EstimationError::Config("exchanges are shorter than the reference".into()));
    }

    let fs = reference.sample_rate_hz();
    let n_ranges = burst[0].len() - n + 1;
    let k_ex = burst.len();

    // Fast time: matched filter at every full-overlap lag.
    let mut profiles = Vec::with_capacity(k_ex);
    for y in burst {
        let ys = y.samples();
        let rs = reference.samples();
        let mut profile = Vec::with_capacity(n_ranges);
        for lag in 0..n_ranges {
            let mut acc = Cx::new(0.0, 0.0);
            for (i, r) in rs.iter().enumerate() {
                acc += ys[lag + i] * r.conj();
            }
            profile.push(acc);
        }
        profiles.push(profile);
    }

    // Slow time: DFT across exchanges, one centered bin per exchange.
    let doppler_step = 1.0 / (k_ex as f64 * intra_interval_s);
    let offset = (k_ex / 2) as i64;
    let doppler_bins_hz: Vec<f64> =
        (0..k_ex).map(|m| (m as i64 - offset) as f64 * doppler_step).collect();
    let mut cells = vec![vec![Cx::new(0.0, 0.0); n_ranges]; k_ex];
    for (m, row) in cells.iter_mut().enumerate() {
        let f_m = doppler_bins_hz[m];
        for (r, cell) in row.iter_mut().enumerate() {
            let mut acc = Cx::new(0.0, 0.0);
            for (k, profile) in profiles.iter().enumerate() {
                let theta = -2.0 * core::f64::consts::PI * f_m * k as f64 * intra_interval_s;
                acc += profile[r] * Cx::new(Float::cos(theta), Float::sin(theta));
            }
            *cell = acc;
        }
    }

    let range_step = match geometry {
        SensingGeometry::Monostatic => SPEED_OF_LIGHT / (2.0 * fs),
        SensingGeometry::Bistatic => SPEED_OF_LIGHT / fs,
    };
    let range_bins_m: Vec<f64> = (0..n_ranges).map(|r| r as f64 * range_step).collect();
    Ok(ComplexRdaMap { range_bins_m, doppler_bins_hz, cells, carrier_hz, geometry })
}

/// [`build_complex_rda_map`] followed by squared magnitude.
pub fn build_rda_map(
    burst: &[ComplexSequence],
    reference: &ComplexSequence,
    intra_interval_s: f64,
    carrier_hz: f64,
    geometry: SensingGeometry,
) -> Result<RdaMap, EstimationError> {
    Ok(build_complex_rda_map(burst, reference, intra_interval_s, carrier_hz, geometry)?.power_map())
}

// ─── CFAR ─────────────────────────────────────────────────────────────────

/// One detected cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub range_m: f64,
    pub doppler_hz: f64,
    /// Radial speed from Doppler; monostatic `f_d · c / (2 f_c)`, bistatic
    /// range-rate `f_d · c / f_c`. This is the single conversion point.
    pub velocity_mps: f64,
    /// Cell power.
    pub magnitude: f64,
    /// `10·log10(cell / training mean)`; infinite over a silent ring.
    pub snr_estimate_db: f64,
}

/// CA-CFAR scale factor for a design false-alarm probability over
/// `n_train` training cells: `n·(pfa^(−1/n) − 1)`.
pub fn cfar_scale_for(pfa: f64, n_train: usize) -> f64 {
    let n = n_train as f64;
    n * (Float::powf(pfa, -1.0 / n) - 1.0)
}

/// Cell-averaging CFAR over the power map: a cell is detected iff its
/// power exceeds `scale_factor ×` the mean of its training ring (a square
/// annulus `guard_cells < Chebyshev distance ≤ guard_cells + train_cells`,
/// clipped at the map border). Both map dimensions must fit the window.
pub fn cfar_detect(
    map: &RdaMap,
    guard_cells: usize,
    train_cells: usize,
    scale_factor: f64,
) -> Result<Vec<Detection>, EstimationError> {
    if train_cells == 0 {
        return Err(EstimationError::Config("CFAR needs at least one training cell".into()));
    }
    let w = guard_cells + train_cells;
    let n_d = map.doppler_bins_hz.len();
    let n_r = map.range_bins_m.len();
    if n_d < 2 * w + 1 || n_r < 2 * w + 1 {
        return Err(EstimationError::Config(format!(
            "{n_d}×{n_r} map is smaller than the {}×{} CFAR window",
            2 * w + 1,
            2 * w + 1
        )));
    }
    let mut detections = Vec::new();
    for d in 0..n_d {
        for r in 0..n_r {
            let mut sum = 0.0;
            let mut count = 0usize;
            let d_lo = d.saturating_sub(w);
            let d_hi = (d + w).min(n_d - 1);
            let r_lo = r.saturating_sub(w);
            let r_hi = (r + w).min(n_r - 1);
            for dd in d_lo..=d_hi {
                for rr in r_lo..=r_hi {
                    let dist = (dd as i64 - d as i64).abs().max((rr as i64 - r as i64).abs());
                    if dist > guard_cells as i64 {
                        sum += map.magnitudes[dd][rr];
                        count += 1;
                    }
                }
            }
            let mean = sum / count as f64;
            let cell = map.magnitudes[d][r];
            if cell > scale_factor * mean {
                let doppler = map.doppler_bins_hz[d];
                let factor = match map.geometry {
                    SensingGeometry::Monostatic => SPEED_OF_LIGHT / (2.0 * map.carrier_hz),
                    SensingGeometry::Bistatic => SPEED_OF_LIGHT / map.carrier_hz,
                };
                detections.push(Detection {
                    range_m: map.range_bins_m[r],
                    doppler_hz: doppler,
                    velocity_mps: doppler * factor,
                    magnitude: cell,
                    snr_estimate_db: if mean > 0.0 {
                        10.0 * Float::log10(cell / mean)
                    } else {
                        f64::INFINITY
                    },
                });
            }
        }
    }
    Ok(detections)
}

// ─── RMSE ─────────────────────────────────────────────────────────────────

/// What an estimate measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    Range,
    Velocity,
    Doppler,
}

/// One (estimate, truth) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationRecord {
    pub kind: EstimateKind,
    pub estimate: f64,
    pub truth: f64,
}

/// Root-mean-square error over a nonempty record collection.
pub fn rmse(records: &[EstimationRecord]) -> Result<f64, EstimationError> {
    if records.is_empty() {
        return Err(EstimationError::Empty("estimation record collection".into()));
    }
    let sum_sq: f64 = records.iter().map(|r| (r.estimate - r.truth) * (r.estimate - r.truth)).sum();
    Ok(Float::sqrt(sum_sq / records.len() as f64))
}

// ─── Evaluation pipeline ──────────────────────────────────────────────────

/// Burst and detector configuration for scenario evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPlan {
    /// Exchanges per burst (slow-time DFT length).
    pub n_exchanges: usize,
    /// Slow-time spacing between exchanges (s).
    pub intra_interval_s: f64,
    /// CIR tap window.
    pub n_taps: usize,
    /// Sounding waveform at the scenario sample rate.
    pub waveform: ComplexSequence,
    pub guard_cells: usize,
    pub train_cells: usize,
    pub scale_factor: f64,
    /// Which parameter's accuracy is evaluated.
    pub kind: EstimateKind,
    /// Base seed for noise/clutter streams.
    pub seed: u64,
}

impl EvalPlan {
    fn validate(&self) -> Result<(), EstimationError> {
        let w = 2 * (self.guard_cells + self.train_cells) + 1;
        if self.n_exchanges < w || self.n_taps < w {
            return Err(EstimationError::Config(format!(
                "{}×{} burst grid is smaller than the {w}×{w} CFAR window",
                self.n_exchanges, self.n_taps
            )));
        }
        if self.intra_interval_s <= 0.0 || self.intra_interval_s.is_nan() {
            return Err(EstimationError::Config("intra interval must be positive".into()));
        }
        Ok(())
    }
}

/// One accuracy-vs-SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    /// RMSE over detected trials; `None` when every trial missed.
    pub rmse: Option<f64>,
    /// Fraction of trials with no usable detection.
    pub miss_rate: f64,
    pub trials: usize,
}

/// Accuracy-vs-SNR curve; SNR points strictly increase.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCurve {
    pub kind: EstimateKind,
    pub points: Vec<CurvePoint>,
}

/// Histogram of per-sample accuracy (estimate − truth).
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyHistogram {
    pub kind: EstimateKind,
    /// `n_bins + 1` ascending edges.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Samples with no usable detection, excluded from the bins.
    pub misses: u64,
    /// Total samples attempted (counts sum to `samples − misses`).
    pub samples: u64,
}

/// One full burst at scenario time `t`: realize, sound, map, detect, and
/// extract the peak non-DC detection. Returns `(estimate, truth)` per the
/// plan's kind, or `None` on a miss.
fn run_trial(
    scenario: &Scenario,
    plan: &EvalPlan,
    t: f64,
    snr_db: f64,
    noise: &mut rand_chacha::ChaCha8Rng,
    clutter: &mut Option<ClutterModel>,
) -> Result<Option<(f64, f64)>, EstimationError> {
    let fs = scenario.sample_rate_hz();
    let rays = trace_rays(scenario, t);
    let target = rays
        .iter()
        .find(|r| r.origin == RayOrigin::Target)
        .expect("trace_rays always emits the target ray")
        .clone();

    let mut burst = Vec::with_capacity(plan.n_exchanges);
    for k in 0..plan.n_exchanges {
        let mut all_rays: Vec<Ray> = rays.clone();
        if let Some(model) = clutter {
            clutter_step(model, noise);
            all_rays.extend(model.rays(fs));
        }
        let c = realize_channel(
            &all_rays,
            fs,
            plan.n_taps,
            scenario.carrier_hz,
            k as f64 * plan.intra_interval_s,
        )
        .map_err(|e| EstimationError::Config(e.to_string()))?;
        burst.push(apply_channel(&plan.waveform, &c, snr_db, noise));
    }

    let geometry = if scenario.is_monostatic() {
        SensingGeometry::Monostatic
    } else {
        SensingGeometry::Bistatic
    };
    let map = build_rda_map(&burst, &plan.waveform, plan.intra_interval_s, scenario.carrier_hz, geometry)?;
    let detections = cfar_detect(&map, plan.guard_cells, plan.train_cells, plan.scale_factor)?;

    // Static returns (walls, LoS, clutter) concentrate at 0 Hz; the moving
    // target is read off the strongest detection away from DC.
    let best = detections
        .iter()
        .filter(|d| d.doppler_hz != 0.0)
        .max_by(|a, b| a.magnitude.partial_cmp(&b.magnitude).expect("finite"));
    let Some(best) = best else { return Ok(None) };

    let (estimate, truth) = match plan.kind {
        EstimateKind::Range => {
            let truth = match geometry {
                SensingGeometry::Monostatic => target.delay_s * SPEED_OF_LIGHT / 2.0,
                SensingGeometry::Bistatic => target.delay_s * SPEED_OF_LIGHT,
            };
            (best.range_m, truth)
        }
        EstimateKind::Doppler => (best.doppler_hz, target.doppler_hz),
        EstimateKind::Velocity => {
            let factor = match geometry {
                SensingGeometry::Monostatic => SPEED_OF_LIGHT / (2.0 * scenario.carrier_hz),
                SensingGeometry::Bistatic => SPEED_OF_LIGHT / scenario.carrier_hz,
            };
            (best.velocity_mps, target.doppler_hz * factor)
        }
    };
    Ok(Some((estimate, truth)))
}

/// Accuracy-vs-SNR curve: `trials` independent bursts per SNR point, each
/// with its own seeded noise/clutter stream, all observing the target at
/// the quarter point of its trajectory span. The quarter point is
/// interior (waypoint endpoints clamp to zero velocity) and avoids the
/// bistatic Doppler null that symmetric desk layouts place at the exact
/// path midpoint. Misses are excluded from the RMSE and reported in the
/// companion miss-rate series.
pub fn evaluate_curve(
    scenario: &Scenario,
    plan: &EvalPlan,
    snr_list_db: &[f64],
    trials: usize,
) -> Result<AccuracyCurve, EstimationError> {
    plan.validate()?;
    if trials == 0 {
        return Err(EstimationError::Config("trials must be ≥ 1".into()));
    }
    if snr_list_db.is_empty() {
        return Err(EstimationError::Empty("SNR list".into()));
    }
    if snr_list_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EstimationError::Config("SNR points must strictly increase".into()));
    }
    scenario.validate().map_err(|e| EstimationError::Config(e.to_string()))?;

    let span_start = scenario.target.waypoints.first().expect("validated").t_s;
    let span_end = scenario.target.waypoints.last().expect("validated").t_s;
    let t_eval = span_start + 0.25 * (span_end - span_start);

    let mut points = Vec::with_capacity(snr_list_db.len());
    for (s_idx, &snr_db) in snr_list_db.iter().enumerate() {
        let mut records = Vec::new();
        let mut misses = 0usize;
        for trial in 0..trials {
            let stream_id = (s_idx * trials + trial) as u64;
            let mut noise = rng::stream(plan.seed ^ scenario.seed, "evaluate-trial", stream_id);
            let mut clutter = match scenario.clutter {
                Some(params) => Some(
                    ClutterModel::new(params, plan.n_taps)
                        .map_err(|e| EstimationError::Config(e.to_string()))?,
                ),
                None => None,
            };
            match run_trial(scenario, plan, t_eval, snr_db, &mut noise, &mut clutter)? {
                Some((estimate, truth)) => {
                    records.push(EstimationRecord { kind: plan.kind, estimate, truth })
                }
                None => misses += 1,
            }
        }
        points.push(CurvePoint {
            snr_db,
            rmse: if records.is_empty() { None } else { Some(rmse(&records)?) },
            miss_rate: misses as f64 / trials as f64,
            trials,
        });
    }
    Ok(AccuracyCurve { kind: plan.kind, points })
}

/// Accuracy histogram: each trial walks the target trajectory at
/// `n_samples` subinterval midpoints (endpoints clamp to zero velocity),
/// one burst per sample; per-sample errors (estimate − truth) fill
/// `n_bins` uniform bins. Misses are counted, not binned.
pub fn evaluate_histogram(
    scenario: &Scenario,
    plan: &EvalPlan,
    snr_db: f64,
    trials: usize,
    n_samples: usize,
    n_bins: usize,
) -> Result<AccuracyHistogram, EstimationError> {
    plan.validate()?;
    if trials == 0 || n_samples == 0 {
        return Err(EstimationError::Config("trials and samples must be ≥ 1".into()));
    }
    if n_bins == 0 {
        return Err(EstimationError::Config("histogram needs at least one bin".into()));
    }
    scenario.validate().map_err(|e| EstimationError::Config(e.to_string()))?;

    let span_start = scenario.target.waypoints.first().expect("validated").t_s;
    let span_end = scenario.target.waypoints.last().expect("validated").t_s;
    let step = (span_end - span_start) / n_samples as f64;

    let mut errors = Vec::new();
    let mut misses = 0u64;
    for trial in 0..trials {
        for sample in 0..n_samples {
            let stream_id = (trial * n_samples + sample) as u64;
            let mut noise = rng::stream(plan.seed ^ scenario.seed, "histogram-sample", stream_id);
            let mut clutter = match scenario.clutter {
                Some(params) => Some(
                    ClutterModel::new(params, plan.n_taps)
                        .map_err(|e| EstimationError::Config(e.to_string()))?,
                ),
                None => None,
            };
            let t = span_start + (sample as f64 + 0.5) * step;
            match run_trial(scenario, plan, t, snr_db, &mut noise, &mut clutter)? {
                Some((estimate, truth)) => errors.push(estimate - truth),
                None => misses += 1,
            }
        }
    }

    let samples = (trials * n_samples) as u64;
    let (lo, hi) = errors.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
        (lo.min(e), hi.max(e))
    });
    let (lo, hi) = if errors.is_empty() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    };
    let width = (hi - lo) / n_bins as f64;
    let bin_edges: Vec<f64> = (0..=n_bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0u64; n_bins];
    for &e in &errors {
        let idx = (((e - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    Ok(AccuracyHistogram { kind: plan.kind, bin_edges, counts, misses, samples })
}

// ─── Tests ────────────────────────────────────────────────────────────────
