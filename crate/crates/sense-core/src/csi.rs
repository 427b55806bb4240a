//! CSI feedback quantization, compression, and serialization.
//!
//! Covers the four scaling/quantization schemes (per-subcarrier legacy dB
//! scaling, simplified global linear scaling, power-of-two scaling, and
//! fractional α/β scaling), the five feedback report types (full CSI,
//! amplitude-only, phase-only, truncated CIR, and frequency-domain
//! differential), a normalized-correlation CSI-variation metric, and a
//! bit-exact binary report format.
//!
//! Scale-factor conventions, pinned by an exhaustive-search oracle:
//! - The legacy dB grid spans 0 to −21 dB below the matrix's largest I/Q
//!   component in 3 dB steps, quantized upward (ceiling) so the recorded
//!   scale always dominates the subcarrier and clipping cannot occur.
//! - The power-of-two factor α_H is the power of two satisfying
//!   `2^(n_p−2) ≤ α_H·m ≤ 2^(n_p−1)−1` for the largest component `m`; when
//!   the window contains no power of two, the largest power of two under
//!   the upper bound is used.
//! - The fractional (α, β) pair is chosen per subcarrier to maximize α/β
//!   subject to `α/β ≤ (2^(n_b−1)−1) / M_H(k)` with `M_H(k)` the legacy
//!   grid value, so a wide α set approaches the legacy quantizer from
//!   below, never beats it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::Cx;

/// dB step of the legacy per-subcarrier scale grid.
pub const LEGACY_DB_STEP: f64 = 3.0;
/// Number of UInt3 codes on the legacy dB grid (0 … −21 dB).
pub const LEGACY_DB_CODES: u8 = 8;
/// Default bit saving of the differential scheme's delta values.
pub const DEFAULT_DIFF_SAVING: u8 = 2;

// ─── Errors ───────────────────────────────────────────────────────────────

/// Failures across quantization, feedback coding, and parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CsiError {
    /// Input matrix has no nonzero component, so no scale exists.
    DegenerateInput,
    /// A `QuantConfig` invariant does not hold.
    Config(String),
    /// Matrix dimensions disagree with each other or a peer matrix.
    Dimension(String),
    /// Requested CIR tap count outside 1..=n_subcarriers.
    TapCountOutOfRange { tap_count: usize, n_subcarriers: usize },
    /// Malformed serialized report or payload/type mismatch.
    Format(String),
}

impl fmt::Display for CsiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DegenerateInput => write!(f, "all-zero CSI matrix has no quantization scale"),
            Self::Config(why) => write!(f, "invalid quantizer configuration: {why}"),
            Self::Dimension(why) => write!(f, "dimension mismatch: {why}"),
            Self::TapCountOutOfRange { tap_count, n_subcarriers } => {
                write!(f, "tap count {tap_count} outside 1..={n_subcarriers}")
            }
            Self::Format(why) => write!(f, "malformed feedback report: {why}"),
        }
    }
}

// ─── Domain types ─────────────────────────────────────────────────────────

/// Channel-frequency-response matrix: complex entries indexed
/// `(subcarrier, rx antenna, tx antenna)`, flattened subcarrier-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiMatrix {
    pub entries: Vec<Cx>,
    pub n_subcarriers: usize,
    pub n_rx: usize,
    pub n_tx: usize,
    pub bandwidth_hz: f64,
}

impl CsiMatrix {
    /// Validates dimensions and finiteness.
    pub fn new(
        entries: Vec<Cx>,
        n_subcarriers: usize,
        n_rx: usize,
        n_tx: usize,
        bandwidth_hz: f64,
    ) -> Result<Self, CsiError> {
        if n_subcarriers == 0 || n_rx == 0 || n_tx == 0 {
            return Err(CsiError::Dimension("all dimensions must be ≥ 1".into()));
        }
        if entries.len() != n_subcarriers * n_rx * n_tx {
            return Err(CsiError::Dimension(format!(
                "{} entries for {}×{}×{} layout",
                entries.len(),
                n_subcarriers,
                n_rx,
                n_tx
            )));
        }
        if entries.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(CsiError::Dimension("entries must be finite".into()));
        }
        Ok(Self { entries, n_subcarriers, n_rx, n_tx, bandwidth_hz })
    }

    /// Single-stream (SISO) constructor from per-subcarrier values.
    pub fn siso(values: Vec<Cx>, bandwidth_hz: f64) -> Result<Self, CsiError> {
        let n = values.len();
        Self::new(values, n, 1, 1, bandwidth_hz)
    }

    /// Entry at `(subcarrier, rx, tx)`.
    pub fn at(&self, k: usize, rx: usize, tx: usize) -> Cx {
        self.entries[(k * self.n_rx + rx) * self.n_tx + tx]
    }

    /// Streams per subcarrier.
    pub fn streams(&self) -> usize {
        self.n_rx * self.n_tx
    }

    /// `m_H(k)`: the largest |I| or |Q| component among subcarrier `k`'s
    /// entries.
    pub fn component_max(&self, k: usize) -> f64 {
        let s = self.streams();
        self.entries[k * s..(k + 1) * s]
            .iter()
            .fold(0.0f64, |m, e| m.max(e.re.abs()).max(e.im.abs()))
    }

    /// The largest |I| or |Q| component over the whole matrix.
    pub fn global_component_max(&self) -> f64 {
        (0..self.n_subcarriers).fold(0.0f64, |m, k| m.max(self.component_max(k)))
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.n_subcarriers == other.n_subcarriers
            && self.n_rx == other.n_rx
            && self.n_tx == other.n_tx
    }
}

/// Scaling/quantization scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Legacy11n,
    SimplifiedLinear,
    PowerOfTwo,
    Fractional,
}

/// Quantizer configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantConfig {
    pub scheme: Scheme,
    /// Bits of each quantized I/Q integer (2..=16, sign included).
    pub n_b: u8,
    /// Bits of the original data; power-of-two scheme only, must exceed n_b.
    pub n_p: Option<u8>,
    /// Candidate numerators for the fractional scheme.
    pub alpha_set: Vec<u32>,
    /// Bits removed from delta values in differential feedback.
    pub diff_saving: u8,
}

impl QuantConfig {
    /// A configuration for one scheme with defaults elsewhere.
    pub fn new(scheme: Scheme, n_b: u8) -> Self {
        Self {
            scheme,
            n_b,
            n_p: None,
            alpha_set: Vec::new(),
            diff_saving: DEFAULT_DIFF_SAVING,
        }
    }

    /// Largest representable integer magnitude: `2^(n_b−1) − 1`.
    pub fn max_level(&self) -> i64 {
        (1i64 << (self.n_b - 1)) - 1
    }

    fn validate(&self) -> Result<(), CsiError> {
        if !(2..=16).contains(&self.n_b) {
            return Err(CsiError::Config(format!("n_b = {} outside 2..=16", self.n_b)));
        }
        match self.scheme {
            Scheme::PowerOfTwo => match self.n_p {
                Some(n_p) if n_p > self.n_b => {}
                Some(n_p) => {
                    return Err(CsiError::Config(format!(
                        "n_p = {n_p} must exceed n_b = {}",
                        self.n_b
                    )))
                }
                None => return Err(CsiError::Config("power_of_two requires n_p".into())),
            },
            Scheme::Fractional => {
                if self.alpha_set.is_empty() {
                    return Err(CsiError::Config("fractional requires a nonempty alpha set".into()));
                }
                if self.alpha_set.contains(&0) {
                    return Err(CsiError::Config("alpha values must be positive".into()));
                }
            }
            _ => {}
        }
        if self.diff_saving + 2 > self.n_b {
            return Err(CsiError::Config(format!(
                "diff_saving = {} leaves fewer than 2 delta bits",
                self.diff_saving
            )));
        }
        Ok(())
    }
}

/// Recorded scale information, sufficient to dequantize with no side data.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleDescriptor {
    /// Legacy: per-subcarrier 3-bit dB codes below `reference`.
    DbCodes { reference: f64, codes: Vec<u8> },
    /// Simplified: one global linear maximum.
    LinearMax { max: f64 },
    /// Power-of-two: `α_H = 2^exponent`.
    Pow2Exponent { exponent: i32 },
    /// Fractional: per-subcarrier `(α, β = 2^beta_exp)` pairs.
    Ratios { alphas: Vec<u32>, beta_exps: Vec<i32> },
}

/// Quantized CSI: integer I/Q arrays plus the scale that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedCsi {
    pub scheme: Scheme,
    pub n_b: u8,
    pub n_p: Option<u8>,
    pub scale: ScaleDescriptor,
    /// Real parts, same index layout as [`CsiMatrix::entries`].
    pub re: Vec<i32>,
    /// Imaginary parts, same layout.
    pub im: Vec<i32>,
    pub n_subcarriers: usize,
    pub n_rx: usize,
    pub n_tx: usize,
    pub bandwidth_hz: f64,
}

/// Feedback report flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportType {
    FullCsi,
    AmplitudeOnly,
    PhaseOnly,
    Tcir,
    Differential,
}

/// Typed report payload.
#[derive(Debug, Clone, PartialEq)]
pub enum FeedbackPayload {
    /// Quantized full CSI.
    FullCsi(QuantizedCsi),
    /// Uniform amplitude codes over `[0, max]`.
    Amplitude { max: f64, codes: Vec<i32>, n_b: u8, n_subcarriers: usize, n_rx: usize, n_tx: usize },
    /// Uniform phase codes over `(−π, π]`.
    Phase { codes: Vec<i32>, n_b: u8, n_subcarriers: usize, n_rx: usize, n_tx: usize },
    /// Quantized first-`L` CIR taps; `n_subcarriers` is the source CFR size.
    Tcir { taps: QuantizedCsi, n_subcarriers: usize },
    /// Absolute subcarrier 0 plus closed-loop deltas at reduced range.
    Differential {
        scale: f64,
        /// Flat layout `(k, rx, tx)`: k = 0 holds absolutes, k ≥ 1 deltas.
        re: Vec<i32>,
        im: Vec<i32>,
        n_b: u8,
        diff_saving: u8,
        saturated: bool,
        n_subcarriers: usize,
        n_rx: usize,
        n_tx: usize,
        bandwidth_hz: f64,
    },
}

/// A feedback report: type tag plus payload.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackReport {
    pub report_type: ReportType,
    pub payload: FeedbackPayload,
}

/// What a report decodes to.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodedFeedback {
    /// Reconstructed complex CFR (full CSI, TCIR, differential).
    Csi(CsiMatrix),
    /// Reconstructed |H| values, flat `(k, rx, tx)` layout.
    Amplitudes(Vec<f64>),
    /// Reconstructed arg H values, same layout.
    Phases(Vec<f64>),
}

// ─── Scale selection ──────────────────────────────────────────────────────

/// Exact multiplication by 2^e.
fn ldexp(x: f64, e: i32) -> f64 {
    x * pow2(e)
}

/// 2^e as an exact f64 (|e| within the normal exponent range).
fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((1023 + e) as u64) << 52)
}

/// Legacy grid value for code `c`: `reference · 10^(−3c/20)`.
fn db_grid_value(reference: f64, code: u8) -> f64 {
    reference * Float::powf(10.0, -(LEGACY_DB_STEP * f64::from(code)) / 20.0)
}

/// Smallest legacy grid value ≥ `m`, as a code (larger codes are smaller
/// values; falls back to the grid maximum for any `m` above it).
fn db_code_for(reference: f64, m: f64) -> u8 {
    for code in (0..LEGACY_DB_CODES).rev() {
        if db_grid_value(reference, code) >= m {
            return code;
        }
    }
    0
}

/// Power-of-two exponent `e` with `2^(n_p−2) ≤ 2^e·m ≤ 2^(n_p−1)−1`,
/// falling back to the largest `e` under the upper bound when the window
/// holds no power of two.
fn pow2_exponent(m: f64, n_p: u8) -> i32 {
    let upper = pow2(i32::from(n_p) - 1) - 1.0;
    let mut e = 0i32;
    while ldexp(m, e + 1) <= upper {
        e += 1;
    }
    while ldexp(m, e) > upper {
        e -= 1;
    }
    // When [2^(n_p−2), 2^(n_p−1)−1] holds no power-of-two multiple of m,
    // this is the largest admissible exponent: maximal resolution without
    // overflow.
    debug_assert!(ldexp(m, e) <= upper);
    e
}

/// Best fractional pair: maximize `α/β ≤ limit` with `β = 2^j`. Returns
/// `(alpha, beta_exp)`; ties keep the smallest α.
fn best_ratio(alpha_set: &[u32], limit: f64) -> (u32, i32) {
    let mut best: Option<(u32, i32, f64)> = None;
    for &alpha in alpha_set {
        let a = f64::from(alpha);
        // Smallest j with α/2^j ≤ limit.
        let mut j = 0i32;
        while ldexp(a, -j) > limit {
            j += 1;
        }
        while j > -900 && ldexp(a, -(j - 1)) <= limit {
            j -= 1;
        }
        let ratio = ldexp(a, -j);
        let better = match best {
            None => true,
            Some((_, _, r)) => ratio > r,
        };
        if better {
            best = Some((alpha, j, ratio));
        }
    }
    let (alpha, j, _) = best.expect("alpha set validated nonempty");
    (alpha, j)
}

// ─── Quantization ─────────────────────────────────────────────────────────

fn round_clamp(x: f64, max_level: i64) -> i32 {
    let r = Float::round(x);
    let r = r.max(-(max_level as f64)).min(max_level as f64);
    r as i32
}

/// Quantizes a CSI matrix under the configured scheme. The returned
/// descriptor carries everything [`dequantize_csi`] needs.
pub fn quantize_csi(h: &CsiMatrix, cfg: &QuantConfig) -> Result<QuantizedCsi, CsiError> {
    cfg.validate()?;
    let reference = h.global_component_max();
    if reference == 0.0 {
        return Err(CsiError::DegenerateInput);
    }
    let max_level = cfg.max_level();
    let streams = h.streams();
    let mut re = Vec::with_capacity(h.entries.len());
    let mut im = Vec::with_capacity(h.entries.len());

    let scale = match cfg.scheme {
        Scheme::Legacy11n => {
            let codes: Vec<u8> = (0..h.n_subcarriers)
                .map(|k| db_code_for(reference, h.component_max(k)))
                .collect();
            for (k, &code) in codes.iter().enumerate() {
                let step = db_grid_value(reference, code) / max_level as f64;
                for e in &h.entries[k * streams..(k + 1) * streams] {
                    re.push(round_clamp(e.re / step, max_level));
                    im.push(round_clamp(e.im / step, max_level));
                }
            }
            ScaleDescriptor::DbCodes { reference, codes }
        }
        Scheme::SimplifiedLinear => {
            let step = reference / max_level as f64;
            for e in &h.entries {
                re.push(round_clamp(e.re / step, max_level));
                im.push(round_clamp(e.im / step, max_level));
            }
            ScaleDescriptor::LinearMax { max: reference }
        }
        Scheme::PowerOfTwo => {
            let n_p = cfg.n_p.expect("validated");
            let exponent = pow2_exponent(reference, n_p);
            // h^q = Round(α_H · h · 2^(n_b − n_p)), a pure binary shift.
            let shift = exponent + i32::from(cfg.n_b) - i32::from(n_p);
            for e in &h.entries {
                re.push(round_clamp(ldexp(e.re, shift), max_level));
                im.push(round_clamp(ldexp(e.im, shift), max_level));
            }
            ScaleDescriptor::Pow2Exponent { exponent }
        }
        Scheme::Fractional => {
            let mut alphas = Vec::with_capacity(h.n_subcarriers);
            let mut beta_exps = Vec::with_capacity(h.n_subcarriers);
            for k in 0..h.n_subcarriers {
                let grid = db_grid_value(reference, db_code_for(reference, h.component_max(k)));
                let limit = max_level as f64 / grid;
                let (alpha, beta_exp) = best_ratio(&cfg.alpha_set, limit);
                let ratio = ldexp(f64::from(alpha), -beta_exp);
                for e in &h.entries[k * streams..(k + 1) * streams] {
                    re.push(round_clamp(e.re * ratio, max_level));
                    im.push(round_clamp(e.im * ratio, max_level));
                }
                alphas.push(alpha);
                beta_exps.push(beta_exp);
            }
            ScaleDescriptor::Ratios { alphas, beta_exps }
        }
    };

    Ok(QuantizedCsi {
        scheme: cfg.scheme,
        n_b: cfg.n_b,
        n_p: cfg.n_p,
        scale,
        re,
        im,
        n_subcarriers: h.n_subcarriers,
        n_rx: h.n_rx,
        n_tx: h.n_tx,
        bandwidth_hz: h.bandwidth_hz,
    })
}

/// Inverts the recorded scale; each component lands within half of one
/// quantization step of the original.
pub fn dequantize_csi(q: &QuantizedCsi) -> Result<CsiMatrix, CsiError> {
    let max_level = ((1i64 << (q.n_b - 1)) - 1) as f64;
    let streams = q.n_rx * q.n_tx;
    if q.re.len() != q.n_subcarriers * streams || q.im.len() != q.re.len() {
        return Err(CsiError::Format("integer array length disagrees with dimensions".into()));
    }
    let mut entries = Vec::with_capacity(q.re.len());
    let per_subcarrier_step: Vec<f64> = match &q.scale {
        ScaleDescriptor::DbCodes { reference, codes } => {
            if codes.len() != q.n_subcarriers {
                return Err(CsiError::Format("dB code count disagrees with subcarriers".into()));
            }
            codes.iter().map(|&c| db_grid_value(*reference, c) / max_level).collect()
        }
        ScaleDescriptor::LinearMax { max } => vec![max / max_level; q.n_subcarriers],
        ScaleDescriptor::Pow2Exponent { exponent } => {
            let n_p = q
                .n_p
                .ok_or_else(|| CsiError::Format("power_of_two scale without n_p".into()))?;
            let shift = exponent + i32::from(q.n_b) - i32::from(n_p);
            vec![pow2(-shift); q.n_subcarriers]
        }
        ScaleDescriptor::Ratios { alphas, beta_exps } => {
            if alphas.len() != q.n_subcarriers || beta_exps.len() != q.n_subcarriers {
                return Err(CsiError::Format("ratio count disagrees with subcarriers".into()));
            }
            alphas
                .iter()
                .zip(beta_exps)
                .map(|(&a, &j)| ldexp(1.0 / f64::from(a), j))
                .collect()
        }
    };
    for (k, &step) in per_subcarrier_step.iter().enumerate() {
        for i in k * streams..(k + 1) * streams {
            entries.push(Cx::new(f64::from(q.re[i]) * step, f64::from(q.im[i]) * step));
        }
    }
    CsiMatrix::new(entries, q.n_subcarriers, q.n_rx, q.n_tx, q.bandwidth_hz)
}

// ─── CFR ↔ CIR transforms ─────────────────────────────────────────────────

/// Inverse DFT: per-stream CIR taps from the CFR across subcarriers.
pub fn cfr_to_cir(h: &CsiMatrix) -> Vec<Cx> {
    let n = h.n_subcarriers;
    let streams = h.streams();
    let mut taps = vec![Cx::new(0.0, 0.0); n * streams];
    for s in 0..streams {
        for tap in 0..n {
            let mut acc = Cx::new(0.0, 0.0);
            for k in 0..n {
                let angle = 2.0 * core::f64::consts::PI * (k as f64) * (tap as f64) / n as f64;
                acc += h.entries[k * streams + s] * Cx::new(Float::cos(angle), Float::sin(angle));
            }
            taps[tap * streams + s] = acc / n as f64;
        }
    }
    taps
}

/// Forward DFT: CFR across subcarriers from per-stream CIR taps.
pub fn cir_to_cfr(taps: &[Cx], n_subcarriers: usize, streams: usize) -> Vec<Cx> {
    let n_taps = taps.len() / streams;
    let mut cfr = vec![Cx::new(0.0, 0.0); n_subcarriers * streams];
    for s in 0..streams {
        for k in 0..n_subcarriers {
            let mut acc = Cx::new(0.0, 0.0);
            for (tap, chunk) in taps.chunks(streams).enumerate().take(n_taps) {
                let angle =
                    -2.0 * core::f64::consts::PI * (k as f64) * (tap as f64) / n_subcarriers as f64;
                acc += chunk[s] * Cx::new(Float::cos(angle), Float::sin(angle));
            }
            cfr[k * streams + s] = acc;
        }
    }
    cfr
}

// ─── Feedback encode/decode ───────────────────────────────────────────────

/// Encodes a feedback report of the requested type. `tap_count` must be
/// given exactly when `report_type` is [`ReportType::Tcir`].
pub fn encode_feedback(
    h: &CsiMatrix,
    report_type: ReportType,
    cfg: &QuantConfig,
    tap_count: Option<usize>,
) -> Result<FeedbackReport, CsiError> {
    cfg.validate()?;
    match (report_type, tap_count) {
        (ReportType::Tcir, None) => {
            return Err(CsiError::Config("tcir requires a tap count".into()))
        }
        (ReportType::Tcir, Some(_)) => {}
        (_, Some(_)) => {
            return Err(CsiError::Config("tap count only applies to tcir".into()))
        }
        _ => {}
    }
    let payload = match report_type {
        ReportType::FullCsi => FeedbackPayload::FullCsi(quantize_csi(h, cfg)?),
        ReportType::AmplitudeOnly => {
            let max_level = cfg.max_level() as f64;
            let amplitudes: Vec<f64> = h.entries.iter().map(|e| e.norm()).collect();
            let max = amplitudes.iter().fold(0.0f64, |m, &a| m.max(a));
            if max == 0.0 {
                return Err(CsiError::DegenerateInput);
            }
            let codes = amplitudes
                .iter()
                .map(|&a| round_clamp(a / max * max_level, cfg.max_level()))
                .collect();
            FeedbackPayload::Amplitude {
                max,
                codes,
                n_b: cfg.n_b,
                n_subcarriers: h.n_subcarriers,
                n_rx: h.n_rx,
                n_tx: h.n_tx,
            }
        }
        ReportType::PhaseOnly => {
            let max_level = cfg.max_level() as f64;
            let codes = h
                .entries
                .iter()
                .map(|e| {
                    let theta = Float::atan2(e.im, e.re);
                    round_clamp(theta / core::f64::consts::PI * max_level, cfg.max_level())
                })
                .collect();
            FeedbackPayload::Phase {
                codes,
                n_b: cfg.n_b,
                n_subcarriers: h.n_subcarriers,
                n_rx: h.n_rx,
                n_tx: h.n_tx,
            }
        }
        ReportType::Tcir => {
            let l = tap_count.expect("checked above");
            if l == 0 || l > h.n_subcarriers {
                return Err(CsiError::TapCountOutOfRange {
                    tap_count: l,
                    n_subcarriers: h.n_subcarriers,
                });
            }
            let taps = cfr_to_cir(h);
            let truncated = taps[..l * h.streams()].to_vec();
            let tap_matrix = CsiMatrix::new(truncated, l, h.n_rx, h.n_tx, h.bandwidth_hz)?;
            FeedbackPayload::Tcir {
                taps: quantize_csi(&tap_matrix, cfg)?,
                n_subcarriers: h.n_subcarriers,
            }
        }
        ReportType::Differential => {
            let scale = h.global_component_max();
            if scale == 0.0 {
                return Err(CsiError::DegenerateInput);
            }
            let step = scale / cfg.max_level() as f64;
            let delta_max = (1i64 << (cfg.n_b - cfg.diff_saving - 1)) - 1;
            let streams = h.streams();
            let n = h.entries.len();
            let (mut re, mut im) = (vec![0i32; n], vec![0i32; n]);
            let mut saturated = false;
            for s in 0..streams {
                let mut encode_component = |read: fn(&Cx) -> f64, out: &mut Vec<i32>| {
                    let first = read(&h.entries[s]);
                    let q0 = round_clamp(first / step, cfg.max_level());
                    out[s] = q0;
                    let mut recon = f64::from(q0) * step;
                    for k in 1..h.n_subcarriers {
                        let value = read(&h.entries[k * streams + s]);
                        let raw = Float::round((value - recon) / step);
                        let clamped = raw.max(-(delta_max as f64)).min(delta_max as f64);
                        if clamped != raw {
                            saturated = true;
                        }
                        out[k * streams + s] = clamped as i32;
                        recon += clamped * step;
                    }
                };
                encode_component(|e| e.re, &mut re);
                encode_component(|e| e.im, &mut im);
            }
            FeedbackPayload::Differential {
                scale,
                re,
                im,
                n_b: cfg.n_b,
                diff_saving: cfg.diff_saving,
                saturated,
                n_subcarriers: h.n_subcarriers,
                n_rx: h.n_rx,
                n_tx: h.n_tx,
                bandwidth_hz: h.bandwidth_hz,
            }
        }
    };
    Ok(FeedbackReport { report_type, payload })
}

/// Decodes a report back to a CFR matrix or real arrays.
pub fn decode_feedback(
    report: &FeedbackReport,
    n_subcarriers: usize,
) -> Result<DecodedFeedback, CsiError> {
    match (&report.report_type, &report.payload) {
        (ReportType::FullCsi, FeedbackPayload::FullCsi(q)) => {
            Ok(DecodedFeedback::Csi(dequantize_csi(q)?))
        }
        (ReportType::AmplitudeOnly, FeedbackPayload::Amplitude { max, codes, n_b, .. }) => {
            if codes.is_empty() {
                return Err(CsiError::Format("empty amplitude payload".into()));
            }
            let max_level = ((1i64 << (n_b - 1)) - 1) as f64;
            Ok(DecodedFeedback::Amplitudes(
                codes.iter().map(|&c| f64::from(c) * max / max_level).collect(),
            ))
        }
        (ReportType::PhaseOnly, FeedbackPayload::Phase { codes, n_b, .. }) => {
            if codes.is_empty() {
                return Err(CsiError::Format("empty phase payload".into()));
            }
            let max_level = ((1i64 << (n_b - 1)) - 1) as f64;
            Ok(DecodedFeedback::Phases(
                codes
                    .iter()
                    .map(|&c| f64::from(c) / max_level * core::f64::consts::PI)
                    .collect(),
            ))
        }
        (ReportType::Tcir, FeedbackPayload::Tcir { taps, .. }) => {
            if taps.n_subcarriers > n_subcarriers {
                return Err(CsiError::Format("more taps than subcarriers".into()));
            }
            let tap_matrix = dequantize_csi(taps)?;
            let cfr = cir_to_cfr(&tap_matrix.entries, n_subcarriers, tap_matrix.streams());
            Ok(DecodedFeedback::Csi(CsiMatrix::new(
                cfr,
                n_subcarriers,
                tap_matrix.n_rx,
                tap_matrix.n_tx,
                tap_matrix.bandwidth_hz,
            )?))
        }
        (
            ReportType::Differential,
            FeedbackPayload::Differential {
                scale, re, im, n_b, n_subcarriers: n_sc, n_rx, n_tx, bandwidth_hz, ..
            },
        ) => {
            if re.is_empty() || re.len() != im.len() || re.len() != n_sc * n_rx * n_tx {
                return Err(CsiError::Format("differential payload shape mismatch".into()));
            }
            let step = scale / (((1i64 << (n_b - 1)) - 1) as f64);
            let streams = n_rx * n_tx;
            let mut entries = vec![Cx::new(0.0, 0.0); re.len()];
            for s in 0..streams {
                let mut re_acc = 0.0;
                let mut im_acc = 0.0;
                for k in 0..*n_sc {
                    let i = k * streams + s;
                    if k == 0 {
                        re_acc = f64::from(re[i]) * step;
                        im_acc = f64::from(im[i]) * step;
                    } else {
                        re_acc += f64::from(re[i]) * step;
                        im_acc += f64::from(im[i]) * step;
                    }
                    entries[i] = Cx::new(re_acc, im_acc);
                }
            }
            Ok(DecodedFeedback::Csi(CsiMatrix::new(entries, *n_sc, *n_rx, *n_tx, *bandwidth_hz)?))
        }
        _ => Err(CsiError::Format("payload does not match report type".into())),
    }
}

// ─── CSI variation ────────────────────────────────────────────────────────

/// Normalized correlation distance `1 − |⟨c, p⟩| / (‖c‖·‖p‖)` in [0, 1]:
/// 0 iff the matrices agree up to one complex scalar, 1 when orthogonal.
pub fn csi_variation(current: &CsiMatrix, previous: &CsiMatrix) -> Result<f64, CsiError> {
    if !current.same_shape(previous) {
        return Err(CsiError::Dimension("csi_variation inputs differ in shape".into()));
    }
    let mut inner = Cx::new(0.0, 0.0);
    let mut norm_c = 0.0f64;
    let mut norm_p = 0.0f64;
    for (c, p) in current.entries.iter().zip(&previous.entries) {
        inner += c * p.conj();
        norm_c += c.norm_sqr();
        norm_p += p.norm_sqr();
    }
    if norm_c == 0.0 || norm_p == 0.0 {
        return Err(CsiError::DegenerateInput);
    }
    let cosine = inner.norm() / Float::sqrt(norm_c * norm_p);
    Ok((1.0 - cosine).clamp(0.0, 1.0))
}

// ─── Binary serialization ─────────────────────────────────────────────────

const TAG_FULL: u8 = 0;
const TAG_AMP: u8 = 1;
const TAG_PHASE: u8 = 2;
const TAG_TCIR: u8 = 3;
const TAG_DIFF: u8 = 4;

const SCALE_DB: u8 = 0;
const SCALE_LIN: u8 = 1;
const SCALE_POW2: u8 = 2;
const SCALE_RATIO: u8 = 3;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i32(&mut self, v: i32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    /// Two's-complement integer of ⌈n_b/8⌉ bytes, little endian.
    fn quant(&mut self, v: i32, n_b: u8) {
        let width = usize::from(n_b.div_ceil(8));
        self.0.extend_from_slice(&v.to_le_bytes()[..width]);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CsiError> {
        if self.at + n > self.bytes.len() {
            return Err(CsiError::Format("truncated report".into()));
        }
        let slice = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(slice)
    }
    fn u8(&mut self) -> Result<u8, CsiError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, CsiError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("sized")))
    }
    fn i32(&mut self) -> Result<i32, CsiError> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().expect("sized")))
    }
    fn f64(&mut self) -> Result<f64, CsiError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("sized")))
    }
    fn quant(&mut self, n_b: u8) -> Result<i32, CsiError> {
        let width = usize::from(n_b.div_ceil(8));
        let raw = self.take(width)?;
        let mut buf = [0u8; 4];
        buf[..width].copy_from_slice(raw);
        // Sign-extend from the top bit of the stored width.
        if raw[width - 1] & 0x80 != 0 {
            for b in buf.iter_mut().skip(width) {
                *b = 0xFF;
            }
        }
        Ok(i32::from_le_bytes(buf))
    }
    fn done(&self) -> Result<(), CsiError> {
        if self.at != self.bytes.len() {
            return Err(CsiError::Format("trailing bytes after report".into()));
        }
        Ok(())
    }
}

fn scheme_code(s: Scheme) -> u8 {
    match s {
        Scheme::Legacy11n => 0,
        Scheme::SimplifiedLinear => 1,
        Scheme::PowerOfTwo => 2,
        Scheme::Fractional => 3,
    }
}

fn scheme_from(code: u8) -> Result<Scheme, CsiError> {
    Ok(match code {
        0 => Scheme::Legacy11n,
        1 => Scheme::SimplifiedLinear,
        2 => Scheme::PowerOfTwo,
        3 => Scheme::Fractional,
        other => return Err(CsiError::Format(format!("unknown scheme tag {other}"))),
    })
}

fn write_quantized(w: &mut Writer, q: &QuantizedCsi) {
    w.u8(scheme_code(q.scheme));
    w.u8(q.n_b);
    w.u8(q.n_p.unwrap_or(0));
    w.u32(q.n_subcarriers as u32);
    w.u32(q.n_rx as u32);
    w.u32(q.n_tx as u32);
    w.f64(q.bandwidth_hz);
    match &q.scale {
        ScaleDescriptor::DbCodes { reference, codes } => {
            w.u8(SCALE_DB);
            w.f64(*reference);
            for &c in codes {
                w.u8(c);
            }
        }
        ScaleDescriptor::LinearMax { max } => {
            w.u8(SCALE_LIN);
            w.f64(*max);
        }
        ScaleDescriptor::Pow2Exponent { exponent } => {
            w.u8(SCALE_POW2);
            w.i32(*exponent);
        }
        ScaleDescriptor::Ratios { alphas, beta_exps } => {
            w.u8(SCALE_RATIO);
            for (&a, &j) in alphas.iter().zip(beta_exps) {
                w.u32(a);
                w.i32(j);
            }
        }
    }
    for (&r, &i) in q.re.iter().zip(&q.im) {
        w.quant(r, q.n_b);
        w.quant(i, q.n_b);
    }
}

fn read_quantized(r: &mut Reader) -> Result<QuantizedCsi, CsiError> {
    let scheme = scheme_from(r.u8()?)?;
    let n_b = r.u8()?;
    if !(2..=16).contains(&n_b) {
        return Err(CsiError::Format(format!("stored n_b = {n_b} outside 2..=16")));
    }
    let n_p_raw = r.u8()?;
    let n_p = if n_p_raw == 0 { None } else { Some(n_p_raw) };
    let n_subcarriers = r.u32()? as usize;
    let n_rx = r.u32()? as usize;
    let n_tx = r.u32()? as usize;
    let bandwidth_hz = r.f64()?;
    let count = n_subcarriers
        .checked_mul(n_rx)
        .and_then(|v| v.checked_mul(n_tx))
        .ok_or_else(|| CsiError::Format("dimension overflow".into()))?;
    if count == 0 {
        return Err(CsiError::Format("empty quantized payload".into()));
    }
    let scale = match r.u8()? {
        SCALE_DB => {
            let reference = r.f64()?;
            let mut codes = Vec::with_capacity(n_subcarriers);
            for _ in 0..n_subcarriers {
                codes.push(r.u8()?);
            }
            ScaleDescriptor::DbCodes { reference, codes }
        }
        SCALE_LIN => ScaleDescriptor::LinearMax { max: r.f64()? },
        SCALE_POW2 => ScaleDescriptor::Pow2Exponent { exponent: r.i32()? },
        SCALE_RATIO => {
            let mut alphas = Vec::with_capacity(n_subcarriers);
            let mut beta_exps = Vec::with_capacity(n_subcarriers);
            for _ in 0..n_subcarriers {
                alphas.push(r.u32()?);
                beta_exps.push(r.i32()?);
            }
            ScaleDescriptor::Ratios { alphas, beta_exps }
        }
        other => return Err(CsiError::Format(format!("unknown scale tag {other}"))),
    };
    let mut re = Vec::with_capacity(count);
    let mut im = Vec::with_capacity(count);
    for _ in 0..count {
        re.push(r.quant(n_b)?);
        im.push(r.quant(n_b)?);
    }
    Ok(QuantizedCsi { scheme, n_b, n_p, scale, re, im, n_subcarriers, n_rx, n_tx, bandwidth_hz })
}

/// Serializes a report: 1-byte type tag, little-endian fixed-width fields,
/// then I/Q integers as two's-complement values of ⌈n_b/8⌉ bytes each.
pub fn serialize_feedback(report: &FeedbackReport) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    match &report.payload {
        FeedbackPayload::FullCsi(q) => {
            w.u8(TAG_FULL);
            write_quantized(&mut w, q);
        }
        FeedbackPayload::Amplitude { max, codes, n_b, n_subcarriers, n_rx, n_tx } => {
            w.u8(TAG_AMP);
            w.u8(*n_b);
            w.u32(*n_subcarriers as u32);
            w.u32(*n_rx as u32);
            w.u32(*n_tx as u32);
            w.f64(*max);
            for &c in codes {
                w.quant(c, *n_b);
            }
        }
        FeedbackPayload::Phase { codes, n_b, n_subcarriers, n_rx, n_tx } => {
            w.u8(TAG_PHASE);
            w.u8(*n_b);
            w.u32(*n_subcarriers as u32);
            w.u32(*n_rx as u32);
            w.u32(*n_tx as u32);
            for &c in codes {
                w.quant(c, *n_b);
            }
        }
        FeedbackPayload::Tcir { taps, n_subcarriers } => {
            w.u8(TAG_TCIR);
            w.u32(*n_subcarriers as u32);
            write_quantized(&mut w, taps);
        }
        FeedbackPayload::Differential {
            scale,
            re,
            im,
            n_b,
            diff_saving,
            saturated,
            n_subcarriers,
            n_rx,
            n_tx,
            bandwidth_hz,
        } => {
            w.u8(TAG_DIFF);
            w.u8(*n_b);
            w.u8(*diff_saving);
            w.u8(u8::from(*saturated));
            w.u32(*n_subcarriers as u32);
            w.u32(*n_rx as u32);
            w.u32(*n_tx as u32);
            w.f64(*scale);
            w.f64(*bandwidth_hz);
            for (&r, &i) in re.iter().zip(im) {
                w.quant(r, *n_b);
                w.quant(i, *n_b);
            }
        }
    }
    w.0
}

/// Parses a serialized report; bit-exact inverse of [`serialize_feedback`].
pub fn parse_feedback(bytes: &[u8]) -> Result<FeedbackReport, CsiError> {
    let mut r = Reader { bytes, at: 0 };
    let report = match r.u8()? {
        TAG_FULL => FeedbackReport {
            report_type: ReportType::FullCsi,
            payload: FeedbackPayload::FullCsi(read_quantized(&mut r)?),
        },
        TAG_AMP => {
            let n_b = r.u8()?;
            let n_subcarriers = r.u32()? as usize;
            let n_rx = r.u32()? as usize;
            let n_tx = r.u32()? as usize;
            let max = r.f64()?;
            let count = n_subcarriers * n_rx * n_tx;
            if count == 0 {
                return Err(CsiError::Format("empty amplitude payload".into()));
            }
            let mut codes = Vec::with_capacity(count);
            for _ in 0..count {
                codes.push(r.quant(n_b)?);
            }
            FeedbackReport {
                report_type: ReportType::AmplitudeOnly,
                payload: FeedbackPayload::Amplitude { max, codes, n_b, n_subcarriers, n_rx, n_tx },
            }
        }
        TAG_PHASE => {
            let n_b = r.u8()?;
            let n_subcarriers = r.u32()? as usize;
            let n_rx = r.u32()? as usize;
            let n_tx = r.u32()? as usize;
            let count = n_subcarriers * n_rx * n_tx;
            if count == 0 {
                return Err(CsiError::Format("empty phase payload".into()));
            }
            let mut codes = Vec::with_capacity(count);
            for _ in 0..count {
                codes.push(r.quant(n_b)?);
            }
            FeedbackReport {
                report_type: ReportType::PhaseOnly,
                payload: FeedbackPayload::Phase { codes, n_b, n_subcarriers, n_rx, n_tx },
            }
        }
        TAG_TCIR => {
            let n_subcarriers = r.u32()? as usize;
            FeedbackReport {
                report_type: ReportType::Tcir,
                payload: FeedbackPayload::Tcir { taps: read_quantized(&mut r)?, n_subcarriers },
            }
        }
        TAG_DIFF => {
            let n_b = r.u8()?;
            let diff_saving = r.u8()?;
            let saturated = r.u8()? != 0;
            let n_subcarriers = r.u32()? as usize;
            let n_rx = r.u32()? as usize;
            let n_tx = r.u32()? as usize;
            let scale = r.f64()?;
            let bandwidth_hz = r.f64()?;
            let count = n_subcarriers * n_rx * n_tx;
            if count == 0 {
                return Err(CsiError::Format("empty differential payload".into()));
            }
            let (mut re, mut im) = (Vec::with_capacity(count), Vec::with_capacity(count));
            for _ in 0..count {
                re.push(r.quant(n_b)?);
                im.push(r.quant(n_b)?);
            }
            FeedbackReport {
                report_type: ReportType::Differential,
                payload: FeedbackPayload::Differential {
                    scale,
                    re,
                    im,
                    n_b,
                    diff_saving,
                    saturated,
                    n_subcarriers,
                    n_rx,
                    n_tx,
                    bandwidth_hz,
                },
            }
        }
        other => return Err(CsiError::Format(format!("unknown report tag {other}"))),
    };
    r.done()?;
    Ok(report)
}

// ─── Tests ────────────────────────────────────────────────────────────────
