//! Sensing PHY sequences and PPDU skeletons.
//!
//! Builds the Golay complementary pairs, the CE0/CE1 channel-estimation
//! fields, the eight per-STA Sync subfields derived from the ±1 coefficient
//! matrix, and the TRN-bearing / multistatic sensing PPDU layouts. Chips are
//! real ±1 at the chip level; no pulse shaping is applied.
//!
//! The Sync construction is pinned by a brute-force correlation oracle: the
//! eight 128-chip blocks of each subfield form complementary sets, so the
//! relevant correlation metric is the synchronized Golay-correlator output
//! (the sum of the eight block-aligned aperiodic correlations, see
//! [`sync_correlation`]). Under it every autocorrelation is a perfect
//! thumbtack with peak 1024 and the cross-correlation between any two of the
//! first four (or any two of the last four) subfields is exactly zero at
//! every lag. A plain full-sequence correlation cannot reproduce that
//! pattern for any ±1 construction: at the extreme lag it degenerates to a
//! single ±1 product.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::seq::ComplexSequence;
use crate::Cx;

/// Chip count of one Golay block inside CE and Sync fields (2^7).
pub const GOLAY_BLOCK_LEN: usize = 128;
/// Chip count of CE0, CE1, each Sync subfield, and one TRN subfield.
pub const FIELD_LEN: usize = 8 * GOLAY_BLOCK_LEN;
/// TRN-unit granularity that multistatic Sync+padding must align to.
pub const TRN_UNIT_LEN: usize = FIELD_LEN;
/// Default length of the preamble placeholder, in samples.
pub const DEFAULT_PREAMBLE_LEN: usize = 256;

// ─── Errors ───────────────────────────────────────────────────────────────

/// Construction-time failures for sequences and PPDUs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WaveformError {
    /// Golay order outside the supported 1..=10 range.
    OrderOutOfRange(u8),
    /// Unsupported pair index (only 7 and 8 exist).
    PairIndexUnknown(u8),
    /// Sync STA index outside 1..=8.
    StaIndexOutOfRange(u8),
    /// Supplied chip pair fails the complementary check.
    NotComplementary { length: usize },
    /// `awv_schedule` length disagrees with `m_count`.
    AwvScheduleMismatch { m_count: usize, schedule_len: usize },
    /// Multistatic Sync-plus-padding length is not a TRN-unit multiple.
    PaddingNotUnitMultiple { total: usize, unit: usize },
    /// Multistatic Sync STA indices are empty, duplicated, or out of range.
    SyncIndicesInvalid(String),
}

impl fmt::Display for WaveformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OrderOutOfRange(k) => write!(f, "golay order {k} outside 1..=10"),
            Self::PairIndexUnknown(i) => write!(f, "unknown golay pair index {i} (expected 7 or 8)"),
            Self::StaIndexOutOfRange(r) => write!(f, "sync STA index {r} outside 1..=8"),
            Self::NotComplementary { length } => {
                write!(f, "chip pair of length {length} is not complementary")
            }
            Self::AwvScheduleMismatch { m_count, schedule_len } => write!(
                f,
                "awv schedule holds {schedule_len} entries but m_count is {m_count}"
            ),
            Self::PaddingNotUnitMultiple { total, unit } => write!(
                f,
                "sync fields plus padding span {total} samples, not a multiple of the {unit}-sample TRN unit"
            ),
            Self::SyncIndicesInvalid(why) => write!(f, "invalid sync_sta_indices: {why}"),
        }
    }
}

// ─── Golay pairs ──────────────────────────────────────────────────────────

/// A complementary pair of ±1 sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct GolayPair {
    pub a: ComplexSequence,
    pub b: ComplexSequence,
    pub length: usize,
    pub pair_index: u8,
    chips_a: Vec<i8>,
    chips_b: Vec<i8>,
}

impl GolayPair {
    /// ±1 chips of sequence `a`.
    pub fn chips_a(&self) -> &[i8] {
        &self.chips_a
    }

    /// ±1 chips of sequence `b`.
    pub fn chips_b(&self) -> &[i8] {
        &self.chips_b
    }
}

/// Aperiodic correlation of two equal-length ±1 chip sequences.
///
/// Index `u` of the result corresponds to lag `u - (n - 1)`, so the output
/// spans lags `-(n-1) ..= n-1` and has length `2n - 1`.
pub fn chip_xcorr(x: &[i8], y: &[i8]) -> Vec<i64> {
    let n = x.len();
    assert_eq!(n, y.len(), "chip_xcorr requires equal lengths");
    let mut out = vec![0i64; 2 * n - 1];
    for (u, slot) in out.iter_mut().enumerate() {
        let lag = u as isize - (n as isize - 1);
        let mut acc = 0i64;
        for i in 0..n as isize {
            let j = i - lag;
            if (0..n as isize).contains(&j) {
                acc += i64::from(x[i as usize]) * i64::from(y[j as usize]);
            }
        }
        *slot = acc;
    }
    out
}

/// Sum of the two aperiodic autocorrelations of a candidate pair.
pub fn autocorrelation_sum(a: &[i8], b: &[i8]) -> Vec<i64> {
    let mut s = chip_xcorr(a, a);
    for (t, v) in s.iter_mut().zip(chip_xcorr(b, b)) {
        *t += v;
    }
    s
}

fn is_complementary(a: &[i8], b: &[i8]) -> bool {
    let n = a.len() as i64;
    let s = autocorrelation_sum(a, b);
    s.iter().enumerate().all(|(u, &v)| {
        if u == a.len() - 1 {
            v == 2 * n
        } else {
            v == 0
        }
    })
}

/// Recursive delay/weight Golay construction.
///
/// `delays` must be a permutation of `{1, 2, 4, …, 2^(k-1)}` and `weights`
/// entries ±1; the recursion then yields a complementary pair of length 2^k.
fn delay_weight(k: usize, delays: &[usize], weights: &[i8]) -> (Vec<i8>, Vec<i8>) {
    let n = 1usize << k;
    let mut a = vec![0i64; n];
    let mut b = vec![0i64; n];
    a[0] = 1;
    b[0] = 1;
    for (d, w) in delays.iter().zip(weights) {
        let w = i64::from(*w);
        let mut na = vec![0i64; n];
        let mut nb = vec![0i64; n];
        for i in 0..n {
            let shifted = if i >= *d { b[i - d] } else { 0 };
            na[i] = w * a[i] + shifted;
            nb[i] = w * a[i] - shifted;
        }
        a = na;
        b = nb;
    }
    let to_chips = |v: Vec<i64>| v.into_iter().map(|x| x as i8).collect();
    (to_chips(a), to_chips(b))
}

/// Delay/weight parameters for pair 7 at each order.
fn pair7_params(k: usize) -> (Vec<usize>, Vec<i8>) {
    if k == 7 {
        // The 60 GHz 128-chip generator parameters.
        (vec![1, 8, 2, 4, 16, 32, 64], vec![-1, -1, -1, -1, 1, -1, -1])
    } else {
        ((0..k).map(|i| 1usize << i).collect(), vec![-1; k])
    }
}

/// Builds the complementary pair of length `2^order` for `pair_index` 7 or 8.
///
/// Pair 8 is the Golay mate of pair 7 — `(reverse(b7), -reverse(a7))` — which
/// is itself complementary and additionally satisfies the mate identity
/// `R(a7,a8) + R(b7,b8) = 0` at every lag, the property the CE and Sync
/// cross-correlation patterns rest on.
pub fn generate_golay_pair(order: u8, pair_index: u8) -> Result<GolayPair, WaveformError> {
    if !(1..=10).contains(&order) {
        return Err(WaveformError::OrderOutOfRange(order));
    }
    let k = usize::from(order);
    let (d, w) = pair7_params(k);
    let (a7, b7) = delay_weight(k, &d, &w);
    let (chips_a, chips_b) = match pair_index {
        7 => (a7, b7),
        8 => {
            let a8: Vec<i8> = b7.iter().rev().copied().collect();
            let b8: Vec<i8> = a7.iter().rev().map(|c| -c).collect();
            (a8, b8)
        }
        other => return Err(WaveformError::PairIndexUnknown(other)),
    };
    debug_assert!(is_complementary(&chips_a, &chips_b));
    Ok(GolayPair {
        a: ComplexSequence::from_chips(&chips_a),
        b: ComplexSequence::from_chips(&chips_b),
        length: chips_a.len(),
        pair_index,
        chips_a,
        chips_b,
    })
}

/// Wraps externally supplied chips (e.g. exact standards constants) after
/// verifying the complementary property.
pub fn golay_pair_from_chips(a: &[i8], b: &[i8], pair_index: u8) -> Result<GolayPair, WaveformError> {
    if a.len() != b.len() || a.is_empty() || !a.len().is_power_of_two() {
        return Err(WaveformError::NotComplementary { length: a.len() });
    }
    if !is_complementary(a, b) {
        return Err(WaveformError::NotComplementary { length: a.len() });
    }
    Ok(GolayPair {
        a: ComplexSequence::from_chips(a),
        b: ComplexSequence::from_chips(b),
        length: a.len(),
        pair_index,
        chips_a: a.to_vec(),
        chips_b: b.to_vec(),
    })
}

// ─── CE fields ────────────────────────────────────────────────────────────

/// Channel-estimation field selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeVariant {
    Ce0,
    Ce1,
}

/// Block sign pattern shared by CE0, CE1, and Sync row 1.
const CE_SIGNS: [i8; 8] = [1, -1, 1, -1, 1, 1, 1, 1];

fn ce_chips(variant: CeVariant) -> Vec<i8> {
    let pair = match variant {
        CeVariant::Ce0 => generate_golay_pair(7, 7),
        CeVariant::Ce1 => generate_golay_pair(7, 8),
    }
    .expect("order 7 is always valid");
    let mut chips = Vec::with_capacity(FIELD_LEN);
    for (c, sign) in CE_SIGNS.iter().enumerate() {
        let base = if c % 2 == 0 { pair.chips_a() } else { pair.chips_b() };
        chips.extend(base.iter().map(|&x| sign * x));
    }
    chips
}

/// Builds the 1024-chip CE0 or CE1 field: eight alternating Ga/Gb blocks of
/// the corresponding pair with signs `[+,−,+,−,+,+,+,+]`.
pub fn build_ce_sequence(variant: CeVariant) -> ComplexSequence {
    ComplexSequence::from_chips(&ce_chips(variant))
}

// ─── Sync subfields ───────────────────────────────────────────────────────

/// The ±1 Sync coefficient matrix; row r weights the blocks of subfield r+1.
pub const SYNC_COEFFICIENTS: [[i8; 8]; 8] = [
    [1, -1, 1, -1, 1, 1, 1, 1],
    [1, -1, 1, -1, 1, 1, 1, 1],
    [1, 1, -1, -1, 1, -1, -1, 1],
    [1, 1, -1, -1, 1, -1, -1, 1],
    [-1, 1, -1, 1, 1, 1, 1, 1],
    [-1, 1, -1, 1, 1, 1, 1, 1],
    [1, -1, -1, 1, -1, -1, 1, 1],
    [1, -1, -1, 1, -1, -1, 1, 1],
];

/// Gi/Gj block interleave over the eight block positions: `false` places
/// Gi, `true` places Gj. Pinned by the brute-force oracle (see module docs).
const SYNC_INTERLEAVE: [bool; 8] = [false, true, true, true, true, false, false, false];

/// Per-row (Gi, Gj) base-sequence selectors: pair index and a/b choice.
/// Rows 1..=8 map Gi to Ga7, Ga8, Ga7, Ga8, Gb7, Gb8, Gb7, Gb8 and Gj to the
/// complementary partner list starting at Gb7.
fn sync_bases(r: usize) -> (Vec<i8>, Vec<i8>) {
    let pair_index = if r % 2 == 1 { 7 } else { 8 };
    let pair = generate_golay_pair(7, pair_index).expect("order 7 is always valid");
    if r <= 4 {
        (pair.chips_a().to_vec(), pair.chips_b().to_vec())
    } else {
        (pair.chips_b().to_vec(), pair.chips_a().to_vec())
    }
}

/// The eight signed 128-chip blocks of Sync subfield `r` (1..=8).
pub fn sync_block_chips(sta_index: u8) -> Result<[Vec<i8>; 8], WaveformError> {
    if !(1..=8).contains(&sta_index) {
        return Err(WaveformError::StaIndexOutOfRange(sta_index));
    }
    let r = usize::from(sta_index);
    let (gi, gj) = sync_bases(r);
    let signs = SYNC_COEFFICIENTS[r - 1];
    let mut blocks: [Vec<i8>; 8] = Default::default();
    for (c, block) in blocks.iter_mut().enumerate() {
        let base = if SYNC_INTERLEAVE[c] { &gj } else { &gi };
        *block = base.iter().map(|&x| signs[c] * x).collect();
    }
    Ok(blocks)
}

/// Builds the 1024-chip Sync subfield for STA `r` in 1..=8.
pub fn build_sync_subfield(sta_index: u8) -> Result<ComplexSequence, WaveformError> {
    let blocks = sync_block_chips(sta_index)?;
    let mut chips = Vec::with_capacity(FIELD_LEN);
    for b in &blocks {
        chips.extend_from_slice(b);
    }
    Ok(ComplexSequence::from_chips(&chips))
}

/// Synchronized Golay-correlator output between Sync subfields `r` and `s`:
/// the sum of the eight block-aligned aperiodic correlations, spanning lags
/// `-127 ..= 127`. This is the metric a block-synchronized TRN receiver
/// computes, and the one the published correlation pattern is stated in.
pub fn sync_correlation(r: u8, s: u8) -> Result<Vec<i64>, WaveformError> {
    let br = sync_block_chips(r)?;
    let bs = sync_block_chips(s)?;
    let mut acc = vec![0i64; 2 * GOLAY_BLOCK_LEN - 1];
    for c in 0..8 {
        for (t, v) in acc.iter_mut().zip(chip_xcorr(&br[c], &bs[c])) {
            *t += v;
        }
    }
    Ok(acc)
}

/// The 8×8 max-|correlation| matrix over all lags; diagonal entries report
/// the largest autocorrelation *sidelobe* (the lag-0 peak is 1024 for every
/// subfield).
pub fn sync_correlation_matrix() -> [[i64; 8]; 8] {
    let zero_lag = GOLAY_BLOCK_LEN - 1;
    let mut m = [[0i64; 8]; 8];
    for r in 1..=8u8 {
        for s in 1..=8u8 {
            let corr = sync_correlation(r, s).expect("indices in range");
            let max = corr
                .iter()
                .enumerate()
                .filter(|(u, _)| !(r == s && *u == zero_lag))
                .map(|(_, v)| v.abs())
                .max()
                .unwrap_or(0);
            m[r as usize - 1][s as usize - 1] = max;
        }
    }
    m
}

// ─── PPDU assembly ────────────────────────────────────────────────────────

/// Sensing PPDU flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpduKind {
    StandardSensing,
    BrpWithTrn,
    MultistaticSensing,
}

/// Layout parameters for a sensing PPDU.
#[derive(Debug, Clone, PartialEq)]
pub struct PpduSpec {
    pub kind: PpduKind,
    /// Synchronization/channel-estimation TRN subfields (data-field AWV).
    pub p_count: usize,
    /// AWV-sweeping TRN subfields.
    pub m_count: usize,
    /// One beam identifier per M-subfield.
    pub awv_schedule: Vec<u16>,
    /// Ordered STA indices for multistatic Sync fields (empty otherwise).
    pub sync_sta_indices: Vec<u8>,
    /// Zero-padding after the Sync fields (multistatic only), in samples.
    pub padding_len: usize,
}

impl PpduSpec {
    /// A TRN-only PPDU with `p` P-subfields and the given AWV sweep.
    pub fn brp(p_count: usize, awv_schedule: Vec<u16>) -> Self {
        Self {
            kind: PpduKind::BrpWithTrn,
            p_count,
            m_count: awv_schedule.len(),
            awv_schedule,
            sync_sta_indices: Vec::new(),
            padding_len: 0,
        }
    }

    /// A multistatic PPDU carrying one Sync field per responder.
    pub fn multistatic(sync_sta_indices: Vec<u8>, p_count: usize, awv_schedule: Vec<u16>) -> Self {
        Self {
            kind: PpduKind::MultistaticSensing,
            p_count,
            m_count: awv_schedule.len(),
            awv_schedule,
            sync_sta_indices,
            padding_len: 0,
        }
    }
}

/// Logical field labels in an assembled PPDU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldLabel {
    Preamble,
    Sync { sta_index: u8 },
    Padding,
    TrnP { index: usize },
    TrnM { index: usize, awv: u16 },
}

/// Field-boundary map: label plus the sample range it occupies.
pub type FieldMap = Vec<(FieldLabel, Range<usize>)>;

/// Assembles a sensing PPDU: preamble placeholder, multistatic Sync fields
/// plus padding (when applicable), then the TRN field (P-subfields first,
/// then AWV-tagged M-subfields). Returns the sample stream and the boundary
/// map; the map tiles the stream with no gaps or overlaps.
pub fn assemble_sensing_ppdu(
    spec: &PpduSpec,
    tx_sta_index: u8,
) -> Result<(ComplexSequence, FieldMap), WaveformError> {
    assemble_sensing_ppdu_with_preamble(spec, tx_sta_index, DEFAULT_PREAMBLE_LEN)
}

/// [`assemble_sensing_ppdu`] with an explicit preamble-placeholder length.
pub fn assemble_sensing_ppdu_with_preamble(
    spec: &PpduSpec,
    tx_sta_index: u8,
    preamble_len: usize,
) -> Result<(ComplexSequence, FieldMap), WaveformError> {
    if !(1..=8).contains(&tx_sta_index) {
        return Err(WaveformError::StaIndexOutOfRange(tx_sta_index));
    }
    if spec.awv_schedule.len() != spec.m_count {
        return Err(WaveformError::AwvScheduleMismatch {
            m_count: spec.m_count,
            schedule_len: spec.awv_schedule.len(),
        });
    }
    if spec.kind == PpduKind::MultistaticSensing {
        if spec.sync_sta_indices.is_empty() {
            return Err(WaveformError::SyncIndicesInvalid("empty".into()));
        }
        for (i, &r) in spec.sync_sta_indices.iter().enumerate() {
            if !(1..=8).contains(&r) {
                return Err(WaveformError::SyncIndicesInvalid(format!("index {r} outside 1..=8")));
            }
            if spec.sync_sta_indices[..i].contains(&r) {
                return Err(WaveformError::SyncIndicesInvalid(format!("index {r} duplicated")));
            }
        }
        let total = spec.sync_sta_indices.len() * FIELD_LEN + spec.padding_len;
        if !total.is_multiple_of(TRN_UNIT_LEN) {
            return Err(WaveformError::PaddingNotUnitMultiple { total, unit: TRN_UNIT_LEN });
        }
    }

    let mut samples: Vec<Cx> = Vec::new();
    let mut map: FieldMap = Vec::new();
    let push = |samples: &mut Vec<Cx>, map: &mut FieldMap, label: FieldLabel, chunk: &[Cx]| {
        let start = samples.len();
        samples.extend_from_slice(chunk);
        map.push((label, start..samples.len()));
    };

    // Preamble placeholder: a fixed known unit-modulus alternating sequence.
    let preamble: Vec<Cx> = (0..preamble_len)
        .map(|n| Cx::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    push(&mut samples, &mut map, FieldLabel::Preamble, &preamble);

    if spec.kind == PpduKind::MultistaticSensing {
        for &r in &spec.sync_sta_indices {
            let sync = build_sync_subfield(r)?;
            push(&mut samples, &mut map, FieldLabel::Sync { sta_index: r }, sync.samples());
        }
        if spec.padding_len > 0 {
            let pad = vec![Cx::new(0.0, 0.0); spec.padding_len];
            push(&mut samples, &mut map, FieldLabel::Padding, &pad);
        }
    }

    let trn = build_ce_sequence(CeVariant::Ce0);
    for i in 0..spec.p_count {
        push(&mut samples, &mut map, FieldLabel::TrnP { index: i }, trn.samples());
    }
    for (i, &awv) in spec.awv_schedule.iter().enumerate() {
        push(&mut samples, &mut map, FieldLabel::TrnM { index: i, awv }, trn.samples());
    }

    let rate = trn.sample_rate_hz();
    Ok((ComplexSequence::new(samples, rate), map))
}

// ─── Tests ────────────────────────────────────────────────────────────────
