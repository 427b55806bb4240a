//! Ambiguity-function evaluation for sensing waveforms.
//!
//! Implements the discrete delay–Doppler ambiguity function
//! `X(τ, f_d) = Σ_n a[n]·conj(b[n−τ])·e^{j2π f_d n / fs}` (auto when `a`
//! and `b` coincide, cross otherwise), low-ambiguity-zone (LAZ) metrics over
//! a delay/Doppler window, and the zero-Doppler correlation cross-section.
//! Correlations are aperiodic: samples outside a sequence's support read as
//! zero.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::seq::ComplexSequence;
use crate::Cx;

/// Points in the default Doppler grid (odd, so 0 Hz is always present).
pub const DEFAULT_DOPPLER_POINTS: usize = 201;

// ─── Errors ───────────────────────────────────────────────────────────────

/// Failures while building or querying ambiguity maps.
#[derive(Debug, Clone, PartialEq)]
pub enum AmbiguityError {
    /// `a` and `b` disagree on sample rate.
    SampleRateMismatch { a_hz: f64, b_hz: f64 },
    /// Requested delay extent is longer than the shorter input.
    MaxDelayExceedsDuration { max_delay_s: f64, duration_s: f64 },
    /// Doppler grid is empty or lacks the mandatory 0 Hz point.
    DopplerGridInvalid,
    /// LAZ window reaches past the map's axes.
    ZoneExceedsMap { requested: (f64, f64), available: (f64, f64) },
}

impl fmt::Display for AmbiguityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SampleRateMismatch { a_hz, b_hz } => {
                write!(f, "sample-rate mismatch: {a_hz} Hz vs {b_hz} Hz")
            }
            Self::MaxDelayExceedsDuration { max_delay_s, duration_s } => write!(
                f,
                "max delay {max_delay_s} s exceeds shorter sequence duration {duration_s} s"
            ),
            Self::DopplerGridInvalid => {
                write!(f, "doppler grid must be non-empty and contain 0 Hz")
            }
            Self::ZoneExceedsMap { requested, available } => write!(
                f,
                "zone ({} s, {} Hz) exceeds map extent ({} s, {} Hz)",
                requested.0, requested.1, available.0, available.1
            ),
        }
    }
}

// ─── Types ────────────────────────────────────────────────────────────────

/// Sampled |X(τ, f_d)|² grid with its axes.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityMap {
    /// Lag values in seconds, ascending, always containing 0.
    pub delays_s: Vec<f64>,
    /// Doppler values in Hz, in caller-supplied order, containing 0.
    pub dopplers_hz: Vec<f64>,
    /// Squared magnitudes indexed `[doppler][delay]`.
    pub magnitudes: Vec<Vec<f64>>,
}

impl AmbiguityMap {
    /// Index of the 0 s lag on the delay axis.
    pub fn zero_delay_index(&self) -> usize {
        self.delays_s
            .iter()
            .position(|&d| d == 0.0)
            .expect("delay axis always contains lag 0")
    }

    /// Index of the 0 Hz point on the Doppler axis.
    pub fn zero_doppler_index(&self) -> usize {
        self.dopplers_hz
            .iter()
            .position(|&f| f == 0.0)
            .expect("doppler axis always contains 0 Hz")
    }

    /// The |X(τ, 0)|² row.
    pub fn zero_doppler_row(&self) -> &[f64] {
        &self.magnitudes[self.zero_doppler_index()]
    }
}

/// Low-ambiguity-zone summary of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct LazMetrics {
    /// |X(0,0)|² for auto maps; 0 reference for cross maps.
    pub peak: f64,
    /// Largest |X|² in the zone, excluding the (0,0) cell for auto maps.
    pub max_sidelobe: f64,
    /// 10·log10(peak / max_sidelobe); `+∞` for a perfect thumbtack;
    /// absent for cross maps where no mainlobe exists.
    pub peak_to_sidelobe_db: Option<f64>,
    /// The (max delay s, max Doppler Hz) window the metrics cover.
    pub zone: (f64, f64),
}

// ─── Operations ───────────────────────────────────────────────────────────

/// Maximum Doppler bound `f_max = f_c · v_max / c` for a LAZ. Uses the
/// rounded propagation speed so the canonical 60 GHz / 5 m/s configuration
/// yields exactly 1000 Hz, as the bound is quoted.
pub fn max_doppler_for(carrier_hz: f64, speed_mps: f64) -> f64 {
    carrier_hz * speed_mps / crate::NOMINAL_SPEED_OF_LIGHT
}

/// Symmetric Doppler grid of [`DEFAULT_DOPPLER_POINTS`] values spanning
/// ±`max_doppler_hz`, with 0 Hz exactly at the center.
pub fn default_doppler_grid(max_doppler_hz: f64) -> Vec<f64> {
    let half = (DEFAULT_DOPPLER_POINTS / 2) as isize;
    (-half..=half)
        .map(|i| max_doppler_hz * i as f64 / half as f64)
        .collect()
}

/// Complex aperiodic cross-correlation `Σ_n a[n]·conj(b[n−τ])` over every
/// lag with any overlap: τ = −(len_b−1) ..= len_a−1, ascending. Lag 0 sits
/// at index `len_b − 1`.
pub fn complex_cross_correlation(
    a: &ComplexSequence,
    b: &ComplexSequence,
) -> Result<Vec<Cx>, AmbiguityError> {
    check_rates(a, b)?;
    Ok(xcorr_rotated(a.samples(), b.samples()))
}

/// Magnitude cross-correlation |Σ_n a[n]·conj(b[n−τ])| over every lag; the
/// square root of an ambiguity map's zero-Doppler row.
pub fn cross_correlation(
    a: &ComplexSequence,
    b: &ComplexSequence,
) -> Result<Vec<f64>, AmbiguityError> {
    Ok(complex_cross_correlation(a, b)?.iter().map(|c| c.norm()).collect())
}

/// Evaluates |X(τ, f_d)|² on integer-sample lags |τ| ≤ `max_delay_s` and the
/// supplied Doppler grid (which must contain 0 Hz).
pub fn ambiguity_map(
    a: &ComplexSequence,
    b: &ComplexSequence,
    max_delay_s: f64,
    doppler_grid: &[f64],
) -> Result<AmbiguityMap, AmbiguityError> {
    check_rates(a, b)?;
    let fs = a.sample_rate_hz();
    let min_duration = a.duration_s().min(b.duration_s());
    if max_delay_s > min_duration * (1.0 + 1e-12) {
        return Err(AmbiguityError::MaxDelayExceedsDuration {
            max_delay_s,
            duration_s: min_duration,
        });
    }
    if doppler_grid.is_empty() || !doppler_grid.contains(&0.0) {
        return Err(AmbiguityError::DopplerGridInvalid);
    }

    let hard_cap = a.len().max(b.len()) - 1;
    let lag_max = (Float::floor((max_delay_s * fs) + 1e-9) as usize).min(hard_cap);
    let delays_s: Vec<f64> = (-(lag_max as i64)..=lag_max as i64)
        .map(|lag| lag as f64 / fs)
        .collect();

    let mut magnitudes = Vec::with_capacity(doppler_grid.len());
    let mut rotated = vec![Cx::new(0.0, 0.0); a.len()];
    for &fd in doppler_grid {
        let phi = 2.0 * core::f64::consts::PI * fd / fs;
        for (n, (dst, src)) in rotated.iter_mut().zip(a.samples()).enumerate() {
            let angle = phi * n as f64;
            *dst = src * Cx::new(Float::cos(angle), Float::sin(angle));
        }
        let row: Vec<f64> = (-(lag_max as i64)..=lag_max as i64)
            .map(|lag| xcorr_at(&rotated, b.samples(), lag).norm_sqr())
            .collect();
        magnitudes.push(row);
    }

    Ok(AmbiguityMap { delays_s, dopplers_hz: doppler_grid.to_vec(), magnitudes })
}

/// Summarizes a map over the window |τ| ≤ `max_delay_s`, |f_d| ≤
/// `max_doppler_hz`. Auto maps read the peak at (0,0) and exclude exactly
/// that cell from the sidelobe max; cross maps report the whole-zone max
/// with a 0 peak reference and no dB ratio.
pub fn laz_metrics(
    map: &AmbiguityMap,
    max_delay_s: f64,
    max_doppler_hz: f64,
    is_auto: bool,
) -> Result<LazMetrics, AmbiguityError> {
    let delay_extent = map.delays_s.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let doppler_extent = map.dopplers_hz.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    if max_delay_s > delay_extent * (1.0 + 1e-12) + f64::MIN_POSITIVE
        || max_doppler_hz > doppler_extent * (1.0 + 1e-12) + f64::MIN_POSITIVE
    {
        return Err(AmbiguityError::ZoneExceedsMap {
            requested: (max_delay_s, max_doppler_hz),
            available: (delay_extent, doppler_extent),
        });
    }

    let t0 = map.zero_delay_index();
    let d0 = map.zero_doppler_index();
    let peak = if is_auto { map.magnitudes[d0][t0] } else { 0.0 };

    let mut max_sidelobe = 0.0f64;
    for (d, row) in map.magnitudes.iter().enumerate() {
        if map.dopplers_hz[d].abs() > max_doppler_hz {
            continue;
        }
        for (t, &value) in row.iter().enumerate() {
            if map.delays_s[t].abs() > max_delay_s || (is_auto && d == d0 && t == t0) {
                continue;
            }
            max_sidelobe = max_sidelobe.max(value);
        }
    }

    let peak_to_sidelobe_db = if is_auto {
        Some(if max_sidelobe == 0.0 {
            f64::INFINITY
        } else {
            10.0 * Float::log10(peak / max_sidelobe)
        })
    } else {
        None
    };

    Ok(LazMetrics { peak, max_sidelobe, peak_to_sidelobe_db, zone: (max_delay_s, max_doppler_hz) })
}

// ─── Internals ────────────────────────────────────────────────────────────

fn check_rates(a: &ComplexSequence, b: &ComplexSequence) -> Result<(), AmbiguityError> {
    if a.sample_rate_hz() != b.sample_rate_hz() {
        return Err(AmbiguityError::SampleRateMismatch {
            a_hz: a.sample_rate_hz(),
            b_hz: b.sample_rate_hz(),
        });
    }
    Ok(())
}

/// `Σ_n x[n]·conj(y[n−lag])` with zero padding outside support.
fn xcorr_at(x: &[Cx], y: &[Cx], lag: i64) -> Cx {
    let (nx, ny) = (x.len() as i64, y.len() as i64);
    let lo = lag.max(0);
    let hi = nx.min(ny + lag);
    let mut acc = Cx::new(0.0, 0.0);
    for n in lo..hi {
        acc += x[n as usize] * y[(n - lag) as usize].conj();
    }
    acc
}

fn xcorr_rotated(x: &[Cx], y: &[Cx]) -> Vec<Cx> {
    let lags = -(y.len() as i64 - 1)..=(x.len() as i64 - 1);
    lags.map(|lag| xcorr_at(x, y, lag)).collect()
}

// ─── Tests ────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::waveform::{build_ce_sequence, build_sync_subfield, sync_correlation, CeVariant};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_sequence(n: usize, label: &str) -> ComplexSequence {
        let mut r = rng::stream(7, label, 0);
        let samples = (0..n)
            .map(|_| Cx::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5))
            .collect();
        ComplexSequence::new(samples, 20.0e6)
    }

    #[test]
    fn zero_lag_zero_doppler_equals_energy_squared() {
        let ce0 = build_ce_sequence(CeVariant::Ce0);
        let map = ambiguity_map(&ce0, &ce0, 1e-6, &[0.0]).unwrap();
        let center = map.magnitudes[0][map.zero_delay_index()];
        assert_eq!(center, 1024.0 * 1024.0);

        let s = random_sequence(96, "energy");
        let m = ambiguity_map(&s, &s, 1e-6, &[0.0]).unwrap();
        let c = m.magnitudes[0][m.zero_delay_index()];
        assert_relative_eq!(c, s.energy() * s.energy(), max_relative = 1e-12);
    }

    #[test]
    fn auto_map_magnitude_symmetric_under_joint_negation() {
        let s = random_sequence(64, "symmetry");
        let grid = [-400.0, -150.0, 0.0, 150.0, 400.0];
        let map = ambiguity_map(&s, &s, s.duration_s(), &grid).unwrap();
        let (nd, nt) = (grid.len(), map.delays_s.len());
        for d in 0..nd {
            for t in 0..nt {
                assert_relative_eq!(
                    map.magnitudes[d][t],
                    map.magnitudes[nd - 1 - d][nt - 1 - t],
                    max_relative = 1e-9,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn zero_doppler_row_is_squared_cross_correlation() {
        let a = random_sequence(128, "row-a");
        let b = random_sequence(128, "row-b");
        let grid = default_doppler_grid(500.0);
        let map = ambiguity_map(&a, &b, a.duration_s(), &grid).unwrap();
        let row = map.zero_doppler_row();
        let xc = cross_correlation(&a, &b).unwrap();
        assert_eq!(row.len(), xc.len());
        for (&sq, &mag) in row.iter().zip(&xc) {
            assert_relative_eq!(sq.sqrt(), mag, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn scaling_by_alpha_scales_magnitudes_by_alpha_fourth() {
        let s = random_sequence(48, "scale");
        let scaled = ComplexSequence::new(
            s.samples().iter().map(|&x| 3.0 * x).collect(),
            s.sample_rate_hz(),
        );
        let grid = [-200.0, 0.0, 200.0];
        let base = ambiguity_map(&s, &s, s.duration_s(), &grid).unwrap();
        let big = ambiguity_map(&scaled, &scaled, s.duration_s(), &grid).unwrap();
        for (rb, rs) in big.magnitudes.iter().zip(&base.magnitudes) {
            for (&vb, &vs) in rb.iter().zip(rs) {
                assert_relative_eq!(vb, 81.0 * vs, max_relative = 1e-9, epsilon = 1e-9);
            }
        }
        let extent = *base.delays_s.last().unwrap();
        let mb = laz_metrics(&base, extent, 200.0, true).unwrap();
        let ms = laz_metrics(&big, extent, 200.0, true).unwrap();
        assert_relative_eq!(
            mb.peak_to_sidelobe_db.unwrap(),
            ms.peak_to_sidelobe_db.unwrap(),
            max_relative = 1e-9,
            epsilon = 1e-9
        );
    }

    #[test]
    fn ce0_aaf_is_flat_along_doppler_inside_the_zone() {
        // At 20 MHz / 1024 samples the worst per-delay variation over
        // |f_d| ≤ 1000 Hz is the Dirichlet droop at lag 0, ≈0.86% of the
        // peak — inside the 1% bound.
        let ce0 = build_ce_sequence(CeVariant::Ce0);
        let grid = default_doppler_grid(1000.0);
        let map = ambiguity_map(&ce0, &ce0, 16.0 / ce0.sample_rate_hz(), &grid).unwrap();
        let peak = map.magnitudes[map.zero_doppler_index()][map.zero_delay_index()];
        for t in 0..map.delays_s.len() {
            let column = map.magnitudes.iter().map(|row| row[t]);
            let max = column.clone().fold(f64::MIN, f64::max);
            let min = column.fold(f64::MAX, f64::min);
            assert!(
                (max - min) / peak < 0.01,
                "delay {} s varies by {}",
                map.delays_s[t],
                (max - min) / peak
            );
        }
    }

    #[test]
    fn ce0_ce1_caf_stays_far_below_the_aaf_peak_in_the_zone() {
        let ce0 = build_ce_sequence(CeVariant::Ce0);
        let ce1 = build_ce_sequence(CeVariant::Ce1);
        let grid = default_doppler_grid(1000.0);
        let zone_delay = 127.0 / ce0.sample_rate_hz();
        let map = ambiguity_map(&ce0, &ce1, zone_delay, &grid).unwrap();
        let metrics = laz_metrics(&map, zone_delay, 1000.0, false).unwrap();
        assert_eq!(metrics.peak, 0.0);
        assert!(metrics.peak_to_sidelobe_db.is_none());
        let aaf_peak = 1024.0 * 1024.0;
        assert!(metrics.max_sidelobe > 0.0);
        assert!(metrics.max_sidelobe / aaf_peak < 0.002);
    }

    #[test]
    fn laz_bound_for_sixty_gigahertz_walker() {
        // The canonical 60 GHz / 5 m/s configuration is quoted as 1000 Hz.
        assert_eq!(max_doppler_for(60.0e9, 5.0), 1000.0);
        assert_eq!(max_doppler_for(6.0e9, 5.0), 100.0);
    }

    #[test]
    fn thumbtack_map_reports_infinite_ratio() {
        let mut magnitudes = vec![vec![0.0; 5]; 3];
        magnitudes[1][2] = 42.0;
        let map = AmbiguityMap {
            delays_s: vec![-2e-7, -1e-7, 0.0, 1e-7, 2e-7],
            dopplers_hz: vec![-100.0, 0.0, 100.0],
            magnitudes,
        };
        let m = laz_metrics(&map, 2e-7, 100.0, true).unwrap();
        assert_eq!(m.peak, 42.0);
        assert_eq!(m.max_sidelobe, 0.0);
        assert_eq!(m.peak_to_sidelobe_db, Some(f64::INFINITY));
    }

    #[test]
    fn zero_doppler_zone_reproduces_correlation_maxima() {
        let a = random_sequence(64, "zone-a");
        let b = random_sequence(64, "zone-b");
        let map = ambiguity_map(&a, &b, a.duration_s(), &[0.0]).unwrap();
        let m = laz_metrics(&map, *map.delays_s.last().unwrap(), 0.0, false).unwrap();
        let best = cross_correlation(&a, &b)
            .unwrap()
            .into_iter()
            .fold(0.0f64, f64::max);
        assert_relative_eq!(m.max_sidelobe, best * best, max_relative = 1e-9);
    }

    #[test]
    fn sync_subfield_correlations_match_published_pattern() {
        // Full-sequence magnitude correlation: the subfield is its own
        // matched filter with peak 1024 at lag 0.
        let s1 = build_sync_subfield(1).unwrap();
        let auto = cross_correlation(&s1, &s1).unwrap();
        let best = auto.iter().cloned().fold(0.0f64, f64::max);
        assert_eq!(best, 1024.0);
        assert_eq!(auto[s1.len() - 1], 1024.0);

        // The published per-pair numbers are stated for the synchronized
        // Golay correlator (block-aligned complementary sums): zero within
        // each group of four, a pinned low plateau across groups.
        let within = sync_correlation(2, 4).unwrap();
        assert!(within.iter().all(|&v| v == 0));
        let cross_max = sync_correlation(1, 5).unwrap().iter().map(|v| v.abs()).max().unwrap();
        assert_eq!(cross_max, 76);
        assert!(cross_max < 1024);
    }

    #[test]
    fn rejects_bad_configurations() {
        let a = random_sequence(32, "err");
        let b = ComplexSequence::new(a.samples().to_vec(), 40.0e6);
        assert!(matches!(
            ambiguity_map(&a, &b, 1e-7, &[0.0]),
            Err(AmbiguityError::SampleRateMismatch { .. })
        ));
        assert!(matches!(
            cross_correlation(&a, &b),
            Err(AmbiguityError::SampleRateMismatch { .. })
        ));
        assert!(matches!(
            ambiguity_map(&a, &a, 1.0, &[0.0]),
            Err(AmbiguityError::MaxDelayExceedsDuration { .. })
        ));
        assert!(matches!(
            ambiguity_map(&a, &a, 1e-7, &[100.0]),
            Err(AmbiguityError::DopplerGridInvalid)
        ));
        let map = ambiguity_map(&a, &a, 1e-7, &[0.0]).unwrap();
        assert!(matches!(
            laz_metrics(&map, 1.0, 0.0, true),
            Err(AmbiguityError::ZoneExceedsMap { .. })
        ));
    }

    #[test]
    fn default_grid_is_symmetric_and_contains_zero() {
        let g = default_doppler_grid(1000.0);
        assert_eq!(g.len(), DEFAULT_DOPPLER_POINTS);
        assert_eq!(g[0], -1000.0);
        assert_eq!(g[g.len() - 1], 1000.0);
        assert_eq!(g[g.len() / 2], 0.0);
    }
}
