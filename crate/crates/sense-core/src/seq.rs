//! Baseband sample sequences shared by every PHY-facing module.

use alloc::vec::Vec;

use crate::Cx;

/// Default chip/sample rate for constructed sequences (20 MHz baseband).
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 20.0e6;

/// A sampled complex baseband waveform with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    samples: Vec<Cx>,
    sample_rate_hz: f64,
}

impl ComplexSequence {
    /// Wraps samples at an explicit sample rate.
    ///
    /// # Panics
    /// Panics if `samples` is empty, any amplitude is non-finite, or the
    /// rate is not a positive finite number — constructed sequences carry
    /// finite energy by contract.
    pub fn new(samples: Vec<Cx>, sample_rate_hz: f64) -> Self {
        assert!(!samples.is_empty(), "sequence must be nonempty");
        assert!(
            samples.iter().all(|s| s.re.is_finite() && s.im.is_finite()),
            "sequence amplitudes must be finite"
        );
        assert!(
            sample_rate_hz.is_finite() && sample_rate_hz > 0.0,
            "sample rate must be positive"
        );
        Self { samples, sample_rate_hz }
    }

    /// Builds a real ±1 chip sequence at the default rate.
    pub fn from_chips(chips: &[i8]) -> Self {
        let samples = chips.iter().map(|&c| Cx::new(f64::from(c), 0.0)).collect();
        Self::new(samples, DEFAULT_SAMPLE_RATE_HZ)
    }

    /// Returns the same sequence retagged with a different sample rate.
    pub fn with_sample_rate(mut self, sample_rate_hz: f64) -> Self {
        assert!(sample_rate_hz.is_finite() && sample_rate_hz > 0.0);
        self.sample_rate_hz = sample_rate_hz;
        self
    }

    pub fn samples(&self) -> &[Cx] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sum of |sample|² over the sequence.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Duration in seconds at the tagged sample rate.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chips_have_unit_energy_per_sample() {
        let s = ComplexSequence::from_chips(&[1, -1, 1, 1]);
        assert_eq!(s.len(), 4);
        assert_eq!(s.energy(), 4.0);
        assert_eq!(s.sample_rate_hz(), DEFAULT_SAMPLE_RATE_HZ);
    }

    #[test]
    #[should_panic(expected = "nonempty")]
    fn empty_sequence_rejected() {
        let _ = ComplexSequence::new(Vec::new(), 1.0);
    }
}
