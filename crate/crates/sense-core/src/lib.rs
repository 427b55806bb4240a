//! Core algorithms for a desk-scale WLAN-sensing stack.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure, deterministic
//! computation: PHY sequence construction (Golay pairs, CE fields, per-STA
//! Sync subfields, sensing PPDUs), ambiguity-function evaluation, CSI
//! quantization/feedback codecs, a geometric indoor channel with a moving
//! target and autoregressive clutter, the sensing MAC procedures (sub-7 GHz
//! trigger-based and non-trigger-based exchanges, DMG bursts, sensing by
//! proxy), and range-Doppler estimation with CFAR detection and RMSE
//! evaluation. File formats, CLI plumbing, and anything that touches the OS
//! live in the companion `sense-lab` crate.
//!
//! All randomness flows through [`rng`] streams keyed by `(seed, purpose,
//! trial)`, so every result in the crate is reproducible bit-for-bit.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod ambiguity;
pub mod channel;
pub mod csi;
pub mod estimation;
pub mod mac;
pub mod rng;
pub mod seq;
pub mod waveform;

pub use seq::ComplexSequence;

/// Complex baseband sample type used throughout the crate.
pub type Cx = num_complex::Complex<f64>;

/// Speed of light in m/s, the single propagation constant of the stack.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Rounded propagation speed used in published rule-of-thumb bounds (e.g.
/// the 60 GHz / 5 m/s LAZ Doppler limit of exactly 1000 Hz). Geometry uses
/// [`SPEED_OF_LIGHT`]; only quoted design bounds use this value.
pub const NOMINAL_SPEED_OF_LIGHT: f64 = 3.0e8;
