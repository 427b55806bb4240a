//! Time-variant indoor channel: geometric rays, clutter, and application.
//!
//! A [`Scenario`] describes an axis-aligned room with one TX/RX pair (equal
//! positions for monostatic operation) and one moving target on a
//! piecewise-linear waypoint trajectory. [`trace_rays`] emits the line of
//! sight (bistatic only), first-order wall-image reflections, and the target
//! ray with its analytic Doppler; [`ClutterModel`] adds autoregressive
//! target-unrelated perturbations; [`realize_channel`] bins rays into a CIR
//! with carrier phase; [`apply_channel`] convolves a waveform, rotates
//! target-origin energy by its Doppler at the realization time, and adds
//! AWGN at a commanded SNR.
//!
//! Gain amplitudes use the normalized one-way form λ/(4πd) per leg with an
//! RCS multiplier on the target ray; absolute levels are desk-scale
//! conventions, not calibrated link budgets.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;
use rand_chacha::ChaCha8Rng;

use crate::csi::{cir_to_cfr, CsiMatrix};
use crate::rng::complex_gauss;
use crate::seq::ComplexSequence;
use crate::{Cx, SPEED_OF_LIGHT};

/// Default amplitude loss per wall bounce, in dB.
pub const DEFAULT_REFLECTION_LOSS_DB: f64 = 6.0;

// ─── Errors ───────────────────────────────────────────────────────────────

/// Scenario and realization failures.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    /// One or more geometry/parameter violations, each named.
    Validation(Vec<String>),
    /// A ray's delay falls outside the tap window.
    DelayOverflow { ray_index: usize, delay_s: f64, window_s: f64 },
    /// AR coefficient outside (−1, 1).
    UnstableClutter { ar_coefficient: f64 },
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(problems) => {
                write!(f, "scenario validation failed: {}", problems.join("; "))
            }
            Self::DelayOverflow { ray_index, delay_s, window_s } => write!(
                f,
                "ray {ray_index} delay {delay_s} s exceeds the {window_s} s tap window"
            ),
            Self::UnstableClutter { ar_coefficient } => {
                write!(f, "AR coefficient {ar_coefficient} outside (-1, 1)")
            }
        }
    }
}

// ─── Geometry ─────────────────────────────────────────────────────────────

/// A point or direction in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.x, k * self.y, k * self.z)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        Float::sqrt(self.dot(self))
    }

    /// Unit vector toward `o`.
    pub fn direction_to(self, o: Self) -> Self {
        let d = o - self;
        let n = d.norm();
        if n == 0.0 {
            Self::new(0.0, 0.0, 0.0)
        } else {
            d.scale(1.0 / n)
        }
    }
}

impl core::ops::Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl core::ops::Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

// ─── Scenario ─────────────────────────────────────────────────────────────

/// Named room/parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    LivingRoom,
    ConferenceRoom,
    Custom,
}

/// Antenna model shared by TX and RX.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Antenna {
    Isotropic,
    /// Cosine-power beam: unit gain on boresight, half power at
    /// ±beamwidth/2, zero behind the aperture plane.
    Directional { boresight: Vec3, beamwidth_deg: f64 },
}

impl Antenna {
    /// Amplitude gain toward the unit direction `dir`.
    pub fn amplitude_gain(&self, dir: Vec3) -> f64 {
        match self {
            Self::Isotropic => 1.0,
            Self::Directional { boresight, beamwidth_deg } => {
                let b = boresight.scale(1.0 / boresight.norm());
                let cos_theta = b.dot(dir).clamp(-1.0, 1.0);
                if cos_theta <= 0.0 {
                    return 0.0;
                }
                let half = (beamwidth_deg / 2.0).to_radians();
                // cos^n pattern with power −3 dB at the half-beamwidth.
                let n = Float::ln(0.5) / (2.0 * Float::ln(Float::cos(half)));
                Float::powf(cos_theta, n)
            }
        }
    }
}

/// One trajectory sample: the target must be at `pos` at time `t_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t_s: f64,
    pub pos: Vec3,
}

/// Moving point target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetModel {
    /// Piecewise-linear trajectory, strictly increasing in time.
    pub waypoints: Vec<Waypoint>,
    /// Dimensionless radar-cross-section multiplier on the ray gain.
    pub rcs: f64,
}

impl TargetModel {
    /// Position and velocity at `t`; clamps outside the waypoint span
    /// (stationary at the end points).
    pub fn state_at(&self, t: f64) -> (Vec3, Vec3) {
        let first = self.waypoints.first().expect("validated nonempty");
        let last = self.waypoints.last().expect("validated nonempty");
        if t <= first.t_s {
            return (first.pos, Vec3::new(0.0, 0.0, 0.0));
        }
        if t >= last.t_s {
            return (last.pos, Vec3::new(0.0, 0.0, 0.0));
        }
        let seg = self
            .waypoints
            .windows(2)
            .find(|w| t >= w[0].t_s && t < w[1].t_s)
            .expect("t inside span");
        let dt = seg[1].t_s - seg[0].t_s;
        let frac = (t - seg[0].t_s) / dt;
        let velocity = (seg[1].pos - seg[0].pos).scale(1.0 / dt);
        (seg[0].pos + velocity.scale(frac * dt), velocity)
    }
}

/// AR(1) clutter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClutterParams {
    pub ar_coefficient: f64,
    pub innovation_variance: f64,
}

/// A fully resolved evaluation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub preset: Preset,
    /// Room box dimensions (m); walls at 0 and at each dimension.
    pub room: Vec3,
    pub tx_pos: Vec3,
    pub rx_pos: Vec3,
    pub antenna: Antenna,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub target: TargetModel,
    pub clutter: Option<ClutterParams>,
    /// Amplitude loss per wall bounce (dB).
    pub reflection_loss_db: f64,
    pub seed: u64,
}

impl Scenario {
    /// True when TX and RX share a position.
    pub fn is_monostatic(&self) -> bool {
        self.tx_pos == self.rx_pos
    }

    /// Complex-baseband sample rate (one sample per 1/bandwidth).
    pub fn sample_rate_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Carrier wavelength (m).
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Checks geometry and parameter invariants, listing every offender.
    pub fn validate(&self) -> Result<(), ChannelError> {
        let mut problems = Vec::new();
        let mut check_inside = |name: String, p: Vec3| {
            let inside = p.x > 0.0
                && p.x < self.room.x
                && p.y > 0.0
                && p.y < self.room.y
                && p.z > 0.0
                && p.z < self.room.z;
            if !inside {
                problems.push(format!(
                    "{name} ({}, {}, {}) outside the {}×{}×{} m room interior",
                    p.x, p.y, p.z, self.room.x, self.room.y, self.room.z
                ));
            }
        };
        check_inside("tx".into(), self.tx_pos);
        check_inside("rx".into(), self.rx_pos);
        for (i, w) in self.target.waypoints.iter().enumerate() {
            check_inside(format!("target waypoint {i}"), w.pos);
        }
        if self.target.waypoints.is_empty() {
            problems.push("target trajectory has no waypoints".into());
        }
        for w in self.target.waypoints.windows(2) {
            if w[1].t_s <= w[0].t_s {
                problems.push(format!(
                    "waypoint times not strictly increasing at t = {}",
                    w[1].t_s
                ));
            }
        }
        if self.bandwidth_hz <= 0.0 || self.bandwidth_hz.is_nan() {
            problems.push("bandwidth must be positive".into());
        }
        if self.carrier_hz <= self.bandwidth_hz {
            problems.push("carrier must exceed bandwidth".into());
        }
        if self.target.rcs < 0.0 {
            problems.push("rcs must be nonnegative".into());
        }
        if self.reflection_loss_db < 0.0 {
            problems.push("reflection loss must be nonnegative".into());
        }
        if let Some(c) = &self.clutter {
            if c.ar_coefficient.abs() >= 1.0 {
                problems.push(format!("clutter AR coefficient {} not in (-1, 1)", c.ar_coefficient));
            }
            if c.innovation_variance < 0.0 {
                problems.push("clutter innovation variance must be nonnegative".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ChannelError::Validation(problems))
        }
    }
}

/// Resolves a named preset to a validated scenario. `Custom` starts from
/// the living-room defaults; callers then edit fields and re-validate.
pub fn load_scenario(preset: Preset) -> Scenario {
    let scenario = match preset {
        Preset::LivingRoom | Preset::Custom => Scenario {
            preset,
            room: Vec3::new(6.0, 4.0, 2.5),
            tx_pos: Vec3::new(1.0, 2.0, 1.5),
            rx_pos: Vec3::new(5.0, 2.0, 1.5),
            antenna: Antenna::Isotropic,
            carrier_hz: 6.0e9,
            bandwidth_hz: 20.0e6,
            target: TargetModel {
                waypoints: vec![
                    Waypoint { t_s: 0.0, pos: Vec3::new(4.5, 3.0, 1.2) },
                    Waypoint { t_s: 10.0, pos: Vec3::new(1.5, 1.0, 1.2) },
                ],
                rcs: 1.0,
            },
            clutter: Some(ClutterParams { ar_coefficient: 0.9, innovation_variance: 1e-12 }),
            reflection_loss_db: DEFAULT_REFLECTION_LOSS_DB,
            seed: 1,
        },
        Preset::ConferenceRoom => Scenario {
            preset,
            room: Vec3::new(10.0, 6.0, 3.0),
            tx_pos: Vec3::new(1.0, 3.0, 2.0),
            rx_pos: Vec3::new(1.0, 3.0, 2.0),
            antenna: Antenna::Directional {
                boresight: Vec3::new(1.0, 0.0, 0.0),
                beamwidth_deg: 60.0,
            },
            carrier_hz: 60.0e9,
            bandwidth_hz: 1.76e9,
            target: TargetModel {
                waypoints: vec![
                    Waypoint { t_s: 0.0, pos: Vec3::new(8.0, 3.0, 1.5) },
                    Waypoint { t_s: 10.0, pos: Vec3::new(2.0, 3.0, 1.5) },
                ],
                rcs: 1.0,
            },
            clutter: None,
            reflection_loss_db: DEFAULT_REFLECTION_LOSS_DB,
            seed: 2,
        },
    };
    debug_assert!(scenario.validate().is_ok());
    scenario
}

// ─── Rays ─────────────────────────────────────────────────────────────────

/// What produced a ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayOrigin {
    Target,
    Static,
    Clutter,
}

/// One propagation path.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub delay_s: f64,
    /// Complex gain: path loss, reflection loss, antenna pattern (and state
    /// for clutter rays). Carrier phase is applied at realization.
    pub gain: Cx,
    pub doppler_hz: f64,
    pub origin: RayOrigin,
}

/// One-way amplitude λ/(4πd), guarded against degenerate distances.
fn spread_amplitude(wavelength: f64, distance: f64) -> f64 {
    wavelength / (4.0 * core::f64::consts::PI * distance.max(1e-3))
}

/// Emits the geometric rays of a scenario at time `t`: the LoS path
/// (bistatic only), one first-order image per wall, and the moving-target
/// ray with Doppler `−(1/λ)·d(path)/dt` (positive when approaching).
pub fn trace_rays(s: &Scenario, t: f64) -> Vec<Ray> {
    let lambda = s.wavelength_m();
    let mut rays = Vec::new();
    let pattern = |at: Vec3, toward: Vec3| s.antenna.amplitude_gain(at.direction_to(toward));

    // Line of sight; a monostatic sensor has no TX→RX path.
    if !s.is_monostatic() {
        let d = (s.rx_pos - s.tx_pos).norm();
        let gain = spread_amplitude(lambda, d)
            * pattern(s.tx_pos, s.rx_pos)
            * pattern(s.rx_pos, s.tx_pos);
        rays.push(Ray {
            delay_s: d / SPEED_OF_LIGHT,
            gain: Cx::new(gain, 0.0),
            doppler_hz: 0.0,
            origin: RayOrigin::Static,
        });
    }

    // First-order wall images. For interior endpoints of an axis-aligned
    // box the specular point always lies on the wall, so no visibility
    // check is needed.
    let refl_amp = Float::powf(10.0, -s.reflection_loss_db / 20.0);
    let axis = |p: Vec3, k: usize| [p.x, p.y, p.z][k];
    let walls = [(0, 0.0), (0, s.room.x), (1, 0.0), (1, s.room.y), (2, 0.0), (2, s.room.z)];
    for (k, wall) in walls {
        let mut image = s.tx_pos;
        match k {
            0 => image.x = 2.0 * wall - image.x,
            1 => image.y = 2.0 * wall - image.y,
            _ => image.z = 2.0 * wall - image.z,
        }
        let d = (s.rx_pos - image).norm();
        // Specular point: where the image→RX segment crosses the wall
        // plane, found from the linear axis-k coordinate.
        let frac = (wall - axis(image, k)) / (axis(s.rx_pos, k) - axis(image, k));
        let specular = image + (s.rx_pos - image).scale(frac);
        let gain = spread_amplitude(lambda, d)
            * refl_amp
            * pattern(s.tx_pos, specular)
            * pattern(s.rx_pos, specular);
        rays.push(Ray {
            delay_s: d / SPEED_OF_LIGHT,
            gain: Cx::new(gain, 0.0),
            doppler_hz: 0.0,
            origin: RayOrigin::Static,
        });
    }

    // Target ray: TX→target→RX (monostatic: 2× one-way).
    let (pos, vel) = s.target.state_at(t);
    let d1 = (pos - s.tx_pos).norm();
    let d2 = (pos - s.rx_pos).norm();
    let u1 = s.tx_pos.direction_to(pos);
    let u2 = s.rx_pos.direction_to(pos);
    let path_rate = vel.dot(u1) + vel.dot(u2);
    let gain = lambda * Float::sqrt(s.target.rcs)
        / (4.0 * core::f64::consts::PI * d1.max(1e-3) * d2.max(1e-3))
        * pattern(s.tx_pos, pos)
        * pattern(s.rx_pos, pos);
    rays.push(Ray {
        delay_s: (d1 + d2) / SPEED_OF_LIGHT,
        gain: Cx::new(gain, 0.0),
        doppler_hz: -path_rate / lambda,
        origin: RayOrigin::Target,
    });

    rays
}

// ─── Clutter ──────────────────────────────────────────────────────────────

/// Per-tap AR(1) clutter state: `x ← a·x + innovation`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterModel {
    pub ar_coefficient: f64,
    pub innovation_variance: f64,
    states: Vec<Cx>,
}

impl ClutterModel {
    /// Zero-initialized model over `n_taps` taps.
    pub fn new(params: ClutterParams, n_taps: usize) -> Result<Self, ChannelError> {
        if params.ar_coefficient.abs() >= 1.0 {
            return Err(ChannelError::UnstableClutter { ar_coefficient: params.ar_coefficient });
        }
        Ok(Self {
            ar_coefficient: params.ar_coefficient,
            innovation_variance: params.innovation_variance,
            states: vec![Cx::new(0.0, 0.0); n_taps],
        })
    }

    /// Current per-tap gains as clutter rays at the given sample rate.
    pub fn rays(&self, sample_rate_hz: f64) -> Vec<Ray> {
        self.states
            .iter()
            .enumerate()
            .map(|(tap, &gain)| Ray {
                delay_s: tap as f64 / sample_rate_hz,
                gain,
                doppler_hz: 0.0,
                origin: RayOrigin::Clutter,
            })
            .collect()
    }
}

/// Advances every tap one step and returns the new per-tap gains.
pub fn clutter_step(model: &mut ClutterModel, rng: &mut ChaCha8Rng) -> Vec<Cx> {
    for state in &mut model.states {
        let innovation = complex_gauss(rng, model.innovation_variance);
        *state = *state * model.ar_coefficient + innovation;
    }
    model.states.clone()
}

// ─── Realization ──────────────────────────────────────────────────────────

/// A channel at one instant: binned CIR plus the rays that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Rotation reference for target-origin energy in [`apply_channel`].
    pub time_s: f64,
    pub rays: Vec<Ray>,
    /// Complex taps at `sample_rate_hz`, carrier phase included.
    pub cir: Vec<Cx>,
    pub sample_rate_hz: f64,
    pub carrier_hz: f64,
    /// Target-origin contributions as (tap, contribution, doppler Hz).
    target_taps: Vec<(usize, Cx, f64)>,
}

impl ChannelRealization {
    /// The same realization with a new rotation reference time.
    pub fn with_time(&self, time_s: f64) -> Self {
        let mut c = self.clone();
        c.time_s = time_s;
        c
    }

    /// CIR with target taps rotated to the realization time.
    pub fn effective_cir(&self) -> Vec<Cx> {
        let mut cir = self.cir.clone();
        for &(tap, contribution, doppler) in &self.target_taps {
            let theta = 2.0 * core::f64::consts::PI * doppler * self.time_s;
            let rotated = contribution * Cx::new(Float::cos(theta), Float::sin(theta));
            cir[tap] += rotated - contribution;
        }
        cir
    }

    /// CFR over `n_subcarriers` uniform bins across the sample-rate span.
    pub fn cfr(&self, n_subcarriers: usize) -> CsiMatrix {
        let cir = self.effective_cir();
        assert!(
            cir.len() <= n_subcarriers,
            "CIR of {} taps does not fit {} subcarriers",
            cir.len(),
            n_subcarriers
        );
        let cfr = cir_to_cfr(&cir, n_subcarriers, 1);
        CsiMatrix::new(cfr, n_subcarriers, 1, 1, self.sample_rate_hz).expect("finite by construction")
    }

    /// Σ|gain|² of the contributing rays.
    pub fn ray_energy(&self) -> f64 {
        self.rays.iter().map(|r| r.gain.norm_sqr()).sum()
    }

    /// Σ|tap|² of the binned CIR.
    pub fn cir_energy(&self) -> f64 {
        self.cir.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Bins rays into an `n_taps`-tap CIR at `sample_rate_hz`, applying the
/// carrier flight phase `e^{−j2π·f_c·delay}` per ray. `time_s` is recorded
/// as the rotation reference for target-origin energy.
pub fn realize_channel(
    rays: &[Ray],
    sample_rate_hz: f64,
    n_taps: usize,
    carrier_hz: f64,
    time_s: f64,
) -> Result<ChannelRealization, ChannelError> {
    let mut cir = vec![Cx::new(0.0, 0.0); n_taps];
    let mut target_taps = Vec::new();
    for (i, ray) in rays.iter().enumerate() {
        let tap = Float::round(ray.delay_s * sample_rate_hz) as i64;
        if tap < 0 || tap as usize >= n_taps {
            return Err(ChannelError::DelayOverflow {
                ray_index: i,
                delay_s: ray.delay_s,
                window_s: n_taps as f64 / sample_rate_hz,
            });
        }
        let theta = -2.0 * core::f64::consts::PI * carrier_hz * ray.delay_s;
        let contribution = ray.gain * Cx::new(Float::cos(theta), Float::sin(theta));
        cir[tap as usize] += contribution;
        if ray.origin == RayOrigin::Target {
            target_taps.push((tap as usize, contribution, ray.doppler_hz));
        }
    }
    Ok(ChannelRealization {
        time_s,
        rays: rays.to_vec(),
        cir,
        sample_rate_hz,
        carrier_hz,
        target_taps,
    })
}

/// Convolves `tx` with the realization's CIR (target taps rotated by
/// `e^{j2π·doppler·time}`), then adds complex AWGN so that measured signal
/// power over noise power equals `snr_db`. An infinite `snr_db` is the
/// noiseless sentinel. Output length is `tx.len() + n_taps − 1`.
pub fn apply_channel(
    tx: &ComplexSequence,
    c: &ChannelRealization,
    snr_db: f64,
    rng: &mut ChaCha8Rng,
) -> ComplexSequence {
    assert_eq!(
        tx.sample_rate_hz(),
        c.sample_rate_hz,
        "waveform and channel sample rates must match"
    );
    let cir = c.effective_cir();
    let out_len = tx.len() + cir.len() - 1;
    let mut y = vec![Cx::new(0.0, 0.0); out_len];
    for (i, &tap) in cir.iter().enumerate() {
        if tap == Cx::new(0.0, 0.0) {
            continue;
        }
        for (n, &x) in tx.samples().iter().enumerate() {
            y[n + i] += x * tap;
        }
    }
    if snr_db.is_finite() {
        let signal_power: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / out_len as f64;
        let noise_var = signal_power / Float::powf(10.0, snr_db / 10.0);
        for v in &mut y {
            *v += complex_gauss(rng, noise_var);
        }
    }
    ComplexSequence::new(y, tx.sample_rate_hz())
}

// ─── Tests ────────────────────────────────────────────────────────────────
