//! Deterministic sensing-procedure engine.
//!
//! [`SensingEngine`] executes the WLAN sensing MAC procedures over an
//! idealized medium: capabilities exchange, session setup/termination,
//! trigger-based (TB) and non-TB measurement exchanges, DMG bursts in all
//! six exchange flavors, and sensing-by-proxy. Every run yields an ordered
//! [`EventTrace`] plus measurement and report records.
//!
//! The medium model is happy-path: no contention, retransmission, or loss;
//! consecutive frames in an exchange are spaced by exactly one SIFS. Frame
//! contents are symbolic tags with parameters, not bit-level encodings.
//! Channel observations enter through a caller-supplied hook
//! `(tx_sta, rx_sta, time) → CsiMatrix`, so identical inputs always produce
//! byte-identical traces.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::csi::{csi_variation, encode_feedback, CsiMatrix, FeedbackReport, QuantConfig, ReportType};
use crate::waveform::{assemble_sensing_ppdu, FieldMap, PpduSpec};

/// SIFS for sub-7 GHz procedures (s).
pub const SIFS_SUB7_S: f64 = 16e-6;
/// SIFS for DMG (60 GHz) procedures (s).
pub const SIFS_DMG_S: f64 = 3e-6;
/// Symbolic sector count for the passive beacon sweep.
pub const BEACON_SECTORS: usize = 4;
/// Destination id standing for a broadcast frame.
pub const BROADCAST: StaId = StaId::MAX;

/// Station identifier.
pub type StaId = u16;

// ─── Errors ───────────────────────────────────────────────────────────────

/// Procedure failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MacError {
    UnknownSta(StaId),
    /// No sounding direction exists between the two stations.
    NegotiationFailure { a: StaId, b: StaId },
    /// Sessions require a prior capabilities exchange with each peer.
    CapabilitiesNotExchanged { a: StaId, b: StaId },
    DuplicateSession(u32),
    UnknownSession(u32),
    /// A station's role in the procedure contradicts its profile.
    RoleError(String),
    /// Malformed plan, schedule, or attribute set.
    Config(String),
}

impl fmt::Display for MacError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnknownSta(id) => write!(f, "station {id} is not registered"),
            Self::NegotiationFailure { a, b } => {
                write!(f, "stations {a} and {b} share no sounding direction")
            }
            Self::CapabilitiesNotExchanged { a, b } => {
                write!(f, "stations {a} and {b} have not exchanged capabilities")
            }
            Self::DuplicateSession(id) => write!(f, "session id {id} already in use"),
            Self::UnknownSession(id) => write!(f, "session id {id} does not exist"),
            Self::RoleError(why) => write!(f, "role error: {why}"),
            Self::Config(why) => write!(f, "configuration error: {why}"),
        }
    }
}

// ─── Stations and sessions ────────────────────────────────────────────────

/// Station identifier space used over the air.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaIdentifier {
    /// Association id (associated STA).
    Aid(u16),
    /// Unassociated STA id.
    Usid(u16),
}

/// Deterministic responds-to-poll schedule, a function of the exchange id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Responsiveness {
    Always,
    Never,
    /// Responds when `exchange_id % n == 0`.
    EveryNth(u64),
    /// Responds exactly on the listed exchange ids.
    OnExchanges(Vec<u64>),
}

impl Responsiveness {
    /// Does the station answer the poll of exchange `exchange_id`?
    pub fn responds(&self, exchange_id: u64) -> bool {
        match self {
            Self::Always => true,
            Self::Never => false,
            Self::EveryNth(n) => *n != 0 && exchange_id.is_multiple_of(*n),
            Self::OnExchanges(ids) => ids.contains(&exchange_id),
        }
    }
}

/// A registered station.
#[derive(Debug, Clone, PartialEq)]
pub struct StaProfile {
    pub sta_id: StaId,
    pub mac_address: [u8; 6],
    pub identifier: StaIdentifier,
    pub is_ap: bool,
    pub tx_capable: bool,
    pub rx_capable: bool,
    pub dmg_capable: bool,
    pub sbp_capable: bool,
    pub responsiveness: Responsiveness,
    /// CSI-variation threshold for threshold reporting, in [0, 1].
    pub csi_threshold: f64,
}

impl StaProfile {
    /// A sensing-capable default: tx+rx, always responsive, threshold 0.
    pub fn new(sta_id: StaId, is_ap: bool) -> Self {
        Self {
            sta_id,
            mac_address: [0, 0, 0, 0, 0, sta_id as u8],
            identifier: StaIdentifier::Aid(sta_id),
            is_ap,
            tx_capable: true,
            rx_capable: true,
            dmg_capable: false,
            sbp_capable: false,
            responsiveness: Responsiveness::Always,
            csi_threshold: 0.0,
        }
    }
}

/// Sensing role of one station within a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Tx,
    Rx,
    Both,
}

impl Role {
    pub fn has_tx(self) -> bool {
        matches!(self, Self::Tx | Self::Both)
    }

    pub fn has_rx(self) -> bool {
        matches!(self, Self::Rx | Self::Both)
    }
}

/// When measurement reports are delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportingMode {
    /// Reports reference the current exchange's measurement.
    Immediate,
    /// Reports reference prior exchanges; entries may aggregate sessions.
    Delayed,
    /// Reports only when CSI variation meets the responder threshold.
    Threshold,
}

/// Agreed operational attributes of one measurement session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionAttrs {
    pub session_id: u32,
    pub initiator: StaId,
    pub responders: Vec<StaId>,
    /// Role per participant (initiator and every responder).
    pub roles: BTreeMap<StaId, Role>,
    pub report_type: ReportType,
    pub reporting: ReportingMode,
    /// Quantizer used to encode feedback reports.
    pub quant: QuantConfig,
    /// CIR tap count, required iff `report_type` is `Tcir`.
    pub tap_count: Option<usize>,
    /// Nominal exchange cadence (s); informational for schedulers.
    pub schedule_s: f64,
}

impl SessionAttrs {
    /// Immediate full-CSI attrs with everyone in the `Both` role.
    pub fn simple(session_id: u32, initiator: StaId, responders: Vec<StaId>) -> Self {
        let mut roles = BTreeMap::new();
        roles.insert(initiator, Role::Both);
        for &r in &responders {
            roles.insert(r, Role::Both);
        }
        Self {
            session_id,
            initiator,
            responders,
            roles,
            report_type: ReportType::FullCsi,
            reporting: ReportingMode::Immediate,
            quant: QuantConfig::new(crate::csi::Scheme::SimplifiedLinear, 8),
            tap_count: None,
            schedule_s: 0.01,
        }
    }
}

/// Pairwise capability agreement (viewed from the initiator).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgreedCapabilities {
    /// Initiator may sound toward the responder (init tx, resp rx).
    pub tx: bool,
    /// Responder may sound toward the initiator (init rx, resp tx).
    pub rx: bool,
    /// Both ends are DMG capable.
    pub dmg: bool,
}

// ─── Trace model ──────────────────────────────────────────────────────────

/// Symbolic frame kinds appearing in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Poll,
    PollResponse,
    SensingNdpa,
    NdpSi2Sr,
    NdpSr2Si,
    SensingTrigger,
    ReportTrigger,
    Report,
    VariationReport,
    Brp,
    SyncPpdu,
    Beacon,
    Ssw,
    InfoRequest,
    InfoResponse,
    SbpRequest,
    SbpResponse,
    SbpReport,
    Terminate,
}

impl FrameKind {
    /// Wire name used in exported traces.
    pub fn name(self) -> &'static str {
        match self {
            Self::Poll => "Poll",
            Self::PollResponse => "PollResponse",
            Self::SensingNdpa => "SensingNDPA",
            Self::NdpSi2Sr => "NDP_SI2SR",
            Self::NdpSr2Si => "NDP_SR2SI",
            Self::SensingTrigger => "SensingTrigger",
            Self::ReportTrigger => "ReportTrigger",
            Self::Report => "Report",
            Self::VariationReport => "VariationReport",
            Self::Brp => "BRP",
            Self::SyncPpdu => "SyncPpdu",
            Self::Beacon => "Beacon",
            Self::Ssw => "SSW",
            Self::InfoRequest => "InfoRequest",
            Self::InfoResponse => "InfoResponse",
            Self::SbpRequest => "SbpRequest",
            Self::SbpResponse => "SbpResponse",
            Self::SbpReport => "SbpReport",
            Self::Terminate => "Terminate",
        }
    }
}

/// One traced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t_s: f64,
    pub frame: FrameKind,
    pub src: StaId,
    /// Receiver, or [`BROADCAST`].
    pub dst: StaId,
    pub exchange_id: u64,
    pub session_id: u32,
    pub tags: Vec<String>,
}

/// Ordered frame trace.
pub type EventTrace = Vec<Event>;

/// Procedure phases, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Polling,
    NdpaSounding,
    TfSounding,
    Initiation,
    Sounding,
    Reporting,
}

impl Phase {
    /// Tag used in exported records.
    pub fn tag(self) -> &'static str {
        match self {
            Self::Polling => "polling",
            Self::NdpaSounding => "ndpa_sounding",
            Self::TfSounding => "tf_sounding",
            Self::Initiation => "initiation",
            Self::Sounding => "sounding",
            Self::Reporting => "reporting",
        }
    }

    fn tb_order(self) -> Option<usize> {
        match self {
            Self::Polling => Some(0),
            Self::NdpaSounding => Some(1),
            Self::TfSounding => Some(2),
            Self::Reporting => Some(3),
            _ => None,
        }
    }
}

/// Which direction an NDP traveled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoundingDirection {
    /// Initiator-to-responder NDP; the responder measures.
    Si2Sr,
    /// Responder-to-initiator NDP; the initiator measures.
    Sr2Si,
}

/// One channel observation captured during an exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub tx_sta: StaId,
    pub rx_sta: StaId,
    pub direction: SoundingDirection,
    pub csi: CsiMatrix,
    pub timestamp_s: f64,
}

/// One delivered feedback report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    /// The responder that produced the measurement.
    pub source: StaId,
    pub session_id: u32,
    pub exchange_id: u64,
    pub report: FeedbackReport,
}

/// Everything one measurement exchange produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeRecord {
    pub exchange_id: u64,
    pub session_id: u32,
    pub phases_executed: Vec<Phase>,
    pub measurements: Vec<Measurement>,
    pub reports: Vec<ReportEntry>,
    pub trace: EventTrace,
    /// Field map of the sounding PPDU (multistatic DMG exchanges).
    pub ppdu_fields: Option<FieldMap>,
}

/// Outcome of a threshold-reporting run.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdOutcome {
    /// (responder, variation) for every participating responder.
    pub variations: Vec<(StaId, f64)>,
    /// Reports from exactly the responders at or above their threshold.
    pub reports: Vec<ReportEntry>,
    pub trace: EventTrace,
}

/// Outcome of a sensing-by-proxy request.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpOutcome {
    pub accepted: bool,
    /// Session the proxy created (accepted requests only).
    pub session_id: Option<u32>,
    /// Exchanges the proxy executed on the requester's behalf.
    pub records: Vec<ExchangeRecord>,
    /// Reports forwarded to the requester; equals the reports collected.
    pub forwarded: Vec<ReportEntry>,
    /// SBP-level frames (request/response/forward); exchange-internal
    /// frames live in `records`.
    pub trace: EventTrace,
}

/// DMG sensing exchange flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmgExchangeType {
    Monostatic,
    Bistatic,
    Multistatic,
    CoordMonostatic,
    CoordBistatic,
    Passive,
}

/// Burst timing plan for DMG sensing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmgBurstSchedule {
    pub n_exchanges: usize,
    pub intra_burst_interval_s: f64,
    pub inter_burst_interval_s: f64,
    pub n_bursts: usize,
}

impl DmgBurstSchedule {
    fn validate(&self) -> Result<(), MacError> {
        if self.n_exchanges == 0 || self.n_bursts == 0 {
            return Err(MacError::Config("burst schedule needs ≥1 exchange and ≥1 burst".into()));
        }
        if self.intra_burst_interval_s <= 0.0
            || self.inter_burst_interval_s <= 0.0
            || self.intra_burst_interval_s.is_nan()
            || self.inter_burst_interval_s.is_nan()
        {
            return Err(MacError::Config("burst intervals must be positive".into()));
        }
        if self.intra_burst_interval_s >= self.inter_burst_interval_s {
            return Err(MacError::Config(
                "intra-burst interval must be shorter than the inter-burst interval".into(),
            ));
        }
        Ok(())
    }
}

// ─── Trace builder ────────────────────────────────────────────────────────

/// Appends frames at exact SIFS spacing: each event time is exactly the
/// previous time plus one SIFS (as an f64 operation).
struct TraceBuilder {
    t: f64,
    sifs: f64,
    exchange_id: u64,
    session_id: u32,
    events: EventTrace,
}

impl TraceBuilder {
    fn new(t0: f64, sifs: f64, exchange_id: u64, session_id: u32) -> Self {
        Self { t: t0, sifs, exchange_id, session_id, events: Vec::new() }
    }

    /// Emits a frame at the current slot and advances one SIFS.
    fn push(&mut self, frame: FrameKind, src: StaId, dst: StaId, tags: Vec<String>) -> f64 {
        let t = self.t;
        self.events.push(Event {
            t_s: t,
            frame,
            src,
            dst,
            exchange_id: self.exchange_id,
            session_id: self.session_id,
            tags,
        });
        self.t += self.sifs;
        t
    }
}

// ─── Engine ───────────────────────────────────────────────────────────────

struct SessionState {
    attrs: SessionAttrs,
    next_exchange_id: u64,
    /// Latest CSI each responder holds (SI2SR direction).
    current_csi: BTreeMap<StaId, CsiMatrix>,
    /// The CSI each responder held before the latest sounding.
    previous_csi: BTreeMap<StaId, CsiMatrix>,
}

/// Deterministic single-threaded sensing MAC engine.
pub struct SensingEngine {
    sifs_s: f64,
    time_s: f64,
    profiles: BTreeMap<StaId, StaProfile>,
    agreements: BTreeMap<(StaId, StaId), AgreedCapabilities>,
    sessions: BTreeMap<u32, SessionState>,
    /// Encoded-but-undelivered entries awaiting a delayed reporting phase;
    /// shared across sessions so deliveries may aggregate.
    delayed_pool: Vec<ReportEntry>,
}

impl SensingEngine {
    /// An empty engine with the given SIFS (see [`SIFS_SUB7_S`],
    /// [`SIFS_DMG_S`]).
    pub fn new(sifs_s: f64) -> Self {
        assert!(sifs_s > 0.0, "SIFS must be positive");
        Self {
            sifs_s,
            time_s: 0.0,
            profiles: BTreeMap::new(),
            agreements: BTreeMap::new(),
            sessions: BTreeMap::new(),
            delayed_pool: Vec::new(),
        }
    }

    /// Current engine clock (s).
    pub fn now(&self) -> f64 {
        self.time_s
    }

    /// Moves the clock forward to `t` (never backward).
    pub fn advance_to(&mut self, t: f64) {
        if t > self.time_s {
            self.time_s = t;
        }
    }

    /// Registers a station; sensing participants need tx and/or rx.
    pub fn register_sta(&mut self, profile: StaProfile) -> Result<(), MacError> {
        if !profile.tx_capable && !profile.rx_capable {
            return Err(MacError::Config(format!(
                "station {} is neither tx nor rx capable",
                profile.sta_id
            )));
        }
        if profile.sta_id == BROADCAST {
            return Err(MacError::Config("station id reserved for broadcast".into()));
        }
        self.profiles.insert(profile.sta_id, profile);
        Ok(())
    }

    fn profile(&self, id: StaId) -> Result<&StaProfile, MacError> {
        self.profiles.get(&id).ok_or(MacError::UnknownSta(id))
    }

    fn pair_key(a: StaId, b: StaId) -> (StaId, StaId) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    // ── Capabilities and sessions ──

    /// Intersects two stations' sensing capabilities and records the
    /// agreement; fails when no sounding direction exists.
    pub fn exchange_capabilities(
        &mut self,
        initiator: StaId,
        responder: StaId,
    ) -> Result<AgreedCapabilities, MacError> {
        let i = self.profile(initiator)?;
        let r = self.profile(responder)?;
        let agreed = AgreedCapabilities {
            tx: i.tx_capable && r.rx_capable,
            rx: i.rx_capable && r.tx_capable,
            dmg: i.dmg_capable && r.dmg_capable,
        };
        if !agreed.tx && !agreed.rx {
            return Err(MacError::NegotiationFailure { a: initiator, b: responder });
        }
        self.agreements.insert(Self::pair_key(initiator, responder), agreed);
        Ok(agreed)
    }

    fn agreement(&self, a: StaId, b: StaId) -> Result<AgreedCapabilities, MacError> {
        self.agreements
            .get(&Self::pair_key(a, b))
            .copied()
            .ok_or(MacError::CapabilitiesNotExchanged { a, b })
    }

    /// Stores a session after checking ids, capabilities, and roles.
    pub fn setup_session(&mut self, attrs: SessionAttrs) -> Result<u32, MacError> {
        if self.sessions.contains_key(&attrs.session_id) {
            return Err(MacError::DuplicateSession(attrs.session_id));
        }
        if attrs.responders.is_empty() {
            return Err(MacError::Config("session needs at least one responder".into()));
        }
        self.profile(attrs.initiator)?;
        for &r in &attrs.responders {
            self.profile(r)?;
            self.agreement(attrs.initiator, r)?;
        }
        let mut participants = vec![attrs.initiator];
        participants.extend_from_slice(&attrs.responders);
        for id in participants {
            let role = *attrs
                .roles
                .get(&id)
                .ok_or_else(|| MacError::Config(format!("no role assigned to station {id}")))?;
            let p = self.profile(id)?;
            if role.has_tx() && !p.tx_capable {
                return Err(MacError::Config(format!("station {id} lacks tx capability for its role")));
            }
            if role.has_rx() && !p.rx_capable {
                return Err(MacError::Config(format!("station {id} lacks rx capability for its role")));
            }
        }
        if attrs.report_type == ReportType::Tcir && attrs.tap_count.is_none() {
            return Err(MacError::Config("TCIR report type requires tap_count".into()));
        }
        let id = attrs.session_id;
        self.sessions.insert(
            id,
            SessionState {
                attrs,
                next_exchange_id: 0,
                current_csi: BTreeMap::new(),
                previous_csi: BTreeMap::new(),
            },
        );
        Ok(id)
    }

    /// Removes a session and confirms with a Terminate frame; exchanges on
    /// the id are rejected afterwards.
    pub fn terminate_session(&mut self, session_id: u32) -> Result<EventTrace, MacError> {
        let state = self
            .sessions
            .remove(&session_id)
            .ok_or(MacError::UnknownSession(session_id))?;
        let mut tb = TraceBuilder::new(self.time_s, self.sifs_s, state.next_exchange_id, session_id);
        tb.push(FrameKind::Terminate, state.attrs.initiator, BROADCAST, vec!["release".into()]);
        self.time_s = tb.t;
        Ok(tb.events)
    }

    fn session(&self, id: u32) -> Result<&SessionState, MacError> {
        self.sessions.get(&id).ok_or(MacError::UnknownSession(id))
    }

    // ── TB exchange ──

    /// Runs one trigger-based measurement exchange over the given ordered
    /// phase subset. The initiator must be an AP. Sounding and reporting
    /// phases are gated on poll responsiveness; without a polling phase,
    /// every responder is deemed available.
    pub fn run_tb_exchange<F>(
        &mut self,
        session_id: u32,
        phase_plan: &[Phase],
        hook: &mut F,
    ) -> Result<ExchangeRecord, MacError>
    where
        F: FnMut(StaId, StaId, f64) -> CsiMatrix,
    {
        validate_tb_plan(phase_plan)?;
        let attrs = self.session(session_id)?.attrs.clone();
        if !self.profile(attrs.initiator)?.is_ap {
            return Err(MacError::RoleError(format!(
                "TB initiator {} is not an AP",
                attrs.initiator
            )));
        }
        let ap = attrs.initiator;
        let exchange_id = {
            let state = self.sessions.get_mut(&session_id).expect("checked");
            let id = state.next_exchange_id;
            state.next_exchange_id += 1;
            id
        };
        let mut tb = TraceBuilder::new(self.time_s, self.sifs_s, exchange_id, session_id);
        let mut phases = Vec::new();
        let mut measurements = Vec::new();
        let mut reports = Vec::new();
        let mut measured_now: BTreeSet<StaId> = BTreeSet::new();

        // Availability: set by the polling phase, else everyone.
        let mut responsive: BTreeSet<StaId> = attrs.responders.iter().copied().collect();

        for &phase in phase_plan {
            match phase {
                Phase::Polling => {
                    phases.push(phase);
                    tb.push(FrameKind::Poll, ap, BROADCAST, vec![tag_phase(phase)]);
                    responsive.clear();
                    for &r in &attrs.responders {
                        if self.profile(r)?.responsiveness.responds(exchange_id) {
                            responsive.insert(r);
                            tb.push(FrameKind::PollResponse, r, ap, vec![tag_phase(phase)]);
                        }
                    }
                }
                Phase::NdpaSounding => {
                    let any_rx = attrs
                        .responders
                        .iter()
                        .any(|r| responsive.contains(r) && attrs.roles[r].has_rx());
                    if !any_rx {
                        continue;
                    }
                    phases.push(phase);
                    tb.push(FrameKind::SensingNdpa, ap, BROADCAST, vec![tag_phase(phase)]);
                    let t_ndp =
                        tb.push(FrameKind::NdpSi2Sr, ap, BROADCAST, vec![tag_phase(phase)]);
                    for &r in &attrs.responders {
                        if !(responsive.contains(&r) && attrs.roles[&r].has_rx()) {
                            continue;
                        }
                        let csi = hook(ap, r, t_ndp);
                        self.store_csi(session_id, r, csi.clone());
                        measured_now.insert(r);
                        if attrs.reporting == ReportingMode::Delayed {
                            self.delayed_pool.push(ReportEntry {
                                source: r,
                                session_id,
                                exchange_id,
                                report: encode_report(&attrs, &csi)?,
                            });
                        }
                        measurements.push(Measurement {
                            tx_sta: ap,
                            rx_sta: r,
                            direction: SoundingDirection::Si2Sr,
                            csi,
                            timestamp_s: t_ndp,
                        });
                    }
                }
                Phase::TfSounding => {
                    let any_tx = attrs
                        .responders
                        .iter()
                        .any(|r| responsive.contains(r) && attrs.roles[r].has_tx());
                    if !any_tx {
                        continue;
                    }
                    phases.push(phase);
                    tb.push(FrameKind::SensingTrigger, ap, BROADCAST, vec![tag_phase(phase)]);
                    for &r in &attrs.responders {
                        if !(responsive.contains(&r) && attrs.roles[&r].has_tx()) {
                            continue;
                        }
                        let t_ndp = tb.push(FrameKind::NdpSr2Si, r, ap, vec![tag_phase(phase)]);
                        measurements.push(Measurement {
                            tx_sta: r,
                            rx_sta: ap,
                            direction: SoundingDirection::Sr2Si,
                            csi: hook(r, ap, t_ndp),
                            timestamp_s: t_ndp,
                        });
                    }
                }
                Phase::Reporting => {
                    if responsive.is_empty() {
                        continue;
                    }
                    phases.push(phase);
                    self.run_reporting_phase(
                        &attrs,
                        exchange_id,
                        &responsive,
                        &measured_now,
                        &mut tb,
                        &mut reports,
                    )?;
                }
                other => {
                    return Err(MacError::Config(format!(
                        "phase {} is not part of a TB exchange",
                        other.tag()
                    )))
                }
            }
        }
        self.time_s = tb.t;
        Ok(ExchangeRecord {
            exchange_id,
            session_id,
            phases_executed: phases,
            measurements,
            reports,
            trace: tb.events,
            ppdu_fields: None,
        })
    }

    /// Reporting phase body, shared by TB exchanges and SBP.
    fn run_reporting_phase(
        &mut self,
        attrs: &SessionAttrs,
        exchange_id: u64,
        responsive: &BTreeSet<StaId>,
        measured_now: &BTreeSet<StaId>,
        tb: &mut TraceBuilder,
        reports: &mut Vec<ReportEntry>,
    ) -> Result<(), MacError> {
        match attrs.reporting {
            ReportingMode::Immediate => {
                let holders: Vec<StaId> = attrs
                    .responders
                    .iter()
                    .copied()
                    .filter(|r| responsive.contains(r) && measured_now.contains(r))
                    .collect();
                let mut tags = vec![tag_phase(Phase::Reporting)];
                if holders.is_empty() {
                    tags.push("protocol-error:absent-measurement".into());
                }
                tb.push(FrameKind::ReportTrigger, attrs.initiator, BROADCAST, tags);
                for r in holders {
                    let csi = self.sessions[&attrs.session_id].current_csi[&r].clone();
                    reports.push(ReportEntry {
                        source: r,
                        session_id: attrs.session_id,
                        exchange_id,
                        report: encode_report(attrs, &csi)?,
                    });
                    tb.push(FrameKind::Report, r, attrs.initiator, vec![tag_phase(Phase::Reporting)]);
                }
            }
            ReportingMode::Delayed => {
                tb.push(
                    FrameKind::ReportTrigger,
                    attrs.initiator,
                    BROADCAST,
                    vec![tag_phase(Phase::Reporting), "delayed".into()],
                );
                // Deliver entries from prior exchanges only; entries pooled
                // by this very exchange wait for the next one. Entries from
                // other sessions ride along (aggregated delivery).
                let mut remaining = Vec::new();
                for entry in core::mem::take(&mut self.delayed_pool) {
                    let prior = entry.session_id != attrs.session_id || entry.exchange_id < exchange_id;
                    if prior {
                        tb.push(
                            FrameKind::Report,
                            entry.source,
                            attrs.initiator,
                            vec![
                                tag_phase(Phase::Reporting),
                                format!("delayed:session={}:exchange={}", entry.session_id, entry.exchange_id),
                            ],
                        );
                        reports.push(entry);
                    } else {
                        remaining.push(entry);
                    }
                }
                self.delayed_pool = remaining;
            }
            ReportingMode::Threshold => {
                let outcome =
                    self.threshold_subphases(attrs, exchange_id, responsive, measured_now, tb)?;
                reports.extend(outcome);
            }
        }
        Ok(())
    }

    /// Variation subphase then measurement subphase; returns the reports.
    fn threshold_subphases(
        &mut self,
        attrs: &SessionAttrs,
        exchange_id: u64,
        responsive: &BTreeSet<StaId>,
        measured_now: &BTreeSet<StaId>,
        tb: &mut TraceBuilder,
    ) -> Result<Vec<ReportEntry>, MacError> {
        let mut reports = Vec::new();
        let mut variations = Vec::new();
        for &r in &attrs.responders {
            if !(responsive.contains(&r) && measured_now.contains(&r)) {
                continue;
            }
            let state = &self.sessions[&attrs.session_id];
            let current = &state.current_csi[&r];
            // A responder with no previous measurement reports maximal
            // variation so the first observation always gets delivered.
            let variation = match state.previous_csi.get(&r) {
                Some(previous) => csi_variation(current, previous)
                    .map_err(|e| MacError::Config(e.to_string()))?,
                None => 1.0,
            };
            variations.push((r, variation));
            tb.push(
                FrameKind::VariationReport,
                r,
                attrs.initiator,
                vec![tag_phase(Phase::Reporting), format!("variation:{variation:.6}")],
            );
        }
        for (r, variation) in variations {
            let threshold = self.profiles[&r].csi_threshold;
            if variation >= threshold {
                let csi = self.sessions[&attrs.session_id].current_csi[&r].clone();
                reports.push(ReportEntry {
                    source: r,
                    session_id: attrs.session_id,
                    exchange_id,
                    report: encode_report(attrs, &csi)?,
                });
                tb.push(FrameKind::Report, r, attrs.initiator, vec![tag_phase(Phase::Reporting)]);
            }
        }
        Ok(reports)
    }

    /// Standalone threshold reporting over the session's stored CSI. The
    /// initiator must be a sensing transmitter.
    pub fn run_threshold_reporting(&mut self, session_id: u32) -> Result<ThresholdOutcome, MacError> {
        let attrs = self.session(session_id)?.attrs.clone();
        if !self.profile(attrs.initiator)?.tx_capable {
            return Err(MacError::RoleError(format!(
                "threshold reporting initiator {} is not a sensing transmitter",
                attrs.initiator
            )));
        }
        let exchange_id = self.session(session_id)?.next_exchange_id;
        let mut tb = TraceBuilder::new(self.time_s, self.sifs_s, exchange_id, session_id);
        let holders: BTreeSet<StaId> = self.sessions[&session_id].current_csi.keys().copied().collect();
        let mut variations = Vec::new();
        for &r in &attrs.responders {
            if !holders.contains(&r) {
                continue;
            }
            let state = &self.sessions[&session_id];
            let variation = match state.previous_csi.get(&r) {
                Some(previous) => csi_variation(&state.current_csi[&r], previous)
                    .map_err(|e| MacError::Config(e.to_string()))?,
                None => 1.0,
            };
            variations.push((r, variation));
            tb.push(
                FrameKind::VariationReport,
                r,
                attrs.initiator,
                vec![tag_phase(Phase::Reporting), format!("variation:{variation:.6}")],
            );
        }
        let mut reports = Vec::new();
        for &(r, variation) in &variations {
            if variation >= self.profiles[&r].csi_threshold {
                let csi = self.sessions[&session_id].current_csi[&r].clone();
                reports.push(ReportEntry {
                    source: r,
                    session_id,
                    exchange_id,
                    report: encode_report(&attrs, &csi)?,
                });
                tb.push(FrameKind::Report, r, attrs.initiator, vec![tag_phase(Phase::Reporting)]);
            }
        }
        self.time_s = tb.t;
        Ok(ThresholdOutcome { variations, reports, trace: tb.events })
    }

    fn store_csi(&mut self, session_id: u32, responder: StaId, csi: CsiMatrix) {
        let state = self.sessions.get_mut(&session_id).expect("checked");
        if let Some(old) = state.current_csi.insert(responder, csi) {
            state.previous_csi.insert(responder, old);
        }
    }

    // ── Non-TB exchange ──

    /// Runs one non-TB exchange: a non-AP initiator sounding with its AP.
    /// The NDP in the unmeasured direction is transmitted at minimum
    /// length; the AP reports its measurement when the initiator transmits.
    pub fn run_non_tb_exchange<F>(
        &mut self,
        session_id: u32,
        initiator_role: Role,
        hook: &mut F,
    ) -> Result<ExchangeRecord, MacError>
    where
        F: FnMut(StaId, StaId, f64) -> CsiMatrix,
    {
        let attrs = self.session(session_id)?.attrs.clone();
        if self.profile(attrs.initiator)?.is_ap {
            return Err(MacError::RoleError(format!(
                "non-TB initiator {} must not be an AP",
                attrs.initiator
            )));
        }
        if attrs.responders.len() != 1 {
            return Err(MacError::Config("non-TB exchange needs exactly one responder".into()));
        }
        let ap = attrs.responders[0];
        if !self.profile(ap)?.is_ap {
            return Err(MacError::RoleError(format!("non-TB responder {ap} must be an AP")));
        }
        let init = attrs.initiator;
        let exchange_id = {
            let state = self.sessions.get_mut(&session_id).expect("checked");
            let id = state.next_exchange_id;
            state.next_exchange_id += 1;
            id
        };
        let mut tb = TraceBuilder::new(self.time_s, self.sifs_s, exchange_id, session_id);
        let mut measurements = Vec::new();
        let mut reports = Vec::new();
        let mut phases = vec![Phase::Sounding];

        tb.push(FrameKind::SensingNdpa, init, ap, vec![tag_phase(Phase::Sounding)]);

        // Initiator-to-responder NDP: measured by the AP unless the
        // initiator only receives, in which case it is minimum length.
        let si2sr_tags = if initiator_role.has_tx() {
            vec![tag_phase(Phase::Sounding)]
        } else {
            vec![tag_phase(Phase::Sounding), "minimum-length".into()]
        };
        let t_si2sr = tb.push(FrameKind::NdpSi2Sr, init, ap, si2sr_tags);
        let mut ap_csi = None;
        if initiator_role.has_tx() {
            let csi = hook(init, ap, t_si2sr);
            self.store_csi(session_id, ap, csi.clone());
            ap_csi = Some(csi.clone());
            measurements.push(Measurement {
                tx_sta: init,
                rx_sta: ap,
                direction: SoundingDirection::Si2Sr,
                csi,
                timestamp_s: t_si2sr,
            });
        }

        // Responder-to-initiator NDP: measured by the initiator unless it
        // only transmits.
        let sr2si_tags = if initiator_role.has_rx() {
            vec![tag_phase(Phase::Sounding)]
        } else {
            vec![tag_phase(Phase::Sounding), "minimum-length".into()]
        };
        let t_sr2si = tb.push(FrameKind::NdpSr2Si, ap, init, sr2si_tags);
        if initiator_role.has_rx() {
            measurements.push(Measurement {
                tx_sta: ap,
                rx_sta: init,
                direction: SoundingDirection::Sr2Si,
                csi: hook(ap, init, t_sr2si),
                timestamp_s: t_sr2si,
            });
        }

        // Feedback for the SI2SR sounding follows the SR2SI NDP.
        if let Some(csi) = ap_csi {
            phases.push(Phase::Reporting);
            reports.push(ReportEntry {
                source: ap,
                session_id,
                exchange_id,
                report: encode_report(&attrs, &csi)?,
            });
            tb.push(FrameKind::Report, ap, init, vec![tag_phase(Phase::Reporting)]);
        }

        self.time_s = tb.t;
        Ok(ExchangeRecord {
            exchange_id,
            session_id,
            phases_executed: phases,
            measurements,
            reports,
            trace: tb.events,
            ppdu_fields: None,
        })
    }

    // ── DMG bursts ──

    /// Runs `n_bursts × n_exchanges` DMG exchanges of the given flavor.
    /// Exchange (b, e) starts at exactly `t0 + b·inter + e·intra`.
    pub fn run_dmg_burst<F>(
        &mut self,
        session_id: u32,
        exchange_type: DmgExchangeType,
        schedule: DmgBurstSchedule,
        hook: &mut F,
    ) -> Result<Vec<ExchangeRecord>, MacError>
    where
        F: FnMut(StaId, StaId, f64) -> CsiMatrix,
    {
        schedule.validate()?;
        let attrs = self.session(session_id)?.attrs.clone();
        for id in core::iter::once(attrs.initiator).chain(attrs.responders.iter().copied()) {
            if !self.profile(id)?.dmg_capable {
                return Err(MacError::RoleError(format!("station {id} is not DMG capable")));
            }
        }
        match exchange_type {
            DmgExchangeType::Monostatic => {}
            DmgExchangeType::Bistatic => {
                if attrs.responders.len() != 1 {
                    return Err(MacError::Config("bistatic exchange needs exactly one responder".into()));
                }
            }
            DmgExchangeType::Multistatic => {
                if attrs.responders.len() > 8 {
                    return Err(MacError::Config("multistatic PPDU carries at most 8 Sync fields".into()));
                }
            }
            DmgExchangeType::Passive => {
                if !self.profile(attrs.initiator)?.is_ap {
                    return Err(MacError::RoleError("passive sensing needs an AP beacon transmitter".into()));
                }
            }
            DmgExchangeType::CoordMonostatic | DmgExchangeType::CoordBistatic => {}
        }

        let t0 = self.time_s;
        let mut records = Vec::new();
        for b in 0..schedule.n_bursts {
            for e in 0..schedule.n_exchanges {
                let start = t0
                    + b as f64 * schedule.inter_burst_interval_s
                    + e as f64 * schedule.intra_burst_interval_s;
                let record =
                    self.run_dmg_exchange(session_id, exchange_type, start, b, e, hook)?;
                records.push(record);
            }
        }
        let end = records.last().and_then(|r| r.trace.last()).map(|ev| ev.t_s + self.sifs_s);
        if let Some(end) = end {
            self.advance_to(end);
        }
        Ok(records)
    }

    fn run_dmg_exchange<F>(
        &mut self,
        session_id: u32,
        exchange_type: DmgExchangeType,
        start_s: f64,
        burst: usize,
        slot: usize,
        hook: &mut F,
    ) -> Result<ExchangeRecord, MacError>
    where
        F: FnMut(StaId, StaId, f64) -> CsiMatrix,
    {
        let attrs = self.session(session_id)?.attrs.clone();
        let init = attrs.initiator;
        let exchange_id = {
            let state = self.sessions.get_mut(&session_id).expect("checked");
            let id = state.next_exchange_id;
            state.next_exchange_id += 1;
            id
        };
        let mut tb = TraceBuilder::new(start_s, self.sifs_s, exchange_id, session_id);
        let burst_tag = format!("burst:{burst}:exchange:{slot}");
        let mut phases = Vec::new();
        let mut measurements = Vec::new();
        let mut reports = Vec::new();
        let mut ppdu_fields = None;

        match exchange_type {
            DmgExchangeType::Monostatic => {
                phases.push(Phase::Sounding);
                let t = tb.push(
                    FrameKind::Brp,
                    init,
                    init,
                    vec![tag_phase(Phase::Sounding), "self-sound".into(), burst_tag],
                );
                let csi = hook(init, init, t);
                self.store_csi(session_id, init, csi.clone());
                measurements.push(Measurement {
                    tx_sta: init,
                    rx_sta: init,
                    direction: SoundingDirection::Si2Sr,
                    csi,
                    timestamp_s: t,
                });
            }
            DmgExchangeType::Bistatic => {
                let responder = attrs.responders[0];
                let init_role = attrs.roles[&init];
                if init_role.has_tx() {
                    // TX-initiator variant: responder measures, then
                    // returns its report in a BRP frame.
                    phases.push(Phase::Sounding);
                    let t = tb.push(
                        FrameKind::Brp,
                        init,
                        responder,
                        vec![tag_phase(Phase::Sounding), "trn".into(), burst_tag],
                    );
                    let csi = hook(init, responder, t);
                    self.store_csi(session_id, responder, csi.clone());
                    measurements.push(Measurement {
                        tx_sta: init,
                        rx_sta: responder,
                        direction: SoundingDirection::Si2Sr,
                        csi: csi.clone(),
                        timestamp_s: t,
                    });
                    phases.push(Phase::Reporting);
                    reports.push(ReportEntry {
                        source: responder,
                        session_id,
                        exchange_id,
                        report: encode_report(&attrs, &csi)?,
                    });
                    tb.push(
                        FrameKind::Brp,
                        responder,
                        init,
                        vec![tag_phase(Phase::Reporting), "report".into()],
                    );
                } else {
                    // RX-initiator variant: the responder sounds, the
                    // initiator measures, and there is no reporting phase.
                    phases.push(Phase::Sounding);
                    let t = tb.push(
                        FrameKind::Brp,
                        responder,
                        init,
                        vec![tag_phase(Phase::Sounding), "trn".into(), burst_tag],
                    );
                    measurements.push(Measurement {
                        tx_sta: responder,
                        rx_sta: init,
                        direction: SoundingDirection::Sr2Si,
                        csi: hook(responder, init, t),
                        timestamp_s: t,
                    });
                }
            }
            DmgExchangeType::Multistatic => {
                // Initiation handshake activates every responder.
                phases.push(Phase::Initiation);
                for &r in &attrs.responders {
                    tb.push(FrameKind::Poll, init, r, vec![tag_phase(Phase::Initiation), "activate".into()]);
                    tb.push(FrameKind::PollResponse, r, init, vec![tag_phase(Phase::Initiation)]);
                }
                // One sounding PPDU with a Sync field per responder.
                phases.push(Phase::Sounding);
                let indices: Vec<u8> = (1..=attrs.responders.len() as u8).collect();
                let spec = PpduSpec::multistatic(indices, 2, Vec::new());
                let (_, fields) = assemble_sensing_ppdu(&spec, 1)
                    .map_err(|e| MacError::Config(e.to_string()))?;
                ppdu_fields = Some(fields);
                let t = tb.push(
                    FrameKind::SyncPpdu,
                    init,
                    BROADCAST,
                    vec![
                        tag_phase(Phase::Sounding),
                        format!("sync-fields:{}", attrs.responders.len()),
                        burst_tag,
                    ],
                );
                for &r in &attrs.responders {
                    let csi = hook(init, r, t);
                    self.store_csi(session_id, r, csi.clone());
                    measurements.push(Measurement {
                        tx_sta: init,
                        rx_sta: r,
                        direction: SoundingDirection::Si2Sr,
                        csi,
                        timestamp_s: t,
                    });
                }
                // Responders are polled and report in the predefined order.
                phases.push(Phase::Reporting);
                for &r in &attrs.responders {
                    tb.push(FrameKind::ReportTrigger, init, r, vec![tag_phase(Phase::Reporting)]);
                    let csi = self.sessions[&session_id].current_csi[&r].clone();
                    reports.push(ReportEntry {
                        source: r,
                        session_id,
                        exchange_id,
                        report: encode_report(&attrs, &csi)?,
                    });
                    tb.push(FrameKind::Report, r, init, vec![tag_phase(Phase::Reporting)]);
                }
            }
            DmgExchangeType::CoordMonostatic => {
                // The initiator distributes the beam schedule; responders
                // then self-sound on their own clocks.
                phases.push(Phase::Initiation);
                tb.push(
                    FrameKind::SensingTrigger,
                    init,
                    BROADCAST,
                    vec![tag_phase(Phase::Initiation), "beam-schedule".into()],
                );
                phases.push(Phase::Sounding);
                for &r in &attrs.responders {
                    let t = tb.push(
                        FrameKind::Brp,
                        r,
                        r,
                        vec![tag_phase(Phase::Sounding), "self-sound".into(), "own-clock".into()],
                    );
                    measurements.push(Measurement {
                        tx_sta: r,
                        rx_sta: r,
                        direction: SoundingDirection::Si2Sr,
                        csi: hook(r, r, t),
                        timestamp_s: t,
                    });
                }
            }
            DmgExchangeType::CoordBistatic => {
                phases.push(Phase::Initiation);
                tb.push(
                    FrameKind::SensingTrigger,
                    init,
                    BROADCAST,
                    vec![tag_phase(Phase::Initiation), "beam-schedule".into()],
                );
                // Per-responder soundings run back-to-back, then each
                // responder returns its BRP report.
                phases.push(Phase::Sounding);
                for &r in &attrs.responders {
                    let t = tb.push(
                        FrameKind::Brp,
                        init,
                        r,
                        vec![tag_phase(Phase::Sounding), "trn".into(), burst_tag.clone()],
                    );
                    let csi = hook(init, r, t);
                    self.store_csi(session_id, r, csi.clone());
                    measurements.push(Measurement {
                        tx_sta: init,
                        rx_sta: r,
                        direction: SoundingDirection::Si2Sr,
                        csi,
                        timestamp_s: t,
                    });
                }
                phases.push(Phase::Reporting);
                for &r in &attrs.responders {
                    let csi = self.sessions[&session_id].current_csi[&r].clone();
                    reports.push(ReportEntry {
                        source: r,
                        session_id,
                        exchange_id,
                        report: encode_report(&attrs, &csi)?,
                    });
                    tb.push(FrameKind::Brp, r, init, vec![tag_phase(Phase::Reporting), "report".into()]);
                }
            }
            DmgExchangeType::Passive => {
                // Beacon sector sweep observed by the responders.
                phases.push(Phase::Sounding);
                let mut t_last = tb.t;
                for sector in 0..BEACON_SECTORS {
                    t_last = tb.push(
                        FrameKind::Beacon,
                        init,
                        BROADCAST,
                        vec![tag_phase(Phase::Sounding), format!("sector:{sector}"), burst_tag.clone()],
                    );
                }
                for &r in &attrs.responders {
                    measurements.push(Measurement {
                        tx_sta: init,
                        rx_sta: r,
                        direction: SoundingDirection::Si2Sr,
                        csi: hook(init, r, t_last),
                        timestamp_s: t_last,
                    });
                }
                // Beacon directions and the AP location on request, plus
                // the uplink sector-sweep mirror.
                phases.push(Phase::Reporting);
                for &r in &attrs.responders {
                    tb.push(FrameKind::InfoRequest, r, init, vec![tag_phase(Phase::Reporting)]);
                    tb.push(
                        FrameKind::InfoResponse,
                        init,
                        r,
                        vec![tag_phase(Phase::Reporting), "beacon-directions".into(), "ap-location".into()],
                    );
                    tb.push(FrameKind::Ssw, r, init, vec![tag_phase(Phase::Reporting), "a-bft".into()]);
                }
            }
        }

        Ok(ExchangeRecord {
            exchange_id,
            session_id,
            phases_executed: phases,
            measurements,
            reports,
            trace: tb.events,
            ppdu_fields,
        })
    }

    // ── Sensing by proxy ──

    /// A non-AP station asks an SBP-capable AP to sense on its behalf. On
    /// acceptance the proxy exchanges capabilities, sets up `attrs` (with
    /// itself as initiator), runs one TB exchange, and forwards every
    /// collected report back to the requester.
    pub fn run_sbp<F>(
        &mut self,
        requester: StaId,
        proxy: StaId,
        mut attrs: SessionAttrs,
        phase_plan: &[Phase],
        hook: &mut F,
    ) -> Result<SbpOutcome, MacError>
    where
        F: FnMut(StaId, StaId, f64) -> CsiMatrix,
    {
        if self.profile(requester)?.is_ap {
            return Err(MacError::RoleError(format!("SBP requester {requester} must be a non-AP STA")));
        }
        let proxy_profile = self.profile(proxy)?.clone();
        if !proxy_profile.is_ap {
            return Err(MacError::RoleError(format!("SBP proxy {proxy} must be an AP")));
        }
        let mut tb = TraceBuilder::new(self.time_s, self.sifs_s, 0, attrs.session_id);
        tb.push(FrameKind::SbpRequest, requester, proxy, vec![format!("session:{}", attrs.session_id)]);
        if !proxy_profile.sbp_capable {
            tb.push(FrameKind::SbpResponse, proxy, requester, vec!["denied".into()]);
            self.time_s = tb.t;
            return Ok(SbpOutcome {
                accepted: false,
                session_id: None,
                records: Vec::new(),
                forwarded: Vec::new(),
                trace: tb.events,
            });
        }
        tb.push(FrameKind::SbpResponse, proxy, requester, vec!["accepted".into()]);
        self.time_s = tb.t;

        // The proxy runs the sensing procedure as session initiator; the
        // requester may itself appear among the responders.
        attrs.initiator = proxy;
        attrs.roles.entry(proxy).or_insert(Role::Both);
        for &r in &attrs.responders {
            self.exchange_capabilities(proxy, r)?;
        }
        let session_id = self.setup_session(attrs)?;
        let record = self.run_tb_exchange(session_id, phase_plan, hook)?;
        let forwarded = record.reports.clone();

        let mut tail = TraceBuilder::new(self.time_s, self.sifs_s, record.exchange_id, session_id);
        tail.push(
            FrameKind::SbpReport,
            proxy,
            requester,
            vec![format!("reports:{}", forwarded.len())],
        );
        self.time_s = tail.t;
        let mut trace = tb.events;
        trace.extend(tail.events);
        Ok(SbpOutcome {
            accepted: true,
            session_id: Some(session_id),
            records: vec![record],
            forwarded,
            trace,
        })
    }
}

fn tag_phase(p: Phase) -> String {
    format!("phase:{}", p.tag())
}

fn validate_tb_plan(plan: &[Phase]) -> Result<(), MacError> {
    if plan.is_empty() {
        return Err(MacError::Config("phase plan must not be empty".into()));
    }
    let mut last = None;
    for &p in plan {
        let order = p
            .tb_order()
            .ok_or_else(|| MacError::Config(format!("phase {} is not part of a TB exchange", p.tag())))?;
        if let Some(prev) = last {
            if order <= prev {
                return Err(MacError::Config(
                    "phase plan must follow polling → ndpa → tf → reporting without repeats".into(),
                ));
            }
        }
        last = Some(order);
    }
    Ok(())
}

fn encode_report(attrs: &SessionAttrs, csi: &CsiMatrix) -> Result<FeedbackReport, MacError> {
    encode_feedback(csi, attrs.report_type, &attrs.quant, attrs.tap_count)
        .map_err(|e| MacError::Config(e.to_string()))
}

// ─── Tests ────────────────────────────────────────────────────────────────
