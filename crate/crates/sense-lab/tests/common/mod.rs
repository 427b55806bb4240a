//! Deterministic MAC procedure runs shared by the golden-trace and
//! acceptance suites. Every builder starts a fresh engine at t = 0 with
//! synthetic hooks, so repeated calls produce identical traces.

use sense_core::csi::CsiMatrix;
use sense_core::mac::{
    DmgBurstSchedule, DmgExchangeType, Event, ExchangeRecord, Phase, ReportingMode,
    Responsiveness, Role, SbpOutcome, SensingEngine, SessionAttrs, StaId, StaProfile, SIFS_DMG_S,
    SIFS_SUB7_S,
};
use sense_core::Cx;

/// Deterministic synthetic channel: entries encode (tx, rx) and the
/// sounding time, so reordered or re-timed frames change the trace.
pub fn csi_hook(tx: StaId, rx: StaId, t: f64) -> CsiMatrix {
    let values =
        (0..4).map(|k| Cx::new(f64::from(tx) + 10.0 * f64::from(rx) + f64::from(k), 1e3 * t));
    CsiMatrix::siso(values.collect(), 20.0e6).expect("nonempty")
}

/// Time-independent variant with exactly integer entries, so repeated
/// soundings yield a CSI variation of exactly zero.
pub fn static_csi_hook(tx: StaId, rx: StaId, _t: f64) -> CsiMatrix {
    let values = (0..4).map(|k| Cx::new(f64::from(tx) + 10.0 * f64::from(rx) + f64::from(k), 0.0));
    CsiMatrix::siso(values.collect(), 20.0e6).expect("nonempty")
}

/// Absolute path of a committed fixture file.
pub fn fixture_path(name: &str) -> String {
    format!("{}/tests/fixtures/{name}.jsonl", env!("CARGO_MANIFEST_DIR"))
}

pub fn chronological(mut events: Vec<Event>) -> Vec<Event> {
    events.sort_by(|a, b| a.t_s.partial_cmp(&b.t_s).unwrap());
    events
}

/// Five responders on a TB session; STA 5 never answers the poll.
pub fn tb_five_sta() -> ExchangeRecord {
    let mut engine = SensingEngine::new(SIFS_SUB7_S);
    engine.register_sta(StaProfile::new(1, true)).unwrap();
    for sta in 2..=6u16 {
        let mut p = StaProfile::new(sta, false);
        if sta == 5 {
            p.responsiveness = Responsiveness::Never;
        }
        engine.register_sta(p).unwrap();
        engine.exchange_capabilities(1, sta).unwrap();
    }
    engine.setup_session(SessionAttrs::simple(7, 1, vec![2, 3, 4, 5, 6])).unwrap();
    let mut hook = csi_hook;
    engine
        .run_tb_exchange(
            7,
            &[Phase::Polling, Phase::NdpaSounding, Phase::TfSounding, Phase::Reporting],
            &mut hook,
        )
        .unwrap()
}

/// Two threshold-reporting exchanges over an unchanging channel: STA 2's
/// threshold is exactly the observed variation (0), STA 3's is above it.
pub fn threshold_boundary() -> (ExchangeRecord, ExchangeRecord) {
    let mut engine = SensingEngine::new(SIFS_SUB7_S);
    engine.register_sta(StaProfile::new(1, true)).unwrap();
    let mut at_boundary = StaProfile::new(2, false);
    at_boundary.csi_threshold = 0.0;
    let mut above_boundary = StaProfile::new(3, false);
    above_boundary.csi_threshold = 0.5;
    engine.register_sta(at_boundary).unwrap();
    engine.register_sta(above_boundary).unwrap();
    engine.exchange_capabilities(1, 2).unwrap();
    engine.exchange_capabilities(1, 3).unwrap();

    let mut attrs = SessionAttrs::simple(4, 1, vec![2, 3]);
    attrs.reporting = ReportingMode::Threshold;
    engine.setup_session(attrs).unwrap();

    let mut hook = static_csi_hook;
    let plan = [Phase::NdpaSounding, Phase::Reporting];
    let first = engine.run_tb_exchange(4, &plan, &mut hook).unwrap();
    let second = engine.run_tb_exchange(4, &plan, &mut hook).unwrap();
    (first, second)
}

/// One non-TB exchange with the initiator in the given sensing role.
pub fn non_tb(role: Role) -> ExchangeRecord {
    let mut engine = SensingEngine::new(SIFS_SUB7_S);
    engine.register_sta(StaProfile::new(1, true)).unwrap();
    engine.register_sta(StaProfile::new(2, false)).unwrap();
    engine.exchange_capabilities(2, 1).unwrap();
    engine.setup_session(SessionAttrs::simple(5, 2, vec![1])).unwrap();
    let mut hook = csi_hook;
    engine.run_non_tb_exchange(5, role, &mut hook).unwrap()
}

fn dmg_engine(n_stas: u16) -> SensingEngine {
    let mut engine = SensingEngine::new(SIFS_DMG_S);
    for sta in 1..=n_stas {
        let mut p = StaProfile::new(sta, sta == 1);
        p.dmg_capable = true;
        engine.register_sta(p).unwrap();
        if sta > 1 {
            engine.exchange_capabilities(1, sta).unwrap();
        }
    }
    engine
}

/// The schedule used by both DMG fixtures.
pub const DMG_SCHEDULE: DmgBurstSchedule = DmgBurstSchedule {
    n_exchanges: 2,
    intra_burst_interval_s: 1e-3,
    inter_burst_interval_s: 10e-3,
    n_bursts: 1,
};

/// RX-initiated DMG bistatic burst: one burst of two exchanges.
pub fn dmg_bistatic_rx() -> Vec<ExchangeRecord> {
    let mut engine = dmg_engine(2);
    let mut attrs = SessionAttrs::simple(6, 1, vec![2]);
    attrs.roles.insert(1, Role::Rx);
    engine.setup_session(attrs).unwrap();
    let mut hook = csi_hook;
    engine.run_dmg_burst(6, DmgExchangeType::Bistatic, DMG_SCHEDULE, &mut hook).unwrap()
}

/// DMG multistatic: three responders, two bursts of two exchanges.
pub fn dmg_multistatic() -> Vec<ExchangeRecord> {
    let mut engine = dmg_engine(4);
    engine.setup_session(SessionAttrs::simple(8, 1, vec![2, 3, 4])).unwrap();
    let schedule = DmgBurstSchedule { n_bursts: 2, ..DMG_SCHEDULE };
    let mut hook = csi_hook;
    engine.run_dmg_burst(8, DmgExchangeType::Multistatic, schedule, &mut hook).unwrap()
}

/// Accepted sensing-by-proxy request (STA 3 via AP 1, responders 2 and 3).
pub fn sbp_forwarding() -> SbpOutcome {
    let mut engine = SensingEngine::new(SIFS_SUB7_S);
    let mut proxy = StaProfile::new(1, true);
    proxy.sbp_capable = true;
    engine.register_sta(proxy).unwrap();
    engine.register_sta(StaProfile::new(2, false)).unwrap();
    engine.register_sta(StaProfile::new(3, false)).unwrap();
    let attrs = SessionAttrs::simple(9, 3, vec![2, 3]);
    let mut hook = csi_hook;
    engine.run_sbp(3, 1, attrs, &[Phase::NdpaSounding, Phase::Reporting], &mut hook).unwrap()
}

/// Denied sensing-by-proxy request (the AP lacks the capability).
pub fn sbp_denied() -> SbpOutcome {
    let mut engine = SensingEngine::new(SIFS_SUB7_S);
    engine.register_sta(StaProfile::new(1, true)).unwrap();
    engine.register_sta(StaProfile::new(3, false)).unwrap();
    let attrs = SessionAttrs::simple(9, 3, vec![3]);
    let mut hook = csi_hook;
    engine.run_sbp(3, 1, attrs, &[Phase::NdpaSounding, Phase::Reporting], &mut hook).unwrap()
}

/// The full SBP event stream: protocol frames merged with the proxied
/// exchange's frames in time order.
pub fn sbp_full_trace(outcome: &SbpOutcome) -> Vec<Event> {
    let mut events = outcome.trace.clone();
    for r in &outcome.records {
        events.extend(r.trace.iter().cloned());
    }
    chronological(events)
}
