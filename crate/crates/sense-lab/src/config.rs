//! Scenario configuration documents: the JSON schema accepted by every
//! subcommand's `--scenario` flag, and its mapping onto core types.
//!
//! A document may name a `preset` and override any subset of fields; the
//! resolved scenario (preset defaults plus overrides) is what runs, and a
//! fully populated snapshot of it goes into the run manifest so a run can
//! be reproduced from the manifest alone.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use sense_core::channel::{
    load_scenario, Antenna, ClutterParams, Preset, Scenario, TargetModel, Vec3, Waypoint,
};

// ─── Document types ───────────────────────────────────────────────────────

/// 3-vector as `{x, y, z}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XyzDoc {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<XyzDoc> for Vec3 {
    fn from(v: XyzDoc) -> Self {
        Vec3::new(v.x, v.y, v.z)
    }
}

impl From<Vec3> for XyzDoc {
    fn from(v: Vec3) -> Self {
        Self { x: v.x, y: v.y, z: v.z }
    }
}

/// Antenna pattern, tagged by `type`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AntennaDoc {
    Isotropic,
    Directional { boresight: XyzDoc, beamwidth_deg: f64 },
}

/// One trajectory waypoint `{t, x, y, z}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointDoc {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Moving target: waypoints plus radar cross-section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDoc {
    pub waypoints: Vec<WaypointDoc>,
    pub rcs: f64,
}

/// AR(1) clutter `{a, var}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterDoc {
    pub a: f64,
    pub var: f64,
}

/// Scenario document; absent keys fall back to the preset.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioDoc {
    pub preset: Option<String>,
    pub room: Option<XyzDoc>,
    pub tx: Option<XyzDoc>,
    pub rx: Option<XyzDoc>,
    pub antenna: Option<AntennaDoc>,
    pub carrier_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub target: Option<TargetDoc>,
    pub clutter: Option<ClutterDoc>,
    pub seed: Option<u64>,
}

// ─── Resolution ───────────────────────────────────────────────────────────

fn preset_from_name(name: Option<&str>) -> Result<Preset> {
    match name {
        None | Some("custom") => Ok(Preset::Custom),
        Some("living_room") => Ok(Preset::LivingRoom),
        Some("conference_room") => Ok(Preset::ConferenceRoom),
        Some(other) => {
            bail!("unknown preset {other:?} (expected living_room, conference_room, or custom)")
        }
    }
}

fn preset_name(preset: Preset) -> &'static str {
    match preset {
        Preset::LivingRoom => "living_room",
        Preset::ConferenceRoom => "conference_room",
        Preset::Custom => "custom",
    }
}

/// Preset defaults plus the document's overrides, validated.
pub fn resolve_scenario(doc: &ScenarioDoc) -> Result<Scenario> {
    let mut s = load_scenario(preset_from_name(doc.preset.as_deref())?);
    if let Some(v) = doc.room {
        s.room = v.into();
    }
    if let Some(v) = doc.tx {
        s.tx_pos = v.into();
    }
    if let Some(v) = doc.rx {
        s.rx_pos = v.into();
    }
    if let Some(a) = &doc.antenna {
        s.antenna = match a {
            AntennaDoc::Isotropic => Antenna::Isotropic,
            AntennaDoc::Directional { boresight, beamwidth_deg } => Antenna::Directional {
                boresight: (*boresight).into(),
                beamwidth_deg: *beamwidth_deg,
            },
        };
    }
    if let Some(f) = doc.carrier_hz {
        s.carrier_hz = f;
    }
    if let Some(b) = doc.bandwidth_hz {
        s.bandwidth_hz = b;
    }
    if let Some(t) = &doc.target {
        s.target = TargetModel {
            waypoints: t
                .waypoints
                .iter()
                .map(|w| Waypoint { t_s: w.t, pos: Vec3::new(w.x, w.y, w.z) })
                .collect(),
            rcs: t.rcs,
        };
    }
    if let Some(c) = doc.clutter {
        s.clutter = Some(ClutterParams { ar_coefficient: c.a, innovation_variance: c.var });
    }
    if let Some(seed) = doc.seed {
        s.seed = seed;
    }
    s.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(s)
}

/// Fully populated document describing a resolved scenario.
pub fn snapshot(s: &Scenario) -> ScenarioDoc {
    ScenarioDoc {
        preset: Some(preset_name(s.preset).to_string()),
        room: Some(s.room.into()),
        tx: Some(s.tx_pos.into()),
        rx: Some(s.rx_pos.into()),
        antenna: Some(match s.antenna {
            Antenna::Isotropic => AntennaDoc::Isotropic,
            Antenna::Directional { boresight, beamwidth_deg } => {
                AntennaDoc::Directional { boresight: boresight.into(), beamwidth_deg }
            }
        }),
        carrier_hz: Some(s.carrier_hz),
        bandwidth_hz: Some(s.bandwidth_hz),
        target: Some(TargetDoc {
            waypoints: s
                .target
                .waypoints
                .iter()
                .map(|w| WaypointDoc { t: w.t_s, x: w.pos.x, y: w.pos.y, z: w.pos.z })
                .collect(),
            rcs: s.target.rcs,
        }),
        clutter: s
            .clutter
            .map(|c| ClutterDoc { a: c.ar_coefficient, var: c.innovation_variance }),
        seed: Some(s.seed),
    }
}

/// Reads, parses, and resolves a scenario file without modifying it.
pub fn load_scenario_file(path: &Path) -> Result<(ScenarioDoc, Scenario)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: ScenarioDoc =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let scenario = resolve_scenario(&doc)?;
    Ok((doc, scenario))
}

/// Seed precedence: explicit flag, then `SENSE_LAB_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("SENSE_LAB_SEED").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0)
}

// ─── Tests ────────────────────────────────────────────────────────────────
