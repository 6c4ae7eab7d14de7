//! Declarative scenario configuration: JSON schema, validation, named
//! presets, dotted-path overrides, and execution.
//!
//! A document either names a `preset` (the canonical link, optionally
//! re-parameterized through `params`) or lists explicit `coils` and
//! `drives`. Keys carry SI unit suffixes (`radius_m`, `capacitance_f`)
//! so a config can never be read in the wrong unit. Unknown keys are
//! rejected with the offending path.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{frequency_sweep, CircuitModel, FrequencySweepSpacing};
use crate::emit::OutputFormat;
use crate::error::{Error, Result};
use crate::magnetics::{coupling_coefficient, MutualMethod, DEFAULT_NEUMANN_SEGMENTS};
use crate::model::{CoilSpec, CoupledNetwork, Drive, Medium, SweepTable};
use crate::scenarios::{
    build_fd_link, case_network, distance_sweep, orientation_sweep, CaseId, FdLinkParams,
    RotationAxis, ORIENTATION_PRESET_DISTANCE,
};

/// Schema revision accepted by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Names accepted by `preset` (in documents and on the command line).
pub const PRESET_NAMES: [&str; 5] = ["case1", "case2", "case3", "fig-distance", "fig-orientation"];

/// What the sweep variable is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Frequency,
    Distance,
    Angle,
}

/// Sweep request: `steps` points over `[min, max]`. The unit follows the
/// kind: Hz, meters, or degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// Rotation axis, angle sweeps only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<RotationAxis>,
    /// Grid spacing, frequency sweeps only (linear when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<FrequencySweepSpacing>,
}

/// Where and how results are written. Path "-" means standard output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: String,
}

/// Optional re-parameterization of a preset, all fields defaulted from
/// the canonical setup.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_vertical_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_horizontal_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turns: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_vertical_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_horizontal_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_amplitude_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wire_radius_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium_attenuation: Option<bool>,
}

/// A fully parsed scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<Medium>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutual_method: Option<MutualMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neumann_segments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coils: Option<Vec<CoilSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drives: Option<BTreeMap<String, Drive>>,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    /// Cross-field validation; field-level invariants were already
    /// enforced during deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        match (&self.preset, &self.coils) {
            (Some(name), None) => {
                if !PRESET_NAMES.contains(&name.as_str()) {
                    return Err(Error::Config(format!(
                        "preset: unknown name '{name}' (known: {})",
                        PRESET_NAMES.join(", ")
                    )));
                }
                if self.drives.is_some() {
                    return Err(Error::Config(
                        "drives: a preset supplies its own drives; remove the `drives` section".into(),
                    ));
                }
            }
            (None, Some(coils)) => {
                if coils.is_empty() {
                    return Err(Error::Config("coils: must not be empty".into()));
                }
                if self.params.is_some() {
                    return Err(Error::Config(
                        "params: only valid together with `preset`".into(),
                    ));
                }
                let mut seen = std::collections::BTreeSet::new();
                for (i, coil) in coils.iter().enumerate() {
                    if !seen.insert(coil.id()) {
                        return Err(Error::Config(format!(
                            "coils[{i}]: duplicate coil id '{}'",
                            coil.id()
                        )));
                    }
                }
                if let Some(drives) = &self.drives {
                    for id in drives.keys() {
                        if !coils.iter().any(|c| c.id() == id) {
                            return Err(Error::Config(format!("drives.{id}: unknown coil id")));
                        }
                    }
                }
                if self.sweep.kind != SweepKind::Frequency {
                    return Err(Error::Config(
                        "sweep.kind: distance and angle sweeps need a `preset` scenario".into(),
                    ));
                }
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("exactly one of `preset` or `coils` must be present".into()));
            }
            (None, None) => {
                return Err(Error::Config("exactly one of `preset` or `coils` must be present".into()));
            }
        }
        if self.sweep.axis.is_some() && self.sweep.kind != SweepKind::Angle {
            return Err(Error::Config("sweep.axis: only valid for angle sweeps".into()));
        }
        if self.sweep.spacing.is_some() && self.sweep.kind != SweepKind::Frequency {
            return Err(Error::Config("sweep.spacing: only valid for frequency sweeps".into()));
        }
        if self.sweep.steps == 0 {
            return Err(Error::Config("sweep.steps: must be >= 1".into()));
        }
        if !self.sweep.min.is_finite() || !self.sweep.max.is_finite() {
            return Err(Error::Config("sweep bounds must be finite".into()));
        }
        if self.sweep.steps > 1 && !(self.sweep.min < self.sweep.max) {
            return Err(Error::Config("sweep: min must be < max (or use steps = 1)".into()));
        }
        match self.sweep.kind {
            SweepKind::Frequency | SweepKind::Distance => {
                if !(self.sweep.min > 0.0) {
                    return Err(Error::Config("sweep.min: must be > 0".into()));
                }
            }
            SweepKind::Angle => {
                if !(0.0..=90.0).contains(&self.sweep.min) || !(0.0..=90.0).contains(&self.sweep.max) {
                    return Err(Error::Config("sweep: angles must lie in [0, 90] degrees".into()));
                }
            }
        }
        if self.output.path.is_empty() {
            return Err(Error::Config("output.path: must not be empty".into()));
        }
        if let Some(segments) = self.neumann_segments {
            if segments < crate::magnetics::MIN_NEUMANN_SEGMENTS {
                return Err(Error::Config(format!(
                    "neumann_segments: must be >= {}",
                    crate::magnetics::MIN_NEUMANN_SEGMENTS
                )));
            }
        }
        Ok(())
    }
}

/// Parses and validates a scenario document. Syntax errors carry line
/// and column; schema errors carry the offending path.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut deserializer = serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(&mut deserializer)
        .map_err(|e| Error::Config(format!("at `{}`: {}", e.path(), e.inner())))?;
    config.validate()?;
    Ok(config)
}

/// Renders a config back to pretty JSON (the inverse of
/// [`parse_scenario`] up to formatting).
pub fn serialize_scenario(config: &ScenarioConfig) -> String {
    let mut text = serde_json::to_string_pretty(config).expect("config rendering cannot fail");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Presets

/// Expands a named paper scenario into a full config.
pub fn expand_preset(name: &str) -> Result<ScenarioConfig> {
    let base = |sweep: SweepConfig| ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        preset: Some(name.to_string()),
        params: None,
        medium: None,
        mutual_method: None,
        neumann_segments: None,
        coils: None,
        drives: None,
        sweep,
        output: OutputConfig { format: OutputFormat::Csv, path: "-".to_string() },
    };
    let frequency_band = SweepConfig {
        kind: SweepKind::Frequency,
        min: 30_000.0,
        max: 60_000.0,
        steps: 301,
        axis: None,
        spacing: None,
    };
    let config = match name {
        "case1" | "case2" | "case3" => base(frequency_band),
        "fig-distance" => {
            let mut config = base(SweepConfig {
                kind: SweepKind::Distance,
                min: 0.3,
                max: 2.0,
                steps: 35,
                axis: None,
                spacing: None,
            });
            // the distance figure is reported in 0.1 S/m water
            config.medium = Some(Medium::new(0.1, 1.0, 81.0)?);
            config
        }
        "fig-orientation" => {
            let mut config = base(SweepConfig {
                kind: SweepKind::Angle,
                min: 0.0,
                max: 90.0,
                steps: 7,
                axis: Some(RotationAxis::Vertical),
                spacing: None,
            });
            config.params = Some(ParamsConfig {
                node_distance_m: Some(ORIENTATION_PRESET_DISTANCE),
                ..ParamsConfig::default()
            });
            config
        }
        other => {
            return Err(Error::Config(format!(
                "preset: unknown name '{other}' (known: {})",
                PRESET_NAMES.join(", ")
            )));
        }
    };
    Ok(config)
}

/// Which case a preset excites during frequency sweeps.
fn preset_case(name: &str) -> CaseId {
    match name {
        "case1" => CaseId::Case1,
        "case2" => CaseId::Case2,
        _ => CaseId::Case3,
    }
}

// ---------------------------------------------------------------------------
// Overrides

/// Applies dotted-path `key=value` overrides after preset expansion and
/// re-validates. Values parse as JSON scalars, falling back to strings
/// (`mutual_method=neumann`, `params.node_distance_m=1.2`,
/// `sweep.steps=101`). Missing intermediate objects are created, so
/// optional sections can be introduced by an override.
pub fn apply_overrides(config: &ScenarioConfig, overrides: &[String]) -> Result<ScenarioConfig> {
    if overrides.is_empty() {
        return Ok(config.clone());
    }
    let mut doc = serde_json::to_value(config)
        .map_err(|e| Error::Config(format!("cannot re-render config: {e}")))?;
    for entry in overrides {
        let (path, raw) = entry
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{entry}': expected KEY=VALUE")))?;
        let value: serde_json::Value = match serde_json::from_str(raw) {
            Ok(v) => v,
            Err(_) => serde_json::Value::String(raw.to_string()),
        };
        set_path(&mut doc, path, value)
            .map_err(|e| e.with_context(&format!("override '{entry}'")))?;
    }
    let text = serde_json::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
    parse_scenario(&text)
}

fn set_path(doc: &mut serde_json::Value, path: &str, value: serde_json::Value) -> Result<()> {
    let mut cursor = doc;
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(format!("bad override path '{path}'")));
    }
    for (k, segment) in segments.iter().enumerate() {
        let last = k == segments.len() - 1;
        if let Ok(index) = segment.parse::<usize>() {
            let array = cursor
                .as_array_mut()
                .ok_or_else(|| Error::Config(format!("path segment '{segment}' indexes a non-array")))?;
            if index >= array.len() {
                return Err(Error::Config(format!("index {index} out of range (len {})", array.len())));
            }
            if last {
                array[index] = value;
                return Ok(());
            }
            cursor = &mut array[index];
        } else {
            if cursor.is_null() {
                *cursor = serde_json::Value::Object(serde_json::Map::new());
            }
            let object = cursor
                .as_object_mut()
                .ok_or_else(|| Error::Config(format!("path segment '{segment}' indexes a non-object")))?;
            if last {
                object.insert(segment.to_string(), value);
                return Ok(());
            }
            cursor = object.entry(segment.to_string()).or_insert(serde_json::Value::Null);
        }
    }
    unreachable!("path set returns from the last segment");
}

// ---------------------------------------------------------------------------
// Execution

fn resolve_params(config: &ScenarioConfig) -> Result<FdLinkParams> {
    let mut params = FdLinkParams::default();
    if let Some(medium) = config.medium {
        params.medium = medium;
    }
    if let Some(method) = config.mutual_method {
        params.mutual_method = method;
    }
    if let Some(segments) = config.neumann_segments {
        params.neumann_segments = segments;
    }
    if let Some(p) = &config.params {
        if let Some(v) = p.node_distance_m {
            params.node_distance = v;
        }
        if let Some(v) = p.r_vertical_m {
            params.r_vertical = v;
        }
        if let Some(v) = p.r_horizontal_m {
            params.r_horizontal = v;
        }
        if let Some(v) = p.turns {
            params.turns = v;
        }
        if let Some(v) = p.f0_hz {
            params.f0 = v;
        }
        if let Some(v) = p.c_vertical_f {
            params.c_vertical = v;
        }
        if let Some(v) = p.c_horizontal_f {
            params.c_horizontal = v;
        }
        if let Some(v) = p.drive_amplitude_a {
            params.drive_amplitude = v;
        }
        if let Some(v) = p.wire_radius_m {
            params.wire_radius = v;
        }
        if let Some(v) = p.medium_attenuation {
            params.medium_attenuation = v;
        }
    }
    params.validate()?;
    Ok(params)
}

/// Builds the network a config describes (preset or explicit coils),
/// with the drive assignment it implies.
pub fn build_network(config: &ScenarioConfig) -> Result<CoupledNetwork> {
    config.validate()?;
    if let Some(name) = &config.preset {
        let params = resolve_params(config)?;
        return case_network(preset_case(name), &params);
    }
    let coils = config.coils.clone().expect("validated: coils present without preset");
    let medium = config.medium.unwrap_or_default();
    let method = config.mutual_method.unwrap_or(MutualMethod::Dipole);
    let segments = config.neumann_segments.unwrap_or(DEFAULT_NEUMANN_SEGMENTS);
    let mutual = crate::magnetics::mutual_matrix(&coils, &medium, method, segments)?;
    let drives = coils
        .iter()
        .map(|coil| match &config.drives {
            Some(map) => map.get(coil.id()).copied().unwrap_or_else(Drive::passive),
            None => Drive::passive(),
        })
        .collect();
    CoupledNetwork::new(coils, medium, mutual, drives)
}

/// Runs the sweep a config requests and returns the table.
pub fn execute(config: &ScenarioConfig) -> Result<SweepTable> {
    config.validate()?;
    match config.sweep.kind {
        SweepKind::Frequency => {
            let network = build_network(config)?;
            frequency_sweep(
                &network,
                config.sweep.min,
                config.sweep.max,
                config.sweep.steps,
                config.sweep.spacing.unwrap_or_default(),
            )
        }
        SweepKind::Distance => {
            let params = resolve_params(config)?;
            distance_sweep(&params, config.sweep.min, config.sweep.max, config.sweep.steps)
        }
        SweepKind::Angle => {
            let params = resolve_params(config)?;
            let angles = crate::circuit::grid(
                config.sweep.min,
                config.sweep.max,
                config.sweep.steps,
                FrequencySweepSpacing::Linear,
            )?;
            orientation_sweep(&params, &angles, config.sweep.axis.unwrap_or_default())
        }
    }
}

/// Renders the mutual matrix, coupling coefficients, and resolved lumped
/// elements of the network a config describes. Deterministic text.
pub fn mutual_report(config: &ScenarioConfig) -> Result<String> {
    let network = if let Some(_name) = &config.preset {
        let params = resolve_params(config)?;
        build_fd_link(&params)?
    } else {
        build_network(config)?
    };
    let model = CircuitModel::new(&network)?;
    let ids = network.coil_ids();

    let mut out = String::new();
    out.push_str("# resolved coils\n");
    out.push_str("# id  L_h  C_f  R_ohm\n");
    for (i, id) in ids.iter().enumerate() {
        out.push_str(&format!(
            "{id} {:.9e} {:.9e} {:.9e}\n",
            model.inductance()[i],
            model.capacitance()[i],
            model.resistance()[i]
        ));
    }
    out.push_str("# pairwise mutual inductance and coupling\n");
    out.push_str("# pair  M_h  k\n");
    for (i, j, m) in network.mutual().iter_pairs() {
        let k = coupling_coefficient(m, model.inductance()[i], model.inductance()[j])?;
        out.push_str(&format!("{}-{} {:+.9e} {:+.9e}\n", ids[i], ids[j], m, k));
    }
    Ok(out)
}
