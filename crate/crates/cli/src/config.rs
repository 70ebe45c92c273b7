// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: strict JSON with dotted-path overrides.

use std::path::{Path, PathBuf};

use bbq::dynamics::{Operator4, PropagationConfig};
use bbq::rb::NoiseModel;
use bbq::spectrum::fit::FitOptions;
use bbq::spectrum::sweep::SweepParameter;
use bbq::spectrum::FluxBranch;
use bbq::{DeviceSpec, PulseParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Either explicit values or an evenly spaced range (endpoints included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, Failure> {
        let v = match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, count } => {
                if *count < 2 {
                    return Err(Failure::config(
                        format!("{field}.count"),
                        "must be at least 2",
                    ));
                }
                (0..*count)
                    .map(|k| start + (stop - start) * k as f64 / (*count - 1) as f64)
                    .collect()
            }
        };
        if v.is_empty() {
            return Err(Failure::config(field, "grid is empty"));
        }
        if let Some(k) = v.iter().position(|x| !x.is_finite()) {
            return Err(Failure::config(format!("{field}[{k}]"), "non-finite value"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub parameter: SweepParameter,
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<AxisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZzCurveConfig {
    pub flux_phi0: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindZeroConfig {
    pub bracket_ghz: [f64; 2],
    /// Report every sign change instead of the first.
    #[serde(default)]
    pub all: bool,
    /// Fall back to the |ZZ| minimum when ZZ never changes sign.
    #[serde(default)]
    pub allow_minimum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// CSV with `flux_phi0` and `zz_mhz` columns, relative to the config file.
    pub data_path: PathBuf,
    #[serde(default)]
    pub options: FitOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxOutputConfig {
    pub anchor_qubit_ghz: f64,
    #[serde(default)]
    pub branch: FluxBranch,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    /// Emit a double pulse with this flat delay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_delay_ns: Option<f64>,
    /// Convert to bus flux through the device SQUID.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxOutputConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Report the pulse as given.
    #[default]
    Report,
    CalibrateCz,
    CalibrateDelay,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    #[serde(default)]
    pub mode: GateMode,
    /// Double-pulse delay for `report`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_delay_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_bracket_ns: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmpScanConfig {
    pub scales: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayScanConfig {
    pub delays_ns: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum NoiseConfig {
    Ideal,
    DepolarizingAfterCz {
        epsilon: f64,
    },
    CustomCz {
        operator: Operator4,
    },
    /// The `report.operator` of a `gate` JSON output, relative to the config file.
    GateReport {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbSettings {
    pub depths: Vec<usize>,
    pub sequences_per_depth: usize,
    pub noise: NoiseConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zz_curve: Option<ZzCurveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub find_zero: Option<FindZeroConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseParams>,
    #[serde(default)]
    pub waveform: WaveformConfig,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub gate: GateConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_scan: Option<AmpScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_scan: Option<DelayScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rb: Option<RbSettings>,
}

/// Unwraps a required block or fails naming it.
pub fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
    block
        .as_ref()
        .ok_or_else(|| Failure::config(name, "block is required by this command"))
}

/// Sets `path` (dot separated, numeric segments index arrays) to `raw`,
/// parsed as JSON when possible and as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), Failure> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::config(assignment, "override must look like key.path=value"))?;
    if path.is_empty() {
        return Err(Failure::config(assignment, "empty key path"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (k, seg) in segments.iter().enumerate() {
        let last = k + 1 == segments.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg.parse().map_err(|_| {
                    Failure::config(path, format!("segment `{seg}` must index an array"))
                })?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    Failure::config(path, format!("index {idx} out of range (length {len})"))
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(Failure::config(
                    path,
                    format!("segment `{seg}` descends into a scalar"),
                ));
            }
        };
    }
    unreachable!("the last segment returns")
}

pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::config(
            path.display().to_string(),
            format!("cannot read config: {e}"),
        )
    })?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| {
        Failure::config(
            path.display().to_string(),
            format!(
                "invalid JSON at line {} column {}: {e}",
                e.line(),
                e.column()
            ),
        )
    })?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let mut cfg: RunConfig =
        serde_json::from_value(value).map_err(|e| Failure::config("config", e.to_string()))?;
    if let Some(d) = cfg.device.as_mut() {
        d.normalize().map_err(Failure::from)?;
    }
    Ok(cfg)
}

/// Resolves `p` against the directory holding the config file.
pub fn relative_to(config_path: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}

impl RunConfig {
    /// Files the run reads, resolved against the config location.
    pub fn input_files(&self, config_path: &Path) -> Vec<PathBuf> {
        let mut v = vec![config_path.to_path_buf()];
        if let Some(f) = &self.fit {
            v.push(relative_to(config_path, &f.data_path));
        }
        if let Some(RbSettings {
            noise: NoiseConfig::GateReport { path },
            ..
        }) = &self.rb
        {
            v.push(relative_to(config_path, path));
        }
        v
    }
}

impl NoiseConfig {
    pub fn resolve(&self, config_path: &Path) -> Result<NoiseModel, Failure> {
        Ok(match self {
            NoiseConfig::Ideal => NoiseModel::Ideal,
            NoiseConfig::DepolarizingAfterCz { epsilon } => {
                NoiseModel::DepolarizingAfterCz { epsilon: *epsilon }
            }
            NoiseConfig::CustomCz { operator } => NoiseModel::CustomCz {
                operator: operator.clone(),
            },
            NoiseConfig::GateReport { path } => {
                let full = relative_to(config_path, path);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    Failure::config(
                        "rb.noise.path",
                        format!("cannot read {}: {e}", full.display()),
                    )
                })?;
                let v: Value = serde_json::from_str(&text).map_err(|e| {
                    Failure::config("rb.noise.path", format!("{}: {e}", full.display()))
                })?;
                let op = v.pointer("/report/operator").cloned().ok_or_else(|| {
                    Failure::config("rb.noise.path", "file has no report.operator")
                })?;
                let operator: Operator4 = serde_json::from_value(op).map_err(|e| {
                    Failure::config("rb.noise.path", format!("report.operator: {e}"))
                })?;
                NoiseModel::CustomCz { operator }
            }
        })
    }
}
