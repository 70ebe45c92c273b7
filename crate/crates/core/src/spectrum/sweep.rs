// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! One- and two-axis ZZ landscapes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{compute_zz, flux_to_frequency};
use crate::error::{Error, Result};
use crate::hilbert::{DeviceSpec, ModeLabel};
use crate::io::fmt_sig;
use crate::scalar::{to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Q2FrequencyGhz,
    BusFrequencyGhz,
    /// Bus flux in Φ₀, mapped through the device's SQUID.
    FluxPhi0,
}

impl SweepParameter {
    pub fn column_name(self) -> &'static str {
        match self {
            SweepParameter::Q2FrequencyGhz => "q2_frequency_ghz",
            SweepParameter::BusFrequencyGhz => "bus_frequency_ghz",
            SweepParameter::FluxPhi0 => "flux_phi0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis<T> {
    pub parameter: SweepParameter,
    pub values: Vec<T>,
}

/// One grid cell: the ZZ value, or the reason it is masked.
#[derive(Debug, Clone, PartialEq)]
pub struct ZZCell<T> {
    pub zz_mhz: Option<T>,
    pub mask_reason: Option<String>,
}

impl<T> ZZCell<T> {
    pub fn is_masked(&self) -> bool {
        self.mask_reason.is_some()
    }
}

/// ZZ over a one- or two-axis grid; cells are stored row-major with the
/// last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ZZMap<T> {
    pub axes: Vec<SweepAxis<T>>,
    pub cells: Vec<ZZCell<T>>,
}

impl<T: Scalar> ZZMap<T> {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    /// Cell at grid indices `idx` (one per axis).
    pub fn cell(&self, idx: &[usize]) -> &ZZCell<T> {
        let flat = idx
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.values.len() + i);
        &self.cells[flat]
    }

    fn coords(&self, flat: usize) -> Vec<T> {
        let shape = self.shape();
        let mut rem = flat;
        let mut out = vec![T::zero(); shape.len()];
        for k in (0..shape.len()).rev() {
            out[k] = self.axes[k].values[rem % shape[k]];
            rem /= shape[k];
        }
        out
    }

    /// CSV with one row per cell: axis values, `zz_mhz`, `masked`.
    /// Masked cells leave `zz_mhz` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for a in &self.axes {
            out.push_str(a.parameter.column_name());
            out.push(',');
        }
        out.push_str("zz_mhz,masked\n");
        for (k, cell) in self.cells.iter().enumerate() {
            for v in self.coords(k) {
                out.push_str(&fmt_sig(to_f64(v)));
                out.push(',');
            }
            if let Some(z) = cell.zz_mhz {
                out.push_str(&fmt_sig(to_f64(z)));
            }
            out.push(',');
            out.push_str(if cell.is_masked() { "1" } else { "0" });
            out.push('\n');
        }
        out
    }

    /// JSON with the axes and nested `zz_mhz` / `masked` / `mask_reason` arrays.
    pub fn to_json(&self) -> serde_json::Value {
        let axes: Vec<_> = self
            .axes
            .iter()
            .map(|a| {
                json!({
                    "parameter": a.parameter.column_name(),
                    "values": a.values.iter().map(|v| to_f64(*v)).collect::<Vec<_>>(),
                })
            })
            .collect();
        let zz = |c: &ZZCell<T>| {
            c.zz_mhz
                .map(to_f64)
                .map_or(serde_json::Value::Null, |v| json!(v))
        };
        let masked = |c: &ZZCell<T>| json!(c.is_masked());
        let reason = |c: &ZZCell<T>| {
            c.mask_reason
                .clone()
                .map_or(serde_json::Value::Null, |r| json!(r))
        };
        json!({
            "axes": axes,
            "zz_mhz": self.nest(zz),
            "masked": self.nest(masked),
            "mask_reason": self.nest(reason),
        })
    }

    fn nest(&self, f: impl Fn(&ZZCell<T>) -> serde_json::Value) -> serde_json::Value {
        let flat: Vec<_> = self.cells.iter().map(f).collect();
        match self.axes.len() {
            1 => json!(flat),
            _ => {
                let inner = self.axes[1].values.len();
                json!(flat.chunks(inner).map(|c| c.to_vec()).collect::<Vec<_>>())
            }
        }
    }
}

fn apply<T: Scalar>(spec: &mut DeviceSpec<T>, bus: &mut T, p: SweepParameter, v: T) -> Result<()> {
    match p {
        SweepParameter::Q2FrequencyGhz => spec.mode_mut(ModeLabel::Q2).frequency_ghz = v,
        SweepParameter::BusFrequencyGhz => *bus = v,
        SweepParameter::FluxPhi0 => {
            let squid = spec.squid.ok_or_else(|| {
                Error::config("device.squid", "flux axis requires a SQUID description")
            })?;
            *bus = flux_to_frequency(&squid, v);
        }
    }
    Ok(())
}

/// ZZ at every grid point. Cells whose labeling fails are masked with the
/// error message; other errors abort the sweep. Cells are independent and
/// evaluated in parallel on the current rayon pool.
pub fn zz_sweep<T: Scalar>(spec: &DeviceSpec<T>, axes: Vec<SweepAxis<T>>) -> Result<ZZMap<T>> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::config("axes", "one or two sweep axes required"));
    }
    for (k, a) in axes.iter().enumerate() {
        if a.values.is_empty() {
            return Err(Error::config(format!("axes[{k}].values"), "grid is empty"));
        }
        if a.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(
                format!("axes[{k}].values"),
                "grid values must be finite",
            ));
        }
        if a.values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::config(
                format!("axes[{k}].values"),
                "grid must be sorted ascending",
            ));
        }
    }
    if axes.len() == 2 {
        let bus_like = |p| {
            matches!(
                p,
                SweepParameter::BusFrequencyGhz | SweepParameter::FluxPhi0
            )
        };
        if axes[0].parameter == axes[1].parameter
            || (bus_like(axes[0].parameter) && bus_like(axes[1].parameter))
        {
            return Err(Error::config(
                "axes",
                "the two axes must control different parameters",
            ));
        }
    }
    spec.require_levels(3)?;

    let shape: Vec<usize> = axes.iter().map(|a| a.values.len()).collect();
    let total: usize = shape.iter().product();
    let cells: Result<Vec<ZZCell<T>>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut local = spec.clone();
            let mut bus = spec.mode(ModeLabel::Bus).frequency_ghz;
            let mut rem = flat;
            let mut idx = vec![0; shape.len()];
            for k in (0..shape.len()).rev() {
                idx[k] = rem % shape[k];
                rem /= shape[k];
            }
            for (axis, &i) in axes.iter().zip(&idx) {
                apply(&mut local, &mut bus, axis.parameter, axis.values[i])?;
            }
            match compute_zz(&local, bus) {
                Ok(z) => Ok(ZZCell {
                    zz_mhz: Some(z),
                    mask_reason: None,
                }),
                Err(e @ Error::AmbiguousLabel { .. }) => Ok(ZZCell {
                    zz_mhz: None,
                    mask_reason: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect();
    Ok(ZZMap {
        axes,
        cells: cells?,
    })
}

/// Evenly spaced grid including both endpoints.
pub fn linspace<T: Scalar>(start: T, stop: T, count: usize) -> Vec<T> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                start + (stop - start) * crate::scalar::lit::<T>(k as f64 / (count - 1) as f64)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn empty_grid_rejected() {
        let d = presets::bbq_model();
        let r = zz_sweep(
            &d,
            vec![SweepAxis {
                parameter: SweepParameter::BusFrequencyGhz,
                values: vec![],
            }],
        );
        assert!(matches!(r, Err(Error::Config { .. })));
    }

    #[test]
    fn pointwise_identical_to_direct_calls() {
        let d = presets::bbq_model();
        let buses = linspace(2.5, 5.3, 15);
        let map = zz_sweep(
            &d,
            vec![SweepAxis {
                parameter: SweepParameter::BusFrequencyGhz,
                values: buses.clone(),
            }],
        )
        .unwrap();
        for (k, b) in buses.iter().enumerate() {
            match compute_zz(&d, *b) {
                Ok(z) => assert_eq!(map.cells[k].zz_mhz, Some(z)),
                Err(_) => assert!(map.cells[k].is_masked()),
            }
        }
    }

    #[test]
    fn csv_layout() {
        let d = presets::bbq_model();
        let map = zz_sweep(
            &d,
            vec![
                SweepAxis {
                    parameter: SweepParameter::Q2FrequencyGhz,
                    values: vec![4.8, 4.9],
                },
                SweepAxis {
                    parameter: SweepParameter::BusFrequencyGhz,
                    values: vec![3.0, 4.9, 6.0],
                },
            ],
        )
        .unwrap();
        let csv = map.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "q2_frequency_ghz,bus_frequency_ghz,zz_mhz,masked");
        assert_eq!(lines.len(), 7);
        assert!(lines[2].starts_with("4.8,4.9,,1"), "{}", lines[2]);
        let json = map.to_json();
        assert_eq!(json["zz_mhz"].as_array().unwrap().len(), 2);
        assert_eq!(json["zz_mhz"][0].as_array().unwrap().len(), 3);
    }
}
