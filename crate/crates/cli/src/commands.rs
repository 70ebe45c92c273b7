// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use bbq::dynamics::{
    amplitude_scan, calibrate_cz, calibrate_delay, delay_scan, gate_report, GateReport,
    PropagationConfig,
};
use bbq::io::fmt_sig;
use bbq::pulse::{compose_double_pulse, sample_pulse, to_flux_waveform};
use bbq::rb::{clifford_group, decomposition_stats, simulate_irb, simulate_rb, RbConfig};
use bbq::spectrum::fit::fit_coupling_params;
use bbq::spectrum::sweep::zz_sweep;
use bbq::spectrum::{find_zz_minimum, find_zz_zeros, flux_to_frequency, zz_vs_flux};
use bbq::{DeviceSpec, PulseParams, PulseWaveform, SweepAxis};
use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::config::{relative_to, require, GateMode, RunConfig};
use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    ZzMap,
    ZzCurve,
    ZzFit,
    FindZero,
    Pulse,
    Gate,
    AmpScan,
    DelayScan,
    Rb,
    Irb,
    CliffordStats,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ZzMap => "zz-map",
            Command::ZzCurve => "zz-curve",
            Command::ZzFit => "zz-fit",
            Command::FindZero => "find-zero",
            Command::Pulse => "pulse",
            Command::Gate => "gate",
            Command::AmpScan => "amp-scan",
            Command::DelayScan => "delay-scan",
            Command::Rb => "rb",
            Command::Irb => "irb",
            Command::CliffordStats => "clifford-stats",
        }
    }
}

/// What a command produced: summary fields plus both export forms.
pub struct Outcome {
    pub summary: Map<String, Value>,
    pub csv: String,
    pub json: Value,
}

fn summary(pairs: Value) -> Map<String, Value> {
    match pairs {
        Value::Object(m) => m,
        _ => unreachable!("summaries are objects"),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn device(cfg: &RunConfig) -> Result<&DeviceSpec, Failure> {
    require(&cfg.device, "device")
}

fn pulse(cfg: &RunConfig) -> Result<&PulseParams, Failure> {
    require(&cfg.pulse, "pulse")
}

fn json_of<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

pub fn run(cmd: Command, cfg: &RunConfig, config_path: &Path) -> Result<Outcome, Failure> {
    match cmd {
        Command::ZzMap => zz_map(cfg),
        Command::ZzCurve => zz_curve(cfg),
        Command::ZzFit => zz_fit(cfg, config_path),
        Command::FindZero => find_zero(cfg),
        Command::Pulse => pulse_cmd(cfg),
        Command::Gate => gate(cfg),
        Command::AmpScan => amp_scan(cfg),
        Command::DelayScan => delay_scan_cmd(cfg),
        Command::Rb => rb(cfg, config_path, false),
        Command::Irb => rb(cfg, config_path, true),
        Command::CliffordStats => clifford_stats(),
    }
}

fn zz_map(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = device(cfg)?;
    let sweep = require(&cfg.sweep, "sweep")?;
    let axes = sweep
        .axes
        .iter()
        .enumerate()
        .map(|(k, a)| {
            Ok(SweepAxis {
                parameter: a.parameter,
                values: a.grid.values(&format!("sweep.axes[{k}].grid"))?,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let map = zz_sweep(spec, axes)?;
    let vals: Vec<f64> = map.cells.iter().filter_map(|c| c.zz_mhz).collect();
    let masked = map.cells.iter().filter(|c| c.is_masked()).count();
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        summary: summary(json!({
            "cells": map.cells.len(),
            "masked": masked,
            "zz_min_mhz": if vals.is_empty() { Value::Null } else { json!(min) },
            "zz_max_mhz": if vals.is_empty() { Value::Null } else { json!(max) },
        })),
        csv: map.to_csv(),
        json: map.to_json(),
    })
}

fn zz_curve(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = device(cfg)?;
    let curve_cfg = require(&cfg.zz_curve, "zz_curve")?;
    let flux = curve_cfg.flux_phi0.values("zz_curve.flux_phi0")?;
    let squid = spec
        .squid
        .ok_or_else(|| Failure::config("device.squid", "required for flux curves"))?;
    let curve = zz_vs_flux(spec, &flux)?;
    let mut csv = String::from("flux_phi0,bus_frequency_ghz,zz_mhz,error\n");
    let mut rows = Vec::new();
    let mut failed = 0;
    for (phi, zz) in &curve {
        let f = flux_to_frequency(&squid, *phi);
        let (z, err) = match zz {
            Ok(z) => (Some(*z), None),
            Err(e) => {
                failed += 1;
                (None, Some(e.to_string()))
            }
        };
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig(*phi),
            fmt_sig(f),
            opt(z),
            err.as_deref().map(csv_text).unwrap_or_default()
        ));
        rows.push(json!({"flux_phi0": phi, "bus_frequency_ghz": f, "zz_mhz": z, "error": err}));
    }
    Ok(Outcome {
        summary: summary(json!({"points": curve.len(), "failed": failed})),
        csv,
        json: json!({ "points": rows }),
    })
}

/// Quotes free text for a CSV cell.
fn csv_text(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn read_measured(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let field = "fit.data_path";
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(field, format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Failure::config(field, "empty data file"))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Failure::config(field, format!("missing column `{name}`")))
    };
    let (cf, cz) = (col("flux_phi0")?, col("zz_mhz")?);
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |c: usize| cells.get(c).copied().unwrap_or("");
        if get(cz).is_empty() {
            continue;
        }
        let parse = |c: usize, name: &str| {
            get(c).parse::<f64>().map_err(|_| {
                Failure::config(
                    format!("{field} row {}", k + 1),
                    format!("bad `{name}` value"),
                )
            })
        };
        out.push((parse(cf, "flux_phi0")?, parse(cz, "zz_mhz")?));
    }
    Ok(out)
}

fn zz_fit(cfg: &RunConfig, config_path: &Path) -> Result<Outcome, Failure> {
    let spec = device(cfg)?;
    let fit_cfg = require(&cfg.fit, "fit")?;
    let measured = read_measured(&relative_to(config_path, &fit_cfg.data_path))?;
    let fit = fit_coupling_params(&measured, spec, fit_cfg.options)?;
    let mut names = vec!["g_q1_bus_ghz", "g_q2_bus_ghz", "g_q1_q2_ghz"];
    let mut values = vec![fit.g_q1_bus_ghz, fit.g_q2_bus_ghz, fit.g_q1_q2_ghz];
    if fit_cfg.options.fit_f_max {
        names.push("squid_f_max_ghz");
        values.push(fit.squid.f_max_ghz);
    }
    if fit_cfg.options.fit_flux_offset {
        names.push("squid_flux_offset");
        values.push(fit.squid.flux_offset);
    }
    let mut csv = String::from("parameter,value,std_error\n");
    for (k, n) in names.iter().enumerate() {
        csv.push_str(&format!(
            "{n},{},{}\n",
            fmt_sig(values[k]),
            opt(fit.standard_errors.get(k).copied().flatten())
        ));
    }
    Ok(Outcome {
        summary: summary(json!({
            "points": measured.len(),
            "g_q1_bus_ghz": fit.g_q1_bus_ghz,
            "g_q2_bus_ghz": fit.g_q2_bus_ghz,
            "g_q1_q2_ghz": fit.g_q1_q2_ghz,
            "residual_norm_mhz": fit.residual_norm_mhz,
        })),
        csv,
        json: json!({ "fit": fit, "device": fit.apply_to(spec) }),
    })
}

fn find_zero(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = device(cfg)?;
    let fz = require(&cfg.find_zero, "find_zero")?;
    let bracket = (fz.bracket_ghz[0], fz.bracket_ghz[1]);
    let (roots, kind) = match find_zz_zeros(spec, bracket) {
        Ok(r) => (if fz.all { r } else { vec![r[0]] }, "zero"),
        Err(bbq::Error::Bracket(_)) if fz.allow_minimum => {
            (vec![find_zz_minimum(spec, bracket)?.0], "minimum")
        }
        Err(e) => return Err(e.into()),
    };
    let zz: Vec<f64> = roots
        .iter()
        .map(|&r| bbq::spectrum::compute_zz(spec, r))
        .collect::<bbq::Result<_>>()?;
    let mut csv = String::from("bus_frequency_ghz,zz_mhz\n");
    for (r, z) in roots.iter().zip(&zz) {
        csv.push_str(&format!("{},{}\n", fmt_sig(*r), fmt_sig(*z)));
    }
    Ok(Outcome {
        summary: summary(
            json!({"kind": kind, "root_ghz": roots[0], "roots_ghz": roots, "zz_mhz": zz}),
        ),
        csv,
        json: json!({"kind": kind, "roots_ghz": roots, "zz_mhz": zz}),
    })
}

fn build_waveform(p: &PulseParams, delay: Option<f64>) -> Result<PulseWaveform, Failure> {
    Ok(match delay {
        Some(d) => compose_double_pulse(p, d)?,
        None => sample_pulse(p)?,
    })
}

fn pulse_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let p = pulse(cfg)?;
    let mut wf = build_waveform(p, cfg.waveform.double_delay_ns)?;
    if let Some(flux) = &cfg.waveform.flux {
        let squid = device(cfg)?
            .squid
            .ok_or_else(|| Failure::config("device.squid", "required for flux waveforms"))?;
        wf = to_flux_waveform(&wf, flux.anchor_qubit_ghz, &squid, flux.branch)?;
    }
    let (lo, hi) = wf
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    Ok(Outcome {
        summary: summary(json!({
            "kind": wf.kind,
            "samples": wf.len(),
            "duration_ns": wf.duration_ns(),
            "min": lo,
            "max": hi,
        })),
        csv: wf.to_csv(),
        json: json_of(&wf),
    })
}

fn report_rows(csv: &mut String, r: &GateReport) {
    for (k, v) in [
        ("cz_angle", r.cz_angle),
        ("iswap_angle", r.iswap_angle),
        ("leakage", r.leakage),
        ("fidelity", r.fidelity),
        ("virtual_z_q1", r.virtual_z[0]),
        ("virtual_z_q2", r.virtual_z[1]),
        ("duration_ns", r.duration_ns),
    ] {
        csv.push_str(&format!("{k},{}\n", fmt_sig(v)));
    }
}

fn report_summary(r: &GateReport) -> Value {
    json!({
        "cz_angle": r.cz_angle,
        "iswap_angle": r.iswap_angle,
        "leakage": r.leakage,
        "fidelity": r.fidelity,
        "duration_ns": r.duration_ns,
    })
}

fn gate(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = device(cfg)?;
    let p = pulse(cfg)?;
    let prop: &PropagationConfig = &cfg.propagation;
    let (params, report, delay, extra) = match cfg.gate.mode {
        GateMode::Report => {
            let wf = build_waveform(p, cfg.gate.double_delay_ns)?;
            let r = gate_report(spec, &wf, prop)?;
            (*p, r, wf.delay_ns, json!({}))
        }
        GateMode::CalibrateCz => {
            let c = calibrate_cz(spec, p, prop)?;
            (c.params, c.report, None, json!({"scale": c.scale}))
        }
        GateMode::CalibrateDelay => {
            let b = cfg.gate.delay_bracket_ns.ok_or_else(|| {
                Failure::config("gate.delay_bracket_ns", "required for calibrate_delay")
            })?;
            let c = calibrate_delay(spec, p, (b[0], b[1]), prop)?;
            (
                c.params,
                c.report,
                Some(c.delay_ns),
                json!({"rounds": c.rounds}),
            )
        }
    };
    let mut csv = String::from("quantity,value\n");
    report_rows(&mut csv, &report);
    csv.push_str(&format!("delta2_ghz,{}\n", fmt_sig(params.delta2_ghz)));
    if let Some(d) = delay {
        csv.push_str(&format!("delay_ns,{}\n", fmt_sig(d)));
    }
    let mut s = summary(report_summary(&report));
    s.insert("delta2_ghz".into(), json!(params.delta2_ghz));
    s.insert("delay_ns".into(), json!(delay));
    let mut j = json!({"params": params, "report": report, "delay_ns": delay});
    if let (Value::Object(m), Value::Object(e)) = (&mut j, extra) {
        m.extend(e);
    }
    Ok(Outcome {
        summary: s,
        csv,
        json: j,
    })
}

fn amp_scan(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = device(cfg)?;
    let p = pulse(cfg)?;
    let scan = require(&cfg.amp_scan, "amp_scan")?;
    let scales = scan.scales.values("amp_scan.scales")?;
    let pts = amplitude_scan(spec, p, &scales, &cfg.propagation)?;
    let mut csv = String::from("scale,phase_control0,phase_control1,cz_angle,error\n");
    for a in &pts {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig(a.scale),
            opt(a.phase_control0),
            opt(a.phase_control1),
            opt(a.cz_angle),
            a.error.as_deref().map(csv_text).unwrap_or_default()
        ));
    }
    let failed = pts.iter().filter(|a| a.error.is_some()).count();
    Ok(Outcome {
        summary: summary(json!({"points": pts.len(), "failed": failed})),
        csv,
        json: json!({ "points": pts }),
    })
}

fn delay_scan_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = device(cfg)?;
    let p = pulse(cfg)?;
    let scan = require(&cfg.delay_scan, "delay_scan")?;
    let delays = scan.delays_ns.values("delay_scan.delays_ns")?;
    let pts = delay_scan(spec, p, &delays, &cfg.propagation)?;
    let mut csv = String::from(
        "delay_ns,p_q1_00,p_q1_01,p_q1_10,p_q1_11,swap_01_to_10,swap_10_to_01,cz_angle,iswap_angle,leakage,error\n",
    );
    for d in &pts {
        let pq = |k: usize| opt(d.p_q1_excited.map(|p| p[k]));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(d.delay_ns),
            pq(0),
            pq(1),
            pq(2),
            pq(3),
            opt(d.swap_01_to_10),
            opt(d.swap_10_to_01),
            opt(d.cz_angle),
            opt(d.iswap_angle),
            opt(d.leakage),
            d.error.as_deref().map(csv_text).unwrap_or_default()
        ));
    }
    let best = pts
        .iter()
        .filter_map(|d| d.iswap_angle.map(|a| (d.delay_ns, a)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    Ok(Outcome {
        summary: summary(json!({
            "points": pts.len(),
            "min_iswap_delay_ns": best.map(|b| b.0),
            "min_iswap_angle": best.map(|b| b.1),
        })),
        csv,
        json: json!({ "points": pts }),
    })
}

fn rb(cfg: &RunConfig, config_path: &Path, interleaved: bool) -> Result<Outcome, Failure> {
    let settings = require(&cfg.rb, "rb")?;
    let noise = settings.noise.resolve(config_path)?;
    let rc = RbConfig {
        depths: settings.depths.clone(),
        sequences_per_depth: settings.sequences_per_depth,
        seed: cfg.seed,
    };
    if interleaved {
        let r = simulate_irb(&rc, &noise)?;
        Ok(Outcome {
            summary: summary(json!({
                "p_ref": r.reference.fit.p,
                "p_int": r.interleaved.fit.p,
                "epc_ref": r.reference.epc,
                "epg": r.epg,
                "epg_bound": r.reference.epg_bound,
                "unphysical": r.unphysical,
            })),
            csv: r.to_csv(),
            json: json_of(&r),
        })
    } else {
        let r = simulate_rb(&rc, &noise)?;
        Ok(Outcome {
            summary: summary(json!({"p": r.fit.p, "epc": r.epc, "epg_bound": r.epg_bound})),
            csv: r.to_csv(),
            json: json_of(&r),
        })
    }
}

fn clifford_stats() -> Result<Outcome, Failure> {
    let stats = decomposition_stats();
    let mut csv = String::from("index,cz_count,non_z_count,gates\n");
    for (k, e) in clifford_group().iter().enumerate() {
        csv.push_str(&format!(
            "{k},{},{},{}\n",
            e.cz_count(),
            e.non_z_count(),
            e.seq
        ));
    }
    Ok(Outcome {
        summary: summary(json!({
            "elements": stats.elements,
            "avg_cz": stats.avg_cz,
            "avg_non_z_1q": stats.avg_non_z_1q,
            "cz_class_sizes": stats.cz_class_sizes,
        })),
        csv,
        json: json_of(&stats),
    })
}
