// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! `bbq`: command-line driver for ZZ spectroscopy, CZ pulse calibration and
//! randomized benchmarking.
//!
//! Every command prints a one-line JSON summary on stdout. Exit status is 0
//! on success, 2 for configuration errors and 3 for numerical or
//! calibration failures.

mod commands;
mod config;
mod failure;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use commands::{Command, Outcome};
use config::{Format, RunConfig};
use failure::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "bbq",
    version,
    about = "Tunable-coupler ZZ, CZ pulse and RB simulator"
)]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set pulse.delta2_ghz=0.5`.
    #[arg(long = "set", value_name = "KEY.PATH=VALUE")]
    overrides: Vec<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `output.path`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Overrides `output.format`.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write the effective configuration (defaults resolved) here.
    #[arg(long)]
    dump_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn write_file(path: &Path, contents: &str, field: &str) -> Result<(), Failure> {
    let fail =
        |e: std::io::Error| Failure::config(field, format!("cannot write {}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(fail)?;
    }
    std::fs::write(path, contents).map_err(fail)
}

fn refuse_overwrite(target: &Path, inputs: &[PathBuf], field: &str) -> Result<(), Failure> {
    let Ok(t) = std::fs::canonicalize(target) else {
        return Ok(());
    };
    if inputs
        .iter()
        .any(|i| std::fs::canonicalize(i).is_ok_and(|c| c == t))
    {
        return Err(Failure::config(
            field,
            format!("{} is an input of this run", target.display()),
        ));
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(Map, Option<PathBuf>), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => config::load(p, &cli.overrides)?,
        None => {
            let mut v = json!({});
            for o in &cli.overrides {
                config::apply_override(&mut v, o)?;
            }
            serde_json::from_value::<RunConfig>(v)
                .map_err(|e| Failure::config("config", e.to_string()))?
        }
    };
    let config_path = cli.config.clone().unwrap_or_else(|| PathBuf::from("."));
    // paths inside the config are relative to it; `--output` to the cwd
    let out_path = match &cli.output {
        Some(o) => Some(o.clone()),
        None => cfg
            .output
            .path
            .as_ref()
            .map(|p| config::relative_to(&config_path, p)),
    };
    if let Some(o) = &cli.output {
        cfg.output.path = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    let inputs = cfg.input_files(&config_path);
    if let Some(p) = &out_path {
        refuse_overwrite(p, &inputs, "output.path")?;
    }
    if let Some(p) = &cli.dump_config {
        refuse_overwrite(p, &inputs, "--dump-config")?;
        let text = serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n";
        write_file(p, &text, "--dump-config")?;
    }
    let Outcome { summary, csv, json } = commands::run(cli.command, &cfg, &config_path)?;
    if let Some(path) = &out_path {
        let text = match cfg.output.format {
            Format::Csv => csv,
            Format::Json => serde_json::to_string_pretty(&json).expect("output serializes") + "\n",
        };
        write_file(path, &text, "output.path")?;
    }
    Ok((summary, out_path))
}

type Map = serde_json::Map<String, Value>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads: must be at least 1");
            return ExitCode::from(failure::EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(failure::EXIT_CONFIG);
        }
    }
    let name = cli.command.name();
    let (line, code) = match execute(&cli) {
        Ok((mut summary, output)) => {
            let mut m = Map::new();
            m.insert("command".into(), json!(name));
            m.insert("status".into(), json!("ok"));
            m.append(&mut summary);
            m.insert("output".into(), json!(output));
            (Value::Object(m), 0)
        }
        Err(f) => {
            eprintln!("error: {f}");
            (
                json!({"command": name, "status": "error", "exit_code": f.code, "message": f.message}),
                f.code,
            )
        }
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    ExitCode::from(code)
}
