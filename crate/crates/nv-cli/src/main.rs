//! `nv`: reproducible experiment runner for the scattering/evolution toolkit.
//!
//! Exit codes: 0 all checks passed, 1 a verification check failed, 2 invalid
//! input, 3 numerical failure. The manifest is written for failing and
//! erroring runs too, with the failure recorded.

mod config;
mod experiments;
mod report;

use std::time::Instant;

use config::{Params, RunConfig};
use nv_core::{Error, ErrorCategory};
use report::RunManifest;

fn exit_code(e: &Error) -> i32 {
    match e.category() {
        ErrorCategory::InvalidInput => 2,
        ErrorCategory::NumericalFailure => 3,
    }
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        eprint!("{}", experiments::catalog());
        return 2;
    }
    if args[0] == "list" || args[0] == "--list" {
        print!("{}", experiments::catalog());
        return 0;
    }

    let cfg = match RunConfig::from_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("nv: {e}");
            return exit_code(&e);
        }
    };
    let out_dir = cfg.out_dir();
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("nv: cannot create {}: {e}", out_dir.display());
        return 2;
    }

    let started = Instant::now();
    let mut params = Params::new(cfg.keys());
    let result = experiments::run(cfg.experiment, &mut params, &out_dir).and_then(|o| {
        let unknown = params.unknown_keys();
        if unknown.is_empty() {
            Ok(o)
        } else {
            Err(Error::InvalidInput(format!(
                "unknown config key(s) for {}: {}",
                cfg.experiment.name(),
                unknown.join(", ")
            )))
        }
    });

    let (status, code, error, error_category, outcome) = match result {
        Ok(o) => {
            let all = o.checks.iter().all(|c| c.pass);
            (
                if all { "pass" } else { "fail" },
                if all { 0 } else { 1 },
                None,
                None,
                o,
            )
        }
        Err(e) => {
            let cat = match e.category() {
                ErrorCategory::InvalidInput => "invalid-input",
                ErrorCategory::NumericalFailure => "numerical-failure",
            };
            let code = exit_code(&e);
            (
                "error",
                code,
                Some(e.to_string()),
                Some(cat.to_string()),
                experiments::Outcome::default(),
            )
        }
    };

    let mut config_echo = params.resolved.clone();
    config_echo.insert("out".into(), out_dir.display().to_string());
    let manifest = RunManifest {
        schema_version: 1,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.experiment.name().to_string(),
        status: status.to_string(),
        config: config_echo,
        checks: outcome.checks,
        summaries: outcome.summaries,
        artifacts: outcome.artifacts,
        error,
        error_category,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    if let Err(e) = report::write_manifest(&out_dir, &manifest) {
        eprintln!("nv: {e}");
        return 2;
    }

    match code {
        0 => println!(
            "{}: pass ({} checks) -> {}",
            manifest.experiment,
            manifest.checks.len(),
            out_dir.display()
        ),
        1 => {
            eprintln!("{}: FAIL -> {}", manifest.experiment, out_dir.display());
            for c in manifest.checks.iter().filter(|c| !c.pass) {
                eprintln!(
                    "  {}: {:e} {} {:e} is false",
                    c.name, c.value, c.op, c.threshold
                );
            }
        }
        _ => eprintln!(
            "{}: error: {}",
            manifest.experiment,
            manifest.error.as_deref().unwrap_or("unknown")
        ),
    }
    code
}
