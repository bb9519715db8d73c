//! `ws-scatter`: run one scenario config and write its artifacts.
//!
//! Exit codes: 0 all gates pass, 2 gate failure, 3 input error, 4 solver error.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use ws_acoustics::scenario::{parse_index_list, run_scenario, Check, ScenarioConfig};
use ws_acoustics::WsError;

#[derive(Parser, Debug)]
#[command(name = "ws-scatter", version, about = "Wigner-Smith time delay analysis of an acoustic scattering scenario")]
struct Args {
    /// Scenario config (`key=value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out=` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra checks: volume-q, surface-identity, simdiag.
    #[arg(long, value_delimiter = ',')]
    check: Vec<String>,
    /// WS modes (1-based) whose fields are exported.
    #[arg(long)]
    modes: Option<String>,
    /// Reserved; nothing in the pipeline is stochastic.
    #[arg(long)]
    seed: Option<u64>,
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("input error: {msg}");
    ExitCode::from(3)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match ScenarioConfig::from_file(&args.config) {
        Ok(c) => c,
        Err(e) => return input_error(e),
    };
    if let Some(out) = args.out {
        cfg.out = out;
    }
    for name in &args.check {
        match Check::parse(name) {
            Some(c) if !cfg.checks.contains(&c) => cfg.checks.push(c),
            Some(_) => {}
            None => return input_error(format!("unknown check {name:?}")),
        }
    }
    if let Some(list) = &args.modes {
        match parse_index_list(list) {
            Ok(v) => cfg.field_modes = v,
            Err(e) => return input_error(e),
        }
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    match run_scenario(&cfg) {
        Ok(outcome) => {
            for g in &outcome.gates {
                println!("{}={:.3e} (limit {:.1e}) {}", g.name, g.value, g.limit, if g.pass() { "ok" } else { "FAIL" });
            }
            println!("artifacts in {}", cfg.out.display());
            if outcome.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e @ (WsError::Parse { .. } | WsError::Domain(_) | WsError::Geometry(_))) => input_error(e),
        Err(e @ WsError::Quality(_)) => {
            eprintln!("gate failure: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("solver error: {e}");
            ExitCode::from(4)
        }
    }
}
