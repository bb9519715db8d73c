//! Runs a scenario config file in-process and prints its report.
//!
//! `cargo run --release --example scenario_runner -- configs/sphere-soft.conf`

use std::path::PathBuf;
use ws_acoustics::scenario::{report_text, run_scenario, ScenarioConfig};

fn main() -> ws_acoustics::Result<()> {
    let path: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "configs/sphere-soft.conf".into()).into();
    let cfg = ScenarioConfig::from_file(&path)?;
    let o = run_scenario(&cfg)?;
    print!("{}", report_text(&o));
    println!("artifacts in {}", cfg.out.display());
    Ok(())
}
