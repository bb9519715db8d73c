//! Open-cavity WS modes: top delays and the interior energy share.
//!
//! `cargo run --release --example cavity_modes -- [soft|hard] [w]`

use ws_acoustics::scenario::{run_scenario, ScenarioConfig};

fn main() -> ws_acoustics::Result<()> {
    let mut args = std::env::args().skip(1);
    let bc = args.next().unwrap_or_else(|| "hard".into());
    let w = args.next().unwrap_or_else(|| "3".into());
    let text = format!("scenario=cavity bc={bc} w={w} k=1 M=71\nout=target/ws/example-cavity-{bc}-w{w}\n");
    let o = run_scenario(&ScenarioConfig::parse(&text, std::path::Path::new("."))?)?;
    let n = o.delays.len();
    println!("index, delay, label, interior share");
    for i in n.saturating_sub(5)..n {
        let interior = o.metrics[i].and_then(|m| m.interior).unwrap_or(0.0);
        println!("{}, {:.3}, {}, {interior:.3e}", i + 1, o.delays[i], o.labels[i].as_str());
    }
    println!("all gates pass: {}", o.pass());
    Ok(())
}
