//! WS modes of the 50 m x 1 m strip: delays and group labels.
//!
//! `cargo run --release --example strip_modes -- [soft|hard]`

use ws_acoustics::scenario::{report_text, run_scenario, ScenarioConfig};

fn main() -> ws_acoustics::Result<()> {
    let bc = std::env::args().nth(1).unwrap_or_else(|| "soft".into());
    let text = format!("scenario=strip bc={bc} k=1 M=111\nout=target/ws/example-strip-{bc}\n");
    let cfg = ScenarioConfig::parse(&text, std::path::Path::new("."))?;
    let o = run_scenario(&cfg)?;
    println!("index, delay, label");
    for (i, (d, l)) in o.delays.iter().zip(&o.labels).enumerate() {
        println!("{}, {d:.4}, {}", i + 1, l.as_str());
    }
    print!("{}", report_text(&o));
    Ok(())
}
