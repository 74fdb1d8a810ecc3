//! The truck driven by the same car-following and lane-change rules as the
//! surrounding traffic, as a reference for the learned agents.

use truck_tactics::eval::run_rule_based_ego;
use truck_tactics::RunConfig;

fn main() -> truck_tactics::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let cfg = RunConfig::from_toml_with_overrides("", &["eval.per_meter=true".into()])?;
    let table = run_rule_based_ego(&cfg, n)?;
    print!("{}", table.to_text());
    Ok(())
}
