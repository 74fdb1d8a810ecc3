//! Short PPO run on the hierarchical architecture followed by greedy
//! validation.
//!
//! cargo run --release --example train_ppo -- [steps]

use truck_tactics::eval::validate_rounds;
use truck_tactics::train::{run_training, smooth};
use truck_tactics::RunConfig;

fn main() -> truck_tactics::Result<()> {
    let steps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30_000);
    let cfg = RunConfig::from_toml_with_overrides(
        "",
        &[
            format!("training.total_steps={steps}"),
            "reward.kind=tcop_weighted".into(),
            "reward.W_tar=10".into(),
            "eval.episodes=20".into(),
            "eval.rounds=1".into(),
        ],
    )?;
    let art = run_training(&cfg, 1, None)?;
    let smoothed = smooth(&art.curve, 20);
    for (row, s) in art.curve.iter().zip(&smoothed).step_by((art.curve.len() / 10).max(1)) {
        println!("step {:>7}  return {:>9.3}  smoothed {s:>9.3}", row.step, row.episode_return);
    }
    let (_, agg) = validate_rounds(&art.trainer.agent, &cfg)?;
    print!("{}", agg.to_text());
    Ok(())
}
