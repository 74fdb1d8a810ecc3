//! DQN, A2C and PPO on the same short budget.

use truck_tactics::eval::validate_rounds;
use truck_tactics::train::run_training;
use truck_tactics::RunConfig;

fn main() -> truck_tactics::Result<()> {
    for alg in ["dqn", "a2c", "ppo"] {
        let cfg = RunConfig::from_toml_with_overrides(
            "",
            &[
                format!("agent.algorithm={alg}"),
                "training.total_steps=20000".into(),
                "agent.dqn.learning_starts=1000".into(),
                "eval.episodes=20".into(),
                "eval.rounds=1".into(),
            ],
        )?;
        let art = run_training(&cfg, 0, None)?;
        let (_, agg) = validate_rounds(&art.trainer.agent, &cfg)?;
        println!(
            "{alg:>4}: {} episodes trained, reached {:.0}%, hazard {:.0}%, speed {:.2} m/s",
            art.curve.len(),
            agg.reached_pct,
            agg.hazard_pct,
            agg.avg_speed
        );
    }
    Ok(())
}
