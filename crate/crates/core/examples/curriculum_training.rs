//! Curriculum run at a reduced scale: the reward gains the energy term and
//! then the revenue term as training progresses. Prints the mean return of
//! each stage and the checkpoints taken at stage ends.

use truck_tactics::train::run_training;
use truck_tactics::RunConfig;

fn main() -> truck_tactics::Result<()> {
    let dir = std::env::temp_dir().join("truck-tactics-curriculum");
    let cfg = RunConfig::from_toml_with_overrides(
        "",
        &[
            "reward.kind=curriculum_normalized".into(),
            "training.curriculum=true".into(),
            "training.scale=0.02".into(),
        ],
    )?;
    let art = run_training(&cfg, 0, Some(&dir))?;
    for stage in 1..=3u8 {
        let rets: Vec<f64> = art.curve.iter().filter(|r| r.stage == stage).map(|r| r.episode_return).collect();
        if rets.is_empty() {
            continue;
        }
        println!(
            "stage {stage}: {} episodes, mean return {:.4}",
            rets.len(),
            rets.iter().sum::<f64>() / rets.len() as f64
        );
    }
    for c in &art.checkpoints {
        println!("{} at step {} -> {}", c.name, c.step, c.path.as_ref().map_or(String::new(), |p| p.display().to_string()));
    }
    Ok(())
}
