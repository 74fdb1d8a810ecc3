//! Interrupt a run, save it, resume from disk and check that the result is
//! the same as training straight through. Then validate the checkpoint.

use truck_tactics::eval::evaluate_checkpoint;
use truck_tactics::train::{resume, save_checkpoint, Trainer};
use truck_tactics::RunConfig;

fn main() -> truck_tactics::Result<()> {
    let cfg = RunConfig::from_toml_with_overrides(
        "",
        &["training.total_steps=6000".into(), "eval.episodes=10".into(), "eval.rounds=2".into()],
    )?;
    let path = std::env::temp_dir().join("truck-tactics-mid.ckpt");

    let mut a = Trainer::new(&cfg, 5)?;
    a.run_until(2500)?;
    save_checkpoint(&a, &path)?;
    a.run_until(6000)?;

    let mut b = resume(&cfg, &path)?;
    println!("resumed at step {}", b.step());
    b.run_until(6000)?;
    println!("identical agents: {}", a.agent == b.agent);
    println!("identical curves: {}", a.curve() == b.curve());

    save_checkpoint(&b, &path)?;
    let (tables, agg) = evaluate_checkpoint(&path, None)?;
    for (k, t) in tables.iter().enumerate() {
        println!("round {k}: reached {:.0}%", t.reached_pct);
    }
    print!("{}", agg.to_text());
    Ok(())
}
