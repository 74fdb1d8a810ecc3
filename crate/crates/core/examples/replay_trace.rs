//! Record a greedy episode to CSV, read it back and re-simulate it.

use std::io::BufReader;

use truck_tactics::replay::{record_greedy_episode, replay_trace};
use truck_tactics::sim::trace::Trace;
use truck_tactics::train::Trainer;
use truck_tactics::RunConfig;

fn main() -> truck_tactics::Result<()> {
    let cfg = RunConfig::from_toml_with_overrides("", &["training.total_steps=5000".into()])?;
    let mut trainer = Trainer::new(&cfg, 0)?;
    trainer.run_until(5000)?;

    let trace = record_greedy_episode(&trainer.agent, &cfg, 12)?;
    let path = std::env::temp_dir().join("truck-tactics-episode.trace.csv");
    let file = std::fs::File::create(&path).map_err(|e| truck_tactics::Error::io(&path, e))?;
    trace.write_csv(file).map_err(|e| truck_tactics::Error::io(&path, e))?;
    println!("{} substeps written to {}", trace.rows.len(), path.display());

    let file = std::fs::File::open(&path).map_err(|e| truck_tactics::Error::io(&path, e))?;
    let back = Trace::read_csv(BufReader::new(file))?;
    let report = replay_trace(&cfg, &back)?;
    for s in report.steps.iter().take(5) {
        println!("decision {} action {} reward {:.5} {:?}", s.decision, s.action, s.reward, s.terms);
    }
    match report.divergence {
        None => println!("re-simulation matches all {} decisions", report.steps.len()),
        Some(k) => println!("diverged at substep {k}"),
    }
    Ok(())
}
