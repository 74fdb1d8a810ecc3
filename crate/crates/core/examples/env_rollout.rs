//! One episode of the hierarchical environment under a scripted policy,
//! printing each decision.
//!
//! cargo run --example env_rollout -- [seed]

use truck_tactics::env::decode_hierarchical;
use truck_tactics::RunConfig;
use truck_tactics::train::build_env;

fn main() -> truck_tactics::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = RunConfig::from_toml_with_overrides("", &["reward.kind=tcop_weighted".into(), "reward.W_tar=10".into()])?;
    let mut env = build_env(&cfg.env, &cfg.traffic, &cfg.controller, &cfg.reward)?;
    env.reset(seed)?;
    let mut ret = 0.0;
    for k in 0.. {
        // short time gap, then overtake on the left once in a while
        let action = match k {
            0 => 0,
            k if k % 15 == 14 => 6,
            _ => 5,
        };
        let t = env.step(action)?;
        ret += t.reward;
        let ego = env.state().expect("reset").ego();
        println!(
            "{k:>3} {:<22} x {:>7.1} lane {} v {:>5.2} r {:>9.4}{}",
            format!("{:?}", decode_hierarchical(action)?),
            ego.x,
            ego.lane,
            ego.v,
            t.reward,
            if t.summary.events.near_collision { "  near collision" } else { "" }
        );
        if t.done() {
            let s = env.state().expect("reset");
            println!("done after {:.0} s: {:?}, return {ret:.3}", s.time(), t.summary.events);
            break;
        }
    }
    Ok(())
}
