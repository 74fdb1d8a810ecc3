//! Loading a shipped config, overriding keys from the command line style
//! `key=value`, and how errors point at the bad key.
//!
//! cargo run --example config_overrides -- agent.algorithm=dqn reward.W_tar=5

use std::path::Path;

use truck_tactics::RunConfig;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/tcop_w_tar_36.toml");
    let overrides: Vec<String> = std::env::args().skip(1).collect();
    match RunConfig::load(&path, &overrides) {
        Ok(cfg) => {
            println!("# hash {}", cfg.hash());
            print!("{}", cfg.to_toml().expect("config serializes"));
        }
        Err(e) => eprintln!("error: {e}"),
    }

    for bad in ["reward.W_tar=many", "env.sim.lanes=4", "training.scale=0"] {
        let err = RunConfig::from_toml_with_overrides("", &[bad.to_string()]).unwrap_err();
        eprintln!("{bad:<22} -> {err}");
    }
}
