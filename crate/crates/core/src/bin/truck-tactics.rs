use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use truck_tactics::eval::{evaluate_checkpoint, run_rule_based_ego, write_tables, MetricsTable};
use truck_tactics::replay::{record_greedy_episode, replay_trace};
use truck_tactics::sim::trace::Trace;
use truck_tactics::train::{load_checkpoint, resume, run_id, continue_training, run_training_seeds};
use truck_tactics::{Error, RunConfig};

#[derive(Parser)]
#[command(name = "truck-tactics", version, about = "Train and evaluate tactical driving agents for a highway truck")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration; defaults apply to everything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-path override, e.g. `reward.W_tar=36`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> truck_tactics::Result<RunConfig> {
        match &self.config {
            Some(p) => RunConfig::load(p, &self.overrides),
            None => RunConfig::from_toml_with_overrides("", &self.overrides),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent; writes curves, checkpoints and metadata.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of seeds to train (seed, seed+1, ...).
        #[arg(long)]
        seeds: Option<u64>,
        /// Output root (defaults to `output_dir` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from a checkpoint written by the same configuration.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Validate a checkpoint, or the rule-based ego, and print metric tables.
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, required_unless_present = "rule_based_ego")]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
        /// Validation rounds, each on fresh episode seeds.
        #[arg(long)]
        seeds: Option<usize>,
        /// Drive the ego with the surrounding-traffic rules instead of an agent.
        #[arg(long)]
        rule_based_ego: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also record the first N greedy episodes as trace files in `--out`.
        #[arg(long, default_value_t = 0)]
        traces: usize,
    },
    /// Re-simulate a recorded trace and check it matches bit for bit.
    Replay {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        trace: PathBuf,
        /// Print the reward decomposition of every decision.
        #[arg(long)]
        verbose: bool,
    },
    /// Train and evaluate several configurations in turn.
    Sweep {
        /// Run configurations.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 2,
        _ => 1,
    }
}

fn print_tables(tables: &[MetricsTable], agg: &MetricsTable) {
    for (k, t) in tables.iter().enumerate() {
        println!("== round {k} ({} episodes)", t.episodes);
        print!("{}", t.to_text());
    }
    println!("== aggregate");
    print!("{}", agg.to_text());
}

fn train(cfg: RunConfig, seeds: Option<u64>, out: Option<PathBuf>, resume_from: Option<PathBuf>) -> truck_tactics::Result<()> {
    let root = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    if let Some(ckpt) = resume_from {
        let trainer = resume(&cfg, &ckpt)?;
        let id = run_id(trainer.config_hash());
        let dir = root.join(&id).join(format!("seed-{}", trainer.seed()));
        let art = continue_training(trainer, &id, Some(&dir))?;
        println!("resumed run {} -> {}", art.run_id, dir.display());
        return Ok(());
    }
    let mut cfg = cfg;
    if let Some(k) = seeds {
        cfg.training.seeds = k;
        cfg.validate()?;
    }
    for art in run_training_seeds(&cfg, Some(&root))? {
        let last = art.curve.last().map_or(f64::NAN, |r| r.episode_return);
        println!(
            "run {} seed {}: {} episodes, last return {last:.3}, artifacts in {}",
            art.run_id,
            art.seed,
            art.curve.len(),
            art.dir.as_deref().map_or(String::new(), |d| d.display().to_string())
        );
    }
    Ok(())
}

fn eval(
    cfg: Option<RunConfig>,
    checkpoint: Option<PathBuf>,
    episodes: Option<usize>,
    rounds: Option<usize>,
    rule_based: bool,
    out: Option<PathBuf>,
    traces: usize,
) -> truck_tactics::Result<()> {
    if episodes == Some(0) {
        return Err(Error::Config {
            key: "eval.episodes".into(),
            message: "must be at least 1".into(),
        });
    }
    if rounds == Some(0) {
        return Err(Error::Config {
            key: "eval.rounds".into(),
            message: "must be at least 1".into(),
        });
    }
    let apply = |mut c: RunConfig| {
        if let Some(n) = episodes {
            c.eval.episodes = n;
        }
        if let Some(r) = rounds {
            c.eval.rounds = r;
        }
        c
    };
    if rule_based {
        let cfg = apply(cfg.unwrap_or_default());
        let table = run_rule_based_ego(&cfg, cfg.eval.episodes)?;
        println!("== rule-based ego ({} episodes)", table.episodes);
        print!("{}", table.to_text());
        if let Some(dir) = out {
            write_tables(&dir, &[], &table)?;
        }
        return Ok(());
    }
    let path = checkpoint.expect("clap requires --checkpoint without --rule-based-ego");
    if !path.exists() {
        return Err(Error::Io {
            path: path.clone(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "checkpoint not found"),
        });
    }
    let trainer = load_checkpoint(&path)?;
    let cfg = apply(cfg.unwrap_or_else(|| trainer.config().clone()));
    let (tables, agg) = evaluate_checkpoint(&path, Some(&cfg))?;
    print_tables(&tables, &agg);
    if let Some(dir) = out {
        write_tables(&dir, &tables, &agg)?;
        for (k, seed) in cfg.eval.seeds(0, traces).into_iter().enumerate() {
            let trace = record_greedy_episode(&trainer.agent, &cfg, seed)?;
            let p = dir.join(format!("episode-{k}.trace.csv"));
            let file = File::create(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
            trace.write_csv(file).map_err(|e| Error::Io { path: p.clone(), source: e })?;
        }
    }
    Ok(())
}

fn replay(cfg: RunConfig, trace_path: &Path, verbose: bool) -> truck_tactics::Result<bool> {
    let file = File::open(trace_path).map_err(|e| Error::Io {
        path: trace_path.to_path_buf(),
        source: e,
    })?;
    let trace = Trace::read_csv(BufReader::new(file))?;
    let report = replay_trace(&cfg, &trace)?;
    let mut total = 0.0;
    for s in &report.steps {
        total += s.reward;
        if verbose {
            let terms: Vec<String> = s.terms.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
            println!("decision {:>3} action {:>2} reward {:>12.6}  {}", s.decision, s.action, s.reward, terms.join(" "));
        }
    }
    println!("{} decisions, episode return {total:.6}", report.steps.len());
    match report.divergence {
        None => {
            println!("replay matches the trace");
            Ok(true)
        }
        Some(k) => {
            eprintln!("replay diverged at substep {k}");
            Ok(false)
        }
    }
}

fn sweep(configs: &[PathBuf], overrides: &[String], out: Option<PathBuf>) -> truck_tactics::Result<()> {
    for path in configs {
        let cfg = RunConfig::load(path, overrides)?;
        let root = out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
        println!("## {}", path.display());
        for art in run_training_seeds(&cfg, Some(&root))? {
            let (tables, agg) = truck_tactics::eval::validate_rounds(&art.trainer.agent, &cfg)?;
            if let Some(dir) = &art.dir {
                write_tables(&dir.join("eval"), &tables, &agg)?;
            }
            println!("-- seed {}", art.seed);
            print!("{}", agg.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            cfg,
            seed,
            seeds,
            out,
            resume,
        } => cfg.load().and_then(|mut c| {
            if let Some(s) = seed {
                c.seed = s;
            }
            train(c, seeds, out, resume)
        }),
        Command::Eval {
            cfg,
            checkpoint,
            episodes,
            seeds,
            rule_based_ego,
            out,
            traces,
        } => {
            let loaded = if cfg.config.is_some() || !cfg.overrides.is_empty() {
                cfg.load().map(Some)
            } else {
                Ok(None)
            };
            loaded.and_then(|c| eval(c, checkpoint, episodes, seeds, rule_based_ego, out, traces))
        }
        Command::Replay { cfg, trace, verbose } => match cfg.load().and_then(|c| replay(c, &trace, verbose)) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::Sweep {
            configs,
            overrides,
            out,
        } => sweep(&configs, &overrides, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
