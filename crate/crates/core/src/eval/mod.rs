//! Validation harness: greedy evaluation episodes, outcome classification,
//! cost metrics, and the rule-based ego comparison.

mod metrics;
mod rule_based;

pub use metrics::{aggregate, MetricsTable, PerMeter};
pub use rule_based::{run_rule_based_ego, rule_based_episode, RuleBasedConfig};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, Mode};
use crate::config::RunConfig;
use crate::env::{Env, StepSummary};
use crate::error::{Error, Result};
use crate::reward::{driver_cost, energy_cost, step_energy, TcopParams};
use crate::sim::EventFlags;
use crate::train::{build_env, episode_seed, load_checkpoint};

/// The `eval` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Episodes per validation round.
    pub episodes: usize,
    /// Validation rounds; each uses its own block of episode seeds.
    pub rounds: usize,
    /// Base of the evaluation seed stream, independent of the training seed
    /// so that different models face the same episodes.
    pub seed: u64,
    pub per_meter: bool,
    pub rule_based: RuleBasedConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            episodes: 100,
            rounds: 5,
            seed: 20_240_001,
            per_meter: false,
            rule_based: RuleBasedConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::config("eval.episodes", "must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::config("eval.rounds", "must be at least 1"));
        }
        self.rule_based.validate()
    }

    /// Seeds of validation round `round`.
    pub fn seeds(&self, round: usize, episodes: usize) -> Vec<u64> {
        (0..episodes as u64)
            .map(|k| episode_seed(self.seed, 1 + round as u64, k))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    ReachedTarget,
    /// Collision or off-road.
    Hazard,
    NotReached,
}

impl Outcome {
    pub fn classify(events: EventFlags) -> Outcome {
        if events.collision || events.off_road {
            Outcome::Hazard
        } else if events.target_reached {
            Outcome::ReachedTarget
        } else {
            Outcome::NotReached
        }
    }
}

/// Totals of one evaluation episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub outcome: Outcome,
    pub steps: u32,
    pub distance: f64,
    pub time: f64,
    pub energy_kwh: f64,
    pub energy_cost: f64,
    pub driver_cost: f64,
    pub episode_return: f64,
}

impl EpisodeRecord {
    pub fn tcop(&self) -> f64 {
        self.energy_cost + self.driver_cost
    }

    pub fn average_speed(&self) -> f64 {
        if self.time > 0.0 {
            self.distance / self.time
        } else {
            0.0
        }
    }
}

/// Accumulates per-step summaries into an [`EpisodeRecord`].
#[derive(Debug, Clone)]
pub struct EpisodeAccumulator {
    record: EpisodeRecord,
    events: EventFlags,
}

impl EpisodeAccumulator {
    pub fn new(seed: u64) -> Self {
        Self {
            record: EpisodeRecord {
                seed,
                outcome: Outcome::NotReached,
                steps: 0,
                distance: 0.0,
                time: 0.0,
                energy_kwh: 0.0,
                energy_cost: 0.0,
                driver_cost: 0.0,
                episode_return: 0.0,
            },
            events: EventFlags::default(),
        }
    }

    pub fn add(&mut self, s: &StepSummary, reward: f64, tcop: &TcopParams) {
        let r = &mut self.record;
        r.steps += 1;
        r.distance += s.distance;
        r.time += s.dt;
        r.energy_kwh += step_energy(s, tcop);
        r.energy_cost += energy_cost(s, tcop);
        r.driver_cost += driver_cost(s, tcop);
        r.episode_return += reward;
        self.events.merge(s.events);
    }

    pub fn finish(mut self) -> EpisodeRecord {
        self.record.outcome = Outcome::classify(self.events);
        self.record
    }
}

/// Runs one episode per seed with `policy` choosing actions.
pub fn run_episodes<P>(env: &mut Env, seeds: &[u64], tcop: &TcopParams, mut policy: P) -> Result<Vec<EpisodeRecord>>
where
    P: FnMut(&Env, &[f64]) -> Result<usize>,
{
    let mut out = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut obs = env.reset(seed)?;
        let mut acc = EpisodeAccumulator::new(seed);
        loop {
            let action = policy(env, &obs)?;
            let tr = env.step(action)?;
            acc.add(&tr.summary, tr.reward, tcop);
            if tr.done() {
                break;
            }
            obs = tr.observation;
        }
        out.push(acc.finish());
    }
    Ok(out)
}

/// Greedy evaluation of `agent` on the given seeds.
pub fn run_validation(agent: &Agent, env: &mut Env, seeds: &[u64], tcop: &TcopParams, per_meter: bool) -> Result<MetricsTable> {
    if agent.input_len() != env.observation_len() || agent.n_actions() != env.n_actions() {
        return Err(Error::CheckpointMismatch(format!(
            "agent has {} inputs and {} actions, environment has {} and {}",
            agent.input_len(),
            agent.n_actions(),
            env.observation_len(),
            env.n_actions()
        )));
    }
    let mut agent = agent.clone();
    let records = run_episodes(env, seeds, tcop, |_, obs| agent.act(obs, Mode::Eval))?;
    MetricsTable::from_records(&records, per_meter)
}

/// Validates `agent` for `config.eval.rounds` rounds of
/// `config.eval.episodes` episodes; returns the per-round tables and
/// their aggregate.
pub fn validate_rounds(agent: &Agent, config: &RunConfig) -> Result<(Vec<MetricsTable>, MetricsTable)> {
    let mut env = build_env(&config.env, &config.traffic, &config.controller, &config.reward)?;
    let tables = (0..config.eval.rounds)
        .map(|round| {
            let seeds = config.eval.seeds(round, config.eval.episodes);
            run_validation(agent, &mut env, &seeds, &config.reward.tcop, config.eval.per_meter)
        })
        .collect::<Result<Vec<_>>>()?;
    let agg = aggregate(&tables)?;
    Ok((tables, agg))
}

/// Loads a checkpoint and validates its agent. When `config` is given its
/// environment section must match the one the agent was trained on.
pub fn evaluate_checkpoint(path: &Path, config: Option<&RunConfig>) -> Result<(Vec<MetricsTable>, MetricsTable)> {
    let trainer = load_checkpoint(path)?;
    let cfg = match config {
        Some(c) => {
            if c.env != trainer.config().env {
                return Err(Error::CheckpointMismatch(
                    "the env section differs from the one the checkpoint was trained with".into(),
                ));
            }
            c.clone()
        }
        None => trainer.config().clone(),
    };
    validate_rounds(&trainer.agent, &cfg)
}

/// Writes `round-<k>.csv/.txt` for each table plus `aggregate.csv/.txt`.
pub fn write_tables(dir: &Path, tables: &[MetricsTable], agg: &MetricsTable) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, t: &MetricsTable| -> Result<()> {
        let csv = dir.join(format!("{name}.csv"));
        std::fs::write(&csv, t.to_csv()).map_err(|e| Error::io(&csv, e))?;
        let txt = dir.join(format!("{name}.txt"));
        std::fs::write(&txt, t.to_text()).map_err(|e| Error::io(&txt, e))
    };
    for (k, t) in tables.iter().enumerate() {
        write(&format!("round-{k}"), t)?;
    }
    write("aggregate", agg)
}
