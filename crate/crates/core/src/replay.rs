//! Recording and re-simulating episode traces.

use crate::agent::{Agent, Mode};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::sim::trace::Trace;
use crate::train::build_env;

/// One decision of a replayed episode with its reward terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayStep {
    pub decision: usize,
    pub action: usize,
    pub reward: f64,
    pub terms: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub steps: Vec<ReplayStep>,
    /// First substep at which the re-simulation differs from the trace.
    pub divergence: Option<u64>,
}

/// Records the greedy episode of `agent` on `seed`.
pub fn record_greedy_episode(agent: &Agent, config: &RunConfig, seed: u64) -> Result<Trace> {
    let mut env = build_env(&config.env, &config.traffic, &config.controller, &config.reward)?;
    let mut agent = agent.clone();
    env.enable_trace(config.hash());
    let mut obs = env.reset(seed)?;
    loop {
        let a = agent.act(&obs, Mode::Eval)?;
        let tr = env.step(a)?;
        if tr.done() {
            break;
        }
        obs = tr.observation;
    }
    env.take_trace().ok_or_else(|| Error::contract("trace recorder vanished"))
}

/// Re-simulates `trace` under `config`, which must hash to the value
/// recorded in the trace.
pub fn replay_trace(config: &RunConfig, trace: &Trace) -> Result<ReplayReport> {
    let hash = config.hash();
    if trace.config_hash != hash {
        return Err(Error::ConfigMismatch {
            expected: hash,
            found: trace.config_hash.clone(),
        });
    }
    let mut env = build_env(&config.env, &config.traffic, &config.controller, &config.reward)?;
    if trace.architecture != env.architecture().name() {
        return Err(Error::Trace(format!(
            "trace was recorded with the {} architecture",
            trace.architecture
        )));
    }
    env.enable_trace(hash);
    env.reset(trace.seed)?;
    let mut steps = Vec::with_capacity(trace.actions.len());
    for (decision, &action) in trace.actions.iter().enumerate() {
        if env.is_done() || action >= env.n_actions() {
            break;
        }
        let tr = env.step(action)?;
        steps.push(ReplayStep {
            decision,
            action,
            reward: tr.reward,
            terms: env.reward_function().breakdown(&tr.summary),
        });
    }
    let fresh = env.take_trace().ok_or_else(|| Error::contract("trace recorder vanished"))?;
    Ok(ReplayReport {
        steps,
        divergence: fresh.first_divergence(trace),
    })
}
