//! Function approximation and the three discrete-action learners.
//!
//! Networks are small tanh MLPs with hand-written reverse-mode gradients.
//! Each algorithm exposes its loss as a pure function returning the loss
//! value and the parameter gradients, so the update rules can be checked
//! against finite differences and hand computations.

mod a2c;
pub mod categorical;
mod dqn;
mod mlp;
mod optim;
mod ppo;
mod replay;

pub use a2c::{a2c_loss, a2c_targets, A2c, A2cConfig, A2cLosses};
pub use dqn::{dqn_loss, dqn_targets, Dqn, DqnConfig};
pub use mlp::{clip_grad_norm, Mlp, Tape};
pub use optim::Adam;
pub use ppo::{clipped_objective, compute_gae, ppo_loss, Ppo, PpoBatch, PpoConfig, PpoLosses};
pub use replay::{ReplayBuffer, TransitionBatch};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Dqn,
    A2c,
    Ppo,
}

/// Whether an action is chosen for learning (exploratory) or for evaluation (greedy).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Linear decay of the entropy bonus from `start` to `end` over `horizon`
/// environment steps, then constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySchedule {
    pub start: f64,
    pub end: f64,
    pub horizon: u64,
}

impl EntropySchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.horizon == 0 || step >= self.horizon {
            return self.end;
        }
        let frac = step as f64 / self.horizon as f64;
        self.start + (self.end - self.start) * frac
    }
}

/// The `agent` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub hidden: Vec<usize>,
    pub entropy_start: f64,
    pub entropy_end: f64,
    /// Steps over which the entropy bonus decays; 0 means the whole training run.
    pub entropy_horizon: u64,
    pub dqn: DqnConfig,
    pub a2c: A2cConfig,
    pub ppo: PpoConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Ppo,
            gamma: 0.99,
            hidden: vec![64, 64],
            entropy_start: 0.01,
            entropy_end: 0.001,
            entropy_horizon: 0,
            dqn: DqnConfig::default(),
            a2c: A2cConfig::default(),
            ppo: PpoConfig::default(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("agent.gamma", "must lie in (0, 1]"));
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::config("agent.hidden", "layer widths must be positive"));
        }
        if !(self.ppo.clip > 0.0) {
            return Err(Error::config("agent.ppo.clip", "must be positive"));
        }
        for (key, v) in [
            ("agent.dqn.lr", self.dqn.lr),
            ("agent.a2c.lr", self.a2c.lr),
            ("agent.ppo.lr", self.ppo.lr),
        ] {
            if !(v > 0.0) {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if self.dqn.batch_size == 0 || self.dqn.buffer_size == 0 || self.dqn.train_freq == 0 || self.dqn.target_update == 0 {
            return Err(Error::config("agent.dqn", "sizes and periods must be positive"));
        }
        if self.a2c.n_steps == 0 {
            return Err(Error::config("agent.a2c.n_steps", "must be positive"));
        }
        if self.ppo.n_steps == 0 || self.ppo.batch_size == 0 || self.ppo.n_epochs == 0 {
            return Err(Error::config("agent.ppo", "rollout, minibatch and epoch counts must be positive"));
        }
        Ok(())
    }

    pub fn entropy_schedule(&self, total_steps: u64) -> EntropySchedule {
        EntropySchedule {
            start: self.entropy_start,
            end: self.entropy_end,
            horizon: if self.entropy_horizon == 0 {
                total_steps
            } else {
                self.entropy_horizon
            },
        }
    }

    pub fn layer_sizes(&self, obs_len: usize, out: usize) -> Vec<usize> {
        let mut sizes = vec![obs_len];
        sizes.extend(&self.hidden);
        sizes.push(out);
        sizes
    }
}

/// One environment transition as seen by a learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub terminated: bool,
    pub truncated: bool,
}

/// Any of the three learners behind one interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Agent {
    Dqn(Dqn),
    A2c(A2c),
    Ppo(Ppo),
}

impl Agent {
    /// A fresh learner. `total_steps` sets the horizon of the exploration
    /// and entropy schedules.
    pub fn new(cfg: &AgentConfig, obs_len: usize, n_actions: usize, total_steps: u64, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(match cfg.algorithm {
            Algorithm::Dqn => Agent::Dqn(Dqn::new(cfg, obs_len, n_actions, total_steps, seed)),
            Algorithm::A2c => Agent::A2c(A2c::new(cfg, obs_len, n_actions, total_steps, seed)),
            Algorithm::Ppo => Agent::Ppo(Ppo::new(cfg, obs_len, n_actions, total_steps, seed)),
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Agent::Dqn(_) => Algorithm::Dqn,
            Agent::A2c(_) => Algorithm::A2c,
            Agent::Ppo(_) => Algorithm::Ppo,
        }
    }

    pub fn act(&mut self, obs: &[f64], mode: Mode) -> Result<usize> {
        match self {
            Agent::Dqn(a) => a.act(obs, mode),
            Agent::A2c(a) => a.act(obs, mode),
            Agent::Ppo(a) => a.act(obs, mode),
        }
    }

    /// Feeds back the outcome of the last training action; may trigger an update.
    pub fn observe(&mut self, exp: Experience) -> Result<()> {
        match self {
            Agent::Dqn(a) => a.observe(exp),
            Agent::A2c(a) => a.observe(exp),
            Agent::Ppo(a) => a.observe(exp),
        }
    }

    pub fn input_len(&self) -> usize {
        match self {
            Agent::Dqn(a) => a.q.input_len(),
            Agent::A2c(a) => a.actor.input_len(),
            Agent::Ppo(a) => a.actor.input_len(),
        }
    }

    pub fn n_actions(&self) -> usize {
        match self {
            Agent::Dqn(a) => a.q.output_len(),
            Agent::A2c(a) => a.actor.output_len(),
            Agent::Ppo(a) => a.actor.output_len(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Agent::Dqn(a) => a.q.is_finite(),
            Agent::A2c(a) => a.actor.is_finite() && a.critic.is_finite(),
            Agent::Ppo(a) => a.actor.is_finite() && a.critic.is_finite(),
        }
    }
}

pub(crate) fn rows(data: &[Vec<f64>]) -> Result<Array2<f64>> {
    let k = data.first().map_or(0, Vec::len);
    let flat: Vec<f64> = data.iter().flat_map(|r| r.iter().copied()).collect();
    Array2::from_shape_vec((data.len(), k), flat).map_err(|e| Error::contract(e.to_string()))
}

/// Gradient w.r.t. logits of
/// `-(1/B) Σ w_i log π(a_i) - c (1/B) Σ H_i`, plus the mean entropy.
pub(crate) fn policy_logit_grads(logits: &Array2<f64>, actions: &[usize], w: &[f64], ent_coef: f64) -> (f64, Array2<f64>) {
    let b = logits.nrows() as f64;
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut ent_sum = 0.0;
    for (i, row) in logits.outer_iter().enumerate() {
        let row = row.to_vec();
        let logp = categorical::log_softmax(&row);
        let h: f64 = logp.iter().map(|lp| -lp.exp() * lp).sum();
        ent_sum += h;
        for (j, lp) in logp.iter().enumerate() {
            let p = lp.exp();
            let onehot = if j == actions[i] { 1.0 } else { 0.0 };
            grad[[i, j]] = -w[i] * (onehot - p) / b + ent_coef * p * (lp + h) / b;
        }
    }
    (ent_sum / b, grad)
}
