use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::categorical::argmax;
use super::{clip_grad_norm, Adam, AgentConfig, Experience, Mlp, Mode, ReplayBuffer, TransitionBatch};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnConfig {
    pub lr: f64,
    pub buffer_size: usize,
    pub batch_size: usize,
    /// Environment steps between target-network synchronisations.
    pub target_update: u64,
    pub exploration_initial: f64,
    pub exploration_final: f64,
    /// Fraction of training over which epsilon decays linearly.
    pub exploration_fraction: f64,
    pub learning_starts: u64,
    pub train_freq: u64,
    pub max_grad_norm: f64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            buffer_size: 100_000,
            batch_size: 32,
            target_update: 10_000,
            exploration_initial: 1.0,
            exploration_final: 0.05,
            exploration_fraction: 0.1,
            learning_starts: 100,
            train_freq: 4,
            max_grad_norm: 10.0,
        }
    }
}

/// Bootstrapped targets `r + γ max_a' Q(s', a'; θ⁻)`, or `r` on terminal transitions.
pub fn dqn_targets(target: &Mlp, batch: &TransitionBatch, gamma: f64) -> Result<Array1<f64>> {
    let next_q = target.forward(batch.next_obs.view())?;
    Ok(Array1::from_shape_fn(batch.actions.len(), |i| {
        if batch.terminated[i] {
            batch.rewards[i]
        } else {
            let best = next_q.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
            batch.rewards[i] + gamma * best
        }
    }))
}

/// Mean squared TD error of `Q(s, a; θ)` against fixed `targets`, with its gradient.
pub fn dqn_loss(q: &Mlp, obs: &Array2<f64>, actions: &[usize], targets: &Array1<f64>) -> Result<(f64, Mlp)> {
    let (out, tape) = q.forward_cached(obs.view())?;
    let b = actions.len() as f64;
    let mut grad = Array2::zeros(out.raw_dim());
    let mut loss = 0.0;
    for (i, &a) in actions.iter().enumerate() {
        let err = targets[i] - out[[i, a]];
        loss += err * err / b;
        grad[[i, a]] = -2.0 * err / b;
    }
    Ok((loss, q.backward(&tape, grad.view())?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dqn {
    pub cfg: DqnConfig,
    pub gamma: f64,
    pub q: Mlp,
    pub target: Mlp,
    opt: Adam,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    steps: u64,
    total_steps: u64,
    last_loss: f64,
}

impl Dqn {
    pub fn new(cfg: &AgentConfig, obs_len: usize, n_actions: usize, total_steps: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = Mlp::new(&cfg.layer_sizes(obs_len, n_actions), 1.0, &mut rng);
        Self {
            cfg: cfg.dqn.clone(),
            gamma: cfg.gamma,
            target: q.clone(),
            opt: Adam::new(&q, cfg.dqn.lr),
            q,
            buffer: ReplayBuffer::new(cfg.dqn.buffer_size, obs_len),
            rng,
            steps: 0,
            total_steps,
            last_loss: f64::NAN,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn last_loss(&self) -> f64 {
        self.last_loss
    }

    pub fn epsilon(&self) -> f64 {
        let horizon = self.cfg.exploration_fraction * self.total_steps as f64;
        if horizon <= 0.0 {
            return self.cfg.exploration_final;
        }
        let frac = (self.steps as f64 / horizon).min(1.0);
        self.cfg.exploration_initial + frac * (self.cfg.exploration_final - self.cfg.exploration_initial)
    }

    pub fn q_values(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.q.forward_one(obs)
    }

    pub fn act(&mut self, obs: &[f64], mode: Mode) -> Result<usize> {
        let q = self.q_values(obs)?;
        if mode == Mode::Train && self.rng.random::<f64>() < self.epsilon() {
            return Ok(self.rng.random_range(0..q.len()));
        }
        Ok(argmax(&q))
    }

    pub fn observe(&mut self, exp: Experience) -> Result<()> {
        self.buffer
            .push(&exp.obs, exp.action, exp.reward, &exp.next_obs, exp.terminated);
        self.steps += 1;
        if self.steps > self.cfg.learning_starts && self.steps % self.cfg.train_freq == 0 {
            self.update()?;
        }
        if self.steps % self.cfg.target_update == 0 {
            self.target = self.q.clone();
        }
        Ok(())
    }

    fn update(&mut self) -> Result<()> {
        let batch = self.buffer.sample(self.cfg.batch_size, &mut self.rng);
        let targets = dqn_targets(&self.target, &batch, self.gamma)?;
        let (loss, mut grads) = dqn_loss(&self.q, &batch.obs, &batch.actions, &targets)?;
        clip_grad_norm(&mut [&mut grads], self.cfg.max_grad_norm);
        self.opt.step(&mut self.q, &grads);
        self.last_loss = loss;
        Ok(())
    }
}
