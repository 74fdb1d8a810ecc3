use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::categorical::{argmax, log_softmax, sample};
use super::{clip_grad_norm, policy_logit_grads, rows, Adam, AgentConfig, EntropySchedule, Experience, Mlp, Mode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub lr: f64,
    pub n_steps: usize,
    pub batch_size: usize,
    pub n_epochs: usize,
    pub clip: f64,
    pub gae_lambda: f64,
    pub vf_coef: f64,
    pub max_grad_norm: f64,
    pub normalize_advantage: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            lr: 3e-4,
            n_steps: 2048,
            batch_size: 64,
            n_epochs: 10,
            clip: 0.2,
            gae_lambda: 0.95,
            vf_coef: 0.5,
            max_grad_norm: 0.5,
            normalize_advantage: true,
        }
    }
}

/// `min(r·A, clip(r, 1-ε, 1+ε)·A)`.
pub fn clipped_objective(ratio: f64, adv: f64, clip: f64) -> f64 {
    (ratio * adv).min(ratio.clamp(1.0 - clip, 1.0 + clip) * adv)
}

/// Generalised advantage estimates and their returns (`adv + value`).
/// `dones[t]` marks an episode boundary after step `t`; `last_value` is the
/// critic's value of the state following the final step.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 == n { last_value } else { values[t + 1] };
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// A minibatch for the clipped-surrogate update.
#[derive(Debug, Clone, PartialEq)]
pub struct PpoBatch {
    pub obs: Array2<f64>,
    pub actions: Vec<usize>,
    pub old_log_probs: Array1<f64>,
    pub advantages: Array1<f64>,
    pub returns: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpoLosses {
    /// Negated mean clipped surrogate.
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    /// Total loss `policy - c_ent·entropy + c_vf·value`.
    pub total: f64,
    /// Fraction of samples whose ratio left `[1-ε, 1+ε]`.
    pub clip_fraction: f64,
}

/// Loss and gradients of `-mean(min(r·A, clip(r)·A)) - c_ent·mean(H) +
/// c_vf·mean((V - R)²)` for the actor and the critic.
pub fn ppo_loss(
    actor: &Mlp,
    critic: &Mlp,
    batch: &PpoBatch,
    clip: f64,
    ent_coef: f64,
    vf_coef: f64,
) -> Result<(PpoLosses, Mlp, Mlp)> {
    let b = batch.actions.len() as f64;
    let (logits, actor_tape) = actor.forward_cached(batch.obs.view())?;
    let (values, critic_tape) = critic.forward_cached(batch.obs.view())?;

    let mut policy = 0.0;
    let mut clipped = 0usize;
    let mut w = Vec::with_capacity(batch.actions.len());
    for (i, row) in logits.outer_iter().enumerate() {
        let logp = log_softmax(&row.to_vec())[batch.actions[i]];
        let ratio = (logp - batch.old_log_probs[i]).exp();
        let adv = batch.advantages[i];
        policy -= clipped_objective(ratio, adv, clip) / b;
        if (ratio - 1.0).abs() > clip {
            clipped += 1;
        }
        // d/dlogπ of the surrogate: r·A on the unclipped branch, zero otherwise
        let unclipped = ratio * adv;
        w.push(if unclipped <= ratio.clamp(1.0 - clip, 1.0 + clip) * adv {
            adv * ratio
        } else {
            0.0
        });
    }
    let (entropy, logit_grad) = policy_logit_grads(&logits, &batch.actions, &w, ent_coef);

    let mut value = 0.0;
    let mut v_grad = Array2::zeros(values.raw_dim());
    for i in 0..batch.actions.len() {
        let err = values[[i, 0]] - batch.returns[i];
        value += err * err / b;
        v_grad[[i, 0]] = 2.0 * vf_coef * err / b;
    }
    let losses = PpoLosses {
        policy,
        value,
        entropy,
        total: policy - ent_coef * entropy + vf_coef * value,
        clip_fraction: clipped as f64 / b,
    };
    Ok((
        losses,
        actor.backward(&actor_tape, logit_grad.view())?,
        critic.backward(&critic_tape, v_grad.view())?,
    ))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Rollout {
    obs: Vec<Vec<f64>>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    values: Vec<f64>,
    log_probs: Vec<f64>,
    dones: Vec<bool>,
    last_next_obs: Vec<f64>,
}

/// Proximal policy optimisation with GAE and separate actor/critic networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ppo {
    pub cfg: PpoConfig,
    pub gamma: f64,
    pub actor: Mlp,
    pub critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    entropy: EntropySchedule,
    rng: ChaCha8Rng,
    steps: u64,
    rollout: Rollout,
    /// Value and log-probability of the last training action.
    pending: Option<(f64, f64)>,
    last_losses: Option<(f64, f64, f64)>,
}

impl Ppo {
    pub fn new(cfg: &AgentConfig, obs_len: usize, n_actions: usize, total_steps: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actor = Mlp::new(&cfg.layer_sizes(obs_len, n_actions), 0.01, &mut rng);
        let critic = Mlp::new(&cfg.layer_sizes(obs_len, 1), 1.0, &mut rng);
        Self {
            cfg: cfg.ppo.clone(),
            gamma: cfg.gamma,
            actor_opt: Adam::new(&actor, cfg.ppo.lr),
            critic_opt: Adam::new(&critic, cfg.ppo.lr),
            actor,
            critic,
            entropy: cfg.entropy_schedule(total_steps),
            rng,
            steps: 0,
            rollout: Rollout::default(),
            pending: None,
            last_losses: None,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn entropy_coef(&self) -> f64 {
        self.entropy.value(self.steps)
    }

    /// (policy, value, entropy) of the last minibatch of the last update.
    pub fn last_losses(&self) -> Option<(f64, f64, f64)> {
        self.last_losses
    }

    pub fn rollout_len(&self) -> usize {
        self.rollout.actions.len()
    }

    fn value(&self, obs: &[f64]) -> Result<f64> {
        Ok(self.critic.forward_one(obs)?[0])
    }

    pub fn act(&mut self, obs: &[f64], mode: Mode) -> Result<usize> {
        let logits = self.actor.forward_one(obs)?;
        match mode {
            Mode::Eval => Ok(argmax(&logits)),
            Mode::Train => {
                let a = sample(&logits, &mut self.rng);
                let logp = log_softmax(&logits)[a];
                self.pending = Some((self.value(obs)?, logp));
                Ok(a)
            }
        }
    }

    pub fn observe(&mut self, exp: Experience) -> Result<()> {
        let (value, logp) = self
            .pending
            .take()
            .ok_or_else(|| Error::contract("observe without a preceding training action"))?;
        let mut reward = exp.reward;
        if exp.truncated && !exp.terminated {
            reward += self.gamma * self.value(&exp.next_obs)?;
        }
        let r = &mut self.rollout;
        r.obs.push(exp.obs);
        r.actions.push(exp.action);
        r.rewards.push(reward);
        r.values.push(value);
        r.log_probs.push(logp);
        r.dones.push(exp.terminated || exp.truncated);
        r.last_next_obs = exp.next_obs;
        self.steps += 1;
        if self.rollout.actions.len() >= self.cfg.n_steps {
            self.update()?;
        }
        Ok(())
    }

    /// Probability ratios of the stored actions under the current actor
    /// against the log-probabilities recorded at collection time.
    pub fn rollout_ratios(&self) -> Result<Vec<f64>> {
        if self.rollout.obs.is_empty() {
            return Ok(Vec::new());
        }
        let logits = self.actor.forward(rows(&self.rollout.obs)?.view())?;
        Ok(logits
            .outer_iter()
            .enumerate()
            .map(|(i, row)| {
                let logp = log_softmax(&row.to_vec())[self.rollout.actions[i]];
                (logp - self.rollout.log_probs[i]).exp()
            })
            .collect())
    }

    fn update(&mut self) -> Result<()> {
        let rollout = std::mem::take(&mut self.rollout);
        let n = rollout.actions.len();
        let last_value = if rollout.dones[n - 1] {
            0.0
        } else {
            self.value(&rollout.last_next_obs)?
        };
        let (adv, returns) = compute_gae(
            &rollout.rewards,
            &rollout.values,
            &rollout.dones,
            last_value,
            self.gamma,
            self.cfg.gae_lambda,
        );
        let obs = rows(&rollout.obs)?;
        let ent = self.entropy.value(self.steps);
        let mut idx: Vec<usize> = (0..n).collect();
        for _ in 0..self.cfg.n_epochs {
            idx.shuffle(&mut self.rng);
            for chunk in idx.chunks(self.cfg.batch_size) {
                let mut a: Array1<f64> = chunk.iter().map(|&i| adv[i]).collect();
                if self.cfg.normalize_advantage && chunk.len() > 1 {
                    let mean = a.mean().unwrap_or(0.0);
                    let std = a.std(1.0);
                    a.mapv_inplace(|x| (x - mean) / (std + 1e-8));
                }
                let batch = PpoBatch {
                    obs: obs.select(ndarray::Axis(0), chunk),
                    actions: chunk.iter().map(|&i| rollout.actions[i]).collect(),
                    old_log_probs: chunk.iter().map(|&i| rollout.log_probs[i]).collect(),
                    advantages: a,
                    returns: chunk.iter().map(|&i| returns[i]).collect(),
                };
                let (losses, mut ga, mut gc) =
                    ppo_loss(&self.actor, &self.critic, &batch, self.cfg.clip, ent, self.cfg.vf_coef)?;
                clip_grad_norm(&mut [&mut ga, &mut gc], self.cfg.max_grad_norm);
                self.actor_opt.step(&mut self.actor, &ga);
                self.critic_opt.step(&mut self.critic, &gc);
                self.last_losses = Some((losses.policy, losses.value, losses.entropy));
            }
        }
        if !self.actor.is_finite() || !self.critic.is_finite() {
            return Err(Error::Numeric("policy parameters after update"));
        }
        Ok(())
    }
}
