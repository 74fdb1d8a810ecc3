use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::categorical::{argmax, sample};
use super::{clip_grad_norm, policy_logit_grads, rows, Adam, AgentConfig, EntropySchedule, Experience, Mlp, Mode};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct A2cConfig {
    pub lr: f64,
    pub n_steps: usize,
    pub vf_coef: f64,
    pub max_grad_norm: f64,
}

impl Default for A2cConfig {
    fn default() -> Self {
        Self {
            lr: 7e-4,
            n_steps: 5,
            vf_coef: 0.5,
            max_grad_norm: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A2cLosses {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
}

/// One-step critic targets `r + γ V(s')` (just `r` on termination) and the
/// advantages `target − V(s)`, both under the current critic.
pub fn a2c_targets(critic: &Mlp, rollout: &[Experience], gamma: f64) -> Result<(Array1<f64>, Array1<f64>)> {
    let obs = rows(&rollout.iter().map(|e| e.obs.clone()).collect::<Vec<_>>())?;
    let next = rows(&rollout.iter().map(|e| e.next_obs.clone()).collect::<Vec<_>>())?;
    let v = critic.forward(obs.view())?;
    let v_next = critic.forward(next.view())?;
    let targets = Array1::from_shape_fn(rollout.len(), |i| {
        let e = &rollout[i];
        if e.terminated {
            e.reward
        } else {
            e.reward + gamma * v_next[[i, 0]]
        }
    });
    let adv = Array1::from_shape_fn(rollout.len(), |i| targets[i] - v[[i, 0]]);
    Ok((targets, adv))
}

/// Actor loss `-mean(A log π(a|s)) - c·mean(H)` with `A` held constant, and
/// critic loss `mean((target - V(s))²)`; returns the losses and the
/// gradients of `actor + vf_coef · critic` for each network.
pub fn a2c_loss(
    actor: &Mlp,
    critic: &Mlp,
    obs: &Array2<f64>,
    actions: &[usize],
    advantages: &Array1<f64>,
    targets: &Array1<f64>,
    ent_coef: f64,
    vf_coef: f64,
) -> Result<(A2cLosses, Mlp, Mlp)> {
    let b = actions.len() as f64;
    let (logits, actor_tape) = actor.forward_cached(obs.view())?;
    let (values, critic_tape) = critic.forward_cached(obs.view())?;

    let mut policy = 0.0;
    for (i, row) in logits.outer_iter().enumerate() {
        let logp = super::categorical::log_softmax(&row.to_vec());
        policy -= advantages[i] * logp[actions[i]] / b;
    }
    let (entropy, logit_grad) = policy_logit_grads(&logits, actions, &advantages.to_vec(), ent_coef);
    policy -= ent_coef * entropy;

    let mut value = 0.0;
    let mut v_grad = Array2::zeros(values.raw_dim());
    for i in 0..actions.len() {
        let err = targets[i] - values[[i, 0]];
        value += err * err / b;
        v_grad[[i, 0]] = -2.0 * vf_coef * err / b;
    }
    let actor_grads = actor.backward(&actor_tape, logit_grad.view())?;
    let critic_grads = critic.backward(&critic_tape, v_grad.view())?;
    Ok((A2cLosses { policy, value, entropy }, actor_grads, critic_grads))
}

/// Synchronous advantage actor-critic with separate actor and critic networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A2c {
    pub cfg: A2cConfig,
    pub gamma: f64,
    pub actor: Mlp,
    pub critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    entropy: EntropySchedule,
    rng: ChaCha8Rng,
    steps: u64,
    rollout: Vec<Experience>,
}

impl A2c {
    pub fn new(cfg: &AgentConfig, obs_len: usize, n_actions: usize, total_steps: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actor = Mlp::new(&cfg.layer_sizes(obs_len, n_actions), 0.01, &mut rng);
        let critic = Mlp::new(&cfg.layer_sizes(obs_len, 1), 1.0, &mut rng);
        Self {
            cfg: cfg.a2c.clone(),
            gamma: cfg.gamma,
            actor_opt: Adam::new(&actor, cfg.a2c.lr),
            critic_opt: Adam::new(&critic, cfg.a2c.lr),
            actor,
            critic,
            entropy: cfg.entropy_schedule(total_steps),
            rng,
            steps: 0,
            rollout: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn act(&mut self, obs: &[f64], mode: Mode) -> Result<usize> {
        let logits = self.actor.forward_one(obs)?;
        Ok(match mode {
            Mode::Train => sample(&logits, &mut self.rng),
            Mode::Eval => argmax(&logits),
        })
    }

    pub fn observe(&mut self, exp: Experience) -> Result<()> {
        self.rollout.push(exp);
        self.steps += 1;
        if self.rollout.len() >= self.cfg.n_steps {
            self.update()?;
        }
        Ok(())
    }

    fn update(&mut self) -> Result<()> {
        let rollout = std::mem::take(&mut self.rollout);
        let (targets, adv) = a2c_targets(&self.critic, &rollout, self.gamma)?;
        let obs = rows(&rollout.iter().map(|e| e.obs.clone()).collect::<Vec<_>>())?;
        let actions: Vec<usize> = rollout.iter().map(|e| e.action).collect();
        let ent = self.entropy.value(self.steps);
        let (_, mut ga, mut gc) = a2c_loss(&self.actor, &self.critic, &obs, &actions, &adv, &targets, ent, self.cfg.vf_coef)?;
        clip_grad_norm(&mut [&mut ga, &mut gc], self.cfg.max_grad_norm);
        self.actor_opt.step(&mut self.actor, &ga);
        self.critic_opt.step(&mut self.critic, &gc);
        Ok(())
    }
}
