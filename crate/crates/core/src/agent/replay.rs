use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A minibatch of transitions as dense arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionBatch {
    pub obs: Array2<f64>,
    pub actions: Vec<usize>,
    pub rewards: Array1<f64>,
    pub next_obs: Array2<f64>,
    /// True episode ends only; time-limit truncations are stored as `false`.
    pub terminated: Vec<bool>,
}

/// Fixed-capacity FIFO of transitions. Observations are stored in single
/// precision to halve the memory of large buffers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_len: usize,
    obs: Vec<f32>,
    next_obs: Vec<f32>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    terminated: Vec<bool>,
    head: usize,
    len: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_len: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            obs_len,
            obs: Vec::new(),
            next_obs: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            terminated: Vec::new(),
            head: 0,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, obs: &[f64], action: usize, reward: f64, next_obs: &[f64], terminated: bool) {
        assert_eq!(obs.len(), self.obs_len);
        assert_eq!(next_obs.len(), self.obs_len);
        let k = self.obs_len;
        if self.actions.len() < self.capacity {
            self.obs.extend(obs.iter().map(|&x| x as f32));
            self.next_obs.extend(next_obs.iter().map(|&x| x as f32));
            self.actions.push(action);
            self.rewards.push(reward);
            self.terminated.push(terminated);
        } else {
            let i = self.head;
            for (dst, &src) in self.obs[i * k..(i + 1) * k].iter_mut().zip(obs) {
                *dst = src as f32;
            }
            for (dst, &src) in self.next_obs[i * k..(i + 1) * k].iter_mut().zip(next_obs) {
                *dst = src as f32;
            }
            self.actions[i] = action;
            self.rewards[i] = reward;
            self.terminated[i] = terminated;
        }
        self.head = (self.head + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Reward stored at slot `i` (insertion order modulo capacity).
    pub fn reward_at(&self, i: usize) -> f64 {
        self.rewards[i]
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng>(&self, batch: usize, rng: &mut R) -> TransitionBatch {
        assert!(self.len > 0, "sampling from an empty buffer");
        let k = self.obs_len;
        let idx: Vec<usize> = (0..batch).map(|_| rng.random_range(0..self.len)).collect();
        let gather = |src: &[f32]| {
            Array2::from_shape_fn((batch, k), |(r, c)| f64::from(src[idx[r] * k + c]))
        };
        TransitionBatch {
            obs: gather(&self.obs),
            actions: idx.iter().map(|&i| self.actions[i]).collect(),
            rewards: idx.iter().map(|&i| self.rewards[i]).collect(),
            next_obs: gather(&self.next_obs),
            terminated: idx.iter().map(|&i| self.terminated[i]).collect(),
        }
    }
}
