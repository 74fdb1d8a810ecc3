use ndarray::Zip;
use serde::{Deserialize, Serialize};

use super::Mlp;

/// Adam with bias correction; one instance per network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Mlp,
    v: Mlp,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: net.zeros_like(),
            v: net.zeros_like(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Mlp) {
        self.t += 1;
        let (b1, b2, eps, lr) = (self.beta1, self.beta2, self.eps, self.lr);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for l in 0..net.weights.len() {
            Zip::from(&mut net.weights[l])
                .and(&mut self.m.weights[l])
                .and(&mut self.v.weights[l])
                .and(&grads.weights[l])
                .for_each(update);
            Zip::from(&mut net.biases[l])
                .and(&mut self.m.biases[l])
                .and(&mut self.v.biases[l])
                .and(&grads.biases[l])
                .for_each(update);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    #[test]
    fn first_step_moves_by_lr() {
        // bias-corrected first step is lr * sign(g) (up to eps)
        let mut net = Mlp {
            weights: vec![array![[1.0, -1.0]]],
            biases: vec![Array1::zeros(2)],
        };
        let grads = Mlp {
            weights: vec![array![[0.3, -5.0]]],
            biases: vec![Array1::zeros(2)],
        };
        let mut opt = Adam::new(&net, 0.01);
        opt.step(&mut net, &grads);
        assert!((net.weights[0][[0, 0]] - 0.99).abs() < 1e-6);
        assert!((net.weights[0][[0, 1]] + 0.99).abs() < 1e-6);
    }
}
