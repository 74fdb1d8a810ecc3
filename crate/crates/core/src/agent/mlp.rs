use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feed-forward network: affine layers with tanh between them and a linear
/// output. Weights are stored `in × out` so a batch is `x · W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Layer inputs saved by [`Mlp::forward_cached`] for the backward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    inputs: Vec<Array2<f64>>,
}

impl Mlp {
    /// Uniform init in `±1/sqrt(fan_in)`; the output layer's weights are
    /// further multiplied by `head_gain` and its biases start at zero.
    pub fn new<R: Rng>(sizes: &[usize], head_gain: f64, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let n = sizes.len() - 1;
        let mut weights = Vec::with_capacity(n);
        let mut biases = Vec::with_capacity(n);
        for (l, pair) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let gain = if l + 1 == n { head_gain } else { 1.0 };
            weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| {
                gain * rng.random_range(-bound..bound)
            }));
            biases.push(if l + 1 == n {
                Array1::zeros(fan_out)
            } else {
                Array1::from_shape_fn(fan_out, |_| rng.random_range(-bound..bound))
            });
        }
        Self { weights, biases }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn input_len(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn output_len(&self) -> usize {
        self.weights[self.weights.len() - 1].ncols()
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_len() {
            return Err(Error::contract(format!(
                "network expects {} inputs, got {}",
                self.input_len(),
                x.ncols()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(&x)?;
        let last = self.weights.len() - 1;
        let mut h = x.dot(&self.weights[0]) + &self.biases[0];
        for l in 1..=last {
            h.mapv_inplace(f64::tanh);
            h = h.dot(&self.weights[l]) + &self.biases[l];
        }
        Ok(h)
    }

    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x).map_err(|e| Error::contract(e.to_string()))?;
        Ok(self.forward(view)?.into_raw_vec_and_offset().0)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<(Array2<f64>, Tape)> {
        self.check(&x)?;
        let mut inputs = Vec::with_capacity(self.weights.len());
        let mut h = x.to_owned();
        for l in 0..self.weights.len() {
            let z = h.dot(&self.weights[l]) + &self.biases[l];
            inputs.push(h);
            h = if l + 1 < self.weights.len() { z.mapv(f64::tanh) } else { z };
        }
        Ok((h, Tape { inputs }))
    }

    /// Parameter gradients of `sum(grad_out ⊙ output)` for the batch on `tape`.
    pub fn backward(&self, tape: &Tape, grad_out: ArrayView2<f64>) -> Result<Mlp> {
        let batch = tape.inputs[0].nrows();
        if grad_out.dim() != (batch, self.output_len()) {
            return Err(Error::contract("upstream gradient shape does not match the forward batch"));
        }
        let mut grads = self.zeros_like();
        let mut g = grad_out.to_owned();
        for l in (0..self.weights.len()).rev() {
            let input = &tape.inputs[l];
            grads.weights[l] = input.t().dot(&g);
            grads.biases[l] = g.sum_axis(Axis(0));
            if l > 0 {
                let mut up = g.dot(&self.weights[l].t());
                // input of layer l is tanh output of layer l-1
                Zip::from(&mut up).and(input).for_each(|u, &a| *u *= 1.0 - a * a);
                g = up;
            }
        }
        Ok(grads)
    }

    pub fn sq_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.iter().map(|x| x * x).sum::<f64>()).sum::<f64>()
            + self.biases.iter().map(|b| b.iter().map(|x| x * x).sum::<f64>()).sum::<f64>()
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            w.mapv_inplace(|x| x * factor);
        }
        for b in &mut self.biases {
            b.mapv_inplace(|x| x * factor);
        }
    }

    /// All parameters in a fixed order (weights then biases, layer by layer).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn param_mut(&mut self, mut index: usize) -> &mut f64 {
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            if index < w.len() {
                return w.iter_mut().nth(index).expect("index within layer");
            }
            index -= w.len();
            if index < b.len() {
                return &mut b[index];
            }
            index -= b.len();
        }
        panic!("parameter index out of range")
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|x| x.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }
}

/// Scales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_norm(grads: &mut [&mut Mlp], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g.sq_norm()).sum::<f64>().sqrt();
    if norm > max_norm {
        let factor = max_norm / (norm + 1e-6);
        for g in grads.iter_mut() {
            g.scale(factor);
        }
    }
    norm
}
