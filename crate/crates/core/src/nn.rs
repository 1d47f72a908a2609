//! Fully connected networks with hand-written reverse-mode gradients.
//!
//! Parameters live in one flat buffer, layer by layer, each layer stored as
//! its `out x in` weight matrix (row-major) followed by its bias vector. The
//! same layout is used for gradients, so the optimizer and finite-difference
//! checks can treat a network as a plain `&mut [f64]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::linalg::{gemm_slices, Matrix, Op};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a = f(z)`.
    #[inline]
    fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Dense network: hidden layers use `activation`, the output layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
}

/// Intermediate activations captured by [`Mlp::forward`].
///
/// `acts[l]` is the input to layer `l`; `acts[0]` is the batch itself.
#[derive(Debug, Clone)]
pub struct GradientTape {
    acts: Vec<Matrix>,
}

impl GradientTape {
    pub fn batch_size(&self) -> usize {
        self.acts[0].rows
    }
}

fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Mlp {
    /// All-zero network with the given shape.
    pub fn zeros(widths: &[usize], activation: Activation) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Config(format!("invalid layer widths {widths:?}")));
        }
        Ok(Self { widths: widths.to_vec(), activation, params: vec![0.0; param_count(widths)] })
    }

    /// Glorot-uniform weights and zero biases, fully determined by `seed`.
    pub fn new(widths: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(widths, activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut off = 0;
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut net.params[off..off + fan_in * fan_out] {
                *p = rng.random_range(-limit..limit);
            }
            off += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    /// Rebuilds a network from a flat parameter buffer.
    pub fn from_params(widths: &[usize], activation: Activation, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(widths, activation)?;
        if params.len() != net.params.len() {
            return Err(shape_err(format!("expected {} parameters, got {}", net.params.len(), params.len())));
        }
        net.params = params;
        Ok(net)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_offset(&self, layer: usize) -> usize {
        param_count(&self.widths[..=layer])
    }

    /// `(weights, bias)` of one layer.
    pub fn layer(&self, layer: usize) -> (&[f64], &[f64]) {
        let (i, o) = (self.widths[layer], self.widths[layer + 1]);
        let off = self.layer_offset(layer);
        let (w, rest) = self.params[off..].split_at(i * o);
        (w, &rest[..o])
    }

    pub fn layer_mut(&mut self, layer: usize) -> (&mut [f64], &mut [f64]) {
        let (i, o) = (self.widths[layer], self.widths[layer + 1]);
        let off = self.layer_offset(layer);
        let (w, rest) = self.params[off..].split_at_mut(i * o);
        (w, &mut rest[..o])
    }

    fn check_input(&self, batch: &Matrix) -> Result<()> {
        if batch.cols != self.input_width() {
            return Err(shape_err(format!("network expects {} inputs, batch has {}", self.input_width(), batch.cols)));
        }
        Ok(())
    }

    fn affine(&self, layer: usize, x: &Matrix) -> Result<Matrix> {
        let (w, b) = self.layer(layer);
        let (i, o) = (self.widths[layer], self.widths[layer + 1]);
        let mut z = Matrix::zeros(x.rows, o);
        for r in 0..x.rows {
            z.row_mut(r).copy_from_slice(b);
        }
        gemm_slices(1.0, (&x.data, x.rows, x.cols), Op::N, (w, o, i), Op::T, 1.0, (&mut z.data, x.rows, o))?;
        Ok(z)
    }

    /// Forward pass that also records the tape needed by [`Mlp::backward`].
    pub fn forward(&self, batch: &Matrix) -> Result<(Matrix, GradientTape)> {
        self.check_input(batch)?;
        let mut acts = Vec::with_capacity(self.num_layers());
        let mut x = batch.clone();
        for l in 0..self.num_layers() {
            let mut z = self.affine(l, &x)?;
            if l + 1 < self.num_layers() {
                z.data.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            }
            acts.push(std::mem::replace(&mut x, z));
        }
        Ok((x, GradientTape { acts }))
    }

    /// Forward pass without recording intermediates.
    pub fn predict(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_input(batch)?;
        let mut x = self.affine(0, batch)?;
        for l in 1..self.num_layers() {
            x.data.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            x = self.affine(l, &x)?;
        }
        Ok(x)
    }

    /// Gradient of a scalar loss with respect to every parameter, given the
    /// loss gradient with respect to the network output. Layout matches
    /// [`Mlp::params`].
    pub fn backward(&self, tape: &GradientTape, output_grad: &Matrix) -> Result<Vec<f64>> {
        let mut grads = vec![0.0; self.params.len()];
        self.backward_into(tape, output_grad, &mut grads)?;
        Ok(grads)
    }

    /// As [`Mlp::backward`], overwriting `grads`.
    pub fn backward_into(&self, tape: &GradientTape, output_grad: &Matrix, grads: &mut [f64]) -> Result<()> {
        if tape.acts.len() != self.num_layers() || tape.acts[0].cols != self.input_width() {
            return Err(shape_err("tape was not produced by this network"));
        }
        let batch = tape.batch_size();
        if output_grad.rows != batch || output_grad.cols != self.output_width() {
            return Err(shape_err(format!(
                "output gradient is {}x{}, expected {batch}x{}",
                output_grad.rows,
                output_grad.cols,
                self.output_width()
            )));
        }
        if grads.len() != self.params.len() {
            return Err(shape_err("gradient buffer has the wrong length"));
        }
        let mut delta = output_grad.clone();
        for l in (0..self.num_layers()).rev() {
            let (i, o) = (self.widths[l], self.widths[l + 1]);
            let x = &tape.acts[l];
            let off = self.layer_offset(l);
            let (gw, rest) = grads[off..].split_at_mut(i * o);
            let gb = &mut rest[..o];
            gemm_slices(1.0, (&delta.data, batch, o), Op::T, (&x.data, batch, i), Op::N, 0.0, (gw, o, i))?;
            gb.iter_mut().for_each(|v| *v = 0.0);
            for r in 0..batch {
                for (acc, d) in gb.iter_mut().zip(delta.row(r)) {
                    *acc += d;
                }
            }
            if l > 0 {
                let (w, _) = self.layer(l);
                let mut dx = Matrix::zeros(batch, i);
                gemm_slices(1.0, (&delta.data, batch, o), Op::N, (w, o, i), Op::N, 0.0, (&mut dx.data, batch, i))?;
                for (g, a) in dx.data.iter_mut().zip(&x.data) {
                    *g *= self.activation.grad_from_output(*a);
                }
                delta = dx;
            }
        }
        Ok(())
    }
}

/// Mean squared error over all entries and its gradient `2 (pred - target) / count`.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    if pred.rows != target.rows || pred.cols != target.cols {
        return Err(shape_err(format!(
            "prediction is {}x{}, target is {}x{}",
            pred.rows, pred.cols, target.rows, target.cols
        )));
    }
    let count = pred.data.len().max(1) as f64;
    let mut grad = Matrix::zeros(pred.rows, pred.cols);
    let mut sum = 0.0;
    for ((g, p), t) in grad.data.iter_mut().zip(&pred.data).zip(&target.data) {
        let d = p - t;
        sum += d * d;
        *g = 2.0 * d / count;
    }
    Ok((sum / count, grad))
}
