//! Bias-corrected Adam.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result};

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Moment buffers for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step_count: u64,
}

impl AdamState {
    pub fn new(n_params: usize, config: AdamConfig) -> Self {
        Self { config, m: vec![0.0; n_params], v: vec![0.0; n_params], step_count: 0 }
    }

    /// One update in place. Each coordinate only sees its own gradient history.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(shape_err(format!(
                "adam state holds {} moments, got {} params and {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step_count += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let t = self.step_count as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

/// Cosine decay from `lr` at step 0 to `lr * final_ratio` at the last step.
pub fn cosine_lr(lr: f64, final_ratio: f64, step: usize, total: usize) -> f64 {
    if total <= 1 {
        return lr;
    }
    let frac = step as f64 / (total - 1) as f64;
    let floor = lr * final_ratio;
    floor + 0.5 * (lr - floor) * (1.0 + (PI * frac).cos())
}
