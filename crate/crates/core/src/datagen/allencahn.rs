//! Allen-Cahn `u_t = ε u_xx - 5u³ + 5u` on the periodic interval `[-1, 1)`,
//! explicit Euler with one stored frame per step.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Field;

/// Magnitude treated as blow-up.
pub const MAX_ABS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllenCahnParams {
    pub eps: f64,
    pub n_x: usize,
    pub dt: f64,
    /// Stored frames; frame `k` is the state after `k` steps.
    pub n_t: usize,
}

impl Default for AllenCahnParams {
    fn default() -> Self {
        Self { eps: 1e-4, n_x: 200, dt: 0.005, n_t: 200 }
    }
}

impl AllenCahnParams {
    pub fn dx(&self) -> f64 {
        2.0 / self.n_x as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || self.n_x < 3 || !(self.dt > 0.0) || self.n_t < 1 {
            return Err(Error::Config(format!("invalid Allen-Cahn parameters {self:?}")));
        }
        let r = self.eps * self.dt / (self.dx() * self.dx());
        if r > 0.5 {
            return Err(Error::Config(format!("diffusion number {r} exceeds 0.5")));
        }
        Ok(())
    }
}

/// One explicit Euler step with periodic wraparound.
pub fn euler_step(u: &[f64], eps: f64, dx: f64, dt: f64, out: &mut [f64]) {
    let n = u.len();
    let inv = eps / (dx * dx);
    for i in 0..n {
        let l = u[(i + n - 1) % n];
        let r = u[(i + 1) % n];
        let v = u[i];
        out[i] = v + dt * (inv * (l - 2.0 * v + r) - 5.0 * v * v * v + 5.0 * v);
    }
}

/// Runs `steps` Euler steps and returns the final state.
pub fn evolve(u0: &[f64], eps: f64, dx: f64, dt: f64, steps: usize) -> Vec<f64> {
    let mut u = u0.to_vec();
    let mut next = u.clone();
    for _ in 0..steps {
        euler_step(&u, eps, dx, dt, &mut next);
        std::mem::swap(&mut u, &mut next);
    }
    u
}

pub fn allencahn_trajectory(u0: &[f64], p: &AllenCahnParams) -> Result<Field> {
    p.validate()?;
    if u0.len() != p.n_x {
        return Err(Error::Shape(format!("initial state has {} nodes, expected {}", u0.len(), p.n_x)));
    }
    let n = p.n_x;
    let mut u = u0.to_vec();
    let mut next = u.clone();
    let mut data = vec![0.0; n * p.n_t];
    for k in 0..p.n_t {
        if k > 0 {
            euler_step(&u, p.eps, p.dx(), p.dt, &mut next);
            std::mem::swap(&mut u, &mut next);
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > MAX_ABS) {
            return Err(Error::Generation(format!("Allen-Cahn blow-up at frame {k}")));
        }
        for (i, v) in u.iter().enumerate() {
            data[i * p.n_t + k] = *v;
        }
    }
    Field::new(n, p.n_t, data)
}

/// `Σ_{k=1..3} x^{2k} (a_k cos(kπx) + b_k sin(kπx))` at nodes `-1 + i dx`.
pub fn polynomial_trig_ic(a: [f64; 3], b: [f64; 3], n_x: usize) -> Vec<f64> {
    let dx = 2.0 / n_x as f64;
    (0..n_x)
        .map(|i| {
            let x = -1.0 + i as f64 * dx;
            (1..=3)
                .map(|k| {
                    let w = k as f64 * PI * x;
                    x.powi(2 * k as i32) * (a[k - 1] * w.cos() + b[k - 1] * w.sin())
                })
                .sum()
        })
        .collect()
}

pub(crate) fn sample(p: &AllenCahnParams, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Field)> {
    let mut draw = || [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
    let a = draw();
    let b = draw();
    let u0 = polynomial_trig_ic(a, b, p.n_x);
    let field = allencahn_trajectory(&u0, p)?;
    Ok((u0, field))
}
