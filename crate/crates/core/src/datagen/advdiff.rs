//! Linear advection-diffusion `u_t + c u_x = ν u_xx` on `[0, 1]` with
//! homogeneous Dirichlet walls. First-order upwind advection (`c > 0`),
//! centered diffusion, explicit Euler.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{substeps, with_rejection};
use crate::error::{Error, Result};
use crate::model::Field;

pub const T_FINAL: f64 = 1.0;
pub const MAX_ABS: f64 = 10.0;
const DIFF_SAFETY: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvDiffParams {
    pub c: f64,
    pub nu: f64,
    pub t_final: f64,
    pub n_x: usize,
    pub n_t: usize,
}

impl Default for AdvDiffParams {
    fn default() -> Self {
        Self { c: 0.03, nu: 0.01, t_final: T_FINAL, n_x: 100, n_t: 100 }
    }
}

impl AdvDiffParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0) || !(self.nu > 0.0) || !(self.t_final > 0.0) || self.n_x < 3 || self.n_t < 2 {
            return Err(Error::Config(format!("invalid advection-diffusion parameters {self:?}")));
        }
        Ok(())
    }

    /// Internal time step: the largest step not exceeding the stored frame
    /// interval that keeps `ν δt/δx² ≤ 0.4` and `c δt/δx + 2ν δt/δx² ≤ 1`.
    pub fn internal_dt(&self) -> (usize, f64) {
        let dx = 1.0 / (self.n_x - 1) as f64;
        let frame_dt = self.t_final / (self.n_t - 1) as f64;
        let mut dt_max = DIFF_SAFETY * dx * dx / self.nu;
        let monotone = 1.0 / (self.c / dx + 2.0 * self.nu / (dx * dx));
        dt_max = dt_max.min(0.9 * monotone);
        let steps = substeps(frame_dt, dt_max);
        (steps, frame_dt / steps as f64)
    }
}

/// Evolves `u0` and stores `n_t` frames on `[0, t_final]`, the first being
/// `u0`. `None` signals an unstable or oversized trajectory.
pub fn advdiff_trajectory(u0: &[f64], p: &AdvDiffParams) -> Result<Option<Field>> {
    p.validate()?;
    if u0.len() != p.n_x {
        return Err(Error::Shape(format!("initial state has {} nodes, expected {}", u0.len(), p.n_x)));
    }
    let n = p.n_x;
    let dx = 1.0 / (n - 1) as f64;
    let (steps, dt) = p.internal_dt();
    let a = p.c * dt / dx;
    let d = p.nu * dt / (dx * dx);
    let mut u = u0.to_vec();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let mut next = u.clone();
    let mut data = vec![0.0; n * p.n_t];
    for k in 0..p.n_t {
        if k > 0 {
            for _ in 0..steps {
                for i in 1..n - 1 {
                    next[i] = u[i] - a * (u[i] - u[i - 1]) + d * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
                }
                std::mem::swap(&mut u, &mut next);
            }
            if u.iter().any(|v| !v.is_finite() || v.abs() > MAX_ABS) {
                return Ok(None);
            }
        }
        for (i, v) in u.iter().enumerate() {
            data[i * p.n_t + k] = *v;
        }
    }
    Ok(Some(Field::new(n, p.n_t, data)?))
}

/// Quadratic profile plus tapered Gaussian bumps, zero at both walls:
/// `a x(1-x) + Σ_g A_g exp(-(x-μ_g)²/(2σ_g²)) x(1-x)`.
pub fn random_ic(rng: &mut impl Rng, n_x: usize) -> Vec<f64> {
    let a = rng.random_range(0.0..1.0);
    let g = rng.random_range(1..=3);
    let bumps: Vec<(f64, f64, f64)> = (0..g)
        .map(|_| (rng.random_range(0.2..1.0), rng.random_range(0.2..0.8), rng.random_range(0.03..0.12)))
        .collect();
    let dx = 1.0 / (n_x - 1) as f64;
    (0..n_x)
        .map(|i| {
            if i == 0 || i == n_x - 1 {
                return 0.0;
            }
            let x = i as f64 * dx;
            let taper = x * (1.0 - x);
            let gauss: f64 = bumps.iter().map(|(amp, mu, sig)| amp * (-(x - mu).powi(2) / (2.0 * sig * sig)).exp()).sum();
            taper * (a + gauss)
        })
        .collect()
}

pub(crate) fn sample(p: &AdvDiffParams, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Field)> {
    with_rejection(|| {
        let u0 = random_ic(rng, p.n_x);
        Ok(advdiff_trajectory(&u0, p)?.map(|f| (u0, f)))
    })
}
