//! Viscous Burgers `u_t + u u_x = ν u_xx` on `[0, 1]` with homogeneous
//! Dirichlet walls. Explicit Euler in time, upwinded advection (direction
//! follows the local sign of `u`) and centered diffusion.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{substeps, with_rejection};
use crate::error::{Error, Result};
use crate::model::Field;

pub const T_FINAL: f64 = 0.3;
/// Trajectories exceeding this sup-norm are discarded.
pub const MAX_ABS: f64 = 5.0;

/// Internal steps keep `ν δt / δx² ≤ DIFF_SAFETY` and `|u| δt / δx ≤ CFL_SAFETY`.
const DIFF_SAFETY: f64 = 0.4;
const CFL_SAFETY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersParams {
    pub nu: f64,
    pub t_final: f64,
    pub n_x: usize,
    pub n_t: usize,
    /// Standard deviation of the three sine-mode coefficients.
    pub coef_std: f64,
}

impl Default for BurgersParams {
    fn default() -> Self {
        Self { nu: 0.01, t_final: T_FINAL, n_x: 100, n_t: 100, coef_std: 0.3 }
    }
}

impl BurgersParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !(self.t_final > 0.0) || self.n_x < 3 || self.n_t < 2 || !(self.coef_std >= 0.0) {
            return Err(Error::Config(format!("invalid Burgers parameters {self:?}")));
        }
        Ok(())
    }
}

/// Evolves `u0` (nodes at `i / (n_x - 1)`) and stores `n_t` equispaced
/// frames on `[0, t_final]`, the first being `u0` itself. Returns `None` if
/// the trajectory turns non-finite or exceeds [`MAX_ABS`].
pub fn burgers_trajectory(u0: &[f64], p: &BurgersParams) -> Result<Option<Field>> {
    p.validate()?;
    if u0.len() != p.n_x {
        return Err(Error::Shape(format!("initial state has {} nodes, expected {}", u0.len(), p.n_x)));
    }
    let n = p.n_x;
    let dx = 1.0 / (n - 1) as f64;
    let frame_dt = p.t_final / (p.n_t - 1) as f64;
    let mut u = u0.to_vec();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let mut next = u.clone();
    let mut data = vec![0.0; n * p.n_t];
    let store = |data: &mut [f64], u: &[f64], k: usize| {
        for (i, v) in u.iter().enumerate() {
            data[i * p.n_t + k] = *v;
        }
    };
    store(&mut data, &u, 0);
    for k in 1..p.n_t {
        let u_max = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut dt_max = DIFF_SAFETY * dx * dx / p.nu;
        if u_max > 0.0 {
            dt_max = dt_max.min(CFL_SAFETY * dx / u_max);
        }
        let steps = substeps(frame_dt, dt_max);
        let dt = frame_dt / steps as f64;
        for _ in 0..steps {
            for i in 1..n - 1 {
                let ui = u[i];
                let adv = if ui > 0.0 { ui * (ui - u[i - 1]) / dx } else { ui * (u[i + 1] - ui) / dx };
                let diff = p.nu * (u[i + 1] - 2.0 * ui + u[i - 1]) / (dx * dx);
                next[i] = ui + dt * (diff - adv);
            }
            next[0] = 0.0;
            next[n - 1] = 0.0;
            std::mem::swap(&mut u, &mut next);
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > MAX_ABS) {
            return Ok(None);
        }
        store(&mut data, &u, k);
    }
    Ok(Some(Field::new(n, p.n_t, data)?))
}

/// `c1 sin(πx) + c2 sin(2πx) + c3 sin(3πx)` on the node grid.
pub fn sine_ic(coefs: [f64; 3], n_x: usize) -> Vec<f64> {
    let dx = 1.0 / (n_x - 1) as f64;
    (0..n_x)
        .map(|i| {
            if i == 0 || i == n_x - 1 {
                return 0.0;
            }
            let x = i as f64 * dx;
            coefs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * PI * x).sin()).sum()
        })
        .collect()
}

pub(crate) fn sample(p: &BurgersParams, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Field)> {
    let normal = Normal::new(0.0, p.coef_std).map_err(|e| Error::Config(e.to_string()))?;
    with_rejection(|| {
        let c = [normal.sample(rng), normal.sample(rng), normal.sample(rng)];
        let u0 = sine_ic(c, p.n_x);
        Ok(burgers_trajectory(&u0, p)?.map(|f| (u0, f)))
    })
}
