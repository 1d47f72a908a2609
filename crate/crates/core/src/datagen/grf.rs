//! Gaussian random fields on the unit square via a Karhunen-Loève
//! expansion in the Dirichlet sine basis.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Covariance `(-Δ + τ² I)^(-α)` sampled on an `n x n` node grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrfSpec {
    pub alpha: f64,
    pub tau: f64,
    pub n: usize,
}

impl GrfSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) || !(self.tau > 0.0) || self.n < 4 {
            return Err(Error::Config(format!(
                "GRF needs alpha > 1, tau > 0, n >= 4 (got {}, {}, {})",
                self.alpha, self.tau, self.n
            )));
        }
        Ok(())
    }

    /// Modes kept per axis.
    pub fn modes(&self) -> usize {
        self.n / 2
    }

    /// Eigenvalue of the `(j, k)` sine mode, both indices starting at 1.
    pub fn eigenvalue(&self, j: usize, k: usize) -> f64 {
        (PI * PI * (j * j + k * k) as f64 + self.tau * self.tau).powf(-self.alpha)
    }
}

/// One field sample, row-major with `y` fastest, nodes at `i / (n - 1)`.
pub fn sample_grf_2d(spec: &GrfSpec, seed: u64) -> Result<Vec<f64>> {
    sample_grf_2d_with(spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_grf_2d_with<R: Rng>(spec: &GrfSpec, rng: &mut R) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n;
    let k_max = spec.modes();
    // coefficients c[j][k] = sqrt(λ_jk) z_jk
    let mut coef = vec![0.0; k_max * k_max];
    for j in 0..k_max {
        for k in 0..k_max {
            let z: f64 = rng.sample(StandardNormal);
            coef[j * k_max + k] = spec.eigenvalue(j + 1, k + 1).sqrt() * z;
        }
    }
    let h = 1.0 / (n - 1) as f64;
    let basis: Vec<f64> = (0..n)
        .flat_map(|i| (1..=k_max).map(move |j| if i == 0 || i == n - 1 { 0.0 } else { (j as f64 * PI * i as f64 * h).sin() }))
        .collect();
    // f = 2 S C Sᵀ, done as two passes
    let mut tmp = vec![0.0; n * k_max];
    for i in 0..n {
        for k in 0..k_max {
            tmp[i * k_max + k] = (0..k_max).map(|j| basis[i * k_max + j] * coef[j * k_max + k]).sum();
        }
    }
    let mut field = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            field[i * n + l] = 2.0 * (0..k_max).map(|k| tmp[i * k_max + k] * basis[l * k_max + k]).sum::<f64>();
        }
    }
    Ok(field)
}
