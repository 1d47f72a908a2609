//! 2-D Poisson problem `∇²u = f` on the unit square with `u = 0` on the
//! boundary, discretized by the five-point stencil and solved with
//! conjugate gradients.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grf::{sample_grf_2d_with, GrfSpec};
use crate::error::{Error, Result};
use crate::model::Field;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    pub alpha: f64,
    pub tau: f64,
    /// Nodes per side, boundary included.
    pub n: usize,
    /// Branch sensors per side, taken by nearest-index subsampling.
    pub sensor_n: usize,
}

impl PoissonParams {
    pub fn desk() -> Self {
        Self { alpha: 3.0, tau: 3.0, n: 32, sensor_n: 32 }
    }

    pub fn paper() -> Self {
        Self { alpha: 3.0, tau: 3.0, n: 128, sensor_n: 32 }
    }

    pub fn validate(&self) -> Result<()> {
        GrfSpec { alpha: self.alpha, tau: self.tau, n: self.n }.validate()?;
        if self.sensor_n < 2 || self.sensor_n > self.n {
            return Err(Error::Config(format!("sensor grid {} must lie in 2..={}", self.sensor_n, self.n)));
        }
        Ok(())
    }
}

/// Relative residual at which CG stops.
pub const CG_TOL: f64 = 1e-10;

/// Applies the five-point matrix (4 on the diagonal, -1 per shared edge) to
/// the interior unknowns of an `m x m` grid. Boundary values are zero.
fn apply_stencil(m: usize, u: &[f64], out: &mut [f64]) {
    for i in 0..m {
        for j in 0..m {
            let mut s = 4.0 * u[i * m + j];
            if i > 0 {
                s -= u[(i - 1) * m + j];
            }
            if i + 1 < m {
                s -= u[(i + 1) * m + j];
            }
            if j > 0 {
                s -= u[i * m + j - 1];
            }
            if j + 1 < m {
                s -= u[i * m + j + 1];
            }
            out[i * m + j] = s;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for the interior system `A u = b`.
fn cg(m: usize, b: &[f64]) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; b.len()];
    let mut rr = dot(&r, &r);
    let max_iter = 10 * (m + 2) * (m + 2);
    for _ in 0..max_iter {
        if rr.sqrt() <= CG_TOL * b_norm {
            return Ok(x);
        }
        apply_stencil(m, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Err(Error::Solver(format!("CG did not reach relative residual {CG_TOL} in {max_iter} iterations")))
}

/// Solves `∇²u = f` for an `n x n` nodal forcing (row-major, `y` fastest)
/// with grid spacing `1 / (n - 1)`. Returns `u` on the same nodes, zero on
/// the boundary.
pub fn solve_poisson_2d(f: &[f64], n: usize) -> Result<Vec<f64>> {
    if n < 3 || f.len() != n * n {
        return Err(Error::Shape(format!("forcing of length {} is not a {n}x{n} grid", f.len())));
    }
    if !f.iter().all(|v| v.is_finite()) {
        return Err(Error::Solver("non-finite forcing".into()));
    }
    let m = n - 2;
    let h = 1.0 / (n - 1) as f64;
    // (4u - Σ neighbours) / h² = -∇²u = -f
    let b: Vec<f64> = (1..=m).flat_map(|i| (1..=m).map(move |j| (i, j))).map(|(i, j)| -h * h * f[i * n + j]).collect();
    let interior = cg(m, &b)?;
    let mut u = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..m {
            u[(i + 1) * n + j + 1] = interior[i * m + j];
        }
    }
    Ok(u)
}

/// Max-norm residual `|A u - b|` of the interior system, for verification.
pub fn stencil_residual(u: &[f64], f: &[f64], n: usize) -> f64 {
    let m = n - 2;
    let h = 1.0 / (n - 1) as f64;
    let interior: Vec<f64> = (1..=m).flat_map(|i| (1..=m).map(move |j| (i, j))).map(|(i, j)| u[i * n + j]).collect();
    let mut au = vec![0.0; m * m];
    apply_stencil(m, &interior, &mut au);
    (1..=m)
        .flat_map(|i| (1..=m).map(move |j| (i, j)))
        .zip(&au)
        .map(|((i, j), a)| (a + h * h * f[i * n + j]).abs())
        .fold(0.0, f64::max)
}

fn sensor_indices(n: usize, s: usize) -> Vec<usize> {
    (0..s).map(|i| ((i * (n - 1)) as f64 / (s - 1) as f64).round() as usize).collect()
}

pub(crate) fn sample(p: &PoissonParams, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Field)> {
    let n = p.n;
    let f = sample_grf_2d_with(&GrfSpec { alpha: p.alpha, tau: p.tau, n }, rng)?;
    let u = solve_poisson_2d(&f, n)?;
    let idx = sensor_indices(n, p.sensor_n);
    let sensors = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| f[i * n + j]).collect();
    Ok((sensors, Field::new(n, n, u)?))
}
