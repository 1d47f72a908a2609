//! Lorenz-96 ring `dx_i/dt = (x_{i+1} - x_{i-2}) x_{i-1} - x_i + F`
//! integrated with classical RK4.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Field;

/// Length of the retained window, in model time units.
pub const WINDOW: f64 = 5.0;
pub const MAX_ABS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lorenz96Params {
    /// Number of sites.
    pub n: usize,
    pub forcing: f64,
    pub dt: f64,
    /// Discarded transient.
    pub spinup: f64,
    pub window: f64,
    pub snapshots: usize,
    /// Amplitude of the Gaussian perturbation of the equilibrium.
    pub eps: f64,
}

impl Default for Lorenz96Params {
    fn default() -> Self {
        Self { n: 40, forcing: 4.0, dt: 0.01, spinup: 10.0, window: WINDOW, snapshots: 501, eps: 1e-3 }
    }
}

impl Lorenz96Params {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !(self.dt > 0.0) || self.snapshots < 2 || !(self.window > 0.0) || !(self.spinup >= 0.0) {
            return Err(Error::Config(format!("invalid Lorenz-96 parameters {self:?}")));
        }
        let (_, stride) = self.step_counts();
        let intervals = (self.snapshots - 1) as f64;
        if ((stride as f64) * self.dt * intervals - self.window).abs() > 1e-9 * self.window {
            return Err(Error::Config("snapshot spacing is not a whole number of steps".into()));
        }
        Ok(())
    }

    /// `(spin-up steps, steps between stored snapshots)`.
    pub fn step_counts(&self) -> (usize, usize) {
        let spin = (self.spinup / self.dt).round() as usize;
        let stride = (self.window / (self.dt * (self.snapshots - 1) as f64)).round().max(1.0) as usize;
        (spin, stride)
    }
}

/// Right-hand side with periodic indexing.
pub fn tendency(x: &[f64], forcing: f64, out: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let ip1 = x[(i + 1) % n];
        let im1 = x[(i + n - 1) % n];
        let im2 = x[(i + n - 2) % n];
        out[i] = (ip1 - im2) * im1 - x[i] + forcing;
    }
}

/// Reusable RK4 stepper.
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }

    pub fn step(&mut self, x: &mut [f64], forcing: f64, dt: f64) {
        let n = x.len();
        tendency(x, forcing, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * dt * self.k1[i];
        }
        tendency(&self.tmp, forcing, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * dt * self.k2[i];
        }
        tendency(&self.tmp, forcing, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + dt * self.k3[i];
        }
        tendency(&self.tmp, forcing, &mut self.k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Advances `x` by `steps` RK4 steps.
pub fn integrate(x: &mut [f64], forcing: f64, dt: f64, steps: usize) {
    let mut rk = Rk4::new(x.len());
    for _ in 0..steps {
        rk.step(x, forcing, dt);
    }
}

/// Spins up from `x0`, then records the window as an `n x snapshots` field
/// (site index outer, time inner).
pub fn lorenz96_trajectory(x0: &[f64], p: &Lorenz96Params) -> Result<Field> {
    p.validate()?;
    if x0.len() != p.n {
        return Err(Error::Shape(format!("state has {} sites, expected {}", x0.len(), p.n)));
    }
    let (spin, stride) = p.step_counts();
    let mut x = x0.to_vec();
    let mut rk = Rk4::new(p.n);
    for _ in 0..spin {
        rk.step(&mut x, p.forcing, p.dt);
    }
    let mut data = vec![0.0; p.n * p.snapshots];
    for k in 0..p.snapshots {
        if k > 0 {
            for _ in 0..stride {
                rk.step(&mut x, p.forcing, p.dt);
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Generation("Lorenz-96 state became non-finite".into()));
        }
        for (i, v) in x.iter().enumerate() {
            data[i * p.snapshots + k] = *v;
        }
    }
    Field::new(p.n, p.snapshots, data)
}

pub(crate) fn sample(p: &Lorenz96Params, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Field)> {
    let x0: Vec<f64> = (0..p.n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            p.forcing + p.eps * z
        })
        .collect();
    let field = lorenz96_trajectory(&x0, p)?;
    Ok((field.snapshot(0), field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{sample_rng, Split};

    #[test]
    fn default_window_layout() {
        let p = Lorenz96Params::default();
        assert_eq!(p.step_counts(), (1000, 1));
        p.validate().unwrap();
    }

    #[test]
    fn equilibrium_is_exact() {
        let mut x = vec![4.0; 40];
        integrate(&mut x, 4.0, 0.01, 1500);
        assert!(x.iter().all(|v| (v - 4.0).abs() <= 1e-13));
    }

    #[test]
    fn rotation_equivariance() {
        let p = Lorenz96Params { spinup: 1.0, window: 1.0, snapshots: 101, ..Default::default() };
        let (x0, _) = sample(&p, &mut sample_rng(2, Split::Train, 0)).unwrap();
        let mut rotated = x0.clone();
        rotated.rotate_left(3);
        let a = lorenz96_trajectory(&x0, &p).unwrap();
        let b = lorenz96_trajectory(&rotated, &p).unwrap();
        for i in 0..p.n {
            for k in 0..p.snapshots {
                assert!((b.get(i, k) - a.get((i + 3) % p.n, k)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn branch_input_is_first_kept_snapshot() {
        let p = Lorenz96Params { spinup: 2.0, window: 0.5, snapshots: 51, ..Default::default() };
        let (u0, f) = sample(&p, &mut sample_rng(0, Split::Train, 4)).unwrap();
        assert_eq!(u0, f.snapshot(0));
        assert_eq!(f.n_t, 51);
    }

    #[test]
    fn inconsistent_spacing_rejected() {
        let p = Lorenz96Params { snapshots: 300, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
