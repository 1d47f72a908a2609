//! Conditioning of embedding dictionaries and the representation gap
//! between a Chebyshev linear readout and a coordinate-input network.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::adam::{cosine_lr, AdamConfig, AdamState};
use crate::embedding::{cheb_eval_all, Coordinate, Interval, SpectralDictionary};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{mse_loss, Activation, Mlp};

/// Where the Gram matrix samples the dictionary, per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    UniformGrid,
    ChebGauss,
    ChebGaussLobatto,
}

impl Sampling {
    /// `q` nodes in `domain`.
    pub fn nodes(self, q: usize, domain: Interval) -> Vec<f64> {
        let map = |xi: f64| domain.lo + 0.5 * (xi + 1.0) * domain.len();
        match self {
            Sampling::UniformGrid => domain.linspace(q),
            Sampling::ChebGauss => (0..q).map(|k| map((PI * (2 * k + 1) as f64 / (2 * q) as f64).cos())).collect(),
            Sampling::ChebGaussLobatto if q == 1 => vec![map(0.0)],
            Sampling::ChebGaussLobatto => (0..q).map(|k| map((PI * k as f64 / (q - 1) as f64).cos())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    /// `G = (1/P) Σ_p φ(ζ_p) φ(ζ_p)ᵀ`, exactly symmetric.
    pub gram: Matrix,
    /// `λ_max / λ_min` with `λ_min` floored at `1e-300`.
    pub condition_number: f64,
    /// `max_{i≠j} |G_ij| / min_i G_ii`.
    pub max_offdiag_ratio: f64,
}

impl GramReport {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "dim,condition_number,max_offdiag_ratio")?;
        writeln!(w, "{},{},{}", self.gram.rows, self.condition_number, self.max_offdiag_ratio)?;
        Ok(())
    }
}

/// Empirical Gram matrix of `dict` over `q` nodes per axis. With
/// `coord_dim == 2` the nodes form a `q x q` tensor grid.
pub fn gram_diagnostic(dict: &SpectralDictionary, sampling: Sampling, q: usize, coord_dim: usize) -> Result<GramReport> {
    dict.validate()?;
    let xs = sampling.nodes(q, dict.domain_x);
    let points: Vec<Coordinate> = match coord_dim {
        1 => xs.iter().map(|&x| Coordinate::spatial(x)).collect(),
        2 => {
            let ts = sampling.nodes(q, dict.domain_t);
            xs.iter().flat_map(|&x| ts.iter().map(move |&t| Coordinate::new(x, t))).collect()
        }
        _ => return Err(Error::Config(format!("coordinate dimension {coord_dim} not supported"))),
    };
    let d = dict.output_width(coord_dim);
    if points.len() < d {
        return Err(Error::Config(format!("{} sample points cannot resolve {d} features", points.len())));
    }
    let phi = dict.embed_all(&points)?;
    let mut g = Matrix::zeros(d, d);
    let inv = 1.0 / points.len() as f64;
    for i in 0..d {
        for j in i..d {
            let s: f64 = (0..phi.rows).map(|p| phi.get(p, i) * phi.get(p, j)).sum::<f64>() * inv;
            g.set(i, j, s);
            g.set(j, i, s);
        }
    }
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, &g.data)).eigenvalues;
    let lmax = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lmin = eig.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-300);
    let min_diag = (0..d).map(|i| g.get(i, i)).fold(f64::INFINITY, f64::min);
    let max_off = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| g.get(i, j).abs()).fold(0.0, f64::max);
    Ok(GramReport { gram: g, condition_number: lmax / lmin, max_offdiag_ratio: max_off / min_diag })
}

/// Optimizer budget for the coordinate network in [`superset_demo`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersetBudget {
    pub steps: usize,
    pub adam: AdamConfig,
    /// Dense fitting grid on `[0, 1]`.
    pub grid_points: usize,
    pub seed: u64,
    /// The step size follows a cosine from `adam.lr` down to
    /// `adam.lr * final_lr_ratio` over the budget.
    pub final_lr_ratio: f64,
}

impl Default for SupersetBudget {
    fn default() -> Self {
        Self { steps: 5000, adam: AdamConfig::default(), grid_points: 256, seed: 0, final_lr_ratio: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersetReport {
    pub degree: usize,
    pub cheb_linear_mse: f64,
    pub vanilla_mlp_mse: f64,
}

impl SupersetReport {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "degree,cheb_linear_mse,vanilla_mlp_mse")?;
        writeln!(w, "{},{},{}", self.degree, self.cheb_linear_mse, self.vanilla_mlp_mse)?;
        Ok(())
    }
}

/// Fits the target `T_K(2x - 1)` on a dense grid two ways: a least-squares
/// linear readout of the `K + 1`-mode Chebyshev dictionary, and a coordinate
/// MLP of the given widths trained with Adam for the budgeted steps.
pub fn superset_demo(degree: usize, mlp_widths: &[usize], budget: &SupersetBudget) -> Result<SupersetReport> {
    if mlp_widths.first() != Some(&1) || mlp_widths.last() != Some(&1) {
        return Err(Error::Config("coordinate network must map 1 input to 1 output".into()));
    }
    if budget.grid_points < degree + 2 {
        return Err(Error::Config("fitting grid too coarse for the requested degree".into()));
    }
    let xs = Interval::UNIT.linspace(budget.grid_points);
    let basis: Vec<Vec<f64>> = xs.iter().map(|x| cheb_eval_all(2.0 * x - 1.0, degree + 1)).collect::<Result<_>>()?;
    let target: Vec<f64> = basis.iter().map(|row| row[degree]).collect();

    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, j| basis[i][j]);
    let y = DVector::from_vec(target.clone());
    let coef = a.clone().svd(true, true).solve(&y, 1e-14).map_err(|e| Error::Solver(e.to_string()))?;
    let resid = &a * coef - &y;
    let cheb_linear_mse = resid.norm_squared() / xs.len() as f64;

    let mut net = Mlp::new(mlp_widths, Activation::Tanh, budget.seed)?;
    let input = Matrix::from_vec(xs.len(), 1, xs.iter().map(|x| 2.0 * x - 1.0).collect())?;
    let t = Matrix::from_vec(xs.len(), 1, target)?;
    let mut opt = AdamState::new(net.num_params(), budget.adam);
    for step in 0..budget.steps {
        opt.config.lr = cosine_lr(budget.adam.lr, budget.final_lr_ratio, step, budget.steps);
        let (out, tape) = net.forward(&input)?;
        let (_, grad) = mse_loss(&out, &t)?;
        let g = net.backward(&tape, &grad)?;
        opt.step(net.params_mut(), &g)?;
    }
    let (vanilla_mlp_mse, _) = mse_loss(&net.predict(&input)?, &t)?;
    Ok(SupersetReport { degree, cheb_linear_mse, vanilla_mlp_mse })
}
