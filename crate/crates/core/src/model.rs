//! Branch-trunk operator factorization shared by the identity (vanilla),
//! Fourier and Chebyshev trunk variants.
//!
//! A prediction at query `q` for input function `i` is the inner product of
//! the branch output for sample `i` with the trunk output at coordinate `q`,
//! with no additive bias.

use serde::{Deserialize, Serialize};

use crate::embedding::{Coordinate, Interval, SpectralDictionary};
use crate::error::{shape_err, Error, Result};
use crate::linalg::{gemm, matmul, Matrix, Op};
use crate::nn::{mse_loss, Activation, Mlp};

/// Scalar field on an `n_x x n_t` grid, flattened with `t` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub n_x: usize,
    pub n_t: usize,
    pub data: Vec<f64>,
}

impl Field {
    pub fn new(n_x: usize, n_t: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_x * n_t {
            return Err(shape_err(format!("{} values for a {n_x}x{n_t} field", data.len())));
        }
        Ok(Self { n_x, n_t, data })
    }

    #[inline]
    pub fn get(&self, ix: usize, it: usize) -> f64 {
        self.data[ix * self.n_t + it]
    }

    /// Values along `x` at one time index.
    pub fn snapshot(&self, it: usize) -> Vec<f64> {
        (0..self.n_x).map(|ix| self.get(ix, it)).collect()
    }
}

/// Ordered query coordinates plus the shape used to reassemble fields.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryGrid {
    pub coords: Vec<Coordinate>,
    pub n_x: usize,
    pub n_t: usize,
}

impl QueryGrid {
    /// Tensor grid with `t` (or `y`) varying fastest.
    pub fn tensor(xs: &[f64], ts: &[f64]) -> Self {
        let coords = xs.iter().flat_map(|&x| ts.iter().map(move |&t| Coordinate::new(x, t))).collect();
        Self { coords, n_x: xs.len(), n_t: ts.len() }
    }

    pub fn uniform(domain_x: Interval, n_x: usize, domain_t: Interval, n_t: usize) -> Self {
        Self::tensor(&domain_x.linspace(n_x), &domain_t.linspace(n_t))
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord_dim(&self) -> usize {
        self.coords.first().map_or(2, Coordinate::dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coords.len() != self.n_x * self.n_t {
            return Err(shape_err(format!("grid has {} points but shape {}x{}", self.coords.len(), self.n_x, self.n_t)));
        }
        Ok(())
    }
}

/// Architecture description sufficient to rebuild an [`OperatorModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub sensors: usize,
    pub branch_hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
    pub latent: usize,
    pub activation: Activation,
    pub dict: SpectralDictionary,
    pub coord_dim: usize,
}

impl ModelSpec {
    pub fn branch_widths(&self) -> Vec<usize> {
        let mut w = vec![self.sensors];
        w.extend(&self.branch_hidden);
        w.push(self.latent);
        w
    }

    pub fn trunk_widths(&self) -> Vec<usize> {
        let mut w = vec![self.dict.output_width(self.coord_dim)];
        w.extend(&self.trunk_hidden);
        w.push(self.latent);
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorModel {
    pub branch: Mlp,
    pub trunk: Mlp,
    pub dict: SpectralDictionary,
    pub latent: usize,
}

/// Gradients of the operator loss, split by network.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorGrads {
    pub branch: Vec<f64>,
    pub trunk: Vec<f64>,
}

impl OperatorModel {
    /// Glorot-initialized model; branch and trunk draw from distinct streams of `seed`.
    pub fn init(spec: &ModelSpec, seed: u64) -> Result<Self> {
        spec.dict.validate()?;
        if spec.latent == 0 || spec.sensors == 0 {
            return Err(Error::Config("latent width and sensor count must be positive".into()));
        }
        let branch = Mlp::new(&spec.branch_widths(), spec.activation, seed.wrapping_mul(2))?;
        let trunk = Mlp::new(&spec.trunk_widths(), spec.activation, seed.wrapping_mul(2).wrapping_add(1))?;
        Self::from_parts(branch, trunk, spec.dict)
    }

    pub fn from_parts(branch: Mlp, trunk: Mlp, dict: SpectralDictionary) -> Result<Self> {
        let latent = branch.output_width();
        if trunk.output_width() != latent {
            return Err(shape_err(format!(
                "branch emits {latent} channels but trunk emits {}",
                trunk.output_width()
            )));
        }
        if trunk.input_width() != dict.output_width(1) && trunk.input_width() != dict.output_width(2) {
            return Err(shape_err("trunk input width does not match the embedding width"));
        }
        Ok(Self { branch, trunk, dict, latent })
    }

    pub fn num_params(&self) -> usize {
        self.branch.num_params() + self.trunk.num_params()
    }

    /// Embedding rows for every grid point. Fixed for a given grid, so it can
    /// be computed once and reused.
    pub fn embed_grid(&self, grid: &QueryGrid) -> Result<Matrix> {
        let e = self.dict.embed_all(&grid.coords)?;
        if e.cols != self.trunk.input_width() {
            return Err(shape_err(format!("embedding width {} but trunk expects {}", e.cols, self.trunk.input_width())));
        }
        Ok(e)
    }

    /// `Q x p` trunk outputs, rows in grid order.
    pub fn trunk_eval(&self, grid: &QueryGrid) -> Result<Matrix> {
        self.trunk.predict(&self.embed_grid(grid)?)
    }

    /// `N x p` branch coefficients.
    pub fn branch_eval(&self, u0_batch: &Matrix) -> Result<Matrix> {
        self.branch.predict(u0_batch)
    }

    /// Predictions for a batch given precomputed trunk features.
    pub fn predict_with_embedding(&self, u0_batch: &Matrix, embedded: &Matrix) -> Result<Matrix> {
        let b = self.branch_eval(u0_batch)?;
        let t = self.trunk.predict(embedded)?;
        synthesize(&b, &t)
    }

    /// Loss over `N x Q` targets and the gradients of every parameter.
    pub fn loss_and_grads(&self, u0_batch: &Matrix, targets: &Matrix, embedded: &Matrix) -> Result<(f64, OperatorGrads)> {
        if targets.rows != u0_batch.rows || targets.cols != embedded.rows {
            return Err(shape_err(format!(
                "targets are {}x{}, expected {}x{}",
                targets.rows, targets.cols, u0_batch.rows, embedded.rows
            )));
        }
        let (b, b_tape) = self.branch.forward(u0_batch)?;
        let (t, t_tape) = self.trunk.forward(embedded)?;
        let pred = synthesize(&b, &t)?;
        let (loss, d_pred) = mse_loss(&pred, targets)?;
        // d/dB = dP T, d/dT = dPᵀ B
        let mut d_b = Matrix::zeros(b.rows, b.cols);
        gemm(1.0, &d_pred, Op::N, &t, Op::N, 0.0, &mut d_b)?;
        let mut d_t = Matrix::zeros(t.rows, t.cols);
        gemm(1.0, &d_pred, Op::T, &b, Op::N, 0.0, &mut d_t)?;
        let grads = OperatorGrads {
            branch: self.branch.backward(&b_tape, &d_b)?,
            trunk: self.trunk.backward(&t_tape, &d_t)?,
        };
        Ok((loss, grads))
    }

    /// Loss and gradients on a grid, embedding it first.
    pub fn operator_loss(&self, u0_batch: &Matrix, targets: &Matrix, grid: &QueryGrid) -> Result<(f64, OperatorGrads)> {
        let e = self.embed_grid(grid)?;
        self.loss_and_grads(u0_batch, targets, &e)
    }

    /// Full predicted field for one input function.
    pub fn predict_field(&self, u0: &[f64], grid: &QueryGrid) -> Result<Field> {
        grid.validate()?;
        let u = Matrix::from_vec(1, u0.len(), u0.to_vec())?;
        let b = self.branch_eval(&u)?;
        let t = self.trunk_eval(grid)?;
        let row = synthesize(&b, &t)?;
        Field::new(grid.n_x, grid.n_t, row.data)
    }
}

/// `N x Q` matrix of inner products between branch rows and trunk rows.
pub fn synthesize(branch_out: &Matrix, trunk_out: &Matrix) -> Result<Matrix> {
    if branch_out.cols != trunk_out.cols {
        return Err(shape_err(format!(
            "branch has {} channels, trunk has {}",
            branch_out.cols, trunk_out.cols
        )));
    }
    matmul(branch_out, Op::N, trunk_out, Op::T)
}
