//! Benchmark data generators.
//!
//! Every generator is a deterministic function of its configuration and
//! seed. Each sample draws from its own ChaCha stream keyed by
//! `seed ^ sample_index`, with the train and test splits on different
//! stream ids, so splits are disjoint and samples can be produced in any
//! order with identical results.

pub mod advdiff;
pub mod allencahn;
pub mod burgers;
pub mod grf;
pub mod lorenz96;
pub mod poisson;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::Interval;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{Field, QueryGrid};

/// Give up on a sample after this many consecutive rejected draws; at that
/// point at least 90% of its attempts failed.
pub const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    #[serde(rename = "poisson")]
    Poisson2d,
    #[serde(rename = "burgers")]
    Burgers1d,
    #[serde(rename = "advdiff")]
    AdvDiff1d,
    Lorenz96,
    AllenCahn,
}

impl Benchmark {
    pub const ALL: [Benchmark; 5] =
        [Benchmark::Poisson2d, Benchmark::Burgers1d, Benchmark::AdvDiff1d, Benchmark::Lorenz96, Benchmark::AllenCahn];

    /// Numeric id stored in dataset files.
    pub fn id(self) -> u32 {
        match self {
            Benchmark::Poisson2d => 1,
            Benchmark::Burgers1d => 2,
            Benchmark::AdvDiff1d => 3,
            Benchmark::Lorenz96 => 4,
            Benchmark::AllenCahn => 5,
        }
    }

    pub fn from_id(id: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Poisson2d => "poisson",
            Benchmark::Burgers1d => "burgers",
            Benchmark::AdvDiff1d => "advdiff",
            Benchmark::Lorenz96 => "lorenz96",
            Benchmark::AllenCahn => "allencahn",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    /// Trunk-coordinate domains. The second axis is `y` for Poisson and
    /// time (relative to the first stored frame) otherwise.
    pub fn domains(self) -> (Interval, Interval) {
        match self {
            Benchmark::Poisson2d => (Interval::UNIT, Interval::UNIT),
            Benchmark::Burgers1d => (Interval::UNIT, Interval { lo: 0.0, hi: burgers::T_FINAL }),
            Benchmark::AdvDiff1d => (Interval::UNIT, Interval { lo: 0.0, hi: advdiff::T_FINAL }),
            Benchmark::Lorenz96 => (Interval::UNIT, Interval { lo: 0.0, hi: lorenz96::WINDOW }),
            Benchmark::AllenCahn => (Interval { lo: -1.0, hi: 1.0 }, Interval::UNIT),
        }
    }

    /// Query grid for fields of shape `n_x x n_t`.
    ///
    /// Lorenz-96 sites sit at `i / N` and Allen-Cahn nodes at `-1 + 2i / N`
    /// (periodic grids without the duplicate endpoint); every other axis
    /// spans its domain with both endpoints. Allen-Cahn frames are
    /// `k / n_t` for `k = 0..n_t`.
    pub fn grid(self, n_x: usize, n_t: usize) -> QueryGrid {
        let (dx, dt) = self.domains();
        let xs: Vec<f64> = match self {
            Benchmark::Lorenz96 => (0..n_x).map(|i| i as f64 / n_x as f64).collect(),
            Benchmark::AllenCahn => (0..n_x).map(|i| -1.0 + 2.0 * i as f64 / n_x as f64).collect(),
            _ => dx.linspace(n_x),
        };
        let ts: Vec<f64> = match self {
            Benchmark::AllenCahn => (0..n_t).map(|k| k as f64 / n_t as f64).collect(),
            _ => dt.linspace(n_t),
        };
        QueryGrid::tensor(&xs, &ts)
    }

    /// Largest magnitude any stored target may take.
    pub fn target_bound(self) -> f64 {
        match self {
            Benchmark::Burgers1d => burgers::MAX_ABS,
            Benchmark::AdvDiff1d => advdiff::MAX_ABS,
            Benchmark::AllenCahn => allencahn::MAX_ABS,
            Benchmark::Lorenz96 => lorenz96::MAX_ABS,
            Benchmark::Poisson2d => 1e6,
        }
    }
}

/// Physical and discretization parameters of one benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "benchmark", rename_all = "lowercase")]
pub enum Physics {
    #[serde(rename = "poisson")]
    Poisson2d(poisson::PoissonParams),
    #[serde(rename = "burgers")]
    Burgers1d(burgers::BurgersParams),
    #[serde(rename = "advdiff")]
    AdvDiff1d(advdiff::AdvDiffParams),
    Lorenz96(lorenz96::Lorenz96Params),
    AllenCahn(allencahn::AllenCahnParams),
}

impl Physics {
    pub fn benchmark(&self) -> Benchmark {
        match self {
            Physics::Poisson2d(_) => Benchmark::Poisson2d,
            Physics::Burgers1d(_) => Benchmark::Burgers1d,
            Physics::AdvDiff1d(_) => Benchmark::AdvDiff1d,
            Physics::Lorenz96(_) => Benchmark::Lorenz96,
            Physics::AllenCahn(_) => Benchmark::AllenCahn,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Physics::Poisson2d(p) => p.validate(),
            Physics::Burgers1d(p) => p.validate(),
            Physics::AdvDiff1d(p) => p.validate(),
            Physics::Lorenz96(p) => p.validate(),
            Physics::AllenCahn(p) => p.validate(),
        }
    }

    /// `(sensors, n_x, n_t)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        match self {
            Physics::Poisson2d(p) => (p.sensor_n * p.sensor_n, p.n, p.n),
            Physics::Burgers1d(p) => (p.n_x, p.n_x, p.n_t),
            Physics::AdvDiff1d(p) => (p.n_x, p.n_x, p.n_t),
            Physics::Lorenz96(p) => (p.n, p.n, p.snapshots),
            Physics::AllenCahn(p) => (p.n_x, p.n_x, p.n_t),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Field)> {
        match self {
            Physics::Poisson2d(p) => poisson::sample(p, rng),
            Physics::Burgers1d(p) => burgers::sample(p, rng),
            Physics::AdvDiff1d(p) => advdiff::sample(p, rng),
            Physics::Lorenz96(p) => lorenz96::sample(p, rng),
            Physics::AllenCahn(p) => allencahn::sample(p, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// What to generate: physics, sample counts and the base seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub physics: Physics,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl BenchmarkConfig {
    /// Laptop-sized defaults.
    pub fn desk(b: Benchmark) -> Self {
        let (physics, n_train, n_test) = match b {
            Benchmark::Poisson2d => (Physics::Poisson2d(poisson::PoissonParams::desk()), 2000, 200),
            Benchmark::Burgers1d => (Physics::Burgers1d(burgers::BurgersParams::default()), 1000, 250),
            Benchmark::AdvDiff1d => (Physics::AdvDiff1d(advdiff::AdvDiffParams::default()), 1000, 250),
            Benchmark::Lorenz96 => (Physics::Lorenz96(lorenz96::Lorenz96Params::default()), 1000, 200),
            Benchmark::AllenCahn => (Physics::AllenCahn(allencahn::AllenCahnParams::default()), 1000, 250),
        };
        Self { physics, n_train, n_test, seed: 0 }
    }

    /// Sample counts and grids as published.
    pub fn paper(b: Benchmark) -> Self {
        let (physics, n_train, n_test) = match b {
            Benchmark::Poisson2d => (Physics::Poisson2d(poisson::PoissonParams::paper()), 9000, 1000),
            Benchmark::Burgers1d => (Physics::Burgers1d(burgers::BurgersParams::default()), 1122, 128),
            Benchmark::AdvDiff1d => (Physics::AdvDiff1d(advdiff::AdvDiffParams::default()), 1000, 250),
            Benchmark::Lorenz96 => (Physics::Lorenz96(lorenz96::Lorenz96Params::default()), 8000, 2000),
            Benchmark::AllenCahn => (Physics::AllenCahn(allencahn::AllenCahnParams::default()), 9750, 250),
        };
        Self { physics, n_train, n_test, seed: 0 }
    }

    pub fn benchmark(&self) -> Benchmark {
        self.physics.benchmark()
    }

    pub fn count(&self, split: Split) -> usize {
        match split {
            Split::Train => self.n_train,
            Split::Test => self.n_test,
        }
    }
}

/// Paired input functions and solution fields on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub benchmark: Benchmark,
    /// `N x m` sampled input functions.
    pub inputs: Matrix,
    /// `N x (n_x n_t)` solution fields, `t` fastest.
    pub targets: Matrix,
    pub n_x: usize,
    pub n_t: usize,
}

impl Dataset {
    pub fn new(benchmark: Benchmark, inputs: Matrix, targets: Matrix, n_x: usize, n_t: usize) -> Result<Self> {
        if inputs.rows != targets.rows || targets.cols != n_x * n_t {
            return Err(Error::Shape(format!(
                "inputs {}x{}, targets {}x{}, grid {n_x}x{n_t}",
                inputs.rows, inputs.cols, targets.rows, targets.cols
            )));
        }
        Ok(Self { benchmark, inputs, targets, n_x, n_t })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows == 0
    }

    pub fn sensors(&self) -> usize {
        self.inputs.cols
    }

    pub fn grid(&self) -> QueryGrid {
        self.benchmark.grid(self.n_x, self.n_t)
    }

    pub fn target_field(&self, i: usize) -> Field {
        Field { n_x: self.n_x, n_t: self.n_t, data: self.targets.row(i).to_vec() }
    }

    /// First `n` samples.
    pub fn head(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        Dataset {
            benchmark: self.benchmark,
            inputs: self.inputs.select_rows(&idx),
            targets: self.targets.select_rows(&idx),
            n_x: self.n_x,
            n_t: self.n_t,
        }
    }
}

/// Independent RNG for one sample of one split.
pub fn sample_rng(seed: u64, split: Split, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index as u64);
    rng.set_stream(match split {
        Split::Train => 0,
        Split::Test => 1,
    });
    rng
}

/// Generates one split of a benchmark.
pub fn generate(cfg: &BenchmarkConfig, split: Split) -> Result<Dataset> {
    cfg.physics.validate()?;
    let (m, n_x, n_t) = cfg.physics.shape();
    let count = cfg.count(split);
    let mut inputs = Matrix::zeros(count, m);
    let mut targets = Matrix::zeros(count, n_x * n_t);
    let bound = cfg.benchmark().target_bound();
    for i in 0..count {
        let mut rng = sample_rng(cfg.seed, split, i);
        let (u0, field) = cfg.physics.sample(&mut rng)?;
        if !field.data.iter().all(|v| v.is_finite() && v.abs() <= bound) {
            return Err(Error::Generation(format!("sample {i} left the admissible range")));
        }
        inputs.row_mut(i).copy_from_slice(&u0);
        targets.row_mut(i).copy_from_slice(&field.data);
    }
    Dataset::new(cfg.benchmark(), inputs, targets, n_x, n_t)
}

/// Draws until `accept` holds, giving up after [`MAX_ATTEMPTS`] rejections.
pub(crate) fn with_rejection<T>(mut draw: impl FnMut() -> Result<Option<T>>) -> Result<T> {
    for _ in 0..MAX_ATTEMPTS {
        if let Some(v) = draw()? {
            return Ok(v);
        }
    }
    Err(Error::Generation(format!("{MAX_ATTEMPTS} consecutive trajectories rejected")))
}

/// Number of equal sub-steps of at most `dt_max` covering `span`.
pub(crate) fn substeps(span: f64, dt_max: f64) -> usize {
    ((span / dt_max).ceil() as usize).max(1)
}
