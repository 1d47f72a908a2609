//! Mini-batch training of an operator model and checkpoint evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adam::AdamState;
use crate::config::RunConfig;
use crate::datagen::{Benchmark, Dataset};
use crate::error::{Error, Result};
use crate::eval::{power_spectrum_1d, power_spectrum_2d, relative_l2, EvalReport, SpectrumReport};
use crate::linalg::{matmul, Matrix, Op};
use crate::model::{Field, OperatorModel};

/// Per-channel affine map applied to branch inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    /// Column means and population standard deviations; a channel with
    /// std below 1e-12 keeps std 1 so constant sensors pass through centered.
    pub fn fit(inputs: &Matrix) -> Self {
        let n = inputs.rows.max(1) as f64;
        let mut mean = vec![0.0; inputs.cols];
        for i in 0..inputs.rows {
            for (m, v) in mean.iter_mut().zip(inputs.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; inputs.cols];
        for i in 0..inputs.rows {
            for ((s, v), m) in var.iter_mut().zip(inputs.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).map(|s| if s < 1e-12 { 1.0 } else { s }).collect();
        Self { mean, std }
    }

    pub fn apply(&self, inputs: &Matrix) -> Result<Matrix> {
        if inputs.cols != self.mean.len() {
            return Err(Error::Shape(format!("{} sensors but statistics for {}", inputs.cols, self.mean.len())));
        }
        let mut out = inputs.clone();
        for i in 0..out.rows {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }
}

/// A trained (or freshly initialized) model with everything needed to use it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Config snapshot; paths are cleared so the bytes do not depend on where files live.
    pub config: RunConfig,
    pub model: OperatorModel,
    pub standardization: Standardization,
    /// Mean training loss of each epoch.
    pub loss_history: Vec<f64>,
}

impl Checkpoint {
    /// Predictions for every sample of `data`, `N x Q`.
    pub fn predict(&self, data: &Dataset) -> Result<Matrix> {
        self.check_benchmark(data.benchmark)?;
        let x = self.standardization.apply(&data.inputs)?;
        let t = self.model.trunk_eval(&data.grid())?;
        let b = self.model.branch_eval(&x)?;
        matmul(&b, Op::N, &t, Op::T)
    }

    pub fn predict_field(&self, data: &Dataset, i: usize) -> Result<Field> {
        self.check_benchmark(data.benchmark)?;
        if i >= data.len() {
            return Err(Error::Config(format!("sample {i} out of range for {} samples", data.len())));
        }
        let x = self.standardization.apply(&data.inputs.select_rows(&[i]))?;
        self.model.predict_field(x.row(0), &data.grid())
    }

    fn check_benchmark(&self, b: Benchmark) -> Result<()> {
        if b != self.config.benchmark {
            return Err(Error::Config(format!(
                "checkpoint was trained on {} but data is {}",
                self.config.benchmark.name(),
                b.name()
            )));
        }
        Ok(())
    }
}

/// Runs `cfg.optimizer.epochs` epochs of shuffled mini-batch Adam.
pub fn train(cfg: &RunConfig, data: &Dataset) -> Result<Checkpoint> {
    train_with(cfg, data, |_, _| {})
}

/// As [`train`], calling `on_epoch(epoch, mean_loss)` after each epoch.
pub fn train_with(cfg: &RunConfig, data: &Dataset, mut on_epoch: impl FnMut(usize, f64)) -> Result<Checkpoint> {
    cfg.validate()?;
    if data.benchmark != cfg.benchmark {
        return Err(Error::Config(format!(
            "config is for {} but data is {}",
            cfg.benchmark.name(),
            data.benchmark.name()
        )));
    }
    if data.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let standardization = Standardization::fit(&data.inputs);
    let inputs = standardization.apply(&data.inputs)?;
    let mut model = OperatorModel::init(&cfg.model_spec(data.sensors())?, cfg.seed)?;
    // the embedding is parameter-free, so one pass over the grid suffices
    let embedded = model.embed_grid(&data.grid())?;

    let adam = cfg.optimizer.adam();
    let mut branch_opt = AdamState::new(model.branch.num_params(), adam);
    let mut trunk_opt = AdamState::new(model.trunk.num_params(), adam);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.optimizer.epochs);
    let total_steps = cfg.optimizer.epochs * data.len().div_ceil(cfg.optimizer.batch_size);
    let mut step = 0;

    for epoch in 0..cfg.optimizer.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.optimizer.batch_size) {
            let x = inputs.select_rows(batch);
            let y = data.targets.select_rows(batch);
            let (loss, grads) = model.loss_and_grads(&x, &y, &embedded)?;
            if !loss.is_finite() {
                return Err(Error::Divergence(format!("non-finite loss in epoch {epoch}")));
            }
            let lr = cfg.optimizer.lr_at(step, total_steps);
            branch_opt.config.lr = lr;
            trunk_opt.config.lr = lr;
            step += 1;
            branch_opt.step(model.branch.params_mut(), &grads.branch)?;
            trunk_opt.step(model.trunk.params_mut(), &grads.trunk)?;
            total += loss * batch.len() as f64;
        }
        let mean = total / data.len() as f64;
        if !mean.is_finite() || !model.branch.params().iter().chain(model.trunk.params()).all(|p| p.is_finite()) {
            return Err(Error::Divergence(format!("non-finite state after epoch {epoch}")));
        }
        history.push(mean);
        on_epoch(epoch, mean);
    }

    let mut config = cfg.clone();
    config.paths = Default::default();
    Ok(Checkpoint { config, model, standardization, loss_history: history })
}

/// Per-sample relative ℓ2 errors of `ckpt` on `data`.
pub fn evaluate(ckpt: &Checkpoint, data: &Dataset) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::Config("test set is empty".into()));
    }
    let pred = ckpt.predict(data)?;
    let errs = (0..data.len())
        .map(|i| relative_l2(pred.row(i), data.targets.row(i)))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::new(data.benchmark.name(), ckpt.config.model.name(), errs)
}

/// Reference and predicted spectra of sample `i`.
///
/// Poisson fields get one radially binned 2-D spectrum (frame `None`); the
/// time-dependent benchmarks get a spectrum over `x` at the first, middle
/// and last stored frames.
pub fn sample_spectra(ckpt: &Checkpoint, data: &Dataset, i: usize) -> Result<Vec<(Option<usize>, SpectrumReport)>> {
    let pred = ckpt.predict_field(data, i)?;
    let reference = data.target_field(i);
    if data.benchmark == Benchmark::Poisson2d {
        let r = SpectrumReport::new(power_spectrum_2d(&reference)?, power_spectrum_2d(&pred)?)?;
        return Ok(vec![(None, r)]);
    }
    let mut frames = vec![0, data.n_t / 2, data.n_t - 1];
    frames.dedup();
    frames
        .into_iter()
        .map(|it| {
            let r = SpectrumReport::new(power_spectrum_1d(&reference, it)?, power_spectrum_1d(&pred, it)?)?;
            Ok((Some(it), r))
        })
        .collect()
}

/// Mean relative ℓ2 on the training samples themselves.
pub fn training_error(ckpt: &Checkpoint, data: &Dataset) -> Result<f64> {
    Ok(evaluate(ckpt, data)?.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelKind;

    fn tiny_data(n: usize) -> Dataset {
        // u(x, t) = a·(1 - t)·x(1 - x) + b·t, inputs (a, b, 1)
        let (n_x, n_t) = (6, 5);
        let grid = Benchmark::AdvDiff1d.grid(n_x, n_t);
        let mut inputs = Matrix::zeros(n, 3);
        let mut targets = Matrix::zeros(n, n_x * n_t);
        for i in 0..n {
            let a = 0.3 + 0.1 * i as f64;
            let b = 0.5 - 0.07 * i as f64;
            inputs.row_mut(i).copy_from_slice(&[a, b, 1.0]);
            for (q, c) in grid.coords.iter().enumerate() {
                let t = c.t.unwrap();
                targets.set(i, q, a * (1.0 - t) * c.x * (1.0 - c.x) + b * t);
            }
        }
        Dataset::new(Benchmark::AdvDiff1d, inputs, targets, n_x, n_t).unwrap()
    }

    fn tiny_cfg(kind: ModelKind) -> RunConfig {
        let mut cfg = RunConfig::preset(Benchmark::AdvDiff1d, kind);
        cfg.k_x = 4;
        cfg.k_t = 4;
        cfg.d_trunk = 16;
        cfg.branch_hidden = vec![8];
        cfg.trunk_hidden = vec![8];
        cfg.latent = 4;
        cfg.optimizer.batch_size = 3;
        cfg.optimizer.epochs = 5;
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let data = tiny_data(4);
        let mut cfg = tiny_cfg(ModelKind::SedONet);
        cfg.optimizer.epochs = 0;
        let ck = train(&cfg, &data).unwrap();
        let init = OperatorModel::init(&cfg.model_spec(3).unwrap(), cfg.seed).unwrap();
        assert_eq!(ck.model, init);
        assert!(ck.loss_history.is_empty());
    }

    #[test]
    fn training_is_deterministic_and_lowers_loss() {
        let data = tiny_data(7);
        let mut cfg = tiny_cfg(ModelKind::SedONet);
        cfg.optimizer.epochs = 60;
        cfg.optimizer.lr = 1e-2;
        let a = train(&cfg, &data).unwrap();
        let b = train(&cfg, &data).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.loss_history.len(), 60);
        assert!(a.loss_history[59] < 0.5 * a.loss_history[0]);
    }

    #[test]
    fn benchmark_mismatch_and_empty_sets_are_config_errors() {
        let data = tiny_data(3);
        let mut cfg = tiny_cfg(ModelKind::DeepONet);
        cfg.benchmark = Benchmark::Burgers1d;
        assert!(matches!(train(&cfg, &data), Err(Error::Config(_))));
        let ck = train(&tiny_cfg(ModelKind::DeepONet), &data).unwrap();
        assert!(matches!(evaluate(&ck, &data.head(0)), Err(Error::Config(_))));
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let data = tiny_data(4);
        let mut cfg = tiny_cfg(ModelKind::FedONet);
        cfg.trunk_hidden = vec![];
        cfg.branch_hidden = vec![];
        cfg.activation = crate::nn::Activation::Relu;
        cfg.optimizer.lr = 1e300;
        cfg.optimizer.epochs = 50;
        assert!(matches!(train(&cfg, &data), Err(Error::Divergence(_))));
    }

    #[test]
    fn report_mean_is_the_mean_of_samples() {
        let data = tiny_data(5);
        let ck = train(&tiny_cfg(ModelKind::SedONet), &data).unwrap();
        let r = evaluate(&ck, &data).unwrap();
        let mean = r.rel_l2.iter().sum::<f64>() / 5.0;
        assert!((r.mean - mean).abs() <= 1e-12);
        for i in 0..5 {
            let f = ck.predict_field(&data, i).unwrap();
            let direct = relative_l2(&f.data, data.targets.row(i)).unwrap();
            assert!((direct - r.rel_l2[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn standardization_centers_and_scales() {
        let m = Matrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let s = Standardization::fit(&m);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        let z = s.apply(&m).unwrap();
        assert_eq!(z.data, vec![-1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn spectra_cover_three_frames_for_time_dependent_data() {
        let data = tiny_data(2);
        let ck = train(&tiny_cfg(ModelKind::SedONet), &data).unwrap();
        let s = sample_spectra(&ck, &data, 1).unwrap();
        assert_eq!(s.iter().map(|(f, _)| *f).collect::<Vec<_>>(), vec![Some(0), Some(2), Some(4)]);
        assert_eq!(s[0].1.k, vec![0, 1, 2, 3]);
    }
}
