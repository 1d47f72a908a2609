//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sedonet::config::{LrSchedule, ModelKind, RunConfig};
use sedonet::datagen::allencahn::{evolve, polynomial_trig_ic};
use sedonet::datagen::lorenz96::integrate;
use sedonet::datagen::poisson::solve_poisson_2d;
use sedonet::datagen::{generate, Benchmark, BenchmarkConfig, Dataset, Split};
use sedonet::diagnostics::{superset_demo, SupersetBudget};
use sedonet::embedding::{cheb_eval_all, EmbeddingKind, Interval, SpectralDictionary};
use sedonet::eval::write_spectra_csv;
use sedonet::format::{decode_checkpoint, decode_dataset, encode_checkpoint, encode_dataset};
use sedonet::linalg::Matrix;
use sedonet::model::{ModelSpec, OperatorModel, QueryGrid};
use sedonet::nn::Activation;
use sedonet::train::{evaluate, sample_spectra, train, training_error};
use sedonet::Error;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn chebyshev_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let xi: f64 = rng.random_range(-1.0..=1.0);
        let t = cheb_eval_all(xi, 65).unwrap();
        for (n, v) in t.iter().enumerate() {
            worst = worst.max((v - (n as f64 * xi.acos()).cos()).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |recurrence - cos(n arccos xi)| = {worst:.2e} (tol 1e-12)"))
}

fn discrete_orthogonality() -> Outcome {
    let q = 64;
    let rows: Vec<Vec<f64>> = (0..q)
        .map(|k| cheb_eval_all((PI * (2 * k + 1) as f64 / (2 * q) as f64).cos(), 32).unwrap())
        .collect();
    let mut worst = 0.0f64;
    for m in 0..32 {
        for n in 0..32 {
            if m != n {
                let s: f64 = rows.iter().map(|r| r[m] * r[n]).sum();
                worst = worst.max(s.abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max off-diagonal sum = {worst:.2e} (tol 1e-9)"))
}

fn gradient_fidelity() -> Outcome {
    let u = Interval::UNIT;
    let spec = ModelSpec {
        sensors: 3,
        branch_hidden: vec![5],
        trunk_hidden: vec![4],
        latent: 2,
        activation: Activation::Tanh,
        dict: SpectralDictionary::new(EmbeddingKind::Chebyshev, 3, 3, 8, u, u).unwrap(),
        coord_dim: 2,
    };
    let mut model = OperatorModel::init(&spec, 4).unwrap();
    let grid = QueryGrid::tensor(&[0.2, 0.9, 0.55], &[0.3]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut random = |r, c| Matrix::from_vec(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let u0 = random(2, 3);
    let targets = random(2, 3);
    let (_, g) = model.operator_loss(&u0, &targets, &grid).unwrap();
    let analytic: Vec<f64> = g.branch.iter().chain(&g.trunk).copied().collect();
    let nb = model.branch.num_params();
    let h = 1e-5;
    let mut worst = 0.0f64;
    let nudge = |m: &mut OperatorModel, k: usize, delta: f64| {
        if k < nb {
            m.branch.params_mut()[k] += delta;
        } else {
            m.trunk.params_mut()[k - nb] += delta;
        }
    };
    for (k, a) in analytic.iter().enumerate() {
        nudge(&mut model, k, h);
        let up = model.operator_loss(&u0, &targets, &grid).unwrap().0;
        nudge(&mut model, k, -2.0 * h);
        let down = model.operator_loss(&u0, &targets, &grid).unwrap().0;
        nudge(&mut model, k, h);
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - a).abs() / a.abs().max(fd.abs()).max(1e-3));
    }
    outcome(
        worst <= 1e-6,
        format!("N=2 Q=3 p=2, {} parameters, max relative error {worst:.2e} (tol 1e-6)", analytic.len()),
    )
}

fn poisson_order() -> f64 {
    let err = |n: usize| {
        let h = 1.0 / (n - 1) as f64;
        let node = |k: usize| k as f64 * h;
        let exact: Vec<f64> =
            (0..n * n).map(|k| (PI * node(k / n)).sin() * (PI * node(k % n)).sin()).collect();
        let f: Vec<f64> = exact.iter().map(|u| -2.0 * PI * PI * u).collect();
        let u = solve_poisson_2d(&f, n).unwrap();
        u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(33), err(65));
    (e1 / e2).log2()
}

/// `log2(|u(dt) - u(dt/2)| / |u(dt/2) - u(dt/4)|)` in the max norm.
fn self_convergence(run: impl Fn(usize) -> Vec<f64>) -> f64 {
    let (a, b, c) = (run(1), run(2), run(4));
    let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    (diff(&a, &b) / diff(&b, &c)).log2()
}

fn lorenz_rk4_order() -> f64 {
    let forcing = 8.0;
    let mut x0: Vec<f64> = vec![forcing; 40];
    x0[0] += 0.01;
    integrate(&mut x0, forcing, 0.01, 1000);
    self_convergence(|refine| {
        let mut x = x0.clone();
        integrate(&mut x, forcing, 0.04 / refine as f64, 25 * refine);
        x
    })
}

fn allencahn_euler_order() -> f64 {
    let n = 200;
    let u0 = polynomial_trig_ic([0.3, -0.2, 0.1], [0.5, 0.2, -0.3], n);
    self_convergence(|refine| evolve(&u0, 1e-4, 2.0 / n as f64, 0.02 / refine as f64, 50 * refine))
}

fn solver_orders() -> Outcome {
    let (p, r, e) = (poisson_order(), lorenz_rk4_order(), allencahn_euler_order());
    let pass = (p - 2.0).abs() <= 0.2 && (r - 4.0).abs() <= 0.3 && (e - 1.0).abs() <= 0.2;
    outcome(pass, format!("Poisson {p:.3} (2 +- 0.2), RK4 {r:.3} (4 +- 0.3), Euler {e:.3} (1 +- 0.2)"))
}

fn fixed_points() -> Outcome {
    let forcing = 4.0;
    let mut x = vec![forcing; 40];
    integrate(&mut x, forcing, 0.01, 1000);
    let mut worst = x.iter().map(|v| (v - forcing).abs()).fold(0.0, f64::max);
    for level in [-1.0, 0.0, 1.0] {
        let u = evolve(&vec![level; 200], 1e-4, 0.01, 0.005, 1000);
        worst = worst.max(u.iter().map(|v| (v - level).abs()).fold(0.0, f64::max));
    }
    outcome(worst <= 1e-13, format!("Lorenz-96 x = F and Allen-Cahn u in {{-1,0,1}} over 1000 steps: max drift {worst:.2e} (tol 1e-13)"))
}

fn superset() -> Outcome {
    let r = superset_demo(12, &[1, 32, 32, 1], &SupersetBudget::default()).unwrap();
    let ratio = r.vanilla_mlp_mse / r.cheb_linear_mse.max(f64::MIN_POSITIVE);
    outcome(
        r.cheb_linear_mse <= 1e-10 && r.vanilla_mlp_mse >= 100.0 * r.cheb_linear_mse,
        format!(
            "T_12: Chebyshev readout MSE {:.2e} (tol 1e-10), MLP MSE {:.2e} after 5000 Adam steps, gap {ratio:.1e} (need >= 1e2)",
            r.cheb_linear_mse, r.vanilla_mlp_mse
        ),
    )
}

/// Identical budget for both models in the ordering comparison.
fn ordering_config(b: Benchmark, kind: ModelKind, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::preset(b, kind);
    cfg.branch_hidden = vec![64, 64];
    cfg.trunk_hidden = vec![64, 64];
    cfg.latent = 64;
    cfg.optimizer.epochs = 150;
    cfg.optimizer.batch_size = 64;
    cfg.seed = seed;
    cfg
}

fn ordering(b: Benchmark) -> Outcome {
    let start = Instant::now();
    let data_cfg = BenchmarkConfig::desk(b);
    let train_set = generate(&data_cfg, Split::Train).unwrap();
    let test_set = generate(&data_cfg, Split::Test).unwrap();
    let mut per_seed = Vec::new();
    for seed in 0..3 {
        let err = |kind| {
            let ck = train(&ordering_config(b, kind, seed), &train_set).unwrap();
            evaluate(&ck, &test_set).unwrap().mean
        };
        per_seed.push((err(ModelKind::SedONet), err(ModelKind::DeepONet)));
    }
    let every = per_seed.iter().all(|(s, d)| s < d);
    let mean_s = per_seed.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let mean_d = per_seed.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let seeds: Vec<String> = per_seed.iter().map(|(s, d)| format!("{s:.4}/{d:.4}")).collect();
    outcome(
        every && mean_s <= 0.9 * mean_d,
        format!(
            "{} {}x{} train, SEDONet/DeepONet rel-l2 per seed [{}], means {mean_s:.4}/{mean_d:.4} ratio {:.3} (need < on every seed, <= 0.9), {:.0} s",
            b.name(),
            train_set.len(),
            test_set.len(),
            seeds.join(", "),
            mean_s / mean_d,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn overfit() -> Outcome {
    let mut data_cfg = BenchmarkConfig::desk(Benchmark::Burgers1d);
    data_cfg.n_train = 8;
    let data = generate(&data_cfg, Split::Train).unwrap();
    // linear trunk head on the dictionary; full batch, so one step per epoch
    let mut cfg = RunConfig::preset(Benchmark::Burgers1d, ModelKind::SedONet);
    cfg.k_x = 24;
    cfg.k_t = 12;
    cfg.d_trunk = 288;
    cfg.branch_hidden = vec![64, 64];
    cfg.trunk_hidden = vec![];
    cfg.optimizer.lr = 1e-2;
    cfg.optimizer.schedule = LrSchedule::Cosine { final_ratio: 1e-2 };
    cfg.optimizer.batch_size = 8;
    cfg.optimizer.epochs = 2000;
    let ck = train(&cfg, &data).unwrap();
    let err = training_error(&ck, &data).unwrap();
    outcome(err <= 0.02, format!("8 Burgers samples, 2000 steps: training rel-l2 {:.4} (tol 0.02)", err))
}

fn tiny_run(dir_seed: u64) -> (Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>) {
    let mut data_cfg = BenchmarkConfig::desk(Benchmark::Burgers1d);
    data_cfg.n_train = 32;
    data_cfg.n_test = 8;
    data_cfg.seed = dir_seed;
    let train_set = generate(&data_cfg, Split::Train).unwrap();
    let test_set = generate(&data_cfg, Split::Test).unwrap();
    let mut cfg = RunConfig::preset(Benchmark::Burgers1d, ModelKind::SedONet);
    cfg.branch_hidden = vec![32];
    cfg.trunk_hidden = vec![32];
    cfg.latent = 16;
    cfg.optimizer.epochs = 5;
    cfg.optimizer.batch_size = 8;
    let ck = train(&cfg, &train_set).unwrap();
    let mut eval_csv = Vec::new();
    evaluate(&ck, &test_set).unwrap().write_csv(&mut eval_csv).unwrap();
    let mut spec_csv = Vec::new();
    write_spectra_csv(&sample_spectra(&ck, &test_set, 3).unwrap(), &mut spec_csv).unwrap();
    (encode_dataset(&train_set), encode_dataset(&test_set), encode_checkpoint(&ck), eval_csv, spec_csv)
}

fn determinism() -> Outcome {
    let a = tiny_run(7);
    let b = tiny_run(7);
    let same = [a.0 == b.0, a.1 == b.1, a.2 == b.2, a.3 == b.3, a.4 == b.4];
    outcome(
        same.iter().all(|&s| s),
        format!("train/test dataset, checkpoint, eval CSV, spectrum CSV identical: {same:?}"),
    )
}

fn corrupt(bytes: &[u8], rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut b = bytes.to_vec();
    if rng.random_bool(0.5) {
        b.truncate(rng.random_range(0..bytes.len()));
    } else {
        let i = rng.random_range(0..b.len());
        b[i] ^= 1 << rng.random_range(0..8);
    }
    b
}

fn format_robustness() -> Outcome {
    let mut data_cfg = BenchmarkConfig::desk(Benchmark::AdvDiff1d);
    data_cfg.n_train = 4;
    let data: Dataset = generate(&data_cfg, Split::Train).unwrap();
    let mut cfg = RunConfig::preset(Benchmark::AdvDiff1d, ModelKind::SedONet);
    cfg.branch_hidden = vec![8];
    cfg.trunk_hidden = vec![8];
    cfg.latent = 4;
    cfg.optimizer.epochs = 2;
    let ck = train(&cfg, &data).unwrap();
    let ds = encode_dataset(&data);
    let ckb = encode_checkpoint(&ck);
    let round_trip = decode_dataset(&ds).unwrap() == data && decode_checkpoint(&ckb).unwrap() == ck;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = 0;
    for _ in 0..100 {
        if !matches!(decode_dataset(&corrupt(&ds, &mut rng)), Err(Error::Format(_))) {
            bad += 1;
        }
        if !matches!(decode_checkpoint(&corrupt(&ckb, &mut rng)), Err(Error::Format(_))) {
            bad += 1;
        }
    }
    outcome(
        round_trip && bad == 0,
        format!("round trip {round_trip}; 100 corrupted datasets + 100 corrupted checkpoints, {bad} not rejected with a format error"),
    )
}

fn main() {
    let checks: Vec<(&str, fn() -> Outcome)> = vec![
        ("chebyshev oracle", chebyshev_oracle),
        ("discrete orthogonality", discrete_orthogonality),
        ("gradient fidelity", gradient_fidelity),
        ("solver orders", solver_orders),
        ("physical fixed points", fixed_points),
        ("superset demonstration", superset),
        ("desk-scale ordering: burgers", || ordering(Benchmark::Burgers1d)),
        ("desk-scale ordering: advdiff", || ordering(Benchmark::AdvDiff1d)),
        ("overfit smoke test", overfit),
        ("determinism", determinism),
        ("format robustness", format_robustness),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {} ({:.1} s)", o.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
