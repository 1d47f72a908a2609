use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sedonet::adam::AdamConfig;
use sedonet::config::{default_seed, RunConfig};
use sedonet::datagen::{generate, Benchmark, BenchmarkConfig, Split};
use sedonet::diagnostics::{gram_diagnostic, superset_demo, Sampling, SupersetBudget};
use sedonet::embedding::{EmbeddingKind, Interval, SpectralDictionary};
use sedonet::eval::write_spectra_csv;
use sedonet::format::{load_checkpoint, load_dataset, save_checkpoint, save_dataset};
use sedonet::train::{evaluate, sample_spectra, train_with};

/// Spectral-embedding operator networks: data generation, training, evaluation.
#[derive(Parser)]
#[command(name = "sedonet", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train and test datasets for a benchmark into a directory.
    GenData(GenData),
    /// Train a model from a JSON run config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Suppress per-epoch loss lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Write per-sample relative L2 errors of a checkpoint on a dataset.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write reference and predicted power spectra of one sample.
    Spectrum {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        sample: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embedding diagnostics.
    #[command(subcommand)]
    Diagnose(Diagnose),
}

#[derive(Args)]
struct GenData {
    #[arg(long, value_parser = parse_benchmark)]
    benchmark: Benchmark,
    /// Output directory; receives train.sedo, test.sedo and dataset.json.
    #[arg(long)]
    out: PathBuf,
    /// Use the published sample counts and grids instead of desk-scale ones.
    #[arg(long)]
    paper_scale: bool,
    /// Base seed (default: $SEDONET_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
}

#[derive(Subcommand)]
enum Diagnose {
    /// Conditioning of the dictionary's Gram matrix at sampled points.
    Gram {
        #[arg(long, value_enum, default_value = "chebyshev")]
        kind: Kind,
        #[arg(long, default_value_t = 16)]
        k_x: usize,
        #[arg(long, default_value_t = 1)]
        k_t: usize,
        /// Defaults to k_x * k_t.
        #[arg(long)]
        d_trunk: Option<usize>,
        #[arg(long, value_enum, default_value = "gauss")]
        sampling: SamplingArg,
        /// Points per axis.
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        coord_dim: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit T_K with a Chebyshev linear readout and with a coordinate MLP.
    Superset {
        #[arg(long, default_value_t = 12)]
        degree: usize,
        /// Comma-separated MLP widths, input and output 1.
        #[arg(long, default_value = "1,32,32,1", value_delimiter = ',')]
        widths: Vec<usize>,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 256)]
        points: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Identity,
    Fourier,
    Chebyshev,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Uniform,
    Gauss,
    Lobatto,
}

fn parse_benchmark(s: &str) -> Result<Benchmark, String> {
    Benchmark::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Benchmark::ALL.iter().map(|b| b.name()).collect();
        format!("unknown benchmark '{s}' (expected one of {})", names.join(", "))
    })
}

fn create(path: &Path) -> sedonet::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn gen_data(args: GenData) -> sedonet::Result<()> {
    let mut cfg =
        if args.paper_scale { BenchmarkConfig::paper(args.benchmark) } else { BenchmarkConfig::desk(args.benchmark) };
    cfg.seed = args.seed.unwrap_or_else(default_seed);
    cfg.n_train = args.n_train.unwrap_or(cfg.n_train);
    cfg.n_test = args.n_test.unwrap_or(cfg.n_test);
    std::fs::create_dir_all(&args.out)?;
    for (split, name) in [(Split::Train, "train.sedo"), (Split::Test, "test.sedo")] {
        let d = generate(&cfg, split)?;
        save_dataset(&args.out.join(name), &d)?;
        eprintln!("wrote {} samples to {}", d.len(), args.out.join(name).display());
    }
    let json = serde_json::to_string_pretty(&cfg).expect("config serializes");
    std::fs::write(args.out.join("dataset.json"), json + "\n")?;
    Ok(())
}

fn run(cmd: Command) -> sedonet::Result<()> {
    match cmd {
        Command::GenData(args) => gen_data(args)?,
        Command::Train { config, data, out, quiet } => {
            let cfg = RunConfig::load(&config)?;
            let data = load_dataset(&data)?;
            let ck = train_with(&cfg, &data, |epoch, loss| {
                if !quiet {
                    eprintln!("epoch {epoch:>4}  loss {loss:.6e}");
                }
            })?;
            save_checkpoint(&out, &ck)?;
        }
        Command::Eval { ckpt, data, out } => {
            let ck = load_checkpoint(&ckpt)?;
            let report = evaluate(&ck, &load_dataset(&data)?)?;
            let mut w = create(&out)?;
            report.write_csv(&mut w)?;
            w.flush()?;
            println!("{} {}: rel_l2 {:.6} ± {:.6}", report.benchmark, report.model, report.mean, report.std);
        }
        Command::Spectrum { ckpt, data, sample, out } => {
            let ck = load_checkpoint(&ckpt)?;
            let spectra = sample_spectra(&ck, &load_dataset(&data)?, sample)?;
            let mut w = create(&out)?;
            write_spectra_csv(&spectra, &mut w)?;
            w.flush()?;
        }
        Command::Diagnose(Diagnose::Gram { kind, k_x, k_t, d_trunk, sampling, points, coord_dim, out }) => {
            let (kind, d) = match kind {
                Kind::Identity => (EmbeddingKind::Identity, usize::from(coord_dim)),
                Kind::Fourier => {
                    let t_modes = if coord_dim == 2 { k_t } else { 0 };
                    (EmbeddingKind::Fourier, d_trunk.unwrap_or(1 + 2 * (k_x + t_modes)))
                }
                Kind::Chebyshev => (EmbeddingKind::Chebyshev, d_trunk.unwrap_or(k_x * k_t)),
            };
            let dict = SpectralDictionary::new(kind, k_x, k_t, d, Interval::UNIT, Interval::UNIT)?;
            let sampling = match sampling {
                SamplingArg::Uniform => Sampling::UniformGrid,
                SamplingArg::Gauss => Sampling::ChebGauss,
                SamplingArg::Lobatto => Sampling::ChebGaussLobatto,
            };
            let report = gram_diagnostic(&dict, sampling, points, usize::from(coord_dim))?;
            let mut w = create(&out)?;
            report.write_csv(&mut w)?;
            w.flush()?;
            println!("condition number {:.6e}", report.condition_number);
        }
        Command::Diagnose(Diagnose::Superset { degree, widths, steps, lr, points, seed, out }) => {
            let budget = SupersetBudget {
                steps,
                adam: AdamConfig { lr, ..AdamConfig::default() },
                grid_points: points,
                seed: seed.unwrap_or_else(default_seed),
                ..SupersetBudget::default()
            };
            let report = superset_demo(degree, &widths, &budget)?;
            let mut w = create(&out)?;
            report.write_csv(&mut w)?;
            w.flush()?;
            println!("chebyshev mse {:.3e}, mlp mse {:.3e}", report.cheb_linear_mse, report.vanilla_mlp_mse);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
