//! `uqf` command-line front end.

mod document;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use uqf_core::eval::{argmax, grid_search, run_uq_eval};
use uqf_core::harness::fixtures::{make_fixture, FixtureSpec};
use uqf_core::harness::format::{
    load_dataset, load_float_model, load_quant_model, save_dataset, save_float_model, save_quant_model,
};
use uqf_core::harness::{bench, BenchConfig, RunConfig, SEED_ENV};
use uqf_core::quant::{calibrate, model_size_bytes, qhead_forward, quantize_model};
use uqf_core::uq::{DEFAULT_CONF_FACTOR, DEFAULT_NUM_ITER, DEFAULT_THRESHOLD};

use document::{grid_table, render, Document, Prediction, QuantizeSummary};

#[derive(Parser)]
#[command(name = "uqf", version, about = "Quantized head inference with MC-dropout uncertainty filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate and quantize a float head (UQHM) into a UQQM file.
    Quantize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        calib: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dropout-free argmax inference with the quantized head.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo dropout uncertainty runs.
    Uq {
        #[command(subcommand)]
        command: UqCommand,
    },
    /// Pretty-print a saved JSON report.
    Report { path: PathBuf },
    /// Time a single pass against the full UQ pipeline.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NUM_ITER)]
        num_iter: usize,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        /// Only time the first N samples.
        #[arg(long)]
        max_samples: Option<usize>,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic models and datasets.
    Fixtures {
        #[command(subcommand)]
        command: FixtureCommand,
    },
}

#[derive(Args)]
struct UqShared {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Override the input dropout ratio stored in the model.
    #[arg(long)]
    dropout1: Option<f32>,
    /// Override the hidden dropout ratio stored in the model.
    #[arg(long)]
    dropout2: Option<f32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum UqCommand {
    /// One evaluation at a fixed (conf_factor, num_iter).
    Run {
        #[command(flatten)]
        shared: UqShared,
        #[arg(long, default_value_t = DEFAULT_CONF_FACTOR)]
        conf_factor: f64,
        #[arg(long, default_value_t = DEFAULT_NUM_ITER)]
        num_iter: usize,
    },
    /// Grid over conf_factor x num_iter.
    Grid {
        #[command(flatten)]
        shared: UqShared,
        #[arg(long, value_delimiter = ',', default_values_t = [0.7, 0.8, 0.9])]
        conf_factors: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [20, 30, 50])]
        num_iters: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum FixtureCommand {
    /// Write model.uqhm, calib.uqds and test.uqds into a directory.
    Make {
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 64)]
        feature_dim: usize,
        #[arg(long, default_value_t = 32)]
        hidden: usize,
        #[arg(long, default_value_t = 10)]
        classes: usize,
        #[arg(long, default_value_t = 200)]
        calib_samples: usize,
        #[arg(long, default_value_t = 100)]
        test_samples: usize,
        #[arg(long, default_value_t = 0.6)]
        noise: f32,
        #[arg(long, default_value_t = 0.2)]
        dropout1: f32,
        #[arg(long, default_value_t = 0.4)]
        dropout2: f32,
        /// Zero every weight and bias of the generated head.
        #[arg(long)]
        zero_weights: bool,
    },
}

/// Missing inputs are usage errors (exit 2); everything else exits 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn require(path: &Path) -> anyhow::Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(UsageError(format!("no such file: {}", path.display())).into())
    }
}

fn emit(doc: &Document, out: Option<&Path>) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(doc)? + "\n";
    match out {
        Some(p) => std::fs::write(p, json).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn run_config(shared: &UqShared, conf_factor: f64, num_iter: usize) -> RunConfig {
    RunConfig {
        conf_factor,
        num_iter,
        threshold: shared.threshold,
        base_seed: shared.seed,
        dropout1_override: shared.dropout1,
        dropout2_override: shared.dropout2,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Quantize { model, calib, out } => {
            require(&model)?;
            require(&calib)?;
            let m = load_float_model(&model)?;
            let ds = load_dataset(&calib)?;
            if ds.header.feature_dim != m.feature_dim() {
                return Err(anyhow!(
                    "calibration features have width {}, model expects {}",
                    ds.header.feature_dim,
                    m.feature_dim()
                ));
            }
            let stats = calibrate(&m, &ds.feature_rows())?;
            let qm = quantize_model(&m, &stats)?;
            save_quant_model(&out, &qm)?;
            let (fb, qb) = (model_size_bytes(&m), model_size_bytes(&qm));
            emit(
                &Document::Quantize(QuantizeSummary {
                    feature_dim: qm.feature_dim(),
                    hidden_dim: qm.hidden_dim(),
                    num_classes: qm.num_classes(),
                    calib_samples: ds.header.num_samples,
                    float_model_bytes: fb,
                    quant_model_bytes: qb,
                    size_ratio: qb as f64 / fb as f64,
                }),
                None,
            )
        }
        Command::Infer { model, data, out } => {
            require(&model)?;
            require(&data)?;
            let qm = load_quant_model(&model)?;
            let samples = load_dataset(&data)?.samples();
            let mut predictions = Vec::with_capacity(samples.len());
            for s in &samples {
                let y = qhead_forward(&qm, &qm.quantize_input(&s.features)?, None)?;
                let c = argmax(y.data()).ok_or_else(|| anyhow!("model has no classes"))?;
                predictions.push(Prediction {
                    id: s.id,
                    true_class: s.true_class,
                    predicted_class: c,
                    score: y.data()[c],
                });
            }
            let correct = predictions.iter().filter(|p| p.predicted_class == p.true_class).count();
            let micro_f1 = (!predictions.is_empty()).then(|| correct as f64 / predictions.len() as f64);
            emit(
                &Document::Infer {
                    num_samples: predictions.len(),
                    micro_f1,
                    predictions,
                },
                out.as_deref(),
            )
        }
        Command::Uq { command } => match command {
            UqCommand::Run {
                shared,
                conf_factor,
                num_iter,
            } => {
                require(&shared.model)?;
                require(&shared.data)?;
                let cfg = run_config(&shared, conf_factor, num_iter);
                cfg.validate()?;
                let qm = cfg.apply(&load_quant_model(&shared.model)?);
                let data = load_dataset(&shared.data)?.samples();
                let report = run_uq_eval(&qm, &data, &cfg.mc_config())?;
                emit(&Document::UqRun { config: cfg, report }, shared.out.as_deref())
            }
            UqCommand::Grid {
                shared,
                conf_factors,
                num_iters,
            } => {
                require(&shared.model)?;
                require(&shared.data)?;
                let cfg = run_config(&shared, conf_factors.first().copied().unwrap_or(DEFAULT_CONF_FACTOR), 2);
                cfg.validate()?;
                let qm = cfg.apply(&load_quant_model(&shared.model)?);
                let data = load_dataset(&shared.data)?.samples();
                let grid = grid_search(&qm, &data, &conf_factors, &num_iters, shared.threshold, shared.seed)?;
                print!("{}", grid_table(&grid));
                if let Some(out) = shared.out.as_deref() {
                    emit(&Document::UqGrid { grid }, Some(out))?;
                }
                Ok(())
            }
        },
        Command::Report { path } => {
            require(&path)?;
            let text = std::fs::read_to_string(&path)?;
            let doc: Document =
                serde_json::from_str(&text).with_context(|| format!("{} is not a uqf report", path.display()))?;
            print!("{}", render(&doc));
            Ok(())
        }
        Command::Bench {
            model,
            data,
            num_iter,
            repetitions,
            max_samples,
            seed,
            out,
        } => {
            require(&model)?;
            require(&data)?;
            let qm = load_quant_model(&model)?;
            let mut samples = load_dataset(&data)?.samples();
            if let Some(n) = max_samples {
                samples.truncate(n);
            }
            let cfg = BenchConfig {
                num_iter,
                repetitions,
                base_seed: seed,
                ..Default::default()
            };
            let report = bench(&qm, &samples, &cfg)?;
            emit(&Document::Bench { report }, out.as_deref())
        }
        Command::Fixtures {
            command:
                FixtureCommand::Make {
                    seed,
                    out_dir,
                    feature_dim,
                    hidden,
                    classes,
                    calib_samples,
                    test_samples,
                    noise,
                    dropout1,
                    dropout2,
                    zero_weights,
                },
        } => {
            let spec = FixtureSpec {
                seed,
                feature_dim,
                hidden,
                classes,
                calib_samples,
                test_samples,
                noise,
                dropout1_p: dropout1,
                dropout2_p: dropout2,
            };
            let mut fx = make_fixture(&spec)?;
            if zero_weights {
                for d in [&mut fx.model.dense1, &mut fx.model.dense2] {
                    d.weights = uqf_core::Tensor::zeros(d.weights.shape().to_vec());
                    d.bias = uqf_core::Tensor::zeros(d.bias.shape().to_vec());
                }
            }
            std::fs::create_dir_all(&out_dir)?;
            save_float_model(out_dir.join("model.uqhm"), &fx.model)?;
            save_dataset(out_dir.join("calib.uqds"), &fx.calib)?;
            save_dataset(out_dir.join("test.uqds"), &fx.test)?;
            println!("{}", serde_json::to_string_pretty(&spec)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
