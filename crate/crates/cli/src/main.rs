//! Command-line front end: ingestion, synthetic data, GAN training,
//! oversampling, evaluation, benchmarking, grid search, scatter plots, and
//! preset listing.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ndarray::Axis;

use ttgan_core::classify::run_algorithm_1;
use ttgan_core::data::{imbalance_ratio, split, Dataset, SplitSpec};
use ttgan_core::harness::{
    available_presets, load_dataset, load_preset, make_two_moons, run_experiment,
    run_grid_search, write_scatter_tsv, DatasetSource, ExperimentConfig, Method, TwoMoonsSpec,
    PRESETS,
};
use ttgan_core::preprocess;
use ttgan_core::resample::{borderline_smote, random_oversample, smote, write_selected_tsv};
use ttgan_core::ttgan::{generate, train as train_gan, write_loss_history_tsv, GanMode};

#[derive(Parser)]
#[command(
    name = "ttgan",
    about = "Translation-GAN oversampling for imbalanced tabular classification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Dataset selection shared by subcommands that read data directly.
#[derive(Args, Clone)]
struct DataArgs {
    /// Path to a KEEL .dat or CSV file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Input format: keel or csv (inferred from the extension by default).
    #[arg(long)]
    format: Option<String>,
    /// CSV label column name.
    #[arg(long)]
    label_column: Option<String>,
    /// CSV label value mapped to the minority class.
    #[arg(long)]
    minority_label: Option<String>,
}

impl DataArgs {
    fn source(&self) -> Result<DatasetSource> {
        let path = self
            .data
            .as_ref()
            .context("--data <FILE> is required")?
            .display()
            .to_string();
        let format = match &self.format {
            Some(f) => f.clone(),
            None => {
                if path.ends_with(".csv") {
                    "csv".to_string()
                } else {
                    "keel".to_string()
                }
            }
        };
        match format.as_str() {
            "keel" => Ok(DatasetSource::Keel { path }),
            "csv" => Ok(DatasetSource::Csv {
                path,
                label_column: self
                    .label_column
                    .clone()
                    .context("--label-column is required for csv input")?,
                minority_label: self
                    .minority_label
                    .clone()
                    .context("--minority-label is required for csv input")?,
            }),
            other => bail!("unknown format `{other}` (expected keel or csv)"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset and print a summary.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Generate a two-moons dataset and write it as CSV.
    SynthMoons {
        #[arg(long, default_value_t = 250)]
        n_majority: usize,
        #[arg(long, default_value_t = 25)]
        n_minority: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the translation GAN on a dataset and write artifacts.
    Train {
        /// Experiment config (TOML).
        #[arg(short, long)]
        config: PathBuf,
        /// Train on the vanilla-GAN baseline instead.
        #[arg(long)]
        vanilla: bool,
        /// Seed for this run.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (loss history, checkpoint, generated rows).
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run one oversampling method and write the synthetic rows.
    Oversample {
        #[arg(short, long)]
        config: PathBuf,
        /// Method: ros, smote, bsmote, vanilla_gan, or ttgan.
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit and score one method on a train/test split; print metrics.
    Evaluate {
        #[arg(short, long)]
        config: PathBuf,
        /// Method name (defaults to every configured method).
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full method-by-seed comparison; writes a JSON report and metric TSV.
    Benchmark {
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory for report.json and metrics.tsv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive hyperparameter grid search scored on the validation split.
    Grid {
        #[arg(short, long)]
        config: PathBuf,
        /// How many top rows to print.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Emit 2-D scatter data (x, y, class) for plotting.
    Scatter {
        #[arg(short, long)]
        config: PathBuf,
        /// Also train the configured GAN and include generated points.
        #[arg(long)]
        generated: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the shipped hyperparameter presets.
    Presets {
        /// Show one preset in detail.
        name: Option<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dataset_summary_json(d: &Dataset) -> serde_json::Value {
    serde_json::json!({
        "name": d.name,
        "rows": d.n_rows(),
        "features": d.n_features(),
        "majority_rows": d.majority_count(),
        "minority_rows": d.minority_count(),
        "imbalance_ratio": imbalance_ratio(d),
    })
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_path(path)
        .with_context(|| format!("reading config {}", path.display()))
}

fn write_csv(d: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for meta in &d.meta {
        out.push_str(&meta.name);
        out.push(',');
    }
    out.push_str("label\n");
    for (i, row) in d.x.axis_iter(Axis(0)).enumerate() {
        for v in row.iter() {
            out.push_str(&format!("{v},"));
        }
        out.push_str(if d.y[i] == 1 { "minority\n" } else { "majority\n" });
    }
    fs::write(path, out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { data } => {
            let d = load_dataset(&data.source()?)?;
            println!("{}", serde_json::to_string_pretty(&dataset_summary_json(&d))?);
        }
        Command::SynthMoons {
            n_majority,
            n_minority,
            noise,
            seed,
            out,
        } => {
            let d = make_two_moons(&TwoMoonsSpec {
                n_majority,
                n_minority,
                noise,
                seed,
            })?;
            write_csv(&d, &out)?;
            println!("wrote {} rows to {}", d.n_rows(), out.display());
        }
        Command::Train {
            config,
            vanilla,
            seed,
            out,
        } => {
            let cfg = load_config(&config)?;
            let dataset = load_dataset(&cfg.dataset)?;
            let spec = SplitSpec {
                train_fraction: cfg.split.train_fraction,
                val_fraction: cfg.split.val_fraction,
                test_fraction: cfg.split.test_fraction,
                stratified: cfg.split.stratified,
                seed,
            };
            let (train_split, _, _) = split(&dataset, &spec)?;
            let pipeline = preprocess::fit(&train_split, &cfg.preprocess)?;
            let x = preprocess::apply(&pipeline, &train_split)?;
            let processed =
                Dataset::from_matrix(train_split.name.clone(), x, train_split.y.clone())?;
            let (maj_idx, min_idx) = processed.class_indices();
            let x_maj = processed.x.select(Axis(0), &maj_idx);
            let x_min = processed.x.select(Axis(0), &min_idx);

            let mode = if vanilla { GanMode::Vanilla } else { GanMode::Ttgan };
            let gan_cfg = cfg.resolved_ttgan(mode, seed)?;
            let bundle = train_gan(&x_maj, &x_min, &gan_cfg)?;

            fs::create_dir_all(&out)?;
            let loss_path = out.join("loss_history.tsv");
            write_loss_history_tsv(&bundle.history, fs::File::create(&loss_path)?)?;
            let ckpt_path = out.join("bundle.json");
            fs::write(&ckpt_path, bundle.to_json()?)?;
            let gen = generate(&bundle, &x_maj)?;
            let gen_path = out.join("generated.tsv");
            {
                let mut w = String::new();
                for row in gen.axis_iter(Axis(0)) {
                    let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    w.push_str(&cells.join("\t"));
                    w.push('\n');
                }
                fs::write(&gen_path, w)?;
            }
            println!(
                "trained {} epochs; wrote {}, {}, {}",
                gan_cfg.epochs,
                loss_path.display(),
                ckpt_path.display(),
                gen_path.display()
            );
        }
        Command::Oversample {
            config,
            method,
            seed,
            out,
        } => {
            let cfg = load_config(&config)?;
            let dataset = load_dataset(&cfg.dataset)?;
            let spec = SplitSpec {
                train_fraction: cfg.split.train_fraction,
                val_fraction: cfg.split.val_fraction,
                test_fraction: cfg.split.test_fraction,
                stratified: cfg.split.stratified,
                seed,
            };
            let (train_split, _, _) = split(&dataset, &spec)?;
            fs::create_dir_all(&out)?;
            let path = out.join(format!("{method}_selected.tsv"));

            let augmented = match method.as_str() {
                "ros" | "smote" | "bsmote" => {
                    let pipeline = preprocess::fit(&train_split, &cfg.preprocess)?;
                    let x = preprocess::apply(&pipeline, &train_split)?;
                    let processed =
                        Dataset::from_matrix(train_split.name.clone(), x, train_split.y.clone())?;
                    match method.as_str() {
                        "ros" => random_oversample(&processed, seed)?,
                        "smote" => smote(&processed, cfg.smote.k, seed)?,
                        _ => borderline_smote(&processed, cfg.bsmote.k, cfg.bsmote.m, seed)?,
                    }
                }
                "ttgan" | "vanilla_gan" => {
                    let mode = if method == "ttgan" {
                        GanMode::Ttgan
                    } else {
                        GanMode::Vanilla
                    };
                    let gan_cfg = cfg.resolved_ttgan(mode, seed)?;
                    let sel_cfg = cfg.resolved_selection()?;
                    let svm_cfg = ttgan_core::classify::LinearSvmConfig { seed, ..cfg.svm };
                    let outp =
                        run_algorithm_1(&train_split, &cfg.preprocess, &gan_cfg, &sel_cfg, &svm_cfg)?;
                    outp.augmented
                }
                other => bail!("unknown method `{other}`"),
            };
            write_selected_tsv(&augmented, fs::File::create(&path)?)?;
            println!(
                "{} synthetic rows written to {}",
                augmented.synthetic_count(),
                path.display()
            );
        }
        Command::Evaluate {
            config,
            method,
            seed,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(name) = method {
                cfg.experiment.methods = vec![parse_method(&name)?];
            }
            if let Some(s) = seed {
                cfg.experiment.seeds = vec![s];
            }
            let report = run_experiment(&cfg)?;
            let mut failures = 0;
            for (name, outcomes) in &report.runs {
                for o in outcomes {
                    match (&o.metrics, &o.error) {
                        (Some(m), _) => {
                            let cells: Vec<String> =
                                m.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
                            println!("{name} seed={} {}", o.seed, cells.join(" "));
                        }
                        (_, Some(e)) => {
                            failures += 1;
                            println!("{name} seed={} error: {e}", o.seed);
                        }
                        _ => unreachable!(),
                    }
                }
            }
            if failures > 0 {
                bail!("{failures} run(s) failed");
            }
        }
        Command::Benchmark { config, out } => {
            let cfg = load_config(&config)?;
            let report = run_experiment(&cfg)?;
            let out_dir = out
                .or_else(|| cfg.experiment.output_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            fs::create_dir_all(&out_dir)?;
            let report_path = out_dir.join("report.json");
            fs::write(&report_path, report.to_json()?)?;
            let tsv_path = out_dir.join("metrics.tsv");
            report.write_metrics_tsv(fs::File::create(&tsv_path)?)?;

            println!("dataset: {} (N={}, IR={:.1})", report.dataset.name, report.dataset.rows, report.dataset.imbalance_ratio);
            for (name, agg) in &report.aggregates {
                let map = agg.mean.get("map").copied().unwrap_or(f64::NAN);
                match agg.mean_rank {
                    Some(rank) => println!("{name}: mean mAP {map:.4} (mean rank {rank:.2})"),
                    None => println!("{name}: mean mAP {map:.4}"),
                }
            }
            let failed: usize = report
                .runs
                .values()
                .flatten()
                .filter(|o| o.error.is_some())
                .count();
            println!("report: {}", report_path.display());
            println!("metrics: {}", tsv_path.display());
            if failed > 0 {
                bail!("{failed} run(s) failed; see the report for details");
            }
        }
        Command::Grid { config, top } => {
            let cfg = load_config(&config)?;
            let outcomes = run_grid_search(&cfg)?;
            println!("epochs\tlambda_t\tlambda_c\tlambda_i\ts\tp_max\tval_map");
            for o in outcomes.iter().take(top) {
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{:.4}",
                    o.epochs,
                    o.lambda_translation,
                    o.lambda_cycle,
                    o.lambda_identity,
                    o.s,
                    o.p_max,
                    o.mean_validation_map
                );
            }
        }
        Command::Scatter {
            config,
            generated,
            seed,
            out,
        } => {
            let cfg = load_config(&config)?;
            let dataset = load_dataset(&cfg.dataset)?;
            if generated {
                // Generated rows live in the preprocessed space, so the base
                // points are emitted in that space too.
                let spec = SplitSpec {
                    train_fraction: cfg.split.train_fraction,
                    val_fraction: cfg.split.val_fraction,
                    test_fraction: cfg.split.test_fraction,
                    stratified: cfg.split.stratified,
                    seed,
                };
                let (train_split, _, _) = split(&dataset, &spec)?;
                let gan_cfg = cfg.resolved_ttgan(GanMode::Ttgan, seed)?;
                let sel_cfg = cfg.resolved_selection()?;
                let svm_cfg = ttgan_core::classify::LinearSvmConfig { seed, ..cfg.svm };
                let outp =
                    run_algorithm_1(&train_split, &cfg.preprocess, &gan_cfg, &sel_cfg, &svm_cfg)?;
                let x_all = preprocess::apply(&outp.pipeline, &dataset)?;
                let processed = Dataset::from_matrix(dataset.name.clone(), x_all, dataset.y.clone())?;
                write_scatter_tsv(
                    &processed,
                    Some(&outp.augmented.x_selected),
                    fs::File::create(&out)?,
                )?;
            } else {
                write_scatter_tsv(&dataset, None, fs::File::create(&out)?)?;
            }
            println!("wrote {}", out.display());
        }
        Command::Presets { name } => match name {
            Some(n) => {
                let p = load_preset(&n)?;
                println!("{}", serde_json::to_string_pretty(p)?);
            }
            None => {
                println!("name\tepochs\tlambda_t\tlambda_c\tlambda_i\ts\tp_max\tclassifier\texecutable");
                for p in PRESETS {
                    println!(
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                        p.name,
                        p.epochs,
                        p.lambda_translation,
                        p.lambda_cycle,
                        p.lambda_identity,
                        p.s,
                        p.p_max,
                        p.classifier,
                        p.executable
                    );
                }
                println!();
                println!("available: {}", available_presets().join(", "));
            }
        },
    }
    Ok(())
}

fn parse_method(name: &str) -> Result<Method> {
    Ok(match name {
        "rw" => Method::Rw,
        "ros" => Method::Ros,
        "smote" => Method::Smote,
        "bsmote" => Method::Bsmote,
        "vanilla_gan" => Method::VanillaGan,
        "ttgan" => Method::Ttgan,
        other => bail!("unknown method `{other}`"),
    })
}
