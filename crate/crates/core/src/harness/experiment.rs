use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classify::{fit_svm, run_algorithm_1, LinearSvmConfig};
use crate::data::{imbalance_ratio, load_csv, load_keel, split, Dataset, SplitSpec};
use crate::error::Result;
use crate::metrics::{auc_roc, average_precision, precision_at_recall};
use crate::preprocess;
use crate::resample::{borderline_smote, random_oversample, smote};
use crate::ttgan::{EpochLosses, GanMode};

use super::config::{DatasetSource, ExperimentConfig, Method};
use super::two_moons::{make_two_moons, TwoMoonsSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub rows: usize,
    pub features: usize,
    pub minority_rows: usize,
    pub imbalance_ratio: f64,
}

impl DatasetSummary {
    pub fn of(d: &Dataset) -> Self {
        DatasetSummary {
            name: d.name.clone(),
            rows: d.n_rows(),
            features: d.n_features(),
            minority_rows: d.minority_count(),
            imbalance_ratio: imbalance_ratio(d),
        }
    }
}

/// Diagnostics of one (method, seed) run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunDiagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_generated: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_selected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_synthetic: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_history: Option<Vec<EpochLosses>>,
}

/// One (method, seed) outcome; failures are recorded, not propagated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub diagnostics: RunDiagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub mean: BTreeMap<String, f64>,
    /// Mean over seeds of the per-seed rank by mAP (ties averaged); absent
    /// when no seed had all methods succeed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rank: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: DatasetSummary,
    pub config: ExperimentConfig,
    pub runs: BTreeMap<String, Vec<SeedOutcome>>,
    pub aggregates: BTreeMap<String, MethodAggregate>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Tabular per-run metrics: method, seed, then one column per metric.
    pub fn write_metrics_tsv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let metric_names = self.metric_names();
        write!(w, "method\tseed")?;
        for m in &metric_names {
            write!(w, "\t{m}")?;
        }
        writeln!(w)?;
        for (method, outcomes) in &self.runs {
            for o in outcomes {
                write!(w, "{method}\t{}", o.seed)?;
                for m in &metric_names {
                    match o.metrics.as_ref().and_then(|map| map.get(m)) {
                        Some(v) => write!(w, "\t{v}")?,
                        None => write!(w, "\t-")?,
                    }
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    fn metric_names(&self) -> Vec<String> {
        self.runs
            .values()
            .flatten()
            .find_map(|o| o.metrics.as_ref())
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }
}

/// Loads the configured dataset.
pub fn load_dataset(source: &DatasetSource) -> Result<Dataset> {
    match source {
        DatasetSource::Keel { path } => load_keel(path),
        DatasetSource::Csv {
            path,
            label_column,
            minority_label,
        } => load_csv(path, label_column, minority_label),
        DatasetSource::TwoMoons {
            n_majority,
            n_minority,
            noise,
            seed,
        } => make_two_moons(&TwoMoonsSpec {
            n_majority: *n_majority,
            n_minority: *n_minority,
            noise: *noise,
            seed: *seed,
        }),
    }
}

fn evaluate_scores(
    scores: &[f64],
    labels: &[u8],
    recall_floor: f64,
) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    out.insert("map".to_string(), average_precision(scores, labels)?);
    out.insert("auc_roc".to_string(), auc_roc(scores, labels)?);
    out.insert(
        "precision_at_recall".to_string(),
        precision_at_recall(scores, labels, recall_floor)?,
    );
    Ok(out)
}

/// Runs one method for one seed: fit on the (resampled) training split,
/// score the untouched test split.
fn run_single(
    cfg: &ExperimentConfig,
    method: Method,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<(BTreeMap<String, f64>, RunDiagnostics)> {
    let svm_cfg = LinearSvmConfig {
        seed,
        ..cfg.svm
    };
    let recall_floor = cfg.experiment.recall_floor;

    match method {
        Method::Rw | Method::Ros | Method::Smote | Method::Bsmote => {
            // Shared pipeline path: preprocess on train, resample train only.
            let pipeline = preprocess::fit(train, &cfg.preprocess)?;
            let x_train = preprocess::apply(&pipeline, train)?;
            let x_test = preprocess::apply(&pipeline, test)?;
            let train_proc = Dataset::from_matrix(train.name.clone(), x_train, train.y.clone())?;

            let (x, y, diag) = match method {
                Method::Rw => (train_proc.x.clone(), train_proc.y.clone(), RunDiagnostics::default()),
                Method::Ros => {
                    let aug = random_oversample(&train_proc, seed)?;
                    let (x, y) = aug.training_matrices();
                    (x, y, RunDiagnostics {
                        n_synthetic: Some(aug.synthetic_count()),
                        ..Default::default()
                    })
                }
                Method::Smote => {
                    let aug = smote(&train_proc, cfg.smote.k, seed)?;
                    let (x, y) = aug.training_matrices();
                    (x, y, RunDiagnostics {
                        n_synthetic: Some(aug.synthetic_count()),
                        ..Default::default()
                    })
                }
                Method::Bsmote => {
                    let aug = borderline_smote(&train_proc, cfg.bsmote.k, cfg.bsmote.m, seed)?;
                    let (x, y) = aug.training_matrices();
                    (x, y, RunDiagnostics {
                        n_synthetic: Some(aug.synthetic_count()),
                        warning: aug.warning.clone(),
                        ..Default::default()
                    })
                }
                _ => unreachable!(),
            };
            let model = fit_svm(&x, &y, &svm_cfg)?;
            let scores = model.score(&x_test)?;
            Ok((evaluate_scores(&scores, &test.y, recall_floor)?, diag))
        }
        Method::VanillaGan | Method::Ttgan => {
            let mode = if method == Method::Ttgan {
                GanMode::Ttgan
            } else {
                GanMode::Vanilla
            };
            let gan_cfg = cfg.resolved_ttgan(mode, seed)?;
            let sel_cfg = cfg.resolved_selection()?;
            let out = run_algorithm_1(train, &cfg.preprocess, &gan_cfg, &sel_cfg, &svm_cfg)?;
            let x_test = preprocess::apply(&out.pipeline, test)?;
            let scores = out.classifier.score(&x_test)?;
            let diag = RunDiagnostics {
                n_generated: Some(out.diagnostics.n_generated),
                n_selected: Some(out.diagnostics.n_selected),
                n_synthetic: Some(out.diagnostics.n_selected),
                warning: out.diagnostics.resampler_warning.clone(),
                loss_history: Some(out.diagnostics.loss_history.clone()),
            };
            Ok((evaluate_scores(&scores, &test.y, recall_floor)?, diag))
        }
    }
}

/// Average-tie ranks (1 = best) for values sorted descending.
pub(crate) fn average_ranks_descending(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i+1 ..= j share the averaged rank.
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Runs every configured (method, seed) pair and aggregates the results.
/// The per-run seed drives the split, the resampler, the GAN, and the SVM.
/// Failures of one run are recorded without aborting the rest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let dataset = load_dataset(&cfg.dataset)?;
    let mut methods = cfg.experiment.methods.clone();
    methods.dedup();

    let mut runs: BTreeMap<String, Vec<SeedOutcome>> = methods
        .iter()
        .map(|m| (m.name().to_string(), Vec::new()))
        .collect();

    for &seed in &cfg.experiment.seeds {
        let spec = SplitSpec {
            train_fraction: cfg.split.train_fraction,
            val_fraction: cfg.split.val_fraction,
            test_fraction: cfg.split.test_fraction,
            stratified: cfg.split.stratified,
            seed,
        };
        let split_result = split(&dataset, &spec);
        for &method in &methods {
            let outcome = match &split_result {
                Ok((train, _val, test)) => match run_single(cfg, method, train, test, seed) {
                    Ok((metrics, diagnostics)) => SeedOutcome {
                        seed,
                        metrics: Some(metrics),
                        error: None,
                        diagnostics,
                    },
                    Err(e) => SeedOutcome {
                        seed,
                        metrics: None,
                        error: Some(e.to_string()),
                        diagnostics: RunDiagnostics::default(),
                    },
                },
                Err(e) => SeedOutcome {
                    seed,
                    metrics: None,
                    error: Some(e.to_string()),
                    diagnostics: RunDiagnostics::default(),
                },
            };
            runs.get_mut(method.name()).unwrap().push(outcome);
        }
    }

    let aggregates = aggregate(&methods, &runs, &cfg.experiment.seeds);
    Ok(RunReport {
        dataset: DatasetSummary::of(&dataset),
        config: cfg.clone(),
        runs,
        aggregates,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

fn aggregate(
    methods: &[Method],
    runs: &BTreeMap<String, Vec<SeedOutcome>>,
    seeds: &[u64],
) -> BTreeMap<String, MethodAggregate> {
    // Per-method metric means over successful runs.
    let mut aggregates = BTreeMap::new();
    for method in methods {
        let outcomes = &runs[method.name()];
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for o in outcomes {
            if let Some(metrics) = &o.metrics {
                for (k, v) in metrics {
                    let entry = sums.entry(k.clone()).or_insert((0.0, 0));
                    entry.0 += v;
                    entry.1 += 1;
                }
            }
        }
        let mean: BTreeMap<String, f64> = sums
            .into_iter()
            .map(|(k, (total, count))| (k, total / count as f64))
            .collect();
        aggregates.insert(
            method.name().to_string(),
            MethodAggregate {
                mean,
                mean_rank: None,
            },
        );
    }

    // Mean rank by mAP over seeds where every method succeeded.
    let mut rank_sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (i, _) in seeds.iter().enumerate() {
        let maps: Option<Vec<f64>> = methods
            .iter()
            .map(|m| {
                runs[m.name()][i]
                    .metrics
                    .as_ref()
                    .and_then(|metrics| metrics.get("map").copied())
            })
            .collect();
        if let Some(maps) = maps {
            let ranks = average_ranks_descending(&maps);
            for (m, r) in methods.iter().zip(ranks) {
                let entry = rank_sums.entry(m.name()).or_insert((0.0, 0));
                entry.0 += r;
                entry.1 += 1;
            }
        }
    }
    for (name, (total, count)) in rank_sums {
        if count > 0 {
            aggregates.get_mut(name).unwrap().mean_rank = Some(total / count as f64);
        }
    }
    aggregates
}

/// One grid-search cell: the evaluated values and the validation mAP.
#[derive(Debug, Clone, Serialize)]
pub struct GridOutcome {
    pub epochs: usize,
    pub lambda_translation: f64,
    pub lambda_cycle: f64,
    pub lambda_identity: f64,
    pub s: f64,
    pub p_max: f64,
    pub mean_validation_map: f64,
}

/// Exhaustive search over the declared grids, scored by mean validation-set
/// mAP over the configured seeds. Grid axes left empty keep the resolved
/// single value.
pub fn run_grid_search(cfg: &ExperimentConfig) -> Result<Vec<GridOutcome>> {
    cfg.validate()?;
    let dataset = load_dataset(&cfg.dataset)?;
    let base_gan = cfg.resolved_ttgan(GanMode::Ttgan, 0)?;
    let base_sel = cfg.resolved_selection()?;

    let axis_or = |values: &[f64], fallback: f64| -> Vec<f64> {
        if values.is_empty() {
            vec![fallback]
        } else {
            values.to_vec()
        }
    };
    let epochs_axis = if cfg.grid.epochs.is_empty() {
        vec![base_gan.epochs]
    } else {
        cfg.grid.epochs.clone()
    };
    let lt_axis = axis_or(&cfg.grid.lambda_translation, base_gan.coefficients.translation);
    let lc_axis = axis_or(&cfg.grid.lambda_cycle, base_gan.coefficients.cycle);
    let li_axis = axis_or(&cfg.grid.lambda_identity, base_gan.coefficients.identity);
    let s_axis = axis_or(&cfg.grid.s, base_sel.s);
    let p_axis = axis_or(&cfg.grid.p_max, base_sel.p_max);

    let mut outcomes = Vec::new();
    for &epochs in &epochs_axis {
        for &lt in &lt_axis {
            for &lc in &lc_axis {
                for &li in &li_axis {
                    for &s in &s_axis {
                        for &p_max in &p_axis {
                            let mut total = 0.0;
                            let mut count = 0usize;
                            for &seed in &cfg.experiment.seeds {
                                let spec = SplitSpec {
                                    train_fraction: cfg.split.train_fraction,
                                    val_fraction: cfg.split.val_fraction,
                                    test_fraction: cfg.split.test_fraction,
                                    stratified: cfg.split.stratified,
                                    seed,
                                };
                                let (train, val, _test) = split(&dataset, &spec)?;
                                let gan_cfg = crate::ttgan::TtganConfig {
                                    epochs,
                                    coefficients: crate::ttgan::LossCoefficients {
                                        translation: lt,
                                        cycle: lc,
                                        identity: li,
                                    },
                                    seed,
                                    ..base_gan
                                };
                                let sel_cfg = crate::resample::SelectionConfig {
                                    s,
                                    p_max,
                                    variant: base_sel.variant,
                                };
                                let svm_cfg = LinearSvmConfig { seed, ..cfg.svm };
                                let out = run_algorithm_1(
                                    &train,
                                    &cfg.preprocess,
                                    &gan_cfg,
                                    &sel_cfg,
                                    &svm_cfg,
                                )?;
                                let x_val = preprocess::apply(&out.pipeline, &val)?;
                                let scores = out.classifier.score(&x_val)?;
                                total += average_precision(&scores, &val.y)?;
                                count += 1;
                            }
                            outcomes.push(GridOutcome {
                                epochs,
                                lambda_translation: lt,
                                lambda_cycle: lc,
                                lambda_identity: li,
                                s,
                                p_max,
                                mean_validation_map: total / count as f64,
                            });
                        }
                    }
                }
            }
        }
    }
    outcomes.sort_by(|a, b| {
        b.mean_validation_map
            .partial_cmp(&a.mean_validation_map)
            .unwrap()
    });
    Ok(outcomes)
}

/// Scores a fitted model produced elsewhere against a labelled matrix.
pub fn evaluate_model(
    scores: &[f64],
    labels: &[u8],
    recall_floor: f64,
) -> Result<BTreeMap<String, f64>> {
    evaluate_scores(scores, labels, recall_floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn moons_config(methods: Vec<Method>, seeds: Vec<u64>) -> ExperimentConfig {
        let toml_text = r#"
[dataset]
format = "two_moons"
n_majority = 120
n_minority = 12
noise = 0.08
seed = 5
"#;
        let mut cfg = ExperimentConfig::from_toml_str(toml_text).unwrap();
        cfg.experiment.methods = methods;
        cfg.experiment.seeds = seeds;
        cfg.ttgan.epochs = Some(3);
        cfg.ttgan.lambda_translation = Some(0.1);
        cfg.selection.s = Some(2.0);
        cfg.selection.p_max = Some(1.0);
        cfg
    }

    #[test]
    fn toml_roundtrip_and_defaults() {
        let cfg = moons_config(vec![Method::Rw], vec![0]);
        assert_eq!(cfg.split.train_fraction, 0.6);
        assert_eq!(cfg.smote.k, 5);
        assert_eq!(cfg.bsmote.m, 10);
        assert_eq!(cfg.experiment.recall_floor, 0.4);
    }

    #[test]
    fn preset_resolution_fills_gan_and_selection() {
        let toml_text = r#"
[dataset]
format = "two_moons"
n_majority = 50
n_minority = 10
noise = 0.05
seed = 1

[ttgan]
preset = "yeast4"
"#;
        let cfg = ExperimentConfig::from_toml_str(toml_text).unwrap();
        let gan = cfg.resolved_ttgan(GanMode::Ttgan, 7).unwrap();
        assert_eq!(gan.epochs, 1000);
        assert_eq!(gan.coefficients.translation, 0.05);
        assert_eq!(gan.coefficients.cycle, 10.0);
        assert_eq!(gan.seed, 7);
        let sel = cfg.resolved_selection().unwrap();
        assert_eq!(sel.s, 4.0);
        assert_eq!(sel.p_max, 1.0);

        // Explicit keys override the preset.
        let mut cfg2 = cfg.clone();
        cfg2.ttgan.epochs = Some(10);
        assert_eq!(cfg2.resolved_ttgan(GanMode::Ttgan, 0).unwrap().epochs, 10);

        // Vanilla mode zeroes the regularizers regardless of preset.
        let vanilla = cfg.resolved_ttgan(GanMode::Vanilla, 0).unwrap();
        assert_eq!(vanilla.coefficients.translation, 0.0);
        assert_eq!(vanilla.coefficients.cycle, 0.0);
    }

    #[test]
    fn data_only_preset_is_rejected() {
        let toml_text = r#"
[dataset]
format = "two_moons"
n_majority = 50
n_minority = 10
noise = 0.05
seed = 1

[ttgan]
preset = "churn"
"#;
        assert!(ExperimentConfig::from_toml_str(toml_text).is_err());
    }

    #[test]
    fn rank_averaging_matches_table_style() {
        // Values 10, 20, 5, 10: ranks 2.5, 1, 4, 2.5.
        let ranks = average_ranks_descending(&[10.0, 20.0, 5.0, 10.0]);
        assert_eq!(ranks, vec![2.5, 1.0, 4.0, 2.5]);
        // Two methods tied for 3rd/4th each get 3.5.
        let ranks = average_ranks_descending(&[0.9, 0.8, 0.3417, 0.3417]);
        assert_eq!(ranks[2], 3.5);
        assert_eq!(ranks[3], 3.5);
    }

    #[test]
    fn rw_only_experiment_has_no_synthetic_rows() {
        let cfg = moons_config(vec![Method::Rw], vec![0, 1]);
        let report = run_experiment(&cfg).unwrap();
        let outcomes = &report.runs["rw"];
        assert_eq!(outcomes.len(), 2);
        for o in outcomes {
            assert!(o.error.is_none());
            assert!(o.diagnostics.n_synthetic.is_none());
            assert!(o.metrics.as_ref().unwrap().contains_key("map"));
        }
        // Different seeds give different splits, hence different metrics.
        let m0 = outcomes[0].metrics.as_ref().unwrap()["map"];
        let m1 = outcomes[1].metrics.as_ref().unwrap()["map"];
        assert_ne!(m0, m1);

        // Same seed twice: identical value.
        let report2 = run_experiment(&cfg).unwrap();
        assert_eq!(
            report.runs["rw"][0].metrics.as_ref().unwrap()["map"],
            report2.runs["rw"][0].metrics.as_ref().unwrap()["map"]
        );
    }

    #[test]
    fn full_method_list_produces_complete_report() {
        let cfg = moons_config(Method::all(), vec![3]);
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.runs.len(), 6);
        for (name, outcomes) in &report.runs {
            assert_eq!(outcomes.len(), 1, "{name}");
            assert!(outcomes[0].error.is_none(), "{name}: {:?}", outcomes[0].error);
        }
        // Aggregates carry means and ranks for every method.
        for (name, agg) in &report.aggregates {
            assert!(agg.mean.contains_key("map"), "{name}");
            assert!(agg.mean_rank.is_some(), "{name}");
        }
        // Ranks sum to n(n+1)/2 per seed.
        let total: f64 = report
            .aggregates
            .values()
            .map(|a| a.mean_rank.unwrap())
            .sum();
        assert_abs_diff_eq!(total, 21.0, epsilon = 1e-9);
        // GAN methods report generation diagnostics.
        assert!(report.runs["ttgan"][0].diagnostics.n_generated.is_some());
        assert!(report.runs["ttgan"][0].diagnostics.loss_history.is_some());
    }

    #[test]
    fn report_json_is_reproducible() {
        let cfg = moons_config(vec![Method::Rw, Method::Ros], vec![0]);
        let r1 = run_experiment(&cfg).unwrap();
        let r2 = run_experiment(&cfg).unwrap();
        let strip = |s: &str| -> String {
            s.lines()
                .filter(|l| !l.contains("wall_clock_seconds"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&r1.to_json().unwrap()), strip(&r2.to_json().unwrap()));
    }

    #[test]
    fn failures_are_recorded_per_run() {
        // 4 minority rows, 3 parts: feasible split, but SMOTE with k over a
        // tiny class still works; instead force failure via infeasible
        // stratification on one seed by shrinking the minority below 3.
        let toml_text = r#"
[dataset]
format = "two_moons"
n_majority = 40
n_minority = 2
noise = 0.05
seed = 2
"#;
        let mut cfg = ExperimentConfig::from_toml_str(toml_text).unwrap();
        cfg.experiment.methods = vec![Method::Rw];
        cfg.experiment.seeds = vec![0];
        let report = run_experiment(&cfg).unwrap();
        let o = &report.runs["rw"][0];
        assert!(o.error.is_some());
        assert!(o.metrics.is_none());
    }

    #[test]
    fn grid_search_orders_by_validation_map() {
        let mut cfg = moons_config(vec![Method::Ttgan], vec![0]);
        cfg.grid.lambda_translation = vec![0.0, 0.1];
        cfg.grid.s = vec![1.0];
        let outcomes = run_grid_search(&cfg).unwrap();
        assert_eq!(outcomes.len(), 2);
        assert!(outcomes[0].mean_validation_map >= outcomes[1].mean_validation_map);
    }
}
