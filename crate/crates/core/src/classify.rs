//! Class-re-weighted linear SVM with a probability-like sigmoid score, and
//! the end-to-end resampling-classification procedure built around it.
//!
//! The SVM minimizes
//! `(1/(2C))·‖w‖² + (1/N)·Σ ω_i·max(0, 1 − ỹ_i(w·x_i + b))`
//! by averaged stochastic subgradient descent with a 1/t step decay, where
//! balanced weighting sets `ω = N/(2·N_c)` so both classes contribute the
//! same total weight.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::sigmoid;
use crate::preprocess::{self, PreprocessConfig, PreprocessPipeline};
use crate::resample::{augment, select, AugmentedDataset, ScoredSamples, SelectionConfig};
use crate::ttgan::{self, EpochLosses, GanMode, TtganConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    Balanced,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearSvmConfig {
    /// Inverse regularization strength C.
    pub regularization: f64,
    pub epochs: usize,
    /// Initial step size of the 1/t decay schedule.
    pub learning_rate: f64,
    pub class_weighting: ClassWeighting,
    pub seed: u64,
}

impl Default for LinearSvmConfig {
    fn default() -> Self {
        LinearSvmConfig {
            regularization: 1.0,
            epochs: 40,
            learning_rate: 0.5,
            class_weighting: ClassWeighting::Balanced,
            seed: 0,
        }
    }
}

impl LinearSvmConfig {
    fn validate(&self) -> Result<()> {
        if !self.regularization.is_finite() || self.regularization <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "regularization C = {} must be positive",
                self.regularization
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// A fitted linear SVM; scores are `sigmoid(w·x + b)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: LinearSvmConfig,
}

impl LinearSvmModel {
    pub fn decision_values(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "input width {} != model width {}",
                x.ncols(),
                self.weights.len()
            )));
        }
        Ok(x.axis_iter(Axis(0))
            .map(|row| {
                row.iter()
                    .zip(self.weights.iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }

    /// Minority-likelihood scores in [0, 1], strictly monotone in the margin.
    pub fn score(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        Ok(self.decision_values(x)?.into_iter().map(sigmoid).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Per-class sample weights: `N/(2·N_c)` when balanced, 1 otherwise.
pub fn class_weights(y: &[u8], weighting: ClassWeighting) -> (f64, f64) {
    match weighting {
        ClassWeighting::None => (1.0, 1.0),
        ClassWeighting::Balanced => {
            let n = y.len() as f64;
            let n_min = y.iter().filter(|&&l| l == 1).count() as f64;
            let n_maj = n - n_min;
            (n / (2.0 * n_maj), n / (2.0 * n_min))
        }
    }
}

/// Full-batch objective value and (sub)gradient; shared between training and
/// the gradient checks.
pub fn svm_objective_and_grad(
    weights: &[f64],
    bias: f64,
    x: &Array2<f64>,
    y: &[u8],
    sample_weights: &[f64],
    regularization: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.nrows() as f64;
    let mut value = weights.iter().map(|w| w * w).sum::<f64>() / (2.0 * regularization);
    let mut grad_w: Vec<f64> = weights.iter().map(|w| w / regularization).collect();
    let mut grad_b = 0.0;
    for (i, row) in x.axis_iter(Axis(0)).enumerate() {
        let label = if y[i] == 1 { 1.0 } else { -1.0 };
        let margin = label
            * (row
                .iter()
                .zip(weights.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + bias);
        if margin < 1.0 {
            value += sample_weights[i] * (1.0 - margin) / n;
            let scale = -sample_weights[i] * label / n;
            for (g, v) in grad_w.iter_mut().zip(row.iter()) {
                *g += scale * v;
            }
            grad_b += scale;
        }
    }
    (value, grad_w, grad_b)
}

/// Fits the SVM by averaged stochastic subgradient descent:
/// `η_t = η₀ / (1 + η₀·t/C)`, iterates averaged from the first step.
pub fn fit_svm(x: &Array2<f64>, y: &[u8], cfg: &LinearSvmConfig) -> Result<LinearSvmModel> {
    cfg.validate()?;
    if x.nrows() != y.len() || x.nrows() == 0 {
        return Err(Error::ShapeMismatch(format!(
            "{} rows vs {} labels",
            x.nrows(),
            y.len()
        )));
    }
    let n_min = y.iter().filter(|&&l| l == 1).count();
    if n_min == 0 || n_min == y.len() {
        return Err(Error::InvalidDataset(
            "SVM training needs both classes present".into(),
        ));
    }

    let (w_maj, w_min) = class_weights(y, cfg.class_weighting);
    let d = x.ncols();
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut w_avg = vec![0.0f64; d];
    let mut b_avg = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut t = 0u64;
    let c = cfg.regularization;

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = cfg.learning_rate / (1.0 + cfg.learning_rate * t as f64 / c);
            let row = x.row(i);
            let label = if y[i] == 1 { 1.0 } else { -1.0 };
            let omega = if y[i] == 1 { w_min } else { w_maj };
            let margin =
                label * (row.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>() + b);
            // Regularizer pull.
            for wv in w.iter_mut() {
                *wv -= eta * *wv / c;
            }
            if margin < 1.0 {
                for (wv, xv) in w.iter_mut().zip(row.iter()) {
                    *wv += eta * omega * label * xv;
                }
                b += eta * omega * label;
            }
            for (a, v) in w_avg.iter_mut().zip(w.iter()) {
                *a += v;
            }
            b_avg += b;
        }
    }
    let total = t as f64;
    Ok(LinearSvmModel {
        weights: w_avg.into_iter().map(|v| v / total).collect(),
        bias: b_avg / total,
        config: *cfg,
    })
}

/// Anything that can score rows with minority likelihood in [0, 1].
pub trait Classifier {
    fn score(&self, x: &Array2<f64>) -> Result<Vec<f64>>;
}

impl Classifier for LinearSvmModel {
    fn score(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        LinearSvmModel::score(self, x)
    }
}

/// Opaque fitted-classifier handle returned by the end-to-end procedure.
pub type ClassifierHandle = Box<dyn Classifier>;

/// Five-number summary plus mean of the baseline scores over the generated
/// rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
}

impl ScoreSummary {
    fn from_scores(scores: &[f64]) -> Option<Self> {
        if scores.is_empty() {
            return None;
        }
        let mut sorted = scores.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |f: f64| sorted[((sorted.len() - 1) as f64 * f).round() as usize];
        Some(ScoreSummary {
            min: sorted[0],
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            max: sorted[sorted.len() - 1],
            mean: scores.iter().sum::<f64>() / scores.len() as f64,
        })
    }
}

/// What happened inside one end-to-end run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Algorithm1Diagnostics {
    pub n_generated: usize,
    pub n_selected: usize,
    pub baseline_score_summary: Option<ScoreSummary>,
    pub loss_history: Vec<EpochLosses>,
    pub resampler_warning: Option<String>,
}

/// Everything produced by one end-to-end run.
pub struct Algorithm1Output {
    /// Final classifier f, fitted on the augmented data.
    pub classifier: LinearSvmModel,
    /// Baseline classifier f_b, fitted on the unaugmented data.
    pub baseline: LinearSvmModel,
    pub augmented: AugmentedDataset,
    pub pipeline: PreprocessPipeline,
    pub diagnostics: Algorithm1Diagnostics,
}

/// The end-to-end procedure: fit the baseline classifier, train the
/// translation GAN, translate the majority class, select useful synthetic
/// rows by baseline score, augment, and fit the final classifier.
///
/// `d` is the training split; preprocessing statistics are fitted on it
/// alone. The baseline and final classifiers share the same configuration.
pub fn run_algorithm_1(
    d: &Dataset,
    pre_cfg: &PreprocessConfig,
    ttgan_cfg: &TtganConfig,
    sel_cfg: &SelectionConfig,
    clf_cfg: &LinearSvmConfig,
) -> Result<Algorithm1Output> {
    let pipeline = preprocess::fit(d, pre_cfg)?;
    let x = preprocess::apply(&pipeline, d)?;
    let processed = Dataset::from_matrix(d.name.clone(), x, d.y.clone())?;
    let (maj_idx, min_idx) = processed.class_indices();
    let x_maj = processed.x.select(Axis(0), &maj_idx);
    let x_min = processed.x.select(Axis(0), &min_idx);

    // Step 1: baseline classifier f_b on the unaugmented data.
    let baseline = fit_svm(&processed.x, &processed.y, clf_cfg)?;

    // Steps 2-3: train the GAN, translate the majority class.
    let bundle = ttgan::train(&x_maj, &x_min, ttgan_cfg)?;
    let x_gen = ttgan::generate(&bundle, &x_maj)?;
    let n_generated = x_gen.nrows();

    // Step 4: score with f_b and select.
    let scores = baseline.score(&x_gen)?;
    let summary = ScoreSummary::from_scores(&scores);
    let candidates = ScoredSamples::new(x_gen, scores)?;
    let selected_rows = select(&candidates, sel_cfg, min_idx.len())?;
    let x_selected = candidates.rows.select(Axis(0), &selected_rows);
    // Provenance: the source majority row index within `d`, meaningful only
    // when samples are translations of majority rows.
    let provenance = match ttgan_cfg.mode {
        GanMode::Ttgan => Some(selected_rows.iter().map(|&r| maj_idx[r]).collect()),
        GanMode::Vanilla => None,
    };

    // Step 5: augment.
    let augmented = augment(&processed, x_selected, provenance)?;

    // Step 6: final classifier f on the augmented data.
    let (x_aug, y_aug) = augmented.training_matrices();
    let classifier = fit_svm(&x_aug, &y_aug, clf_cfg)?;

    let diagnostics = Algorithm1Diagnostics {
        n_generated,
        n_selected: augmented.synthetic_count(),
        baseline_score_summary: summary,
        loss_history: bundle.history.clone(),
        resampler_warning: augmented.warning.clone(),
    };
    Ok(Algorithm1Output {
        classifier,
        baseline,
        augmented,
        pipeline,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ttgan::LossCoefficients;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn separable_data_is_classified_correctly() {
        let x = array![[-1.0, 0.0], [-1.2, 0.1], [1.0, 0.0], [1.1, -0.2]];
        let y = vec![0, 0, 1, 1];
        let model = fit_svm(&x, &y, &LinearSvmConfig::default()).unwrap();
        let decisions = model.decision_values(&x).unwrap();
        assert!(decisions[0] < 0.0 && decisions[1] < 0.0);
        assert!(decisions[2] > 0.0 && decisions[3] > 0.0);
    }

    #[test]
    fn balanced_weights_equalize_class_mass() {
        let mut y = vec![0u8; 90];
        y.extend(vec![1u8; 10]);
        let (w_maj, w_min) = class_weights(&y, ClassWeighting::Balanced);
        // Minority per-sample weight is N_maj/N_min times the majority's.
        assert_abs_diff_eq!(w_min / w_maj, 9.0, epsilon = 1e-12);
        // Total weight per class is equal exactly.
        assert_eq!(w_maj * 90.0, w_min * 10.0);
    }

    #[test]
    fn tiny_dataset_objective_near_grid_oracle() {
        // Six points in 2-D; compare the hinge objective at the returned
        // parameters with an exhaustive coarse grid over (w1, w2, b).
        let x = array![
            [-1.0, -0.5],
            [-0.8, 0.3],
            [-1.2, 0.1],
            [0.9, 0.4],
            [1.1, -0.3],
            [1.0, 0.2]
        ];
        let y = vec![0, 0, 0, 1, 1, 1];
        let cfg = LinearSvmConfig {
            epochs: 300,
            ..Default::default()
        };
        let model = fit_svm(&x, &y, &cfg).unwrap();
        let (w_maj, w_min) = class_weights(&y, cfg.class_weighting);
        let sw: Vec<f64> = y
            .iter()
            .map(|&l| if l == 1 { w_min } else { w_maj })
            .collect();
        let (found, _, _) = svm_objective_and_grad(
            &model.weights,
            model.bias,
            &x,
            &y,
            &sw,
            cfg.regularization,
        );

        let mut best = f64::INFINITY;
        let grid: Vec<f64> = (-30..=30).map(|i| i as f64 * 0.1).collect();
        for &w1 in &grid {
            for &w2 in &grid {
                for &b in &grid {
                    let (v, _, _) =
                        svm_objective_and_grad(&[w1, w2], b, &x, &y, &sw, cfg.regularization);
                    best = best.min(v);
                }
            }
        }
        assert!(
            found <= best * 1.01 + 1e-9,
            "objective {found} not within 1% of grid optimum {best}"
        );
    }

    #[test]
    fn svm_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let n = 12;
            let d = 3;
            let x = Array2::from_shape_fn((n, d), |_| 2.0 * rng.random::<f64>() - 1.0);
            let y: Vec<u8> = (0..n).map(|i| u8::from(i % 3 == 0)).collect();
            let sw: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
            let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            let b = rng.random::<f64>() - 0.5;
            let c = 2.0;
            let (_, grad_w, grad_b) = svm_objective_and_grad(&w, b, &x, &y, &sw, c);

            let h = 1e-6;
            for j in 0..d {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += h;
                wm[j] -= h;
                let fd = (svm_objective_and_grad(&wp, b, &x, &y, &sw, c).0
                    - svm_objective_and_grad(&wm, b, &x, &y, &sw, c).0)
                    / (2.0 * h);
                let denom = fd.abs().max(grad_w[j].abs()).max(1e-8);
                assert!(
                    (fd - grad_w[j]).abs() / denom < 1e-4,
                    "w[{j}]: fd={fd} analytic={}",
                    grad_w[j]
                );
            }
            let fd = (svm_objective_and_grad(&w, b + h, &x, &y, &sw, c).0
                - svm_objective_and_grad(&w, b - h, &x, &y, &sw, c).0)
                / (2.0 * h);
            let denom = fd.abs().max(grad_b.abs()).max(1e-8);
            assert!((fd - grad_b).abs() / denom < 1e-4);
        }
    }

    #[test]
    fn scores_are_sigmoid_of_margin_and_order_preserving() {
        let model = LinearSvmModel {
            weights: vec![2.0, -1.0],
            bias: 0.25,
            config: LinearSvmConfig::default(),
        };
        let x = array![[0.0, 0.25], [1.0, 0.0], [-3.0, 0.0]];
        let scores = model.score(&x).unwrap();
        assert_abs_diff_eq!(scores[0], 0.5, epsilon = 1e-12);
        assert!(scores[1] > 0.5);
        assert!(scores[2] < 0.5);

        // Batch scoring equals per-row scoring exactly.
        for (i, s) in scores.iter().enumerate() {
            let single = model
                .score(&x.row(i).to_owned().insert_axis(Axis(0)))
                .unwrap();
            assert_eq!(*s, single[0]);
        }

        // Order of decision values is preserved by the sigmoid.
        let decisions = model.decision_values(&x).unwrap();
        let mut by_decision: Vec<usize> = (0..3).collect();
        by_decision.sort_by(|&a, &b| decisions[a].partial_cmp(&decisions[b]).unwrap());
        let mut by_score: Vec<usize> = (0..3).collect();
        by_score.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
        assert_eq!(by_decision, by_score);
    }

    #[test]
    fn single_class_input_is_rejected() {
        let x = Array2::zeros((4, 2));
        assert!(fit_svm(&x, &[0, 0, 0, 0], &LinearSvmConfig::default()).is_err());
    }

    #[test]
    fn fitting_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Array2::from_shape_fn((40, 3), |_| rng.random::<f64>());
        let y: Vec<u8> = (0..40).map(|i| u8::from(i % 5 == 0)).collect();
        let cfg = LinearSvmConfig::default();
        let m1 = fit_svm(&x, &y, &cfg).unwrap();
        let m2 = fit_svm(&x, &y, &cfg).unwrap();
        assert_eq!(m1.weights, m2.weights);
        assert_eq!(m1.bias, m2.bias);
    }

    fn toy_dataset(seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_maj = 60;
        let n_min = 8;
        let x = Array2::from_shape_fn((n_maj + n_min, 3), |(i, _)| {
            if i < n_maj {
                rng.random::<f64>()
            } else {
                rng.random::<f64>() * 0.5 + 1.2
            }
        });
        let mut y = vec![0u8; n_maj];
        y.extend(vec![1u8; n_min]);
        Dataset::from_matrix("toy", x, y).unwrap()
    }

    fn quick_gan_config(seed: u64) -> TtganConfig {
        TtganConfig {
            epochs: 3,
            batch_size: 32,
            coefficients: LossCoefficients {
                translation: 0.1,
                cycle: 1.0,
                identity: 0.0,
            },
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn algorithm_1_composes_the_pipeline() {
        let d = toy_dataset(4);
        let sel = SelectionConfig {
            p_max: 1.0,
            s: 2.0,
            variant: crate::resample::SelectionVariant::UpperBound,
        };
        let out = run_algorithm_1(
            &d,
            &PreprocessConfig::default(),
            &quick_gan_config(7),
            &sel,
            &LinearSvmConfig::default(),
        )
        .unwrap();
        assert_eq!(out.diagnostics.n_generated, 60);
        assert_eq!(out.diagnostics.n_selected, 16); // floor(2.0 * 8)
        assert_eq!(out.augmented.synthetic_count(), 16);
        // Baseline and final classifier share configuration.
        assert_eq!(out.baseline.config, out.classifier.config);
        // Provenance points at majority rows of the input dataset.
        for &src in out.augmented.provenance.as_ref().unwrap() {
            assert_eq!(d.y[src], 0);
        }
    }

    #[test]
    fn algorithm_1_with_pmax_zero_selects_nothing() {
        let d = toy_dataset(5);
        let sel = SelectionConfig {
            p_max: 0.0,
            s: 4.0,
            variant: crate::resample::SelectionVariant::UpperBound,
        };
        let out = run_algorithm_1(
            &d,
            &PreprocessConfig::default(),
            &quick_gan_config(1),
            &sel,
            &LinearSvmConfig::default(),
        )
        .unwrap();
        // Sigmoid scores are strictly positive, so nothing passes p_max = 0.
        assert_eq!(out.diagnostics.n_selected, 0);
        // The final classifier saw exactly the unaugmented data.
        let x = preprocess::apply(&out.pipeline, &d).unwrap();
        let reference = fit_svm(&x, &d.y, &LinearSvmConfig::default()).unwrap();
        assert_eq!(out.classifier.weights, reference.weights);
    }

    #[test]
    fn algorithm_1_is_deterministic_end_to_end() {
        let d = toy_dataset(6);
        let sel = SelectionConfig {
            p_max: 0.9,
            s: 1.5,
            variant: crate::resample::SelectionVariant::UpperBound,
        };
        let run = || {
            run_algorithm_1(
                &d,
                &PreprocessConfig::default(),
                &quick_gan_config(3),
                &sel,
                &LinearSvmConfig::default(),
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.classifier.weights, b.classifier.weights);
        assert_eq!(a.augmented.x_selected, b.augmented.x_selected);
    }

    #[test]
    fn model_json_roundtrip() {
        let model = LinearSvmModel {
            weights: vec![0.5, -1.5],
            bias: 0.1,
            config: LinearSvmConfig::default(),
        };
        let restored = LinearSvmModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(model.weights, restored.weights);
        assert_eq!(model.bias, restored.bias);
    }
}
