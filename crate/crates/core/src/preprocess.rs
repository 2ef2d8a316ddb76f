//! Fit-and-apply feature preprocessing.
//!
//! Numeric features are z-scored (mean / population std). Categorical
//! features are one-hot encoded into contiguous column blocks. Mode
//! imputation and the Yeo-Johnson power transform are config-gated; the
//! transform is fitted by maximum likelihood only on features whose values
//! concentrate like a power law (most of the mass in a small slice of the
//! observed range).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};

/// Gates for the optional preprocessing stages.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub yeo_johnson: bool,
    pub impute_missing: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FittedFeature {
    Numeric {
        name: String,
        mean: f64,
        scale: f64,
        /// Fitted exponent, present only for power-law-flagged features.
        yeo_johnson_lambda: Option<f64>,
        impute_value: Option<f64>,
        /// Constant in the fitting data; scale forced to 1.
        constant: bool,
        column: usize,
    },
    Categorical {
        name: String,
        categories: Vec<String>,
        column_start: usize,
        impute_category: Option<String>,
    },
}

/// Fitted, immutable preprocessing parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessPipeline {
    features: Vec<FittedFeature>,
    output_width: usize,
    config: PreprocessConfig,
}

impl PreprocessPipeline {
    pub fn output_width(&self) -> usize {
        self.output_width
    }

    /// Names of features that were constant during fitting.
    pub fn constant_features(&self) -> Vec<&str> {
        self.features
            .iter()
            .filter_map(|f| match f {
                FittedFeature::Numeric { name, constant: true, .. } => Some(name.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Fitted Yeo-Johnson exponent for a feature, if one was fitted.
    pub fn yeo_johnson_lambda(&self, feature_name: &str) -> Option<f64> {
        self.features.iter().find_map(|f| match f {
            FittedFeature::Numeric {
                name,
                yeo_johnson_lambda,
                ..
            } if name == feature_name => *yeo_johnson_lambda,
            _ => None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The four-branch Yeo-Johnson map; continuous and strictly increasing in x.
pub fn yeo_johnson(x: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        if lambda.abs() < 1e-12 {
            (x + 1.0).ln()
        } else {
            ((x + 1.0).powf(lambda) - 1.0) / lambda
        }
    } else if (lambda - 2.0).abs() < 1e-12 {
        -(-x + 1.0).ln()
    } else {
        -(((-x + 1.0).powf(2.0 - lambda) - 1.0) / (2.0 - lambda))
    }
}

/// Analytic inverse of [`yeo_johnson`].
pub fn yeo_johnson_inverse(y: f64, lambda: f64) -> f64 {
    if y >= 0.0 {
        if lambda.abs() < 1e-12 {
            y.exp() - 1.0
        } else {
            (y * lambda + 1.0).powf(1.0 / lambda) - 1.0
        }
    } else if (lambda - 2.0).abs() < 1e-12 {
        1.0 - (-y).exp()
    } else {
        1.0 - (1.0 - y * (2.0 - lambda)).powf(1.0 / (2.0 - lambda))
    }
}

/// True iff some interval of width ≤ 20% of the observed range holds ≥ 90% of
/// the values. Sorted two-pointer sweep; exact. Constant input is `false`.
pub fn detect_power_law(values: &[f64]) -> bool {
    let clean: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n = clean.len();
    if n < 2 {
        return false;
    }
    let mut sorted = clean;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let range = sorted[n - 1] - sorted[0];
    if range == 0.0 {
        return false;
    }
    let max_width = 0.2 * range;
    let mut best = 0usize;
    let mut hi = 0usize;
    for lo in 0..n {
        if hi < lo {
            hi = lo;
        }
        while hi + 1 < n && sorted[hi + 1] - sorted[lo] <= max_width {
            hi += 1;
        }
        best = best.max(hi - lo + 1);
    }
    (best * 10) >= (n * 9)
}

/// Profile log-likelihood of the Yeo-Johnson transform at a given exponent.
pub fn yeo_johnson_log_likelihood(values: &[f64], lambda: f64) -> f64 {
    let n = values.len() as f64;
    let transformed: Vec<f64> = values.iter().map(|&x| yeo_johnson(x, lambda)).collect();
    let mean = transformed.iter().sum::<f64>() / n;
    let var = transformed.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    if var <= 1e-300 {
        return f64::NEG_INFINITY;
    }
    let jacobian: f64 = values
        .iter()
        .map(|&x| x.signum() * (x.abs() + 1.0).ln())
        .sum();
    -0.5 * n * var.ln() + (lambda - 1.0) * jacobian
}

/// Maximizes the profile log-likelihood over λ ∈ [−2, 2] by golden-section
/// search to tolerance 1e-6.
pub fn fit_yeo_johnson_lambda(values: &[f64]) -> f64 {
    const PHI_INV: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (-2.0f64, 2.0f64);
    let mut c = b - PHI_INV * (b - a);
    let mut d = a + PHI_INV * (b - a);
    let mut fc = yeo_johnson_log_likelihood(values, c);
    let mut fd = yeo_johnson_log_likelihood(values, d);
    while (b - a).abs() > 1e-6 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - PHI_INV * (b - a);
            fc = yeo_johnson_log_likelihood(values, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + PHI_INV * (b - a);
            fd = yeo_johnson_log_likelihood(values, d);
        }
    }
    0.5 * (a + b)
}

/// Mode of numeric values; ties broken by the smallest value.
fn numeric_mode(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best_value = sorted[0];
    let mut best_count = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best_count {
            best_count = j - i;
            best_value = sorted[i];
        }
        i = j;
    }
    Some(best_value)
}

/// Fits the pipeline on the training split only.
pub fn fit(train: &Dataset, config: &PreprocessConfig) -> Result<PreprocessPipeline> {
    if train.n_rows() == 0 {
        return Err(Error::InvalidDataset("cannot fit on an empty dataset".into()));
    }
    let mut features = Vec::with_capacity(train.meta.len());
    let mut col = 0usize;

    for (j, meta) in train.meta.iter().enumerate() {
        match meta.kind {
            FeatureKind::Numeric => {
                let observed: Vec<f64> = train
                    .x
                    .column(j)
                    .iter()
                    .copied()
                    .filter(|v| !v.is_nan())
                    .collect();
                let impute_value = if config.impute_missing {
                    numeric_mode(&observed)
                } else {
                    None
                };
                let mut values = observed;
                if let Some(iv) = impute_value {
                    let missing = train.n_rows() - values.len();
                    values.extend(std::iter::repeat(iv).take(missing));
                }
                if values.is_empty() {
                    return Err(Error::InvalidDataset(format!(
                        "feature `{}` has no observed values",
                        meta.name
                    )));
                }

                let lambda = if config.yeo_johnson && detect_power_law(&values) {
                    Some(fit_yeo_johnson_lambda(&values))
                } else {
                    None
                };
                let transformed: Vec<f64> = match lambda {
                    Some(l) => values.iter().map(|&v| yeo_johnson(v, l)).collect(),
                    None => values,
                };
                let n = transformed.len() as f64;
                let mean = transformed.iter().sum::<f64>() / n;
                let var = transformed.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
                let raw_scale = var.sqrt();
                let constant = raw_scale == 0.0;
                let scale = if constant { 1.0 } else { raw_scale };

                features.push(FittedFeature::Numeric {
                    name: meta.name.clone(),
                    mean,
                    scale,
                    yeo_johnson_lambda: lambda,
                    impute_value,
                    constant,
                    column: col,
                });
                col += 1;
            }
            FeatureKind::Categorical => {
                let impute_category = if config.impute_missing {
                    // Mode over observed cells; ties broken lexicographically.
                    let mut counts: std::collections::BTreeMap<&str, usize> =
                        std::collections::BTreeMap::new();
                    for v in train.x.column(j).iter() {
                        if !v.is_nan() {
                            let cat = meta.categories[*v as usize].as_str();
                            *counts.entry(cat).or_insert(0) += 1;
                        }
                    }
                    counts
                        .iter()
                        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                        .map(|(cat, _)| cat.to_string())
                } else {
                    None
                };
                features.push(FittedFeature::Categorical {
                    name: meta.name.clone(),
                    categories: meta.categories.clone(),
                    column_start: col,
                    impute_category,
                });
                col += meta.categories.len();
            }
        }
    }

    Ok(PreprocessPipeline {
        features,
        output_width: col,
        config: *config,
    })
}

/// Applies the fitted pipeline to a schema-compatible dataset.
///
/// Schema compatibility: same feature count, names, and kinds. A categorical
/// cell whose category was not fitted maps to an all-zero block; so does a
/// missing categorical cell when imputation is off.
pub fn apply(pipeline: &PreprocessPipeline, d: &Dataset) -> Result<Array2<f64>> {
    if d.meta.len() != pipeline.features.len() {
        return Err(Error::SchemaMismatch(format!(
            "{} features in data, {} in pipeline",
            d.meta.len(),
            pipeline.features.len()
        )));
    }
    for (meta, fitted) in d.meta.iter().zip(pipeline.features.iter()) {
        let (fname, fkind) = match fitted {
            FittedFeature::Numeric { name, .. } => (name, FeatureKind::Numeric),
            FittedFeature::Categorical { name, .. } => (name, FeatureKind::Categorical),
        };
        if &meta.name != fname || meta.kind != fkind {
            return Err(Error::SchemaMismatch(format!(
                "feature `{}` ({:?}) does not match fitted `{}`",
                meta.name, meta.kind, fname
            )));
        }
    }

    let n = d.n_rows();
    let mut out = Array2::<f64>::zeros((n, pipeline.output_width));
    for (j, fitted) in pipeline.features.iter().enumerate() {
        match fitted {
            FittedFeature::Numeric {
                mean,
                scale,
                yeo_johnson_lambda,
                impute_value,
                column,
                ..
            } => {
                for (i, v) in d.x.column(j).iter().enumerate() {
                    let mut value = *v;
                    if value.is_nan() {
                        match impute_value {
                            Some(iv) => value = *iv,
                            None => {
                                out[[i, *column]] = f64::NAN;
                                continue;
                            }
                        }
                    }
                    if let Some(l) = yeo_johnson_lambda {
                        value = yeo_johnson(value, *l);
                    }
                    out[[i, *column]] = (value - mean) / scale;
                }
            }
            FittedFeature::Categorical {
                categories,
                column_start,
                impute_category,
                ..
            } => {
                for (i, v) in d.x.column(j).iter().enumerate() {
                    let cell_category: Option<&str> = if v.is_nan() {
                        impute_category.as_deref()
                    } else {
                        Some(d.meta[j].categories[*v as usize].as_str())
                    };
                    if let Some(cat) = cell_category {
                        // Unknown category leaves the block all-zero.
                        if let Some(k) = categories.iter().position(|c| c == cat) {
                            out[[i, column_start + k]] = 1.0;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureMeta;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn numeric_dataset(values: &[f64], labels: &[u8]) -> Dataset {
        let x = Array2::from_shape_vec((values.len(), 1), values.to_vec()).unwrap();
        Dataset::from_matrix("t", x, labels.to_vec()).unwrap()
    }

    #[test]
    fn zscore_uses_population_std() {
        let d = numeric_dataset(&[1.0, 2.0, 3.0], &[0, 0, 1]);
        let p = fit(&d, &PreprocessConfig::default()).unwrap();
        let out = apply(&p, &d).unwrap();
        let expected_scale = (2.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(out[[0, 0]], (1.0 - 2.0) / expected_scale, epsilon = 1e-12);
        assert_abs_diff_eq!(out[[1, 0]], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn applying_to_fit_set_centers_numerics() {
        let values: Vec<f64> = (0..50).map(|i| (i as f64).sin() * 3.0 + 1.0).collect();
        let labels: Vec<u8> = (0..50).map(|i| u8::from(i % 7 == 0)).collect();
        let d = numeric_dataset(&values, &labels);
        let p = fit(&d, &PreprocessConfig::default()).unwrap();
        let out = apply(&p, &d).unwrap();
        let mean = out.column(0).sum() / 50.0;
        let var = out.column(0).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 50.0;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(var.sqrt(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn constant_feature_keeps_scale_one() {
        let d = numeric_dataset(&[5.0, 5.0, 5.0, 5.0], &[0, 0, 0, 1]);
        let p = fit(&d, &PreprocessConfig::default()).unwrap();
        assert_eq!(p.constant_features(), vec!["f0"]);
        let out = apply(&p, &d).unwrap();
        assert_abs_diff_eq!(out[[0, 0]], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn one_hot_width_and_unseen_category() {
        let meta = vec![
            FeatureMeta::numeric("n"),
            FeatureMeta::categorical("c", vec!["a".into(), "b".into(), "c".into()]),
        ];
        let x = array![[1.0, 0.0], [2.0, 1.0], [3.0, 2.0], [4.0, 0.0]];
        let d = Dataset::new("t", x, vec![0, 0, 1, 0], meta).unwrap();
        let p = fit(&d, &PreprocessConfig::default()).unwrap();
        assert_eq!(p.output_width(), 4);
        let out = apply(&p, &d).unwrap();
        assert_eq!(out.ncols(), 4);
        assert_eq!(out[[1, 2]], 1.0); // category b

        // Apply to a dataset whose schema adds an unseen category `z`.
        let meta2 = vec![
            FeatureMeta::numeric("n"),
            FeatureMeta::categorical(
                "c",
                vec!["a".into(), "b".into(), "c".into(), "z".into()],
            ),
        ];
        let x2 = array![[1.0, 3.0], [2.0, 0.0]];
        let d2 = Dataset::new("t2", x2, vec![0, 1], meta2).unwrap();
        let out2 = apply(&p, &d2).unwrap();
        assert_eq!(out2[[0, 1]], 0.0);
        assert_eq!(out2[[0, 2]], 0.0);
        assert_eq!(out2[[0, 3]], 0.0); // `z` row: zero block
        assert_eq!(out2[[1, 1]], 1.0); // `a` row
    }

    #[test]
    fn mode_imputation_fills_missing() {
        let meta = vec![FeatureMeta::categorical("c", vec!["a".into(), "b".into()])];
        let x = array![[0.0], [0.0], [1.0], [f64::NAN]];
        let d = Dataset::new("t", x, vec![0, 0, 1, 0], meta).unwrap();
        let cfg = PreprocessConfig {
            impute_missing: true,
            ..Default::default()
        };
        let p = fit(&d, &cfg).unwrap();
        let out = apply(&p, &d).unwrap();
        assert_eq!(out[[3, 0]], 1.0); // imputed to mode `a`
        assert_eq!(out[[3, 1]], 0.0);
    }

    #[test]
    fn numeric_mode_tie_breaks_smallest() {
        assert_eq!(numeric_mode(&[3.0, 1.0, 3.0, 1.0, 2.0]), Some(1.0));
        assert_eq!(numeric_mode(&[2.0, 2.0, 5.0]), Some(2.0));
    }

    #[test]
    fn yeo_johnson_branch_values() {
        assert_abs_diff_eq!(yeo_johnson(3.7, 1.0), 3.7, epsilon = 1e-12);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(yeo_johnson(e - 1.0, 0.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(yeo_johnson(-(e - 1.0), 2.0), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn detect_power_law_examples() {
        // 95 values near 0, 5 values near 10: huge concentration.
        let mut v: Vec<f64> = (0..95).map(|i| i as f64 / 94.0).collect();
        v.extend((0..5).map(|i| 9.0 + i as f64 / 4.0));
        assert!(detect_power_law(&v));

        // Uniform grid: no 20%-wide interval holds 90%.
        let grid: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        assert!(!detect_power_law(&grid));

        // Two distinct values 50/50.
        let two: Vec<f64> = (0..100).map(|i| f64::from(i % 2 == 0)).collect();
        assert!(!detect_power_law(&two));

        // Constant.
        assert!(!detect_power_law(&[4.0; 10]));
    }

    #[test]
    fn power_law_feature_gets_lambda_near_grid_argmax() {
        // 99 zeros and one spike at 100: flagged, lambda fitted by MLE.
        let mut values = vec![0.0f64; 99];
        values.push(100.0);
        assert!(detect_power_law(&values));

        let fitted = fit_yeo_johnson_lambda(&values);
        // Brute-force oracle: grid over [-2, 2] with step 0.01.
        let mut best = (-2.0, f64::NEG_INFINITY);
        let mut l = -2.0f64;
        while l <= 2.0 + 1e-12 {
            let ll = yeo_johnson_log_likelihood(&values, l);
            if ll > best.1 {
                best = (l, ll);
            }
            l += 0.01;
        }
        assert!(
            (fitted - best.0).abs() <= 0.01,
            "golden-section {fitted} vs grid {}",
            best.0
        );

        let labels: Vec<u8> = (0..100).map(|i| u8::from(i >= 95)).collect();
        let d = numeric_dataset(&values, &labels);
        let cfg = PreprocessConfig {
            yeo_johnson: true,
            ..Default::default()
        };
        let p = fit(&d, &cfg).unwrap();
        assert!(p.yeo_johnson_lambda("f0").is_some());
    }

    #[test]
    fn pipeline_json_roundtrip() {
        let d = numeric_dataset(&[1.0, 2.0, 3.0, 10.0], &[0, 0, 0, 1]);
        let p = fit(&d, &PreprocessConfig::default()).unwrap();
        let json = p.to_json().unwrap();
        let p2 = PreprocessPipeline::from_json(&json).unwrap();
        let out1 = apply(&p, &d).unwrap();
        let out2 = apply(&p2, &d).unwrap();
        assert_eq!(out1, out2);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let d = numeric_dataset(&[1.0, 2.0], &[0, 1]);
        let p = fit(&d, &PreprocessConfig::default()).unwrap();
        let meta = vec![FeatureMeta::categorical("f0", vec!["a".into()])];
        let d2 = Dataset::new("t", array![[0.0], [0.0]], vec![0, 1], meta).unwrap();
        assert!(matches!(apply(&p, &d2), Err(Error::SchemaMismatch(_))));
    }
}
