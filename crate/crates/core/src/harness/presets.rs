use serde::Serialize;

use crate::error::{Error, Result};

/// One shipped hyperparameter row: GAN epochs, loss coefficients, and the
/// selection parameters, together with the downstream classifier the values
/// were tuned for. Rows tuned for a tree classifier ship as data only.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TtganPreset {
    pub name: &'static str,
    pub epochs: usize,
    pub lambda_translation: f64,
    pub lambda_cycle: f64,
    pub lambda_identity: f64,
    pub s: f64,
    pub p_max: f64,
    pub classifier: &'static str,
    pub executable: bool,
}

macro_rules! preset {
    ($name:literal, $epochs:literal, $lt:literal, $lc:literal, $li:literal, $s:literal, $p:literal, $clf:literal, $exec:literal) => {
        TtganPreset {
            name: $name,
            epochs: $epochs,
            lambda_translation: $lt,
            lambda_cycle: $lc,
            lambda_identity: $li,
            s: $s,
            p_max: $p,
            classifier: $clf,
            executable: $exec,
        }
    };
}

/// Shipped presets, tuned per dataset.
pub const PRESETS: &[TtganPreset] = &[
    preset!("abalone9-18", 1150, 0.1, 0.0, 0.0, 4.0, 0.8, "linear-svm", true),
    preset!("abalone19", 250, 0.05, 10.0, 5.0, 16.0, 0.9, "linear-svm", true),
    preset!("glass-0-1-6_vs_2", 2500, 0.05, 15.0, 0.0, 5.5, 0.9, "linear-svm", true),
    preset!("glass2", 2500, 0.1, 0.0, 2.5, 6.5, 0.8, "linear-svm", true),
    preset!("glass4", 900, 0.0, 15.0, 7.5, 5.5, 0.8, "linear-svm", true),
    preset!("page-blocks-1-3_vs_4", 900, 0.05, 5.0, 5.0, 5.5, 0.7, "linear-svm", true),
    preset!("yeast-0-5-6-7-9_vs_4", 900, 0.0, 5.0, 2.5, 6.5, 0.8, "linear-svm", true),
    preset!("yeast-1_vs_7", 2500, 0.05, 0.0, 0.0, 1.3, 0.8, "linear-svm", true),
    preset!("yeast-1-2-8-9_vs_7", 1150, 0.05, 10.0, 5.0, 4.0, 1.0, "linear-svm", true),
    preset!("yeast-1-4-5-8_vs_7", 900, 0.1, 15.0, 0.0, 1.65, 0.7, "linear-svm", true),
    preset!("yeast-2_vs_4", 500, 0.1, 15.0, 0.0, 1.8, 0.6, "linear-svm", true),
    preset!("yeast-2_vs_8", 1300, 0.05, 10.0, 10.0, 4.0, 0.6, "linear-svm", true),
    preset!("yeast4", 1000, 0.05, 10.0, 0.0, 4.0, 1.0, "linear-svm", true),
    preset!("yeast5", 1450, 0.05, 0.0, 0.0, 4.0, 0.6, "linear-svm", true),
    preset!("yeast6", 2500, 0.15, 0.0, 5.0, 7.5, 0.6, "linear-svm", true),
    // Tuned for a gradient-boosted-tree classifier; shipped as data only.
    preset!("churn", 700, 0.2, 20.0, 12.0, 0.33, 0.0, "catboost", false),
    preset!("task1-return", 500, 0.0, 4.0, 6.0, 0.215, 0.0, "catboost", false),
    preset!("task1-pay", 700, 0.05, 16.0, 0.0, 0.24, 0.85, "catboost", false),
    preset!("task2-return", 700, 0.05, 10.0, 6.0, 0.25, 0.5, "catboost", false),
    preset!("task2-pay", 700, 0.25, 10.0, 3.0, 0.75, 0.5, "catboost", false),
];

pub fn available_presets() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

pub fn load_preset(name: &str) -> Result<&'static TtganPreset> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            available: available_presets().join(", "),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_rows_load() {
        let p = load_preset("yeast4").unwrap();
        assert_eq!(
            (p.epochs, p.lambda_translation, p.lambda_cycle, p.lambda_identity, p.s, p.p_max),
            (1000, 0.05, 10.0, 0.0, 4.0, 1.0)
        );
        let p = load_preset("page-blocks-1-3_vs_4").unwrap();
        assert_eq!(
            (p.epochs, p.lambda_translation, p.lambda_cycle, p.lambda_identity, p.s, p.p_max),
            (900, 0.05, 5.0, 5.0, 5.5, 0.7)
        );
        let p = load_preset("abalone19").unwrap();
        assert_eq!(
            (p.epochs, p.lambda_translation, p.lambda_cycle, p.lambda_identity, p.s, p.p_max),
            (250, 0.05, 10.0, 5.0, 16.0, 0.9)
        );
        assert!(p.executable);
    }

    #[test]
    fn unknown_preset_lists_available() {
        let err = load_preset("nope").unwrap_err().to_string();
        assert!(err.contains("yeast4"), "{err}");
        assert!(err.contains("churn"), "{err}");
    }

    #[test]
    fn tree_classifier_rows_are_data_only() {
        assert_eq!(PRESETS.len(), 20);
        for p in PRESETS {
            assert_eq!(p.executable, p.classifier == "linear-svm");
        }
    }
}
