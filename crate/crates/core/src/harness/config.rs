use serde::{Deserialize, Serialize};

use crate::classify::LinearSvmConfig;
use crate::error::{Error, Result};
use crate::preprocess::PreprocessConfig;
use crate::resample::{SelectionConfig, SelectionVariant};
use crate::ttgan::{GanMode, LossCoefficients, TtganConfig};

use super::presets::load_preset;

/// Where the dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum DatasetSource {
    Keel {
        path: String,
    },
    Csv {
        path: String,
        label_column: String,
        minority_label: String,
    },
    TwoMoons {
        n_majority: usize,
        n_minority: usize,
        noise: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rw,
    Ros,
    Smote,
    Bsmote,
    VanillaGan,
    Ttgan,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rw => "rw",
            Method::Ros => "ros",
            Method::Smote => "smote",
            Method::Bsmote => "bsmote",
            Method::VanillaGan => "vanilla_gan",
            Method::Ttgan => "ttgan",
        }
    }

    pub fn all() -> Vec<Method> {
        vec![
            Method::Rw,
            Method::Ros,
            Method::Smote,
            Method::Bsmote,
            Method::VanillaGan,
            Method::Ttgan,
        ]
    }
}

/// Split fractions; the per-run seed comes from the experiment seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.6,
            val_fraction: 0.2,
            test_fraction: 0.2,
            stratified: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub recall_floor: f64,
    pub output_dir: Option<String>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            methods: Method::all(),
            seeds: vec![0, 1, 2, 3, 4],
            recall_floor: 0.4,
            output_dir: None,
        }
    }
}

/// GAN hyperparameters; `preset` fills any field left unset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TtganSection {
    pub preset: Option<String>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub lambda_translation: Option<f64>,
    pub lambda_cycle: Option<f64>,
    pub lambda_identity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionSection {
    pub s: Option<f64>,
    pub p_max: Option<f64>,
    pub variant: Option<SelectionVariant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteSection {
    pub k: usize,
}

impl Default for SmoteSection {
    fn default() -> Self {
        SmoteSection { k: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BsmoteSection {
    pub k: usize,
    pub m: usize,
}

impl Default for BsmoteSection {
    fn default() -> Self {
        BsmoteSection { k: 5, m: 10 }
    }
}

/// Value grids for the `grid` subcommand; empty lists mean "keep the
/// resolved single value".
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    pub epochs: Vec<usize>,
    pub lambda_translation: Vec<f64>,
    pub lambda_cycle: Vec<f64>,
    pub lambda_identity: Vec<f64>,
    pub s: Vec<f64>,
    pub p_max: Vec<f64>,
}

/// The whole experiment, loadable from one TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub svm: LinearSvmConfig,
    #[serde(default)]
    pub ttgan: TtganSection,
    #[serde(default)]
    pub selection: SelectionSection,
    #[serde(default)]
    pub smote: SmoteSection,
    #[serde(default)]
    pub bsmote: BsmoteSection,
    #[serde(default)]
    pub grid: GridSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.methods.is_empty() {
            return Err(Error::InvalidConfig("need at least one method".into()));
        }
        if self.experiment.seeds.is_empty() {
            return Err(Error::InvalidConfig("need at least one seed".into()));
        }
        if !(self.experiment.recall_floor > 0.0 && self.experiment.recall_floor <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "recall floor {} must lie in (0, 1]",
                self.experiment.recall_floor
            )));
        }
        let s = &self.split;
        crate::data::SplitSpec::new(
            s.train_fraction,
            s.val_fraction,
            s.test_fraction,
            s.stratified,
            0,
        )?;
        if let Some(name) = &self.ttgan.preset {
            let preset = load_preset(name)?;
            if !preset.executable {
                return Err(Error::InvalidConfig(format!(
                    "preset `{name}` is tuned for classifier `{}` and ships as data only",
                    preset.classifier
                )));
            }
        }
        Ok(())
    }

    /// GAN configuration after preset resolution: defaults, overridden by the
    /// preset when one is named, overridden by explicit keys. The seed and
    /// mode are filled per run.
    pub fn resolved_ttgan(&self, mode: GanMode, seed: u64) -> Result<TtganConfig> {
        let preset = match &self.ttgan.preset {
            Some(name) => Some(load_preset(name)?),
            None => None,
        };
        let base = TtganConfig::default();
        Ok(TtganConfig {
            epochs: self
                .ttgan
                .epochs
                .or(preset.map(|p| p.epochs))
                .unwrap_or(base.epochs),
            batch_size: self.ttgan.batch_size.unwrap_or(base.batch_size),
            learning_rate: self.ttgan.learning_rate.unwrap_or(base.learning_rate),
            coefficients: match mode {
                // The vanilla baseline trains the plain adversarial objective.
                GanMode::Vanilla => LossCoefficients::zero(),
                GanMode::Ttgan => LossCoefficients {
                    translation: self
                        .ttgan
                        .lambda_translation
                        .or(preset.map(|p| p.lambda_translation))
                        .unwrap_or(0.0),
                    cycle: self
                        .ttgan
                        .lambda_cycle
                        .or(preset.map(|p| p.lambda_cycle))
                        .unwrap_or(0.0),
                    identity: self
                        .ttgan
                        .lambda_identity
                        .or(preset.map(|p| p.lambda_identity))
                        .unwrap_or(0.0),
                },
            },
            seed,
            mode,
        })
    }

    /// Selection configuration after preset resolution.
    pub fn resolved_selection(&self) -> Result<SelectionConfig> {
        let preset = match &self.ttgan.preset {
            Some(name) => Some(load_preset(name)?),
            None => None,
        };
        Ok(SelectionConfig {
            p_max: self
                .selection
                .p_max
                .or(preset.map(|p| p.p_max))
                .unwrap_or(1.0),
            s: self.selection.s.or(preset.map(|p| p.s)).unwrap_or(1.0),
            variant: self
                .selection
                .variant
                .unwrap_or(SelectionVariant::UpperBound),
        })
    }
}
