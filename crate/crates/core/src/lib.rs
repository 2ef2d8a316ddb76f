//! Translation-GAN oversampling for binary class-imbalanced tabular data.
//!
//! The crate covers the full pipeline: dataset ingestion (KEEL / CSV),
//! preprocessing, a small fully-connected network stack with exact
//! backpropagation, the translation GAN itself, synthetic-sample selection,
//! classical resampling baselines, a class-weighted linear SVM, ranking
//! metrics, and a config-driven experiment harness.

pub mod classify;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod preprocess;
pub mod resample;
pub mod ttgan;

pub use error::{Error, Result};
