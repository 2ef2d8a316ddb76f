//! Minimal neural-network core: dense layers with SELU hidden units,
//! identity or sigmoid output heads, exact reverse-mode gradients, and Adam.
//!
//! Everything is `f64` and deterministic given a seeded RNG.

mod adam;
mod mlp;

pub use adam::{adam_step, AdamState};
pub use mlp::{
    make_discriminator, make_generator, ForwardCache, Grad, Mlp, OutputActivation, SELU_ALPHA,
    SELU_SCALE,
};

/// SELU activation with the standard published constants.
#[inline]
pub fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_SCALE * x
    } else {
        SELU_SCALE * SELU_ALPHA * (x.exp() - 1.0)
    }
}

/// SELU derivative; the value at exactly 0 is the positive-branch slope.
#[inline]
pub fn selu_prime(x: f64) -> f64 {
    if x >= 0.0 {
        SELU_SCALE
    } else {
        SELU_SCALE * SELU_ALPHA * x.exp()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
