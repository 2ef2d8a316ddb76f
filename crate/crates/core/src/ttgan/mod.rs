//! The tabular translation GAN.
//!
//! Two generator/discriminator pairs play the usual minimax game, but the
//! forward generator is fed real majority rows instead of noise and its
//! objective carries three extra L1 regularizers: a translation term tying
//! each output to its input, a cycle term making the two generators rough
//! inverses, and an identity term penalizing movement of rows already in the
//! target domain. `vanilla` mode drops the reverse pair and the regularizers
//! and feeds standard-normal noise, giving the classic GAN baseline.

mod losses;
mod train;

pub use losses::{
    cycle_loss, gan_losses, generator_objective, identity_loss, l1_row_mean, translation_loss,
    PROB_FLOOR,
};
pub use train::{
    generate, generator_gradients, train, write_loss_history_tsv, EpochLosses, GanMode,
    GenGradients, LossCoefficients, TtganBundle, TtganConfig,
};
