use ndarray::Array2;

use crate::error::{Error, Result};
use crate::numerics::Mlp;

use super::train::LossCoefficients;

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` before logs.
pub const PROB_FLOOR: f64 = 1e-12;

#[inline]
pub(crate) fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// Sign convention for L1 subgradients: sign(0) = 0.
#[inline]
pub(crate) fn l1_sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adversarial loss values from discriminator outputs.
///
/// `L_D = mean log D(real) + mean log(1 - D(fake))` (maximized by the
/// discriminator); `L_G = mean log(1 - D(fake))` (minimized by the
/// generator).
pub fn gan_losses(d_real: &[f64], d_fake: &[f64]) -> (f64, f64) {
    let real_term = if d_real.is_empty() {
        0.0
    } else {
        d_real.iter().map(|&p| clamp_prob(p).ln()).sum::<f64>() / d_real.len() as f64
    };
    let fake_term = if d_fake.is_empty() {
        0.0
    } else {
        d_fake
            .iter()
            .map(|&p| (1.0 - clamp_prob(p)).ln())
            .sum::<f64>()
            / d_fake.len() as f64
    };
    (real_term + fake_term, fake_term)
}

/// Mean over rows of the per-row L1 distance between two equal-shape batches.
pub fn l1_row_mean(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        total += (x - y).abs();
    }
    total / a.nrows() as f64
}

/// Translation loss: mean ‖z − G(z)‖₁ over the batch, from precomputed G(z).
pub fn translation_loss(z: &Array2<f64>, gz: &Array2<f64>) -> Result<f64> {
    if z.dim() != gz.dim() {
        return Err(Error::ShapeMismatch(format!(
            "translation loss inputs {:?} vs {:?}",
            z.dim(),
            gz.dim()
        )));
    }
    Ok(l1_row_mean(z, gz))
}

/// Cycle-consistency loss:
/// mean ‖G(G′(x_min)) − x_min‖₁ + mean ‖G′(G(x_maj)) − x_maj‖₁.
pub fn cycle_loss(
    x_min: &Array2<f64>,
    x_maj: &Array2<f64>,
    gen_maj_to_min: &Mlp,
    gen_min_to_maj: &Mlp,
) -> Result<f64> {
    let round_min = gen_maj_to_min.forward(&gen_min_to_maj.forward(x_min)?)?;
    let round_maj = gen_min_to_maj.forward(&gen_maj_to_min.forward(x_maj)?)?;
    Ok(l1_row_mean(&round_min, x_min) + l1_row_mean(&round_maj, x_maj))
}

/// Identity loss: mean ‖G(x_min) − x_min‖₁ + mean ‖G′(x_maj) − x_maj‖₁.
pub fn identity_loss(
    x_min: &Array2<f64>,
    x_maj: &Array2<f64>,
    gen_maj_to_min: &Mlp,
    gen_min_to_maj: &Mlp,
) -> Result<f64> {
    let id_min = gen_maj_to_min.forward(x_min)?;
    let id_maj = gen_min_to_maj.forward(x_maj)?;
    Ok(l1_row_mean(&id_min, x_min) + l1_row_mean(&id_maj, x_maj))
}

/// The forward generator's full objective value,
/// `L_G + λ_T·L_T + λ_C·L_C + λ_I·L_I`, with the discriminator and reverse
/// generator held fixed. This is the scalar that
/// [`generator_gradients`](super::generator_gradients) differentiates, so
/// finite differences of this function check those gradients.
pub fn generator_objective(
    gen_maj_to_min: &Mlp,
    gen_min_to_maj: &Mlp,
    disc_min: &Mlp,
    z_majority: &Array2<f64>,
    x_min: &Array2<f64>,
    coefficients: &LossCoefficients,
) -> Result<f64> {
    let gz = gen_maj_to_min.forward(z_majority)?;
    let q = disc_min.forward(&gz)?;
    let (_, l_g) = gan_losses(&[], q.as_slice().unwrap());
    let mut total = l_g;
    if coefficients.translation != 0.0 {
        total += coefficients.translation * translation_loss(z_majority, &gz)?;
    }
    if coefficients.cycle != 0.0 {
        total += coefficients.cycle
            * cycle_loss(x_min, z_majority, gen_maj_to_min, gen_min_to_maj)?;
    }
    if coefficients.identity != 0.0 {
        total += coefficients.identity
            * identity_loss(x_min, z_majority, gen_maj_to_min, gen_min_to_maj)?;
    }
    Ok(total)
}
