use ndarray::{Array2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{adam_step, make_discriminator, make_generator, AdamState, Grad, Mlp};

use super::losses::{gan_losses, l1_sign, PROB_FLOOR};

/// RNG stream reserved for sampling the latent prior in `generate`.
const GENERATE_STREAM: u64 = 0x7467_656e;

/// Weights of the regularizing loss terms in the generator objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossCoefficients {
    pub translation: f64,
    pub cycle: f64,
    pub identity: f64,
}

impl LossCoefficients {
    pub fn zero() -> Self {
        LossCoefficients {
            translation: 0.0,
            cycle: 0.0,
            identity: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("translation", self.translation),
            ("cycle", self.cycle),
            ("identity", self.identity),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} coefficient {v} must be finite and nonnegative"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GanMode {
    /// Translation GAN: majority rows as generator inputs, four networks.
    Ttgan,
    /// Standard GAN baseline: noise inputs, forward pair only, no regularizers.
    Vanilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtganConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub coefficients: LossCoefficients,
    pub seed: u64,
    pub mode: GanMode,
}

impl Default for TtganConfig {
    fn default() -> Self {
        TtganConfig {
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-4,
            coefficients: LossCoefficients::zero(),
            seed: 0,
            mode: GanMode::Ttgan,
        }
    }
}

impl TtganConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning rate {} must be finite and nonnegative",
                self.learning_rate
            )));
        }
        self.coefficients.validate()
    }
}

/// JSON has no NaN; uncomputed loss terms round-trip as null.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Per-epoch means of every loss term. Terms not computed in the current
/// mode (or skipped because their coefficient is zero) are NaN.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochLosses {
    pub epoch: usize,
    /// `L_D`: forward discriminator value (maximized).
    pub disc: f64,
    /// `L_G`: forward generator adversarial term.
    pub gen_adversarial: f64,
    /// `L_T`
    #[serde(with = "nan_as_null")]
    pub translation: f64,
    /// `L_C`
    #[serde(with = "nan_as_null")]
    pub cycle: f64,
    /// `L_I`
    #[serde(with = "nan_as_null")]
    pub identity: f64,
    /// Reverse-pair discriminator value.
    #[serde(with = "nan_as_null")]
    pub disc_reverse: f64,
    /// Reverse-pair generator adversarial term.
    #[serde(with = "nan_as_null")]
    pub gen_reverse_adversarial: f64,
    /// Full forward-generator objective:
    /// `L_G + λ_T·L_T + λ_C·L_C + λ_I·L_I` over the computed terms.
    pub gen_total: f64,
}

impl EpochLosses {
    fn non_finite_term(&self) -> Option<&'static str> {
        let named = [
            (self.disc, "discriminator loss (L_D)"),
            (self.gen_adversarial, "generator adversarial loss (L_G)"),
            (self.translation, "translation loss (L_T)"),
            (self.cycle, "cycle-consistency loss (L_C)"),
            (self.identity, "identity loss (L_I)"),
            (self.disc_reverse, "reverse discriminator loss"),
            (self.gen_reverse_adversarial, "reverse generator loss"),
        ];
        named
            .iter()
            .find(|(v, _)| v.is_infinite())
            .map(|(_, name)| *name)
    }
}

/// Writes the loss history as a TSV table
/// (epoch, L_D, L_G, L_T, L_C, L_I, L_D_rev, L_G_rev).
pub fn write_loss_history_tsv<W: std::io::Write>(
    history: &[EpochLosses],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "epoch\tl_d\tl_g\tl_t\tl_c\tl_i\tl_d_rev\tl_g_rev")?;
    for e in history {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.epoch,
            e.disc,
            e.gen_adversarial,
            e.translation,
            e.cycle,
            e.identity,
            e.disc_reverse,
            e.gen_reverse_adversarial
        )?;
    }
    Ok(())
}

/// Trained networks, optimizer states, and the loss history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TtganBundle {
    pub config: TtganConfig,
    /// G: majority → minority.
    pub gen_maj_to_min: Mlp,
    /// D: scores minority-domain samples.
    pub disc_min: Mlp,
    /// G′: minority → majority (ttgan mode only).
    pub gen_min_to_maj: Option<Mlp>,
    /// D′: scores majority-domain samples (ttgan mode only).
    pub disc_maj: Option<Mlp>,
    pub adam_gen: AdamState,
    pub adam_disc: AdamState,
    pub adam_gen_reverse: Option<AdamState>,
    pub adam_disc_reverse: Option<AdamState>,
    pub history: Vec<EpochLosses>,
}

impl TtganBundle {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub(crate) fn sample_minority_indices<R: Rng>(rng: &mut R, n_min: usize, count: usize) -> Vec<usize> {
    if count <= n_min {
        rand::seq::index::sample(rng, n_min, count).into_vec()
    } else {
        // Fewer minority rows than the batch needs: sample with replacement.
        (0..count).map(|_| rng.random_range(0..n_min)).collect()
    }
}

pub(crate) fn standard_normal_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
}

/// Upstream gradient of `-mean log p` over a probability column (used to
/// ascend on `mean log D(real)`); zero where the clamp saturates.
fn neg_log_prob_upstream(p: &Array2<f64>) -> Array2<f64> {
    let n = p.nrows() as f64;
    p.mapv(|v| {
        if v > PROB_FLOOR && v < 1.0 - PROB_FLOOR {
            -1.0 / (n * v)
        } else {
            0.0
        }
    })
}

/// Upstream gradient of `-mean log(1 - p)` (ascent on the fake term) when
/// `sign` is +1, or of `+mean log(1 - p)` (generator descent) when -1.
pub(crate) fn log_one_minus_prob_upstream(p: &Array2<f64>, sign: f64) -> Array2<f64> {
    let n = p.nrows() as f64;
    p.mapv(|v| {
        if v > PROB_FLOOR && v < 1.0 - PROB_FLOOR {
            sign / (n * (1.0 - v))
        } else {
            0.0
        }
    })
}

/// One discriminator update: ascend `mean log D(real) + mean log(1 - D(fake))`.
/// Real and fake rows go through the network as one stacked batch. Returns
/// the loss value before the update.
pub(crate) fn discriminator_step(
    disc: &mut Mlp,
    state: &mut AdamState,
    real: &Array2<f64>,
    fake: &Array2<f64>,
) -> Result<f64> {
    let n_real = real.nrows();
    let stacked = ndarray::concatenate(Axis(0), &[real.view(), fake.view()])
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    let cache = disc.forward_cached(&stacked)?;
    let probs = cache.output();
    let (l_d, _) = gan_losses(
        &probs.as_slice().unwrap()[..n_real],
        &probs.as_slice().unwrap()[n_real..],
    );
    let mut upstream = Array2::zeros(probs.dim());
    let up_real = neg_log_prob_upstream(&probs.slice(ndarray::s![..n_real, ..]).to_owned());
    let up_fake =
        log_one_minus_prob_upstream(&probs.slice(ndarray::s![n_real.., ..]).to_owned(), 1.0);
    upstream.slice_mut(ndarray::s![..n_real, ..]).assign(&up_real);
    upstream.slice_mut(ndarray::s![n_real.., ..]).assign(&up_fake);
    let (grad, _) = disc.backward_cached(&cache, &upstream)?;
    adam_step(disc, &grad, state)?;
    Ok(l_d)
}

/// Loss values computed alongside [`generator_gradients`].
#[derive(Debug, Clone, Copy)]
pub struct GenGradients {
    pub gen_adversarial: f64,
    pub translation: f64,
    pub cycle: f64,
    pub identity: f64,
    pub gen_reverse_adversarial: f64,
}

/// Gradients of both generators' objectives at the current parameters, with
/// both discriminators held fixed.
///
/// G minimizes `L_G + λ_T·L_T + λ_C·L_C + λ_I·L_I`; G′ minimizes its own
/// adversarial term plus `λ_C·L_C + λ_I·L_I`. Loss terms whose coefficient is
/// zero are skipped and reported as NaN (except `L_T`, which is free to
/// evaluate).
pub fn generator_gradients(
    gen_maj_to_min: &Mlp,
    gen_min_to_maj: &Mlp,
    disc_min: &Mlp,
    disc_maj: &Mlp,
    z_majority: &Array2<f64>,
    x_min: &Array2<f64>,
    coefficients: &LossCoefficients,
) -> Result<(Grad, Grad, GenGradients)> {
    let cache_gz = gen_maj_to_min.forward_cached(z_majority)?;
    let rev_input = reverse_stack_input(x_min, cache_gz.output(), z_majority, coefficients)?;
    let cache_rev = gen_min_to_maj.forward_cached(&rev_input)?;
    generator_gradients_cached(
        gen_maj_to_min,
        gen_min_to_maj,
        disc_min,
        disc_maj,
        z_majority,
        x_min,
        &cache_gz,
        &cache_rev,
        coefficients,
    )
}

/// Input blocks for the reverse generator’s single stacked pass:
/// `[x_min]`, then `[G(z)]` when the cycle term is on, then `[z]` when the
/// identity term is on. One forward and one backward through G′ cover the
/// reverse adversarial, cycle-B, and identity-B terms.
pub(crate) fn reverse_stack_input(
    x_min: &Array2<f64>,
    gz: &Array2<f64>,
    z_majority: &Array2<f64>,
    coefficients: &LossCoefficients,
) -> Result<Array2<f64>> {
    let mut blocks = vec![x_min.view()];
    if coefficients.cycle != 0.0 {
        blocks.push(gz.view());
    }
    if coefficients.identity != 0.0 {
        blocks.push(z_majority.view());
    }
    ndarray::concatenate(Axis(0), &blocks).map_err(|e| Error::ShapeMismatch(e.to_string()))
}

/// Mean-per-row L1 distance between two equal-shape views.
fn l1_view(a: ndarray::ArrayView2<f64>, b: ndarray::ArrayView2<f64>) -> f64 {
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        total += (x - y).abs();
    }
    total / a.nrows() as f64
}

/// `scale * sign(a - b) / a_rows` accumulated into `acc`.
fn add_l1_upstream_view(
    mut acc: ndarray::ArrayViewMut2<f64>,
    a: ndarray::ArrayView2<f64>,
    b: ndarray::ArrayView2<f64>,
    scale: f64,
) {
    let per_row = scale / a.nrows() as f64;
    Zip::from(&mut acc).and(&a).and(&b).for_each(|u, &x, &y| {
        *u += per_row * l1_sign(x - y);
    });
}

/// [`generator_gradients`] with the `G(z)` and stacked-G′ forward caches
/// supplied by the caller (the training loop reuses the discriminator-step
/// forwards, which were computed at the same parameters).
#[allow(clippy::too_many_arguments)]
fn generator_gradients_cached(
    gen_maj_to_min: &Mlp,
    gen_min_to_maj: &Mlp,
    disc_min: &Mlp,
    disc_maj: &Mlp,
    z_majority: &Array2<f64>,
    x_min: &Array2<f64>,
    cache_gz: &crate::numerics::ForwardCache,
    cache_rev_stack: &crate::numerics::ForwardCache,
    coefficients: &LossCoefficients,
) -> Result<(Grad, Grad, GenGradients)> {
    use ndarray::s;

    let lambda_t = coefficients.translation;
    let lambda_c = coefficients.cycle;
    let lambda_i = coefficients.identity;
    let rows = z_majority.nrows();

    let gz = cache_gz.output();
    let rev_out = cache_rev_stack.output();
    let gm = rev_out.slice(s![..rows, ..]);
    let cyc_b_block = lambda_c != 0.0;
    let cyc_b = cyc_b_block.then(|| rev_out.slice(s![rows..2 * rows, ..]));
    let id_maj = (lambda_i != 0.0).then(|| {
        let start = if cyc_b_block { 2 * rows } else { rows };
        rev_out.slice(s![start..start + rows, ..])
    });

    // Adversarial terms; upstreams flow through the (fixed) discriminators.
    let cache_q = disc_min.forward_cached(gz)?;
    let (_, l_g) = gan_losses(&[], cache_q.output().as_slice().unwrap());
    let up_q = log_one_minus_prob_upstream(cache_q.output(), -1.0);
    let mut upstream_gz = disc_min.input_gradient(&cache_q, &up_q)?;

    let gm_owned = gm.to_owned();
    let cache_q_rev = disc_maj.forward_cached(&gm_owned)?;
    let (_, l_g_rev) = gan_losses(&[], cache_q_rev.output().as_slice().unwrap());
    let up_q_rev = log_one_minus_prob_upstream(cache_q_rev.output(), -1.0);
    let rev_adv_input_grad = disc_maj.input_gradient(&cache_q_rev, &up_q_rev)?;

    // Translation: defined on the majority batch only.
    let l_t = l1_view(z_majority.view(), gz.view());
    if lambda_t != 0.0 {
        add_l1_upstream_view(upstream_gz.view_mut(), gz.view(), z_majority.view(), lambda_t);
    }

    // Forward generator’s extra pass: `[G′(x_min)]` for the cycle term and
    // `[x_min]` for the identity term, stacked.
    let mut g_extra_blocks = Vec::new();
    if lambda_c != 0.0 {
        g_extra_blocks.push(gm);
    }
    if lambda_i != 0.0 {
        g_extra_blocks.push(x_min.view());
    }
    let mut l_c = f64::NAN;
    let mut l_i = f64::NAN;
    let mut grad_g_extra: Option<Grad> = None;
    let mut input_grad_gm: Option<Array2<f64>> = None;

    if !g_extra_blocks.is_empty() {
        let extra_input = ndarray::concatenate(Axis(0), &g_extra_blocks)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        let cache_extra = gen_maj_to_min.forward_cached(&extra_input)?;
        let extra_out = cache_extra.output();
        let mut upstream_extra = Array2::zeros(extra_out.dim());
        let mut off = 0;
        if lambda_c != 0.0 {
            let cyc_a = extra_out.slice(s![..rows, ..]);
            l_c = l1_view(cyc_a, x_min.view()) + l1_view(cyc_b.unwrap(), z_majority.view());
            add_l1_upstream_view(
                upstream_extra.slice_mut(s![..rows, ..]),
                cyc_a,
                x_min.view(),
                lambda_c,
            );
            off = rows;
        }
        if lambda_i != 0.0 {
            let id_min = extra_out.slice(s![off..off + rows, ..]);
            l_i = l1_view(id_min, x_min.view()) + l1_view(id_maj.unwrap(), z_majority.view());
            add_l1_upstream_view(
                upstream_extra.slice_mut(s![off..off + rows, ..]),
                id_min,
                x_min.view(),
                lambda_i,
            );
        }
        let (grad, input_grad) = gen_maj_to_min.backward_cached(&cache_extra, &upstream_extra)?;
        grad_g_extra = Some(grad);
        if lambda_c != 0.0 {
            input_grad_gm = Some(input_grad.slice(s![..rows, ..]).to_owned());
        }
    }

    // Reverse generator: one stacked backward covers all of its terms.
    let mut upstream_rev = Array2::zeros(rev_out.dim());
    {
        let mut head = upstream_rev.slice_mut(s![..rows, ..]);
        head.assign(&rev_adv_input_grad);
        if let Some(extra) = &input_grad_gm {
            head += extra;
        }
    }
    if let Some(cyc_b) = cyc_b {
        add_l1_upstream_view(
            upstream_rev.slice_mut(s![rows..2 * rows, ..]),
            cyc_b,
            z_majority.view(),
            lambda_c,
        );
    }
    if let Some(id_maj) = id_maj {
        let start = if cyc_b_block { 2 * rows } else { rows };
        add_l1_upstream_view(
            upstream_rev.slice_mut(s![start..start + rows, ..]),
            id_maj,
            z_majority.view(),
            lambda_i,
        );
    }
    let (grad_g_rev, rev_input_grad) =
        gen_min_to_maj.backward_cached(cache_rev_stack, &upstream_rev)?;
    if cyc_b_block {
        // Cycle B reaches G through G′’s input.
        upstream_gz += &rev_input_grad.slice(s![rows..2 * rows, ..]);
    }

    let (mut grad_g, _) = gen_maj_to_min.backward_cached(cache_gz, &upstream_gz)?;
    if let Some(extra) = grad_g_extra {
        grad_g.add(&extra);
    }

    Ok((
        grad_g,
        grad_g_rev,
        GenGradients {
            gen_adversarial: l_g,
            translation: l_t,
            cycle: l_c,
            identity: l_i,
            gen_reverse_adversarial: l_g_rev,
        },
    ))
}

struct EpochAccumulator {
    sums: [f64; 7],
    batches: usize,
}

impl EpochAccumulator {
    fn new() -> Self {
        EpochAccumulator {
            sums: [0.0; 7],
            batches: 0,
        }
    }

    fn push(&mut self, values: [f64; 7]) {
        for (s, v) in self.sums.iter_mut().zip(values) {
            *s += v;
        }
        self.batches += 1;
    }

    fn finish(&self, epoch: usize, coefficients: &LossCoefficients) -> EpochLosses {
        let n = self.batches as f64;
        let mean = |i: usize| self.sums[i] / n;
        let (l_g, l_t, l_c, l_i) = (mean(1), mean(2), mean(3), mean(4));
        let mut gen_total = l_g;
        if coefficients.translation != 0.0 {
            gen_total += coefficients.translation * l_t;
        }
        if coefficients.cycle != 0.0 {
            gen_total += coefficients.cycle * l_c;
        }
        if coefficients.identity != 0.0 {
            gen_total += coefficients.identity * l_i;
        }
        EpochLosses {
            epoch,
            disc: mean(0),
            gen_adversarial: l_g,
            translation: l_t,
            cycle: l_c,
            identity: l_i,
            disc_reverse: mean(5),
            gen_reverse_adversarial: mean(6),
            gen_total,
        }
    }
}

/// Trains the translation GAN (or the vanilla baseline) on preprocessed
/// class matrices. Fully deterministic given the config seed.
pub fn train(x_maj: &Array2<f64>, x_min: &Array2<f64>, cfg: &TtganConfig) -> Result<TtganBundle> {
    cfg.validate()?;
    if x_maj.nrows() == 0 || x_min.nrows() == 0 {
        return Err(Error::InvalidDataset(
            "both class matrices must be nonempty".into(),
        ));
    }
    if x_maj.ncols() != x_min.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "majority width {} != minority width {}",
            x_maj.ncols(),
            x_min.ncols()
        )));
    }
    let width = x_maj.ncols();
    let n_maj = x_maj.nrows();
    let n_min = x_min.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut gen = make_generator(width, width, &mut rng);
    let mut disc = make_discriminator(width, &mut rng);
    let (mut gen_rev, mut disc_rev) = match cfg.mode {
        GanMode::Ttgan => (
            Some(make_generator(width, width, &mut rng)),
            Some(make_discriminator(width, &mut rng)),
        ),
        GanMode::Vanilla => (None, None),
    };

    let mut adam_gen = AdamState::new(&gen, cfg.learning_rate);
    let mut adam_disc = AdamState::new(&disc, cfg.learning_rate);
    let mut adam_gen_rev = gen_rev.as_ref().map(|g| AdamState::new(g, cfg.learning_rate));
    let mut adam_disc_rev = disc_rev.as_ref().map(|d| AdamState::new(d, cfg.learning_rate));

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut majority_order: Vec<usize> = (0..n_maj).collect();

    for epoch in 0..cfg.epochs {
        let mut acc = EpochAccumulator::new();
        if cfg.mode == GanMode::Ttgan {
            majority_order.shuffle(&mut rng);
        }

        let mut start = 0;
        while start < n_maj {
            let end = (start + cfg.batch_size).min(n_maj);
            let bsz = end - start;
            let min_idx = sample_minority_indices(&mut rng, n_min, bsz);
            let xm = x_min.select(Axis(0), &min_idx);

            match cfg.mode {
                GanMode::Ttgan => {
                    let z = x_maj.select(Axis(0), &majority_order[start..end]);

                    // Generator forwards, shared with the generator step
                    // below (the generators do not change in between).
                    let gen_rev_ref = gen_rev.as_mut().unwrap();
                    let disc_rev_ref = disc_rev.as_mut().unwrap();
                    let cache_gz = gen.forward_cached(&z)?;
                    let rev_input =
                        reverse_stack_input(&xm, cache_gz.output(), &z, &cfg.coefficients)?;
                    let cache_rev = gen_rev_ref.forward_cached(&rev_input)?;
                    let gm = cache_rev
                        .output()
                        .slice(ndarray::s![..xm.nrows(), ..])
                        .to_owned();

                    // Forward pair discriminator: real minority vs G(z).
                    let l_d =
                        discriminator_step(&mut disc, &mut adam_disc, &xm, cache_gz.output())?;

                    // Reverse pair discriminator: real majority vs G′(x_min).
                    let l_d_rev = discriminator_step(
                        disc_rev_ref,
                        adam_disc_rev.as_mut().unwrap(),
                        &z,
                        &gm,
                    )?;

                    // Joint generator update from the same parameter state.
                    let (grad_g, grad_g_rev, terms) = generator_gradients_cached(
                        &gen,
                        gen_rev_ref,
                        &disc,
                        disc_rev_ref,
                        &z,
                        &xm,
                        &cache_gz,
                        &cache_rev,
                        &cfg.coefficients,
                    )?;
                    adam_step(&mut gen, &grad_g, &mut adam_gen)?;
                    adam_step(gen_rev_ref, &grad_g_rev, adam_gen_rev.as_mut().unwrap())?;

                    acc.push([
                        l_d,
                        terms.gen_adversarial,
                        terms.translation,
                        terms.cycle,
                        terms.identity,
                        l_d_rev,
                        terms.gen_reverse_adversarial,
                    ]);
                }
                GanMode::Vanilla => {
                    let z = standard_normal_matrix(bsz, width, &mut rng);

                    let cache_gz = gen.forward_cached(&z)?;
                    let l_d =
                        discriminator_step(&mut disc, &mut adam_disc, &xm, cache_gz.output())?;

                    // Generator: minimize mean log(1 - D(G(z))).
                    let cache_q = disc.forward_cached(cache_gz.output())?;
                    let (_, l_g) = gan_losses(&[], cache_q.output().as_slice().unwrap());
                    let up_q = log_one_minus_prob_upstream(cache_q.output(), -1.0);
                    let upstream_gz = disc.input_gradient(&cache_q, &up_q)?;
                    let (grad_g, _) = gen.backward_cached(&cache_gz, &upstream_gz)?;
                    adam_step(&mut gen, &grad_g, &mut adam_gen)?;

                    acc.push([l_d, l_g, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN]);
                }
            }
            start = end;
        }

        let losses = acc.finish(epoch, &cfg.coefficients);
        if let Some(term) = losses.non_finite_term() {
            return Err(Error::NonFinite(format!("{term} at epoch {epoch}")));
        }
        history.push(losses);
    }

    Ok(TtganBundle {
        config: *cfg,
        gen_maj_to_min: gen,
        disc_min: disc,
        gen_min_to_maj: gen_rev,
        disc_maj: disc_rev,
        adam_gen,
        adam_disc,
        adam_gen_reverse: adam_gen_rev,
        adam_disc_reverse: adam_disc_rev,
        history,
    })
}

/// Synthesizes minority samples. In ttgan mode this is `G(X_maj)` (one row
/// per majority row, input order); vanilla mode draws `|X_maj|` latent prior
/// samples from a dedicated RNG stream so the call is pure.
pub fn generate(bundle: &TtganBundle, x_maj: &Array2<f64>) -> Result<Array2<f64>> {
    match bundle.config.mode {
        GanMode::Ttgan => bundle.gen_maj_to_min.forward(x_maj),
        GanMode::Vanilla => {
            let mut rng = ChaCha8Rng::seed_from_u64(bundle.config.seed);
            rng.set_stream(GENERATE_STREAM);
            let z = standard_normal_matrix(
                x_maj.nrows(),
                bundle.gen_maj_to_min.input_dim(),
                &mut rng,
            );
            bundle.gen_maj_to_min.forward(&z)
        }
    }
}

