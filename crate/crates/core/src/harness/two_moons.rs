use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureMeta};
use crate::error::{Error, Result};

/// Two interleaving half-circles with Gaussian noise; the upper arc is the
/// majority class, the lower arc the minority.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoMoonsSpec {
    pub n_majority: usize,
    pub n_minority: usize,
    pub noise: f64,
    pub seed: u64,
}

/// Positions are evenly spaced along each arc, so with `noise = 0` every
/// majority point lies exactly on the unit upper semicircle.
pub fn make_two_moons(spec: &TwoMoonsSpec) -> Result<Dataset> {
    if spec.n_majority == 0 || spec.n_minority == 0 {
        return Err(Error::InvalidConfig(
            "both moon arcs need at least one point".into(),
        ));
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise {} must be finite and nonnegative",
            spec.noise
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_majority + spec.n_minority;
    let mut x = Array2::<f64>::zeros((n, 2));
    let mut y = Vec::with_capacity(n);

    let arc = |i: usize, count: usize| {
        if count == 1 {
            0.0
        } else {
            std::f64::consts::PI * i as f64 / (count - 1) as f64
        }
    };
    for i in 0..spec.n_majority {
        let t = arc(i, spec.n_majority);
        x[[i, 0]] = t.cos();
        x[[i, 1]] = t.sin();
        y.push(0u8);
    }
    for i in 0..spec.n_minority {
        let t = arc(i, spec.n_minority);
        let r = spec.n_majority + i;
        x[[r, 0]] = 1.0 - t.cos();
        x[[r, 1]] = 1.0 - t.sin() - 0.5;
        y.push(1u8);
    }
    if spec.noise > 0.0 {
        for v in x.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += spec.noise * e;
        }
    }
    Dataset::new(
        "two-moons",
        x,
        y,
        vec![FeatureMeta::numeric("x"), FeatureMeta::numeric("y")],
    )
}
