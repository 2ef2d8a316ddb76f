use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{selu, sigmoid};
use crate::error::{Error, Result};

pub const SELU_SCALE: f64 = 1.0507009873554805;
pub const SELU_ALPHA: f64 = 1.6732632423543772;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

/// A fully-connected network. Hidden layers are SELU; the output head is
/// identity or sigmoid. Weight `i` has shape `dims[i] x dims[i+1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub output_activation: OutputActivation,
}

/// Per-parameter gradients, shape-congruent with an [`Mlp`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grad {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Grad {
    pub fn zeros_like(m: &Mlp) -> Self {
        Grad {
            weights: m.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: m.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    /// Accumulates `other` into self; shapes must agree.
    pub fn add(&mut self, other: &Grad) {
        for (a, b) in self.weights.iter_mut().zip(other.weights.iter()) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(other.biases.iter()) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in self.weights.iter_mut() {
            *w *= factor;
        }
        for b in self.biases.iter_mut() {
            *b *= factor;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
///
/// Only activations are stored: the SELU derivative is recovered from the
/// activation value (`λ` on the positive branch, `a + λα` on the negative
/// one), and the sigmoid derivative from the output.
pub struct ForwardCache {
    /// Input to each weight layer: `layer_inputs[0]` is the batch input.
    layer_inputs: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }
}

impl Mlp {
    /// Glorot-uniform weights (±sqrt(6/(fan_in+fan_out))), zero biases.
    pub fn new<R: Rng>(layer_dims: Vec<usize>, output_activation: OutputActivation, rng: &mut R) -> Self {
        assert!(layer_dims.len() >= 2, "need at least input and output dims");
        let mut weights = Vec::with_capacity(layer_dims.len() - 1);
        let mut biases = Vec::with_capacity(layer_dims.len() - 1);
        for pair in layer_dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Array2::from_shape_fn((fan_in, fan_out), |_| {
                limit * (2.0 * rng.random::<f64>() - 1.0)
            });
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Mlp {
            layer_dims,
            weights,
            biases,
            output_activation,
        }
    }

    /// Builds a network from explicit parameters, validating the shape chain.
    pub fn with_parameters(
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::ShapeMismatch(
                "weights and biases must be nonempty and aligned".into(),
            ));
        }
        let mut layer_dims = vec![weights[0].nrows()];
        for (w, b) in weights.iter().zip(biases.iter()) {
            if w.nrows() != *layer_dims.last().unwrap() {
                return Err(Error::ShapeMismatch(format!(
                    "layer input dim {} does not chain with previous output {}",
                    w.nrows(),
                    layer_dims.last().unwrap()
                )));
            }
            if w.ncols() != b.len() {
                return Err(Error::ShapeMismatch(format!(
                    "weight columns {} do not match bias length {}",
                    w.ncols(),
                    b.len()
                )));
            }
            layer_dims.push(w.ncols());
        }
        Ok(Mlp {
            layer_dims,
            weights,
            biases,
            output_activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check_input(&self, x: &Array2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Batch forward pass; rows are processed independently.
    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_input(x)?;
        let last = self.weights.len() - 1;
        let mut a = x.clone();
        for (i, (w, b)) in self.weights.iter().zip(self.biases.iter()).enumerate() {
            let mut z = a.dot(w);
            z += b;
            a = if i < last {
                z.mapv_into(selu)
            } else {
                match self.output_activation {
                    OutputActivation::Identity => z,
                    OutputActivation::Sigmoid => z.mapv_into(sigmoid),
                }
            };
        }
        Ok(a)
    }

    /// Forward pass that keeps the intermediates needed by
    /// [`Mlp::backward_cached`].
    pub fn forward_cached(&self, x: &Array2<f64>) -> Result<ForwardCache> {
        self.check_input(x)?;
        let last = self.weights.len() - 1;
        let mut layer_inputs = Vec::with_capacity(self.weights.len());
        let mut a = x.clone();
        for (i, (w, b)) in self.weights.iter().zip(self.biases.iter()).enumerate() {
            let mut z = a.dot(w);
            z += b;
            layer_inputs.push(a);
            a = if i < last {
                z.mapv_into(selu)
            } else {
                match self.output_activation {
                    OutputActivation::Identity => z,
                    OutputActivation::Sigmoid => z.mapv_into(sigmoid),
                }
            };
        }
        Ok(ForwardCache {
            layer_inputs,
            output: a,
        })
    }

    /// Exact reverse-mode gradients of the forward map contracted with
    /// `upstream` (the gradient at the output). Returns parameter gradients
    /// and the gradient with respect to the input batch.
    pub fn backward_cached(
        &self,
        cache: &ForwardCache,
        upstream: &Array2<f64>,
    ) -> Result<(Grad, Array2<f64>)> {
        if upstream.dim() != cache.output.dim() {
            return Err(Error::ShapeMismatch(format!(
                "upstream {:?} does not match output {:?}",
                upstream.dim(),
                cache.output.dim()
            )));
        }
        let mut grad_weights = vec![Array2::zeros((0, 0)); self.weights.len()];
        let mut grad_biases = vec![Array1::zeros(0); self.weights.len()];

        // Gradient at the output pre-activation.
        let mut delta = match self.output_activation {
            OutputActivation::Identity => upstream.clone(),
            OutputActivation::Sigmoid => {
                let mut d = upstream.clone();
                ndarray::Zip::from(&mut d)
                    .and(&cache.output)
                    .for_each(|u, &y| *u *= y * (1.0 - y));
                d
            }
        };

        for i in (0..self.weights.len()).rev() {
            // gemm into standard-layout outputs keeps every later
            // elementwise pass on the contiguous fast path.
            let a = &cache.layer_inputs[i];
            let mut gw = Array2::zeros((a.ncols(), delta.ncols()));
            general_mat_mul(1.0, &a.t(), &delta, 0.0, &mut gw);
            grad_weights[i] = gw;
            grad_biases[i] = delta.sum_axis(Axis(0));

            let w = &self.weights[i];
            let mut next = Array2::zeros((delta.nrows(), w.nrows()));
            general_mat_mul(1.0, &delta, &w.t(), 0.0, &mut next);
            delta = next;
            if i > 0 {
                // The SELU derivative recovered from the activation value.
                ndarray::Zip::from(&mut delta)
                    .and(&cache.layer_inputs[i])
                    .for_each(|d, &a| {
                        *d *= if a >= 0.0 {
                            SELU_SCALE
                        } else {
                            a + SELU_SCALE * SELU_ALPHA
                        }
                    });
            }
        }
        Ok((
            Grad {
                weights: grad_weights,
                biases: grad_biases,
            },
            delta,
        ))
    }

    /// Convenience wrapper: forward then backward in one call.
    pub fn backward(&self, x: &Array2<f64>, upstream: &Array2<f64>) -> Result<(Grad, Array2<f64>)> {
        let cache = self.forward_cached(x)?;
        self.backward_cached(&cache, upstream)
    }

    /// Gradient with respect to the input batch only; skips the parameter
    /// gradients. Used where the network is held fixed and only acts as a
    /// conduit for upstream gradients.
    pub fn input_gradient(&self, cache: &ForwardCache, upstream: &Array2<f64>) -> Result<Array2<f64>> {
        if upstream.dim() != cache.output.dim() {
            return Err(Error::ShapeMismatch(format!(
                "upstream {:?} does not match output {:?}",
                upstream.dim(),
                cache.output.dim()
            )));
        }
        let mut delta = match self.output_activation {
            OutputActivation::Identity => upstream.clone(),
            OutputActivation::Sigmoid => {
                let mut d = upstream.clone();
                ndarray::Zip::from(&mut d)
                    .and(&cache.output)
                    .for_each(|u, &y| *u *= y * (1.0 - y));
                d
            }
        };
        for i in (0..self.weights.len()).rev() {
            let w = &self.weights[i];
            let mut next = Array2::zeros((delta.nrows(), w.nrows()));
            general_mat_mul(1.0, &delta, &w.t(), 0.0, &mut next);
            delta = next;
            if i > 0 {
                ndarray::Zip::from(&mut delta)
                    .and(&cache.layer_inputs[i])
                    .for_each(|d, &a| {
                        *d *= if a >= 0.0 {
                            SELU_SCALE
                        } else {
                            a + SELU_SCALE * SELU_ALPHA
                        }
                    });
            }
        }
        Ok(delta)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Mlp = serde_json::from_str(s)?;
        // Re-validate the shape chain after deserialization.
        Mlp::with_parameters(m.weights, m.biases, m.output_activation)
    }
}

/// Generator network: hidden sizes 64, 128, 256 with an identity head.
pub fn make_generator<R: Rng>(input_dim: usize, output_dim: usize, rng: &mut R) -> Mlp {
    Mlp::new(
        vec![input_dim, 64, 128, 256, output_dim],
        OutputActivation::Identity,
        rng,
    )
}

/// Discriminator network: hidden sizes 128, 64 with a sigmoid head.
pub fn make_discriminator<R: Rng>(input_dim: usize, rng: &mut R) -> Mlp {
    Mlp::new(
        vec![input_dim, 128, 64, 1],
        OutputActivation::Sigmoid,
        rng,
    )
}
