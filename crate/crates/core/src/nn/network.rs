//! Dense feed-forward network with a covariate/treatment input partition.
//!
//! Parameters live in one flat `Vec<f64>`. Layer `l` owns a contiguous block:
//! its row-major weight matrix of shape `(output_width, input_width)` followed
//! by its bias vector. The input columns of the first layer are
//! `[x_0, .., x_{d-1}, t]`. When `concat_to_all_layers` is set, every later
//! layer sees `[h_prev, x_0, .., x_{d-1}, t]`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::distr::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Swish,
    Identity,
}

/// Logistic function, evaluated without overflow on either tail.
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `z * logistic(z)`.
#[inline]
pub fn swish(z: f64) -> f64 {
    z * logistic(z)
}

/// Derivative of [`swish`]: `s(z) * (1 + z * (1 - s(z)))` with `s` the logistic.
#[inline]
pub fn swish_derivative(z: f64) -> f64 {
    let s = logistic(z);
    s * (1.0 + z * (1.0 - s))
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Swish => swish(z),
            Activation::Identity => z,
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Swish => swish_derivative(z),
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn param_count(&self) -> usize {
        self.input_width * self.output_width + self.output_width
    }
}

/// Shape of a regression network: hidden widths plus how inputs are wired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub covariate_width: usize,
    pub hidden_widths: Vec<usize>,
    pub hidden_activation: Activation,
    pub concat_to_all_layers: bool,
}

impl Architecture {
    pub fn new(covariate_width: usize, hidden_widths: Vec<usize>) -> Self {
        Self {
            covariate_width,
            hidden_widths,
            hidden_activation: Activation::Swish,
            concat_to_all_layers: false,
        }
    }

    /// Layer specs implied by this architecture; the output layer is a single
    /// identity unit.
    pub fn layer_specs(&self) -> Result<Vec<LayerSpec>> {
        if self.covariate_width == 0 {
            return Err(Error::InvalidConfig("covariate width must be >= 1".into()));
        }
        if self.hidden_widths.contains(&0) {
            return Err(Error::InvalidConfig("hidden widths must be >= 1".into()));
        }
        let input = self.covariate_width + 1;
        let mut specs = Vec::with_capacity(self.hidden_widths.len() + 1);
        let mut prev = 0usize;
        for (i, &w) in self.hidden_widths.iter().enumerate() {
            let input_width = if i == 0 {
                input
            } else if self.concat_to_all_layers {
                prev + input
            } else {
                prev
            };
            specs.push(LayerSpec {
                input_width,
                output_width: w,
                activation: self.hidden_activation,
            });
            prev = w;
        }
        let input_width = if specs.is_empty() {
            input
        } else if self.concat_to_all_layers {
            prev + input
        } else {
            prev
        };
        specs.push(LayerSpec {
            input_width,
            output_width: 1,
            activation: Activation::Identity,
        });
        Ok(specs)
    }
}

/// How treatment-input edges are initialised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreatmentInit {
    Zero,
    Uniform(f64),
}

#[derive(Debug, Clone)]
pub struct Network {
    covariate_width: usize,
    concat_to_all_layers: bool,
    layers: Vec<LayerSpec>,
    offsets: Vec<usize>,
    params: Vec<f64>,
    version: u64,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.covariate_width == other.covariate_width
            && self.concat_to_all_layers == other.concat_to_all_layers
            && self.layers == other.layers
            && self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Per-layer activations recorded by a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    /// Input matrix seen by each layer, `(batch, input_width)`.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of each layer, `(batch, output_width)`.
    pre_activations: Vec<Array2<f64>>,
    predictions: Array1<f64>,
}

impl ForwardCache {
    pub fn predictions(&self) -> &Array1<f64> {
        &self.predictions
    }

    pub fn batch_len(&self) -> usize {
        self.predictions.len()
    }
}

impl Network {
    /// Builds a network from explicit layer specs with all parameters zero.
    pub fn from_layers(
        covariate_width: usize,
        concat_to_all_layers: bool,
        layers: Vec<LayerSpec>,
    ) -> Result<Self> {
        if covariate_width == 0 {
            return Err(Error::InvalidConfig("covariate width must be >= 1".into()));
        }
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        let input = covariate_width + 1;
        for (i, layer) in layers.iter().enumerate() {
            if layer.input_width == 0 || layer.output_width == 0 {
                return Err(Error::InvalidConfig(format!("layer {i} has a zero width")));
            }
            let expected = if i == 0 {
                input
            } else if concat_to_all_layers {
                layers[i - 1].output_width + input
            } else {
                layers[i - 1].output_width
            };
            if layer.input_width != expected {
                return Err(Error::InvalidConfig(format!(
                    "layer {i} input width {} incompatible with expected {expected}",
                    layer.input_width
                )));
            }
        }
        let last = layers.last().unwrap();
        if last.output_width != 1 || last.activation != Activation::Identity {
            return Err(Error::InvalidConfig(
                "output layer must be a single identity unit".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(layers.len());
        let mut total = 0;
        for layer in &layers {
            offsets.push(total);
            total += layer.param_count();
        }
        Ok(Self {
            covariate_width,
            concat_to_all_layers,
            layers,
            offsets,
            params: vec![0.0; total],
            version: 0,
        })
    }

    pub fn zeros(arch: &Architecture) -> Result<Self> {
        Self::from_layers(
            arch.covariate_width,
            arch.concat_to_all_layers,
            arch.layer_specs()?,
        )
    }

    /// Glorot-uniform weights, zero biases, treatment edges per `treatment`.
    pub fn init<R: Rng + ?Sized>(
        arch: &Architecture,
        treatment: TreatmentInit,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(arch)?;
        for l in 0..net.layers.len() {
            let spec = net.layers[l];
            let limit = (6.0 / (spec.input_width + spec.output_width) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            let start = net.offsets[l];
            for w in &mut net.params[start..start + spec.input_width * spec.output_width] {
                *w = dist.sample(rng);
            }
        }
        net.init_treatment_edges(treatment, rng);
        Ok(net)
    }

    /// Overwrites every treatment-input edge.
    pub fn init_treatment_edges<R: Rng + ?Sized>(&mut self, treatment: TreatmentInit, rng: &mut R) {
        let edges = self.treatment_edges();
        match treatment {
            TreatmentInit::Zero => {
                for i in edges {
                    self.params[i] = 0.0;
                }
            }
            TreatmentInit::Uniform(scale) => {
                let dist = Uniform::new_inclusive(-scale, scale).expect("finite scale");
                for i in edges {
                    self.params[i] = dist.sample(rng);
                }
            }
        }
        self.version += 1;
    }

    pub fn covariate_width(&self) -> usize {
        self.covariate_width
    }

    pub fn concat_to_all_layers(&self) -> bool {
        self.concat_to_all_layers
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Monotone counter bumped on every parameter mutation.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::InputShape {
                expected: self.params.len(),
                got: params.len(),
            });
        }
        self.params = params;
        self.version += 1;
        Ok(())
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        self.params[index] = value;
        self.version += 1;
    }

    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        self.version += 1;
        &mut self.params
    }

    pub fn weight_index(&self, layer: usize, out: usize, input: usize) -> usize {
        let spec = &self.layers[layer];
        debug_assert!(out < spec.output_width && input < spec.input_width);
        self.offsets[layer] + out * spec.input_width + input
    }

    pub fn bias_index(&self, layer: usize, out: usize) -> usize {
        let spec = &self.layers[layer];
        self.offsets[layer] + spec.input_width * spec.output_width + out
    }

    /// Column index of the first raw-input column (`x_0`) in layer `l`, if
    /// that layer sees the raw inputs.
    fn raw_input_column(&self, layer: usize) -> Option<usize> {
        if layer == 0 {
            Some(0)
        } else if self.concat_to_all_layers {
            Some(self.layers[layer - 1].output_width)
        } else {
            None
        }
    }

    /// Indices of every edge leaving the treatment input.
    pub fn treatment_edges(&self) -> Vec<usize> {
        let d = self.covariate_width;
        let mut out = Vec::new();
        for l in 0..self.layers.len() {
            if let Some(col) = self.raw_input_column(l) {
                for o in 0..self.layers[l].output_width {
                    out.push(self.weight_index(l, o, col + d));
                }
            }
        }
        out
    }

    /// Indices of the covariate-to-first-layer matrix `W`.
    pub fn covariate_input_matrix(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for o in 0..self.layers[0].output_width {
            for c in 0..self.covariate_width {
                out.push(self.weight_index(0, o, c));
            }
        }
        out
    }

    /// Indices of covariate edges into layers after the first (non-empty only
    /// with `concat_to_all_layers`).
    pub fn concat_covariate_edges(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for l in 1..self.layers.len() {
            if let Some(col) = self.raw_input_column(l) {
                for o in 0..self.layers[l].output_width {
                    for c in 0..self.covariate_width {
                        out.push(self.weight_index(l, o, col + c));
                    }
                }
            }
        }
        out
    }

    /// Indices of every weight and bias of `layer`.
    pub fn layer_params(&self, layer: usize) -> std::ops::Range<usize> {
        let start = self.offsets[layer];
        start..start + self.layers[layer].param_count()
    }

    pub fn bias_params(&self, layer: usize) -> std::ops::Range<usize> {
        let spec = &self.layers[layer];
        let start = self.offsets[layer] + spec.input_width * spec.output_width;
        start..start + spec.output_width
    }

    /// Same layer shapes and input wiring.
    pub fn same_architecture(&self, other: &Network) -> bool {
        self.covariate_width == other.covariate_width
            && self.concat_to_all_layers == other.concat_to_all_layers
            && self.layers == other.layers
    }

    fn weights(&self, layer: usize) -> ArrayView2<'_, f64> {
        let spec = &self.layers[layer];
        let start = self.offsets[layer];
        let len = spec.input_width * spec.output_width;
        ArrayView2::from_shape(
            (spec.output_width, spec.input_width),
            &self.params[start..start + len],
        )
        .expect("layer block has matching length")
    }

    fn biases(&self, layer: usize) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.params[self.bias_params(layer)])
    }

    /// Forward pass over a batch. `x` is `(batch, covariate_width)`.
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>, t: &[f64]) -> Result<ForwardCache> {
        let (n, d) = x.dim();
        if d != self.covariate_width {
            return Err(Error::InputShape {
                expected: self.covariate_width,
                got: d,
            });
        }
        if t.len() != n {
            return Err(Error::InputShape {
                expected: n,
                got: t.len(),
            });
        }
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        let mut raw = Array2::<f64>::zeros((n, d + 1));
        raw.slice_mut(s![.., ..d]).assign(&x);
        raw.column_mut(d).assign(&ArrayView1::from(t));

        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut current = raw.clone();
        for (l, spec) in self.layers.iter().enumerate() {
            let input = if l > 0 && self.concat_to_all_layers {
                ndarray::concatenate(Axis(1), &[current.view(), raw.view()])
                    .expect("row counts agree")
            } else {
                current
            };
            let mut z = input.dot(&self.weights(l).t());
            z += &self.biases(l);
            let activation = spec.activation;
            current = z.mapv(|v| activation.apply(v));
            inputs.push(input);
            pre_activations.push(z);
        }
        let predictions = current.column(0).to_owned();
        Ok(ForwardCache {
            version: self.version,
            inputs,
            pre_activations,
            predictions,
        })
    }

    /// Forward pass for one sample.
    pub fn forward(&self, x: &[f64], t: f64) -> Result<(f64, ForwardCache)> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        let cache = self.forward_batch(view, &[t])?;
        Ok((cache.predictions[0], cache))
    }

    /// Predictions only.
    pub fn predict(&self, x: ArrayView2<'_, f64>, t: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(x, t)?.predictions.to_vec())
    }

    /// Reverse-mode gradients of `sum_i loss_gradients[i] * prediction_i`
    /// with respect to every parameter.
    pub fn backward_batch(&self, cache: &ForwardCache, loss_gradients: &[f64]) -> Result<Vec<f64>> {
        if cache.version != self.version {
            return Err(Error::StaleCache {
                cache: cache.version,
                network: self.version,
            });
        }
        let n = cache.batch_len();
        if loss_gradients.len() != n {
            return Err(Error::InputShape {
                expected: n,
                got: loss_gradients.len(),
            });
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = Array2::from_shape_vec((n, 1), loss_gradients.to_vec()).expect("column");
        for l in (0..self.layers.len()).rev() {
            let spec = self.layers[l];
            let z = &cache.pre_activations[l];
            let dz = match spec.activation {
                Activation::Identity => delta,
                act => {
                    let mut dz = delta;
                    dz.zip_mut_with(z, |d, &zv| *d *= act.derivative(zv));
                    dz
                }
            };
            let input = &cache.inputs[l];
            let dw = dz.t().dot(input);
            let start = self.offsets[l];
            let wlen = spec.input_width * spec.output_width;
            grads[start..start + wlen]
                .iter_mut()
                .zip(dw.iter())
                .for_each(|(g, v)| *g = *v);
            let db = dz.sum_axis(Axis(0));
            grads[start + wlen..start + wlen + spec.output_width]
                .iter_mut()
                .zip(db.iter())
                .for_each(|(g, v)| *g = *v);
            if l > 0 {
                let d_input = dz.dot(&self.weights(l));
                let prev = self.layers[l - 1].output_width;
                delta = d_input.slice(s![.., ..prev]).to_owned();
            } else {
                break;
            }
        }
        Ok(grads)
    }

    /// Gradients for a single-sample cache, chained with `loss_gradient`.
    pub fn backward(&self, cache: &ForwardCache, loss_gradient: f64) -> Result<Vec<f64>> {
        self.backward_batch(cache, &[loss_gradient])
    }
}
