//! Small feed-forward networks with manual forward and backward passes.
//!
//! Hidden layers are ReLU; the output head is selectable per consumer
//! (identity for regression, softplus for nonnegative outputs, tanh for
//! box-bounded outputs). Gradients are computed with respect to both
//! parameters and inputs, batched over rows.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

/// Activation applied to the final layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    /// y = z
    Identity,
    /// y = ln(1 + e^z), smooth and strictly positive
    Softplus,
    /// y = tanh(z), bounded to (-1, 1)
    Tanh,
}

impl OutputActivation {
    pub fn name(self) -> &'static str {
        match self {
            OutputActivation::Identity => "identity",
            OutputActivation::Softplus => "softplus",
            OutputActivation::Tanh => "tanh",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(OutputActivation::Identity),
            "softplus" => Ok(OutputActivation::Softplus),
            "tanh" => Ok(OutputActivation::Tanh),
            other => Err(Error::Checkpoint(format!("unknown activation `{other}`"))),
        }
    }
}

fn softplus(z: f32) -> f32 {
    // stable form: max(z, 0) + ln(1 + e^-|z|)
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f32) -> f32 {
    1.0 / (1.0 + (-z).exp())
}

/// One dense layer; weights are stored (fan_in, fan_out) so a batch of
/// row vectors multiplies as `x.dot(&w)`.
#[derive(Debug, Clone)]
pub struct Layer {
    pub w: Array2<f32>,
    pub b: Array1<f32>,
}

/// A fixed-architecture multilayer perceptron.
#[derive(Debug, Clone)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    layers: Vec<Layer>,
    output_activation: OutputActivation,
}

/// Per-layer parameter gradients, shaped exactly like the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w: Vec<Array2<f32>>,
    pub b: Vec<Array1<f32>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            w: net.layers.iter().map(|l| Array2::zeros(l.w.dim())).collect(),
            b: net.layers.iter().map(|l| Array1::zeros(l.b.len())).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|g| g.iter().all(|v| v.is_finite()))
            && self.b.iter().all(|g| g.iter().all(|v| v.is_finite()))
    }

    /// Largest absolute entry, useful for diagnostics.
    pub fn max_abs(&self) -> f32 {
        let mw = self.w.iter().flat_map(|g| g.iter()).fold(0.0f32, |m, v| m.max(v.abs()));
        let mb = self.b.iter().flat_map(|g| g.iter()).fold(0.0f32, |m, v| m.max(v.abs()));
        mw.max(mb)
    }
}

/// Activations recorded during a forward pass, consumed by `backward`.
pub struct ForwardCache {
    /// acts[0] is the input batch; acts[l] the post-activation of layer l-1.
    acts: Vec<Array2<f32>>,
    /// pre[l] is the pre-activation of layer l.
    pre: Vec<Array2<f32>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f32> {
        self.acts.last().expect("cache holds at least the input")
    }
}

impl Mlp {
    /// Fresh network with weights uniform in ±1/sqrt(fan_in) and zero biases.
    pub fn new(
        layer_sizes: &[usize],
        output_activation: OutputActivation,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::ArchitectureMismatch(format!(
                "need at least input and output sizes, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::ArchitectureMismatch(format!(
                "zero-width layer in {layer_sizes:?}"
            )));
        }
        let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
        for win in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (win[0], win[1]);
            let bound = 1.0 / (fan_in as f32).sqrt();
            let w = Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-bound..bound));
            let b = Array1::zeros(fan_out);
            layers.push(Layer { w, b });
        }
        Ok(Mlp { layer_sizes: layer_sizes.to_vec(), layers, output_activation })
    }

    /// Build directly from explicit layers (tests and checkpoint loading).
    pub fn from_layers(layers: Vec<Layer>, output_activation: OutputActivation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ArchitectureMismatch("no layers".into()));
        }
        let mut sizes = vec![layers[0].w.nrows()];
        for l in &layers {
            if l.w.ncols() != l.b.len() {
                return Err(Error::ArchitectureMismatch(format!(
                    "bias length {} does not match fan-out {}",
                    l.b.len(),
                    l.w.ncols()
                )));
            }
            if l.w.nrows() != *sizes.last().unwrap() {
                return Err(Error::ArchitectureMismatch("layer widths do not chain".into()));
            }
            sizes.push(l.w.ncols());
        }
        Ok(Mlp { layer_sizes: sizes, layers, output_activation })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn same_architecture(&self, other: &Mlp) -> bool {
        self.layer_sizes == other.layer_sizes && self.output_activation == other.output_activation
    }

    fn check_input(&self, got: usize) -> Result<()> {
        if got != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.input_dim(),
                got,
            });
        }
        Ok(())
    }

    fn check_upstream(&self, got: usize) -> Result<()> {
        if got != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "upstream gradient",
                expected: self.output_dim(),
                got,
            });
        }
        Ok(())
    }

    /// Forward pass for one input vector.
    pub fn forward(&self, x: &[f32]) -> Result<Vec<f32>> {
        self.check_input(x.len())?;
        let xb = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("shape");
        let out = self.forward_cached(&xb)?;
        let row = out.output().row(0).to_vec();
        debug_assert!(row.iter().all(|v| v.is_finite()), "non-finite forward output");
        Ok(row)
    }

    /// Batched forward pass; rows are samples.
    pub fn forward_batch(&self, x: &Array2<f32>) -> Result<Array2<f32>> {
        let cache = self.forward_cached(x)?;
        Ok(cache.acts.into_iter().next_back().expect("non-empty"))
    }

    /// Forward pass that records everything `backward` needs.
    pub fn forward_cached(&self, x: &Array2<f32>) -> Result<ForwardCache> {
        self.check_input(x.ncols())?;
        let n_layers = self.layers.len();
        let mut acts = Vec::with_capacity(n_layers + 1);
        let mut pre = Vec::with_capacity(n_layers);
        acts.push(x.clone());
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = acts[li].dot(&layer.w);
            z += &layer.b;
            let a = if li + 1 < n_layers {
                let mut a = z.clone();
                a.mapv_inplace(|v| v.max(0.0));
                a
            } else {
                match self.output_activation {
                    OutputActivation::Identity => z.clone(),
                    OutputActivation::Softplus => z.mapv(softplus),
                    OutputActivation::Tanh => z.mapv(f32::tanh),
                }
            };
            pre.push(z);
            acts.push(a);
        }
        Ok(ForwardCache { acts, pre })
    }

    /// Derivative of the output activation, from the cached tensors.
    fn output_deriv(&self, cache: &ForwardCache) -> Array2<f32> {
        let last = self.layers.len() - 1;
        match self.output_activation {
            OutputActivation::Identity => Array2::ones(cache.pre[last].dim()),
            OutputActivation::Softplus => cache.pre[last].mapv(sigmoid),
            OutputActivation::Tanh => cache.acts[last + 1].mapv(|y| 1.0 - y * y),
        }
    }

    /// Backpropagate `upstream` (rows match the cached batch) through the
    /// network. Returns parameter gradients of sum_i upstream_i . output_i
    /// together with the gradient with respect to the input batch.
    pub fn backward(&self, cache: &ForwardCache, upstream: &Array2<f32>) -> Result<(Gradients, Array2<f32>)> {
        self.check_upstream(upstream.ncols())?;
        let n_layers = self.layers.len();
        let mut gw = vec![Array2::zeros((0, 0)); n_layers];
        let mut gb = vec![Array1::zeros(0); n_layers];

        let mut delta = upstream * &self.output_deriv(cache);
        for li in (0..n_layers).rev() {
            gw[li] = cache.acts[li].t().dot(&delta);
            gb[li] = delta.sum_axis(Axis(0));
            let back = delta.dot(&self.layers[li].w.t());
            delta = if li > 0 {
                // ReLU mask of the previous hidden layer
                back * &cache.pre[li - 1].mapv(|z| if z > 0.0 { 1.0 } else { 0.0 })
            } else {
                back
            };
        }
        Ok((Gradients { w: gw, b: gb }, delta))
    }

    /// Input gradient only; skips the parameter-gradient products.
    pub fn input_gradients(&self, cache: &ForwardCache, upstream: &Array2<f32>) -> Result<Array2<f32>> {
        self.check_upstream(upstream.ncols())?;
        let n_layers = self.layers.len();
        let mut delta = upstream * &self.output_deriv(cache);
        for li in (0..n_layers).rev() {
            let back = delta.dot(&self.layers[li].w.t());
            delta = if li > 0 {
                back * &cache.pre[li - 1].mapv(|z| if z > 0.0 { 1.0 } else { 0.0 })
            } else {
                back
            };
        }
        Ok(delta)
    }

    /// Gradient of `upstream . output` with respect to every parameter.
    pub fn grad_params(&self, x: &[f32], upstream: &[f32]) -> Result<Gradients> {
        let (g, _) = self.grad_both(x, upstream)?;
        Ok(g)
    }

    /// Gradient of `upstream . output` with respect to the input vector.
    pub fn grad_input(&self, x: &[f32], upstream: &[f32]) -> Result<Vec<f32>> {
        let (_, gi) = self.grad_both(x, upstream)?;
        Ok(gi)
    }

    fn grad_both(&self, x: &[f32], upstream: &[f32]) -> Result<(Gradients, Vec<f32>)> {
        self.check_input(x.len())?;
        self.check_upstream(upstream.len())?;
        let xb = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("shape");
        let ub = Array2::from_shape_vec((1, upstream.len()), upstream.to_vec()).expect("shape");
        let cache = self.forward_cached(&xb)?;
        let (g, gi) = self.backward(&cache, &ub)?;
        Ok((g, gi.row(0).to_vec()))
    }

    /// Total number of scalar parameters.
    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}

/// target <- tau * online + (1 - tau) * target, parameter-wise.
pub fn soft_update(target: &mut Mlp, online: &Mlp, tau: f32) -> Result<()> {
    if !target.same_architecture(online) {
        return Err(Error::ArchitectureMismatch(format!(
            "target {:?} vs online {:?}",
            target.layer_sizes, online.layer_sizes
        )));
    }
    for (t, o) in target.layers.iter_mut().zip(online.layers.iter()) {
        t.w.zip_mut_with(&o.w, |tv, ov| *tv = tau * ov + (1.0 - tau) * *tv);
        t.b.zip_mut_with(&o.b, |tv, ov| *tv = tau * ov + (1.0 - tau) * *tv);
    }
    Ok(())
}

/// Concatenate two slices into one row of an existing batch matrix.
pub fn fill_row(mut row: ndarray::ArrayViewMut1<f32>, parts: &[&[f32]]) {
    let mut k = 0;
    for part in parts {
        for &v in *part {
            row[k] = v;
            k += 1;
        }
    }
    debug_assert_eq!(k, row.len());
}

/// Concatenate slices into a fresh vector.
pub fn concat(parts: &[&[f32]]) -> Vec<f32> {
    let mut out = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
    for part in parts {
        out.extend_from_slice(part);
    }
    out
}

/// Euclidean distance between two equally long slices.
pub fn euclid(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f32>().sqrt()
}

pub fn euclid_view(a: ArrayView1<f32>, b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f32>().sqrt()
}
