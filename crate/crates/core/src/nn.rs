//! Dense networks with hand-written reverse mode, losses, Adam and a
//! finite-difference gradient checker.
//!
//! All arithmetic is `f64`. Batched products go through `matrixmultiply`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng as _;

use crate::math::{exp, ln, sqrt};
use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            _ => None,
        }
    }
}

/// Row-major dense matrix; one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, actual: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// `c = a·op(b) (+ c if accumulate)` with explicit strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    rsa: usize,
    csa: usize,
    b: &[f64],
    rsb: usize,
    csb: usize,
    c: &mut [f64],
    accumulate: bool,
) {
    if m == 0 || n == 0 {
        return;
    }
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: every caller passes slices holding the full m×k, k×n and m×n
    // extents described by the given strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `out_dim × in_dim`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim], activation }
    }

    /// Uniform on ±1/√fan_in for weights and biases.
    pub fn init(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut Rng) -> Self {
        let bound = 1.0 / sqrt(in_dim as f64);
        let mut layer = Self::zeros(in_dim, out_dim, activation);
        for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *w = rng.random_range(-bound..bound);
        }
        layer
    }

    fn validate(&self) -> Result<()> {
        if self.weights.len() != self.in_dim * self.out_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim * self.out_dim, actual: self.weights.len() });
        }
        if self.bias.len() != self.out_dim {
            return Err(Error::DimensionMismatch { expected: self.out_dim, actual: self.bias.len() });
        }
        if !self.weights.iter().chain(&self.bias).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite network parameter"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

/// Layer inputs and outputs of a forward pass; `activations[0]` is the input.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub activations: Vec<Matrix>,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("cache holds the input at least")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
    /// Gradient with respect to the batch input.
    pub input: Matrix,
}

impl Gradients {
    /// Flattened in the same order as [`DenseNet::param_tensors`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()]).collect()
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += y);
            a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += y);
        }
    }
}

impl DenseNet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty);
        }
        for l in &layers {
            l.validate()?;
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::DimensionMismatch { expected: pair[0].out_dim, actual: pair[1].in_dim });
            }
        }
        Ok(Self { layers })
    }

    /// Randomly initialised net with layer widths `sizes[0] → … → sizes[n]`.
    pub fn init(sizes: &[usize], activations: &[Activation], rng: &mut Rng) -> Result<Self> {
        if sizes.len() != activations.len() + 1 {
            return Err(Error::DimensionMismatch { expected: sizes.len() - 1, actual: activations.len() });
        }
        let layers = sizes.windows(2).zip(activations).map(|(w, a)| Layer::init(w[0], w[1], *a, rng)).collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn param_tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()]).collect()
    }

    pub fn param_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn forward_batch(&self, input: &Matrix) -> Result<ForwardCache> {
        if input.cols != self.in_dim() {
            return Err(Error::DimensionMismatch { expected: self.in_dim(), actual: input.cols });
        }
        let batch = input.rows;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.clone());
        for layer in &self.layers {
            let a = activations.last().expect("non-empty");
            let mut z = Matrix::zeros(batch, layer.out_dim);
            for r in 0..batch {
                z.row_mut(r).copy_from_slice(&layer.bias);
            }
            // z += a · Wᵀ
            gemm(batch, layer.in_dim, layer.out_dim, &a.data, layer.in_dim, 1, &layer.weights, 1, layer.in_dim, &mut z.data, true);
            if layer.activation == Activation::Relu {
                z.data.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let x = Matrix { rows: 1, cols: input.len(), data: input.to_vec() };
        let cache = self.forward_batch(&x)?;
        Ok((cache.output().data.clone(), cache))
    }

    /// Output only, for inference.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.0)
    }

    /// Reverse pass. `output_grad` is dLoss/dOutput for every batch row.
    pub fn backward_batch(&self, cache: &ForwardCache, output_grad: &Matrix) -> Result<Gradients> {
        self.check_cache(cache)?;
        let batch = cache.activations[0].rows;
        if output_grad.rows != batch || output_grad.cols != self.out_dim() {
            return Err(Error::StaleCache);
        }
        let mut grads: Vec<LayerGrad> = Vec::with_capacity(self.layers.len());
        let mut upstream = output_grad.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let out = &cache.activations[l + 1];
            let inp = &cache.activations[l];
            if layer.activation == Activation::Relu {
                // subgradient at 0 is 0
                for (g, a) in upstream.data.iter_mut().zip(&out.data) {
                    if *a <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            let mut gw = vec![0.0; layer.out_dim * layer.in_dim];
            // gw = dzᵀ · a
            gemm(layer.out_dim, batch, layer.in_dim, &upstream.data, 1, layer.out_dim, &inp.data, layer.in_dim, 1, &mut gw, false);
            let mut gb = vec![0.0; layer.out_dim];
            for r in 0..batch {
                gb.iter_mut().zip(upstream.row(r)).for_each(|(b, g)| *b += g);
            }
            let mut down = Matrix::zeros(batch, layer.in_dim);
            // down = dz · W
            gemm(batch, layer.out_dim, layer.in_dim, &upstream.data, layer.out_dim, 1, &layer.weights, layer.in_dim, 1, &mut down.data, false);
            grads.push(LayerGrad { weights: gw, bias: gb });
            upstream = down;
        }
        grads.reverse();
        Ok(Gradients { layers: grads, input: upstream })
    }

    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<Gradients> {
        let g = Matrix { rows: 1, cols: output_grad.len(), data: output_grad.to_vec() };
        self.backward_batch(cache, &g)
    }

    fn check_cache(&self, cache: &ForwardCache) -> Result<()> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(Error::StaleCache);
        }
        let batch = cache.activations[0].rows;
        let dims_ok = cache.activations[0].cols == self.in_dim()
            && self
                .layers
                .iter()
                .zip(&cache.activations[1..])
                .all(|(l, a)| a.cols == l.out_dim && a.rows == batch);
        if dims_ok {
            Ok(())
        } else {
            Err(Error::StaleCache)
        }
    }
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(())
}

/// Mean squared componentwise error.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_len(pred, target)?;
    if pred.is_empty() {
        return Err(Error::Empty);
    }
    Ok(pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64)
}

/// d mse / d pred.
pub fn mse_grad(pred: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    check_len(pred, target)?;
    let n = pred.len() as f64;
    Ok(pred.iter().zip(target).map(|(p, t)| 2.0 * (p - t) / n).collect())
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + ln(logits.iter().map(|l| exp(l - max)).sum::<f64>());
    logits.iter().map(|l| l - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(exp).collect()
}

/// `-log softmax(logits)[class]`, max-shifted.
pub fn cross_entropy(logits: &[f64], class: usize) -> Result<f64> {
    if class >= logits.len() {
        return Err(Error::DimensionMismatch { expected: logits.len(), actual: class });
    }
    Ok(-log_softmax(logits)[class])
}

pub fn cross_entropy_grad(logits: &[f64], class: usize) -> Result<Vec<f64>> {
    if class >= logits.len() {
        return Err(Error::DimensionMismatch { expected: logits.len(), actual: class });
    }
    let mut g = softmax(logits);
    g[class] -= 1.0;
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Bias-corrected adaptive-moment state, one accumulator pair per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(shapes: &[usize], config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            first: shapes.iter().map(|n| vec![0.0; *n]).collect(),
            second: shapes.iter().map(|n| vec![0.0; *n]).collect(),
        }
    }

    pub fn for_tensors(tensors: &[&[f64]], config: AdamConfig) -> Self {
        let shapes: Vec<usize> = tensors.iter().map(|t| t.len()).collect();
        Self::new(&shapes, config)
    }

    pub fn opt_step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(Error::DimensionMismatch { expected: self.first.len(), actual: params.len().min(grads.len()) });
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first) {
            if p.len() != m.len() || g.len() != m.len() {
                return Err(Error::DimensionMismatch { expected: m.len(), actual: p.len().min(g.len()) });
            }
        }
        self.step += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - libm::pow(beta1, t as f64);
        let c2 = 1.0 - libm::pow(beta2, t as f64);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.first).zip(&mut self.second) {
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (sqrt(v_hat) + eps);
            }
        }
        Ok(())
    }
}

/// Anything exposing its trainable parameters as flat tensors.
pub trait Parameters {
    fn param_tensors(&self) -> Vec<&[f64]>;
    fn param_tensors_mut(&mut self) -> Vec<&mut [f64]>;
}

impl Parameters for DenseNet {
    fn param_tensors(&self) -> Vec<&[f64]> {
        DenseNet::param_tensors(self)
    }

    fn param_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        DenseNet::param_tensors_mut(self)
    }
}

pub const GRADCHECK_STEP: f64 = 1e-5;
pub const GRADCHECK_MAX_PARAMS: usize = 200;
/// Gradients below this magnitude are compared absolutely.
pub const GRADCHECK_FLOOR: f64 = 1e-6;

/// Result of a finite-difference comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradcheckReport {
    pub max_relative_error: f64,
    pub checked: usize,
}

/// Central differences on at most `max_params` parameters spread evenly over
/// every tensor, compared with `analytic` (same tensor layout).
///
/// The relative error of a pair is `|a − n| / max(|a|, |n|, 1e-6)`; a pair of
/// exact zeros scores 0.
pub fn gradcheck<M: Parameters>(
    model: &mut M,
    analytic: &[Vec<f64>],
    loss: impl Fn(&M) -> f64,
    max_params: usize,
    rng: &mut Rng,
) -> Result<GradcheckReport> {
    let sizes: Vec<usize> = model.param_tensors().iter().map(|t| t.len()).collect();
    if analytic.len() != sizes.len() {
        return Err(Error::DimensionMismatch { expected: sizes.len(), actual: analytic.len() });
    }
    for (a, n) in analytic.iter().zip(&sizes) {
        if a.len() != *n {
            return Err(Error::DimensionMismatch { expected: *n, actual: a.len() });
        }
    }
    // water-fill the budget so small tensors do not waste it
    let mut takes = vec![0usize; sizes.len()];
    let mut budget = max_params;
    loop {
        let open: Vec<usize> = (0..sizes.len()).filter(|&t| takes[t] < sizes[t]).collect();
        if open.is_empty() || budget == 0 {
            break;
        }
        let share = (budget / open.len()).max(1);
        for t in open {
            let add = share.min(sizes[t] - takes[t]).min(budget);
            takes[t] += add;
            budget -= add;
        }
    }
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (t, (&len, &take)) in sizes.iter().zip(&takes).enumerate() {
        for idx in sample(rng, len, take).into_iter() {
            let original = model.param_tensors()[t][idx];
            model.param_tensors_mut()[t][idx] = original + GRADCHECK_STEP;
            let up = loss(model);
            model.param_tensors_mut()[t][idx] = original - GRADCHECK_STEP;
            let down = loss(model);
            model.param_tensors_mut()[t][idx] = original;
            let numeric = (up - down) / (2.0 * GRADCHECK_STEP);
            worst = worst.max(relative_error(analytic[t][idx], numeric));
            checked += 1;
        }
    }
    Ok(GradcheckReport { max_relative_error: worst, checked })
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    if a == 0.0 && n == 0.0 {
        return 0.0;
    }
    (a - n).abs() / a.abs().max(n.abs()).max(GRADCHECK_FLOOR)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn random_net(seed: u64) -> DenseNet {
        DenseNet::init(&[4, 6, 5, 3], &[Activation::Relu, Activation::Relu, Activation::Identity], &mut seeded(seed)).unwrap()
    }

    /// Per-element loops, independent of the batched path.
    fn naive_forward(net: &DenseNet, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for l in net.layers() {
            let mut z = vec![0.0; l.out_dim];
            for o in 0..l.out_dim {
                let mut s = l.bias[o];
                for i in 0..l.in_dim {
                    s += l.weights[o * l.in_dim + i] * a[i];
                }
                z[o] = if l.activation == Activation::Relu && s < 0.0 { 0.0 } else { s };
            }
            a = z;
        }
        a
    }

    #[test]
    fn zero_weights_output_bias() {
        let mut l = Layer::zeros(3, 2, Activation::Identity);
        l.bias = vec![0.5, -1.5];
        let net = DenseNet::new(vec![l]).unwrap();
        assert_eq!(net.predict(&[1.0, 2.0, 3.0]).unwrap(), vec![0.5, -1.5]);
    }

    #[test]
    fn relu_clamps() {
        let mut l = Layer::zeros(1, 1, Activation::Relu);
        l.weights[0] = -1.0;
        let net = DenseNet::new(vec![l]).unwrap();
        assert_eq!(net.predict(&[2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn forward_matches_naive_loops() {
        let net = random_net(11);
        let mut rng = seeded(12);
        for _ in 0..20 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let fast = net.predict(&x).unwrap();
            let slow = naive_forward(&net, &x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let net = random_net(1);
        assert!(matches!(net.forward(&[1.0]), Err(Error::DimensionMismatch { .. })));
        let (_, cache) = net.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let other = DenseNet::init(&[4, 2], &[Activation::Identity], &mut seeded(2)).unwrap();
        assert_eq!(other.backward(&cache, &[1.0, 1.0]), Err(Error::StaleCache));
        assert!(DenseNet::new(vec![Layer::zeros(2, 3, Activation::Relu), Layer::zeros(4, 1, Activation::Relu)]).is_err());
    }

    #[test]
    fn identity_layer_mse_gradient_closed_form() {
        let mut rng = seeded(3);
        let net = DenseNet::init(&[3, 2], &[Activation::Identity], &mut rng).unwrap();
        let x = [0.3, -1.2, 0.8];
        let y = [1.0, -0.5];
        let (pred, cache) = net.forward(&x).unwrap();
        let g = net.backward(&cache, &mse_grad(&pred, &y).unwrap()).unwrap();
        for o in 0..2 {
            for i in 0..3 {
                let want = 2.0 / 2.0 * (pred[o] - y[o]) * x[i];
                assert!((g.layers[0].weights[o * 3 + i] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let net = random_net(4);
        let (_, cache) = net.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = net.backward(&cache, &[0.0; 3]).unwrap();
        assert!(g.tensors().iter().all(|t| t.iter().all(|v| *v == 0.0)));
    }

    fn mse_check(net: &mut DenseNet, x: &[f64], y: &[f64], corrupt: bool) -> f64 {
        let (pred, cache) = net.forward(x).unwrap();
        let g = net.backward(&cache, &mse_grad(&pred, y).unwrap()).unwrap();
        let mut analytic: Vec<Vec<f64>> = g.tensors().iter().map(|t| t.to_vec()).collect();
        if corrupt {
            analytic[0].iter_mut().for_each(|v| *v *= 1.1);
        }
        gradcheck(net, &analytic, |n| mse(&n.predict(x).unwrap(), y).unwrap(), 200, &mut seeded(99))
            .unwrap()
            .max_relative_error
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut net = random_net(5);
        let err = mse_check(&mut net, &[0.5, -0.3, 0.9, 0.1], &[0.2, 0.1, -0.4], false);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn corrupted_backward_is_caught() {
        let mut net = random_net(5);
        let err = mse_check(&mut net, &[0.5, -0.3, 0.9, 0.1], &[0.2, 0.1, -0.4], true);
        assert!(err > 1e-2, "{err}");
    }

    #[test]
    fn zero_loss_region_scores_zero() {
        let l = Layer::zeros(2, 1, Activation::Relu);
        let mut net = DenseNet::new(vec![l]).unwrap();
        // relu output is 0 and the target is 0, the loss is flat in every direction except bias
        net.layers_mut()[0].bias[0] = -1.0;
        let err = mse_check(&mut net, &[0.1, 0.2], &[0.0], false);
        assert_eq!(err, 0.0);
    }

    #[test]
    fn loss_examples() {
        let v = [0.3, -2.0, 5.0];
        assert_eq!(mse(&v, &v).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 3.0], &[4.0, 0.0]).unwrap(), 12.5);
        assert!((cross_entropy(&[0.7; 5], 2).unwrap() - ln(5.0)).abs() < 1e-12);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(cross_entropy(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn cross_entropy_is_stable_for_huge_logits() {
        let ce = cross_entropy(&[1e4, -1e4, 0.0], 1).unwrap();
        assert!(ce.is_finite() && (ce - 2e4).abs() < 1e-6);
        assert!(cross_entropy(&[1e4, -1e4, 0.0], 0).unwrap().is_finite());
    }

    #[test]
    fn adam_first_step_is_lr_sign() {
        let mut p = vec![1.0, -2.0, 0.5];
        let g = vec![0.3, -4.0, 1e-3];
        let mut opt = OptimizerState::new(&[3], AdamConfig::default());
        opt.opt_step(&mut [p.as_mut_slice()], &[g.as_slice()]).unwrap();
        let want = [1.0 - 1e-3, -2.0 + 1e-3, 0.5 - 1e-3];
        for (a, b) in p.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn adam_zero_gradient_is_a_no_op() {
        let mut p = vec![1.0, -2.0];
        let mut opt = OptimizerState::new(&[2], AdamConfig::default());
        for _ in 0..100 {
            opt.opt_step(&mut [p.as_mut_slice()], &[&[0.0, 0.0]]).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn adam_descends_quadratic() {
        let mut theta = vec![1.0];
        let mut opt = OptimizerState::new(&[1], AdamConfig::default());
        let mut last = theta[0];
        for _ in 0..2 {
            let g = vec![theta[0]];
            opt.opt_step(&mut [theta.as_mut_slice()], &[g.as_slice()]).unwrap();
            assert!(theta[0] < last);
            last = theta[0];
        }
    }

    #[test]
    fn adam_shape_mismatch() {
        let mut p = vec![1.0, 2.0];
        let mut opt = OptimizerState::new(&[3], AdamConfig::default());
        assert!(opt.opt_step(&mut [p.as_mut_slice()], &[&[0.0, 0.0]]).is_err());
    }
}
