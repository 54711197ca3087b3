//! Depth patch → touch signal network with an auxiliary patch-reconstruction head.
//!
//! ```text
//! patch (2304) ─ encoder: 200 relu → 5 ─┬─ touch head: 500 relu → 15
//!                                       └─ recon head: 2000 relu → 2304
//! ```

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::dataset::{Dataset, Standardizer};
use crate::nn::{Activation, AdamConfig, DenseNet, ForwardCache, Matrix, OptimizerState, Parameters};
use crate::render::{DepthPatch, PATCH_PIXELS};
use crate::rng;
use crate::tactile::{SignalSpace, TactileSignal, SIGNAL_DIM};
use crate::{Error, Result};

pub const ENCODER_HIDDEN: usize = 200;
pub const BOTTLENECK: usize = 5;
pub const TOUCH_HIDDEN: usize = 500;
pub const RECON_HIDDEN: usize = 2000;
pub const DEFAULT_AUX_WEIGHT: f64 = 0.5;

/// Exact parameter count of the fixed architecture.
pub const PARAM_COUNT: usize = PATCH_PIXELS * ENCODER_HIDDEN
    + ENCODER_HIDDEN
    + ENCODER_HIDDEN * BOTTLENECK
    + BOTTLENECK
    + BOTTLENECK * TOUCH_HIDDEN
    + TOUCH_HIDDEN
    + TOUCH_HIDDEN * SIGNAL_DIM
    + SIGNAL_DIM
    + BOTTLENECK * RECON_HIDDEN
    + RECON_HIDDEN
    + RECON_HIDDEN * PATCH_PIXELS
    + PATCH_PIXELS;

/// Anything that predicts standardized touch signals from depth patches.
pub trait TouchPredictor {
    fn predict_touch(&self, patch: &DepthPatch) -> TactileSignal;

    fn predict_touch_batch(&self, patches: &[&DepthPatch]) -> Vec<TactileSignal> {
        patches.iter().map(|p| self.predict_touch(p)).collect()
    }

    /// Maps raw sensor readings into the prediction space.
    fn standardizer(&self) -> &Standardizer;
}

#[derive(Clone, Debug, PartialEq)]
pub struct I2TModel {
    pub encoder: DenseNet,
    pub touch_head: DenseNet,
    pub recon_head: DenseNet,
    pub standardizer: Standardizer,
    pub aux_weight: f64,
}

fn check_shape(net: &DenseNet, sizes: &[usize]) -> Result<()> {
    let got: Vec<usize> = core::iter::once(net.in_dim()).chain(net.layers().iter().map(|l| l.out_dim)).collect();
    if got != sizes {
        return Err(Error::InvalidParameter("network does not match the fixed architecture"));
    }
    Ok(())
}

impl I2TModel {
    pub fn init(standardizer: Standardizer, aux_weight: f64, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, 0);
        let (r, i) = (Activation::Relu, Activation::Identity);
        let encoder = DenseNet::init(&[PATCH_PIXELS, ENCODER_HIDDEN, BOTTLENECK], &[r, i], &mut rng)?;
        let touch_head = DenseNet::init(&[BOTTLENECK, TOUCH_HIDDEN, SIGNAL_DIM], &[r, i], &mut rng)?;
        let recon_head = DenseNet::init(&[BOTTLENECK, RECON_HIDDEN, PATCH_PIXELS], &[r, i], &mut rng)?;
        Self::new(encoder, touch_head, recon_head, standardizer, aux_weight)
    }

    pub fn new(
        encoder: DenseNet,
        touch_head: DenseNet,
        recon_head: DenseNet,
        standardizer: Standardizer,
        aux_weight: f64,
    ) -> Result<Self> {
        check_shape(&encoder, &[PATCH_PIXELS, ENCODER_HIDDEN, BOTTLENECK])?;
        check_shape(&touch_head, &[BOTTLENECK, TOUCH_HIDDEN, SIGNAL_DIM])?;
        check_shape(&recon_head, &[BOTTLENECK, RECON_HIDDEN, PATCH_PIXELS])?;
        if !(aux_weight >= 0.0) {
            return Err(Error::InvalidParameter("aux weight must be non-negative"));
        }
        Ok(Self { encoder, touch_head, recon_head, standardizer, aux_weight })
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.touch_head.param_count() + self.recon_head.param_count()
    }

    /// Same model with every parameter rounded through `f32`, i.e. what a
    /// save/load cycle yields.
    pub fn quantized(&self) -> Self {
        let mut m = self.clone();
        for t in m.param_tensors_mut() {
            t.iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
        for v in m.standardizer.mean.iter_mut().chain(m.standardizer.std.iter_mut()) {
            *v = *v as f32 as f64;
        }
        m.aux_weight = m.aux_weight as f32 as f64;
        m
    }

    fn predict_rows(&self, x: &Matrix) -> Matrix {
        let code = self.encoder.forward_batch(x).expect("patch width is fixed");
        let out = self.touch_head.forward_batch(code.output()).expect("bottleneck width is fixed");
        out.activations.into_iter().last().expect("non-empty")
    }

    /// `mse(touch, target) + λ·mse(reconstruction, patch)` for one sample.
    pub fn total_loss(&self, patch: &DepthPatch, target: &TactileSignal) -> Result<f64> {
        Ok(self.loss_and_gradients(patch, target, false)?.0)
    }

    /// Loss and, if requested, its gradient laid out like [`Parameters::param_tensors`].
    pub fn loss_and_gradients(
        &self,
        patch: &DepthPatch,
        target: &TactileSignal,
        with_gradients: bool,
    ) -> Result<(f64, Vec<Vec<f64>>)> {
        if target.space != SignalSpace::Standardized {
            return Err(Error::UnstandardizedTarget);
        }
        let x = Matrix { rows: 1, cols: PATCH_PIXELS, data: patch.values.clone() };
        let y = Matrix { rows: 1, cols: SIGNAL_DIM, data: target.values.to_vec() };
        let step = self.batch_pass(&x, &y, with_gradients, true)?;
        let grads = step.grads.unwrap_or_default();
        Ok((step.touch_mse + self.aux_weight * step.recon_mse, grads))
    }

    /// Forward (and optionally backward) over a batch. Loss terms are batch means.
    fn batch_pass(&self, x: &Matrix, y: &Matrix, with_gradients: bool, with_recon: bool) -> Result<BatchPass> {
        let b = x.rows as f64;
        let enc = self.encoder.forward_batch(x)?;
        let touch = self.touch_head.forward_batch(enc.output())?;
        let pred = touch.output();
        let touch_mse = mean_sq_diff(&pred.data, &y.data) / SIGNAL_DIM as f64 / b;
        let use_recon = with_recon && (self.aux_weight > 0.0 || !with_gradients);
        let recon: Option<ForwardCache> = if use_recon { Some(self.recon_head.forward_batch(enc.output())?) } else { None };
        let recon_mse = recon
            .as_ref()
            .map_or(0.0, |r| mean_sq_diff(&r.output().data, &x.data) / PATCH_PIXELS as f64 / b);
        if !with_gradients {
            return Ok(BatchPass { touch_mse, recon_mse, grads: None });
        }
        let scale_t = 2.0 / (SIGNAL_DIM as f64 * b);
        let d_pred = Matrix {
            rows: pred.rows,
            cols: pred.cols,
            data: pred.data.iter().zip(&y.data).map(|(p, t)| scale_t * (p - t)).collect(),
        };
        let g_touch = self.touch_head.backward_batch(&touch, &d_pred)?;
        let mut d_code = g_touch.input.clone();
        let g_recon = match &recon {
            Some(r) => {
                let out = r.output();
                let scale_r = self.aux_weight * 2.0 / (PATCH_PIXELS as f64 * b);
                let d_rec = Matrix {
                    rows: out.rows,
                    cols: out.cols,
                    data: out.data.iter().zip(&x.data).map(|(p, t)| scale_r * (p - t)).collect(),
                };
                let g = self.recon_head.backward_batch(r, &d_rec)?;
                d_code.data.iter_mut().zip(&g.input.data).for_each(|(a, b)| *a += b);
                Some(g)
            }
            None => None,
        };
        let g_enc = self.encoder.backward_batch(&enc, &d_code)?;
        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(12);
        grads.extend(g_enc.tensors().iter().map(|t| t.to_vec()));
        grads.extend(g_touch.tensors().iter().map(|t| t.to_vec()));
        match g_recon {
            Some(g) => grads.extend(g.tensors().iter().map(|t| t.to_vec())),
            None => grads.extend(self.recon_head.param_tensors().iter().map(|t| vec![0.0; t.len()])),
        }
        Ok(BatchPass { touch_mse, recon_mse, grads: Some(grads) })
    }

    /// Touch and reconstruction MSE over a sample set, in batches.
    pub fn evaluate<'a>(&self, samples: impl IntoIterator<Item = &'a crate::dataset::TouchSample>, with_recon: bool) -> Result<(f64, f64)> {
        let samples: Vec<&crate::dataset::TouchSample> = samples.into_iter().collect();
        if samples.is_empty() {
            return Err(Error::EmptySplit);
        }
        let (mut t, mut r) = (0.0, 0.0);
        for chunk in samples.chunks(64) {
            let (x, y) = batch_matrices(chunk, &self.standardizer)?;
            let pass = self.batch_pass(&x, &y, false, with_recon)?;
            t += pass.touch_mse * chunk.len() as f64;
            r += pass.recon_mse * chunk.len() as f64;
        }
        let n = samples.len() as f64;
        Ok((t / n, r / n))
    }
}

struct BatchPass {
    touch_mse: f64,
    recon_mse: f64,
    grads: Option<Vec<Vec<f64>>>,
}

fn mean_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, t)| (p - t) * (p - t)).sum()
}

fn batch_matrices(samples: &[&crate::dataset::TouchSample], st: &Standardizer) -> Result<(Matrix, Matrix)> {
    let mut x = Matrix::zeros(samples.len(), PATCH_PIXELS);
    let mut y = Matrix::zeros(samples.len(), SIGNAL_DIM);
    for (r, s) in samples.iter().enumerate() {
        x.row_mut(r).copy_from_slice(&s.patch.values);
        y.row_mut(r).copy_from_slice(&st.apply(&s.signal_raw)?.values);
    }
    Ok((x, y))
}

impl Parameters for I2TModel {
    fn param_tensors(&self) -> Vec<&[f64]> {
        let mut v = self.encoder.param_tensors();
        v.extend(self.touch_head.param_tensors());
        v.extend(self.recon_head.param_tensors());
        v
    }

    fn param_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.encoder.param_tensors_mut();
        v.extend(self.touch_head.param_tensors_mut());
        v.extend(self.recon_head.param_tensors_mut());
        v
    }
}

impl TouchPredictor for I2TModel {
    fn predict_touch(&self, patch: &DepthPatch) -> TactileSignal {
        self.predict_touch_batch(&[patch])[0]
    }

    fn predict_touch_batch(&self, patches: &[&DepthPatch]) -> Vec<TactileSignal> {
        if patches.is_empty() {
            return Vec::new();
        }
        let mut x = Matrix::zeros(patches.len(), PATCH_PIXELS);
        for (r, p) in patches.iter().enumerate() {
            x.row_mut(r).copy_from_slice(&p.values);
        }
        let out = self.predict_rows(&x);
        (0..out.rows)
            .map(|r| TactileSignal::standardized(out.row(r).try_into().expect("15 outputs")))
            .collect()
    }

    fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainHyper {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub aux_weight: f64,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self { epochs: 30, batch: 32, lr: 1e-3, aux_weight: DEFAULT_AUX_WEIGHT, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub hyper: TrainHyper,
    /// Mean minibatch losses seen during each epoch.
    pub train_touch_mse: Vec<f64>,
    pub train_recon_mse: Vec<f64>,
    /// End-of-epoch validation losses.
    pub validation_touch_mse: Vec<f64>,
    pub validation_recon_mse: Vec<f64>,
    /// Epoch whose weights were kept; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
    /// Validation touch-MSE of the returned model.
    pub final_touch_mse: f64,
    /// Validation touch-MSE of always predicting the training mean (zero in standardized space).
    pub baseline_touch_mse: f64,
}

/// Validation MSE of the constant training-mean predictor.
pub fn mean_predictor_mse(dataset: &Dataset) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for s in dataset.validation() {
        let z = dataset.standardizer.apply(&s.signal_raw)?;
        total += z.values.iter().map(|v| v * v).sum::<f64>() / SIGNAL_DIM as f64;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptySplit);
    }
    Ok(total / n as f64)
}

/// Minibatch Adam on the total loss, keeping the epoch with the lowest
/// validation touch-MSE.
pub fn train(dataset: &Dataset, hyper: &TrainHyper) -> Result<(I2TModel, TrainReport)> {
    if dataset.split.train.is_empty() || dataset.split.validation.is_empty() {
        return Err(Error::EmptySplit);
    }
    if hyper.batch == 0 {
        return Err(Error::InvalidParameter("batch size must be positive"));
    }
    let mut model = I2TModel::init(dataset.standardizer.clone(), hyper.aux_weight, hyper.seed)?;
    let mut opt = OptimizerState::for_tensors(&model.param_tensors(), AdamConfig { lr: hyper.lr, ..AdamConfig::default() });
    let mut order: Vec<usize> = dataset.split.train.clone();
    order.sort_unstable();
    let mut shuffle_rng = rng::stream(hyper.seed, 1);
    let baseline = mean_predictor_mse(dataset)?;
    let mut report = TrainReport {
        hyper: *hyper,
        train_touch_mse: Vec::new(),
        train_recon_mse: Vec::new(),
        validation_touch_mse: Vec::new(),
        validation_recon_mse: Vec::new(),
        best_epoch: None,
        final_touch_mse: f64::NAN,
        baseline_touch_mse: baseline,
    };
    let mut best: Option<I2TModel> = None;
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut t_sum, mut r_sum) = (0.0, 0.0);
        for chunk in order.chunks(hyper.batch) {
            let samples: Vec<&crate::dataset::TouchSample> = chunk.iter().map(|&i| &dataset.samples[i]).collect();
            let (x, y) = batch_matrices(&samples, &dataset.standardizer)?;
            let pass = model.batch_pass(&x, &y, true, true)?;
            let grads = pass.grads.expect("requested");
            let grad_refs: Vec<&[f64]> = grads.iter().map(|g| g.as_slice()).collect();
            opt.opt_step(&mut model.param_tensors_mut(), &grad_refs)?;
            t_sum += pass.touch_mse * chunk.len() as f64;
            r_sum += pass.recon_mse * chunk.len() as f64;
        }
        let n = order.len() as f64;
        let (vt, vr) = model.evaluate(dataset.validation(), true)?;
        if !(t_sum.is_finite() && r_sum.is_finite()) {
            return Err(Error::InvalidParameter("training loss diverged"));
        }
        report.train_touch_mse.push(t_sum / n);
        report.train_recon_mse.push(r_sum / n);
        report.validation_touch_mse.push(vt);
        report.validation_recon_mse.push(vr);
        let improved = report.best_epoch.is_none_or(|b| vt < report.validation_touch_mse[b]);
        if improved {
            report.best_epoch = Some(epoch);
            best = Some(model.clone());
        }
    }
    let model = best.unwrap_or(model);
    report.final_touch_mse = model.evaluate(dataset.validation(), false)?.0;
    Ok((model, report))
}
