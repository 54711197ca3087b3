//! Stamp shape classification from tactile signals alone.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::dataset::{Split, Standardizer};
use crate::nn::{cross_entropy, cross_entropy_grad, Activation, AdamConfig, DenseNet, Matrix, OptimizerState};
use crate::rng;
use crate::tactile::{
    indentation_from_heightfield, simulate_tactile, stamp_heightfield, SensorLayout, StampConfig, TactileSignal,
    DELTA_MAX_MM, SIGNAL_DIM,
};
use crate::{Error, Result};

pub const CLASSES: usize = 5;
pub const HIDDEN: usize = 500;
pub const BOTTLENECK: usize = 10;
pub const DEFAULT_SAMPLES: usize = 1280;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StampShape {
    T,
    Circle,
    Angle,
    Triangle,
    Cross,
}

impl StampShape {
    pub const ALL: [StampShape; CLASSES] =
        [StampShape::T, StampShape::Circle, StampShape::Angle, StampShape::Triangle, StampShape::Cross];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StampShape::T => "T",
            StampShape::Circle => "circle",
            StampShape::Angle => "angle",
            StampShape::Triangle => "triangle",
            StampShape::Cross => "cross",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StampGenConfig {
    pub stamp: StampConfig,
    pub layout: SensorLayout,
    /// Offsets are drawn uniformly from `[-max_offset, max_offset]²` (mm).
    pub max_offset_mm: f64,
    pub press_mm: f64,
}

impl Default for StampGenConfig {
    fn default() -> Self {
        Self { stamp: StampConfig::default(), layout: SensorLayout::default(), max_offset_mm: 4.0, press_mm: DELTA_MAX_MM }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StampSample {
    pub shape: StampShape,
    pub offset_mm: (f64, f64),
    pub rotation: f64,
    pub signal_raw: TactileSignal,
}

const MAX_PLACEMENT_TRIES: usize = 1000;

/// `n/5` presses per shape; sample `k` is shape `k mod 5`, drawn from stream
/// `k` of `seed`. Placements that leave the pad are redrawn.
pub fn generate_stamp_dataset(n: usize, seed: u64, config: &StampGenConfig) -> Result<Vec<StampSample>> {
    if !n.is_multiple_of(CLASSES) {
        return Err(Error::InvalidParameter("sample count must be a multiple of 5"));
    }
    config.layout.validate()?;
    (0..n)
        .map(|k| {
            let shape = StampShape::ALL[k % CLASSES];
            let mut r = rng::stream(seed, k as u64);
            for _ in 0..MAX_PLACEMENT_TRIES {
                let m = config.max_offset_mm;
                let offset = if m > 0.0 { (r.random_range(-m..=m), r.random_range(-m..=m)) } else { (0.0, 0.0) };
                let rotation = r.random_range(0.0..TAU);
                let h = match stamp_heightfield(shape, offset, rotation, &config.stamp) {
                    Ok(h) => h,
                    Err(Error::StampOutOfPad) => continue,
                    Err(e) => return Err(e),
                };
                let field = indentation_from_heightfield(&h, config.press_mm)?;
                let noise_seed: u64 = r.random();
                let signal_raw = simulate_tactile(&field, &config.layout, Some(noise_seed));
                return Ok(StampSample { shape, offset_mm: offset, rotation, signal_raw });
            }
            Err(Error::StampOutOfPad)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifierHyper {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for ClassifierHyper {
    fn default() -> Self {
        Self { epochs: 200, batch: 32, lr: 1e-3, train_fraction: 0.8, seed: 0 }
    }
}

/// `15 → 500 (relu) → 10 → 5` logits.
pub fn classifier_net(seed: u64) -> Result<DenseNet> {
    DenseNet::init(
        &[SIGNAL_DIM, HIDDEN, BOTTLENECK, CLASSES],
        &[Activation::Relu, Activation::Identity, Activation::Identity],
        &mut rng::stream(seed, 0),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeClassifier {
    pub net: DenseNet,
    pub standardizer: Standardizer,
}

impl ShapeClassifier {
    pub fn logits(&self, raw: &TactileSignal) -> Result<Vec<f64>> {
        self.net.predict(&self.standardizer.apply(raw)?.values)
    }

    pub fn classify(&self, raw: &TactileSignal) -> Result<StampShape> {
        let l = self.logits(raw)?;
        let best = crate::recognition::argmax_first(&l).ok_or(Error::Empty)?;
        Ok(StampShape::ALL[best])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierReport {
    /// `confusion[true][predicted]` over the held-out split.
    pub confusion: [[usize; CLASSES]; CLASSES],
    pub per_class: [f64; CLASSES],
    pub total: f64,
    pub train_loss: Vec<f64>,
}

impl ClassifierReport {
    pub fn from_confusion(confusion: [[usize; CLASSES]; CLASSES], train_loss: Vec<f64>) -> Result<Self> {
        let mut per_class = [0.0; CLASSES];
        for (c, row) in confusion.iter().enumerate() {
            let n: usize = row.iter().sum();
            if n == 0 {
                return Err(Error::EmptyClass(c));
            }
            per_class[c] = row[c] as f64 / n as f64;
        }
        let trace: usize = (0..CLASSES).map(|c| confusion[c][c]).sum();
        let all: usize = confusion.iter().flatten().sum();
        Ok(Self { confusion, per_class, total: trace as f64 / all as f64, train_loss })
    }
}

/// Mean cross-entropy and its parameter gradients over `(inputs, labels)`.
pub fn batch_loss_and_gradients(net: &DenseNet, inputs: &Matrix, labels: &[usize]) -> Result<(f64, Vec<Vec<f64>>)> {
    let cache = net.forward_batch(inputs)?;
    let out = cache.output();
    let n = labels.len() as f64;
    let mut grad = Matrix::zeros(out.rows, out.cols);
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        loss += cross_entropy(out.row(i), y)?;
        let g = cross_entropy_grad(out.row(i), y)?;
        grad.row_mut(i).iter_mut().zip(g).for_each(|(d, v)| *d = v / n);
    }
    let grads = net.backward_batch(&cache, &grad)?;
    Ok((loss / n, grads.tensors().iter().map(|t| t.to_vec()).collect()))
}

fn standardized_matrix(samples: &[&StampSample], st: &Standardizer) -> Result<Matrix> {
    let mut m = Matrix::zeros(samples.len(), SIGNAL_DIM);
    for (i, s) in samples.iter().enumerate() {
        m.row_mut(i).copy_from_slice(&st.apply(&s.signal_raw)?.values);
    }
    Ok(m)
}

/// Seeded 80/20 split, standardize on the training part, minibatch Adam on
/// cross-entropy, and score the held-out part.
pub fn train_classifier(samples: &[StampSample], hyper: &ClassifierHyper) -> Result<(ShapeClassifier, ClassifierReport)> {
    if hyper.batch == 0 {
        return Err(Error::InvalidParameter("batch size must be positive"));
    }
    let split = Split::shuffled(samples.len(), hyper.train_fraction, hyper.seed)?;
    if split.train.is_empty() || split.validation.is_empty() {
        return Err(Error::EmptySplit);
    }
    let standardizer = Standardizer::fit(split.train.iter().map(|&i| &samples[i].signal_raw))?;
    let mut net = classifier_net(hyper.seed)?;
    let mut opt = OptimizerState::for_tensors(&net.param_tensors(), AdamConfig { lr: hyper.lr, ..AdamConfig::default() });
    let mut order = split.train.clone();
    let mut shuffle_rng = rng::stream(hyper.seed, 1);
    let mut train_loss = Vec::with_capacity(hyper.epochs);
    for _ in 0..hyper.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for chunk in order.chunks(hyper.batch) {
            let batch: Vec<&StampSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let x = standardized_matrix(&batch, &standardizer)?;
            let labels: Vec<usize> = batch.iter().map(|s| s.shape.index()).collect();
            let (loss, grads) = batch_loss_and_gradients(&net, &x, &labels)?;
            let refs: Vec<&[f64]> = grads.iter().map(|g| g.as_slice()).collect();
            opt.opt_step(&mut net.param_tensors_mut(), &refs)?;
            total += loss * chunk.len() as f64;
        }
        train_loss.push(total / order.len() as f64);
    }
    let classifier = ShapeClassifier { net, standardizer };
    let mut confusion = [[0usize; CLASSES]; CLASSES];
    for &i in &split.validation {
        let s = &samples[i];
        confusion[s.shape.index()][classifier.classify(&s.signal_raw)?.index()] += 1;
    }
    let report = ClassifierReport::from_confusion(confusion, train_loss)?;
    Ok((classifier, report))
}
