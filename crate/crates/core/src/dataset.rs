//! Simulated touch collection, signal standardisation and train/validation splits.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::geometry::ObjectModel;
use crate::math::{sqrt, Vec3};
use crate::render::{heightfield, DepthPatch, SensorFrame, DEFAULT_PAD_SIDE, DEFAULT_STANDOFF};
use crate::rng::{self, Rng};
use crate::tactile::{
    indentation_from_heightfield, simulate_tactile, SensorLayout, SignalSpace, TactileSignal, SIGNAL_DIM,
};
use crate::{Error, Result};

/// How a simulated touch is taken.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectConfig {
    pub pad_side: f64,
    pub standoff: f64,
    /// Distance between the pad and the touched point when the patch is rendered (m).
    pub gap: f64,
    /// Penetration range past first contact (mm).
    pub penetration_mm: (f64, f64),
    pub layout: SensorLayout,
    pub noise: bool,
}

impl Default for CollectConfig {
    fn default() -> Self {
        Self {
            pad_side: DEFAULT_PAD_SIDE,
            standoff: DEFAULT_STANDOFF,
            gap: DEFAULT_STANDOFF / 2.0,
            penetration_mm: (0.5, 2.0),
            layout: SensorLayout::default(),
            noise: true,
        }
    }
}

impl CollectConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        let (lo, hi) = self.penetration_mm;
        if !(lo > 0.0 && lo <= hi && hi <= crate::tactile::DELTA_MAX_MM) {
            return Err(Error::InvalidParameter("penetration range must lie in (0, 3.5] mm"));
        }
        if !(self.gap > 0.0 && self.gap < self.standoff) {
            return Err(Error::InvalidParameter("gap must lie in (0, standoff)"));
        }
        if !(self.pad_side > 0.0) {
            return Err(Error::InvalidParameter("pad_side must be positive"));
        }
        Ok(())
    }

    pub fn draw_penetration(&self, rng: &mut Rng) -> f64 {
        let (lo, hi) = self.penetration_mm;
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    }

    /// Frame facing a random surface point of `object`, with a random roll.
    pub fn random_frame(&self, object: &ObjectModel, rng: &mut Rng) -> Result<(SensorFrame, Vec3)> {
        let (q, n) = object.sample_surface_point(rng);
        let roll = rng.random_range(0.0..TAU);
        Ok((SensorFrame::facing(q, n, roll, self.gap, self.pad_side, self.standoff)?, q))
    }

    /// Press at `frame` into `object` and read the skin.
    pub fn touch(&self, object: &ObjectModel, frame: &SensorFrame, penetration_mm: f64, noise_seed: u64) -> Result<TactileSignal> {
        let h = heightfield(object, frame);
        let field = indentation_from_heightfield(&h, penetration_mm)?;
        Ok(simulate_tactile(&field, &self.layout, self.noise.then_some(noise_seed)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TouchSample {
    pub object_id: u32,
    pub frame: SensorFrame,
    pub penetration: f64,
    pub patch: DepthPatch,
    pub signal_raw: TactileSignal,
    pub contact_point: Vec3,
}

/// One random touch: sample a surface point, face it, render the patch before
/// contact, then press.
pub fn collect_sample(object: &ObjectModel, object_id: u32, config: &CollectConfig, rng: &mut Rng) -> Result<TouchSample> {
    let (frame, q) = config.random_frame(object, rng)?;
    let penetration = config.draw_penetration(rng);
    let noise_seed: u64 = rng.random();
    let h = heightfield(object, &frame);
    let patch = DepthPatch::from_heightfield(&h, frame);
    let field = indentation_from_heightfield(&h, penetration)?;
    let signal_raw = simulate_tactile(&field, &config.layout, config.noise.then_some(noise_seed));
    Ok(TouchSample { object_id, frame, penetration, patch, signal_raw, contact_point: q })
}

/// Sample `i` touches object `i mod |objects|` using stream `i` of `seed`.
pub fn collect_indexed(objects: &[ObjectModel], index: usize, seed: u64, config: &CollectConfig) -> Result<TouchSample> {
    if objects.is_empty() {
        return Err(Error::Empty);
    }
    let id = index % objects.len();
    collect_sample(&objects[id], id as u32, config, &mut rng::stream(seed, index as u64))
}

pub fn generate_samples(objects: &[ObjectModel], n: usize, seed: u64, config: &CollectConfig) -> Result<Vec<TouchSample>> {
    config.validate()?;
    (0..n).map(|i| collect_indexed(objects, i, seed, config)).collect()
}

/// Per-dimension z-scoring fitted on a training split.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: [f64; SIGNAL_DIM],
    pub std: [f64; SIGNAL_DIM],
}

impl Standardizer {
    pub const MIN_STD: f64 = 1e-9;

    pub fn new(mean: [f64; SIGNAL_DIM], std: [f64; SIGNAL_DIM]) -> Result<Self> {
        if let Some(d) = std.iter().position(|s| !(*s > Self::MIN_STD)) {
            return Err(Error::DegenerateDimension(d));
        }
        Ok(Self { mean, std })
    }

    /// Population mean and standard deviation of raw signals.
    pub fn fit<'a>(signals: impl IntoIterator<Item = &'a TactileSignal>) -> Result<Self> {
        let signals: Vec<&TactileSignal> = signals.into_iter().collect();
        if signals.len() < 2 {
            return Err(Error::InvalidParameter("standardizer needs at least two signals"));
        }
        for s in &signals {
            s.expect_space(SignalSpace::Raw)?;
        }
        let n = signals.len() as f64;
        let mut mean = [0.0; SIGNAL_DIM];
        for s in &signals {
            mean.iter_mut().zip(&s.values).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; SIGNAL_DIM];
        for s in &signals {
            for d in 0..SIGNAL_DIM {
                let e = s.values[d] - mean[d];
                var[d] += e * e;
            }
        }
        let mut std = [0.0; SIGNAL_DIM];
        for d in 0..SIGNAL_DIM {
            std[d] = sqrt(var[d] / n);
        }
        Self::new(mean, std)
    }

    pub fn apply(&self, s: &TactileSignal) -> Result<TactileSignal> {
        s.expect_space(SignalSpace::Raw)?;
        let v = core::array::from_fn(|d| (s.values[d] - self.mean[d]) / self.std[d]);
        Ok(TactileSignal::standardized(v))
    }

    pub fn unapply(&self, s: &TactileSignal) -> Result<TactileSignal> {
        s.expect_space(SignalSpace::Standardized)?;
        let v = core::array::from_fn(|d| s.values[d] * self.std[d] + self.mean[d]);
        Ok(TactileSignal::raw(v))
    }
}

/// Index partition into training and validation parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

impl Split {
    /// Seeded shuffle of `0..n`; the first `round(n·fraction)` go to training.
    /// Both parts are kept in ascending order.
    pub fn shuffled(n: usize, train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidParameter("train fraction must lie in (0, 1)"));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng::seeded(seed));
        let n_train = libm::round(n as f64 * train_fraction) as usize;
        let mut validation = idx.split_off(n_train.min(n));
        idx.sort_unstable();
        validation.sort_unstable();
        Ok(Self { train: idx, validation })
    }

    /// `true` for training members, indexed by sample.
    pub fn assignment(&self) -> Vec<bool> {
        let mut a = alloc::vec![false; self.train.len() + self.validation.len()];
        for &i in &self.train {
            a[i] = true;
        }
        a
    }

    pub fn from_assignment(assignment: &[bool]) -> Self {
        let (mut train, mut validation) = (Vec::new(), Vec::new());
        for (i, t) in assignment.iter().enumerate() {
            if *t {
                train.push(i);
            } else {
                validation.push(i);
            }
        }
        Self { train, validation }
    }
}

/// Samples together with their split and the standardizer fitted on the training part.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<TouchSample>,
    pub split: Split,
    pub standardizer: Standardizer,
}

impl Dataset {
    pub fn prepare(samples: Vec<TouchSample>, train_fraction: f64, seed: u64) -> Result<Self> {
        let split = Split::shuffled(samples.len(), train_fraction, seed)?;
        if split.train.is_empty() || split.validation.is_empty() {
            return Err(Error::EmptySplit);
        }
        let standardizer = Standardizer::fit(split.train.iter().map(|&i| &samples[i].signal_raw))?;
        Ok(Self { samples, split, standardizer })
    }

    pub fn train(&self) -> impl Iterator<Item = &TouchSample> {
        self.split.train.iter().map(|&i| &self.samples[i])
    }

    pub fn validation(&self) -> impl Iterator<Item = &TouchSample> {
        self.split.validation.iter().map(|&i| &self.samples[i])
    }
}
