//! Touch-by-touch object recognition with an ensemble of per-touch votes.
//!
//! Each touch scores every candidate, the best-scoring candidate gets one vote,
//! and the posterior is the vote frequency. The next touch location is chosen
//! on a hypothesis drawn from the smoothed posterior, where the predicted
//! touches of the candidates disagree most.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::dataset::CollectConfig;
use crate::geometry::ObjectModel;
use crate::math::{exp, Vec3};
use crate::model::TouchPredictor;
use crate::render::{heightfield, pixel_center, render_depth_patch, DepthPatch, SensorFrame, PATCH_SIZE};
use crate::rng::Rng;
use crate::tactile::{indentation_from_heightfield, simulate_tactile, SignalSpace, TactileSignal};
use crate::{Error, Result};

pub const DEFAULT_TOUCHES: usize = 10;
pub const DEFAULT_LOCATION_CANDIDATES: usize = 16;
/// Distance scale of the proprioception likelihood (m).
pub const PROPRIOCEPTION_SCALE: f64 = 0.005;
/// Laplace smoothing of hypothesis sampling.
pub const HYPOTHESIS_ALPHA: f64 = 1.0;
/// Recognition touches press a fixed depth (mm), the middle of the collection range.
pub const RECOGNITION_PRESS_MM: f64 = 1.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Compare the measured signal with predicted signals.
    I2T,
    /// Compare the measured contact location with each model's nearest surface point.
    Proprioception,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::I2T => "i2t",
            Mode::Proprioception => "prop",
        }
    }
}

/// `exp(-‖τ − τ̃‖₂)` per candidate.
pub fn per_touch_likelihoods(measured: &TactileSignal, predictions: &[TactileSignal]) -> Result<Vec<f64>> {
    measured.expect_space(SignalSpace::Standardized)?;
    predictions
        .iter()
        .map(|p| {
            p.expect_space(SignalSpace::Standardized)?;
            Ok(exp(-measured.distance(p)))
        })
        .collect()
}

/// `exp(-d/d₀)` with `d` the distance from `contact` to each candidate's surface.
pub fn proprioception_likelihoods(contact: Vec3, objects: &[ObjectModel], scale: f64) -> Vec<f64> {
    objects.iter().map(|o| exp(-o.nearest_surface_point(contact).1 / scale)).collect()
}

/// Index of the first maximum.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// One-hot vote for the most likely candidate; ties go to the lowest index.
pub fn binarize_winner(likelihoods: &[f64]) -> Result<Vec<u32>> {
    let w = argmax_first(likelihoods).ok_or(Error::Empty)?;
    let mut v = alloc::vec![0; likelihoods.len()];
    v[w] = 1;
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TouchRecord {
    pub frame: SensorFrame,
    /// Measured signal, standardized.
    pub signal: TactileSignal,
    pub predictions: Vec<TactileSignal>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeliefState {
    pub candidates: Vec<String>,
    pub win_counts: Vec<u32>,
    pub history: Vec<TouchRecord>,
}

impl BeliefState {
    pub fn new(candidates: Vec<String>) -> Self {
        let n = candidates.len();
        Self { candidates, win_counts: alloc::vec![0; n], history: Vec::new() }
    }

    pub fn for_objects(objects: &[ObjectModel]) -> Self {
        Self::new(objects.iter().map(|o| String::from(o.name())).collect())
    }

    pub fn touches(&self) -> u32 {
        self.win_counts.iter().sum()
    }

    pub fn update(&mut self, one_hot: &[u32]) -> Result<()> {
        if one_hot.len() != self.win_counts.len() {
            return Err(Error::DimensionMismatch { expected: self.win_counts.len(), actual: one_hot.len() });
        }
        if one_hot.iter().sum::<u32>() != 1 || one_hot.iter().any(|v| *v > 1) {
            return Err(Error::InvalidParameter("vote must be one-hot"));
        }
        self.win_counts.iter_mut().zip(one_hot).for_each(|(w, v)| *w += v);
        Ok(())
    }

    /// Vote frequencies; uniform before the first touch.
    pub fn posterior(&self) -> Vec<f64> {
        let n = self.touches();
        let k = self.win_counts.len() as f64;
        if n == 0 {
            return self.win_counts.iter().map(|_| 1.0 / k).collect();
        }
        self.win_counts.iter().map(|w| *w as f64 / n as f64).collect()
    }

    /// `(wins + α) / (N + α·|O|)`.
    pub fn smoothed(&self, alpha: f64) -> Vec<f64> {
        let denom = self.touches() as f64 + alpha * self.win_counts.len() as f64;
        self.win_counts.iter().map(|w| (*w as f64 + alpha) / denom).collect()
    }

    /// Current best guess, lowest index on ties.
    pub fn leader(&self) -> usize {
        argmax_first(&self.posterior()).unwrap_or(0)
    }
}

/// Draw a hypothesis from the Laplace-smoothed vote distribution.
pub fn sample_hypothesis(belief: &BeliefState, rng: &mut Rng) -> usize {
    let p = belief.smoothed(HYPOTHESIS_ALPHA);
    let mut u = rng.random::<f64>();
    for (i, w) in p.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    p.len() - 1
}

/// Render `object` at `frame` and predict the touch there.
pub fn predicted_signal<P: TouchPredictor + ?Sized>(object: &ObjectModel, frame: &SensorFrame, predictor: &P) -> TactileSignal {
    predictor.predict_touch(&render_depth_patch(object, frame))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocationChoice {
    pub frame: SensorFrame,
    /// Predicted signal of every candidate at `frame`.
    pub predictions: Vec<TactileSignal>,
    /// Mean predicted distance between the hypothesis and the other candidates.
    pub separation: f64,
    pub candidate_index: usize,
}

/// Mean of `‖τ̃_h − τ̃_o‖₂` over candidates `o ≠ h`; 0 with a single candidate.
pub fn separation(hypothesis: usize, predictions: &[TactileSignal]) -> f64 {
    if predictions.len() < 2 {
        return 0.0;
    }
    let h = &predictions[hypothesis];
    let total: f64 = predictions
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != hypothesis)
        .map(|(_, p)| h.distance(p))
        .sum();
    total / (predictions.len() - 1) as f64
}

/// Sample `k` frames on the hypothesis and keep the one where its predicted
/// touch is farthest, on average, from the other candidates' (first on ties).
pub fn select_touch_location<P: TouchPredictor + ?Sized>(
    hypothesis: usize,
    objects: &[ObjectModel],
    predictor: &P,
    config: &CollectConfig,
    k: usize,
    rng: &mut Rng,
) -> Result<LocationChoice> {
    if hypothesis >= objects.len() {
        return Err(Error::InvalidParameter("hypothesis is not a candidate"));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one location candidate"));
    }
    let frames: Vec<SensorFrame> =
        (0..k).map(|_| config.random_frame(&objects[hypothesis], rng).map(|(f, _)| f)).collect::<Result<_>>()?;
    let mut best: Option<LocationChoice> = None;
    for (c, frame) in frames.into_iter().enumerate() {
        let patches: Vec<DepthPatch> = objects.iter().map(|o| render_depth_patch(o, &frame)).collect();
        let refs: Vec<&DepthPatch> = patches.iter().collect();
        let predictions = predictor.predict_touch_batch(&refs);
        let score = separation(hypothesis, &predictions);
        if best.as_ref().is_none_or(|b| score > b.separation) {
            best = Some(LocationChoice { frame, predictions, separation: score, candidate_index: c });
        }
    }
    Ok(best.expect("k > 0"))
}

/// Where the pad stopped: the first-contact pixel, or the end of travel on a miss.
pub fn contact_location(object: &ObjectModel, frame: &SensorFrame) -> Vec3 {
    let h = heightfield(object, frame);
    match h.first_contact() {
        Some((k, depth)) => {
            let (x, y) = pixel_center(frame.pad_side, k / PATCH_SIZE, k % PATCH_SIZE);
            frame.pose.apply(Vec3::new(x, y, depth))
        }
        None => frame.pose.apply(Vec3::new(0.0, 0.0, frame.standoff)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeConfig {
    pub touches: usize,
    pub mode: Mode,
    pub location_candidates: usize,
    pub proprioception_scale: f64,
    /// Touch procedure shared with data collection (pad, penetration, noise).
    pub touch: CollectConfig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            touches: DEFAULT_TOUCHES,
            mode: Mode::I2T,
            location_candidates: DEFAULT_LOCATION_CANDIDATES,
            proprioception_scale: PROPRIOCEPTION_SCALE,
            touch: CollectConfig { penetration_mm: (RECOGNITION_PRESS_MM, RECOGNITION_PRESS_MM), ..CollectConfig::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TouchOutcome {
    pub hypothesis: usize,
    pub frame: SensorFrame,
    pub likelihoods: Vec<f64>,
    pub winner: usize,
    pub posterior: Vec<f64>,
    /// Posterior leader equals the true object.
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeReport {
    pub true_object: usize,
    pub mode: Mode,
    pub candidates: Vec<String>,
    pub touches: Vec<TouchOutcome>,
}

impl EpisodeReport {
    pub fn final_correct(&self) -> bool {
        self.touches.last().is_some_and(|t| t.correct)
    }
}

/// Touch the true object `config.touches` times and vote after each touch.
pub fn run_episode<P: TouchPredictor + ?Sized>(
    true_object: usize,
    objects: &[ObjectModel],
    predictor: &P,
    config: &EpisodeConfig,
    rng: &mut Rng,
) -> Result<EpisodeReport> {
    if true_object >= objects.len() {
        return Err(Error::InvalidParameter("true object is not a candidate"));
    }
    config.touch.validate()?;
    let mut belief = BeliefState::for_objects(objects);
    let mut touches = Vec::with_capacity(config.touches);
    for _ in 0..config.touches {
        let hypothesis = sample_hypothesis(&belief, rng);
        let choice = select_touch_location(hypothesis, objects, predictor, &config.touch, config.location_candidates, rng)?;
        let frame = choice.frame;
        let penetration = config.touch.draw_penetration(rng);
        let noise_seed: u64 = rng.random();
        let truth = &objects[true_object];
        let h = heightfield(truth, &frame);
        let field = indentation_from_heightfield(&h, penetration)?;
        let raw = simulate_tactile(&field, &config.touch.layout, config.touch.noise.then_some(noise_seed));
        let measured = predictor.standardizer().apply(&raw)?;
        let likelihoods = match config.mode {
            Mode::I2T => per_touch_likelihoods(&measured, &choice.predictions)?,
            Mode::Proprioception => {
                proprioception_likelihoods(contact_location(truth, &frame), objects, config.proprioception_scale)
            }
        };
        let vote = binarize_winner(&likelihoods)?;
        belief.update(&vote)?;
        belief.history.push(TouchRecord { frame, signal: measured, predictions: choice.predictions });
        let posterior = belief.posterior();
        touches.push(TouchOutcome {
            hypothesis,
            frame,
            winner: vote.iter().position(|v| *v == 1).expect("one-hot"),
            correct: belief.leader() == true_object,
            likelihoods,
            posterior,
        });
    }
    Ok(EpisodeReport { true_object, mode: config.mode, candidates: belief.candidates, touches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Standardizer;
    use crate::geometry::{Primitive, Shape};
    use crate::math::{ln, RigidTransform};
    use crate::rng::seeded;
    use crate::tactile::SIGNAL_DIM;

    fn std_signal(v: [f64; SIGNAL_DIM]) -> TactileSignal {
        TactileSignal::standardized(v)
    }

    #[test]
    fn likelihood_examples() {
        let tau = std_signal([0.5; SIGNAL_DIM]);
        let mut off = [0.5; SIGNAL_DIM];
        off[0] += ln(2.0);
        let mut far = [0.5; SIGNAL_DIM];
        far[0] += 3.0;
        far[1] += 4.0;
        let l = per_touch_likelihoods(&tau, &[tau, std_signal(off), std_signal(far)]).unwrap();
        assert_eq!(l[0], 1.0);
        assert!((l[1] - 0.5).abs() < 1e-15);
        assert!((l[2] - exp(-5.0)).abs() < 1e-15);
        assert!((l[2] - 6.738e-3).abs() < 1e-6);
        assert!(per_touch_likelihoods(&TactileSignal::raw([0.0; SIGNAL_DIM]), &[tau]).is_err());
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_winner(&[0.2, 0.9, 0.1]).unwrap(), alloc::vec![0, 1, 0]);
        assert_eq!(binarize_winner(&[0.9, 0.9]).unwrap(), alloc::vec![1, 0]);
        assert_eq!(binarize_winner(&[0.3]).unwrap(), alloc::vec![1]);
        assert!(binarize_winner(&[]).is_err());
    }

    #[test]
    fn posterior_is_vote_frequency() {
        let mut b = BeliefState::new(alloc::vec!["a".into(), "b".into(), "c".into()]);
        b.update(&[1, 0, 0]).unwrap();
        assert_eq!(b.posterior(), alloc::vec![1.0, 0.0, 0.0]);
        b.update(&[1, 0, 0]).unwrap();
        b.update(&[0, 1, 0]).unwrap();
        b.update(&[1, 0, 0]).unwrap();
        assert_eq!(b.posterior(), alloc::vec![0.75, 0.25, 0.0]);
        assert!(b.update(&[1, 1, 0]).is_err());
    }

    #[test]
    fn hypothesis_sampling() {
        let mut b = BeliefState::new(alloc::vec!["a".into(), "b".into(), "c".into()]);
        let mut rng = seeded(3);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            counts[sample_hypothesis(&b, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 1.0 / 3.0).abs() < 0.02);
        }
        b.win_counts = alloc::vec![10, 0, 0];
        assert!((b.smoothed(1.0)[0] - 11.0 / 13.0).abs() < 1e-15);
        let draws = |seed| {
            let mut r = seeded(seed);
            (0..20).map(|_| sample_hypothesis(&b, &mut r)).collect::<alloc::vec::Vec<_>>()
        };
        assert_eq!(draws(9), draws(9));
    }

    #[test]
    fn proprioception_examples() {
        let sphere = ObjectModel::single("s", Shape::Sphere { radius: 0.02 }).unwrap();
        let l = proprioception_likelihoods(Vec3::new(0.02, 0.0, 0.0), core::slice::from_ref(&sphere), PROPRIOCEPTION_SCALE);
        assert_eq!(l[0], 1.0);
        let d = PROPRIOCEPTION_SCALE * ln(2.0);
        let l = proprioception_likelihoods(Vec3::new(0.02 + d, 0.0, 0.0), core::slice::from_ref(&sphere), PROPRIOCEPTION_SCALE);
        assert!((l[0] - 0.5).abs() < 1e-12);
    }

    /// Predictor that knows the simulator: inverts the patch normalisation and
    /// presses with a fixed penetration, noise off.
    struct OraclePredictor {
        config: CollectConfig,
        standardizer: Standardizer,
    }

    impl TouchPredictor for OraclePredictor {
        fn predict_touch(&self, patch: &DepthPatch) -> TactileSignal {
            let h = patch.to_heightfield();
            let field = indentation_from_heightfield(&h, self.config.penetration_mm.0).unwrap();
            self.standardizer.apply(&simulate_tactile(&field, &self.config.layout, None)).unwrap()
        }

        fn standardizer(&self) -> &Standardizer {
            &self.standardizer
        }
    }

    fn oracle() -> OraclePredictor {
        let mut config = CollectConfig { penetration_mm: (1.25, 1.25), noise: false, ..CollectConfig::default() };
        config.layout.noise_std = 0.0;
        let mut std = [1.0; SIGNAL_DIM];
        std.iter_mut().enumerate().for_each(|(i, s)| *s += i as f64);
        OraclePredictor { config, standardizer: Standardizer::new([0.0; SIGNAL_DIM], std).unwrap() }
    }

    fn distinct_objects() -> alloc::vec::Vec<ObjectModel> {
        alloc::vec![
            ObjectModel::single("sphere", Shape::Sphere { radius: 0.02 }).unwrap(),
            ObjectModel::single("box", Shape::Box { half_extents: Vec3::new(0.03, 0.03, 0.01) }).unwrap(),
            ObjectModel::new(
                "rod",
                alloc::vec![Primitive::new(
                    Shape::Cylinder { radius: 0.006, half_height: 0.04 },
                    RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.0)),
                )
                .unwrap()],
                RigidTransform::IDENTITY,
            )
            .unwrap(),
        ]
    }

    fn oracle_episode_config() -> EpisodeConfig {
        let o = oracle();
        EpisodeConfig { touch: o.config.clone(), ..EpisodeConfig::default() }
    }

    #[test]
    fn oracle_predictor_recognizes_from_first_touch() {
        let objects = distinct_objects();
        let o = oracle();
        let cfg = oracle_episode_config();
        for truth in 0..objects.len() {
            let report = run_episode(truth, &objects, &o, &cfg, &mut seeded(10 + truth as u64)).unwrap();
            assert_eq!(report.touches.len(), 10);
            assert!(report.touches.iter().all(|t| t.correct), "truth {truth}: {:?}", report.touches);
        }
    }

    #[test]
    fn single_candidate_episode() {
        let objects = distinct_objects()[..1].to_vec();
        let report = run_episode(0, &objects, &oracle(), &oracle_episode_config(), &mut seeded(1)).unwrap();
        assert!(report.touches.iter().all(|t| t.correct && t.posterior == alloc::vec![1.0]));
    }

    #[test]
    fn episodes_are_seed_deterministic() {
        let objects = distinct_objects();
        let cfg = EpisodeConfig { touches: 3, mode: Mode::Proprioception, ..oracle_episode_config() };
        let a = run_episode(1, &objects, &oracle(), &cfg, &mut seeded(4)).unwrap();
        let b = run_episode(1, &objects, &oracle(), &cfg, &mut seeded(4)).unwrap();
        assert_eq!(a, b);
        for t in &a.touches {
            assert!((t.posterior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(t.likelihoods.iter().all(|l| *l > 0.0 && *l <= 1.0));
        }
    }

    /// Predicts the same signal for every patch.
    struct Constant(Standardizer);

    impl TouchPredictor for Constant {
        fn predict_touch(&self, _: &DepthPatch) -> TactileSignal {
            TactileSignal::standardized([0.25; SIGNAL_DIM])
        }
        fn standardizer(&self) -> &Standardizer {
            &self.0
        }
    }

    #[test]
    fn location_ties_and_single_candidate_keep_first_frame() {
        let objects = distinct_objects();
        let cfg = CollectConfig::default();
        let p = Constant(Standardizer::new([0.0; SIGNAL_DIM], [1.0; SIGNAL_DIM]).unwrap());
        let first = cfg.random_frame(&objects[0], &mut seeded(2)).unwrap().0;
        let choice = select_touch_location(0, &objects, &p, &cfg, 16, &mut seeded(2)).unwrap();
        assert_eq!(choice.frame, first);
        assert_eq!(choice.candidate_index, 0);
        let choice = select_touch_location(0, &objects[..1], &oracle(), &cfg, 16, &mut seeded(2)).unwrap();
        assert_eq!(choice.frame, first);
    }

    #[test]
    fn location_selection_finds_the_notch() {
        // plain slab versus the same slab with a groove cut across the middle of its top
        let slab = Shape::Box { half_extents: Vec3::new(0.03, 0.03, 0.01) };
        let at = |s, t: Vec3| Primitive::new(s, RigidTransform::from_translation(t)).unwrap();
        let plain = ObjectModel::new("plain", alloc::vec![at(slab, Vec3::ZERO)], RigidTransform::IDENTITY).unwrap();
        let half = Shape::Box { half_extents: Vec3::new(0.0135, 0.03, 0.01) };
        let lower = Shape::Box { half_extents: Vec3::new(0.03, 0.03, 0.008) };
        let notched = ObjectModel::new(
            "notched",
            alloc::vec![
                at(half, Vec3::new(-0.0165, 0.0, 0.0)),
                at(half, Vec3::new(0.0165, 0.0, 0.0)),
                at(lower, Vec3::new(0.0, 0.0, -0.002)),
            ],
            RigidTransform::IDENTITY,
        )
        .unwrap();
        let objects = alloc::vec![notched, plain];
        let o = oracle();
        let choice = select_touch_location(0, &objects, &o, &o.config, 64, &mut seeded(5)).unwrap();
        // exhaustive check over the same candidate frames
        let mut rng = seeded(5);
        let frames: alloc::vec::Vec<SensorFrame> =
            (0..64).map(|_| o.config.random_frame(&objects[0], &mut rng).unwrap().0).collect();
        let scores: alloc::vec::Vec<f64> = frames
            .iter()
            .map(|f| separation(0, &[predicted_signal(&objects[0], f, &o), predicted_signal(&objects[1], f, &o)]))
            .collect();
        let best = argmax_first(&scores).unwrap();
        assert_eq!(choice.frame, frames[best]);
        assert!(scores[best] > 0.0);
        // the chosen pad footprint covers part of the groove |x| < 3 mm on the top face
        let c = choice.frame.pose.translation();
        assert!(c.z > 0.0 && c.x.abs() < 0.003 + 0.5 * 0.02 * core::f64::consts::SQRT_2, "{c:?}");
    }

    #[test]
    fn proprioception_ranking_matches_sampled_distances() {
        let at = |s, t: Vec3| Primitive::new(s, RigidTransform::from_translation(t)).unwrap();
        let hammer = ObjectModel::new(
            "hammer",
            alloc::vec![
                at(Shape::Cylinder { radius: 0.006, half_height: 0.05 }, Vec3::ZERO),
                at(Shape::Box { half_extents: Vec3::new(0.03, 0.01, 0.01) }, Vec3::new(0.0, 0.0, 0.05)),
            ],
            RigidTransform::IDENTITY,
        )
        .unwrap();
        let objects = alloc::vec![hammer, distinct_objects().remove(0), distinct_objects().remove(1)];
        let clouds: alloc::vec::Vec<alloc::vec::Vec<Vec3>> = objects
            .iter()
            .map(|o| {
                let mut r = seeded(77);
                (0..20_000).map(|_| o.sample_surface_point(&mut r).0).collect()
            })
            .collect();
        let mut r = seeded(5);
        for _ in 0..20 {
            let c = Vec3::new(r.random_range(-0.05..0.05), r.random_range(-0.05..0.05), r.random_range(-0.05..0.08));
            let l = proprioception_likelihoods(c, &objects, PROPRIOCEPTION_SCALE);
            let brute: alloc::vec::Vec<f64> =
                clouds.iter().map(|pts| pts.iter().map(|p| p.distance(c)).fold(f64::INFINITY, f64::min)).collect();
            let (a, b) = (argmax_first(&l).unwrap(), brute.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap().0);
            // sampled distances overestimate by at most the cloud spacing
            assert!(a == b || (brute[a] - brute[b]).abs() < 2e-3, "{c:?} {l:?} {brute:?}");
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn true_margin_converges(
                rows in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 4), 1..15),
                truth in 0usize..4,
            ) {
                let mut b = BeliefState::new((0..4).map(|i| alloc::format!("o{i}")).collect());
                for row in rows {
                    let mut l: alloc::vec::Vec<f64> = row.iter().map(|v| v * 0.5).collect();
                    l[truth] = 0.75;
                    b.update(&binarize_winner(&l).unwrap()).unwrap();
                }
                prop_assert_eq!(b.posterior()[truth], 1.0);
            }

            #[test]
            fn winner_ignores_monotone_rescaling(
                l in proptest::collection::vec(1e-6f64..1.0, 1..8),
                a in 0.1f64..10.0,
                p in 0.2f64..5.0,
                shift in -3.0f64..3.0,
            ) {
                let rescaled: alloc::vec::Vec<f64> = l.iter().map(|v| a * libm::pow(*v, p) + shift).collect();
                prop_assert_eq!(binarize_winner(&l).unwrap(), binarize_winner(&rescaled).unwrap());
            }

            #[test]
            fn likelihoods_lie_in_unit_interval(
                a in proptest::array::uniform15(-50.0f64..50.0),
                b in proptest::array::uniform15(-50.0f64..50.0),
            ) {
                let l = per_touch_likelihoods(&std_signal(a), &[std_signal(b)]).unwrap()[0];
                prop_assert!(l > 0.0 || a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() > 1e5);
                prop_assert!(l <= 1.0);
            }
        }
    }
}
