//! Subcommand implementations. Each echoes the resolved configuration, writes
//! its human-readable output to `out`, and returns its results.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use touchbench_core::analysis::{cluster_report, Cluster, KMeans};
use touchbench_core::dataset::{collect_indexed, Dataset, Standardizer, TouchSample};
use touchbench_core::model::{train, I2TModel, TouchPredictor, TrainReport};
use touchbench_core::nn::{gradcheck as finite_differences, GradcheckReport, GRADCHECK_MAX_PARAMS};
use touchbench_core::recognition::{run_episode, EpisodeReport, Mode};
use touchbench_core::rng;
use touchbench_core::shapeclass::{
    batch_loss_and_gradients, classifier_net, generate_stamp_dataset, train_classifier, ClassifierHyper,
    ClassifierReport,
};
use touchbench_core::tactile::SIGNAL_DIM;

use crate::formats::{self, DatasetManifest, StoredDataset};
use crate::report::{self, RecognitionRow};
use crate::{parallel_map, Config, Error, Result};

/// Held-out touch-MSE must not exceed this fraction of the mean-predictor MSE.
pub const LEARNING_RATIO: f64 = 0.8;
/// Largest tolerated finite-difference relative error.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io(Path::new("<output>"), e))
}

fn echo(out: &mut dyn Write, command: &str, cfg: &Config) -> Result<()> {
    let mut s = format!("# touchbench {command}\n# seed = {}\n", cfg.seed()?);
    for line in cfg.render().lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    emit(out, &s)
}

fn override_opt<T: ToString>(cfg: &mut Config, key: &str, value: Option<T>) -> Result<()> {
    if let Some(v) = value {
        cfg.set(key, v)?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, Default)]
pub struct GenDataArgs {
    pub objects: Option<String>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

/// Simulate touches over an object set and store them with their split and standardizer.
pub fn gen_data(cfg: &mut Config, a: &GenDataArgs, out: &mut dyn Write) -> Result<StoredDataset> {
    override_opt(cfg, "samples", a.n)?;
    override_opt(cfg, "seed", a.seed)?;
    let set = a.objects.as_deref().unwrap_or("train");
    echo(out, "gen-data", cfg)?;
    let specs = cfg.object_set(set)?;
    let objects = cfg.build_set(set)?;
    let touch = cfg.collect_config()?;
    let n: usize = cfg.get("samples")?;
    if n < 2 {
        return Err(Error::Usage("need at least two samples".into()));
    }
    let seed = cfg.seed()?;
    let fraction = cfg.train_fraction()?;
    let samples = parallel_map(n, cfg.workers()?, |i| collect_indexed(&objects, i, seed, &touch))
        .into_iter()
        .map(|s| s.map(|s| formats::quantize_sample(&s)))
        .collect::<touchbench_core::Result<Vec<TouchSample>>>()?;
    let dataset = Dataset::prepare(samples, fraction, seed)?;
    let manifest = DatasetManifest::describe(set, &specs, seed, &touch, fraction, &dataset);
    formats::save_dataset(&a.out, &manifest, &dataset)?;
    let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    emit(
        out,
        &format!(
            "wrote {n} samples of set `{set}` ({}) to {}: {} train / {} validation\n",
            names.join(", "),
            a.out.display(),
            dataset.split.train.len(),
            dataset.split.validation.len()
        ),
    )?;
    Ok(StoredDataset { manifest, dataset })
}

#[derive(Clone, Debug, Default)]
pub struct TrainArgs {
    pub data: PathBuf,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn train_model(cfg: &mut Config, a: &TrainArgs, out: &mut dyn Write) -> Result<(I2TModel, TrainReport)> {
    override_opt(cfg, "epochs", a.epochs)?;
    override_opt(cfg, "seed", a.seed)?;
    echo(out, "train", cfg)?;
    let stored = formats::load_dataset(&a.data)?;
    let hyper = cfg.train_hyper()?;
    let (model, rep) = train(&stored.dataset, &hyper)?;
    let model = model.quantized();
    formats::save_model(&a.out, &model)?;
    let mut s = String::from("epoch  train_touch  train_recon  val_touch  val_recon\n");
    for e in 0..rep.train_touch_mse.len() {
        s.push_str(&format!(
            "{:>5}  {:>11.5}  {:>11.5}  {:>9.5}  {:>9.5}\n",
            e + 1,
            rep.train_touch_mse[e],
            rep.train_recon_mse[e],
            rep.validation_touch_mse[e],
            rep.validation_recon_mse[e]
        ));
    }
    let best = rep.best_epoch.map_or("none".to_string(), |b| (b + 1).to_string());
    s.push_str(&format!(
        "kept epoch {best}; held-out touch MSE {:.5} vs mean predictor {:.5} (ratio {:.3})\nwrote {}\n",
        rep.final_touch_mse,
        rep.baseline_touch_mse,
        rep.final_touch_mse / rep.baseline_touch_mse,
        a.out.display()
    ));
    emit(out, &s)?;
    Ok((model, rep))
}

#[derive(Clone, Debug, Default)]
pub struct EvalArgs {
    pub data: PathBuf,
    pub model: PathBuf,
    /// Score every sample instead of the validation split.
    pub all: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub samples: usize,
    pub touch_mse: f64,
    pub baseline_mse: f64,
}

impl EvalResult {
    pub fn ratio(&self) -> f64 {
        self.touch_mse / self.baseline_mse
    }
}

/// Touch-MSE of `model` against always predicting its training mean, both in
/// the model's standardized space.
pub fn evaluate<'a>(model: &I2TModel, samples: impl IntoIterator<Item = &'a TouchSample>) -> Result<EvalResult> {
    let samples: Vec<&TouchSample> = samples.into_iter().collect();
    if samples.is_empty() {
        return Err(Error::Usage("no samples to evaluate".into()));
    }
    let (touch_mse, _) = model.evaluate(samples.iter().copied(), false)?;
    let st: &Standardizer = model.standardizer();
    let mut base = 0.0;
    for s in &samples {
        let z = st.apply(&s.signal_raw)?;
        base += z.values.iter().map(|v| v * v).sum::<f64>() / SIGNAL_DIM as f64;
    }
    Ok(EvalResult { samples: samples.len(), touch_mse, baseline_mse: base / samples.len() as f64 })
}

pub fn eval(cfg: &mut Config, a: &EvalArgs, out: &mut dyn Write) -> Result<EvalResult> {
    echo(out, "eval", cfg)?;
    let stored = formats::load_dataset(&a.data)?;
    let model = formats::load_model(&a.model)?;
    let d = &stored.dataset;
    let r = if a.all { evaluate(&model, &d.samples)? } else { evaluate(&model, d.validation())? };
    emit(
        out,
        &format!(
            "{} samples: touch MSE {:.5}, mean predictor {:.5}, ratio {:.3} (threshold {LEARNING_RATIO})\n",
            r.samples,
            r.touch_mse,
            r.baseline_mse,
            r.ratio()
        ),
    )?;
    if r.ratio() > LEARNING_RATIO {
        return Err(Error::CheckFailed(format!("MSE ratio {:.3} exceeds {LEARNING_RATIO}", r.ratio())));
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradcheckOutcome {
    pub touch_model: GradcheckReport,
    pub classifier: GradcheckReport,
}

/// Finite-difference checks of the touch model on one simulated touch and of
/// the stamp classifier on a small batch.
pub fn run_gradchecks(cfg: &Config, seed: u64) -> Result<GradcheckOutcome> {
    let objects = cfg.build_set("train")?;
    let touch = cfg.collect_config()?;
    let samples: Vec<TouchSample> =
        (0..8).map(|i| collect_indexed(&objects, i, seed, &touch)).collect::<touchbench_core::Result<_>>()?;
    let st = Standardizer::fit(samples.iter().map(|s| &s.signal_raw))?;
    let mut model = I2TModel::init(st.clone(), cfg.train_hyper()?.aux_weight, seed)?;
    let sample = &samples[0];
    let target = st.apply(&sample.signal_raw)?;
    let (_, grads) = model.loss_and_gradients(&sample.patch, &target, true)?;
    let touch_model = finite_differences(
        &mut model,
        &grads,
        |m: &I2TModel| m.total_loss(&sample.patch, &target).expect("standardized target"),
        GRADCHECK_MAX_PARAMS,
        &mut rng::stream(seed, 2),
    )?;

    let stamps = generate_stamp_dataset(20, seed, &cfg.stamp_config()?)?;
    let st = Standardizer::fit(stamps.iter().map(|s| &s.signal_raw))?;
    let mut x = touchbench_core::nn::Matrix::zeros(stamps.len(), SIGNAL_DIM);
    for (i, s) in stamps.iter().enumerate() {
        x.row_mut(i).copy_from_slice(&st.apply(&s.signal_raw)?.values);
    }
    let labels: Vec<usize> = stamps.iter().map(|s| s.shape.index()).collect();
    let mut net = classifier_net(seed)?;
    let (_, grads) = batch_loss_and_gradients(&net, &x, &labels)?;
    let classifier = finite_differences(
        &mut net,
        &grads,
        |n| batch_loss_and_gradients(n, &x, &labels).expect("fixed shapes").0,
        GRADCHECK_MAX_PARAMS,
        &mut rng::stream(seed, 3),
    )?;
    Ok(GradcheckOutcome { touch_model, classifier })
}

pub fn gradcheck(cfg: &mut Config, seed: Option<u64>, out: &mut dyn Write) -> Result<GradcheckOutcome> {
    override_opt(cfg, "seed", seed)?;
    echo(out, "gradcheck", cfg)?;
    let r = run_gradchecks(cfg, cfg.seed()?)?;
    let mut s = String::new();
    for (name, g) in [("touch model", r.touch_model), ("shape classifier", r.classifier)] {
        s.push_str(&format!(
            "{name}: {} parameters, max relative error {:.3e}\n",
            g.checked, g.max_relative_error
        ));
    }
    emit(out, &s)?;
    let worst = r.touch_model.max_relative_error.max(r.classifier.max_relative_error);
    if !(worst < GRADCHECK_TOLERANCE) {
        return Err(Error::CheckFailed(format!("gradient error {worst:.3e} is not below {GRADCHECK_TOLERANCE:e}")));
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeChoice {
    I2T,
    Proprioception,
    Both,
}

impl ModeChoice {
    pub fn modes(self) -> Vec<Mode> {
        match self {
            ModeChoice::I2T => vec![Mode::I2T],
            ModeChoice::Proprioception => vec![Mode::Proprioception],
            ModeChoice::Both => vec![Mode::Proprioception, Mode::I2T],
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecognizeArgs {
    pub model: PathBuf,
    pub set: String,
    pub mode: ModeChoice,
    pub episodes: Option<usize>,
    pub touches: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

/// `episodes` runs per true object. Episode `j` of object `o` uses stream
/// `o·episodes + j` of `seed` in every mode, so modes see paired draws.
pub fn recognition_runs(
    cfg: &Config,
    model: &I2TModel,
    set: &str,
    mode: Mode,
    episodes: usize,
    seed: u64,
) -> Result<Vec<EpisodeReport>> {
    let objects = cfg.build_set(set)?;
    let ec = cfg.episode_config(mode)?;
    let total = objects.len() * episodes;
    parallel_map(total, cfg.workers()?, |k| {
        run_episode(k / episodes, &objects, model, &ec, &mut rng::stream(seed, k as u64))
    })
    .into_iter()
    .map(|r| r.map_err(Error::from))
    .collect()
}

pub fn recognize(cfg: &mut Config, a: &RecognizeArgs, out: &mut dyn Write) -> Result<Vec<(Mode, Vec<EpisodeReport>)>> {
    override_opt(cfg, "episodes", a.episodes)?;
    override_opt(cfg, "touches", a.touches)?;
    override_opt(cfg, "seed", a.seed)?;
    echo(out, "recognize", cfg)?;
    let model = formats::load_model(&a.model)?;
    let episodes: usize = cfg.get("episodes")?;
    if episodes == 0 {
        return Err(Error::Usage("need at least one episode".into()));
    }
    let seed = cfg.seed()?;
    let mut jsonl = String::new();
    let mut results = Vec::new();
    let mut row = RecognitionRow { set: a.set.clone(), proprioception: f64::NAN, i2t: f64::NAN };
    for mode in a.mode.modes() {
        let reps = recognition_runs(cfg, &model, &a.set, mode, episodes, seed)?;
        jsonl.push_str(&report::episode_jsonl(&a.set, seed, &reps));
        let acc = report::final_accuracy(&reps);
        match mode {
            Mode::I2T => row.i2t = acc,
            Mode::Proprioception => row.proprioception = acc,
        }
        let per_touch: Vec<String> =
            report::accuracy_per_touch(&reps).iter().map(|a| format!("{:.2}", a)).collect();
        emit(out, &format!("{} on `{}`: final accuracy {:.3}; per touch {}\n", mode.as_str(), a.set, acc, per_touch.join(" ")))?;
        results.push((mode, reps));
    }
    write_file(&a.out, jsonl.as_bytes())?;
    if a.mode == ModeChoice::Both {
        emit(out, &report::recognition_table(&[row]))?;
    }
    emit(out, &format!("wrote {}\n", a.out.display()))?;
    Ok(results)
}

#[derive(Clone, Debug, Default)]
pub struct ShapeclassArgs {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeclassOutcome {
    pub trained: ClassifierReport,
    /// Same split and initialization, no training.
    pub untrained: ClassifierReport,
}

pub fn shapeclass(cfg: &mut Config, a: &ShapeclassArgs, out: &mut dyn Write) -> Result<ShapeclassOutcome> {
    override_opt(cfg, "stamp_samples", a.n)?;
    override_opt(cfg, "seed", a.seed)?;
    override_opt(cfg, "stamp_epochs", a.epochs)?;
    echo(out, "shapeclass", cfg)?;
    let n: usize = cfg.get("stamp_samples")?;
    let samples = generate_stamp_dataset(n, cfg.seed()?, &cfg.stamp_config()?)?;
    let hyper = cfg.classifier_hyper()?;
    let (_, trained) = train_classifier(&samples, &hyper)?;
    let (_, untrained) = train_classifier(&samples, &ClassifierHyper { epochs: 0, ..hyper })?;
    let mut s = report::shape_table(&trained);
    s.push_str("confusion (rows true, columns predicted):\n");
    for row in &trained.confusion {
        s.push_str(&row.iter().map(|c| format!("{c:>5}")).collect::<String>());
        s.push('\n');
    }
    s.push_str(&format!("untrained control total accuracy {:.3}\n", untrained.total));
    emit(out, &s)?;
    Ok(ShapeclassOutcome { trained, untrained })
}

#[derive(Clone, Debug, Default)]
pub struct ClusterArgs {
    pub data: PathBuf,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub pgm_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct ClusterJson<'a> {
    k: usize,
    seed: u64,
    iterations: usize,
    converged: bool,
    inertia: &'a [f64],
    clusters: Vec<ClusterEntry<'a>>,
}

#[derive(Serialize)]
struct ClusterEntry<'a> {
    size: usize,
    mean_signal: &'a [f64],
    mean_patch: &'a [f64],
}

pub fn cluster(cfg: &mut Config, a: &ClusterArgs, out: &mut dyn Write) -> Result<(KMeans, Vec<Cluster>)> {
    override_opt(cfg, "clusters", a.k)?;
    override_opt(cfg, "seed", a.seed)?;
    echo(out, "cluster", cfg)?;
    let stored = formats::load_dataset(&a.data)?;
    let k: usize = cfg.get("clusters")?;
    let seed = cfg.seed()?;
    let (km, clusters) = cluster_report(&stored.dataset.samples, k, seed)?;
    let mut s = format!("k-means, k = {k}: {} iterations, inertia {:.4}\n", km.iterations, km.final_inertia());
    for (i, c) in clusters.iter().enumerate() {
        let z: Vec<String> = (0..5).map(|j| format!("{:.2}", c.mean_signal[3 * j + 2])).collect();
        s.push_str(&format!("cluster {i}: {} samples, mean normal readings [{}]\n", c.size, z.join(", ")));
    }
    emit(out, &s)?;
    if let Some(path) = &a.out {
        let doc = ClusterJson {
            k,
            seed,
            iterations: km.iterations,
            converged: km.converged,
            inertia: &km.inertia,
            clusters: clusters
                .iter()
                .map(|c| ClusterEntry { size: c.size, mean_signal: &c.mean_signal, mean_patch: &c.mean_patch })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
        text.push('\n');
        write_file(path, text.as_bytes())?;
    }
    if let Some(dir) = &a.pgm_dir {
        for (i, c) in clusters.iter().enumerate() {
            write_file(&dir.join(format!("cluster{i}.pgm")), &report::patch_pgm(&c.mean_patch))?;
        }
    }
    Ok((km, clusters))
}
