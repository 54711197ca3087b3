//! On-disk formats. All binary fields are little-endian; reals are `f32`.
//!
//! * `samples.bin`: `"I2T1"`, u32 version, u32 count, then per record u32
//!   object id, 12 frame values (row-major 3×4), penetration, 2304 patch
//!   values, 15 raw signal values, 3 contact point coordinates.
//! * network (`"I2TM"`): u32 version, u32 layer count, then per layer u32 in,
//!   u32 out, u8 activation code, weights (row-major out×in), bias.
//! * touch model (`"I2TF"`): u32 version, auxiliary weight, encoder, touch
//!   head and reconstruction head as networks, then 15 means and 15 standard
//!   deviations.
//!
//! Writing quantizes to `f32`; loading a written file and writing it again
//! reproduces it byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use touchbench_core::dataset::{CollectConfig, Dataset, Split, Standardizer, TouchSample};
use touchbench_core::model::I2TModel;
use touchbench_core::nn::{Activation, DenseNet, Layer};
use touchbench_core::render::{DepthPatch, SensorFrame, PATCH_PIXELS};
use touchbench_core::tactile::{SensorLayout, SignalSpace, TactileSignal, SIGNAL_DIM, SITES};
use touchbench_core::{RigidTransform, Vec3};

use crate::objects::ObjectSpec;

pub const SAMPLES_MAGIC: [u8; 4] = *b"I2T1";
pub const NET_MAGIC: [u8; 4] = *b"I2TM";
pub const MODEL_MAGIC: [u8; 4] = *b"I2TF";
pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SAMPLES_FILE: &str = "samples.bin";

/// Bytes per sample record.
pub const RECORD_BYTES: usize = 4 * (1 + 12 + 1 + PATCH_PIXELS + SIGNAL_DIM + 3);

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported {what} version {found} (this build reads {expected})")]
    UnsupportedVersion { what: &'static str, expected: u32, found: u32 },
    #[error("truncated {what}: needed {needed} bytes at offset {offset}, only {available} left")]
    Truncated { what: &'static str, offset: usize, needed: usize, available: usize },
    #[error("count mismatch: manifest lists {manifest} samples, payload holds {payload}")]
    CountMismatch { manifest: usize, payload: usize },
    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("invalid content: {0}")]
    Invalid(String),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] touchbench_core::Error),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], what: &'static str) -> Self {
        Self { bytes, pos: 0, what }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(FormatError::Truncated { what: self.what, offset: self.pos, needed: n, available });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<(), FormatError> {
        let found = self.take(4)?;
        if found != expected {
            return Err(FormatError::BadMagic {
                expected: String::from_utf8_lossy(&expected).into_owned(),
                found: String::from_utf8_lossy(found).into_owned(),
            });
        }
        Ok(())
    }

    fn version(&mut self) -> Result<(), FormatError> {
        let found = self.u32()?;
        if found != FORMAT_VERSION {
            return Err(FormatError::UnsupportedVersion { what: self.what, expected: FORMAT_VERSION, found });
        }
        Ok(())
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f64, FormatError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as f64)
    }

    fn reals(&mut self, n: usize) -> Result<Vec<f64>, FormatError> {
        let raw = self.take(4 * n)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64).collect())
    }

    fn finish(&self) -> Result<(), FormatError> {
        match self.bytes.len() - self.pos {
            0 => Ok(()),
            n => Err(FormatError::TrailingBytes(n)),
        }
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_reals<'a>(out: &mut Vec<u8>, v: impl IntoIterator<Item = &'a f64>) {
    for x in v {
        out.extend_from_slice(&(*x as f32).to_le_bytes());
    }
}

fn q(v: f64) -> f64 {
    v as f32 as f64
}

/// What a sample looks like after a write/read cycle.
pub fn quantize_sample(s: &TouchSample) -> TouchSample {
    let frame = SensorFrame {
        pose: RigidTransform::from_row_major_3x4(s.frame.pose.to_row_major_3x4().map(q)),
        ..s.frame
    };
    TouchSample {
        object_id: s.object_id,
        frame,
        penetration: q(s.penetration),
        patch: DepthPatch { values: s.patch.values.iter().map(|v| q(*v)).collect(), frame },
        signal_raw: TactileSignal::raw(s.signal_raw.values.map(q)),
        contact_point: Vec3::new(q(s.contact_point.x), q(s.contact_point.y), q(s.contact_point.z)),
    }
}

pub fn encode_samples(samples: &[TouchSample]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + samples.len() * RECORD_BYTES);
    out.extend_from_slice(&SAMPLES_MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    put_u32(&mut out, samples.len() as u32);
    for s in samples {
        put_u32(&mut out, s.object_id);
        put_reals(&mut out, &s.frame.pose.to_row_major_3x4());
        put_reals(&mut out, [&s.penetration]);
        put_reals(&mut out, &s.patch.values);
        put_reals(&mut out, &s.signal_raw.values);
        put_reals(&mut out, &[s.contact_point.x, s.contact_point.y, s.contact_point.z]);
    }
    out
}

/// Decode a samples payload; frames get the pad geometry recorded in the manifest.
pub fn decode_samples(bytes: &[u8], pad_side: f64, standoff: f64) -> Result<Vec<TouchSample>, FormatError> {
    let mut r = Reader::new(bytes, "samples payload");
    r.magic(SAMPLES_MAGIC)?;
    r.version()?;
    let count = r.u32()? as usize;
    let mut samples = Vec::with_capacity(count.min(bytes.len() / RECORD_BYTES + 1));
    for _ in 0..count {
        let object_id = r.u32()?;
        let m: [f64; 12] = r.reals(12)?.try_into().expect("12 values");
        let frame = SensorFrame::new(RigidTransform::from_row_major_3x4(m), pad_side, standoff)?;
        let penetration = r.f32()?;
        let patch = DepthPatch { values: r.reals(PATCH_PIXELS)?, frame };
        let signal_raw = TactileSignal::from_slice(&r.reals(SIGNAL_DIM)?, SignalSpace::Raw)?;
        let c = r.reals(3)?;
        samples.push(TouchSample { object_id, frame, penetration, patch, signal_raw, contact_point: Vec3::new(c[0], c[1], c[2]) });
    }
    r.finish()?;
    Ok(samples)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub name: String,
    pub parts: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub sites_mm: Vec<[f64; 2]>,
    pub kernel_sigma_mm: f64,
    pub gain_z: f64,
    pub gain_t: f64,
    pub noise_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TouchEntry {
    pub pad_side: f64,
    pub standoff: f64,
    pub gap: f64,
    pub penetration_mm: [f64; 2],
    pub noise: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizerEntry {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub object_set: String,
    pub objects: Vec<ObjectEntry>,
    pub count: usize,
    pub seed: u64,
    pub touch: TouchEntry,
    pub layout: LayoutEntry,
    pub train_fraction: f64,
    pub standardizer: StandardizerEntry,
    /// One entry per sample: 1 for training, 0 for validation.
    pub split: Vec<u8>,
}

impl DatasetManifest {
    pub fn describe(object_set: &str, specs: &[ObjectSpec], seed: u64, touch: &CollectConfig, train_fraction: f64, dataset: &Dataset) -> Self {
        let l = &touch.layout;
        Self {
            version: FORMAT_VERSION,
            object_set: object_set.into(),
            objects: specs.iter().map(|s| ObjectEntry { name: s.name.clone(), parts: s.to_string() }).collect(),
            count: dataset.samples.len(),
            seed,
            touch: TouchEntry {
                pad_side: touch.pad_side,
                standoff: touch.standoff,
                gap: touch.gap,
                penetration_mm: [touch.penetration_mm.0, touch.penetration_mm.1],
                noise: touch.noise,
            },
            layout: LayoutEntry {
                sites_mm: l.sites.iter().map(|&(x, y)| [x, y]).collect(),
                kernel_sigma_mm: l.kernel_sigma,
                gain_z: l.gain_z,
                gain_t: l.gain_t,
                noise_std: l.noise_std,
            },
            train_fraction,
            standardizer: StandardizerEntry { mean: dataset.standardizer.mean.to_vec(), std: dataset.standardizer.std.to_vec() },
            split: dataset.split.assignment().into_iter().map(u8::from).collect(),
        }
    }

    pub fn standardizer(&self) -> Result<Standardizer, FormatError> {
        let arr = |v: &[f64], what: &str| -> Result<[f64; SIGNAL_DIM], FormatError> {
            v.try_into().map_err(|_| FormatError::Invalid(format!("standardizer {what} needs {SIGNAL_DIM} values")))
        };
        Ok(Standardizer::new(arr(&self.standardizer.mean, "mean")?, arr(&self.standardizer.std, "std")?)?)
    }

    pub fn collect_config(&self) -> Result<CollectConfig, FormatError> {
        let sites: [(f64, f64); SITES] = self
            .layout
            .sites_mm
            .iter()
            .map(|p| (p[0], p[1]))
            .collect::<Vec<_>>()
            .try_into()
            .map_err(|_| FormatError::Invalid(format!("layout needs {SITES} sites")))?;
        let c = CollectConfig {
            pad_side: self.touch.pad_side,
            standoff: self.touch.standoff,
            gap: self.touch.gap,
            penetration_mm: (self.touch.penetration_mm[0], self.touch.penetration_mm[1]),
            layout: SensorLayout {
                sites,
                kernel_sigma: self.layout.kernel_sigma_mm,
                gain_z: self.layout.gain_z,
                gain_t: self.layout.gain_t,
                noise_std: self.layout.noise_std,
            },
            noise: self.touch.noise,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn object_specs(&self) -> Result<Vec<ObjectSpec>, FormatError> {
        self.objects
            .iter()
            .map(|o| ObjectSpec::parse(&o.name, &o.parts).map_err(|e| FormatError::Invalid(e.to_string())))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoredDataset {
    pub manifest: DatasetManifest,
    pub dataset: Dataset,
}

/// Manifest text and samples payload for a dataset.
pub fn encode_dataset(manifest: &DatasetManifest, dataset: &Dataset) -> Result<(String, Vec<u8>), FormatError> {
    if manifest.count != dataset.samples.len() {
        return Err(FormatError::CountMismatch { manifest: manifest.count, payload: dataset.samples.len() });
    }
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    Ok((text, encode_samples(&dataset.samples)))
}

pub fn decode_dataset(manifest_text: &str, payload: &[u8]) -> Result<StoredDataset, FormatError> {
    let manifest: DatasetManifest = serde_json::from_str(manifest_text)?;
    if manifest.version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion { what: "manifest", expected: FORMAT_VERSION, found: manifest.version });
    }
    let samples = decode_samples(payload, manifest.touch.pad_side, manifest.touch.standoff)?;
    if samples.len() != manifest.count {
        return Err(FormatError::CountMismatch { manifest: manifest.count, payload: samples.len() });
    }
    if manifest.split.len() != manifest.count || manifest.split.iter().any(|b| *b > 1) {
        return Err(FormatError::Invalid("split must hold one 0/1 entry per sample".into()));
    }
    let assignment: Vec<bool> = manifest.split.iter().map(|b| *b == 1).collect();
    let split = Split::from_assignment(&assignment);
    let standardizer = manifest.standardizer()?;
    Ok(StoredDataset { dataset: Dataset { samples, split, standardizer }, manifest })
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
}

impl LoadError {
    pub fn format_error(&self) -> Option<&FormatError> {
        match self {
            LoadError::Format { source, .. } => Some(source),
            LoadError::Io { .. } => None,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, LoadError> {
    std::fs::read(path).map_err(|source| LoadError::Io { path: path.into(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), LoadError> {
    std::fs::write(path, bytes).map_err(|source| LoadError::Io { path: path.into(), source })
}

pub fn save_dataset(dir: &Path, manifest: &DatasetManifest, dataset: &Dataset) -> Result<(), LoadError> {
    let (text, payload) =
        encode_dataset(manifest, dataset).map_err(|source| LoadError::Format { path: dir.into(), source })?;
    std::fs::create_dir_all(dir).map_err(|source| LoadError::Io { path: dir.into(), source })?;
    write(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    write(&dir.join(SAMPLES_FILE), &payload)
}

pub fn load_dataset(dir: &Path) -> Result<StoredDataset, LoadError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = String::from_utf8(read(&manifest_path)?).map_err(|_| LoadError::Format {
        path: manifest_path.clone(),
        source: FormatError::Invalid("manifest is not UTF-8".into()),
    })?;
    let payload = read(&dir.join(SAMPLES_FILE))?;
    decode_dataset(&text, &payload).map_err(|source| LoadError::Format { path: dir.into(), source })
}

pub fn encode_net(net: &DenseNet, out: &mut Vec<u8>) {
    out.extend_from_slice(&NET_MAGIC);
    put_u32(out, FORMAT_VERSION);
    put_u32(out, net.layers().len() as u32);
    for l in net.layers() {
        put_u32(out, l.in_dim as u32);
        put_u32(out, l.out_dim as u32);
        out.push(l.activation.code());
        put_reals(out, &l.weights);
        put_reals(out, &l.bias);
    }
}

fn read_net(r: &mut Reader<'_>) -> Result<DenseNet, FormatError> {
    r.magic(NET_MAGIC)?;
    r.version()?;
    let n = r.u32()? as usize;
    let mut layers = Vec::with_capacity(n.min(64));
    for _ in 0..n {
        let in_dim = r.u32()? as usize;
        let out_dim = r.u32()? as usize;
        let code = r.u8()?;
        let activation =
            Activation::from_code(code).ok_or_else(|| FormatError::Invalid(format!("activation code {code}")))?;
        let size = in_dim.checked_mul(out_dim).ok_or_else(|| FormatError::Invalid("layer too large".into()))?;
        let weights = r.reals(size)?;
        let bias = r.reals(out_dim)?;
        layers.push(Layer { in_dim, out_dim, weights, bias, activation });
    }
    Ok(DenseNet::new(layers)?)
}

pub fn decode_net(bytes: &[u8]) -> Result<DenseNet, FormatError> {
    let mut r = Reader::new(bytes, "network");
    let net = read_net(&mut r)?;
    r.finish()?;
    Ok(net)
}

pub fn encode_model(m: &I2TModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MODEL_MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    put_reals(&mut out, [&m.aux_weight]);
    for net in [&m.encoder, &m.touch_head, &m.recon_head] {
        encode_net(net, &mut out);
    }
    put_reals(&mut out, &m.standardizer.mean);
    put_reals(&mut out, &m.standardizer.std);
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<I2TModel, FormatError> {
    let mut r = Reader::new(bytes, "touch model");
    r.magic(MODEL_MAGIC)?;
    r.version()?;
    let aux = r.f32()?;
    let encoder = read_net(&mut r)?;
    let touch_head = read_net(&mut r)?;
    let recon_head = read_net(&mut r)?;
    let mean: [f64; SIGNAL_DIM] = r.reals(SIGNAL_DIM)?.try_into().expect("15 values");
    let std: [f64; SIGNAL_DIM] = r.reals(SIGNAL_DIM)?.try_into().expect("15 values");
    r.finish()?;
    Ok(I2TModel::new(encoder, touch_head, recon_head, Standardizer::new(mean, std)?, aux)?)
}

pub fn save_model(path: &Path, m: &I2TModel) -> Result<(), LoadError> {
    write(path, &encode_model(m))
}

pub fn load_model(path: &Path) -> Result<I2TModel, LoadError> {
    decode_model(&read(path)?).map_err(|source| LoadError::Format { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reader_reports_truncation_position() {
        let mut r = Reader::new(&[1, 2, 3], "x");
        assert_eq!(r.u8().unwrap(), 1);
        match r.u32() {
            Err(FormatError::Truncated { offset: 1, needed: 4, available: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn record_size() {
        assert_eq!(RECORD_BYTES, 4 * 2336);
    }
}
