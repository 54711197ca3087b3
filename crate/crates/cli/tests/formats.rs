use std::fs;

use touchbench::commands::{self, GenDataArgs, TrainArgs};
use touchbench::formats::{self, FormatError, MANIFEST_FILE, SAMPLES_FILE};
use touchbench::Config;

fn small_dataset(dir: &std::path::Path, n: usize) -> formats::StoredDataset {
    let mut cfg = Config::defaults();
    let args = GenDataArgs { objects: None, n: Some(n), seed: Some(3), out: dir.to_path_buf() };
    commands::gen_data(&mut cfg, &args, &mut std::io::sink()).unwrap()
}

#[test]
fn dataset_round_trip_is_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let stored = small_dataset(tmp.path(), 12);
    let loaded = formats::load_dataset(tmp.path()).unwrap();
    assert_eq!(loaded.manifest, stored.manifest);
    assert_eq!(loaded.dataset, stored.dataset);
    for (a, b) in loaded.dataset.samples.iter().zip(&stored.dataset.samples) {
        assert_eq!(a, &formats::quantize_sample(b));
    }

    let manifest = fs::read_to_string(tmp.path().join(MANIFEST_FILE)).unwrap();
    let payload = fs::read(tmp.path().join(SAMPLES_FILE)).unwrap();
    let (m2, p2) = formats::encode_dataset(&loaded.manifest, &loaded.dataset).unwrap();
    assert_eq!(m2, manifest);
    assert_eq!(p2, payload);
}

#[test]
fn model_round_trip_is_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    small_dataset(tmp.path(), 10);
    let path = tmp.path().join("m.i2tf");
    let mut cfg = Config::defaults();
    let args = TrainArgs { data: tmp.path().to_path_buf(), epochs: Some(1), seed: Some(1), out: path.clone() };
    let (model, _) = commands::train_model(&mut cfg, &args, &mut std::io::sink()).unwrap();
    let bytes = fs::read(&path).unwrap();
    let loaded = formats::decode_model(&bytes).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(formats::encode_model(&loaded), bytes);
}

#[test]
fn corrupted_files_raise_distinct_errors() {
    let tmp = tempfile::tempdir().unwrap();
    small_dataset(tmp.path(), 6);
    let manifest = fs::read_to_string(tmp.path().join(MANIFEST_FILE)).unwrap();
    let payload = fs::read(tmp.path().join(SAMPLES_FILE)).unwrap();

    let mut bad = payload.clone();
    bad[0] = b'X';
    assert!(matches!(formats::decode_dataset(&manifest, &bad), Err(FormatError::BadMagic { .. })));

    let cut = &payload[..payload.len() - 5];
    assert!(matches!(formats::decode_dataset(&manifest, cut), Err(FormatError::Truncated { .. })));

    let recount = manifest.replace("\"count\": 6", "\"count\": 7");
    assert_ne!(recount, manifest);
    assert!(matches!(
        formats::decode_dataset(&recount, &payload),
        Err(FormatError::CountMismatch { manifest: 7, payload: 6 })
    ));

    let mut extra = payload.clone();
    extra.push(0);
    assert!(matches!(formats::decode_dataset(&manifest, &extra), Err(FormatError::TrailingBytes(1))));

    let mut version = payload.clone();
    version[4] = 9;
    assert!(matches!(formats::decode_dataset(&manifest, &version), Err(FormatError::UnsupportedVersion { .. })));

    let model = formats::encode_model(
        &touchbench_core::model::I2TModel::init(
            touchbench_core::dataset::Standardizer::new([0.0; 15], [1.0; 15]).unwrap(),
            0.5,
            0,
        )
        .unwrap(),
    );
    let mut bad = model.clone();
    bad[3] = b'?';
    assert!(matches!(formats::decode_model(&bad), Err(FormatError::BadMagic { .. })));
    assert!(matches!(formats::decode_model(&model[..model.len() / 2]), Err(FormatError::Truncated { .. })));
}

#[test]
fn missing_files_name_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let err = formats::load_dataset(&tmp.path().join("nope")).unwrap_err();
    assert!(err.to_string().contains("nope"));
    assert!(err.format_error().is_none());
}
