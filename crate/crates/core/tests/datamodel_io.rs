use std::fs;

use keystep_core::datamodel::{stpf, Manifest};
use keystep_core::encoder::checkpoint::Checkpoint;
use keystep_core::encoder::EncoderConfig;
use keystep_core::synth::{generate, SynthConfig};
use keystep_core::{Encoder32, Encoder64, Error};
use ndarray::Array2;

fn small() -> Manifest {
    generate(&SynthConfig {
        num_videos: 2,
        frames_per_video: 60,
        dims: vec![6, 3],
        seed: 2,
        ..Default::default()
    })
    .unwrap()
    .0
}

#[test]
fn manifest_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let m = small();
    let path = m.save(dir.path()).unwrap();
    assert_eq!(Manifest::load(&path).unwrap(), m);
}

#[test]
fn truncated_feature_file_is_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = small().save(dir.path()).unwrap();
    let feat = dir.path().join("video_001.cue1.stpf");
    let bytes = fs::read(&feat).unwrap();
    fs::write(&feat, &bytes[..bytes.len() - 4]).unwrap();
    assert!(matches!(Manifest::load(&path), Err(Error::Corruption { .. })));
}

#[test]
fn missing_feature_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = small().save(dir.path()).unwrap();
    fs::remove_file(dir.path().join("video_000.cue0.stpf")).unwrap();
    match Manifest::load(&path) {
        Err(Error::Io { path, .. }) => assert!(path.ends_with("video_000.cue0.stpf")),
        other => panic!("expected I/O error, got {other:?}"),
    }
}

#[test]
fn unknown_manifest_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = small().save(dir.path()).unwrap();
    let text = fs::read_to_string(&path).unwrap().replacen("\"version\"", "\"colour\": 1, \"version\"", 1);
    fs::write(&path, text).unwrap();
    assert!(matches!(Manifest::load(&path), Err(Error::Json { .. })));
}

#[test]
fn stpf_file_bytes_follow_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.stpf");
    let x = Array2::from_shape_fn((3, 2), |(i, j)| (i * 2 + j) as f32 - 1.5);
    stpf::write(&path, x.view()).unwrap();
    let bytes = fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 24 + 4 * 6);
    assert_eq!(&bytes[..4], b"STPF");
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 3);
    assert_eq!(f32::from_le_bytes(bytes[24..28].try_into().unwrap()), -1.5);
    assert_eq!(stpf::read(&path).unwrap(), x);
}

#[test]
fn checkpoints_round_trip_in_both_precisions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = EncoderConfig {
        model_dim: 8,
        mlp_hidden: 8,
        ..Default::default()
    };
    let dims = [("a".to_string(), 5), ("b".to_string(), 3)];
    let p32 = Encoder32::init(&cfg, &dims, 1).unwrap();
    let mut ck = Checkpoint::new(p32.clone());
    ck.state = serde_json::json!({"note": 1});
    let path = dir.path().join("m32.ckpt");
    ck.save(&path).unwrap();
    let back = Checkpoint::<f32>::load(&path).unwrap();
    assert_eq!(back.params, p32);
    assert_eq!(back.state, ck.state);

    let p64 = Encoder64::init(&cfg, &dims, 1).unwrap();
    let path = dir.path().join("m64.ckpt");
    Checkpoint::new(p64.clone()).save(&path).unwrap();
    assert_eq!(Checkpoint::<f64>::load(&path).unwrap().params, p64);
}

#[test]
fn truncated_checkpoint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = EncoderConfig {
        model_dim: 8,
        mlp_hidden: 8,
        ..Default::default()
    };
    let p = Encoder32::init(&cfg, &[("a".to_string(), 4)], 0).unwrap();
    let path = dir.path().join("m.ckpt");
    let bytes = Checkpoint::new(p).to_bytes();
    fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(Checkpoint::<f32>::load(&path).is_err());
}
