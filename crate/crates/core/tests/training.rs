use keystep_core::bmc2::LossConfig;
use keystep_core::encoder::EncoderConfig;
use keystep_core::synth::{generate, SynthConfig};
use keystep_core::trainer::{gradient_check, resume, train, TrainConfig, TrainState};
use keystep_core::Encoder64;

fn tiny_encoder() -> EncoderConfig {
    EncoderConfig {
        num_layers: 2,
        num_heads: 2,
        model_dim: 16,
        mlp_hidden: 16,
        ..Default::default()
    }
}

fn tiny_data(noise: f64, videos: usize, seed: u64) -> keystep_core::datamodel::Manifest {
    let cfg = SynthConfig {
        num_videos: videos,
        num_steps: 5,
        frames_per_video: 60,
        dims: vec![8],
        cue_noise: vec![noise],
        seed,
        ..Default::default()
    };
    generate(&cfg).unwrap().0
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let manifest = tiny_data(0.5, 2, 1);
    let cfg = TrainConfig {
        num_chunks: 8,
        batch_size: 2,
        encoder: tiny_encoder(),
        ..Default::default()
    };
    let state = TrainState::<f64>::init(&manifest, &cfg).unwrap();
    let report = gradient_check(&state.params, &manifest, &cfg, 1e-5).unwrap();
    assert!(report.max_relative_error < 1e-4, "{report:?}");
    assert_eq!(report.tensors.len(), state.params.tensors().len());
}

#[test]
fn single_modality_gradient_check() {
    let manifest = tiny_data(0.5, 1, 2);
    let cfg = TrainConfig {
        num_chunks: 8,
        modalities: Some(vec!["cue0".into()]),
        loss: LossConfig {
            lambda: Some(vec![vec![1.0]]),
            ..Default::default()
        },
        encoder: tiny_encoder(),
        ..Default::default()
    };
    let params = Encoder64::init(&cfg.encoder, &[("cue0".into(), 8)], 3).unwrap();
    let report = gradient_check(&params, &manifest, &cfg, 1e-5).unwrap();
    assert!(report.max_relative_error < 1e-4, "{report:?}");
}

#[test]
fn zero_epochs_returns_initialization() {
    let manifest = tiny_data(0.5, 2, 0);
    let cfg = TrainConfig {
        epochs: 0,
        encoder: tiny_encoder(),
        ..Default::default()
    };
    let (params, history) = train::<f32>(&manifest, &cfg).unwrap();
    let init = TrainState::<f32>::init(&manifest, &cfg).unwrap();
    assert_eq!(params, init.params);
    assert_eq!(history.epochs(), 0);
}

#[test]
fn loss_halves_on_clean_data() {
    let manifest = keystep_core::synth::generate(&SynthConfig {
        num_videos: 2,
        frames_per_video: 200,
        background_fraction: 0.0,
        cue_noise: vec![0.0],
        ..Default::default()
    })
    .unwrap()
    .0;
    let cfg = TrainConfig {
        epochs: 50,
        ..Default::default()
    };
    let (_, history) = train::<f32>(&manifest, &cfg).unwrap();
    let first = history.epoch_loss[0];
    let last = history.epoch_loss[49];
    assert!(history.epoch_loss.iter().all(|l| l.is_finite()));
    assert!(last < 0.5 * first, "{first} -> {last}");
}

#[test]
fn deterministic_and_thread_independent() {
    let manifest = tiny_data(0.5, 3, 4);
    let mut cfg = TrainConfig {
        epochs: 3,
        num_chunks: 16,
        batch_size: 2,
        encoder: EncoderConfig {
            dropout: 0.1,
            ..tiny_encoder()
        },
        deterministic: true,
        ..Default::default()
    };
    let a = train::<f32>(&manifest, &cfg).unwrap();
    let b = train::<f32>(&manifest, &cfg).unwrap();
    cfg.deterministic = false;
    let c = train::<f32>(&manifest, &cfg).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1.epoch_loss, b.1.epoch_loss);
    assert_eq!(a.0, c.0);
}

#[test]
fn resume_matches_uninterrupted_run() {
    let manifest = tiny_data(0.5, 2, 5);
    let mut cfg = TrainConfig {
        epochs: 4,
        num_chunks: 16,
        encoder: tiny_encoder(),
        ..Default::default()
    };
    let (full, hist) = train::<f32>(&manifest, &cfg).unwrap();

    cfg.epochs = 2;
    let (_, _) = train::<f32>(&manifest, &cfg).unwrap();
    let mut state = TrainState::<f32>::init(&manifest, &cfg).unwrap();
    resume(&manifest, &cfg, &mut state).unwrap();
    let bytes = state.to_checkpoint(&cfg).to_bytes();
    let ck = keystep_core::encoder::checkpoint::Checkpoint::<f32>::from_bytes(&bytes, "mem".as_ref()).unwrap();
    cfg.epochs = 4;
    let mut restored = TrainState::from_checkpoint(ck, &cfg).unwrap();
    resume(&manifest, &cfg, &mut restored).unwrap();
    assert_eq!(restored.params, full);
    assert_eq!(restored.history.epoch_loss, hist.epoch_loss);
}
