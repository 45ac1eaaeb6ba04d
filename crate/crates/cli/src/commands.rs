use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use keystep_core::datamodel::{Manifest, VideoRecord, BACKGROUND};
use keystep_core::encoder::checkpoint::Checkpoint;
use keystep_core::encoder::concat_features;
use keystep_core::eval::{self, EvalReport};
use keystep_core::keysteps::{self, KeyStepResult};
use keystep_core::trainer::{self, TrainState};
use keystep_core::{synth, Encoder32, Error, Result};
use ndarray::Array2;
use serde::Serialize;

use crate::config::{FeatureSource, RunConfig};
use crate::report;

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const HISTORY_FILE: &str = "history.json";
pub const TIMING_FILE: &str = "timing.json";
pub const EVAL_FILE: &str = "eval.json";
const GRAD_CHECK_LIMIT: f64 = 1e-3;
const GRAD_CHECK_EPS: f64 = 1e-5;

pub fn write_json<S: Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let out = RunConfig::required(&cfg.paths.out, "output directory (--out)")?;
    let (manifest, gt) = synth::generate(&cfg.synth)?;
    let path = manifest.save(&out)?;
    write_json(&out.join("segments.json"), &gt.segments)?;
    log::info!("wrote {} videos to {}", manifest.len(), path.display());
    println!("separability {:.4}", synth::separability_report(&manifest, &gt));
    Ok(())
}

#[derive(Serialize)]
struct Timing<'a> {
    epoch_seconds: &'a [f64],
    total_seconds: f64,
}

fn save_training(out: &Path, cfg: &RunConfig, state: &mut TrainState<f32>) -> Result<()> {
    state.to_checkpoint(&cfg.train).save(&out.join(CHECKPOINT_FILE))?;
    state.history.checkpoint = Some(CHECKPOINT_FILE.into());
    write_json(&out.join(HISTORY_FILE), &state.history)
}

pub fn train(cfg: &RunConfig, resume: bool, grad_check: bool, save_every: usize) -> Result<()> {
    cfg.train.validate()?;
    let manifest = Manifest::load(&RunConfig::required(&cfg.paths.manifest, "manifest (--manifest)")?)?;
    let out = RunConfig::required(&cfg.paths.out, "output directory (--out)")?;
    create_dir(&out)?;
    let mut state = if resume {
        let ck = Checkpoint::<f32>::load(&out.join(CHECKPOINT_FILE))?;
        let state = TrainState::from_checkpoint(ck, &cfg.train)?;
        log::info!("resuming after epoch {}", state.epochs_done());
        state
    } else {
        TrainState::init(&manifest, &cfg.train)?
    };
    if grad_check {
        let rep = trainer::gradient_check(&state.params, &manifest, &cfg.train, GRAD_CHECK_EPS)?;
        println!("gradient check: max relative error {:.3e}", rep.max_relative_error);
        if rep.max_relative_error.is_nan() || rep.max_relative_error > GRAD_CHECK_LIMIT {
            return Err(Error::Numeric(format!(
                "gradient check failed: relative error {:.3e} exceeds {GRAD_CHECK_LIMIT:e}",
                rep.max_relative_error
            )));
        }
    }
    let started = Instant::now();
    while state.epochs_done() < cfg.train.epochs {
        trainer::run_epoch(&manifest, &cfg.train, &mut state)?;
        if save_every > 0 && state.epochs_done() % save_every == 0 {
            save_training(&out, cfg, &mut state)?;
        }
    }
    save_training(&out, cfg, &mut state)?;
    write_json(
        &out.join(TIMING_FILE),
        &Timing {
            epoch_seconds: &state.history.epoch_seconds,
            total_seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    match state.history.epoch_loss.last() {
        Some(loss) => println!("trained {} epochs, final loss {loss:.6}", state.epochs_done()),
        None => println!("saved initialization (0 epochs)"),
    }
    Ok(())
}

/// One-hot ground-truth steps with an extra column for background.
fn oracle_features(rec: &VideoRecord) -> Result<Array2<f64>> {
    let labels = rec
        .step_labels
        .as_ref()
        .ok_or_else(|| Error::Data(format!("video {} has no step_labels for oracle features", rec.video_id)))?;
    let width = labels.iter().copied().max().unwrap_or(0).max(0) as usize + 2;
    let mut x = Array2::zeros((labels.len(), width));
    for (t, &l) in labels.iter().enumerate() {
        x[[t, if l == BACKGROUND { 0 } else { l as usize + 1 }]] = 1.0;
    }
    Ok(x)
}

fn raw_features(rec: &VideoRecord, modalities: &[String]) -> Result<Array2<f32>> {
    let parts = modalities
        .iter()
        .map(|m| Ok(rec.modality(m)?.data().to_owned()))
        .collect::<Result<Vec<_>>>()?;
    Ok(concat_features(&parts))
}

/// Per-video features selected by the inference settings.
pub fn features(cfg: &RunConfig, manifest: &Manifest) -> Result<Vec<Array2<f64>>> {
    let chosen = cfg.inference.modalities.clone();
    match cfg.inference.features {
        FeatureSource::Oracle => manifest.records.iter().map(oracle_features).collect(),
        FeatureSource::Raw => {
            let mods = chosen.unwrap_or_else(|| manifest.modality_names.clone());
            manifest
                .records
                .iter()
                .map(|r| Ok(raw_features(r, &mods)?.mapv(f64::from)))
                .collect()
        }
        FeatureSource::Model => {
            let path = RunConfig::required(&cfg.paths.checkpoint, "checkpoint (--checkpoint)")?;
            let params: Encoder32 = Checkpoint::load(&path)?.params;
            let mods = chosen.unwrap_or_else(|| params.modalities.clone());
            for m in &mods {
                if !params.modalities.contains(m) {
                    return Err(Error::Config(format!(
                        "inference modality {m} was not trained; checkpoint has {}",
                        params.modalities.join(", ")
                    )));
                }
            }
            manifest
                .records
                .iter()
                .map(|r| Ok(params.encode_record(r, &mods)?.mapv(f64::from)))
                .collect()
        }
    }
}

#[derive(Serialize)]
struct VideoKeySteps<'a> {
    video_id: &'a str,
    #[serde(flatten)]
    result: &'a KeyStepResult,
}

pub fn key_step_file(out: &Path, video_id: &str) -> PathBuf {
    out.join(format!("{video_id}.keysteps.json"))
}

pub fn extract(cfg: &RunConfig) -> Result<()> {
    cfg.extract.validate()?;
    let manifest = Manifest::load(&RunConfig::required(&cfg.paths.manifest, "manifest (--manifest)")?)?;
    let out = RunConfig::required(&cfg.paths.out, "output directory (--out)")?;
    create_dir(&out)?;
    let feats = features(cfg, &manifest)?;
    for (rec, x) in manifest.records.iter().zip(&feats) {
        if cfg.extract.num_clusters > x.nrows() {
            return Err(Error::Config(format!(
                "K = {} exceeds the {} frames of video {}",
                cfg.extract.num_clusters,
                x.nrows(),
                rec.video_id
            )));
        }
        let result = keysteps::extract_key_steps(x.view(), rec.timestamps(), &cfg.extract)?;
        log::info!("{}: {} key steps", rec.video_id, result.key_steps.len());
        write_json(
            &key_step_file(&out, &rec.video_id),
            &VideoKeySteps {
                video_id: &rec.video_id,
                result: &result,
            },
        )?;
    }
    println!("extracted key steps for {} videos into {}", manifest.len(), out.display());
    Ok(())
}

pub fn evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    let eval_cfg = cfg.eval_config();
    eval_cfg.extract.validate()?;
    let manifest = Manifest::load(&RunConfig::required(&cfg.paths.manifest, "manifest (--manifest)")?)?;
    if let Some(rec) = manifest.records.iter().find(|r| r.step_labels.is_none()) {
        return Err(Error::Data(format!("video {} has no step_labels; evaluation needs them", rec.video_id)));
    }
    let feats = features(cfg, &manifest)?;
    let raw = if eval_cfg.baselines.contains(&eval::Baseline::RawKmeans) {
        Some(
            manifest
                .records
                .iter()
                .map(|r| raw_features(r, &manifest.modality_names))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    eval::evaluate(&manifest, &feats, raw.as_deref(), &eval_cfg)
}

pub fn eval(cfg: &RunConfig) -> Result<()> {
    let out = RunConfig::required(&cfg.paths.out, "output directory (--out)")?;
    let rep = evaluate(cfg)?;
    create_dir(&out)?;
    write_json(&out.join(EVAL_FILE), &rep)?;
    let history = cfg
        .paths
        .checkpoint
        .as_ref()
        .and_then(|ck| ck.parent())
        .map(|dir| dir.join(HISTORY_FILE))
        .filter(|p| p.exists() && cfg.inference.features == FeatureSource::Model)
        .map(|p| -> Result<Vec<f64>> {
            let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            let h: trainer::TrainHistory = serde_json::from_str(&text).map_err(|e| Error::json(&p, e))?;
            Ok(h.epoch_loss)
        })
        .transpose()?;
    if let Some(path) = &cfg.paths.report {
        fs::write(path, report::html(&rep, history.as_deref())).map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &cfg.paths.csv {
        fs::write(path, report::csv(&rep)).map_err(|e| Error::io(path, e))?;
    }
    print!("{}", report::text(&rep));
    Ok(())
}
