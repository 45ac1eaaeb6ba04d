//! Chunk sampling, the optimization loop, gradient checking and resumable
//! training state.
//!
//! Every random draw comes from a stream keyed by `(seed, epoch, video)`, and
//! per-video gradients are summed in video order, so a run is reproducible
//! regardless of the number of worker threads.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bmc2::{self, BootstrapSource, LossConfig};
use crate::datamodel::{Manifest, VideoRecord};
use crate::encoder::checkpoint::Checkpoint;
use crate::encoder::{self, EncoderConfig, EncoderParams};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::Scalar;

// rng stream prefixes
const STREAM_ORDER: u64 = 3;
const STREAM_CHUNKS: u64 = 4;
const STREAM_DROPOUT: u64 = 5;
const STREAM_GRADCHECK: u64 = 6;

const GRADCHECK_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub num_chunks: usize,
    /// Fraction of the video covered by one sampled sequence.
    pub temporal_extent: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam: AdamConfig,
    /// Multiply the learning rate by 0.1 from this epoch on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_drop_epoch: Option<usize>,
    pub seed: u64,
    /// Modalities to train on; all manifest modalities when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modalities: Option<Vec<String>>,
    /// Process the videos of a batch one after another on the calling thread.
    pub deterministic: bool,
    pub loss: LossConfig,
    pub encoder: EncoderConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_chunks: 1024,
            temporal_extent: 1.0,
            batch_size: 4,
            learning_rate: 1e-3,
            epochs: 300,
            adam: AdamConfig::default(),
            lr_drop_epoch: None,
            seed: 0,
            modalities: None,
            deterministic: false,
            loss: LossConfig::default(),
            encoder: EncoderConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_chunks < 2 {
            return Err(Error::Config(format!("num_chunks must be at least 2, got {}", self.num_chunks)));
        }
        if !(self.temporal_extent > 0.0 && self.temporal_extent <= 1.0) {
            return Err(Error::Config(format!(
                "temporal_extent must lie in (0, 1], got {}",
                self.temporal_extent
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        let a = &self.adam;
        if !((0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps > 0.0) {
            return Err(Error::Config("invalid Adam hyperparameters".into()));
        }
        self.loss.validate()?;
        self.encoder.validate()
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        match self.lr_drop_epoch {
            Some(drop) if epoch >= drop => self.learning_rate * 0.1,
            _ => self.learning_rate,
        }
    }

    /// Training modalities resolved against a manifest.
    pub fn training_modalities(&self, manifest: &Manifest) -> Result<Vec<String>> {
        let names = self.modalities.clone().unwrap_or_else(|| manifest.modality_names.clone());
        if names.is_empty() {
            return Err(Error::Config("no training modalities selected".into()));
        }
        for n in &names {
            if !manifest.modality_names.contains(n) {
                return Err(Error::Data(format!("manifest has no modality {n}")));
            }
        }
        Ok(names)
    }
}

/// Picks `N` ascending frame indices: one uniform draw from each of `N` equal
/// chunks of a window covering `temporal_extent * T` frames. `N` is clamped to
/// the window length.
pub fn sample_chunks(frames: usize, num_chunks: usize, temporal_extent: f64, rng: &mut Rng) -> Result<Vec<usize>> {
    if frames < 2 {
        return Err(Error::Data(format!("cannot sample chunks from {frames} frame(s)")));
    }
    let extent = ((temporal_extent * frames as f64).round() as usize).clamp(2, frames);
    let n = num_chunks.clamp(1, extent);
    let start = rng.random_range(0..=frames - extent);
    Ok((0..n)
        .map(|k| {
            let lo = k * extent / n;
            let hi = (k + 1) * extent / n;
            start + rng.random_range(lo..hi)
        })
        .collect())
}

/// Inputs of one video for one optimization step.
#[derive(Debug, Clone)]
pub struct VideoSample<T> {
    pub frames: Vec<usize>,
    pub timestamps: Vec<f64>,
    pub positions: Vec<f64>,
    /// Raw rows per training modality.
    pub raw: Vec<Array2<T>>,
    /// Raw rows driving the bootstrapped window.
    pub bootstrap: Array2<f64>,
}

fn gather<T: Scalar>(data: ArrayView2<'_, f32>, frames: &[usize]) -> Array2<T> {
    Array2::from_shape_fn((frames.len(), data.ncols()), |(r, c)| T::of(f64::from(data[[frames[r], c]])))
}

/// Raw features used for bootstrapping, selected by `source`.
pub fn bootstrap_features(
    record: &VideoRecord,
    modalities: &[String],
    source: &BootstrapSource,
    frames: &[usize],
) -> Result<Array2<f64>> {
    let parts: Vec<Array2<f64>> = match source {
        BootstrapSource::First => vec![gather(record.modality(&modalities[0])?.data(), frames)],
        BootstrapSource::Named(name) => vec![gather(record.modality(name)?.data(), frames)],
        BootstrapSource::Concat => modalities
            .iter()
            .map(|m| Ok(gather(record.modality(m)?.data(), frames)))
            .collect::<Result<_>>()?,
    };
    Ok(encoder::concat_features(&parts))
}

pub fn make_sample<T: Scalar>(
    record: &VideoRecord,
    modalities: &[String],
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<VideoSample<T>> {
    let frames = sample_chunks(record.frame_count(), cfg.num_chunks, cfg.temporal_extent, rng)?;
    let all_ts = record.timestamps();
    let timestamps: Vec<f64> = frames.iter().map(|&f| all_ts[f]).collect();
    let positions = encoder::positions_from_timestamps(&timestamps, record.fps());
    let raw = modalities
        .iter()
        .map(|m| Ok(gather(record.modality(m)?.data(), &frames)))
        .collect::<Result<Vec<_>>>()?;
    let bootstrap = if cfg.loss.effective_variant() == bmc2::BootstrapVariant::None {
        Array2::zeros((frames.len(), 0))
    } else {
        bootstrap_features(record, modalities, &cfg.loss.bootstrap_modality, &frames)?
    };
    Ok(VideoSample {
        frames,
        timestamps,
        positions,
        raw,
        bootstrap,
    })
}

/// Loss of one video and, optionally, its parameter gradient.
pub fn video_objective<T: Scalar>(
    params: &EncoderParams<T>,
    sample: &VideoSample<T>,
    loss_cfg: &LossConfig,
    mut dropout: Option<&mut Rng>,
    with_grad: bool,
) -> Result<(f64, Option<EncoderParams<T>>)> {
    let mut qs = Vec::with_capacity(params.encoders.len());
    let mut caches = Vec::with_capacity(params.encoders.len());
    for (enc, raw) in params.encoders.iter().zip(&sample.raw) {
        let (q, cache) = enc.forward(raw.view(), &sample.positions, dropout.as_deref_mut())?;
        qs.push(q);
        caches.push(cache);
    }
    let views: Vec<_> = qs.iter().map(|q| q.view()).collect();
    let boot = (sample.bootstrap.ncols() > 0).then(|| sample.bootstrap.view());
    let out = bmc2::bmc2_loss(&views, boot, &sample.timestamps, loss_cfg, with_grad)?;
    if !with_grad {
        return Ok((out.loss, None));
    }
    let mut grad = params.zeros_like();
    for (i, enc) in params.encoders.iter().enumerate() {
        enc.backward(&caches[i], out.grads[i].view(), None, &mut grad.encoders[i]);
    }
    Ok((out.loss, Some(grad)))
}

/// Mean loss (and gradient) over a batch; per-video work may run in
/// parallel but results are combined in input order.
pub fn batch_objective<T: Scalar>(
    params: &EncoderParams<T>,
    samples: &[VideoSample<T>],
    loss_cfg: &LossConfig,
    dropout_rngs: Option<Vec<Rng>>,
    with_grad: bool,
    parallel: bool,
) -> Result<(f64, Option<EncoderParams<T>>)> {
    let mut rngs: Vec<Option<Rng>> = match dropout_rngs {
        Some(v) => v.into_iter().map(Some).collect(),
        None => samples.iter().map(|_| None).collect(),
    };
    let run = |(s, r): (&VideoSample<T>, &mut Option<Rng>)| video_objective(params, s, loss_cfg, r.as_mut(), with_grad);
    let results: Vec<Result<(f64, Option<EncoderParams<T>>)>> = if parallel {
        samples.par_iter().zip(rngs.par_iter_mut()).map(run).collect()
    } else {
        samples.iter().zip(rngs.iter_mut()).map(run).collect()
    };
    let scale = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    let mut total: Option<EncoderParams<T>> = None;
    for r in results {
        let (l, g) = r?;
        loss += l * scale;
        if let Some(g) = g {
            match total.as_mut() {
                None => total = Some(g),
                Some(acc) => {
                    for (a, b) in acc.tensors_mut().into_iter().zip(g.tensors()) {
                        *a += b.1;
                    }
                }
            }
        }
    }
    if let Some(acc) = total.as_mut() {
        for t in acc.tensors_mut() {
            *t *= T::of(scale);
        }
    }
    Ok((loss, total))
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Array2<T>>,
    pub v: Vec<Array2<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig, params: &EncoderParams<T>) -> Self {
        let zeros: Vec<Array2<T>> = params.tensors().iter().map(|(_, t)| Array2::zeros(t.raw_dim())).collect();
        Self {
            config,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn update(&mut self, params: &mut EncoderParams<T>, grad: &EncoderParams<T>, lr: f64) {
        self.step += 1;
        let (b1, b2) = (self.config.beta1, self.config.beta2);
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        let (b1, b2, eps) = (T::of(b1), T::of(b2), T::of(self.config.eps));
        let (one, lr_t, c1, c2) = (T::one(), T::of(lr), T::of(c1), T::of(c2));
        let grads = grad.tensors();
        for (i, p) in params.tensors_mut().into_iter().enumerate() {
            let g = grads[i].1;
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                let mhat = *m / c1;
                let vhat = *v / c2;
                *p -= lr_t * mhat / (vhat.sqrt() + eps);
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean training loss of each completed epoch.
    pub epoch_loss: Vec<f64>,
    /// Wall-clock seconds per epoch; kept out of serialized artifacts so they
    /// stay reproducible.
    #[serde(skip)]
    pub epoch_seconds: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
}

impl TrainHistory {
    pub fn epochs(&self) -> usize {
        self.epoch_loss.len()
    }
}

/// Everything needed to continue training.
#[derive(Debug, Clone)]
pub struct TrainState<T> {
    pub params: EncoderParams<T>,
    pub optimizer: Adam<T>,
    pub history: TrainHistory,
}

#[derive(Serialize, Deserialize)]
struct SavedState {
    epochs_done: usize,
    adam_step: u64,
    epoch_loss: Vec<f64>,
    train: TrainConfig,
}

impl<T: Scalar> TrainState<T> {
    pub fn init(manifest: &Manifest, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if manifest.is_empty() {
            return Err(Error::Data("manifest contains no videos".into()));
        }
        let names = cfg.training_modalities(manifest)?;
        let rec = &manifest.records[0];
        let dims = names
            .iter()
            .map(|n| Ok((n.clone(), rec.modality(n)?.dim())))
            .collect::<Result<Vec<_>>>()?;
        let params = EncoderParams::init(&cfg.encoder, &dims, cfg.seed)?;
        let optimizer = Adam::new(cfg.adam.clone(), &params);
        Ok(Self {
            params,
            optimizer,
            history: TrainHistory::default(),
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.history.epochs()
    }

    /// Checkpoint holding parameters, optimizer moments and history.
    pub fn to_checkpoint(&self, cfg: &TrainConfig) -> Checkpoint<T> {
        let mut ck = Checkpoint::new(self.params.clone());
        let names: Vec<String> = self.params.tensors().into_iter().map(|(n, _)| n).collect();
        for (kind, moments) in [("adam.m", &self.optimizer.m), ("adam.v", &self.optimizer.v)] {
            for (n, t) in names.iter().zip(moments) {
                ck.extra_tensors.push((format!("{kind}.{n}"), t.clone()));
            }
        }
        ck.state = serde_json::to_value(SavedState {
            epochs_done: self.epochs_done(),
            adam_step: self.optimizer.step,
            epoch_loss: self.history.epoch_loss.clone(),
            train: cfg.clone(),
        })
        .expect("training state serializes");
        ck
    }

    /// Restores a state written by [`Self::to_checkpoint`].
    pub fn from_checkpoint(ck: Checkpoint<T>, cfg: &TrainConfig) -> Result<Self> {
        let saved: SavedState = serde_json::from_value(ck.state.clone())
            .map_err(|e| Error::Data(format!("checkpoint has no resumable training state: {e}")))?;
        if saved.train.encoder != cfg.encoder || saved.train.seed != cfg.seed {
            return Err(Error::Config(
                "encoder configuration or seed differs from the checkpoint being resumed".into(),
            ));
        }
        let names: Vec<String> = ck.params.tensors().into_iter().map(|(n, _)| n).collect();
        let find = |kind: &str| -> Result<Vec<Array2<T>>> {
            names
                .iter()
                .map(|n| {
                    let key = format!("{kind}.{n}");
                    ck.extra_tensors
                        .iter()
                        .find(|(k, _)| *k == key)
                        .map(|(_, t)| t.clone())
                        .ok_or_else(|| Error::Data(format!("checkpoint lacks optimizer tensor {key}")))
                })
                .collect()
        };
        let optimizer = Adam {
            config: cfg.adam.clone(),
            step: saved.adam_step,
            m: find("adam.m")?,
            v: find("adam.v")?,
        };
        if saved.epoch_loss.len() != saved.epochs_done {
            return Err(Error::Data("checkpoint history length disagrees with its epoch count".into()));
        }
        Ok(Self {
            params: ck.params,
            optimizer,
            history: TrainHistory {
                epoch_loss: saved.epoch_loss,
                epoch_seconds: Vec::new(),
                checkpoint: None,
            },
        })
    }
}

/// Runs one epoch and appends its mean loss to the history.
pub fn run_epoch<T: Scalar>(manifest: &Manifest, cfg: &TrainConfig, state: &mut TrainState<T>) -> Result<f64> {
    let started = Instant::now();
    let epoch = state.epochs_done();
    let names = cfg.training_modalities(manifest)?;
    let mut order: Vec<usize> = (0..manifest.len()).collect();
    order.shuffle(&mut rng::rng(cfg.seed, &[STREAM_ORDER, epoch as u64]));
    let lr = cfg.learning_rate_at(epoch);
    let mut total = 0.0;
    for (batch_no, batch) in order.chunks(cfg.batch_size).enumerate() {
        let samples = batch
            .iter()
            .map(|&v| {
                let mut r = rng::rng(cfg.seed, &[STREAM_CHUNKS, epoch as u64, v as u64]);
                make_sample::<T>(&manifest.records[v], &names, cfg, &mut r)
            })
            .collect::<Result<Vec<_>>>()?;
        let dropout = (cfg.encoder.dropout > 0.0).then(|| {
            batch
                .iter()
                .map(|&v| rng::rng(cfg.seed, &[STREAM_DROPOUT, epoch as u64, v as u64]))
                .collect()
        });
        let (loss, grad) = batch_objective(&state.params, &samples, &cfg.loss, dropout, true, !cfg.deterministic)
            .map_err(|e| match e {
                Error::Numeric(msg) => Error::Numeric(format!("epoch {epoch}, batch {batch_no}: {msg}")),
                other => other,
            })?;
        let grad = grad.expect("gradient requested");
        if !loss.is_finite() || grad.tensors().iter().any(|(_, t)| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::Numeric(format!(
                "non-finite loss or gradient at epoch {epoch}, batch {batch_no} (loss {loss})"
            )));
        }
        state.optimizer.update(&mut state.params, &grad, lr);
        total += loss * batch.len() as f64;
    }
    let mean = total / manifest.len() as f64;
    log::info!("epoch {epoch}: loss {mean:.6}");
    state.history.epoch_loss.push(mean);
    state.history.epoch_seconds.push(started.elapsed().as_secs_f64());
    Ok(mean)
}

/// Trains from scratch for `cfg.epochs` epochs.
pub fn train<T: Scalar>(manifest: &Manifest, cfg: &TrainConfig) -> Result<(EncoderParams<T>, TrainHistory)> {
    let mut state = TrainState::<T>::init(manifest, cfg)?;
    resume(manifest, cfg, &mut state)?;
    Ok((state.params, state.history))
}

/// Continues training until `cfg.epochs` epochs are complete.
pub fn resume<T: Scalar>(manifest: &Manifest, cfg: &TrainConfig, state: &mut TrainState<T>) -> Result<()> {
    while state.epochs_done() < cfg.epochs {
        run_epoch(manifest, cfg, state)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// `(tensor, analytic, numeric, relative error)` along a random direction.
    pub tensors: Vec<(String, f64, f64, f64)>,
}

/// Compares analytic gradients of the full objective with central finite
/// differences in 64-bit, one random direction per parameter tensor. Uses the
/// first `batch_size` videos with a fixed sample and dropout disabled.
pub fn gradient_check<T: Scalar>(
    params: &EncoderParams<T>,
    manifest: &Manifest,
    cfg: &TrainConfig,
    eps: f64,
) -> Result<GradCheckReport> {
    let params: EncoderParams<f64> = params.cast();
    let names = cfg.training_modalities(manifest)?;
    let samples = manifest
        .records
        .iter()
        .take(cfg.batch_size.max(1))
        .enumerate()
        .map(|(v, rec)| make_sample::<f64>(rec, &names, cfg, &mut rng::rng(cfg.seed, &[STREAM_GRADCHECK, v as u64])))
        .collect::<Result<Vec<_>>>()?;
    let objective = |p: &EncoderParams<f64>, grad: bool| batch_objective(p, &samples, &cfg.loss, None, grad, false);
    let (_, grad) = objective(&params, true)?;
    let grad = grad.expect("gradient requested");
    let mut dir_rng = rng::rng(cfg.seed, &[STREAM_GRADCHECK, u64::MAX]);
    let grads = grad.tensors();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        tensors: Vec::new(),
    };
    for (i, (name, tensor)) in params.tensors().into_iter().enumerate() {
        let mut dir = Array2::<f64>::from_shape_fn(tensor.raw_dim(), |_| dir_rng.sample(StandardNormal));
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        dir /= norm;
        let analytic = (grads[i].1 * &dir).sum();
        let shifted = |sign: f64| -> Result<f64> {
            let mut p = params.clone();
            *p.tensors_mut().swap_remove(i) += &(&dir * (sign * eps));
            Ok(objective(&p, false)?.0)
        };
        let numeric = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * eps);
        // the floor keeps exactly-zero directions (e.g. a key bias, to which
        // softmax is invariant) from reporting pure rounding noise
        let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(GRADCHECK_FLOOR);
        report.max_relative_error = report.max_relative_error.max(rel);
        report.tensors.push((name, analytic, numeric, rel));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_fall_in_deciles() {
        for seed in 0..20 {
            let idx = sample_chunks(100, 10, 1.0, &mut rng::rng(seed, &[])).unwrap();
            assert_eq!(idx.len(), 10);
            for (k, &i) in idx.iter().enumerate() {
                assert!((10 * k..10 * (k + 1)).contains(&i), "{idx:?}");
            }
        }
    }

    #[test]
    fn full_density_is_identity() {
        let idx = sample_chunks(37, 37, 1.0, &mut rng::rng(1, &[])).unwrap();
        assert_eq!(idx, (0..37).collect::<Vec<_>>());
    }

    #[test]
    fn half_extent_spans_half() {
        for seed in 0..100 {
            let idx = sample_chunks(100, 10, 0.5, &mut rng::rng(seed, &[])).unwrap();
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
            assert!(idx[9] - idx[0] < 50);
        }
    }

    #[test]
    fn short_video_clamps_chunk_count() {
        let idx = sample_chunks(5, 1024, 1.0, &mut rng::rng(0, &[])).unwrap();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        assert!(sample_chunks(1, 4, 1.0, &mut rng::rng(0, &[])).is_err());
    }

    #[test]
    fn learning_rate_drop() {
        let cfg = TrainConfig {
            lr_drop_epoch: Some(3),
            ..Default::default()
        };
        assert_eq!(cfg.learning_rate_at(2), 1e-3);
        assert!((cfg.learning_rate_at(3) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let enc = EncoderConfig {
            num_layers: 1,
            model_dim: 4,
            mlp_hidden: 4,
            ..Default::default()
        };
        let mut p = EncoderParams::<f64>::init(&enc, &[("a".into(), 2)], 0).unwrap();
        let before = p.to_flat();
        let mut g = p.zeros_like();
        for t in g.tensors_mut() {
            t.fill(0.5);
        }
        let mut adam = Adam::new(AdamConfig::default(), &p);
        adam.update(&mut p, &g, 0.01);
        for (a, b) in before.iter().zip(p.to_flat()) {
            assert!((a - b - 0.01).abs() < 1e-8);
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            TrainConfig {
                num_chunks: 1,
                ..Default::default()
            },
            TrainConfig {
                temporal_extent: 0.0,
                ..Default::default()
            },
            TrainConfig {
                batch_size: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        }
    }
}
