//! Synthetic multi-cue procedural recordings with known step structure.
//!
//! Each video is a sequence of contiguous step segments, optionally with one
//! step recurring later and with background frames between segments. A
//! frame's feature is its step prototype plus isotropic Gaussian noise.

use ndarray::{Array2, Axis};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::datamodel::{FeatureSequence, Manifest, VideoRecord, BACKGROUND};
use crate::error::{Error, Result};
use crate::rng::{rng, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub num_videos: usize,
    pub num_steps: usize,
    pub frames_per_video: usize,
    pub modalities: usize,
    /// Feature dimension per modality; a single value applies to all.
    pub dims: Vec<usize>,
    pub background_fraction: f64,
    /// Probability that a video contains one step recurring after at least
    /// one other step.
    pub repeat_probability: f64,
    /// Per-coordinate noise standard deviation per modality; a single value
    /// applies to all.
    pub cue_noise: Vec<f64>,
    pub fps: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_videos: 5,
            num_steps: 5,
            frames_per_video: 500,
            modalities: 2,
            dims: vec![32],
            background_fraction: 0.1,
            repeat_probability: 0.0,
            cue_noise: vec![0.5],
            fps: 2.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_videos == 0 {
            return fail("num_videos must be >= 1".into());
        }
        if self.num_steps < 2 {
            return fail(format!("num_steps must be >= 2, got {}", self.num_steps));
        }
        if self.frames_per_video < 10 * self.num_steps {
            return fail(format!(
                "frames_per_video must be >= 10 * num_steps = {}, got {}",
                10 * self.num_steps,
                self.frames_per_video
            ));
        }
        if self.modalities == 0 {
            return fail("modalities must be >= 1".into());
        }
        if !(self.dims.len() == 1 || self.dims.len() == self.modalities) {
            return fail(format!(
                "dims lists {} values for {} modalities",
                self.dims.len(),
                self.modalities
            ));
        }
        if self.dims.iter().any(|&d| d < 2) {
            return fail("all dims must be >= 2".into());
        }
        if !(self.cue_noise.len() == 1 || self.cue_noise.len() == self.modalities) {
            return fail(format!(
                "cue_noise lists {} values for {} modalities",
                self.cue_noise.len(),
                self.modalities
            ));
        }
        if self.cue_noise.iter().any(|&s| !(s.is_finite() && s >= 0.0)) {
            return fail("cue_noise must be finite and >= 0".into());
        }
        if !(0.0..1.0).contains(&self.background_fraction) {
            return fail("background_fraction must lie in [0, 1)".into());
        }
        if !(0.0..=1.0).contains(&self.repeat_probability) {
            return fail("repeat_probability must lie in [0, 1]".into());
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return fail("fps must be positive".into());
        }
        Ok(())
    }

    pub fn dim(&self, modality: usize) -> usize {
        *self.dims.get(modality).unwrap_or(&self.dims[0])
    }

    pub fn noise(&self, modality: usize) -> f64 {
        *self.cue_noise.get(modality).unwrap_or(&self.cue_noise[0])
    }

    pub fn modality_names(&self) -> Vec<String> {
        (0..self.modalities).map(|m| format!("cue{m}")).collect()
    }
}

/// A contiguous run of frames `[start, end)` showing one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub step: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthGroundTruth {
    pub step_labels: Vec<Vec<i64>>,
    pub phase_labels: Vec<Vec<i64>>,
    pub segments: Vec<Vec<Segment>>,
    /// Per modality, `(K + 1) x D` prototypes; the last row is background.
    pub prototypes: Vec<Array2<f32>>,
}

pub fn generate(cfg: &SynthConfig) -> Result<(Manifest, SynthGroundTruth)> {
    cfg.validate()?;
    let k = cfg.num_steps;
    let prototypes: Vec<Array2<f32>> = (0..cfg.modalities)
        .map(|m| unit_prototypes(k + 1, cfg.dim(m), &mut rng(cfg.seed, &[0, m as u64])))
        .collect();
    let names = cfg.modality_names();

    let mut records = Vec::with_capacity(cfg.num_videos);
    let mut gt = SynthGroundTruth {
        step_labels: Vec::new(),
        phase_labels: Vec::new(),
        segments: Vec::new(),
        prototypes,
    };
    for v in 0..cfg.num_videos {
        let mut r = rng(cfg.seed, &[1, v as u64]);
        let (labels, segments) = layout_video(cfg, &mut r);
        let mut rec = VideoRecord::new(format!("video_{v:03}"));
        for (m, name) in names.iter().enumerate() {
            let data = render(&labels, &gt.prototypes[m], cfg.noise(m), &mut r);
            rec = rec.with_modality(FeatureSequence::new(name.clone(), data, cfg.fps)?);
        }
        let phases: Vec<i64> = labels
            .iter()
            .map(|&l| if l == BACKGROUND { k as i64 } else { l })
            .collect();
        rec.step_labels = Some(labels.clone());
        rec.phase_labels = Some(phases.clone());
        records.push(rec);
        gt.step_labels.push(labels);
        gt.phase_labels.push(phases);
        gt.segments.push(segments);
    }
    Ok((Manifest::new(names, records)?, gt))
}

fn unit_prototypes(rows: usize, dim: usize, r: &mut Rng) -> Array2<f32> {
    let mut p = Array2::<f64>::from_shape_simple_fn((rows, dim), || StandardNormal.sample(r));
    for mut row in p.rows_mut() {
        let n = row.dot(&row).sqrt().max(1e-12);
        row /= n;
    }
    p.mapv(|v| v as f32)
}

/// Splits `total` into integer parts proportional to `weights`
/// (largest-remainder rounding, ties to the lower index).
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let raw: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut parts: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut rest = total - parts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        parts[i] += 1;
        rest -= 1;
    }
    parts
}

fn layout_video(cfg: &SynthConfig, r: &mut Rng) -> (Vec<i64>, Vec<Segment>) {
    let k = cfg.num_steps;
    let t = cfg.frames_per_video;

    // mild permutation: one pass of random adjacent swaps
    let mut order: Vec<usize> = (0..k).collect();
    let mut i = 0;
    while i + 1 < k {
        if r.random_bool(0.25) {
            order.swap(i, i + 1);
            i += 2;
        } else {
            i += 1;
        }
    }
    if r.random_bool(cfg.repeat_probability) {
        let src = r.random_range(0..k - 1);
        let dst = r.random_range(src + 2..=k);
        order.insert(dst, order[src]);
    }

    let background = (cfg.background_fraction * t as f64).round() as usize;
    let foreground = t - background;
    let weights: Vec<f64> = order.iter().map(|_| r.random_range(0.5..1.5)).collect();
    let mut lengths = apportion(&weights, foreground);
    // each segment keeps at least one frame
    while let Some(z) = lengths.iter().position(|&l| l == 0) {
        let donor = (0..lengths.len()).max_by_key(|&j| (lengths[j], usize::MAX - j)).unwrap();
        lengths[donor] -= 1;
        lengths[z] += 1;
    }
    let gap_weights: Vec<f64> = (0..=order.len()).map(|_| r.random_range(0.0..1.0)).collect();
    let gaps = if background > 0 {
        apportion(&gap_weights, background)
    } else {
        vec![0; order.len() + 1]
    };

    let mut labels = Vec::with_capacity(t);
    let mut segments = Vec::with_capacity(order.len());
    for (s, (&step, &len)) in order.iter().zip(&lengths).enumerate() {
        labels.extend(std::iter::repeat_n(BACKGROUND, gaps[s]));
        let start = labels.len();
        labels.extend(std::iter::repeat_n(step as i64, len));
        segments.push(Segment {
            step,
            start,
            end: labels.len(),
        });
    }
    labels.extend(std::iter::repeat_n(BACKGROUND, gaps[order.len()]));
    debug_assert_eq!(labels.len(), t);
    (labels, segments)
}

fn render(labels: &[i64], prototypes: &Array2<f32>, noise: f64, r: &mut Rng) -> Array2<f32> {
    let bg = prototypes.nrows() - 1;
    let dim = prototypes.ncols();
    let mut out = Array2::<f32>::zeros((labels.len(), dim));
    for (t, mut row) in out.rows_mut().into_iter().enumerate() {
        let p = if labels[t] == BACKGROUND { bg } else { labels[t] as usize };
        row.assign(&prototypes.row(p));
        if noise > 0.0 {
            for v in row.iter_mut() {
                let z: f64 = StandardNormal.sample(r);
                *v = (f64::from(*v) + noise * z) as f32;
            }
        }
    }
    out
}

/// Accuracy of a nearest-prototype classifier on the raw (concatenated)
/// features, counting background as its own class.
pub fn separability_report(manifest: &Manifest, gt: &SynthGroundTruth) -> f64 {
    let protos: Vec<Array2<f32>> = gt.prototypes.clone();
    let classes = protos[0].nrows();
    let joint = ndarray::concatenate(
        Axis(1),
        &protos.iter().map(|p| p.view()).collect::<Vec<_>>(),
    )
    .unwrap();
    let mut correct = 0usize;
    let mut total = 0usize;
    for (rec, labels) in manifest.records.iter().zip(&gt.step_labels) {
        let feats: Vec<_> = manifest
            .modality_names
            .iter()
            .map(|m| rec.modalities[m].data())
            .collect();
        let x = ndarray::concatenate(Axis(1), &feats).unwrap();
        for (t, row) in x.rows().into_iter().enumerate() {
            let mut best = (f64::INFINITY, 0usize);
            for c in 0..classes {
                let d: f64 = row
                    .iter()
                    .zip(joint.row(c))
                    .map(|(&a, &b)| (f64::from(a) - f64::from(b)).powi(2))
                    .sum();
                if d < best.0 {
                    best = (d, c);
                }
            }
            let truth = if labels[t] == BACKGROUND { classes - 1 } else { labels[t] as usize };
            correct += usize::from(best.1 == truth);
            total += 1;
        }
    }
    correct as f64 / total.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SynthConfig {
        SynthConfig {
            num_videos: 3,
            cue_noise: vec![0.0],
            ..Default::default()
        }
    }

    #[test]
    fn zero_noise_frames_equal_prototypes() {
        let c = SynthConfig {
            background_fraction: 0.0,
            ..cfg()
        };
        let (m, gt) = generate(&c).unwrap();
        for (rec, labels) in m.records.iter().zip(&gt.step_labels) {
            let x = rec.modalities["cue0"].data();
            for (t, &l) in labels.iter().enumerate() {
                assert_eq!(x.row(t), gt.prototypes[0].row(l as usize));
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&cfg()).unwrap();
        let b = generate(&cfg()).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn repeats_are_separated_by_another_step() {
        for seed in 0..20 {
            let c = SynthConfig {
                repeat_probability: 1.0,
                seed,
                ..cfg()
            };
            let (_, gt) = generate(&c).unwrap();
            for labels in &gt.step_labels {
                assert!(has_separated_repeat(labels), "seed {seed}");
            }
        }
    }

    // label-scan oracle: some step shows up in two runs with another step
    // in between
    fn has_separated_repeat(labels: &[i64]) -> bool {
        let runs: Vec<i64> = labels
            .iter()
            .copied()
            .filter(|&l| l != BACKGROUND)
            .fold(Vec::new(), |mut acc, l| {
                if acc.last() != Some(&l) {
                    acc.push(l);
                }
                acc
            });
        (0..runs.len()).any(|i| (i + 2..runs.len()).any(|j| runs[j] == runs[i]))
    }

    #[test]
    fn background_fraction_is_respected() {
        let c = SynthConfig {
            background_fraction: 0.2,
            ..cfg()
        };
        let (_, gt) = generate(&c).unwrap();
        for labels in &gt.step_labels {
            let bg = labels.iter().filter(|&&l| l == BACKGROUND).count() as f64;
            assert!((bg / labels.len() as f64 - 0.2).abs() <= 0.05);
        }
    }

    #[test]
    fn every_step_present_and_labels_in_range() {
        let (_, gt) = generate(&cfg()).unwrap();
        for labels in &gt.step_labels {
            for k in 0..5 {
                assert!(labels.contains(&k));
            }
            assert!(labels.iter().all(|&l| l == BACKGROUND || (0..5).contains(&l)));
        }
    }

    #[test]
    fn rejects_bad_config() {
        for bad in [
            SynthConfig { num_steps: 1, ..cfg() },
            SynthConfig { frames_per_video: 49, ..cfg() },
            SynthConfig { dims: vec![1], ..cfg() },
            SynthConfig { background_fraction: 1.0, ..cfg() },
        ] {
            assert!(matches!(generate(&bad), Err(Error::Config(_))));
        }
    }

    #[test]
    fn separability_extremes() {
        let (m, gt) = generate(&cfg()).unwrap();
        assert_eq!(separability_report(&m, &gt), 1.0);

        let k = 5;
        let mut acc = 0.0;
        for seed in 0..3 {
            let c = SynthConfig {
                cue_noise: vec![1e4],
                seed,
                ..cfg()
            };
            let (m, gt) = generate(&c).unwrap();
            acc += separability_report(&m, &gt);
        }
        let chance = 1.0 / (k as f64 + 1.0);
        assert!((acc / 3.0 - chance).abs() < 0.1, "{}", acc / 3.0);
    }

    #[test]
    fn low_noise_is_separable() {
        for seed in 0..3 {
            let c = SynthConfig {
                cue_noise: vec![0.1],
                seed,
                ..cfg()
            };
            let (m, gt) = generate(&c).unwrap();
            assert!(separability_report(&m, &gt) >= 0.95);
        }
    }

    #[test]
    fn apportion_sums() {
        assert_eq!(apportion(&[1.0, 1.0, 1.0], 10), vec![4, 3, 3]);
        assert_eq!(apportion(&[0.5, 1.5], 8).iter().sum::<usize>(), 8);
    }
}
