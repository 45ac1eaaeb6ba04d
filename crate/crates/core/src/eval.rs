//! Key-step localization scores, phase classification probe, Kendall's tau
//! and trivial baselines.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::Manifest;
use crate::error::{Error, Result};
use crate::keysteps::{self, ExtractConfig};
use crate::rng;
use crate::scalar::Scalar;

const STREAM_BASELINE: u64 = 8;
const STREAM_PROBE: u64 = 9;

/// Minimum-cost perfect assignment on a square matrix; returns the column
/// assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // potentials formulation, 1-based with a virtual column 0
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    row_to_col
}

fn max_weight(weights: &[Vec<i64>]) -> i64 {
    let a = min_cost_assignment(&weights.iter().map(|r| r.iter().map(|w| -w).collect()).collect::<Vec<_>>());
    a.iter().enumerate().map(|(r, &c)| weights[r][c]).sum()
}

fn without(weights: &[Vec<i64>], row: usize, col: usize) -> Vec<Vec<i64>> {
    weights
        .iter()
        .enumerate()
        .filter(|&(r, _)| r != row)
        .map(|(_, w)| w.iter().enumerate().filter(|&(c, _)| c != col).map(|(_, &x)| x).collect())
        .collect()
}

/// One-to-one cluster-to-step matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// `(cluster, step)` pairs, ascending by cluster.
    pub pairs: Vec<(usize, usize)>,
    /// Summed frame overlap of the matched pairs.
    pub overlap: usize,
}

impl Matching {
    pub fn step_of(&self, cluster: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == cluster).map(|p| p.1)
    }

    pub fn cluster_of(&self, step: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == step).map(|p| p.0)
    }
}

/// `overlap[k][s]`: frames predicted as cluster `k` whose ground truth is step `s`.
pub fn overlap_matrix(pred: &[i64], gt: &[i64], k: usize, s: usize) -> Vec<Vec<usize>> {
    let mut o = vec![vec![0; s]; k];
    for (&p, &g) in pred.iter().zip(gt) {
        if p >= 0 && g >= 0 {
            o[p as usize][g as usize] += 1;
        }
    }
    o
}

/// Maximum-overlap matching between `k` clusters and `s` steps (negative
/// labels ignored). Among optimal matchings the lexicographically smallest
/// is returned: clusters in increasing id each take the lowest step id that
/// still allows an optimum.
pub fn hungarian_match_sized(pred: &[i64], gt: &[i64], k: usize, s: usize) -> Matching {
    let n = k.max(s);
    let o = overlap_matrix(pred, gt, k, s);
    // square weight matrix; padded rows/columns stand for "unmatched"
    let mut w: Vec<Vec<i64>> = (0..n)
        .map(|r| (0..n).map(|c| if r < k && c < s { o[r][c] as i64 } else { 0 }).collect())
        .collect();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut target = max_weight(&w);
    let mut pairs = Vec::new();
    while !rows.is_empty() {
        // first remaining row is the smallest cluster id (padded rows last)
        let mut fixed = false;
        for ci in 0..cols.len() {
            let rest = without(&w, 0, ci);
            if w[0][ci] + max_weight(&rest) == target {
                let (r, c) = (rows[0], cols[ci]);
                if r < k && c < s {
                    pairs.push((r, c));
                }
                target -= w[0][ci];
                w = rest;
                rows.remove(0);
                cols.remove(ci);
                fixed = true;
                break;
            }
        }
        debug_assert!(fixed, "some column always completes an optimum");
    }
    let overlap = pairs.iter().map(|&(r, c)| o[r][c]).sum();
    Matching { pairs, overlap }
}

/// [`hungarian_match_sized`] with sizes inferred from the largest labels.
pub fn hungarian_match(pred: &[i64], gt: &[i64]) -> Matching {
    let k = label_count(pred);
    let s = label_count(gt);
    hungarian_match_sized(pred, gt, k, s)
}

fn label_count(labels: &[i64]) -> usize {
    labels.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Scores per ground-truth step, then averaged.
    PerStep,
    /// Frame counts pooled over all steps.
    Overall,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
}

impl Scores {
    fn from_pr(precision: f64, recall: f64, iou: f64) -> Self {
        Self {
            precision,
            recall,
            f1: harmonic(precision, recall),
            iou,
        }
    }

    fn mean(items: &[Scores]) -> Scores {
        let n = items.len().max(1) as f64;
        let p = items.iter().map(|s| s.precision).sum::<f64>() / n;
        let r = items.iter().map(|s| s.recall).sum::<f64>() / n;
        let iou = items.iter().map(|s| s.iou).sum::<f64>() / n;
        Scores::from_pr(p, r, iou)
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KslReport {
    pub scores: Scores,
    /// Per ground-truth step (steps without frames omitted).
    pub per_step: BTreeMap<usize, Scores>,
    pub matching: Matching,
}

/// Key-step localization scores of frame labels against ground truth
/// (`-1` = background / not predicted).
pub fn ksl_metrics(pred: &[i64], gt: &[i64], mode: Averaging) -> Result<KslReport> {
    if pred.len() != gt.len() {
        return Err(Error::Data(format!("{} predictions for {} frames", pred.len(), gt.len())));
    }
    let gt_frames = gt.iter().filter(|&&g| g >= 0).count();
    if gt_frames == 0 {
        return Err(Error::UndefinedMetric("ground truth has no key-step frames".into()));
    }
    let (k, s) = (label_count(pred), label_count(gt));
    let matching = hungarian_match_sized(pred, gt, k, s);
    let o = overlap_matrix(pred, gt, k, s);
    let mut pred_size = vec![0usize; k];
    let mut gt_size = vec![0usize; s];
    for (&p, &g) in pred.iter().zip(gt) {
        if p >= 0 {
            pred_size[p as usize] += 1;
        }
        if g >= 0 {
            gt_size[g as usize] += 1;
        }
    }
    let mut per_step = BTreeMap::new();
    for step in (0..s).filter(|&st| gt_size[st] > 0) {
        let sc = match matching.cluster_of(step) {
            Some(c) => {
                let inter = o[c][step] as f64;
                let union = (pred_size[c] + gt_size[step]) as f64 - inter;
                let p = if pred_size[c] > 0 { inter / pred_size[c] as f64 } else { 0.0 };
                Scores::from_pr(p, inter / gt_size[step] as f64, inter / union)
            }
            None => Scores::default(),
        };
        per_step.insert(step, sc);
    }
    let scores = match mode {
        Averaging::PerStep => Scores::mean(&per_step.values().copied().collect::<Vec<_>>()),
        Averaging::Overall => {
            let correct = matching.overlap as f64;
            let predicted = pred_size.iter().sum::<usize>() as f64;
            let (mut inter, mut union) = (0.0, 0.0);
            for step in (0..s).filter(|&st| gt_size[st] > 0) {
                match matching.cluster_of(step) {
                    Some(c) => {
                        inter += o[c][step] as f64;
                        union += (pred_size[c] + gt_size[step] - o[c][step]) as f64;
                    }
                    None => union += gt_size[step] as f64,
                }
            }
            let p = if predicted > 0.0 { correct / predicted } else { 0.0 };
            Scores::from_pr(p, correct / gt_frames as f64, inter / union)
        }
    };
    Ok(KslReport {
        scores,
        per_step,
        matching,
    })
}

/// Labels drawn i.i.d. uniformly from `0..k`.
pub fn baseline_random(frames: usize, k: usize, seed: u64) -> Vec<i64> {
    let mut r = rng::rng(seed, &[STREAM_BASELINE]);
    (0..frames).map(|_| r.random_range(0..k) as i64).collect()
}

/// `k` contiguous, (nearly) equal chunks labelled in order.
pub fn baseline_uniform(frames: usize, k: usize) -> Vec<i64> {
    (0..frames).map(|t| (t * k / frames) as i64).collect()
}

fn nearest(row: ndarray::ArrayView1<'_, f64>, other: ArrayView2<'_, f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, r) in other.rows().into_iter().enumerate() {
        let d: f64 = row.iter().zip(r.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// Rank agreement of nearest-neighbour retrieval from `a` into `b`. Pairs
/// whose retrieved indices coincide count as discordant.
pub fn kendalls_tau<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> Result<f64> {
    if a.nrows() < 2 || b.nrows() < 2 {
        return Err(Error::Data("Kendall's tau needs at least two frames per sequence".into()));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::Data("embeddings differ in dimension".into()));
    }
    let (a, b) = (a.mapv(Scalar::as_f64), b.mapv(Scalar::as_f64));
    let nn: Vec<usize> = (0..a.nrows()).into_par_iter().map(|i| nearest(a.row(i), b.view())).collect();
    let n = nn.len();
    let mut score = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            // i < j, so concordant iff the retrieved order is strictly increasing
            score += if nn[i] < nn[j] { 1 } else { -1 };
        }
    }
    Ok(score as f64 / (n * (n - 1) / 2) as f64)
}

/// One-vs-rest linear SVM (hinge loss, L2 penalty) trained by dual
/// coordinate descent on standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub mean: Array1<f64>,
    pub scale: Array1<f64>,
    /// One row per class; last column is the bias.
    pub weights: Array2<f64>,
}

impl LinearSvm {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[usize], classes: usize, c: f64, seed: u64) -> Self {
        let (n, d) = x.dim();
        let mean = x.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(d));
        let scale = x.std_axis(Axis(0), 0.0).mapv(|s| if s > 1e-12 { 1.0 / s } else { 1.0 });
        let mut z = Array2::<f64>::ones((n, d + 1));
        z.slice_mut(ndarray::s![.., ..d]).assign(&((&x - &mean) * &scale));
        let sq: Vec<f64> = z.rows().into_iter().map(|r| r.dot(&r)).collect();
        let rows: Vec<Array1<f64>> = (0..classes)
            .into_par_iter()
            .map(|cls| {
                let sign: Vec<f64> = y.iter().map(|&l| if l == cls { 1.0 } else { -1.0 }).collect();
                let mut w = Array1::<f64>::zeros(d + 1);
                let mut alpha = vec![0.0; n];
                let mut order: Vec<usize> = (0..n).collect();
                let mut r = rng::rng(seed, &[STREAM_PROBE, cls as u64]);
                for _ in 0..1000 {
                    order.shuffle(&mut r);
                    let mut violation = 0.0f64;
                    for &i in &order {
                        let g = sign[i] * w.dot(&z.row(i)) - 1.0;
                        let pg = if alpha[i] == 0.0 {
                            g.min(0.0)
                        } else if alpha[i] == c {
                            g.max(0.0)
                        } else {
                            g
                        };
                        violation = violation.max(pg.abs());
                        if pg != 0.0 {
                            let old = alpha[i];
                            alpha[i] = (old - g / sq[i]).clamp(0.0, c);
                            w.scaled_add((alpha[i] - old) * sign[i], &z.row(i));
                        }
                    }
                    if violation < 1e-3 {
                        break;
                    }
                }
                w
            })
            .collect();
        let mut weights = Array2::zeros((classes, d + 1));
        for (c, w) in rows.iter().enumerate() {
            weights.row_mut(c).assign(w);
        }
        Self { mean, scale, weights }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        let d = self.mean.len();
        let z = (&x - &self.mean) * &self.scale;
        z.rows()
            .into_iter()
            .map(|r| {
                let mut best = (0, f64::NEG_INFINITY);
                for (c, w) in self.weights.rows().into_iter().enumerate() {
                    let s = r.dot(&w.slice(ndarray::s![..d])) + w[d];
                    if s > best.1 {
                        best = (c, s);
                    }
                }
                best.0
            })
            .collect()
    }
}

/// Per-class seeded subsample keeping `round(fraction * n_c)` (at least one)
/// examples of every class.
pub fn stratified_subset(labels: &[usize], fraction: f64, seed: u64) -> Vec<usize> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut r = rng::rng(seed, &[STREAM_PROBE, u64::MAX]);
    let mut out = Vec::new();
    for (_, mut idx) in by_class {
        let keep = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len());
        idx.shuffle(&mut r);
        out.extend_from_slice(&idx[..keep]);
    }
    out.sort_unstable();
    out
}

/// Test accuracy of a linear probe fitted on a stratified `fraction` of the
/// training frames.
pub fn phase_classification<T: Scalar>(
    train_x: ArrayView2<'_, T>,
    train_y: &[usize],
    test_x: ArrayView2<'_, T>,
    test_y: &[usize],
    fraction: f64,
    seed: u64,
) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("label fraction must lie in (0, 1], got {fraction}")));
    }
    if train_y.len() != train_x.nrows() || test_y.len() != test_x.nrows() {
        return Err(Error::Data("features and labels disagree in length".into()));
    }
    if train_y.is_empty() || test_y.is_empty() {
        return Err(Error::Data("phase classification needs training and test frames".into()));
    }
    let classes = train_y.iter().chain(test_y).max().map_or(0, |m| m + 1);
    let subset = stratified_subset(train_y, fraction, seed);
    let x = train_x.select(Axis(0), &subset).mapv(Scalar::as_f64);
    let y: Vec<usize> = subset.iter().map(|&i| train_y[i]).collect();
    let svm = LinearSvm::fit(x.view(), &y, classes, 1.0, seed);
    let pred = svm.predict(test_x.mapv(Scalar::as_f64).view());
    let hits = pred.iter().zip(test_y).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / test_y.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Random,
    Uniform,
    /// Same extraction as the model, applied to raw concatenated features.
    RawKmeans,
}

impl std::str::FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "uniform" => Ok(Self::Uniform),
            "raw_kmeans" | "kmeans" => Ok(Self::RawKmeans),
            _ => Err(Error::Config(format!(
                "unknown baseline {s:?}; supported: random, uniform, raw_kmeans"
            ))),
        }
    }
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Uniform => "uniform",
            Self::RawKmeans => "raw_kmeans",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub extract: ExtractConfig,
    pub fractions: Vec<f64>,
    pub baselines: Vec<Baseline>,
    /// Keep every `subsample`-th frame when scoring.
    pub subsample: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            extract: ExtractConfig::default(),
            fractions: vec![0.1, 0.5, 1.0],
            baselines: Vec::new(),
            subsample: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScores {
    pub per_step: Scores,
    pub overall: Scores,
    /// Per-video per-step averaged scores.
    pub videos: BTreeMap<String, Scores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPair {
    pub a: String,
    pub b: String,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Key-step localization per method ("features" plus baselines).
    pub ksl: BTreeMap<String, MethodScores>,
    pub kendall_tau: Vec<TauPair>,
    pub kendall_tau_mean: Option<f64>,
    /// Phase accuracy keyed by label fraction.
    pub phase_accuracy: BTreeMap<String, f64>,
}

fn subsample_rows<T: Scalar>(x: ArrayView2<'_, T>, every: usize) -> Array2<T> {
    let idx: Vec<usize> = (0..x.nrows()).step_by(every).collect();
    x.select(Axis(0), &idx)
}

fn subsample<V: Clone>(v: &[V], every: usize) -> Vec<V> {
    v.iter().step_by(every).cloned().collect()
}

fn score_method(names: &[String], preds: &[Vec<i64>], gts: &[Vec<i64>]) -> Result<MethodScores> {
    let mut per_step = Vec::new();
    let mut overall = Vec::new();
    let mut videos = BTreeMap::new();
    for ((name, p), g) in names.iter().zip(preds).zip(gts) {
        let ps = ksl_metrics(p, g, Averaging::PerStep)?.scores;
        per_step.push(ps);
        overall.push(ksl_metrics(p, g, Averaging::Overall)?.scores);
        videos.insert(name.clone(), ps);
    }
    Ok(MethodScores {
        per_step: Scores::mean(&per_step),
        overall: Scores::mean(&overall),
        videos,
    })
}

/// Predicted frame labels from extraction: cluster ids, `-1` for rejected frames.
pub fn predict_labels<T: Scalar>(features: ArrayView2<'_, T>, timestamps: &[f64], cfg: &ExtractConfig) -> Result<Vec<i64>> {
    Ok(keysteps::extract_key_steps(features, timestamps, cfg)?.labels)
}

/// Full evaluation of per-video features (`features[v]` aligned with
/// `manifest.records[v]`). `raw` is needed only for the raw k-means baseline.
pub fn evaluate<T: Scalar>(
    manifest: &Manifest,
    features: &[Array2<T>],
    raw: Option<&[Array2<f32>]>,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if features.len() != manifest.len() {
        return Err(Error::Data(format!("{} feature sets for {} videos", features.len(), manifest.len())));
    }
    let every = cfg.subsample.max(1);
    let mut names = Vec::new();
    let mut gts = Vec::new();
    let mut stamps = Vec::new();
    for rec in &manifest.records {
        let steps = rec
            .step_labels
            .as_ref()
            .ok_or_else(|| Error::Data(format!("video {} has no step_labels", rec.video_id)))?;
        names.push(rec.video_id.clone());
        gts.push(subsample(steps, every));
        stamps.push(subsample(rec.timestamps(), every));
    }
    let feats: Vec<Array2<T>> = features.iter().map(|f| subsample_rows(f.view(), every)).collect();
    let k = cfg.extract.num_clusters;

    let mut ksl = BTreeMap::new();
    let preds = feats
        .par_iter()
        .zip(&stamps)
        .map(|(f, ts)| predict_labels(f.view(), ts, &cfg.extract))
        .collect::<Result<Vec<_>>>()?;
    ksl.insert("features".to_string(), score_method(&names, &preds, &gts)?);
    for &b in &cfg.baselines {
        let preds: Vec<Vec<i64>> = match b {
            Baseline::Random => gts
                .iter()
                .enumerate()
                .map(|(v, g)| baseline_random(g.len(), k, rng::derive_seed(cfg.seed, &[v as u64])))
                .collect(),
            Baseline::Uniform => gts.iter().map(|g| baseline_uniform(g.len(), k)).collect(),
            Baseline::RawKmeans => {
                let raw = raw.ok_or_else(|| Error::Config("raw k-means baseline needs raw features".into()))?;
                raw.par_iter()
                    .zip(&stamps)
                    .map(|(f, ts)| predict_labels(subsample_rows(f.view(), every).view(), ts, &cfg.extract))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        ksl.insert(b.name().to_string(), score_method(&names, &preds, &gts)?);
    }

    let pairs: Vec<(usize, usize)> = (0..feats.len()).flat_map(|a| (a + 1..feats.len()).map(move |b| (a, b))).collect();
    let kendall_tau = pairs
        .par_iter()
        .map(|&(a, b)| {
            Ok(TauPair {
                a: names[a].clone(),
                b: names[b].clone(),
                tau: kendalls_tau(feats[a].view(), feats[b].view())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kendall_tau_mean =
        (!kendall_tau.is_empty()).then(|| kendall_tau.iter().map(|p| p.tau).sum::<f64>() / kendall_tau.len() as f64);

    let mut phase_accuracy = BTreeMap::new();
    if manifest.records.iter().all(|r| r.phase_labels.is_some()) && !cfg.fractions.is_empty() {
        let phases: Vec<Vec<usize>> = manifest
            .records
            .iter()
            .map(|r| subsample(r.phase_labels.as_deref().unwrap_or_default(), every).into_iter().map(|l| l.max(0) as usize).collect())
            .collect();
        let (train, test) = split_for_probe(&feats, &phases);
        for &f in &cfg.fractions {
            let acc = phase_classification(train.0.view(), &train.1, test.0.view(), &test.1, f, cfg.seed)?;
            phase_accuracy.insert(format!("{f}"), acc);
        }
    }
    Ok(EvalReport {
        ksl,
        kendall_tau,
        kendall_tau_mean,
        phase_accuracy,
    })
}

type Split<T> = (Array2<T>, Vec<usize>);

/// First half of the videos (rounded up) trains the probe, the rest tests it;
/// a single video is split into even and odd frames.
fn split_for_probe<T: Scalar>(feats: &[Array2<T>], labels: &[Vec<usize>]) -> (Split<T>, Split<T>) {
    let stack = |items: Vec<(ArrayView2<'_, T>, Vec<usize>)>| -> Split<T> {
        let views: Vec<_> = items.iter().map(|(f, _)| f.view()).collect();
        let x = ndarray::concatenate(Axis(0), &views).expect("equal feature widths");
        (x, items.into_iter().flat_map(|(_, l)| l).collect())
    };
    if feats.len() == 1 {
        let f = &feats[0];
        let pick = |parity: usize| {
            let idx: Vec<usize> = (parity..f.nrows()).step_by(2).collect();
            (f.select(Axis(0), &idx), idx.iter().map(|&i| labels[0][i]).collect())
        };
        return (pick(0), pick(1));
    }
    let cut = feats.len().div_ceil(2);
    let part = |range: std::ops::Range<usize>| stack(range.map(|v| (feats[v].view(), labels[v].clone())).collect());
    (part(0..cut), part(cut..feats.len()))
}
