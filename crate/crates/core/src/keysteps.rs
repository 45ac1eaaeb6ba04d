//! Key-step extraction: cluster adapted features, drop the frames farthest
//! from each center, split every cluster into temporally contiguous segments
//! and keep the most central frame of each segment.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

const STREAM_KMEANS: u64 = 7;

/// Result of clustering `T` points into `K` groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centers: Array2<f64>,
    pub assignments: Vec<usize>,
    /// Distance from each point to its assigned (nearest) center.
    pub distances: Vec<f64>,
    pub inertia: f64,
}

pub trait Clusterer: Send + Sync {
    fn fit(&self, points: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<Clustering>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeans {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeans {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

fn sq_dist(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center per point (ties: lowest center index) and squared distance.
fn assign(points: ArrayView2<'_, f64>, centers: &Array2<f64>) -> Vec<(usize, f64)> {
    (0..points.nrows())
        .into_par_iter()
        .map(|i| {
            let p = points.row(i);
            centers
                .axis_iter(Axis(0))
                .enumerate()
                .map(|(c, ctr)| (c, sq_dist(p, ctr)))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        })
        .collect()
}

impl KMeans {
    fn plus_plus(&self, points: ArrayView2<'_, f64>, k: usize, rng: &mut rng::Rng) -> Array2<f64> {
        let n = points.nrows();
        let mut centers = Array2::zeros((k, points.ncols()));
        centers.row_mut(0).assign(&points.row(rng.random_range(0..n)));
        let mut d2: Vec<f64> = points.rows().into_iter().map(|p| sq_dist(p, centers.row(0))).collect();
        for c in 1..k {
            let total: f64 = d2.iter().sum();
            let pick = if total > 0.0 {
                let mut target = rng.random::<f64>() * total;
                let mut pick = n - 1;
                for (i, &w) in d2.iter().enumerate() {
                    if target < w {
                        pick = i;
                        break;
                    }
                    target -= w;
                }
                pick
            } else {
                rng.random_range(0..n)
            };
            centers.row_mut(c).assign(&points.row(pick));
            for (i, p) in points.rows().into_iter().enumerate() {
                d2[i] = d2[i].min(sq_dist(p, centers.row(c)));
            }
        }
        centers
    }

    fn run(&self, points: ArrayView2<'_, f64>, k: usize, rng: &mut rng::Rng) -> Clustering {
        let (n, d) = points.dim();
        let mut centers = self.plus_plus(points, k, rng);
        let mut nearest = assign(points, &centers);
        for _ in 0..self.max_iter {
            let mut sums = Array2::<f64>::zeros((k, d));
            let mut counts = vec![0usize; k];
            for (i, &(c, _)) in nearest.iter().enumerate() {
                sums.row_mut(c).scaled_add(1.0, &points.row(i));
                counts[c] += 1;
            }
            let mut shift = 0.0f64;
            let mut reseeded = false;
            for c in 0..k {
                let new = if counts[c] == 0 {
                    // farthest point from its current center, ties: lowest index
                    let far = (0..n).fold(0, |b, i| if nearest[i].1 > nearest[b].1 { i } else { b });
                    nearest[far].1 = 0.0;
                    reseeded = true;
                    points.row(far).to_owned()
                } else {
                    sums.row(c).mapv(|v| v / counts[c] as f64)
                };
                shift = shift.max(sq_dist(new.view(), centers.row(c)).sqrt());
                centers.row_mut(c).assign(&new);
            }
            nearest = assign(points, &centers);
            if shift <= self.tol && !reseeded {
                break;
            }
        }
        let distances: Vec<f64> = nearest.iter().map(|&(_, d2)| d2.sqrt()).collect();
        Clustering {
            inertia: nearest.iter().map(|&(_, d2)| d2).sum(),
            assignments: nearest.iter().map(|&(c, _)| c).collect(),
            distances,
            centers,
        }
    }
}

impl Clusterer for KMeans {
    fn fit(&self, points: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<Clustering> {
        if k == 0 {
            return Err(Error::Config("number of clusters must be positive".into()));
        }
        if points.nrows() < k {
            return Err(Error::Data(format!("cannot form {k} clusters from {} frames", points.nrows())));
        }
        let runs: Vec<Clustering> = (0..self.restarts.max(1))
            .into_par_iter()
            .map(|r| self.run(points, k, &mut rng::rng(seed, &[STREAM_KMEANS, r as u64])))
            .collect();
        // lowest inertia, ties: earliest restart
        Ok(runs
            .into_iter()
            .reduce(|best, c| if c.inertia < best.inertia { c } else { best })
            .expect("at least one restart"))
    }
}

/// Clustering algorithms selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringAlgorithm {
    #[default]
    Kmeans,
}

impl ClusteringAlgorithm {
    pub const SUPPORTED: &'static [&'static str] = &["kmeans"];
}

impl FromStr for ClusteringAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Self::Kmeans),
            _ => Err(Error::Config(format!(
                "unknown clustering algorithm {s:?}; supported: {}",
                Self::SUPPORTED.join(", ")
            ))),
        }
    }
}

impl fmt::Display for ClusteringAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Kmeans => "kmeans",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    pub num_clusters: usize,
    /// Fraction of each cluster discarded as background.
    pub background_ratio: f64,
    /// Largest gap in seconds inside one segment.
    pub gamma_split: f64,
    pub clustering: ClusteringAlgorithm,
    pub kmeans: KMeans,
    pub seed: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            num_clusters: 7,
            background_ratio: 0.1,
            gamma_split: 2.0,
            clustering: ClusteringAlgorithm::Kmeans,
            kmeans: KMeans::default(),
            seed: 0,
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_clusters == 0 {
            return Err(Error::Config("num_clusters must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.background_ratio) {
            return Err(Error::Config(format!(
                "background_ratio must lie in [0, 1), got {}",
                self.background_ratio
            )));
        }
        if !(self.gamma_split.is_finite() && self.gamma_split > 0.0) {
            return Err(Error::Config("gamma_split must be positive".into()));
        }
        Ok(())
    }

    pub fn clusterer(&self) -> Box<dyn Clusterer> {
        match self.clustering {
            ClusteringAlgorithm::Kmeans => Box::new(self.kmeans.clone()),
        }
    }
}

fn to_f64<T: Scalar>(x: ArrayView2<'_, T>) -> Array2<f64> {
    x.mapv(Scalar::as_f64)
}

pub fn cluster_features<T: Scalar>(
    features: ArrayView2<'_, T>,
    k: usize,
    algorithm: &dyn Clusterer,
    seed: u64,
) -> Result<Clustering> {
    algorithm.fit(to_f64(features).view(), k, seed)
}

/// Number of frames a cluster of `n` loses to background rejection.
pub fn rejected_count(n: usize, alpha: f64) -> usize {
    // guard against products like 0.1 * 30 = 3.0000000000000004
    ((alpha * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Drops the `ceil(alpha * n)` frames farthest from the center (ties: larger
/// frame index first). `distances` is indexed by frame. Returns the retained
/// frames in ascending order.
pub fn background_reject(indices: &[usize], distances: &[f64], alpha: f64) -> Vec<usize> {
    let drop = rejected_count(indices.len(), alpha);
    let mut by_distance = indices.to_vec();
    by_distance.sort_by(|&a, &b| distances[b].total_cmp(&distances[a]).then(b.cmp(&a)));
    let mut kept = by_distance.split_off(drop);
    kept.sort_unstable();
    kept
}

/// Cuts an ascending index list wherever consecutive timestamps differ by
/// more than `gamma_split` seconds.
pub fn split_to_segments(indices: &[usize], gamma_split: f64, timestamps: &[f64]) -> Vec<Vec<usize>> {
    let mut segments: Vec<Vec<usize>> = Vec::new();
    for &i in indices {
        match segments.last_mut() {
            Some(seg) if timestamps[i] - timestamps[*seg.last().expect("segments are nonempty")] <= gamma_split => {
                seg.push(i)
            }
            _ => segments.push(vec![i]),
        }
    }
    segments
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyStep {
    pub frame: usize,
    pub time_s: f64,
    pub cluster: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyStepResult {
    /// Sorted by time.
    pub key_steps: Vec<KeyStep>,
    pub centers: Vec<Vec<f64>>,
    /// Cluster id per frame, or -1 for frames rejected as background.
    pub labels: Vec<i64>,
}

/// Runs the full extraction on one video.
pub fn extract_key_steps<T: Scalar>(
    features: ArrayView2<'_, T>,
    timestamps: &[f64],
    cfg: &ExtractConfig,
) -> Result<KeyStepResult> {
    cfg.validate()?;
    if timestamps.len() != features.nrows() {
        return Err(Error::Data(format!(
            "{} timestamps for {} frames",
            timestamps.len(),
            features.nrows()
        )));
    }
    let clustering = cluster_features(features, cfg.num_clusters, cfg.clusterer().as_ref(), cfg.seed)?;
    Ok(key_steps_from_clustering(&clustering, timestamps, cfg))
}

/// Rejection, segmentation and selection on an existing clustering.
pub fn key_steps_from_clustering(c: &Clustering, timestamps: &[f64], cfg: &ExtractConfig) -> KeyStepResult {
    let k = c.centers.nrows();
    let mut labels = vec![crate::datamodel::BACKGROUND; c.assignments.len()];
    let mut key_steps = Vec::new();
    for cluster in 0..k {
        let members: Vec<usize> = (0..c.assignments.len()).filter(|&t| c.assignments[t] == cluster).collect();
        let kept = background_reject(&members, &c.distances, cfg.background_ratio);
        for &t in &kept {
            labels[t] = cluster as i64;
        }
        for seg in split_to_segments(&kept, cfg.gamma_split, timestamps) {
            // most central frame, ties: earliest
            let best = seg
                .iter()
                .copied()
                .reduce(|b, t| if c.distances[t] < c.distances[b] { t } else { b })
                .expect("segments are nonempty");
            key_steps.push(KeyStep {
                frame: best,
                time_s: timestamps[best],
                cluster,
                distance: c.distances[best],
            });
        }
    }
    key_steps.sort_by(|a, b| a.time_s.total_cmp(&b.time_s).then(a.frame.cmp(&b.frame)));
    KeyStepResult {
        key_steps,
        centers: c.centers.rows().into_iter().map(|r| r.to_vec()).collect(),
        labels,
    }
}
