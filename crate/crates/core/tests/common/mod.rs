//! Oracles shared by the integration suites and the acceptance target.
#![allow(dead_code)]

use keystep_core::bmc2::{build_windows, BootstrapVariant, GammaPositions, LossConfig, Reduction};
use keystep_core::rng;
use keystep_core::synth::{generate, SynthConfig};
use keystep_core::trainer::{make_sample, TrainConfig, VideoSample};
use ndarray::{Array2, Axis};
use rand::Rng as _;
use rand_distr::StandardNormal;

pub fn unit_rows(n: usize, d: usize, r: &mut rng::Rng) -> Array2<f64> {
    let mut q = Array2::from_shape_fn((n, d), |_| r.sample::<f64, _>(StandardNormal));
    for mut row in q.axis_iter_mut(Axis(0)) {
        let norm = row.dot(&row).sqrt();
        row /= norm;
    }
    q
}

pub fn sorted_times(n: usize, r: &mut rng::Rng) -> Vec<f64> {
    let mut t = 0.0;
    (0..n)
        .map(|_| {
            t += r.random_range(0.1..2.0);
            t
        })
        .collect()
}

fn dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Straight transcription of the objective: four nested loops, windows
/// rebuilt from their definitions.
pub fn naive(q: &[Array2<f64>], raw: &Array2<f64>, ts: &[f64], cfg: &LossConfig) -> f64 {
    let n = ts.len();
    let m = q.len();
    let lambda = cfg.lambda_for(m).unwrap();
    let unit = match cfg.gamma_positions {
        GammaPositions::ChunkIndex => 1.0,
        GammaPositions::Unit => 1.0 / (n - 1) as f64,
    };
    let mut total = 0.0;
    let mut count = 0usize;
    for a in 0..n {
        let in_w = |j: usize| (ts[a] - ts[j]).abs() <= cfg.sigma;
        let window: Vec<usize> = (0..n).filter(|&j| in_w(j)).collect();
        let delta = window.iter().map(|&j| dist(raw.row(a), raw.row(j))).sum::<f64>() / window.len() as f64;
        for j in 0..n {
            if j == a {
                continue;
            }
            let boot = dist(raw.row(a), raw.row(j)) <= delta;
            let (pos, neg) = match cfg.bootstrap_variant {
                BootstrapVariant::UnionPosNeg => (in_w(j) || boot, !(in_w(j) || boot)),
                BootstrapVariant::UnionNegOnly => (in_w(j), !(in_w(j) || boot)),
                BootstrapVariant::SampledOnly => (boot, !boot),
                BootstrapVariant::None => (in_w(j), !in_w(j)),
            };
            for u in 0..m {
                for v in 0..m {
                    if lambda[u][v] == 0.0 || !(pos || neg) {
                        continue;
                    }
                    count += 1;
                    let d = dist(q[u].row(a), q[v].row(j));
                    let g = ((a as f64 - j as f64) * unit).powi(2) + 1.0;
                    let l = if pos { d / g } else { g * (cfg.margin - d).max(0.0) };
                    total += lambda[u][v] * l;
                }
            }
        }
    }
    match cfg.reduction {
        Reduction::MeanOverPairs => total / count as f64,
        Reduction::Sum => total,
    }
}

pub fn instance(seed: u64, n: usize, m: usize, d: usize) -> (Vec<Array2<f64>>, Array2<f64>, Vec<f64>) {
    let mut r = rng::rng(seed, &[99]);
    let q = (0..m).map(|_| unit_rows(n, d, &mut r)).collect();
    let raw = Array2::from_shape_fn((n, 6), |_| r.sample::<f64, _>(StandardNormal));
    let ts = sorted_times(n, &mut r);
    (q, raw, ts)
}

/// Fraction of (anchor, frame) pairs, anchor inside one occurrence of the
/// repeated step and frame inside the other occurrence but outside the
/// sigma-window, that the union window covers.
pub fn repeat_inclusion(seed: u64, variant: BootstrapVariant) -> Option<f64> {
    let (m, gt) = generate(&SynthConfig {
        num_videos: 1,
        repeat_probability: 1.0,
        cue_noise: vec![0.0],
        seed,
        ..Default::default()
    })
    .unwrap();
    let mut cfg = TrainConfig {
        num_chunks: 256,
        ..Default::default()
    };
    cfg.loss.bootstrap_variant = variant;
    let mods = cfg.training_modalities(&m).unwrap();
    let sample: VideoSample<f64> = make_sample(&m.records[0], &mods, &cfg, &mut rng::rng(seed, &[4])).unwrap();
    let ws = build_windows(&sample.timestamps, Some(sample.bootstrap.view()), &cfg.loss).unwrap();
    let segs = &gt.segments[0];
    let step = segs.iter().map(|s| s.step).find(|s| segs.iter().filter(|t| t.step == *s).count() > 1)?;
    let occ: Vec<_> = segs.iter().filter(|s| s.step == step).collect();
    let inside = |f: usize, k: usize| (occ[k].start..occ[k].end).contains(&f);
    let (mut hit, mut total) = (0usize, 0usize);
    for (a, &fa) in sample.frames.iter().enumerate() {
        let Some(ka) = (0..occ.len()).find(|&k| inside(fa, k)) else { continue };
        for (j, &fj) in sample.frames.iter().enumerate() {
            if ws.w[a][j] || !(0..occ.len()).any(|k| k != ka && inside(fj, k)) {
                continue;
            }
            total += 1;
            hit += ws.w_tilde[a][j] as usize;
        }
    }
    (total > 0).then(|| hit as f64 / total as f64)
}

/// Lexicographically first optimal injective map, by enumeration.
pub fn brute_force(o: &[Vec<usize>], k: usize, s: usize) -> (Vec<Option<usize>>, usize) {
    fn rec(
        c: usize,
        k: usize,
        s: usize,
        o: &[Vec<usize>],
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        best: &mut (Vec<Option<usize>>, usize),
    ) {
        let matched = cur.iter().filter(|x| x.is_some()).count();
        if c == k {
            if matched == k.min(s) {
                let total = cur.iter().enumerate().filter_map(|(i, x)| x.map(|st| o[i][st])).sum();
                if total > best.1 || best.0.is_empty() {
                    *best = (cur.clone(), total);
                }
            }
            return;
        }
        for st in 0..s {
            if !used[st] {
                used[st] = true;
                cur.push(Some(st));
                rec(c + 1, k, s, o, used, cur, best);
                cur.pop();
                used[st] = false;
            }
        }
        cur.push(None);
        rec(c + 1, k, s, o, used, cur, best);
        cur.pop();
    }
    let mut best = (Vec::new(), 0);
    rec(0, k, s, o, &mut vec![false; s], &mut Vec::new(), &mut best);
    best
}
