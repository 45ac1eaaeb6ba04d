//! Temporal windows and the bootstrapped multi-cue contrastive objective.
//!
//! For an anchor `a` and another sampled frame `j`, the pair loss is
//!
//! ```text
//! w * d / g + (1 - w) * g * max(0, margin - d),   g = (t_a - t_j)^2 + 1
//! ```
//!
//! with `d` the Euclidean distance of the projected features and `t` the
//! position of the frame inside the sampled sequence (by default scaled to
//! `[0, 1]`). Positives come from a
//! window of `sigma` seconds around the anchor, optionally widened by frames
//! whose raw features are at least as close as the mean in-window distance.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapVariant {
    /// Positives: sigma-window union bootstrapped window. Negatives: the rest.
    #[default]
    UnionPosNeg,
    /// Positives: sigma-window. Negatives: outside the union window; frames
    /// recovered only by bootstrapping are ignored.
    UnionNegOnly,
    /// Positives: bootstrapped window only.
    SampledOnly,
    /// Plain sigma-window.
    None,
}

/// Units of the positions entering the temporal weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GammaPositions {
    /// Index inside the sampled sequence, `0..N`.
    ChunkIndex,
    /// Index divided by `N - 1`, so positions span `[0, 1]` whatever the
    /// number of chunks.
    #[default]
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    #[default]
    MeanOverPairs,
    Sum,
}

/// Which raw features drive the bootstrapped window.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BootstrapSource {
    /// First training modality.
    #[default]
    First,
    /// All modalities concatenated.
    Concat,
    Named(String),
}

impl TryFrom<String> for BootstrapSource {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        Ok(match s.as_str() {
            "" => return Err("bootstrap modality must not be empty".into()),
            "first" => BootstrapSource::First,
            "concat" => BootstrapSource::Concat,
            _ => BootstrapSource::Named(s),
        })
    }
}

impl From<BootstrapSource> for String {
    fn from(s: BootstrapSource) -> String {
        match s {
            BootstrapSource::First => "first".into(),
            BootstrapSource::Concat => "concat".into(),
            BootstrapSource::Named(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    /// Positive window half-width in seconds.
    pub sigma: f64,
    pub margin: f64,
    /// Modality pair weights; `None` picks [`default_lambda`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<f64>>>,
    pub bootstrap_enabled: bool,
    pub bootstrap_modality: BootstrapSource,
    pub bootstrap_variant: BootstrapVariant,
    pub reduction: Reduction,
    pub gamma_positions: GammaPositions,
    /// Whether the anchor's own zero distance enters the threshold mean.
    pub inclusive_threshold: bool,
    /// Keep at most this many negatives per anchor (evenly strided).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_negatives: Option<usize>,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            margin: 2.0,
            lambda: None,
            bootstrap_enabled: true,
            bootstrap_modality: BootstrapSource::First,
            bootstrap_variant: BootstrapVariant::UnionPosNeg,
            reduction: Reduction::MeanOverPairs,
            gamma_positions: GammaPositions::Unit,
            inclusive_threshold: true,
            max_negatives: None,
        }
    }
}

impl LossConfig {
    pub fn effective_variant(&self) -> BootstrapVariant {
        if self.bootstrap_enabled {
            self.bootstrap_variant
        } else {
            BootstrapVariant::None
        }
    }

    /// Resolved weights for `m` modalities; checks shape and unit diagonal.
    pub fn lambda_for(&self, m: usize) -> Result<Vec<Vec<f64>>> {
        let lambda = self.lambda.clone().unwrap_or_else(|| default_lambda(m));
        if lambda.len() != m || lambda.iter().any(|r| r.len() != m) {
            return Err(Error::Config(format!(
                "lambda must be {m}x{m} for {m} modalities"
            )));
        }
        for (u, row) in lambda.iter().enumerate() {
            if row[u] != 1.0 {
                return Err(Error::Config(format!("lambda[{u}][{u}] must be 1, got {}", row[u])));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Config("lambda entries must be finite and >= 0".into()));
            }
        }
        Ok(lambda)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return Err(Error::Config(format!("margin must be positive, got {}", self.margin)));
        }
        if self.max_negatives == Some(0) {
            return Err(Error::Config("max_negatives must be positive".into()));
        }
        Ok(())
    }
}

/// Pair weights: all ones for up to two modalities; for more, ones on the
/// diagonal and on the first (appearance) modality's row, zero elsewhere.
pub fn default_lambda(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|u| {
            (0..m)
                .map(|v| if m <= 2 || u == v || u == 0 { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

/// `W[i][j] = |t_i - t_j| <= sigma`.
pub fn sigma_window(timestamps: &[f64], sigma: f64) -> Vec<Vec<bool>> {
    timestamps
        .iter()
        .map(|&ti| timestamps.iter().map(|&tj| (ti - tj).abs() <= sigma).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRow {
    pub delta: f64,
    pub w_prime: Vec<bool>,
    pub w_tilde: Vec<bool>,
}

/// Bootstrapped window for one anchor from raw features.
pub fn bootstrap_window(raw: ArrayView2<'_, f64>, window_row: &[bool], anchor: usize, inclusive: bool) -> BootstrapRow {
    let pa = raw.row(anchor);
    let dist: Vec<f64> = raw
        .rows()
        .into_iter()
        .map(|r| r.iter().zip(pa.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        .collect();
    let (sum, count) = window_row
        .iter()
        .enumerate()
        .filter(|&(j, &w)| w && (inclusive || j != anchor))
        .fold((0.0, 0usize), |(s, c), (j, _)| (s + dist[j], c + 1));
    let delta = if count == 0 { 0.0 } else { sum / count as f64 };
    let w_prime: Vec<bool> = dist.iter().map(|&d| d <= delta).collect();
    let w_tilde = w_prime.iter().zip(window_row).map(|(&a, &b)| a || b).collect();
    BootstrapRow {
        delta,
        w_prime,
        w_tilde,
    }
}

/// Windows used by one loss evaluation. Row `a` belongs to anchor `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSet {
    pub anchors: Vec<usize>,
    pub w: Vec<Vec<bool>>,
    pub w_prime: Vec<Vec<bool>>,
    /// Always the union of `w` and `w_prime`.
    pub w_tilde: Vec<Vec<bool>>,
    pub delta: Vec<f64>,
    /// Pairs treated as positives / negatives under the configured variant.
    pub positive: Vec<Vec<bool>>,
    pub negative: Vec<Vec<bool>>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// Builds all windows for a sampled sequence. `raw` is required unless the
/// effective variant is [`BootstrapVariant::None`].
pub fn build_windows(timestamps: &[f64], raw: Option<ArrayView2<'_, f64>>, cfg: &LossConfig) -> Result<WindowSet> {
    let n = timestamps.len();
    let w = sigma_window(timestamps, cfg.sigma);
    let variant = cfg.effective_variant();
    let rows: Vec<BootstrapRow> = match variant {
        BootstrapVariant::None => w
            .iter()
            .map(|row| BootstrapRow {
                delta: 0.0,
                w_prime: vec![false; n],
                w_tilde: row.clone(),
            })
            .collect(),
        _ => {
            let raw = raw.ok_or_else(|| Error::Config("bootstrapping needs raw features".into()))?;
            if raw.nrows() != n {
                return Err(Error::Data(format!(
                    "{} raw rows for {n} timestamps",
                    raw.nrows()
                )));
            }
            (0..n)
                .into_par_iter()
                .map(|a| bootstrap_window(raw, &w[a], a, cfg.inclusive_threshold))
                .collect()
        }
    };
    let mut ws = WindowSet {
        anchors: (0..n).collect(),
        w,
        w_prime: Vec::with_capacity(n),
        w_tilde: Vec::with_capacity(n),
        delta: Vec::with_capacity(n),
        positive: Vec::with_capacity(n),
        negative: Vec::with_capacity(n),
    };
    for (a, row) in rows.into_iter().enumerate() {
        let (pos, mut neg): (Vec<bool>, Vec<bool>) = match variant {
            BootstrapVariant::None => (ws.w[a].clone(), ws.w[a].iter().map(|&x| !x).collect()),
            BootstrapVariant::UnionPosNeg => (row.w_tilde.clone(), row.w_tilde.iter().map(|&x| !x).collect()),
            BootstrapVariant::UnionNegOnly => (ws.w[a].clone(), row.w_tilde.iter().map(|&x| !x).collect()),
            BootstrapVariant::SampledOnly => (row.w_prime.clone(), row.w_prime.iter().map(|&x| !x).collect()),
        };
        if let Some(cap) = cfg.max_negatives {
            thin_negatives(&mut neg, cap);
        }
        ws.delta.push(row.delta);
        ws.w_prime.push(row.w_prime);
        ws.w_tilde.push(row.w_tilde);
        ws.positive.push(pos);
        ws.negative.push(neg);
    }
    Ok(ws)
}

fn thin_negatives(neg: &mut [bool], cap: usize) {
    let idx: Vec<usize> = neg.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect();
    if idx.len() <= cap {
        return;
    }
    neg.iter_mut().for_each(|b| *b = false);
    for k in 0..cap {
        neg[idx[k * idx.len() / cap]] = true;
    }
}

/// Temporal weight `(t_a - t_j)^2 + 1`.
#[inline]
pub fn gamma(t_a: f64, t_j: f64) -> f64 {
    (t_a - t_j).powi(2) + 1.0
}

/// Loss for a single pair of projected features.
pub fn cidm_pair_loss<T: Scalar>(q_a: &[T], q_j: &[T], t_a: f64, t_j: f64, positive: bool, margin: f64) -> f64 {
    let d = crate::scalar::euclidean(q_a, q_j).as_f64();
    let g = gamma(t_a, t_j);
    if positive {
        d / g
    } else {
        g * (margin - d).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct Bmc2Output<T> {
    pub loss: f64,
    /// Number of `(anchor, frame, u, v)` tuples that entered the loss.
    pub pairs: usize,
    /// `dL/dQ` per modality; empty when gradients were not requested.
    pub grads: Vec<Array2<T>>,
    pub windows: WindowSet,
}

/// Evaluates the objective on per-modality unit-row projections `q` (all
/// `N x D`), sharing one set of windows built from `timestamps` and the raw
/// bootstrap features. Positions inside the sampled sequence (`0..N`) enter
/// the temporal weight.
pub fn bmc2_loss<T: Scalar>(
    q: &[ArrayView2<'_, T>],
    raw: Option<ArrayView2<'_, f64>>,
    timestamps: &[f64],
    cfg: &LossConfig,
    with_grad: bool,
) -> Result<Bmc2Output<T>> {
    cfg.validate()?;
    let windows = build_windows(timestamps, raw, cfg)?;
    loss_with_windows(q, windows, cfg, with_grad)
}

/// Same as [`bmc2_loss`] with precomputed windows.
pub fn loss_with_windows<T: Scalar>(
    q: &[ArrayView2<'_, T>],
    windows: WindowSet,
    cfg: &LossConfig,
    with_grad: bool,
) -> Result<Bmc2Output<T>> {
    let m = q.len();
    let lambda = cfg.lambda_for(m)?;
    let n = windows.len();
    if m == 0 {
        return Err(Error::Config("no modalities given".into()));
    }
    if let Some(bad) = q.iter().find(|x| x.nrows() != n || x.ncols() != q[0].ncols()) {
        return Err(Error::Data(format!(
            "projection of shape {:?} does not match {n} frames",
            bad.dim()
        )));
    }
    let margin = cfg.margin;
    let pos_scale = match cfg.gamma_positions {
        GammaPositions::ChunkIndex => 1.0,
        GammaPositions::Unit => 1.0 / (n.max(2) - 1) as f64,
    };
    let mut loss = 0.0;
    let mut pairs = 0usize;
    let mut grads: Vec<Array2<T>> = if with_grad {
        q.iter().map(|x| Array2::zeros(x.raw_dim())).collect()
    } else {
        Vec::new()
    };
    for u in 0..m {
        for v in 0..m {
            let weight = lambda[u][v];
            if weight == 0.0 {
                continue;
            }
            let (qu, qv) = (q[u], q[v]);
            // per anchor: loss, pair count, gradient coefficients
            let rows: Vec<(f64, usize, Vec<T>)> = (0..n)
                .into_par_iter()
                .map(|a| {
                    let qa = qu.row(a);
                    let qa = qa.as_slice().map(<[T]>::to_vec).unwrap_or_else(|| qa.to_vec());
                    let mut row_loss = 0.0;
                    let mut count = 0;
                    let mut coef = if with_grad { vec![T::zero(); n] } else { Vec::new() };
                    for j in 0..n {
                        if j == a {
                            continue;
                        }
                        let pos = windows.positive[a][j];
                        if !pos && !windows.negative[a][j] {
                            continue;
                        }
                        count += 1;
                        let qj = qv.row(j);
                        let d = qa
                            .iter()
                            .zip(qj.iter())
                            .fold(T::zero(), |s, (&x, &y)| s + (x - y) * (x - y))
                            .sqrt()
                            .as_f64();
                        let g = gamma(a as f64 * pos_scale, j as f64 * pos_scale);
                        // dL/dd
                        let slope = if pos {
                            row_loss += weight * d / g;
                            weight / g
                        } else if d < margin {
                            row_loss += weight * g * (margin - d);
                            -weight * g
                        } else {
                            0.0
                        };
                        if with_grad && d > 0.0 {
                            coef[j] = T::of(slope / d);
                        }
                    }
                    (row_loss, count, coef)
                })
                .collect();
            let mut c = if with_grad { Array2::<T>::zeros((n, n)) } else { Array2::zeros((0, 0)) };
            for (a, (l, cnt, coef)) in rows.into_iter().enumerate() {
                loss += l;
                pairs += cnt;
                if with_grad {
                    c.row_mut(a).assign(&ndarray::ArrayView1::from(&coef[..]));
                }
            }
            if with_grad {
                // d/dq^u_a sum_j c_aj |q^u_a - q^v_j| = sum_j c_aj (q^u_a - q^v_j)
                let row_sums = c.sum_axis(ndarray::Axis(1)).insert_axis(ndarray::Axis(1));
                let col_sums = c.sum_axis(ndarray::Axis(0)).insert_axis(ndarray::Axis(1));
                let du = &qu * &row_sums - c.dot(&qv);
                let dv = &qv * &col_sums - c.t().dot(&qu);
                grads[u] += &du;
                grads[v] += &dv;
            }
        }
    }
    if cfg.reduction == Reduction::MeanOverPairs && pairs > 0 {
        let scale = 1.0 / pairs as f64;
        loss *= scale;
        for g in &mut grads {
            *g *= T::of(scale);
        }
    }
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("non-finite loss {loss}")));
    }
    Ok(Bmc2Output {
        loss,
        pairs,
        grads,
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn sigma_window_definition() {
        let ts: Vec<f64> = (0..10).map(f64::from).collect();
        let w = sigma_window(&ts, 2.0);
        let row5: Vec<usize> = (0..10).filter(|&j| w[5][j]).collect();
        assert_eq!(row5, vec![3, 4, 5, 6, 7]);
        for i in 0..10 {
            assert!(w[i][i]);
            for j in 0..10 {
                assert_eq!(w[i][j], w[j][i]);
            }
        }
        assert!(sigma_window(&ts, 9.0).iter().flatten().all(|&b| b));
    }

    #[test]
    fn pair_loss_hand_values() {
        let a = [1.0f64, 0.0];
        assert_eq!(cidm_pair_loss(&a, &a, 0.0, 3.0, true, 2.0), 0.0);
        // d = 1
        let b = [0.0f64, 0.0];
        assert!((cidm_pair_loss(&a, &b, 0.0, 2.0, true, 2.0) - 0.2).abs() < 1e-12);
        // d = 0.5, gamma = 26
        let c = [0.5f64, 0.0];
        assert!((cidm_pair_loss(&a, &c, 0.0, 5.0, false, 2.0) - 39.0).abs() < 1e-12);
        // d = 2.5 >= margin
        let e = [-1.5f64, 0.0];
        assert_eq!(cidm_pair_loss(&a, &e, 0.0, 5.0, false, 2.0), 0.0);
    }

    #[test]
    fn bootstrap_identical_features() {
        let raw = Array2::<f64>::ones((6, 3));
        let w = sigma_window(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 1.0);
        let row = bootstrap_window(raw.view(), &w[2], 2, true);
        assert_eq!(row.delta, 0.0);
        assert!(row.w_prime.iter().all(|&b| b));
        assert!(row.w_tilde.iter().all(|&b| b));
    }

    #[test]
    fn bootstrap_threshold_is_mean_window_distance() {
        let raw = array![[0.0], [1.0], [2.0], [10.0], [0.5]];
        let w = vec![true, true, false, false, false];
        let incl = bootstrap_window(raw.view(), &w, 0, true);
        assert_eq!(incl.delta, 0.5);
        assert_eq!(incl.w_prime, vec![true, false, false, false, true]);
        let excl = bootstrap_window(raw.view(), &w, 0, false);
        assert_eq!(excl.delta, 1.0);
        assert_eq!(excl.w_tilde, vec![true, true, false, false, true]);
    }

    #[test]
    fn variants_assign_roles() {
        let ts = [0.0, 1.0, 10.0, 11.0];
        let raw = array![[0.0], [0.0], [5.0], [0.0]];
        let mk = |variant| LossConfig {
            sigma: 1.5,
            bootstrap_variant: variant,
            ..Default::default()
        };
        let ws = build_windows(&ts, Some(raw.view()), &mk(BootstrapVariant::UnionPosNeg)).unwrap();
        assert_eq!(ws.positive[0], vec![true, true, false, true]);
        assert_eq!(ws.negative[0], vec![false, false, true, false]);
        let ws = build_windows(&ts, Some(raw.view()), &mk(BootstrapVariant::UnionNegOnly)).unwrap();
        assert_eq!(ws.positive[0], vec![true, true, false, false]);
        assert_eq!(ws.negative[0], vec![false, false, true, false]);
        let ws = build_windows(&ts, Some(raw.view()), &mk(BootstrapVariant::SampledOnly)).unwrap();
        assert_eq!(ws.positive[0], vec![true, true, false, true]);
        let ws = build_windows(&ts, None, &mk(BootstrapVariant::None)).unwrap();
        assert_eq!(ws.positive[0], vec![true, true, false, false]);
        assert_eq!(ws.w_tilde, ws.w);
    }

    #[test]
    fn lambda_defaults() {
        assert_eq!(default_lambda(2), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(
            default_lambda(3),
            vec![vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]
        );
        let bad = LossConfig {
            lambda: Some(vec![vec![0.5]]),
            ..Default::default()
        };
        assert!(bad.lambda_for(1).is_err());
        assert!(LossConfig::default().lambda_for(3).is_ok());
    }

    #[test]
    fn collapsed_positive_window_is_zero() {
        let q = Array2::from_shape_fn((5, 3), |(_, c)| if c == 0 { 1.0f64 } else { 0.0 });
        let cfg = LossConfig {
            sigma: 100.0,
            bootstrap_enabled: false,
            ..Default::default()
        };
        let ts = [0.0, 1.0, 2.0, 3.0, 4.0];
        let out = bmc2_loss(&[q.view()], None, &ts, &cfg, true).unwrap();
        assert_eq!(out.loss, 0.0);
        assert!(out.grads[0].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn thinning_keeps_cap() {
        let mut neg = vec![true; 10];
        thin_negatives(&mut neg, 3);
        assert_eq!(neg.iter().filter(|&&b| b).count(), 3);
    }

    #[test]
    fn bootstrap_source_strings() {
        let s: BootstrapSource = "concat".to_string().try_into().unwrap();
        assert_eq!(s, BootstrapSource::Concat);
        assert_eq!(String::from(BootstrapSource::Named("rgb".into())), "rgb");
    }
}
