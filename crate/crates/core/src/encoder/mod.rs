//! Per-modality temporal encoder (pre-norm transformer, unmasked attention)
//! and projection head.
//!
//! Forward passes used for training return a cache; [`TemporalEncoder::backward`]
//! consumes it and accumulates parameter gradients into a zero-initialized
//! encoder of the same shape.

pub mod checkpoint;
pub mod layers;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::datamodel::VideoRecord;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::Scalar;

pub use layers::{Activation, LayerNorm, LayerNormCache, Linear};

/// Added to the row norm before dividing in the projection head.
pub const NORM_EPS: f64 = 1e-12;

/// Where the sinusoidal positional encoding enters the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PositionalPlacement {
    /// Added to the output of the input projection (dimension `model_dim`).
    #[default]
    AfterInputProjection,
    /// Added to the raw features before the input projection (requires an
    /// even raw dimension).
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub num_layers: usize,
    pub num_heads: usize,
    pub model_dim: usize,
    pub mlp_hidden: usize,
    pub positional_base: f64,
    pub positional_placement: PositionalPlacement,
    pub head_activation: Activation,
    pub head_bias: bool,
    /// Dropout on both residual branches; training only.
    pub dropout: f64,
    pub layer_norm_eps: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            num_layers: 2,
            num_heads: 2,
            model_dim: 128,
            mlp_hidden: 128,
            positional_base: 10_000.0,
            positional_placement: PositionalPlacement::AfterInputProjection,
            head_activation: Activation::Gelu,
            head_bias: true,
            dropout: 0.0,
            layer_norm_eps: 1e-5,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 || self.num_heads == 0 || self.model_dim == 0 || self.mlp_hidden == 0 {
            return Err(Error::Config("encoder sizes must all be positive".into()));
        }
        if !self.model_dim.is_multiple_of(self.num_heads) {
            return Err(Error::Config(format!(
                "model_dim {} is not divisible by num_heads {}",
                self.model_dim, self.num_heads
            )));
        }
        if !self.model_dim.is_multiple_of(2) {
            return Err(Error::Config(format!("model_dim must be even, got {}", self.model_dim)));
        }
        if !(self.positional_base.is_finite() && self.positional_base > 0.0) {
            return Err(Error::Config("positional_base must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config("dropout must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Sinusoidal encoding: column `2i` holds `sin(s / base^(2i/D))`, column
/// `2i+1` holds `cos` of the same argument.
pub fn positional_encoding<T: Scalar>(positions: &[f64], dim: usize, base: f64) -> Result<Array2<T>> {
    if !dim.is_multiple_of(2) {
        return Err(Error::Config(format!("positional encoding needs an even dimension, got {dim}")));
    }
    let mut pe = Array2::zeros((positions.len(), dim));
    for (n, &s) in positions.iter().enumerate() {
        for i in 0..dim / 2 {
            let arg = s / base.powf(2.0 * i as f64 / dim as f64);
            pe[[n, 2 * i]] = T::of(arg.sin());
            pe[[n, 2 * i + 1]] = T::of(arg.cos());
        }
    }
    Ok(pe)
}

/// Positions fed to the positional encoding: original frame indices
/// (`timestamp * fps`).
pub fn positions_from_timestamps(timestamps: &[f64], fps: f64) -> Vec<f64> {
    timestamps.iter().map(|t| t * fps).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block<T> {
    pub ln1: LayerNorm<T>,
    pub query: Linear<T>,
    pub key: Linear<T>,
    pub value: Linear<T>,
    pub out: Linear<T>,
    pub ln2: LayerNorm<T>,
    pub ff1: Linear<T>,
    pub ff2: Linear<T>,
}

#[derive(Debug, Clone)]
struct BlockCache<T> {
    ln1: LayerNormCache<T>,
    q: Array2<T>,
    k: Array2<T>,
    v: Array2<T>,
    probs: Vec<Array2<T>>,
    attn: Array2<T>,
    attn_mask: Option<Array2<T>>,
    ln2: LayerNormCache<T>,
    ff_pre: Array2<T>,
    ff_act: Array2<T>,
    ff_mask: Option<Array2<T>>,
}

impl<T: Scalar> Block<T> {
    fn init(cfg: &EncoderConfig, rng: &mut Rng) -> Self {
        let d = cfg.model_dim;
        Self {
            ln1: LayerNorm::new(d, cfg.layer_norm_eps),
            query: Linear::init(d, d, true, rng),
            key: Linear::init(d, d, true, rng),
            value: Linear::init(d, d, true, rng),
            out: Linear::init(d, d, true, rng),
            ln2: LayerNorm::new(d, cfg.layer_norm_eps),
            ff1: Linear::init(d, cfg.mlp_hidden, true, rng),
            ff2: Linear::init(cfg.mlp_hidden, d, true, rng),
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            ln1: self.ln1.zeros_like(),
            query: self.query.zeros_like(),
            key: self.key.zeros_like(),
            value: self.value.zeros_like(),
            out: self.out.zeros_like(),
            ln2: self.ln2.zeros_like(),
            ff1: self.ff1.zeros_like(),
            ff2: self.ff2.zeros_like(),
        }
    }

    fn forward(&self, x: Array2<T>, heads: usize, dropout: Option<(f64, &mut Rng)>) -> (Array2<T>, BlockCache<T>) {
        let ln1 = self.ln1.forward(x.view());
        let q = self.query.forward(ln1.out.view());
        let k = self.key.forward(ln1.out.view());
        let v = self.value.forward(ln1.out.view());
        let d = q.ncols();
        let dh = d / heads;
        let scale = T::of(1.0 / (dh as f64).sqrt());
        let mut concat = Array2::zeros(q.raw_dim());
        let mut probs = Vec::with_capacity(heads);
        for h in 0..heads {
            let cols = s![.., h * dh..(h + 1) * dh];
            let mut p = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            layers::softmax_rows(&mut p);
            concat.slice_mut(cols).assign(&p.dot(&v.slice(cols)));
            probs.push(p);
        }
        let mut attn = self.out.forward(concat.view());
        let (attn_mask, ff_mask_rate, rng) = match dropout {
            Some((rate, rng)) if rate > 0.0 => {
                let m = dropout_mask(attn.raw_dim(), rate, rng);
                attn *= &m;
                (Some(m), rate, Some(rng))
            }
            _ => (None, 0.0, None),
        };
        let x_mid = &x + &attn;
        let ln2 = self.ln2.forward(x_mid.view());
        let ff_pre = self.ff1.forward(ln2.out.view());
        let ff_act = Activation::Gelu.forward(&ff_pre);
        let mut ff = self.ff2.forward(ff_act.view());
        let ff_mask = rng.map(|rng| {
            let m = dropout_mask(ff.raw_dim(), ff_mask_rate, rng);
            ff *= &m;
            m
        });
        let y = &x_mid + &ff;
        let cache = BlockCache {
            ln1,
            q,
            k,
            v,
            probs,
            attn: concat,
            attn_mask,
            ln2,
            ff_pre,
            ff_act,
            ff_mask,
        };
        (y, cache)
    }

    fn backward(&self, c: &BlockCache<T>, dy: Array2<T>, heads: usize, g: &mut Self) -> Array2<T> {
        // y = x_mid + ff2(gelu(ff1(ln2(x_mid)))) * mask
        let mut dff = dy.clone();
        if let Some(m) = &c.ff_mask {
            dff *= m;
        }
        let dact = self.ff2.backward(c.ff_act.view(), dff.view(), &mut g.ff2);
        let dpre = Activation::Gelu.backward(&c.ff_pre, dact.view());
        let dln2 = self.ff1.backward(c.ln2.out.view(), dpre.view(), &mut g.ff1);
        let mut dmid = dy;
        dmid += &self.ln2.backward(&c.ln2, dln2.view(), &mut g.ln2);

        // x_mid = x + out(attention(ln1(x))) * mask
        let mut dattn = dmid.clone();
        if let Some(m) = &c.attn_mask {
            dattn *= m;
        }
        let dconcat = self.out.backward(c.attn.view(), dattn.view(), &mut g.out);
        let d = c.q.ncols();
        let dh = d / heads;
        let scale = T::of(1.0 / (dh as f64).sqrt());
        let mut dq = Array2::zeros(c.q.raw_dim());
        let mut dk = Array2::zeros(c.k.raw_dim());
        let mut dv = Array2::zeros(c.v.raw_dim());
        for (h, p) in c.probs.iter().enumerate() {
            let cols = s![.., h * dh..(h + 1) * dh];
            let dout = dconcat.slice(cols);
            let dp = dout.dot(&c.v.slice(cols).t());
            dv.slice_mut(cols).assign(&p.t().dot(&dout));
            // softmax backward: dS = P * (dP - rowsum(dP * P))
            let mut ds = dp;
            for (mut drow, prow) in ds.rows_mut().into_iter().zip(p.rows()) {
                let dot = drow.dot(&prow);
                drow.zip_mut_with(&prow, |dv, &pv| *dv = pv * (*dv - dot));
            }
            ds *= scale;
            dq.slice_mut(cols).assign(&ds.dot(&c.k.slice(cols)));
            dk.slice_mut(cols).assign(&ds.t().dot(&c.q.slice(cols)));
        }
        let mut dln1 = self.query.backward(c.ln1.out.view(), dq.view(), &mut g.query);
        dln1 += &self.key.backward(c.ln1.out.view(), dk.view(), &mut g.key);
        dln1 += &self.value.backward(c.ln1.out.view(), dv.view(), &mut g.value);
        let mut dx = dmid;
        dx += &self.ln1.backward(&c.ln1, dln1.view(), &mut g.ln1);
        dx
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Array2<T>)>) {
        self.ln1.visit(&format!("{prefix}.ln1"), out);
        self.query.visit(&format!("{prefix}.attn.query"), out);
        self.key.visit(&format!("{prefix}.attn.key"), out);
        self.value.visit(&format!("{prefix}.attn.value"), out);
        self.out.visit(&format!("{prefix}.attn.out"), out);
        self.ln2.visit(&format!("{prefix}.ln2"), out);
        self.ff1.visit(&format!("{prefix}.ff1"), out);
        self.ff2.visit(&format!("{prefix}.ff2"), out);
    }

    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Array2<T>>) {
        self.ln1.visit_mut(out);
        self.query.visit_mut(out);
        self.key.visit_mut(out);
        self.value.visit_mut(out);
        self.out.visit_mut(out);
        self.ln2.visit_mut(out);
        self.ff1.visit_mut(out);
        self.ff2.visit_mut(out);
    }
}

fn dropout_mask<T: Scalar>(dim: ndarray::Ix2, rate: f64, rng: &mut Rng) -> Array2<T> {
    let keep = T::of(1.0 / (1.0 - rate));
    Array2::from_shape_simple_fn(dim, || {
        if rng.random::<f64>() < rate {
            T::zero()
        } else {
            keep
        }
    })
}

/// Encoder and projection head for one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalEncoder<T> {
    pub config: EncoderConfig,
    pub input_dim: usize,
    pub input: Linear<T>,
    pub blocks: Vec<Block<T>>,
    pub final_ln: LayerNorm<T>,
    pub head1: Linear<T>,
    pub head2: Linear<T>,
}

/// Intermediate values of a training forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    input: Array2<T>,
    blocks: Vec<BlockCache<T>>,
    final_ln: LayerNormCache<T>,
    head_pre: Array2<T>,
    head_act: Array2<T>,
    z: Array2<T>,
    norms: Array1<T>,
}

impl<T: Scalar> ForwardCache<T> {
    /// Adapted features.
    pub fn adapted(&self) -> &Array2<T> {
        &self.final_ln.out
    }
}

impl<T: Scalar> TemporalEncoder<T> {
    pub fn init(config: &EncoderConfig, input_dim: usize, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::Config("input dimension must be positive".into()));
        }
        if config.positional_placement == PositionalPlacement::Raw && !input_dim.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "raw positional placement needs an even input dimension, got {input_dim}"
            )));
        }
        let d = config.model_dim;
        let input = Linear::init(input_dim, d, true, rng);
        let blocks = (0..config.num_layers).map(|_| Block::init(config, rng)).collect();
        Ok(Self {
            config: config.clone(),
            input_dim,
            input,
            blocks,
            final_ln: LayerNorm::new(d, config.layer_norm_eps),
            head1: Linear::init(d, d, config.head_bias, rng),
            head2: Linear::init(d, d, config.head_bias, rng),
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            config: self.config.clone(),
            input_dim: self.input_dim,
            input: self.input.zeros_like(),
            blocks: self.blocks.iter().map(Block::zeros_like).collect(),
            final_ln: self.final_ln.zeros_like(),
            head1: self.head1.zeros_like(),
            head2: self.head2.zeros_like(),
        }
    }

    fn check_input(&self, raw: &ArrayView2<'_, T>, positions: &[f64]) -> Result<()> {
        if raw.nrows() == 0 {
            return Err(Error::Data("cannot encode an empty sequence".into()));
        }
        if raw.ncols() != self.input_dim {
            return Err(Error::Data(format!(
                "raw features have dimension {}, encoder expects {}",
                raw.ncols(),
                self.input_dim
            )));
        }
        if positions.len() != raw.nrows() {
            return Err(Error::Data(format!(
                "{} positions for {} frames",
                positions.len(),
                raw.nrows()
            )));
        }
        Ok(())
    }

    /// Full forward pass keeping intermediates for [`Self::backward`].
    /// `dropout` is ignored when the configured rate is zero.
    pub fn forward(
        &self,
        raw: ArrayView2<'_, T>,
        positions: &[f64],
        mut dropout: Option<&mut Rng>,
    ) -> Result<(Array2<T>, ForwardCache<T>)> {
        self.check_input(&raw, positions)?;
        let cfg = &self.config;
        let (input, mut x) = match cfg.positional_placement {
            PositionalPlacement::AfterInputProjection => {
                let pe = positional_encoding::<T>(positions, cfg.model_dim, cfg.positional_base)?;
                let input = raw.to_owned();
                let x = self.input.forward(input.view()) + pe;
                (input, x)
            }
            PositionalPlacement::Raw => {
                let pe = positional_encoding::<T>(positions, self.input_dim, cfg.positional_base)?;
                let input = &raw + &pe;
                let x = self.input.forward(input.view());
                (input, x)
            }
        };
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (layer, block) in self.blocks.iter().enumerate() {
            let drop = match dropout.as_deref_mut() {
                Some(r) if cfg.dropout > 0.0 => Some((cfg.dropout, r)),
                _ => None,
            };
            let (y, cache) = block.forward(x, cfg.num_heads, drop);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite activation after encoder layer {layer}")));
            }
            blocks.push(cache);
            x = y;
        }
        let final_ln = self.final_ln.forward(x.view());
        let head_pre = self.head1.forward(final_ln.out.view());
        let head_act = cfg.head_activation.forward(&head_pre);
        let z = self.head2.forward(head_act.view());
        let (q, norms) = layers::l2_normalize_rows(&z, NORM_EPS);
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite activation in projection head".into()));
        }
        let cache = ForwardCache {
            input,
            blocks,
            final_ln,
            head_pre,
            head_act,
            z,
            norms,
        };
        Ok((q, cache))
    }

    /// Adapted features `q~` for a sequence (inference, no dropout).
    pub fn encode(&self, raw: ArrayView2<'_, T>, positions: &[f64]) -> Result<Array2<T>> {
        let (_, cache) = self.forward(raw, positions, None)?;
        Ok(cache.final_ln.out)
    }

    /// Projection head followed by row-wise L2 normalization.
    pub fn project(&self, adapted: ArrayView2<'_, T>) -> Array2<T> {
        let pre = self.head1.forward(adapted);
        let act = self.config.head_activation.forward(&pre);
        let z = self.head2.forward(act.view());
        layers::l2_normalize_rows(&z, NORM_EPS).0
    }

    /// Backpropagates `dL/dq` (and optionally an extra `dL/dq~`) through the
    /// cached forward pass, accumulating into `grad`.
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        d_q: ArrayView2<'_, T>,
        d_adapted: Option<ArrayView2<'_, T>>,
        grad: &mut Self,
    ) {
        let dz = layers::l2_normalize_backward(&cache.z, &cache.norms, d_q, NORM_EPS);
        let dact = self.head2.backward(cache.head_act.view(), dz.view(), &mut grad.head2);
        let dpre = self.config.head_activation.backward(&cache.head_pre, dact.view());
        let mut dfinal = self.head1.backward(cache.final_ln.out.view(), dpre.view(), &mut grad.head1);
        if let Some(extra) = d_adapted {
            dfinal += &extra;
        }
        let mut dx = self.final_ln.backward(&cache.final_ln, dfinal.view(), &mut grad.final_ln);
        for ((block, c), g) in self
            .blocks
            .iter()
            .zip(&cache.blocks)
            .zip(grad.blocks.iter_mut())
            .rev()
        {
            dx = block.backward(c, dx, self.config.num_heads, g);
        }
        // positional encoding is constant; the input projection sees `cache.input`
        let _ = self.input.backward(cache.input.view(), dx.view(), &mut grad.input);
    }

    /// Named parameter tensors in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &Array2<T>)> {
        let mut out = Vec::new();
        self.input.visit("input", &mut out);
        for (i, b) in self.blocks.iter().enumerate() {
            b.visit(&format!("layer{i}"), &mut out);
        }
        self.final_ln.visit("final_ln", &mut out);
        self.head1.visit("head1", &mut out);
        self.head2.visit("head2", &mut out);
        out
    }

    /// Mutable parameter tensors, same order as [`Self::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<T>> {
        let mut out = Vec::new();
        self.input.visit_mut(&mut out);
        for b in &mut self.blocks {
            b.visit_mut(&mut out);
        }
        self.final_ln.visit_mut(&mut out);
        self.head1.visit_mut(&mut out);
        self.head2.visit_mut(&mut out);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Encoders for all training modalities.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams<T> {
    pub config: EncoderConfig,
    pub modalities: Vec<String>,
    pub encoders: Vec<TemporalEncoder<T>>,
}

impl<T: Scalar> EncoderParams<T> {
    /// `modalities` lists `(name, raw dimension)` in training order.
    pub fn init(config: &EncoderConfig, modalities: &[(String, usize)], seed: u64) -> Result<Self> {
        let encoders = modalities
            .iter()
            .enumerate()
            .map(|(i, (_, dim))| TemporalEncoder::init(config, *dim, &mut rng::rng(seed, &[2, i as u64])))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: config.clone(),
            modalities: modalities.iter().map(|(n, _)| n.clone()).collect(),
            encoders,
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            config: self.config.clone(),
            modalities: self.modalities.clone(),
            encoders: self.encoders.iter().map(TemporalEncoder::zeros_like).collect(),
        }
    }

    pub fn encoder(&self, modality: &str) -> Result<&TemporalEncoder<T>> {
        self.modalities
            .iter()
            .position(|m| m == modality)
            .map(|i| &self.encoders[i])
            .ok_or_else(|| Error::Data(format!("model has no encoder for modality {modality}")))
    }

    pub fn tensors(&self) -> Vec<(String, &Array2<T>)> {
        self.modalities
            .iter()
            .zip(&self.encoders)
            .flat_map(|(m, e)| e.tensors().into_iter().map(move |(n, t)| (format!("{m}.{n}"), t)))
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<T>> {
        self.encoders.iter_mut().flat_map(|e| e.tensors_mut()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.encoders.iter().map(TemporalEncoder::parameter_count).sum()
    }

    /// Flattens all parameters into one vector (order of [`Self::tensors`]).
    pub fn to_flat(&self) -> Vec<T> {
        self.tensors().into_iter().flat_map(|(_, t)| t.iter().copied().collect::<Vec<_>>()).collect()
    }

    pub fn set_flat(&mut self, flat: &[T]) {
        let mut it = flat.iter();
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v = *it.next().expect("flat parameter vector too short");
            }
        }
        assert!(it.next().is_none(), "flat parameter vector too long");
    }

    /// Adapted features of a whole video for the named modalities,
    /// concatenated along the feature axis in the given order.
    pub fn encode_record(&self, record: &VideoRecord, modalities: &[String]) -> Result<Array2<T>> {
        if modalities.is_empty() {
            return Err(Error::Config("no inference modalities selected".into()));
        }
        let positions = positions_from_timestamps(record.timestamps(), record.fps());
        let parts = modalities
            .iter()
            .map(|m| {
                let raw = record.modality(m)?.data().mapv(|v| T::of(f64::from(v)));
                self.encoder(m)?.encode(raw.view(), &positions)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(concat_features(&parts))
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<U: Scalar>(&self) -> EncoderParams<U> {
        let mut out = EncoderParams::<U> {
            config: self.config.clone(),
            modalities: self.modalities.clone(),
            encoders: self
                .encoders
                .iter()
                .map(|e| {
                    TemporalEncoder::<U>::init(&e.config, e.input_dim, &mut rng::rng(0, &[]))
                        .expect("config already validated")
                })
                .collect(),
        };
        let flat: Vec<U> = self.to_flat().into_iter().map(|v| U::of(v.as_f64())).collect();
        out.set_flat(&flat);
        out
    }
}

/// Concatenates per-modality adapted features column-wise.
pub fn concat_features<T: Scalar>(parts: &[Array2<T>]) -> Array2<T> {
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    ndarray::concatenate(Axis(1), &views).expect("row counts agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tiny() -> EncoderConfig {
        EncoderConfig {
            model_dim: 8,
            mlp_hidden: 12,
            ..Default::default()
        }
    }

    #[test]
    fn pe_position_zero() {
        let pe = positional_encoding::<f64>(&[0.0], 6, 10_000.0).unwrap();
        assert_eq!(pe.row(0).to_vec(), vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn pe_hand_evaluated() {
        let pe = positional_encoding::<f64>(&[1.0], 4, 10_000.0).unwrap();
        let expected = [1f64.sin(), 1f64.cos(), 0.01f64.sin(), 0.01f64.cos()];
        for (a, b) in pe.row(0).iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn pe_identical_positions_give_identical_rows() {
        let pe = positional_encoding::<f32>(&[3.5, 3.5], 8, 10_000.0).unwrap();
        assert_eq!(pe.row(0), pe.row(1));
    }

    #[test]
    fn pe_rejects_odd_dim() {
        assert!(matches!(positional_encoding::<f64>(&[0.0], 5, 1e4), Err(Error::Config(_))));
    }

    #[test]
    fn single_frame_shape() {
        let enc = TemporalEncoder::<f64>::init(&tiny(), 5, &mut rng::rng(1, &[])).unwrap();
        let raw = Array2::from_elem((1, 5), 0.3);
        let out = enc.encode(raw.view(), &[0.0]).unwrap();
        assert_eq!(out.dim(), (1, 8));
    }

    #[test]
    fn rejects_heads_not_dividing_dim() {
        let cfg = EncoderConfig {
            model_dim: 10,
            num_heads: 3,
            ..tiny()
        };
        assert!(TemporalEncoder::<f64>::init(&cfg, 4, &mut rng::rng(0, &[])).is_err());
    }

    #[test]
    fn default_parameter_budget() {
        let cfg = EncoderConfig::default();
        let enc = TemporalEncoder::<f32>::init(&cfg, 2048, &mut rng::rng(0, &[])).unwrap();
        assert!(enc.parameter_count() < 2_500_000, "{}", enc.parameter_count());
    }

    #[test]
    fn cast_round_trip() {
        let p = EncoderParams::<f64>::init(&tiny(), &[("a".into(), 4)], 3).unwrap();
        let back: EncoderParams<f64> = p.cast::<f32>().cast();
        for (a, b) in p.to_flat().iter().zip(back.to_flat()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
