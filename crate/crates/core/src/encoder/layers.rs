//! Differentiable building blocks with explicit forward caches and backward
//! passes. Matrices are row-per-frame; biases and normalization parameters are
//! stored as `1 x n` rows so every parameter is an `Array2`.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    /// `in x out`
    pub weight: Array2<T>,
    /// `1 x out`
    pub bias: Option<Array2<T>>,
}

impl<T: Scalar> Linear<T> {
    /// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, zero bias.
    pub fn init(fan_in: usize, fan_out: usize, bias: bool, rng: &mut Rng) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let weight = Array2::from_shape_simple_fn((fan_in, fan_out), || {
            T::of(rng.random_range(-bound..=bound))
        });
        Self {
            weight,
            bias: bias.then(|| Array2::zeros((1, fan_out))),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weight: Array2::zeros(self.weight.raw_dim()),
            bias: self.bias.as_ref().map(|b| Array2::zeros(b.raw_dim())),
        }
    }

    pub fn forward(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let mut y = x.dot(&self.weight);
        if let Some(b) = &self.bias {
            y += b;
        }
        y
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    pub fn backward(&self, x: ArrayView2<'_, T>, dy: ArrayView2<'_, T>, grad: &mut Self) -> Array2<T> {
        grad.weight += &x.t().dot(&dy);
        if let Some(gb) = &mut grad.bias {
            *gb += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
        }
        dy.dot(&self.weight.t())
    }

    pub(crate) fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Array2<T>)>) {
        out.push((format!("{prefix}.weight"), &self.weight));
        if let Some(b) = &self.bias {
            out.push((format!("{prefix}.bias"), b));
        }
    }

    pub(crate) fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Array2<T>>) {
        out.push(&mut self.weight);
        if let Some(b) = &mut self.bias {
            out.push(b);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm<T> {
    pub gamma: Array2<T>,
    pub beta: Array2<T>,
    pub eps: f64,
}

#[derive(Debug, Clone)]
pub struct LayerNormCache<T> {
    pub xhat: Array2<T>,
    pub inv_std: Array1<T>,
    pub out: Array2<T>,
}

impl<T: Scalar> LayerNorm<T> {
    pub fn new(dim: usize, eps: f64) -> Self {
        Self {
            gamma: Array2::ones((1, dim)),
            beta: Array2::zeros((1, dim)),
            eps,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            gamma: Array2::zeros(self.gamma.raw_dim()),
            beta: Array2::zeros(self.beta.raw_dim()),
            eps: self.eps,
        }
    }

    pub fn forward(&self, x: ArrayView2<'_, T>) -> LayerNormCache<T> {
        let n = T::of(x.ncols() as f64);
        let eps = T::of(self.eps);
        let mut xhat = x.to_owned();
        let mut inv_std = Array1::zeros(x.nrows());
        for (mut row, s) in xhat.rows_mut().into_iter().zip(inv_std.iter_mut()) {
            let mean = row.sum() / n;
            row.mapv_inplace(|v| v - mean);
            let var = row.iter().map(|&v| v * v).sum::<T>() / n;
            let inv = T::one() / (var + eps).sqrt();
            row.mapv_inplace(|v| v * inv);
            *s = inv;
        }
        let out = &xhat * &self.gamma + &self.beta;
        LayerNormCache { xhat, inv_std, out }
    }

    pub fn backward(&self, cache: &LayerNormCache<T>, dy: ArrayView2<'_, T>, grad: &mut Self) -> Array2<T> {
        grad.gamma += &(&dy * &cache.xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
        grad.beta += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
        let n = T::of(dy.ncols() as f64);
        let mut dx = &dy * &self.gamma;
        Zip::from(dx.rows_mut())
            .and(cache.xhat.rows())
            .and(&cache.inv_std)
            .for_each(|mut d, xh, &inv| {
                let mean_d = d.sum() / n;
                let mean_dx = d.iter().zip(xh.iter()).map(|(&a, &b)| a * b).sum::<T>() / n;
                Zip::from(&mut d).and(&xh).for_each(|dv, &x| {
                    *dv = inv * (*dv - mean_d - x * mean_dx);
                });
            });
        dx
    }

    pub(crate) fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Array2<T>)>) {
        out.push((format!("{prefix}.gamma"), &self.gamma));
        out.push((format!("{prefix}.beta"), &self.beta));
    }

    pub(crate) fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Array2<T>>) {
        out.push(&mut self.gamma);
        out.push(&mut self.beta);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// tanh approximation
    #[default]
    Gelu,
    Relu,
    Identity,
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const GELU_A: f64 = 0.044_715;

impl Activation {
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Gelu => {
                let half = T::of(0.5);
                let u = T::of(GELU_C) * (x + T::of(GELU_A) * x * x * x);
                half * x * (T::one() + u.tanh())
            }
            Activation::Relu => x.max(T::zero()),
            Activation::Identity => x,
        }
    }

    pub fn derivative<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Gelu => {
                let half = T::of(0.5);
                let c = T::of(GELU_C);
                let a = T::of(GELU_A);
                let th = (c * (x + a * x * x * x)).tanh();
                half * (T::one() + th)
                    + half * x * (T::one() - th * th) * c * (T::one() + T::of(3.0) * a * x * x)
            }
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Identity => T::one(),
        }
    }

    pub fn forward<T: Scalar>(self, x: &Array2<T>) -> Array2<T> {
        x.mapv(|v| self.apply(v))
    }

    /// `dL/dx` given the pre-activation `x` and `dL/dy`.
    pub fn backward<T: Scalar>(self, x: &Array2<T>, dy: ArrayView2<'_, T>) -> Array2<T> {
        let mut dx = dy.to_owned();
        Zip::from(&mut dx).and(x).for_each(|d, &v| *d *= self.derivative(v));
        dx
    }
}

/// Row-wise softmax in place.
pub fn softmax_rows<T: Scalar>(x: &mut Array2<T>) {
    for mut row in x.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

/// Row-wise L2 normalization `z / (|z| + eps)`; returns the output and the
/// row norms.
pub fn l2_normalize_rows<T: Scalar>(z: &Array2<T>, eps: f64) -> (Array2<T>, Array1<T>) {
    let eps = T::of(eps);
    let norms: Array1<T> = z.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    let mut q = z.clone();
    for (mut row, &n) in q.rows_mut().into_iter().zip(&norms) {
        let s = n + eps;
        row.mapv_inplace(|v| v / s);
    }
    (q, norms)
}

pub fn l2_normalize_backward<T: Scalar>(
    z: &Array2<T>,
    norms: &Array1<T>,
    dq: ArrayView2<'_, T>,
    eps: f64,
) -> Array2<T> {
    let eps = T::of(eps);
    let mut dz = dq.to_owned();
    Zip::from(dz.rows_mut())
        .and(z.rows())
        .and(norms)
        .for_each(|mut d, zr, &n| {
            let s = n + eps;
            let proj = if n > T::zero() {
                d.dot(&zr) / (n * s * s)
            } else {
                T::zero()
            };
            Zip::from(&mut d).and(&zr).for_each(|dv, &zv| *dv = *dv / s - zv * proj);
        });
    dz
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activation_derivatives_match_differences() {
        for act in [Activation::Gelu, Activation::Relu, Activation::Identity] {
            for &x in &[-2.3f64, -0.7, 0.4, 1.9] {
                let h = 1e-6;
                let fd = (act.apply(x + h) - act.apply(x - h)) / (2.0 * h);
                assert!((fd - act.derivative(x)).abs() < 1e-7, "{act:?} at {x}");
            }
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut x = ndarray::array![[1.0f64, 2.0, 3.0], [1000.0, 1000.0, -1000.0]];
        softmax_rows(&mut x);
        for r in x.rows() {
            assert!((r.sum() - 1.0).abs() < 1e-12);
        }
        assert!((x[[1, 0]] - 0.5).abs() < 1e-12);
    }
}
