//! Neural layers built on iterates of `exp`.
//!
//! Gradients follow one convention throughout. For a real loss `L` and a
//! complex quantity `z`, the gradient is `g_z = dL/dRe z + i dL/dIm z`.
//! A holomorphic map `y = f(z)` propagates it as `g_z = g_y conj(f'(z))`, a
//! real parameter `p` receives `Re(g_y conj(dy/dp))`, and the real and
//! imaginary parts of a complex weight `w` receive `Re g_w` and `Im g_w`.

mod gradcheck;
mod matrix;
mod train;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::backend::{Backend, ExpIterate, IterateEval};
use crate::error::{Error, Result};
use crate::schroeder::Branch;

pub use gradcheck::{grad_check, grad_check_with, GradCheckEntry, GradCheckReport, GRAD_CHECK_TOLERANCE};
pub use matrix::CMatrix;
pub use train::{loss_gradient, sample_loss, sgd_train, EpochLoss, LossTrace, Network, Sample, TrainConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transfer {
    #[default]
    Identity,
    /// `1 / (1 + exp(-t))` through the complex exponential, unclipped.
    Logistic,
}

impl Transfer {
    pub fn apply(self, t: Complex64) -> Complex64 {
        match self {
            Transfer::Identity => t,
            Transfer::Logistic => ONE / (ONE + (-t).exp()),
        }
    }

    pub fn derivative(self, t: Complex64) -> Complex64 {
        match self {
            Transfer::Identity => ONE,
            Transfer::Logistic => {
                let s = self.apply(t);
                s * (ONE - s)
            }
        }
    }
}

/// `exp^(n_tilde)(sigma(exp^(n_hat)(t)))`.
pub fn parameterized_transfer(t: Complex64, n_hat: f64, n_tilde: f64, sigma: Transfer, backend: &Backend) -> Result<Complex64> {
    let inner = backend.iterate(t, n_hat)?;
    backend.iterate(sigma.apply(inner), n_tilde)
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn check_weights(w: &CMatrix) -> Result<()> {
    if w.rows() == 0 || w.cols() == 0 {
        return Err(Error::InvalidConfig("layer weights must be at least 1x1".into()));
    }
    if !w.is_finite() {
        return Err(Error::InvalidConfig("layer weights must be finite".into()));
    }
    Ok(())
}

fn check_orders(name: &str, n: &[f64], len: usize) -> Result<()> {
    if n.len() != len {
        return Err(Error::InvalidConfig(format!("{name} has length {}, expected {len}", n.len())));
    }
    if n.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(format!("{name} must be finite")));
    }
    Ok(())
}

/// `y = sigma(W x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveLayer {
    pub weights: CMatrix,
    #[serde(default)]
    pub sigma: Transfer,
}

/// `y = exp(W log x)` with the complex logarithm on a chosen branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductLayer {
    pub weights: CMatrix,
    #[serde(default)]
    pub branch: Branch,
}

/// `y_i = sigma(exp^(n_i)(sum_j W_ij exp^(-n_i)(x_j)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddiplicationLayer {
    pub weights: CMatrix,
    pub n: Vec<f64>,
    #[serde(default)]
    pub sigma: Transfer,
    #[serde(default)]
    pub backend: Backend,
    /// Excludes `n` from the trainable parameters.
    #[serde(default)]
    pub freeze_n: bool,
}

/// `y_i = sigma(exp^(n_hat_i)(sum_j W_ij exp^(n_tilde_j)(x_j)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIterateLayer {
    pub weights: CMatrix,
    pub n_hat: Vec<f64>,
    pub n_tilde: Vec<f64>,
    #[serde(default)]
    pub sigma: Transfer,
    #[serde(default)]
    pub backend: Backend,
    /// Excludes `n_hat` and `n_tilde` from the trainable parameters.
    #[serde(default)]
    pub freeze_n: bool,
}

impl AdditiveLayer {
    pub fn new(weights: CMatrix, sigma: Transfer) -> Result<Self> {
        check_weights(&weights)?;
        Ok(AdditiveLayer { weights, sigma })
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.weights.mul_vec(x)?.into_iter().map(|t| self.sigma.apply(t)).collect())
    }

    fn forward_cached(&self, x: &[Complex64]) -> Result<(Vec<Complex64>, CacheKind)> {
        let pre = self.weights.mul_vec(x)?;
        let y = pre.iter().map(|&t| self.sigma.apply(t)).collect();
        Ok((y, CacheKind::Additive { x: x.to_vec(), pre }))
    }
}

impl ProductLayer {
    pub fn new(weights: CMatrix) -> Result<Self> {
        check_weights(&weights)?;
        Ok(ProductLayer { weights, branch: Branch::default() })
    }

    fn logs(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.weights.cols(), x.len())?;
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                if v == ZERO {
                    Err(Error::Domain(format!("product unit input {j} is zero")))
                } else {
                    self.branch.log(v)
                }
            })
            .collect()
    }

    fn exp_row(t: Complex64, i: usize) -> Result<Complex64> {
        const GUARD: f64 = 700.0;
        if t.re > GUARD {
            return Err(Error::Overflow { argument: t.re, guard: GUARD }.at_neuron(i));
        }
        Ok(t.exp())
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.forward_cached(x)?.0)
    }

    fn forward_cached(&self, x: &[Complex64]) -> Result<(Vec<Complex64>, CacheKind)> {
        let logs = self.logs(x)?;
        let t = self.weights.mul_vec(&logs)?;
        let y = t.iter().enumerate().map(|(i, &t)| Self::exp_row(t, i)).collect::<Result<Vec<_>>>()?;
        Ok((y.clone(), CacheKind::Product { x: x.to_vec(), logs, y }))
    }

    /// `prod_j x_j^W_ij` by repeated multiplication. Needs non-negative
    /// integer weights; exact and defined for zero inputs.
    pub fn forward_power_product(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.weights.cols(), x.len())?;
        (0..self.weights.rows())
            .map(|i| {
                let mut acc = ONE;
                for (j, w) in self.weights.row(i).iter().enumerate() {
                    if w.im != 0.0 || w.re < 0.0 || w.re.fract() != 0.0 || w.re > i32::MAX as f64 {
                        return Err(Error::InvalidConfig(format!("weight ({i},{j}) = {w} is not a non-negative integer")));
                    }
                    acc *= x[j].powi(w.re as i32);
                }
                Ok(acc)
            })
            .collect()
    }
}

impl AddiplicationLayer {
    pub fn new(weights: CMatrix, n: Vec<f64>, sigma: Transfer, backend: Backend) -> Result<Self> {
        let layer = AddiplicationLayer { weights, n, sigma, backend, freeze_n: false };
        layer.validate()?;
        Ok(layer)
    }

    pub fn validate(&self) -> Result<()> {
        check_weights(&self.weights)?;
        check_orders("n", &self.n, self.weights.rows())
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.forward_with(x, &self.backend)?.0)
    }

    /// Forward pass through an arbitrary iterate evaluator.
    pub fn forward_with<E: ExpIterate + ?Sized>(&self, x: &[Complex64], eval: &E) -> Result<(Vec<Complex64>, LayerCache)> {
        let (y, kind) = self.forward_impl(x, eval)?;
        Ok((y, LayerCache(kind)))
    }

    fn forward_impl<E: ExpIterate + ?Sized>(&self, x: &[Complex64], eval: &E) -> Result<(Vec<Complex64>, CacheKind)> {
        check_dim(self.weights.cols(), x.len())?;
        let rows = self.weights.rows();
        let mut inner = Vec::with_capacity(rows * x.len());
        let mut outer = Vec::with_capacity(rows);
        let mut y = Vec::with_capacity(rows);
        for i in 0..rows {
            let n = self.n[i];
            let neuron = || -> Result<(Vec<IterateEval>, IterateEval)> {
                let row_inner = x.iter().map(|&v| eval.iterate_with_grads(v, -n)).collect::<Result<Vec<_>>>()?;
                let s = self.weights.row(i).iter().zip(&row_inner).fold(ZERO, |acc, (w, e)| acc + w * e.value);
                Ok((row_inner, eval.iterate_with_grads(s, n)?))
            };
            let (row_inner, o) = neuron().map_err(|e| e.at_neuron(i))?;
            inner.extend(row_inner);
            y.push(self.sigma.apply(o.value));
            outer.push(o);
        }
        Ok((y, CacheKind::Addiplication { inner, outer }))
    }
}

impl SplitIterateLayer {
    pub fn new(weights: CMatrix, n_hat: Vec<f64>, n_tilde: Vec<f64>, sigma: Transfer, backend: Backend) -> Result<Self> {
        let layer = SplitIterateLayer { weights, n_hat, n_tilde, sigma, backend, freeze_n: false };
        layer.validate()?;
        Ok(layer)
    }

    pub fn validate(&self) -> Result<()> {
        check_weights(&self.weights)?;
        check_orders("n_hat", &self.n_hat, self.weights.rows())?;
        check_orders("n_tilde", &self.n_tilde, self.weights.cols())
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.forward_with(x, &self.backend)?.0)
    }

    pub fn forward_with<E: ExpIterate + ?Sized>(&self, x: &[Complex64], eval: &E) -> Result<(Vec<Complex64>, LayerCache)> {
        let (y, kind) = self.forward_impl(x, eval)?;
        Ok((y, LayerCache(kind)))
    }

    fn forward_impl<E: ExpIterate + ?Sized>(&self, x: &[Complex64], eval: &E) -> Result<(Vec<Complex64>, CacheKind)> {
        check_dim(self.weights.cols(), x.len())?;
        let inner = x
            .iter()
            .zip(&self.n_tilde)
            .enumerate()
            .map(|(j, (&v, &n))| eval.iterate_with_grads(v, n).map_err(|e| e.at_neuron(j)))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<Complex64> = inner.iter().map(|e| e.value).collect();
        let sums = self.weights.mul_vec(&values)?;
        let mut outer = Vec::with_capacity(sums.len());
        let mut y = Vec::with_capacity(sums.len());
        for (i, (&s, &n)) in sums.iter().zip(&self.n_hat).enumerate() {
            let o = eval.iterate_with_grads(s, n).map_err(|e| e.at_neuron(i))?;
            y.push(self.sigma.apply(o.value));
            outer.push(o);
        }
        Ok((y, CacheKind::Split { inner, outer }))
    }
}

/// Intermediate values kept by a forward pass for the matching backward pass.
#[derive(Debug, Clone)]
pub struct LayerCache(CacheKind);

#[derive(Debug, Clone)]
enum CacheKind {
    Additive { x: Vec<Complex64>, pre: Vec<Complex64> },
    Product { x: Vec<Complex64>, logs: Vec<Complex64>, y: Vec<Complex64> },
    /// `inner` is row-major: one entry per (output, input) pair.
    Addiplication { inner: Vec<IterateEval>, outer: Vec<IterateEval> },
    Split { inner: Vec<IterateEval>, outer: Vec<IterateEval> },
}

/// A trainable real scalar of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamId {
    WeightRe(usize, usize),
    WeightIm(usize, usize),
    N(usize),
    NHat(usize),
    NTilde(usize),
}

impl ParamId {
    /// Parameter family, used to summarise gradient checks.
    pub fn group(&self) -> &'static str {
        match self {
            ParamId::WeightRe(..) | ParamId::WeightIm(..) => "W",
            ParamId::N(_) => "n",
            ParamId::NHat(_) => "n_hat",
            ParamId::NTilde(_) => "n_tilde",
        }
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamId::WeightRe(i, j) => write!(f, "W[{i}][{j}].re"),
            ParamId::WeightIm(i, j) => write!(f, "W[{i}][{j}].im"),
            ParamId::N(i) => write!(f, "n[{i}]"),
            ParamId::NHat(i) => write!(f, "n_hat[{i}]"),
            ParamId::NTilde(j) => write!(f, "n_tilde[{j}]"),
        }
    }
}

/// Gradients of a real loss with respect to a layer's parameters and input.
/// Entries for absent parameter families are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: CMatrix,
    pub n: Vec<f64>,
    pub n_hat: Vec<f64>,
    pub n_tilde: Vec<f64>,
    pub input: Vec<Complex64>,
}

impl LayerGrads {
    pub fn get(&self, id: ParamId) -> f64 {
        match id {
            ParamId::WeightRe(i, j) => self.weights.get(i, j).re,
            ParamId::WeightIm(i, j) => self.weights.get(i, j).im,
            ParamId::N(i) => self.n[i],
            ParamId::NHat(i) => self.n_hat[i],
            ParamId::NTilde(j) => self.n_tilde[j],
        }
    }

    pub fn set(&mut self, id: ParamId, v: f64) {
        match id {
            ParamId::WeightRe(i, j) => self.weights.get_mut(i, j).re = v,
            ParamId::WeightIm(i, j) => self.weights.get_mut(i, j).im = v,
            ParamId::N(i) => self.n[i] = v,
            ParamId::NHat(i) => self.n_hat[i] = v,
            ParamId::NTilde(j) => self.n_tilde[j] = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    Additive(AdditiveLayer),
    Product(ProductLayer),
    Addiplication(AddiplicationLayer),
    Split(SplitIterateLayer),
}

fn singular_dn(i: usize) -> Error {
    Error::SingularDerivative("no derivative in the iterate order at an integer order on the singular set".into()).at_neuron(i)
}

fn transfer_grads(sigma: Transfer, pre: &[Complex64], upstream: &[Complex64]) -> Vec<Complex64> {
    pre.iter().zip(upstream).map(|(&t, &g)| g * sigma.derivative(t).conj()).collect()
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Additive(_) => "additive",
            Layer::Product(_) => "product",
            Layer::Addiplication(_) => "addiplication",
            Layer::Split(_) => "split",
        }
    }

    pub fn weights(&self) -> &CMatrix {
        match self {
            Layer::Additive(l) => &l.weights,
            Layer::Product(l) => &l.weights,
            Layer::Addiplication(l) => &l.weights,
            Layer::Split(l) => &l.weights,
        }
    }

    fn weights_mut(&mut self) -> &mut CMatrix {
        match self {
            Layer::Additive(l) => &mut l.weights,
            Layer::Product(l) => &mut l.weights,
            Layer::Addiplication(l) => &mut l.weights,
            Layer::Split(l) => &mut l.weights,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights().cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights().rows()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Layer::Additive(l) => check_weights(&l.weights),
            Layer::Product(l) => check_weights(&l.weights),
            Layer::Addiplication(l) => l.validate(),
            Layer::Split(l) => l.validate(),
        }
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.forward_cached(x)?.0)
    }

    pub fn forward_cached(&self, x: &[Complex64]) -> Result<(Vec<Complex64>, LayerCache)> {
        let (y, kind) = match self {
            Layer::Additive(l) => l.forward_cached(x)?,
            Layer::Product(l) => l.forward_cached(x)?,
            Layer::Addiplication(l) => l.forward_impl(x, &l.backend)?,
            Layer::Split(l) => l.forward_impl(x, &l.backend)?,
        };
        Ok((y, LayerCache(kind)))
    }

    /// Real-valued backends cannot take complex weights, so the imaginary
    /// parts are not trainable there.
    fn complex_weights(&self) -> bool {
        match self {
            Layer::Addiplication(l) => !l.backend.is_real(),
            Layer::Split(l) => !l.backend.is_real(),
            _ => true,
        }
    }

    /// All trainable scalars, weights first.
    pub fn param_ids(&self) -> Vec<ParamId> {
        let w = self.weights();
        let mut ids = Vec::new();
        for i in 0..w.rows() {
            for j in 0..w.cols() {
                ids.push(ParamId::WeightRe(i, j));
                if self.complex_weights() {
                    ids.push(ParamId::WeightIm(i, j));
                }
            }
        }
        match self {
            Layer::Addiplication(l) if !l.freeze_n => ids.extend((0..l.n.len()).map(ParamId::N)),
            Layer::Split(l) if !l.freeze_n => {
                ids.extend((0..l.n_hat.len()).map(ParamId::NHat));
                ids.extend((0..l.n_tilde.len()).map(ParamId::NTilde));
            }
            _ => {}
        }
        ids
    }

    pub fn param(&self, id: ParamId) -> Result<f64> {
        let missing = || Error::InvalidConfig(format!("{} layer has no parameter {id}", self.kind()));
        let w = self.weights();
        Ok(match (self, id) {
            (_, ParamId::WeightRe(i, j)) if i < w.rows() && j < w.cols() => w.get(i, j).re,
            (_, ParamId::WeightIm(i, j)) if i < w.rows() && j < w.cols() => w.get(i, j).im,
            (Layer::Addiplication(l), ParamId::N(i)) => *l.n.get(i).ok_or_else(missing)?,
            (Layer::Split(l), ParamId::NHat(i)) => *l.n_hat.get(i).ok_or_else(missing)?,
            (Layer::Split(l), ParamId::NTilde(j)) => *l.n_tilde.get(j).ok_or_else(missing)?,
            _ => return Err(missing()),
        })
    }

    pub fn set_param(&mut self, id: ParamId, v: f64) -> Result<()> {
        self.param(id)?;
        match (self, id) {
            (l, ParamId::WeightRe(i, j)) => l.weights_mut().get_mut(i, j).re = v,
            (l, ParamId::WeightIm(i, j)) => l.weights_mut().get_mut(i, j).im = v,
            (Layer::Addiplication(l), ParamId::N(i)) => l.n[i] = v,
            (Layer::Split(l), ParamId::NHat(i)) => l.n_hat[i] = v,
            (Layer::Split(l), ParamId::NTilde(j)) => l.n_tilde[j] = v,
            _ => unreachable!("checked by param"),
        }
        Ok(())
    }

    /// Gradients of the loss given `upstream = g_y`, the loss gradient with
    /// respect to this layer's output.
    pub fn backward(&self, cache: &LayerCache, upstream: &[Complex64]) -> Result<LayerGrads> {
        check_dim(self.out_dim(), upstream.len())?;
        let (rows, cols) = (self.out_dim(), self.in_dim());
        let mut g = LayerGrads { weights: CMatrix::zeros(rows, cols), n: vec![], n_hat: vec![], n_tilde: vec![], input: vec![ZERO; cols] };
        let mismatch = || Error::InvalidConfig(format!("cache does not belong to a {} layer", self.kind()));
        match (self, &cache.0) {
            (Layer::Additive(l), CacheKind::Additive { x, pre }) => {
                let g_pre = transfer_grads(l.sigma, pre, upstream);
                for (i, &gp) in g_pre.iter().enumerate() {
                    for (j, &xj) in x.iter().enumerate() {
                        g.weights.set(i, j, gp * xj.conj());
                        g.input[j] += gp * l.weights.get(i, j).conj();
                    }
                }
            }
            (Layer::Product(l), CacheKind::Product { x, logs, y }) => {
                for i in 0..rows {
                    let g_t = upstream[i] * y[i].conj();
                    for j in 0..cols {
                        g.weights.set(i, j, g_t * logs[j].conj());
                        g.input[j] += g_t * (l.weights.get(i, j) / x[j]).conj();
                    }
                }
            }
            (Layer::Addiplication(l), CacheKind::Addiplication { inner, outer, .. }) => {
                let pre: Vec<Complex64> = outer.iter().map(|o| o.value).collect();
                let g_o = transfer_grads(l.sigma, &pre, upstream);
                g.n = vec![0.0; rows];
                for i in 0..rows {
                    let g_s = g_o[i] * outer[i].d_dz.conj();
                    let mut d_n = 0.0;
                    if !l.freeze_n {
                        d_n += (g_o[i] * outer[i].d_dn.ok_or_else(|| singular_dn(i))?.conj()).re;
                    }
                    for j in 0..cols {
                        let e = &inner[i * cols + j];
                        let w = l.weights.get(i, j);
                        g.weights.set(i, j, g_s * e.value.conj());
                        g.input[j] += g_s * (w * e.d_dz).conj();
                        if !l.freeze_n {
                            // inner order is -n
                            d_n -= (g_s * (w * e.d_dn.ok_or_else(|| singular_dn(i))?).conj()).re;
                        }
                    }
                    g.n[i] = d_n;
                }
            }
            (Layer::Split(l), CacheKind::Split { inner, outer, .. }) => {
                let pre: Vec<Complex64> = outer.iter().map(|o| o.value).collect();
                let g_o = transfer_grads(l.sigma, &pre, upstream);
                g.n_hat = vec![0.0; rows];
                g.n_tilde = vec![0.0; cols];
                let mut g_inner = vec![ZERO; cols];
                for i in 0..rows {
                    let g_s = g_o[i] * outer[i].d_dz.conj();
                    if !l.freeze_n {
                        g.n_hat[i] = (g_o[i] * outer[i].d_dn.ok_or_else(|| singular_dn(i))?.conj()).re;
                    }
                    for j in 0..cols {
                        g.weights.set(i, j, g_s * inner[j].value.conj());
                        g_inner[j] += g_s * l.weights.get(i, j).conj();
                    }
                }
                for j in 0..cols {
                    g.input[j] = g_inner[j] * inner[j].d_dz.conj();
                    if !l.freeze_n {
                        let d_dn = inner[j].d_dn.ok_or_else(|| {
                            Error::SingularDerivative(format!("input {j}: no derivative in the iterate order on the singular set"))
                        })?;
                        g.n_tilde[j] = (g_inner[j] * d_dn.conj()).re;
                    }
                }
            }
            _ => return Err(mismatch()),
        }
        if !self.complex_weights() {
            for i in 0..rows {
                for j in 0..cols {
                    g.weights.get_mut(i, j).im = 0.0;
                }
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests;
