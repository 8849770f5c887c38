use std::io::{self, Write};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Layer, LayerCache, LayerGrads, ParamId};
use crate::error::{Error, Result};
use crate::export::fmt_f64;

/// A feed-forward stack of layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct Network {
    layers: Vec<Layer>,
}

#[derive(Deserialize)]
struct RawNetwork {
    layers: Vec<Layer>,
}

impl TryFrom<RawNetwork> for Network {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        Network::new(raw.layers)
    }
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for l in &layers {
            l.validate()?;
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::DimensionMismatch { expected: pair[1].in_dim(), got: pair[0].out_dim() });
            }
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_mut(&mut self, index: usize) -> &mut Layer {
        &mut self.layers[index]
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.layers.iter().try_fold(x.to_vec(), |v, l| l.forward(&v))
    }

    pub fn forward_cached(&self, x: &[Complex64]) -> Result<(Vec<Complex64>, Vec<LayerCache>)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut v = x.to_vec();
        for l in &self.layers {
            let (y, cache) = l.forward_cached(&v)?;
            caches.push(cache);
            v = y;
        }
        Ok((v, caches))
    }

    /// Per-layer gradients given the loss gradient at the network output.
    pub fn backward(&self, caches: &[LayerCache], upstream: &[Complex64]) -> Result<Vec<LayerGrads>> {
        if caches.len() != self.layers.len() {
            return Err(Error::DimensionMismatch { expected: self.layers.len(), got: caches.len() });
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = upstream.to_vec();
        for (l, cache) in self.layers.iter().zip(caches).rev() {
            let lg = l.backward(cache, &g)?;
            g = lg.input.clone();
            grads.push(lg);
        }
        grads.reverse();
        Ok(grads)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub input: Vec<Complex64>,
    pub target: Vec<f64>,
}

/// `sum (Re y - t)^2 + lambda sum (Im y)^2`.
pub fn sample_loss(y: &[Complex64], target: &[f64], imag_penalty: f64) -> Result<f64> {
    if y.len() != target.len() {
        return Err(Error::DimensionMismatch { expected: target.len(), got: y.len() });
    }
    Ok(y.iter().zip(target).map(|(y, t)| (y.re - t).powi(2) + imag_penalty * y.im * y.im).sum())
}

/// Gradient of [`sample_loss`] with respect to `y`.
pub fn loss_gradient(y: &[Complex64], target: &[f64], imag_penalty: f64) -> Vec<Complex64> {
    y.iter().zip(target).map(|(y, t)| Complex64::new(2.0 * (y.re - t), 2.0 * imag_penalty * y.im)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub imag_penalty: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.01, epochs: 100, batch_size: 8, imag_penalty: 1.0, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidConfig(format!("learning rate must be finite and non-negative, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        if !self.imag_penalty.is_finite() || self.imag_penalty < 0.0 {
            return Err(Error::InvalidConfig("imaginary penalty must be finite and non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Mean loss over the samples that evaluated successfully.
    pub loss: f64,
    /// Samples whose forward pass failed in this evaluation.
    pub skipped_samples: usize,
}

/// Loss after each epoch; entry 0 is the loss before training.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LossTrace {
    pub epochs: Vec<EpochLoss>,
    /// Samples left out of parameter updates over the whole run.
    pub skipped_updates: usize,
}

impl LossTrace {
    pub fn initial(&self) -> f64 {
        self.epochs.first().map_or(f64::NAN, |e| e.loss)
    }

    pub fn last(&self) -> f64 {
        self.epochs.last().map_or(f64::NAN, |e| e.loss)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "epoch,loss,skipped_samples")?;
        for e in &self.epochs {
            writeln!(w, "{},{},{}", e.epoch, fmt_f64(e.loss), e.skipped_samples)?;
        }
        Ok(())
    }
}

fn evaluate(net: &Network, data: &[Sample], imag_penalty: f64) -> (f64, usize) {
    let losses: Vec<Option<f64>> = data
        .par_iter()
        .map(|s| net.forward(&s.input).and_then(|y| sample_loss(&y, &s.target, imag_penalty)).ok())
        .collect();
    let ok: Vec<f64> = losses.iter().flatten().copied().collect();
    let skipped = losses.len() - ok.len();
    if ok.is_empty() {
        return (f64::NAN, skipped);
    }
    (ok.iter().sum::<f64>() / ok.len() as f64, skipped)
}

fn sample_grads(net: &Network, s: &Sample, imag_penalty: f64) -> Result<Vec<LayerGrads>> {
    let (y, caches) = net.forward_cached(&s.input)?;
    sample_loss(&y, &s.target, imag_penalty)?;
    net.backward(&caches, &loss_gradient(&y, &s.target, imag_penalty))
}

/// Minibatch gradient descent with a seeded shuffle each epoch.
///
/// Samples whose forward or backward pass fails are left out of their batch.
/// Per-sample work runs in parallel but is reduced in a fixed order, so runs
/// are reproducible for a given seed.
pub fn sgd_train(net: &mut Network, data: &[Sample], config: &TrainConfig) -> Result<LossTrace> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidConfig("empty training set".into()));
    }
    for s in data {
        if s.input.len() != net.in_dim() {
            return Err(Error::DimensionMismatch { expected: net.in_dim(), got: s.input.len() });
        }
        if s.target.len() != net.out_dim() {
            return Err(Error::DimensionMismatch { expected: net.out_dim(), got: s.target.len() });
        }
    }
    let ids: Vec<Vec<ParamId>> = net.layers.iter().map(Layer::param_ids).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = LossTrace::default();

    let (loss, skipped) = evaluate(net, data, config.imag_penalty);
    if !loss.is_finite() {
        return Err(Error::Diverged { epoch: 0, loss });
    }
    trace.epochs.push(EpochLoss { epoch: 0, loss, skipped_samples: skipped });

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let results: Vec<Result<Vec<LayerGrads>>> =
                batch.par_iter().map(|&k| sample_grads(net, &data[k], config.imag_penalty)).collect();
            let mut acc: Vec<Vec<f64>> = ids.iter().map(|v| vec![0.0; v.len()]).collect();
            let mut used = 0usize;
            for r in results {
                match r {
                    Ok(grads) => {
                        used += 1;
                        for ((a, layer_ids), g) in acc.iter_mut().zip(&ids).zip(&grads) {
                            for (slot, &id) in a.iter_mut().zip(layer_ids) {
                                *slot += g.get(id);
                            }
                        }
                    }
                    Err(_) => trace.skipped_updates += 1,
                }
            }
            if used == 0 || config.learning_rate == 0.0 {
                continue;
            }
            let step = config.learning_rate / used as f64;
            for (l, (a, layer_ids)) in acc.iter().zip(&ids).enumerate() {
                for (&g, &id) in a.iter().zip(layer_ids) {
                    let layer = &mut net.layers[l];
                    let p = layer.param(id)?;
                    layer.set_param(id, p - step * g)?;
                }
            }
        }
        let (loss, skipped) = evaluate(net, data, config.imag_penalty);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        trace.epochs.push(EpochLoss { epoch, loss, skipped_samples: skipped });
    }
    Ok(trace)
}
