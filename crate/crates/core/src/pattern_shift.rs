//! The variable pattern-shift task: a binary pattern `x` of length `N` and a
//! one-hot shift `s` encoding `m` map to `x` circularly shifted by `m`.
//!
//! By the shift theorem the task is solved exactly by a three-layer network:
//! an additive layer computing the spectra `S_k` of `s` and `X_k` of `x`, a
//! multiplicative layer forming `S_k X_k`, and an additive inverse transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::layers::{
    sgd_train, AdditiveLayer, CMatrix, Layer, LossTrace, Network, ProductLayer, Sample, SplitIterateLayer, TrainConfig, Transfer,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftInstance {
    pub x: Vec<f64>,
    pub m: usize,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
}

/// `out[v] = v[(v - m) mod N]`.
pub fn circular_shift<T: Copy>(v: &[T], m: usize) -> Vec<T> {
    let n = v.len();
    (0..n).map(|i| v[(i + n - m % n) % n]).collect()
}

impl ShiftInstance {
    pub fn new(x: Vec<f64>, m: usize) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::InvalidConfig("pattern length must be at least 1".into()));
        }
        if m >= n {
            return Err(Error::InvalidConfig(format!("shift {m} out of range for length {n}")));
        }
        let mut s = vec![0.0; n];
        s[m] = 1.0;
        let y = circular_shift(&x, m);
        Ok(ShiftInstance { x, m, s, y })
    }

    /// Random binary pattern and uniform shift, reproducible from `seed`.
    pub fn generate(n: usize, seed: u64) -> Result<Self> {
        Self::generate_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn generate_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("pattern length must be at least 1".into()));
        }
        let x = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let m = rng.gen_range(0..n);
        Self::new(x, m)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Network input `[x; s]`.
    pub fn input(&self) -> Vec<Complex64> {
        self.x.iter().chain(&self.s).map(|&v| Complex64::new(v, 0.0)).collect()
    }

    pub fn sample(&self) -> Sample {
        Sample { input: self.input(), target: self.y.clone() }
    }
}

/// Every pattern and shift for length `n`, patterns in binary counting order
/// with `x[0]` as the low bit.
pub fn all_instances(n: usize) -> Result<Vec<ShiftInstance>> {
    if n == 0 || n > 20 {
        return Err(Error::InvalidConfig(format!("exhaustive enumeration needs 1 <= N <= 20, got {n}")));
    }
    let mut out = Vec::with_capacity(n << n);
    for bits in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|i| f64::from((bits >> i) & 1)).collect();
        for m in 0..n {
            out.push(ShiftInstance::new(x.clone(), m)?);
        }
    }
    Ok(out)
}

/// `exp(sign * 2 pi i k v / N)`, with `k v` reduced mod `N` first.
fn twiddle(k: usize, v: usize, n: usize, sign: f64) -> Complex64 {
    let r = (k * v) % n;
    Complex64::from_polar(1.0, sign * 2.0 * PI * r as f64 / n as f64)
}

/// `V_k = sum_n v_n exp(-2 pi i k n / N)`, straight from the definition.
pub fn dft(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n).map(|k| v.iter().enumerate().map(|(j, &x)| x * twiddle(k, j, n, -1.0)).sum()).collect()
}

/// `v_n = (1/N) sum_k V_k exp(2 pi i k n / N)`.
pub fn inverse_dft(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n).map(|j| v.iter().enumerate().map(|(k, &x)| x * twiddle(k, j, n, 1.0)).sum::<Complex64>() / n as f64).collect()
}

/// Layer 1 weights: rows `0..N` give `S_k` from `s`, rows `N..2N` give `X_k`
/// from `x`, on the input `[x; s]`.
fn spectrum_weights(n: usize) -> CMatrix {
    let mut w = CMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for j in 0..n {
            w.set(k, n + j, twiddle(k, j, n, -1.0));
            w.set(n + k, j, twiddle(k, j, n, -1.0));
        }
    }
    w
}

/// Middle layer weights: output `k` takes `S_k` and `X_k` with weight 1.
fn pairing_weights(n: usize) -> CMatrix {
    let mut w = CMatrix::zeros(n, 2 * n);
    for k in 0..n {
        w.set(k, k, Complex64::new(1.0, 0.0));
        w.set(k, n + k, Complex64::new(1.0, 0.0));
    }
    w
}

fn inverse_weights(n: usize) -> CMatrix {
    let mut w = CMatrix::zeros(n, n);
    for v in 0..n {
        for k in 0..n {
            w.set(v, k, twiddle(k, v, n, 1.0) / n as f64);
        }
    }
    w
}

/// The exact shift network; all transfer functions are the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticShiftNetwork {
    pub n: usize,
    pub spectra: AdditiveLayer,
    pub products: ProductLayer,
    pub inverse: AdditiveLayer,
}

pub fn build_analytic_network(n: usize) -> Result<AnalyticShiftNetwork> {
    if n == 0 {
        return Err(Error::InvalidConfig("pattern length must be at least 1".into()));
    }
    Ok(AnalyticShiftNetwork {
        n,
        spectra: AdditiveLayer::new(spectrum_weights(n), Transfer::Identity)?,
        products: ProductLayer::new(pairing_weights(n))?,
        inverse: AdditiveLayer::new(inverse_weights(n), Transfer::Identity)?,
    })
}

impl AnalyticShiftNetwork {
    /// Output for the input `[x; s]`. The product layer multiplies literally,
    /// so vanishing spectra (`X_k = 0`) are handled exactly.
    pub fn forward(&self, input: &[Complex64]) -> Result<Vec<Complex64>> {
        let spectra = self.spectra.forward(input)?;
        let products = self.products.forward_power_product(&spectra)?;
        self.inverse.forward(&products)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEvaluation {
    /// Real parts of the network output.
    pub output: Vec<f64>,
    pub max_abs_error: f64,
    pub max_imag: f64,
}

pub fn evaluate_analytic(net: &AnalyticShiftNetwork, inst: &ShiftInstance) -> Result<AnalyticEvaluation> {
    if inst.len() != net.n {
        return Err(Error::DimensionMismatch { expected: net.n, got: inst.len() });
    }
    let out = net.forward(&inst.input())?;
    let output: Vec<f64> = out.iter().map(|v| v.re).collect();
    let max_abs_error = output.iter().zip(&inst.y).map(|(o, t)| (o - t).abs()).fold(0.0, f64::max);
    let max_imag = out.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(AnalyticEvaluation { output, max_abs_error, max_imag })
}

/// Four instances with `in_a + in_b = in_c + in_d` but
/// `y_a + y_b != y_c + y_d`, so no affine map of `[x; s]` solves the task.
/// Needs `N >= 2`.
pub fn affine_counterexample(n: usize) -> Result<[ShiftInstance; 4]> {
    if n < 2 {
        return Err(Error::InvalidConfig("the task is affine for N = 1".into()));
    }
    let mut impulse = vec![0.0; n];
    impulse[0] = 1.0;
    let zero = vec![0.0; n];
    Ok([
        ShiftInstance::new(impulse.clone(), 0)?,
        ShiftInstance::new(zero.clone(), 1)?,
        ShiftInstance::new(impulse, 1)?,
        ShiftInstance::new(zero, 0)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftInit {
    /// Random real weights, all iterate orders 0 and trainable.
    #[default]
    Random,
    /// The analytic weights with the middle layer fixed at multiplication.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftTrainConfig {
    pub n: usize,
    pub trials: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Training instances per trial.
    pub samples: usize,
    pub batch_size: usize,
    pub init: ShiftInit,
}

impl Default for ShiftTrainConfig {
    fn default() -> Self {
        ShiftTrainConfig { n: 4, trials: 10, epochs: 30, learning_rate: 0.01, seed: 0, samples: 64, batch_size: 8, init: ShiftInit::Random }
    }
}

/// The trainable network: additive `2N -> 2N`, split-iterate `2N -> N`
/// (Schröder backend), additive `N -> N`.
pub fn build_split_network<R: Rng + ?Sized>(n: usize, init: ShiftInit, rng: &mut R) -> Result<Network> {
    if n == 0 {
        return Err(Error::InvalidConfig("pattern length must be at least 1".into()));
    }
    let backend = Backend::schroeder();
    let (w1, w2, w3, n_hat, n_tilde) = match init {
        ShiftInit::Random => (
            CMatrix::random_real(2 * n, 2 * n, rng),
            CMatrix::random_real(n, 2 * n, rng),
            CMatrix::random_real(n, n, rng),
            0.0,
            0.0,
        ),
        ShiftInit::Analytic => (spectrum_weights(n), pairing_weights(n), inverse_weights(n), 1.0, -1.0),
    };
    let mut middle = SplitIterateLayer::new(w2, vec![n_hat; n], vec![n_tilde; 2 * n], Transfer::Identity, backend)?;
    middle.freeze_n = init == ShiftInit::Analytic;
    Network::new(vec![
        Layer::Additive(AdditiveLayer::new(w1, Transfer::Identity)?),
        Layer::Split(middle),
        Layer::Additive(AdditiveLayer::new(w3, Transfer::Identity)?),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTrial {
    pub seed: u64,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub decreased: bool,
    pub trace: LossTrace,
    /// Final middle-layer orders.
    pub n_hat: Vec<f64>,
    pub n_tilde: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTrainReport {
    pub config: ShiftTrainConfig,
    pub trials: Vec<ShiftTrial>,
    pub decreased_count: usize,
}

fn run_trial(config: &ShiftTrainConfig, seed: u64) -> Result<ShiftTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Sample> = (0..config.samples).map(|_| ShiftInstance::generate_with(config.n, &mut rng).map(|i| i.sample())).collect::<Result<_>>()?;
    let mut net = build_split_network(config.n, config.init, &mut rng)?;
    let train = TrainConfig {
        learning_rate: config.learning_rate,
        epochs: config.epochs,
        batch_size: config.batch_size,
        imag_penalty: 1.0,
        seed: rng.gen(),
    };
    let trace = sgd_train(&mut net, &data, &train)?;
    let Layer::Split(middle) = &net.layers()[1] else {
        unreachable!("middle layer is built as a split layer")
    };
    Ok(ShiftTrial {
        seed,
        initial_loss: trace.initial(),
        final_loss: trace.last(),
        decreased: trace.last() < trace.initial(),
        n_hat: middle.n_hat.clone(),
        n_tilde: middle.n_tilde.clone(),
        trace,
    })
}

/// Trains the split-iterate network from independent seeds
/// `seed, seed + 1, ...`. Trials run in parallel; results are in seed order.
pub fn train_on_shift_task(config: &ShiftTrainConfig) -> Result<ShiftTrainReport> {
    if config.n == 0 || config.n > 8 {
        return Err(Error::InvalidConfig(format!("training needs 1 <= N <= 8, got {}", config.n)));
    }
    if config.trials == 0 || config.samples == 0 {
        return Err(Error::InvalidConfig("trials and samples must be positive".into()));
    }
    let trials: Vec<ShiftTrial> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, config.seed.wrapping_add(t)))
        .collect::<Result<_>>()?;
    let decreased_count = trials.iter().filter(|t| t.decreased).count();
    Ok(ShiftTrainReport { config: *config, trials, decreased_count })
}
