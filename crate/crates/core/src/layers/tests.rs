use std::cell::Cell;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::addiplication::addiplicate;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cv(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| c(x)).collect()
}

fn ones(rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_rows(vec![vec![c(1.0); cols]; rows]).unwrap()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

#[test]
fn additive_examples() {
    let id = AdditiveLayer::new(CMatrix::identity(3), Transfer::Identity).unwrap();
    let x = vec![Complex64::new(1.0, 2.0), c(-3.0), Complex64::new(0.0, 0.5)];
    assert_eq!(id.forward(&x).unwrap(), x);

    let sum = AdditiveLayer::new(ones(1, 2), Transfer::Identity).unwrap();
    assert_eq!(sum.forward(&cv(&[2.0, 7.0])).unwrap(), vec![c(9.0)]);

    let logistic = AdditiveLayer::new(CMatrix::zeros(2, 3), Transfer::Logistic).unwrap();
    assert_eq!(logistic.forward(&x).unwrap(), vec![c(0.5), c(0.5)]);

    assert!(matches!(sum.forward(&cv(&[1.0])), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn product_examples() {
    let p = ProductLayer::new(ones(1, 2)).unwrap();
    assert!(close(p.forward(&cv(&[2.0, 7.0])).unwrap()[0], c(14.0), 1e-14));
    let sq = ProductLayer::new(CMatrix::from_real_rows(&[&[2.0, 0.0]]).unwrap()).unwrap();
    assert!(close(sq.forward(&cv(&[3.0, 5.0])).unwrap()[0], c(9.0), 1e-14));
    let neg = p.forward(&cv(&[-2.0, 7.0])).unwrap()[0];
    assert!(close(neg, c(-14.0), 1e-14), "{neg}");
    assert!(matches!(p.forward(&cv(&[0.0, 7.0])), Err(Error::Domain(_))));
}

#[test]
fn power_product_handles_zero_and_matches_log_path() {
    let p = ProductLayer::new(CMatrix::from_real_rows(&[&[1.0, 1.0], &[2.0, 3.0]]).unwrap()).unwrap();
    let x = vec![Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4)];
    let a = p.forward(&x).unwrap();
    let b = p.forward_power_product(&x).unwrap();
    for (a, b) in a.iter().zip(&b) {
        assert!(close(*a, *b, 1e-13));
    }
    assert_eq!(p.forward_power_product(&cv(&[0.0, 2.0])).unwrap(), vec![c(0.0), c(0.0)]);
    let frac = ProductLayer::new(CMatrix::from_real_rows(&[&[0.5]]).unwrap()).unwrap();
    assert!(frac.forward_power_product(&cv(&[4.0])).is_err());
}

#[test]
fn addiplication_layer_examples() {
    let b = Backend::schroeder();
    let x = cv(&[2.0, 7.0]);
    for (n, want) in [(0.0, c(9.0)), (1.0, c(14.0))] {
        let l = AddiplicationLayer::new(ones(1, 2), vec![n], Transfer::Identity, b.clone()).unwrap();
        let y = l.forward(&x).unwrap()[0];
        assert!(close(y, want, 1e-6), "n={n}: {y}");
    }
    let l = AddiplicationLayer::new(ones(1, 2), vec![0.5], Transfer::Identity, b.clone()).unwrap();
    assert_eq!(l.forward(&x).unwrap()[0], addiplicate(c(2.0), c(7.0), 0.5, &b).unwrap());
}

#[test]
fn split_layer_examples() {
    let b = Backend::schroeder();
    let x = cv(&[2.0, 7.0]);
    let l = SplitIterateLayer::new(ones(1, 2), vec![0.0], vec![0.0, 0.0], Transfer::Identity, b.clone()).unwrap();
    assert_eq!(l.forward(&x).unwrap(), vec![c(9.0)]);
    let l = SplitIterateLayer::new(ones(1, 2), vec![1.0], vec![-1.0, -1.0], Transfer::Identity, b.clone()).unwrap();
    let want = addiplicate(c(2.0), c(7.0), 1.0, &b).unwrap();
    assert!(close(l.forward(&x).unwrap()[0], want, 1e-12));
    assert!(close(want, c(14.0), 1e-6));
    let l = SplitIterateLayer::new(ones(1, 2), vec![0.5], vec![-0.5, -0.5], Transfer::Identity, b.clone()).unwrap();
    let a = AddiplicationLayer::new(ones(1, 2), vec![0.5], Transfer::Identity, b).unwrap();
    assert!(close(l.forward(&x).unwrap()[0], a.forward(&x).unwrap()[0], 1e-12));
}

#[test]
fn parameterized_transfer_examples() {
    let b = Backend::schroeder();
    let t = Complex64::new(0.7, -0.2);
    assert_eq!(parameterized_transfer(t, 0.0, 0.0, Transfer::Identity, &b).unwrap(), t);
    assert_eq!(parameterized_transfer(c(0.0), 0.0, 0.0, Transfer::Logistic, &b).unwrap(), c(0.5));
    let r = parameterized_transfer(c(1.5), 0.3, -0.3, Transfer::Identity, &b).unwrap();
    assert!(close(r, c(1.5), 1e-6), "{r}");
}

#[test]
fn additive_then_transfer_reproduces_split_exactly() {
    let b = Backend::schroeder();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for sigma in [Transfer::Identity, Transfer::Logistic] {
        let w = CMatrix::random_real(3, 2, &mut rng);
        let n_hat: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n_tilde: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let split = SplitIterateLayer::new(w.clone(), n_hat.clone(), n_tilde.clone(), sigma, b.clone()).unwrap();
        let x = cv(&[rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)]);
        let pre: Vec<Complex64> = x.iter().zip(&n_tilde).map(|(&v, &n)| b.iterate(v, n).unwrap()).collect();
        let s = AdditiveLayer::new(w, Transfer::Identity).unwrap().forward(&pre).unwrap();
        let via_transfer: Vec<Complex64> =
            s.iter().zip(&n_hat).map(|(&t, &n)| parameterized_transfer(t, n, 0.0, sigma, &b).unwrap()).collect();
        assert_eq!(split.forward(&x).unwrap(), via_transfer);
    }
}

#[test]
fn linear_layer_gradients_are_outer_products() {
    let w = CMatrix::from_rows(vec![vec![Complex64::new(0.5, 0.1), c(-1.0)], vec![c(2.0), Complex64::new(0.0, 1.0)]]).unwrap();
    let layer = Layer::Additive(AdditiveLayer::new(w, Transfer::Identity).unwrap());
    let x = vec![Complex64::new(1.0, -2.0), c(3.0)];
    let delta = vec![Complex64::new(0.3, 0.4), c(-1.0)];
    let (_, cache) = layer.forward_cached(&x).unwrap();
    let g = layer.backward(&cache, &delta).unwrap();
    for (i, d) in delta.iter().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            assert_eq!(g.weights.get(i, j), d * xj.conj());
        }
    }
}

#[test]
fn multiplicative_neuron_input_gradient_is_the_other_factor() {
    let layer = Layer::Addiplication(AddiplicationLayer::new(ones(1, 2), vec![1.0], Transfer::Identity, Backend::schroeder()).unwrap());
    let (_, cache) = layer.forward_cached(&cv(&[2.0, 7.0])).unwrap();
    let g = layer.backward(&cache, &[c(1.0)]).unwrap();
    assert!(close(g.input[0], c(7.0), 1e-6), "{}", g.input[0]);
    assert!(close(g.input[1], c(2.0), 1e-6), "{}", g.input[1]);
}

#[test]
fn grad_check_linear_layer_is_tight() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let layer = Layer::Additive(AdditiveLayer::new(CMatrix::random_real(3, 4, &mut rng), Transfer::Identity).unwrap());
    let x: Vec<Complex64> = (0..4).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let seed: Vec<Complex64> = (0..3).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let r = grad_check(&layer, &x, &seed, 1e-4).unwrap();
    assert!(!r.is_singular());
    assert!(r.worst_rel_error < 1e-8, "{}", r.worst_rel_error);
    assert_eq!(r.entries.len(), 3 * 4 * 2 + 4 * 2);
}

#[test]
fn grad_check_split_layer_random_orders() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let w = CMatrix::random_real(2, 3, &mut rng);
    let n_hat = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n_tilde = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let layer = Layer::Split(SplitIterateLayer::new(w, n_hat, n_tilde, Transfer::Logistic, Backend::schroeder()).unwrap());
    let x = cv(&[0.8, 1.7, 2.4]);
    let seed = vec![Complex64::new(1.0, 0.5), c(-0.7)];
    let r = grad_check(&layer, &x, &seed, 1e-4).unwrap();
    assert!(r.passed(GRAD_CHECK_TOLERANCE), "{r:#?}");
    assert!(r.worst_by_group().contains_key("n_hat"));
    assert!(r.worst_by_group().contains_key("n_tilde"));
}

#[test]
fn grad_check_flags_branch_cut() {
    let beta = Branch::default().beta();
    let on_cut = Complex64::from_polar(2.0, beta);
    let w = CMatrix::from_real_rows(&[&[0.5, 1.0]]).unwrap();
    let layer = Layer::Product(ProductLayer::new(w).unwrap());
    let r = grad_check(&layer, &[on_cut, c(1.5)], &[c(1.0)], 1e-5).unwrap();
    assert!(r.is_singular());
    let r0 = grad_check(&layer, &[c(0.0), c(1.5)], &[c(1.0)], 1e-5).unwrap();
    assert!(r0.failure.is_some() && !r0.passed(GRAD_CHECK_TOLERANCE));
}

#[test]
fn grad_check_catches_corrupted_gradient() {
    let layer = Layer::Additive(AdditiveLayer::new(ones(1, 2), Transfer::Identity).unwrap());
    let r = grad_check_with(&layer, &cv(&[2.0, 7.0]), &[c(1.0)], 1e-4, |g| {
        let w = g.weights.get(0, 0);
        g.weights.set(0, 0, w * 1.01);
    })
    .unwrap();
    assert!(!r.passed(GRAD_CHECK_TOLERANCE));
    assert!(grad_check(&layer, &cv(&[2.0, 7.0]), &[c(1.0)], 1e-3).is_err());
}

#[test]
fn abel_layers_train_only_real_weights() {
    let l = Layer::Split(SplitIterateLayer::new(ones(1, 2), vec![0.0], vec![0.0, 0.0], Transfer::Identity, Backend::abel()).unwrap());
    assert!(l.param_ids().iter().all(|id| !matches!(id, ParamId::WeightIm(..))));
    let r = grad_check(&l, &cv(&[1.5, 2.5]), &[c(1.0)], 1e-4).unwrap();
    assert!(r.passed(GRAD_CHECK_TOLERANCE), "{r:#?}");
}

#[test]
fn frozen_orders_are_not_parameters() {
    let mut a = AddiplicationLayer::new(ones(1, 2), vec![1.0], Transfer::Identity, Backend::schroeder()).unwrap();
    a.freeze_n = true;
    let l = Layer::Addiplication(a);
    assert!(l.param_ids().iter().all(|id| id.group() == "W"));
    // integer order on the singular set: no n-derivative, but frozen n does not need one
    let (_, cache) = l.forward_cached(&cv(&[1.0, 2.0])).unwrap();
    assert!(l.backward(&cache, &[c(1.0)]).is_ok());
}

struct Counting<'a> {
    inner: &'a Backend,
    calls: Cell<usize>,
}

impl ExpIterate for Counting<'_> {
    fn iterate(&self, z: Complex64, n: f64) -> Result<Complex64> {
        self.calls.set(self.calls.get() + 1);
        self.inner.iterate(z, n)
    }

    fn iterate_with_grads(&self, z: Complex64, n: f64) -> Result<IterateEval> {
        self.calls.set(self.calls.get() + 1);
        self.inner.iterate_with_grads(z, n)
    }
}

#[test]
fn iterate_call_counts() {
    let b = Backend::schroeder();
    let (inp, out) = (5, 3);
    let x = cv(&[0.5, 1.2, 1.7, 2.2, 3.1]);
    let w = ones(out, inp);
    let split = SplitIterateLayer::new(w.clone(), vec![0.3; out], vec![-0.3; inp], Transfer::Identity, b.clone()).unwrap();
    let counter = Counting { inner: &b, calls: Cell::new(0) };
    split.forward_with(&x, &counter).unwrap();
    assert_eq!(counter.calls.get(), inp + out);

    let add = AddiplicationLayer::new(w, vec![0.3; out], Transfer::Identity, b.clone()).unwrap();
    let counter = Counting { inner: &b, calls: Cell::new(0) };
    add.forward_with(&x, &counter).unwrap();
    assert_eq!(counter.calls.get(), inp * out + out);
}

#[test]
fn layer_json_round_trip() {
    let layers = vec![
        Layer::Additive(AdditiveLayer::new(ones(2, 2), Transfer::Logistic).unwrap()),
        Layer::Split(SplitIterateLayer::new(ones(1, 2), vec![0.25], vec![-0.5, 0.5], Transfer::Identity, Backend::abel()).unwrap()),
    ];
    let net = Network::new(layers).unwrap();
    let json = serde_json::to_string(&net).unwrap();
    assert!(json.contains("\"kind\":\"split\""));
    let back: Network = serde_json::from_str(&json).unwrap();
    assert_eq!(back, net);

    let bad = json.replace("[0.25]", "[0.25,1.0]");
    assert!(serde_json::from_str::<Network>(&bad).is_err());
}

fn regression_data(rng: &mut ChaCha8Rng) -> Vec<Sample> {
    (0..32)
        .map(|_| {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            Sample { input: cv(&[a, b]), target: vec![2.0 * a - 0.5 * b] }
        })
        .collect()
}

#[test]
fn zero_learning_rate_gives_flat_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = regression_data(&mut rng);
    let mut net = Network::new(vec![Layer::Additive(AdditiveLayer::new(CMatrix::random_real(1, 2, &mut rng), Transfer::Identity).unwrap())]).unwrap();
    let before = net.clone();
    let cfg = TrainConfig { learning_rate: 0.0, epochs: 5, ..TrainConfig::default() };
    let trace = sgd_train(&mut net, &data, &cfg).unwrap();
    assert_eq!(trace.epochs.len(), 6);
    assert!(trace.epochs.iter().all(|e| e.loss == trace.initial()));
    assert_eq!(net, before);
}

#[test]
fn linear_regression_loss_strictly_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = regression_data(&mut rng);
    let mut net = Network::new(vec![Layer::Additive(AdditiveLayer::new(CMatrix::random_real(1, 2, &mut rng), Transfer::Identity).unwrap())]).unwrap();
    let cfg = TrainConfig { learning_rate: 0.05, epochs: 30, batch_size: data.len(), ..TrainConfig::default() };
    let trace = sgd_train(&mut net, &data, &cfg).unwrap();
    for pair in trace.epochs.windows(2) {
        assert!(pair[1].loss < pair[0].loss, "{pair:?}");
    }
    let mut csv = Vec::new();
    trace.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("epoch,loss,skipped_samples\n0,"));
    assert_eq!(csv.lines().count(), 32);
}

#[test]
fn training_is_deterministic_and_diverges_loudly() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data = regression_data(&mut rng);
    let start = Network::new(vec![Layer::Additive(AdditiveLayer::new(CMatrix::random_real(1, 2, &mut rng), Transfer::Identity).unwrap())]).unwrap();
    let cfg = TrainConfig { learning_rate: 0.05, epochs: 5, batch_size: 4, seed: 11, ..TrainConfig::default() };
    let (mut a, mut b) = (start.clone(), start.clone());
    assert_eq!(sgd_train(&mut a, &data, &cfg).unwrap(), sgd_train(&mut b, &data, &cfg).unwrap());
    assert_eq!(a, b);

    let mut c = start;
    let wild = TrainConfig { learning_rate: 1e6, epochs: 50, ..cfg };
    assert!(matches!(sgd_train(&mut c, &data, &wild), Err(Error::Diverged { .. })));
}

#[test]
fn split_network_learns_toward_multiplication() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let data: Vec<Sample> = (0..24)
        .map(|_| {
            let a: f64 = rng.gen_range(1.0..2.5);
            let b: f64 = rng.gen_range(1.0..2.5);
            Sample { input: cv(&[a, b]), target: vec![a * b] }
        })
        .collect();
    let layer = SplitIterateLayer::new(ones(1, 2), vec![0.05], vec![-0.05, -0.05], Transfer::Identity, Backend::schroeder()).unwrap();
    let mut net = Network::new(vec![Layer::Split(layer)]).unwrap();
    let cfg = TrainConfig { learning_rate: 0.005, epochs: 20, batch_size: 4, seed: 2, ..TrainConfig::default() };
    let trace = sgd_train(&mut net, &data, &cfg).unwrap();
    assert!(trace.last() < trace.initial(), "{:?}", trace.epochs);
    let Layer::Split(l) = &net.layers()[0] else { unreachable!() };
    assert!(l.n_hat[0] != 0.05 && l.n_tilde.iter().all(|&n| n != -0.05));
}

