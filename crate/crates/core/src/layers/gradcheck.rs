use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::{Layer, LayerGrads};
use crate::error::{Error, Result};
use crate::numdiff::{checked_derivative, rel_error, Estimate};

/// Pass threshold on the relative error of every checked scalar.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

/// Step estimates must agree to this before they are trusted.
const AGREE_TOL: f64 = 3e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckEntry {
    pub parameter: String,
    pub group: &'static str,
    pub analytic: f64,
    pub numeric: f64,
    /// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-12)`.
    pub rel_error: f64,
    /// The finite difference kept crossing a discontinuity or failed.
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub entries: Vec<GradCheckEntry>,
    /// Worst relative error over the non-singular entries.
    pub worst_rel_error: f64,
    /// Set when the forward or backward pass itself fails at `x`.
    pub failure: Option<String>,
}

impl GradCheckReport {
    /// True when the sample sits on a singularity or branch cut.
    pub fn is_singular(&self) -> bool {
        self.failure.is_some() || self.entries.iter().any(|e| e.singular)
    }

    /// Every non-singular entry is within `tol`, and the pass itself worked.
    pub fn passed(&self, tol: f64) -> bool {
        self.failure.is_none() && self.entries.iter().filter(|e| !e.singular).all(|e| e.rel_error < tol)
    }

    /// Worst non-singular relative error per parameter group, in name order.
    pub fn worst_by_group(&self) -> BTreeMap<&'static str, f64> {
        let mut out = BTreeMap::new();
        for e in self.entries.iter().filter(|e| !e.singular) {
            let w = out.entry(e.group).or_insert(0.0f64);
            *w = w.max(e.rel_error);
        }
        out
    }
}

/// Compares `backward` against finite differences for every trainable
/// scalar and every input component, with the loss `L = Re sum conj(seed_i) y_i`.
pub fn grad_check(layer: &Layer, x: &[Complex64], loss_seed: &[Complex64], eps: f64) -> Result<GradCheckReport> {
    grad_check_with(layer, x, loss_seed, eps, |_| {})
}

/// [`grad_check`] with a hook that may alter the analytic gradients before
/// comparison.
pub fn grad_check_with<F>(layer: &Layer, x: &[Complex64], loss_seed: &[Complex64], eps: f64, tamper: F) -> Result<GradCheckReport>
where
    F: FnOnce(&mut LayerGrads),
{
    if !(1e-8..=1e-4).contains(&eps) {
        return Err(Error::InvalidConfig(format!("eps must lie in [1e-8, 1e-4], got {eps}")));
    }
    if x.len() != layer.in_dim() {
        return Err(Error::DimensionMismatch { expected: layer.in_dim(), got: x.len() });
    }
    if loss_seed.len() != layer.out_dim() {
        return Err(Error::DimensionMismatch { expected: layer.out_dim(), got: loss_seed.len() });
    }
    let loss = |y: &[Complex64]| -> f64 { y.iter().zip(loss_seed).map(|(y, s)| (s.conj() * y).re).sum() };

    let analytic = layer.forward_cached(x).and_then(|(_, cache)| layer.backward(&cache, loss_seed));
    let mut grads = match analytic {
        Ok(g) => g,
        Err(e) => return Ok(GradCheckReport { entries: vec![], worst_rel_error: f64::NAN, failure: Some(e.to_string()) }),
    };
    tamper(&mut grads);

    let mut entries = Vec::new();
    let mut push = |name: String, group: &'static str, a: f64, est: Estimate<f64>| {
        let (numeric, singular) = match est {
            Estimate::Smooth { value, .. } => (value, false),
            Estimate::Discontinuous { value } => (value, true),
            Estimate::Failed => (f64::NAN, true),
        };
        let rel = if singular { f64::NAN } else { rel_error(a, numeric, 1e-12) };
        entries.push(GradCheckEntry { parameter: name, group, analytic: a, numeric, rel_error: rel, singular });
    };

    for id in layer.param_ids() {
        let base = layer.param(id)?;
        let est = checked_derivative(
            |t| {
                let mut l = layer.clone();
                l.set_param(id, base + t)?;
                l.forward(x).map(|y| loss(&y))
            },
            eps,
            AGREE_TOL,
        );
        push(id.to_string(), id.group(), grads.get(id), est);
    }

    let real_only = match layer {
        Layer::Addiplication(l) => l.backend.is_real(),
        Layer::Split(l) => l.backend.is_real(),
        _ => false,
    };
    for j in 0..x.len() {
        let parts: &[(Complex64, &str)] = if real_only {
            &[(Complex64::new(1.0, 0.0), "re")]
        } else {
            &[(Complex64::new(1.0, 0.0), "re"), (Complex64::new(0.0, 1.0), "im")]
        };
        for &(dir, part) in parts {
            let est = checked_derivative(
                |t| {
                    let mut xp = x.to_vec();
                    xp[j] += dir * t;
                    layer.forward(&xp).map(|y| loss(&y))
                },
                eps,
                AGREE_TOL,
            );
            let a = if part == "re" { grads.input[j].re } else { grads.input[j].im };
            push(format!("x[{j}].{part}"), "x", a, est);
        }
    }

    let worst = entries.iter().filter(|e| !e.singular).map(|e| e.rel_error).fold(0.0, f64::max);
    Ok(GradCheckReport { entries, worst_rel_error: worst, failure: None })
}

