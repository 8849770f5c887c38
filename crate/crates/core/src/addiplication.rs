//! The addiplication operator
//! `x (+)_n y = exp^(n)(exp^(-n)(x) + exp^(-n)(y))`, which is addition at
//! `n = 0` and multiplication at `n = 1`.

use num_complex::Complex64;
use serde::Serialize;

use crate::backend::{Backend, ExpIterate};
use crate::error::{Error, Result, SampleFlag};

/// Binary addiplication.
pub fn addiplicate(x: Complex64, y: Complex64, n: f64, backend: &Backend) -> Result<Complex64> {
    addiplicate_nary(&[x, y], n, backend)
}

/// `exp^(n)(sum_j exp^(-n)(x_j))`, evaluated directly rather than as a fold
/// of binary operations.
pub fn addiplicate_nary(xs: &[Complex64], n: f64, backend: &Backend) -> Result<Complex64> {
    if xs.is_empty() {
        return Err(Error::InvalidConfig("addiplication needs at least one operand".into()));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for &x in xs {
        sum += backend.iterate(x, -n)?;
    }
    backend.iterate(sum, n)
}

/// Value and gradients of an addiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct AddiplicationGradients {
    pub value: Complex64,
    /// One partial derivative per operand.
    pub d_operands: Vec<Complex64>,
    pub d_n: Complex64,
}

pub fn addiplicate_with_grads(x: Complex64, y: Complex64, n: f64, backend: &Backend) -> Result<AddiplicationGradients> {
    addiplicate_nary_with_grads(&[x, y], n, backend)
}

/// Chain rule through `E = sum_j exp^(-n)(x_j)`:
/// `d/dx_j = exp'^(n)(E) exp'^(-n)(x_j)` and
/// `d/dn = exp^(n')(E) - exp'^(n)(E) sum_j exp^(m')(x_j)|_{m=-n}`.
pub fn addiplicate_nary_with_grads(xs: &[Complex64], n: f64, backend: &Backend) -> Result<AddiplicationGradients> {
    if xs.is_empty() {
        return Err(Error::InvalidConfig("addiplication needs at least one operand".into()));
    }
    let singular = || Error::SingularDerivative(format!("no derivative in n at integer order {n} on the singular set"));
    let mut sum = Complex64::new(0.0, 0.0);
    let mut inner = Vec::with_capacity(xs.len());
    for &x in xs {
        let e = backend.iterate_with_grads(x, -n)?;
        sum += e.value;
        inner.push(e);
    }
    let outer = backend.iterate_with_grads(sum, n)?;
    let mut inner_dn = Complex64::new(0.0, 0.0);
    for e in &inner {
        // the inner order is m = -n, hence the sign flip
        inner_dn -= e.d_dn.ok_or_else(singular)?;
    }
    let d_n = outer.d_dn.ok_or_else(singular)? + outer.d_dz * inner_dn;
    Ok(AddiplicationGradients {
        value: outer.value,
        d_operands: inner.iter().map(|e| outer.d_dz * e.d_dz).collect(),
        d_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: f64,
    /// `NaN` when the sample failed.
    pub value: Complex64,
    pub flag: SampleFlag,
}

/// `x (+)_n y` sampled uniformly over `n` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationCurve {
    pub backend: &'static str,
    pub points: Vec<CurvePoint>,
    /// Largest `|value|` over the successful samples.
    pub max_abs: f64,
    /// `n` at which `max_abs` is attained.
    pub argmax_n: f64,
    /// Largest `|value|` over the interior samples `0 < n < 1`.
    pub interior_max_abs: f64,
}

pub fn interpolation_curve(x: Complex64, y: Complex64, n_samples: usize, backend: &Backend) -> Result<InterpolationCurve> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 samples, got {n_samples}")));
    }
    let last = (n_samples - 1) as f64;
    let points: Vec<CurvePoint> = (0..n_samples)
        .map(|i| {
            let n = i as f64 / last;
            match addiplicate(x, y, n, backend) {
                Ok(value) => CurvePoint { n, value, flag: SampleFlag::Ok },
                Err(e) => CurvePoint { n, value: Complex64::new(f64::NAN, f64::NAN), flag: SampleFlag::from(&e) },
            }
        })
        .collect();
    let mut max_abs = f64::NEG_INFINITY;
    let mut argmax_n = f64::NAN;
    let mut interior_max_abs = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        if p.flag != SampleFlag::Ok {
            continue;
        }
        let a = p.value.norm();
        if a > max_abs {
            max_abs = a;
            argmax_n = p.n;
        }
        if i > 0 && i + 1 < n_samples {
            interior_max_abs = interior_max_abs.max(a);
        }
    }
    Ok(InterpolationCurve { backend: backend.name(), points, max_abs, argmax_n, interior_max_abs })
}
