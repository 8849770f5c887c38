//! A single interface over the real (Abel) and complex (Schröder) iterates,
//! used by the addiplication operator and the neural layers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abel::{Abel, AbelConfig};
use crate::error::{Error, Result};
use crate::schroeder::{Schroeder, SchroederConfig};

/// Value of `exp^(n)(z)` with derivatives in `z` and `n`.
///
/// `d_dn` is `None` where the derivative in `n` does not exist, which happens
/// only at integer `n` on the singular set (see [`Backend::iterate_with_grads`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateEval {
    pub value: Complex64,
    pub d_dz: Complex64,
    pub d_dn: Option<Complex64>,
}

/// Anything that can evaluate iterates of `exp`. Implemented by [`Backend`];
/// the layers are written against this trait so evaluation can be wrapped.
pub trait ExpIterate {
    fn iterate(&self, z: Complex64, n: f64) -> Result<Complex64>;
    fn iterate_with_grads(&self, z: Complex64, n: f64) -> Result<IterateEval>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    Abel(AbelConfig),
    Schroeder(SchroederConfig),
}

/// Which solution of the iterate problem to use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BackendSpec", into = "BackendSpec")]
pub enum Backend {
    /// Real-only iterates; operands must have zero imaginary part and
    /// `-inf` intermediates are domain errors.
    AbelReal(Abel),
    SchroederComplex(Schroeder),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::SchroederComplex(Schroeder::default())
    }
}

impl TryFrom<BackendSpec> for Backend {
    type Error = Error;

    fn try_from(spec: BackendSpec) -> Result<Self> {
        Ok(match spec {
            BackendSpec::Abel(cfg) => Backend::AbelReal(Abel::new(cfg)?),
            BackendSpec::Schroeder(cfg) => Backend::SchroederComplex(Schroeder::new(cfg)?),
        })
    }
}

impl From<Backend> for BackendSpec {
    fn from(b: Backend) -> Self {
        b.spec()
    }
}

/// Integer orders up to this size are evaluated with the Schröder backend by
/// plain `exp`/`log` composition.
const MAX_INTEGER_FALLBACK: f64 = 16.0;

impl Backend {
    pub fn abel() -> Self {
        Backend::AbelReal(Abel::default())
    }

    pub fn schroeder() -> Self {
        Backend::default()
    }

    pub fn spec(&self) -> BackendSpec {
        match self {
            Backend::AbelReal(a) => BackendSpec::Abel(*a.config()),
            Backend::SchroederComplex(s) => BackendSpec::Schroeder(*s.config()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::AbelReal(_) => "abel",
            Backend::SchroederComplex(_) => "schroeder",
        }
    }

    /// True for the real-only backend.
    pub fn is_real(&self) -> bool {
        matches!(self, Backend::AbelReal(_))
    }

    fn real_operand(z: Complex64) -> Result<f64> {
        if z.im != 0.0 {
            return Err(Error::Domain(format!("abel backend needs real operands, got {z}")));
        }
        Ok(z.re)
    }

    fn integer_order(n: f64) -> Option<i32> {
        (n.fract() == 0.0 && n.abs() <= MAX_INTEGER_FALLBACK).then_some(n as i32)
    }

    /// `exp^(n)` for integer `n` by direct composition, with its derivative.
    fn compose_integer(s: &Schroeder, z: Complex64, n: i32) -> Result<(Complex64, Complex64)> {
        let mut w = z;
        let mut deriv = Complex64::new(1.0, 0.0);
        let guard = s.config().overflow_guard;
        for _ in 0..n.unsigned_abs() {
            if n > 0 {
                if w.re > guard {
                    return Err(Error::Overflow { argument: w.re, guard });
                }
                w = w.exp();
                deriv *= w;
            } else {
                deriv /= w;
                w = s.log(w)?;
            }
        }
        Ok((w, deriv))
    }
}

impl ExpIterate for Backend {
    /// `exp^(n)(z)`.
    ///
    /// Order zero is the identity for every operand. With the Schröder
    /// backend every integer order is evaluated by direct composition: this
    /// is exact where `chi` carries its `O(r0)` error, and defined on the
    /// singular set where `chi` is not.
    fn iterate(&self, z: Complex64, n: f64) -> Result<Complex64> {
        match self {
            Backend::AbelReal(a) => {
                let x = Self::real_operand(z)?;
                if n == 0.0 {
                    return Ok(z);
                }
                match a.exp_iter(x, n)?.finite() {
                    Some(v) => Ok(Complex64::new(v, 0.0)),
                    None => Err(Error::Domain(format!("exp^({n})({x}) is -inf"))),
                }
            }
            Backend::SchroederComplex(s) => match Self::integer_order(n) {
                Some(0) => Ok(z),
                Some(k) => Ok(Self::compose_integer(s, z, k)?.0),
                None => s.exp_iter(z, n),
            },
        }
    }

    fn iterate_with_grads(&self, z: Complex64, n: f64) -> Result<IterateEval> {
        match self {
            Backend::AbelReal(a) => {
                let x = Self::real_operand(z)?;
                let r = a.dexp_iter(x, n)?;
                let value = if n == 0.0 { z } else { Complex64::new(r.value, 0.0) };
                Ok(IterateEval {
                    value,
                    d_dz: Complex64::new(r.d_dx, 0.0),
                    d_dn: Some(Complex64::new(r.d_dn, 0.0)),
                })
            }
            Backend::SchroederComplex(s) => match Self::integer_order(n) {
                Some(k) => {
                    let (value, d_dz) = Self::compose_integer(s, z, k)?;
                    let d_dn = s.dexp_iter(z, n).ok().map(|r| r.d_dn);
                    Ok(IterateEval { value, d_dz, d_dn })
                }
                None => {
                    let r = s.dexp_iter(z, n)?;
                    Ok(IterateEval { value: r.value, d_dz: r.d_dz, d_dn: Some(r.d_dn) })
                }
            },
        }
    }
}
