//! Real iterates of `exp` built on a piecewise solution of Abel's equation
//! `psi(exp(x)) = psi(x) + 1`.
//!
//! `psi(x) = log^(k)(x) + k` where `k` is the number of logarithms needed to
//! bring `x` into `[0, 1)`; negative arguments use `k = -1`, i.e.
//! `psi(x) = exp(x) - 1`. The iterate of order `n` is then
//! `exp^(n)(x) = psi_inv(psi(x) + n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real number or negative infinity.
///
/// `psi_inv` maps every argument `<= -1` to negative infinity; keeping it as
/// a separate variant forces callers to decide what a `-inf` operand means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedReal {
    Finite(f64),
    NegInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::NegInfinity => None,
        }
    }

    pub fn is_neg_infinity(self) -> bool {
        matches!(self, ExtendedReal::NegInfinity)
    }

    /// Lossy conversion to `f64`, mapping `NegInfinity` to `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbelConfig {
    /// Cap on the number of repeated logarithms or exponentials.
    pub max_iter_k: usize,
    /// Largest argument passed to `exp` before evaluation aborts.
    pub overflow_guard: f64,
}

impl Default for AbelConfig {
    fn default() -> Self {
        AbelConfig { max_iter_k: 100, overflow_guard: 7.0e2 }
    }
}

impl AbelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter_k < 1 {
            return Err(Error::InvalidConfig("max_iter_k must be >= 1".into()));
        }
        if !(self.overflow_guard > 0.0 && self.overflow_guard.is_finite()) {
            return Err(Error::InvalidConfig("overflow_guard must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Value and partial derivatives of a real iterate `exp^(n)(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealIterate {
    pub value: f64,
    pub d_dx: f64,
    pub d_dn: f64,
}

/// Evaluator for the real Abel solution. Cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Abel {
    config: AbelConfig,
}

impl Abel {
    pub fn new(config: AbelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Abel { config })
    }

    pub fn config(&self) -> &AbelConfig {
        &self.config
    }

    fn check_finite(x: f64, what: &str) -> Result<()> {
        if x.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} must be finite, got {x}")))
        }
    }

    fn guarded_exp(&self, t: f64) -> Result<f64> {
        if t > self.config.overflow_guard {
            return Err(Error::Overflow { argument: t, guard: self.config.overflow_guard });
        }
        Ok(t.exp())
    }

    /// Splits `p > -1` into `(k, p - k)` with `0 <= p - k < 1`, or `k = -1`
    /// for `p` in `(-1, 0)`.
    fn split_level(&self, p: f64) -> Result<(i64, f64)> {
        if p < 0.0 {
            return Ok((-1, p + 1.0));
        }
        let k = p.floor();
        if k > self.config.max_iter_k as f64 {
            return Err(Error::NoConvergence { what: "psi_inv level", iterations: self.config.max_iter_k });
        }
        Ok((k as i64, p - k))
    }

    /// Abel function `psi(x) = log^(k)(x) + k`.
    pub fn psi(&self, x: f64) -> Result<f64> {
        Self::check_finite(x, "psi argument")?;
        if x < 0.0 {
            return Ok(x.exp() - 1.0);
        }
        let mut t = x;
        let mut k = 0usize;
        while t >= 1.0 {
            if k >= self.config.max_iter_k {
                return Err(Error::NoConvergence { what: "psi level", iterations: k });
            }
            t = t.ln();
            k += 1;
        }
        Ok(t + k as f64)
    }

    /// Inverse of [`Abel::psi`]; arguments `<= -1` map to `NegInfinity`.
    pub fn psi_inv(&self, p: f64) -> Result<ExtendedReal> {
        Self::check_finite(p, "psi_inv argument")?;
        if p <= -1.0 {
            return Ok(ExtendedReal::NegInfinity);
        }
        let (k, mut t) = self.split_level(p)?;
        if k < 0 {
            return Ok(ExtendedReal::Finite(t.ln()));
        }
        for _ in 0..k {
            t = self.guarded_exp(t)?;
        }
        Ok(ExtendedReal::Finite(t))
    }

    /// `psi'(x) = prod_{j<k} 1 / log^(j)(x)`, and `exp(x)` for `x < 0`.
    pub fn dpsi(&self, x: f64) -> Result<f64> {
        Self::check_finite(x, "dpsi argument")?;
        if x < 0.0 {
            return Ok(x.exp());
        }
        let mut t = x;
        let mut prod = 1.0;
        let mut k = 0usize;
        // every factor is 1/t with t >= 1, so the product never blows up
        while t >= 1.0 {
            if k >= self.config.max_iter_k {
                return Err(Error::NoConvergence { what: "dpsi level", iterations: k });
            }
            prod /= t;
            t = t.ln();
            k += 1;
        }
        Ok(prod)
    }

    /// Derivative of `psi_inv` at `p`, defined on `(-1, inf)`.
    ///
    /// For `p >= 0` this is `prod_{j<k} psi_inv(p - j)`, i.e. the product of
    /// the tower `exp^(1)(t), ..., exp^(k)(t)` with `t = p - k`.
    pub fn dpsi_inv(&self, p: f64) -> Result<f64> {
        Self::check_finite(p, "dpsi_inv argument")?;
        if p <= -1.0 {
            return Err(Error::Domain(format!("dpsi_inv requires p > -1, got {p}")));
        }
        let (k, mut t) = self.split_level(p)?;
        if k < 0 {
            return Ok(1.0 / t);
        }
        let mut prod = 1.0;
        for _ in 0..k {
            t = self.guarded_exp(t)?;
            prod *= t;
        }
        Ok(prod)
    }

    /// Real iterate `exp^(n)(x) = psi_inv(psi(x) + n)`.
    pub fn exp_iter(&self, x: f64, n: f64) -> Result<ExtendedReal> {
        Self::check_finite(n, "iteration order")?;
        let p = self.psi(x)? + n;
        self.psi_inv(p)
    }

    /// Value of `exp^(n)(x)` together with its derivatives in `x` and `n`.
    pub fn dexp_iter(&self, x: f64, n: f64) -> Result<RealIterate> {
        Self::check_finite(n, "iteration order")?;
        let p = self.psi(x)? + n;
        let value = match self.psi_inv(p)? {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::NegInfinity => {
                return Err(Error::Domain(format!("exp^({n})({x}) is -inf")));
            }
        };
        let d_dn = self.dpsi_inv(p)?;
        let d_dx = d_dn * self.dpsi(x)?;
        Ok(RealIterate { value, d_dx, d_dn })
    }
}
