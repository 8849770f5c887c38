//! Finite-difference derivative estimates used as an independent check on
//! the analytic derivatives.
//!
//! The Schröder iterates are piecewise: the number of logarithms taken
//! before the orbit enters the `r0` disk changes across thin shells, and the
//! first-order local solution makes the function jump by a relative amount
//! of order `r0` there. A stencil straddling such a seam (or a genuine branch
//! cut) produces a wrong estimate, so every estimate is confirmed against a
//! half-step estimate and retried at other step sizes before it is trusted.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Fourth-order central difference `(f(-2h) - 8f(-h) + 8f(h) - f(2h)) / 12h`
/// of `f(t)` at `t = 0`.
pub fn central5<T, E, F>(f: &mut F, h: f64) -> Result<T, E>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> Result<T, E>,
{
    let m2 = f(-2.0 * h)?;
    let m1 = f(-h)?;
    let p1 = f(h)?;
    let p2 = f(2.0 * h)?;
    Ok(((p1 - m1) * 8.0 + (m2 - p2)) * (1.0 / (12.0 * h)))
}

/// Plain second-order central difference `(f(h) - f(-h)) / 2h`.
pub fn central<T, E, F>(f: &mut F, h: f64) -> Result<T, E>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> Result<T, E>,
{
    let p = f(h)?;
    let m = f(-h)?;
    Ok((p - m) * (1.0 / (2.0 * h)))
}

/// Outcome of a seam-checked finite-difference estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimate<T> {
    /// Step `h` and `h/2` agreed; carries the step-`h` estimate.
    Smooth { value: T, step: f64 },
    /// No tried step produced agreeing estimates: the stencil keeps hitting
    /// a discontinuity.
    Discontinuous { value: T },
    /// `f` failed somewhere on the stencil.
    Failed,
}

impl<T: Copy> Estimate<T> {
    pub fn smooth(&self) -> Option<T> {
        match self {
            Estimate::Smooth { value, .. } => Some(*value),
            _ => None,
        }
    }
}

const STEP_SCALES: [f64; 8] = [1.0, 0.37, 2.3, 0.13, 0.61, 0.07, 1.6, 0.25];

/// Derivative of `f` at `t = 0` with the five-point stencil, accepted when
/// the estimates at `h` and `h/2` agree to `agree_tol` relative.
pub fn checked_derivative<T, E, F>(mut f: F, h: f64, agree_tol: f64) -> Estimate<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Magnitude,
    F: FnMut(f64) -> Result<T, E>,
{
    let mut last = None;
    for scale in STEP_SCALES {
        let step = h * scale;
        let (a, b) = match (central5(&mut f, step), central5(&mut f, 0.5 * step)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        let scale_ab = a.magnitude().max(b.magnitude()).max(1e-300);
        if (a - b).magnitude() <= agree_tol * scale_ab {
            return Estimate::Smooth { value: a, step };
        }
        last = Some(a);
    }
    match last {
        Some(value) => Estimate::Discontinuous { value },
        None => Estimate::Failed,
    }
}

/// Relative error `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_error<T: Copy + Sub<Output = T> + Magnitude>(a: T, b: T, floor: f64) -> f64 {
    (a - b).magnitude() / a.magnitude().max(b.magnitude()).max(floor)
}
