//! Complex iterates of `exp` from a solution of Schröder's equation
//! `chi(exp(z)) = c * chi(z)`, where `c = exp(c)` is the fixed point of `exp`
//! closest to the real axis in the upper half-plane.
//!
//! Near `c`, `exp` acts like the affine map `z -> c*z + c - c^2`, so
//! `chi(z) = z - c` inside a disk of radius `r0`. Everywhere else `chi` is
//! continued by iterating the logarithm until the orbit enters that disk:
//! `chi(z) = c^k (log^(k)(z) - c)`. The logarithm uses the branch with
//! imaginary part in `[beta, beta + 2*pi)`, `-1 < beta < 0`, for which the
//! iterated logarithm converges to `c` from both half-planes.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Branch of the complex logarithm with `Im log z` in `[beta, beta + 2*pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Branch {
    beta: f64,
}

impl Default for Branch {
    fn default() -> Self {
        Branch { beta: -0.5 }
    }
}

impl TryFrom<f64> for Branch {
    type Error = Error;

    fn try_from(beta: f64) -> Result<Self> {
        Branch::new(beta)
    }
}

impl From<Branch> for f64 {
    fn from(b: Branch) -> f64 {
        b.beta
    }
}

impl Branch {
    /// Only `-1 < beta < 0` guarantees that iterated logarithms converge to `c`.
    pub fn new(beta: f64) -> Result<Self> {
        if beta > -1.0 && beta < 0.0 {
            Ok(Branch { beta })
        } else {
            Err(Error::InvalidConfig(format!("branch beta must lie in (-1, 0), got {beta}")))
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when `im` lies in the imaginary strip of this branch.
    pub fn contains_imag(&self, im: f64) -> bool {
        im >= self.beta && im < self.beta + TAU
    }

    /// Wraps an angle into `[beta, beta + 2*pi)`.
    pub fn wrap_angle(&self, theta: f64) -> f64 {
        let mut t = theta;
        while t < self.beta {
            t += TAU;
        }
        while t >= self.beta + TAU {
            t -= TAU;
        }
        t
    }

    /// Logarithm on this branch. Fails for zero and non-finite arguments.
    pub fn log(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("log of non-finite value {z}")));
        }
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::Domain("log of zero".into()));
        }
        Ok(Complex64::new(z.norm().ln(), self.wrap_angle(z.arg())))
    }
}

/// Free-function form of [`Branch::log`].
pub fn branch_log(z: Complex64, branch: Branch) -> Result<Complex64> {
    branch.log(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchroederConfig {
    pub branch: Branch,
    /// Radius of the disk around `c` where `chi(z) = z - c`.
    pub r0: f64,
    /// Cap on iterated logs / exps and on fixed-point iterations.
    pub max_iter: usize,
    /// Iterates closer than this to zero count as hitting the singular set.
    pub singular_eps: f64,
    /// Largest real part passed to `exp` before evaluation aborts.
    pub overflow_guard: f64,
}

impl Default for SchroederConfig {
    fn default() -> Self {
        SchroederConfig {
            branch: Branch::default(),
            r0: 1e-6,
            max_iter: 200,
            singular_eps: 1e-12,
            overflow_guard: 7.0e2,
        }
    }
}

impl SchroederConfig {
    pub fn with_beta(beta: f64) -> Result<Self> {
        Ok(SchroederConfig { branch: Branch::new(beta)?, ..Default::default() })
    }

    pub fn validate(&self) -> Result<()> {
        // |c| ~ 1.374 is the distance from c to the nearest singular point 0
        if !(self.r0 > 0.0 && self.r0 < 1.3) {
            return Err(Error::InvalidConfig(format!("r0 must lie in (0, 1.3), got {}", self.r0)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.singular_eps > 0.0 && self.singular_eps < 1e-3) {
            return Err(Error::InvalidConfig("singular_eps must lie in (0, 1e-3)".into()));
        }
        if !(self.overflow_guard > 0.0 && self.overflow_guard.is_finite()) {
            return Err(Error::InvalidConfig("overflow_guard must be positive and finite".into()));
        }
        // re-validate the branch in case it was built field by field
        Branch::new(self.branch.beta)?;
        Ok(())
    }
}

/// Fixed point `c = exp(c)` located by iterating the logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub c: Complex64,
    /// `|exp(c) - c|`
    pub residual: f64,
    pub iterations: usize,
}

const FIXED_POINT_STEP_TOL: f64 = 1e-15;
const FIXED_POINT_RESIDUAL_TOL: f64 = 1e-12;

/// Iterates `z <- log z` from `1 + i` until successive iterates agree to
/// `1e-15` or `max_iter` is reached.
pub fn find_fixed_point(config: &SchroederConfig) -> Result<FixedPoint> {
    config.validate()?;
    let mut z = Complex64::new(1.0, 1.0);
    let mut iterations = 0;
    while iterations < config.max_iter {
        let next = config.branch.log(z)?;
        iterations += 1;
        let step = (next - z).norm();
        z = next;
        if step < FIXED_POINT_STEP_TOL {
            break;
        }
    }
    let residual = (z.exp() - z).norm();
    if residual >= FIXED_POINT_RESIDUAL_TOL || z.im <= 0.0 {
        return Err(Error::NoConvergence { what: "fixed point of exp", iterations });
    }
    Ok(FixedPoint { c: z, residual, iterations })
}

/// Value and derivatives of a complex iterate `exp^(n)(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexIterate {
    pub value: Complex64,
    pub d_dz: Complex64,
    pub d_dn: Complex64,
}

/// Outcome of testing whether non-integer iterates compose at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionDomainReport {
    pub point: Complex64,
    pub in_domain: bool,
    /// Largest relative error of `chi(chi_inv(c^m xi)) = c^m xi` over the samples.
    pub max_round_trip_error: f64,
    pub m_samples: Vec<f64>,
    /// Evaluation failure that forced `in_domain = false`, if any.
    pub error: Option<Error>,
}

/// Below this fraction of `|c|`, orbits near `c` are carried as offsets from
/// `c` so that `w - c` never suffers cancellation.
const NEAR_C: f64 = 0.25;

/// `log(1 + u)` on the principal branch, accurate for small `u`.
fn ln_1p(u: Complex64) -> Complex64 {
    let re = 0.5 * (u.re * (2.0 + u.re) + u.im * u.im).ln_1p();
    Complex64::new(re, u.im.atan2(1.0 + u.re))
}

/// `exp(u) - 1`, accurate for small `u`.
fn exp_m1(u: Complex64) -> Complex64 {
    let half = (0.5 * u.im).sin();
    Complex64::new(u.re.exp_m1() * u.im.cos() - 2.0 * half * half, u.re.exp() * u.im.sin())
}

/// Orbit of the iterated logarithm down into the `r0` disk.
struct Descent {
    /// `log^(k)(z) - c`, at most `r0` in modulus
    d: Complex64,
    /// `c^k`
    c_pow: Complex64,
    /// `prod_{j<k} c / log^(j)(z)`
    deriv: Complex64,
}

/// Orbit of `exp` from the `r0` disk back out.
struct Ascent {
    value: Complex64,
    /// `c^{-k} prod_{i=1..k} exp^(i)(w)`
    deriv: Complex64,
}

/// Schröder-equation evaluator: a validated config plus its fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct Schroeder {
    config: SchroederConfig,
    fixed: FixedPoint,
    log_c: Complex64,
}

impl Default for Schroeder {
    fn default() -> Self {
        Schroeder::new(SchroederConfig::default()).expect("default Schröder config is valid")
    }
}

impl Schroeder {
    pub fn new(config: SchroederConfig) -> Result<Self> {
        let fixed = find_fixed_point(&config)?;
        let log_c = config.branch.log(fixed.c)?;
        Ok(Schroeder { config, fixed, log_c })
    }

    pub fn config(&self) -> &SchroederConfig {
        &self.config
    }

    pub fn fixed_point(&self) -> &FixedPoint {
        &self.fixed
    }

    pub fn c(&self) -> Complex64 {
        self.fixed.c
    }

    /// `log c` on the configured branch.
    pub fn log_c(&self) -> Complex64 {
        self.log_c
    }

    /// `c^n = exp(n log c)`, single-valued through the configured branch.
    pub fn c_pow(&self, n: f64) -> Complex64 {
        (self.log_c * n).exp()
    }

    /// Branch logarithm that treats arguments within `singular_eps` of zero
    /// as hitting the singular set.
    pub fn log(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() < self.config.singular_eps {
            return Err(Error::Domain(format!("log argument {z} is within singular_eps of 0")));
        }
        self.config.branch.log(z)
    }

    fn exp_guarded(&self, w: Complex64) -> Result<Complex64> {
        if w.re > self.config.overflow_guard {
            return Err(Error::Overflow { argument: w.re, guard: self.config.overflow_guard });
        }
        Ok(w.exp())
    }

    /// Finite points of the singular set `{0, 1, e, e^e, ...}`: the points
    /// whose logarithm orbit hits zero, up to the overflow guard.
    pub fn singular_points(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        let mut d = 0.0f64;
        while d <= self.config.overflow_guard {
            d = d.exp();
            pts.push(d);
        }
        pts
    }

    fn descend(&self, z: Complex64) -> Result<Descent> {
        let c = self.fixed.c;
        let mut w = z;
        // `d = w - c`, tracked directly near `c` to avoid cancellation
        let mut d = z - c;
        let mut k = 0usize;
        let mut c_pow = Complex64::new(1.0, 0.0);
        let mut deriv = Complex64::new(1.0, 0.0);
        while d.norm() > self.config.r0 {
            if k >= self.config.max_iter {
                return Err(Error::NoConvergence { what: "iterated log towards c", iterations: k });
            }
            deriv *= c / w;
            if d.norm() < NEAR_C * c.norm() {
                // log(c (1 + u)) = c + log(1 + u) since log c = c
                d = ln_1p(d / c);
                w = c + d;
            } else {
                w = self.log(w)?;
                d = w - c;
            }
            c_pow *= c;
            k += 1;
        }
        Ok(Descent { d, c_pow, deriv })
    }

    fn ascend(&self, xi: Complex64) -> Result<Ascent> {
        if !(xi.re.is_finite() && xi.im.is_finite()) {
            return Err(Error::Domain(format!("chi_inv of non-finite value {xi}")));
        }
        let c = self.fixed.c;
        let mut s = xi;
        let mut k = 0usize;
        let mut inv_c_pow = Complex64::new(1.0, 0.0);
        while s.norm() > self.config.r0 {
            if k >= self.config.max_iter {
                return Err(Error::NoConvergence { what: "chi_inv level", iterations: k });
            }
            s /= c;
            inv_c_pow /= c;
            k += 1;
        }
        // `u = w - c`, tracked directly near `c` as in `descend`
        let mut u = s;
        let mut w = c + u;
        let mut deriv = inv_c_pow;
        for _ in 0..k {
            if u.norm() < NEAR_C * c.norm() {
                // exp(c + u) = c e^u since exp c = c
                u = c * exp_m1(u);
                w = c + u;
            } else {
                w = self.exp_guarded(w)?;
                u = w - c;
            }
            deriv *= w;
        }
        Ok(Ascent { value: w, deriv })
    }

    /// `chi(z) = c^k (log^(k)(z) - c)` with the smallest `k` that lands in
    /// the `r0` disk.
    pub fn chi(&self, z: Complex64) -> Result<Complex64> {
        let d = self.descend(z)?;
        Ok(d.c_pow * d.d)
    }

    /// `chi_inv(xi) = exp^(k)(c^{-k} xi + c)` with the smallest `k` such that
    /// `|c^{-k} xi| <= r0`.
    pub fn chi_inv(&self, xi: Complex64) -> Result<Complex64> {
        Ok(self.ascend(xi)?.value)
    }

    /// `chi'(z) = prod_{j<k} c / log^(j)(z)`.
    pub fn dchi(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.descend(z)?.deriv)
    }

    /// Derivative of `chi_inv` at `xi`.
    pub fn dchi_inv(&self, xi: Complex64) -> Result<Complex64> {
        Ok(self.ascend(xi)?.deriv)
    }

    /// Complex iterate `exp^(n)(z) = chi_inv(c^n chi(z))`.
    pub fn exp_iter(&self, z: Complex64, n: f64) -> Result<Complex64> {
        if !n.is_finite() {
            return Err(Error::Domain(format!("iteration order must be finite, got {n}")));
        }
        let xi = self.chi(z)?;
        self.chi_inv(self.c_pow(n) * xi)
    }

    /// `exp^(n)(z)` with `d/dz = c^n chi_inv'(c^n chi) chi'(z)` and
    /// `d/dn = c^n chi_inv'(c^n chi) chi(z) log c`.
    pub fn dexp_iter(&self, z: Complex64, n: f64) -> Result<ComplexIterate> {
        if !n.is_finite() {
            return Err(Error::Domain(format!("iteration order must be finite, got {n}")));
        }
        let d = self.descend(z)?;
        let xi = d.c_pow * d.d;
        let cn = self.c_pow(n);
        let up = self.ascend(cn * xi)?;
        let outer = cn * up.deriv;
        Ok(ComplexIterate {
            value: up.value,
            d_dz: outer * d.deriv,
            d_dn: outer * xi * self.log_c,
        })
    }

    /// Checks `chi(chi_inv(c^m chi(z))) = c^m chi(z)` for every `m` in
    /// `m_grid`; the point belongs to the composition domain when the largest
    /// relative error stays within `tol`.
    pub fn in_composition_domain(&self, z: Complex64, m_grid: &[f64], tol: f64) -> CompositionDomainReport {
        let mut report = CompositionDomainReport {
            point: z,
            in_domain: false,
            max_round_trip_error: 0.0,
            m_samples: m_grid.to_vec(),
            error: None,
        };
        let xi = match self.chi(z) {
            Ok(xi) => xi,
            Err(e) => {
                report.max_round_trip_error = f64::INFINITY;
                report.error = Some(e);
                return report;
            }
        };
        for &m in m_grid {
            let target = self.c_pow(m) * xi;
            let back = self.chi_inv(target).and_then(|u| self.chi(u));
            match back {
                Ok(b) => {
                    let err = (b - target).norm() / target.norm().max(f64::MIN_POSITIVE);
                    if err > report.max_round_trip_error || err.is_nan() {
                        report.max_round_trip_error = err;
                    }
                }
                Err(e) => {
                    report.max_round_trip_error = f64::INFINITY;
                    report.error = Some(e);
                    return report;
                }
            }
        }
        report.in_domain = report.max_round_trip_error <= tol;
        report
    }
}

/// `k + 1` evenly spaced samples covering `[-1, 1]`.
pub fn uniform_m_grid(k: usize) -> Vec<f64> {
    let k = k.max(1);
    (0..=k).map(|i| -1.0 + 2.0 * i as f64 / k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::checked_derivative;
    use std::f64::consts::{E, PI};

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
    }

    /// Seam-checked five-point difference along direction `dir`.
    fn fd(f: impl Fn(Complex64) -> Complex64, z: Complex64, dir: Complex64, h: f64) -> Complex64 {
        let est = checked_derivative(|t| Ok::<_, ()>(f(z + dir * t)), h, 3e-6);
        est.smooth().expect("stencil keeps straddling a seam") / dir
    }

    #[test]
    fn branch_log_examples() {
        let b = Branch::new(-0.5).unwrap();
        let l = b.log(cx(E, 0.0)).unwrap();
        assert!(rel(l, cx(1.0, 0.0)) < 1e-15);
        let l = b.log(cx(-1.0, 0.0)).unwrap();
        assert!((l - cx(0.0, PI)).norm() < 1e-15);
        assert!(rel(l.exp(), cx(-1.0, 0.0)) < 1e-12);
        let angle = b.beta() - 0.1;
        let z = cx(0.0, angle).exp();
        let l = b.log(z).unwrap();
        assert!((l - cx(0.0, angle + TAU)).norm() < 1e-12);
        assert!(rel(l.exp(), z) < 1e-12);
        assert!(matches!(b.log(cx(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn branch_rejects_out_of_range_beta() {
        assert!(Branch::new(-1.0).is_err());
        assert!(Branch::new(0.0).is_err());
        assert!(Branch::new(-PI).is_err());
        assert!(Branch::new(-0.999).is_ok());
    }

    #[test]
    fn fixed_point_matches_reported_value() {
        let fp = find_fixed_point(&SchroederConfig::default()).unwrap();
        assert!((fp.c.re - 0.318132).abs() < 1e-5);
        assert!((fp.c.im - 1.33724).abs() < 1e-5);
        assert!(fp.residual < 1e-12);
        assert!((fp.c.norm() - 1.374).abs() < 1e-3);
        assert!((fp.c.arg().to_degrees() - 76.6).abs() < 0.1);
    }

    #[test]
    fn fixed_point_fails_with_too_few_iterations() {
        let cfg = SchroederConfig { max_iter: 5, ..Default::default() };
        assert!(matches!(find_fixed_point(&cfg), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn log_of_c_is_c() {
        let s = Schroeder::default();
        assert!((s.log_c() - s.c()).norm() < 1e-12);
    }

    #[test]
    fn chi_examples() {
        let s = Schroeder::default();
        let c = s.c();
        let r0 = s.config().r0;
        assert_eq!(s.chi(c).unwrap(), cx(0.0, 0.0));
        let half = cx(r0 / 2.0, 0.0);
        assert!(rel(s.chi(c + half).unwrap(), half) < 1e-9);
        // exp(c + r0/2) lies within r0 of c, where chi is the first-order
        // local solution; equality with c * r0/2 holds to O(r0)
        let z = (c + half).exp();
        assert!(rel(s.chi(z).unwrap(), c * half) < 1e-6);
        // far enough out that one logarithm is needed
        let d = cx(0.9 * r0, 0.0);
        let z = (c + d).exp();
        assert!((z - c).norm() > r0);
        let lhs = s.chi(z).unwrap();
        let rhs = c * s.chi(c + d).unwrap();
        assert!(rel(lhs, rhs) < 1e-9);
    }

    #[test]
    fn chi_rejects_singular_set() {
        let s = Schroeder::default();
        for p in s.singular_points() {
            if p > 1e3 {
                continue;
            }
            assert!(matches!(s.chi(cx(p, 0.0)), Err(Error::Domain(_))), "chi({p}) should fail");
        }
    }

    #[test]
    fn singular_points_are_the_exp_tower() {
        let s = Schroeder::default();
        let pts = s.singular_points();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[1], 1.0);
        assert!((pts[2] - E).abs() < 1e-15);
        assert!((pts[3] - E.powf(E)).abs() < 1e-12);
    }

    #[test]
    fn chi_inv_examples() {
        let s = Schroeder::default();
        let c = s.c();
        let r0 = s.config().r0;
        assert_eq!(s.chi_inv(cx(0.0, 0.0)).unwrap(), c);
        let z = cx(1.0, PI);
        assert!(rel(s.chi_inv(s.chi(z).unwrap()).unwrap(), z) < 1e-10);
        let half = cx(r0 / 2.0, 0.0);
        assert!(rel(s.chi_inv(c * half).unwrap(), (c + half).exp()) < 1e-12);
    }

    #[test]
    fn dchi_examples() {
        let s = Schroeder::default();
        let c = s.c();
        let r0 = s.config().r0;
        let half = cx(r0 / 2.0, 0.0);
        assert_eq!(s.dchi(c + half).unwrap(), cx(1.0, 0.0));
        assert!(rel(s.dchi((c + half).exp()).unwrap(), c / (c + half)) < 1e-6);
        let d = cx(0.9 * r0, 0.0);
        let z = (c + d).exp();
        assert!(rel(s.dchi(z).unwrap(), c / z) < 1e-12);

        let z = cx(1.0, PI);
        let chi = |z| s.chi(z).unwrap();
        let num = fd(chi, z, cx(1.0, 0.0), 3e-3);
        assert!(rel(s.dchi(z).unwrap(), num) < 1e-5);
        let num = fd(chi, z, cx(0.0, 1.0), 3e-3);
        assert!(rel(s.dchi(z).unwrap(), num) < 1e-5);
    }

    #[test]
    fn dchi_inv_examples() {
        let s = Schroeder::default();
        let c = s.c();
        let r0 = s.config().r0;
        assert_eq!(s.dchi_inv(cx(r0 / 2.0, 0.0)).unwrap(), cx(1.0, 0.0));
        let z = cx(1.0, PI);
        let xi = s.chi(z).unwrap();
        assert!(rel(s.dchi_inv(xi).unwrap(), 1.0 / s.dchi(z).unwrap()) < 1e-10);
        let xi = c * cx(r0 / 2.0, 0.0);
        let num = fd(|x| s.chi_inv(x).unwrap(), xi, cx(1.0, 0.0), r0 * 1e-3);
        assert!(rel(s.dchi_inv(xi).unwrap(), num) < 1e-5);
    }

    #[test]
    fn exp_iter_examples() {
        let s = Schroeder::default();
        let z = cx(1.0, PI);
        assert!(rel(s.exp_iter(z, 0.0).unwrap(), z) < 1e-10);
        assert!(rel(s.exp_iter(z, 1.0).unwrap(), cx(-E, 0.0)) < 1e-6);
        assert!(rel(s.exp_iter(z, -1.0).unwrap(), s.config().branch.log(z).unwrap()) < 1e-6);

        let z = cx(0.5, 0.5);
        let report = s.in_composition_domain(z, &uniform_m_grid(20), 1e-6);
        assert!(report.in_domain, "{report:?}");
        let twice = s.exp_iter(s.exp_iter(z, 0.5).unwrap(), 0.5).unwrap();
        assert!(rel(twice, z.exp()) < 1e-6);
    }

    #[test]
    fn dexp_iter_matches_finite_differences() {
        let s = Schroeder::default();
        let z = cx(0.5, 0.5);
        let n = 0.3;
        let r = s.dexp_iter(z, n).unwrap();
        assert!(rel(r.value, s.exp_iter(z, n).unwrap()) < 1e-15);
        let f = |z| s.exp_iter(z, n).unwrap();
        assert!(rel(r.d_dz, fd(f, z, cx(1.0, 0.0), 3e-3)) < 1e-5);
        assert!(rel(r.d_dz, fd(f, z, cx(0.0, 1.0), 3e-3)) < 1e-5);
        let g = |m: Complex64| s.exp_iter(z, m.re).unwrap();
        assert!(rel(r.d_dn, fd(g, cx(n, 0.0), cx(1.0, 0.0), 3e-3)) < 1e-5);

        for z in [cx(0.5, 0.5), cx(-1.2, 0.7), cx(2.0, 1.0)] {
            let one = s.dexp_iter(z, 1.0).unwrap();
            assert!(rel(one.d_dz, z.exp()) < 1e-6);
            let zero = s.dexp_iter(z, 0.0).unwrap();
            assert!(rel(zero.d_dz, cx(1.0, 0.0)) < 1e-6);
        }
    }

    #[test]
    fn composition_domain_examples() {
        let s = Schroeder::default();
        let grid = uniform_m_grid(20);
        let near_c = s.c() + cx(s.config().r0 / 2.0, 0.0);
        assert!(s.in_composition_domain(near_c, &grid, 1e-6).in_domain);
        let showcase = s.in_composition_domain(cx(1.0, PI), &grid, 1e-6);
        assert!(showcase.max_round_trip_error.is_finite());
        assert_eq!(showcase.m_samples.len(), 21);
        let zero = s.in_composition_domain(cx(1e-14, 0.0), &grid, 1e-6);
        assert!(!zero.in_domain);
        assert!(matches!(zero.error, Some(Error::Domain(_))));
    }
}
