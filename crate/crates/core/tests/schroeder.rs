use iterexp::numdiff::rel_error;
use iterexp::schroeder::uniform_m_grid;
use iterexp::{branch_log, find_fixed_point, Branch, Schroeder, SchroederConfig};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn near_singular(s: &Schroeder, z: Complex64) -> bool {
    s.singular_points().iter().any(|&d| (z - Complex64::new(d, 0.0)).norm() < 1e-3)
}

proptest! {
    #[test]
    fn schroeder_equation(re in -2.0f64..2.0, im in 0.0f64..=2.0) {
        let s = Schroeder::default();
        let z = Complex64::new(re, im);
        prop_assume!(!near_singular(&s, z));
        let lhs = s.chi(z.exp()).unwrap();
        let rhs = s.c() * s.chi(z).unwrap();
        prop_assert!(rel_error(lhs, rhs, 1e-300) < 1e-6);
    }

    #[test]
    fn inverse_after_chi(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let s = Schroeder::default();
        let z = Complex64::new(re, im);
        prop_assume!(!near_singular(&s, z));
        let back = s.chi_inv(s.chi(z).unwrap()).unwrap();
        prop_assert!(rel_error(back, z, 1e-300) < 1e-6, "{z} -> {back}");
    }

    #[test]
    fn fixed_point_does_not_depend_on_branch(beta in -0.99f64..-0.01) {
        let c0 = find_fixed_point(&SchroederConfig::default()).unwrap().c;
        let c = find_fixed_point(&SchroederConfig::with_beta(beta).unwrap()).unwrap().c;
        prop_assert!((c - c0).norm() < 1e-10);
    }

    #[test]
    fn composition_on_the_domain(re in -1.0f64..2.0, im in 0.0f64..2.0, n in -1.0f64..=1.0, m in -1.0f64..=1.0) {
        let s = Schroeder::default();
        let z = Complex64::new(re, im);
        let mut grid = uniform_m_grid(10);
        grid.push(m);
        prop_assume!(s.in_composition_domain(z, &grid, 1e-6).in_domain);
        let lhs = s.exp_iter(s.exp_iter(z, m).unwrap(), n).unwrap();
        let rhs = s.exp_iter(z, n + m).unwrap();
        prop_assert!(rel_error(lhs, rhs, 1e-300) < 1e-5);
    }
}

/// `chi(chi_inv(xi)) = xi` exactly when every intermediate `exp^j(w)`,
/// `j < k`, of the ascent from `w = c^{-k} xi + c` stays in the branch strip,
/// so that each logarithm undoes its exponential.
#[test]
fn one_sided_inverse_condition() {
    let s = Schroeder::default();
    let branch = Branch::default();
    let (c, r0) = (s.c(), s.config().r0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut holds, mut fails) = (0, 0);
    for _ in 0..2000 {
        let xi = Complex64::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let mut k = 0;
        let mut scaled = xi;
        while scaled.norm() > r0 {
            scaled /= c;
            k += 1;
        }
        let mut w = scaled + c;
        let mut in_strip = true;
        for _ in 0..k {
            in_strip &= branch.contains_imag(w.im);
            w = w.exp();
        }
        let Ok(back) = s.chi_inv(xi).and_then(|v| s.chi(v)) else { continue };
        let ok = rel_error(back, xi, 1e-300) < 1e-6;
        assert_eq!(ok, in_strip, "xi = {xi}, round trip {back}");
        if ok {
            holds += 1;
        } else {
            fails += 1;
        }
    }
    assert!(holds > 100 && fails > 100, "{holds} / {fails}");
}

#[test]
fn iterated_log_converges_to_c() {
    let s = Schroeder::default();
    let (c, branch) = (s.c(), Branch::default());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let mut z = Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        if near_singular(&s, z) {
            continue;
        }
        let mut steps = 0;
        while (z - c).norm() >= 1e-10 {
            z = branch_log(z, branch).unwrap();
            steps += 1;
            assert!(steps <= s.config().max_iter, "no convergence");
        }
    }
}

#[test]
fn local_solution_error_scales_with_r0() {
    let points = [Complex64::new(0.5, 0.5), Complex64::new(2.0, -1.0), Complex64::new(-1.5, 2.5), Complex64::new(10.0, 0.3)];
    let spread = |r0: f64| {
        let a = Schroeder::new(SchroederConfig { r0, ..SchroederConfig::default() }).unwrap();
        let b = Schroeder::new(SchroederConfig { r0: r0 / 2.0, ..SchroederConfig::default() }).unwrap();
        points.iter().map(|&z| rel_error(a.chi(z).unwrap(), b.chi(z).unwrap(), 1e-300)).fold(0.0, f64::max)
    };
    let (coarse, fine) = (spread(1e-3), spread(1e-4));
    assert!(coarse < 10.0 * 1e-3 && fine < 10.0 * 1e-4, "{coarse:e} {fine:e}");
    assert!(fine < coarse / 3.0, "{coarse:e} {fine:e}");
}
