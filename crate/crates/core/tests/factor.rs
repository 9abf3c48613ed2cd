use num_complex::Complex64;
use psh::factor::{blaschke_from_zeros, factorize, h2_split, outer_from_modulus, winding_number, zeros_by_newton};
use psh::hardy::HardyFunction;
use psh::quad::CirclePoint;
use psh::Error;
use std::f64::consts::TAU;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn blaschke_is_unimodular_on_circle() {
    let b = blaschke_from_zeros(&[c(0.5, 0.0), c(-0.2, 0.6)]).unwrap();
    for k in 0..16 {
        let z = Complex64::from_polar(1.0, TAU * k as f64 / 16.0);
        assert!((b.eval(z).norm() - 1.0).abs() < 1e-14);
    }
    assert!(b.eval(c(0.5, 0.0)).norm() < 1e-15);
    assert!(blaschke_from_zeros(&[c(1.0, 0.0)]).is_err());
}

#[test]
fn outer_of_constant_modulus() {
    let o = outer_from_modulus(|_: &CirclePoint| 2f64.ln(), &[]).unwrap();
    assert!((o.eval(c(0.3, 0.4)) - c(2.0, 0.0)).norm() < 1e-10);
}

#[test]
fn outer_recovers_zero_free_function() {
    // f = 2 + z is outer; its boundary modulus determines it.
    let f = HardyFunction::parse("2+z").unwrap();
    let f2 = f.clone();
    let o = outer_from_modulus(move |p: &CirclePoint| f2.trace_abs(p).ln(), &[]).unwrap();
    for z in [c(0.0, 0.0), c(0.5, -0.3), c(-0.8, 0.1)] {
        assert!((o.eval(z) - f.eval(z)).norm() < 1e-9);
    }
}

#[test]
fn newton_finds_zeros_with_multiplicity() {
    let f = HardyFunction::parse("(z-0.5)*(z+0.3i)^2*exp(z)").unwrap();
    let zs = zeros_by_newton(&f);
    assert_eq!(zs.len(), 3, "{zs:?}");
    assert_eq!(zs.iter().filter(|z| (*z - c(0.0, -0.3)).norm() < 1e-6).count(), 2);
    assert!(zs.iter().any(|z| (z - c(0.5, 0.0)).norm() < 1e-12));
    assert!(zeros_by_newton(&HardyFunction::parse("exp((z+1)/(z-1))").unwrap()).is_empty());
}

#[test]
fn canonical_factorization_reconstructs() {
    let f = HardyFunction::parse("(z-0.5)/(1-0.5z)*exp((z+1)/(z-1))*(2+z)").unwrap();
    let fac = factorize(&f, &[c(0.5, 0.0)]).unwrap();
    assert!(fac.residual < 1e-8, "{}", fac.residual);
    assert!(fac.singular_sup <= 1.0 + 1e-9);
    // S is the atom exp((z+1)/(z−1)) up to a unimodular constant, O = 2 + z
    let atom = |z: Complex64| ((z + 1.0) / (z - 1.0)).exp();
    let k = fac.singular.eval(c(0.0, 0.0)) / atom(c(0.0, 0.0));
    assert!((k.norm() - 1.0).abs() < 1e-8);
    for z in [c(0.2, 0.1), c(-0.5, 0.6), c(0.9, 0.0)] {
        assert!((fac.singular.eval(z) - k * atom(z)).norm() < 1e-8);
        assert!((fac.outer.eval(z) - (2.0 + z)).norm() < 1e-8);
    }
}

#[test]
fn missing_zero_is_reported() {
    let f = HardyFunction::parse("(z-0.5)*(2+z)").unwrap();
    assert!(matches!(factorize(&f, &[]), Err(Error::ResidualNotInner(_))));
    assert!(matches!(factorize(&f, &[c(0.1, 0.0)]), Err(Error::ResidualNotInner(_))));
}

#[test]
fn zero_function_is_rejected() {
    let f = HardyFunction::parse("0*z").unwrap();
    assert!(matches!(factorize(&f, &[]), Err(Error::ZeroFunction)));
}

#[test]
fn h2_split_multiplies_back() {
    let f = HardyFunction::parse("z*(3+z)").unwrap();
    let (g, h) = h2_split(&f, 1.0, &[c(0.0, 0.0)]).unwrap();
    for z in [c(0.1, 0.2), c(-0.6, 0.3)] {
        assert!((g.eval(z) * h.eval(z) - f.eval(z)).norm() < 1e-9);
    }
    // |h*|² = |f*| on the circle
    let p = CirclePoint::at(1.3);
    assert!((h.trace_abs(&p).powi(2) / f.trace_abs(&p) - 1.0).abs() < 1e-9);
}

#[test]
fn winding_counts_zeros() {
    let w = winding_number(|z| (z - 0.3) * (z + c(0.0, 0.5)), 0.9, 256);
    assert!((w - 2.0).abs() < 1e-9);
    let w = winding_number(|z| ((z + 1.0) / (z - 1.0)).exp(), 0.97, 16384);
    assert!(w.abs() < 1e-9);
}
