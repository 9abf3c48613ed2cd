use num_complex::Complex64;
use psh::exhaustion::{green_exhaustion, paper_exhaustion};
use psh::frame::{disc_poisson, polynomial_frame, unit_disc_frame};
use psh::measure::{
    lelong_jensen_lhs, lelong_jensen_limit, ma_mass, weak_star_gap, BetaGrid, BoundaryDensity, BoundaryFunction,
    TestFunction,
};
use psh::Loc;
use statrs::function::gamma::gamma;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn paper_bd() -> &'static BoundaryDensity {
    static BD: OnceLock<BoundaryDensity> = OnceLock::new();
    BD.get_or_init(|| BoundaryDensity::build_with(&paper_exhaustion(), BetaGrid { points: 512, ..Default::default() }).unwrap())
}

/// `(1/2π)∫∫(1 − x)^{−5/4} dA = (1/2π)·2∫(1 − x)^{−3/4}(1 + x)^{1/2} dx = 2^{3/4} B(1/4, 3/2) / π`.
fn paper_mass_oracle() -> f64 {
    let b = gamma(0.25) * gamma(1.5) / gamma(1.75);
    2f64.powf(0.75) * b / PI
}

#[test]
fn green_mass_is_one() {
    for w in [c(0.0, 0.0), c(0.3, -0.5)] {
        let u = green_exhaustion(unit_disc_frame(), w).unwrap();
        assert_eq!(ma_mass(&u).unwrap(), 1.0);
    }
}

#[test]
fn paper_mass_matches_oracle() {
    let ma = ma_mass(&paper_exhaustion()).unwrap();
    assert!((ma / paper_mass_oracle() - 1.0).abs() < 1e-8, "{ma}");
    assert!((TAU * ma - 11.7594).abs() < 1e-3);
}

#[test]
fn green_beta_is_poisson_kernel() {
    let w = c(0.4, 0.3);
    let u = green_exhaustion(unit_disc_frame(), w).unwrap();
    let bd = BoundaryDensity::build(&u).unwrap();
    for t in [0.0, 1.0, 2.5, 5.0] {
        // harmonic measure of w against dt: P(w, t) / 2π
        let want = (1.0 - w.norm_sqr()) / (Complex64::from_polar(1.0, t) - w).norm_sqr() / TAU;
        assert!((bd.beta_dt(t) / want - 1.0).abs() < 1e-12);
        assert!((disc_poisson(w, t) / want - 1.0).abs() < 1e-12);
    }
    assert!((bd.integrated_mass().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn paper_beta_integrates_to_mass() {
    let bd = paper_bd();
    let rel = bd.integrated_mass().unwrap() / bd.total_mass - 1.0;
    assert!(rel.abs() < 1e-4, "{rel}");
}

#[test]
fn paper_beta_interpolant_matches_direct() {
    let bd = paper_bd();
    for t in [0.3, 1.0, PI, 4.0, 6.0, 1e-4, TAU - 2e-5] {
        let (i, d) = (bd.beta_dt(t), bd.beta_direct(t));
        assert!((i / d - 1.0).abs() < 1e-3, "t={t}: {i} vs {d}");
    }
}

#[test]
fn paper_beta_is_symmetric_and_singular() {
    let bd = paper_bd();
    for t in [0.01, 0.5, 2.0] {
        assert!((bd.beta_dt(t) / bd.beta_dt(TAU - t) - 1.0).abs() < 1e-6);
    }
    let s = bd.tag_slope().unwrap();
    assert!((s + 0.5).abs() < 0.05, "{s}");
    assert!(bd.beta_dt(1e-6) > bd.beta_dt(1e-4));
}

#[test]
fn lelong_jensen_green_oracle() {
    let u = green_exhaustion(unit_disc_frame(), c(0.0, 0.0)).unwrap();
    let abs2 = TestFunction::new(|l: &Loc| l.z().norm_sqr(), |_| 4.0);
    for r in [-1.0, -0.5, -0.1] {
        let v = lelong_jensen_lhs(&u, r, &abs2).unwrap();
        assert!((v / (2.0 * r).exp() - 1.0).abs() < 1e-8);
    }
    let h = TestFunction::harmonic(|l: &Loc| 3.0 + l.z().re);
    assert!((lelong_jensen_lhs(&u, -0.3, &h).unwrap() - 3.0).abs() < 1e-10);
    assert!(lelong_jensen_lhs(&u, 0.0, &abs2).is_err());
}

#[test]
fn lelong_jensen_limit_recovers_beta_pairing() {
    // For φ = 1 the r → 0 limit is the total mass.
    let u = paper_exhaustion();
    let v = lelong_jensen_limit(&u, &TestFunction::constant(1.0), 1e-9).unwrap();
    assert!((v / paper_mass_oracle() - 1.0).abs() < 1e-7);
    // For φ = |z|² the limit is ∫β dt (|z|² = 1 on the circle) = MA.
    let abs2 = TestFunction::new(|l: &Loc| l.z().norm_sqr(), |_| 4.0);
    let w = lelong_jensen_limit(&u, &abs2, 1e-9).unwrap();
    assert!((w / v - 1.0).abs() < 1e-6);
}

#[test]
fn sphere_measures_increase_to_boundary_value() {
    let u = paper_exhaustion();
    let abs2 = TestFunction::new(|l: &Loc| l.z().norm_sqr(), |_| 4.0);
    let vals: Vec<f64> = [-0.3, -0.1, -0.01].iter().map(|&r| lelong_jensen_lhs(&u, r, &abs2).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
    let lim = lelong_jensen_limit(&u, &abs2, 1e-9).unwrap();
    assert!(vals[2] < lim);
}

#[test]
fn weak_star_gap_shrinks() {
    let bd = paper_bd();
    let phi = BoundaryFunction::with_extension(|t: f64| t.cos(), |l: &Loc| l.z().re);
    let gaps: Vec<f64> = [-0.2, -0.05].iter().map(|&r| weak_star_gap(bd, &phi, r).unwrap()).collect();
    assert!(gaps[1] < gaps[0], "{gaps:?}");
}

#[test]
fn polynomial_frame_green_mass() {
    let fr = polynomial_frame(0.1).unwrap();
    let u = green_exhaustion(fr, c(0.0, 0.0)).unwrap();
    let bd = BoundaryDensity::build(&u).unwrap();
    assert!((bd.integrated_mass().unwrap() - 1.0).abs() < 1e-10);
}
