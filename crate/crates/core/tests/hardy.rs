use num_complex::Complex64;
use psh::exhaustion::{green_exhaustion, paper_exhaustion};
use psh::frame::unit_disc_frame;
use psh::hardy::{
    classical_membership, classical_norm, dilation_approximation, membership, norm_boundary, norm_limit, radial_limit,
    HardyFunction, Outcome,
};
use psh::measure::{BetaGrid, BoundaryDensity};
use psh::{Anchor, Error, Loc};
use std::sync::OnceLock;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn paper_bd() -> &'static BoundaryDensity {
    static BD: OnceLock<BoundaryDensity> = OnceLock::new();
    BD.get_or_init(|| BoundaryDensity::build_with(&paper_exhaustion(), BetaGrid { points: 512, ..Default::default() }).unwrap())
}

fn green_bd() -> BoundaryDensity {
    BoundaryDensity::build(&green_exhaustion(unit_disc_frame(), c(0.0, 0.0)).unwrap()).unwrap()
}

#[test]
fn green_h2_norm_is_parseval() {
    // ‖Σ a_n z^n‖₂² = Σ|a_n|²
    let f = HardyFunction::parse("1+z/2-0.25i*z^3").unwrap();
    let n = norm_boundary(&f, 2.0, &green_bd()).unwrap();
    assert!((n * n - (1.0 + 0.25 + 0.0625)).abs() < 1e-12);
    let e = HardyFunction::parse("exp(z)").unwrap();
    // Σ 1/(n!)² = I₀(2)
    let i0_2 = (0..30).map(|k| (1..=k).map(|j| j as f64).product::<f64>().powi(-2)).sum::<f64>();
    let n = norm_boundary(&e, 2.0, &green_bd()).unwrap();
    assert!((n * n / i0_2 - 1.0).abs() < 1e-12);
}

#[test]
fn classical_norm_agrees_with_green_boundary_norm() {
    let f = HardyFunction::parse("1/(2-z)").unwrap();
    let a = classical_norm(&f, 1.0).unwrap();
    let b = norm_boundary(&f, 1.0, &green_bd()).unwrap();
    assert!((a / b - 1.0).abs() < 1e-8);
}

#[test]
fn norm_limit_equals_norm_boundary() {
    let bd = paper_bd();
    for src in ["1+z/2", "exp(z)", "1/(2-z)"] {
        let f = HardyFunction::parse(src).unwrap();
        for p in [1.0, 2.0] {
            let nb = norm_boundary(&f, p, bd).unwrap();
            let nl = norm_limit(&f, p, &bd.u, &[-0.2, -0.05]).unwrap();
            assert!((nl.value / nb - 1.0).abs() < 1e-3, "{src} p={p}: {} vs {nb}", nl.value);
            assert!(nl.monotone, "{src}: {:?}", nl.schedule);
        }
    }
}

#[test]
fn norm_of_constant_is_mass_power() {
    let bd = paper_bd();
    let f = HardyFunction::constant(c(2.0, 0.0));
    let n = norm_boundary(&f, 1.0, bd).unwrap();
    assert!((n / (2.0 * bd.total_mass) - 1.0).abs() < 1e-6);
}

#[test]
fn strict_inclusion_window() {
    let bd = paper_bd();
    for (q, want) in [(0.1, Outcome::Holds), (0.2, Outcome::Holds), (0.3, Outcome::Fails), (0.45, Outcome::Fails)] {
        let f = HardyFunction::power_of_one_minus(2.0 * q);
        assert_eq!(classical_membership(&f, 1.0).outcome, Outcome::Holds, "q={q}");
        let v = membership(&f, 1.0, bd);
        assert_eq!(v.outcome, want, "q={q}: {}", v.diagnostics);
        if want == Outcome::Fails {
            assert!(v.witness.is_some());
        }
    }
}

#[test]
fn classical_membership_fails_past_one() {
    let f = HardyFunction::power_of_one_minus(1.2);
    assert_eq!(classical_membership(&f, 1.0).outcome, Outcome::Fails);
}

#[test]
fn singularity_away_from_beta_tag_is_classical() {
    // β is bounded near −1, so (1 + z)^{−0.8} keeps its classical status.
    let f = HardyFunction::parse("pow(1+z,-0.8)").unwrap();
    assert_eq!(membership(&f, 1.0, paper_bd()).outcome, Outcome::Holds);
}

#[test]
fn p_below_one_rejected() {
    let f = HardyFunction::parse("1+z").unwrap();
    assert!(matches!(norm_boundary(&f, 0.5, paper_bd()), Err(Error::Domain(_))));
}

#[test]
fn dilation_gaps_decrease() {
    let f = HardyFunction::parse("pow(1+z,-0.25)").unwrap();
    let gaps = dilation_approximation(&f, 1.0, paper_bd(), &[0.9, 0.99, 0.999]).unwrap();
    assert!(gaps.windows(2).all(|w| w[1].1 < w[0].1), "{gaps:?}");
}

#[test]
fn radial_limit_of_smooth_function() {
    let v = radial_limit(|z| z.exp(), c(0.0, 1.0));
    assert!((v - c(0.0, 1.0).exp()).norm() < 1e-12);
}

#[test]
fn derivative_and_modulus_laplacian() {
    let f = HardyFunction::parse("exp(z)*(2+z)").unwrap();
    let z = c(0.3, -0.2);
    let l = Loc::new(z);
    let want = z.exp() * (3.0 + z);
    assert!((f.derivative(&l) - want).norm() < 1e-13);
    // Δ|f|² = 4|f'|²
    let lap = f.modulus_laplacian(&l, 2.0).unwrap();
    assert!((lap / (4.0 * want.norm_sqr()) - 1.0).abs() < 1e-13);
    let h = 1e-3;
    let m = |w: Complex64| f.eval(w).norm();
    let fd = (m(z + h) + m(z - h) + m(z + c(0.0, h)) + m(z - c(0.0, h)) - 4.0 * m(z)) / (h * h);
    assert!((f.modulus_laplacian(&l, 1.0).unwrap() / fd - 1.0).abs() < 1e-5);
}

#[test]
fn witness_tags_its_point() {
    let w = HardyFunction::witness(Anchor::at(1.0), 0.75);
    assert_eq!(w.tags.len(), 1);
    assert!((w.tags[0].t - 1.0).abs() < 1e-15);
    assert!((w.tags[0].exponent - 0.75).abs() < 1e-15);
}
