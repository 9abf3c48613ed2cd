use num_complex::Complex64;
use proptest::prelude::*;
use psh::compose::{boundary_degree, compose, counting_function, general_boundedness, mobius_boundedness, EtaGrid, Symbol};
use psh::exhaustion::paper_exhaustion;
use psh::hardy::{HardyFunction, Outcome};
use psh::measure::{BetaGrid, BoundaryDensity};
use psh::Anchor;
use std::sync::OnceLock;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn paper_bd() -> &'static BoundaryDensity {
    static BD: OnceLock<BoundaryDensity> = OnceLock::new();
    BD.get_or_init(|| BoundaryDensity::build_with(&paper_exhaustion(), BetaGrid { points: 512, ..Default::default() }).unwrap())
}

#[test]
fn symbol_parsing() {
    assert_eq!("id".parse::<Symbol>().unwrap(), Symbol::identity());
    let r: Symbol = "rot:pi/2".parse().unwrap();
    assert!((r.eval(c(1.0, 0.0)) - c(0.0, 1.0)).norm() < 1e-15);
    let m: Symbol = "mobius:0.5,0".parse().unwrap();
    assert!(m.eval(c(0.5, 0.0)).norm() < 1e-15);
    assert_eq!("monomial:2".parse::<Symbol>().unwrap().degree(), 2);
    let b: Symbol = "blaschke:0.3;-0.2i@0.1".parse().unwrap();
    assert_eq!(b.degree(), 2);
    assert!("mobius:1.5,0".parse::<Symbol>().is_err());
    assert!("monomial:0".parse::<Symbol>().is_err());
    assert!("spiral:1".parse::<Symbol>().is_err());
}

#[test]
fn display_round_trips() {
    for s in ["mobius:0.25-0.5i,1.5", "monomial:3", "blaschke:0.3;-0.2i@0.7"] {
        let a: Symbol = s.parse().unwrap();
        let b: Symbol = a.to_string().parse().unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn boundary_degree_counts_zeros() {
    for (s, n) in [("mobius:0.6i,0", 1.0), ("monomial:3", 3.0), ("blaschke:0.3;-0.2i;0.5+0.5i@0", 3.0)] {
        let sym: Symbol = s.parse().unwrap();
        assert!((boundary_degree(&sym) - n).abs() < 1e-9, "{s}");
    }
}

#[test]
fn composition_evaluates_and_moves_tags() {
    let f = HardyFunction::witness(Anchor::at(0.0), 0.5);
    let s = Symbol::rotation(std::f64::consts::FRAC_PI_2);
    let g = compose(&f, &s);
    let z = c(0.2, 0.3);
    assert!((g.eval(z) - f.eval(s.eval(z))).norm() < 1e-14);
    // the pole of F∘φ sits at φ⁻¹(1) = −i
    assert!((g.tags[0].t - 1.5 * std::f64::consts::PI).abs() < 1e-12);
    let m = compose(&f, &Symbol::Monomial { n: 2 });
    assert_eq!(m.tags.len(), 2);
}

#[test]
fn mobius_verdicts() {
    let bd = paper_bd();
    let rot = mobius_boundedness(&Symbol::rotation(std::f64::consts::FRAC_PI_2), bd, 1.0).unwrap();
    assert_eq!(rot.verdict.outcome, Outcome::Fails);
    assert_eq!(rot.witness_pair, Some((Outcome::Holds, Outcome::Fails)));
    assert!(!rot.ratio_stable);
    for s in [Symbol::identity(), Symbol::mobius(c(0.5, 0.0), 0.0).unwrap()] {
        let r = mobius_boundedness(&s, bd, 1.0).unwrap();
        assert_eq!(r.verdict.outcome, Outcome::Holds);
        assert!(r.ratio_stable && r.fixed_point_check);
    }
    // a real-axis Möbius map fixes 1
    let r = mobius_boundedness(&Symbol::mobius(c(-0.7, 0.0), 0.0).unwrap(), bd, 1.0).unwrap();
    assert!(r.fixed_point_check);
    assert!(mobius_boundedness(&Symbol::Monomial { n: 2 }, bd, 1.0).is_err());
}

#[test]
fn monomial_ratio_near_one() {
    let bd = paper_bd();
    let r = general_boundedness(&Symbol::Monomial { n: 2 }, bd, 1.0, &EtaGrid::default()).unwrap();
    assert_eq!(r.verdict.outcome, Outcome::Holds);
    // near η = 1 the preimages are ±√η; β(√η)/β(η) → √2 from the |t|^{−1/2} law
    assert!((r.ratio_near_one - 2f64.sqrt()).abs() < 0.05, "{}", r.ratio_near_one);
}

#[test]
fn counting_function_sums_preimages() {
    let bd = paper_bd();
    let s = Symbol::Monomial { n: 2 };
    let eta = Anchor::at(1.0);
    let n = counting_function(&s, bd, eta).unwrap();
    assert!((n - bd.beta_dt(0.5) - bd.beta_dt(0.5 + std::f64::consts::PI)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn mobius_preimage_maps_back(re in -0.8f64..0.8, im in -0.5f64..0.5, th in 0.0f64..6.28, t in 0.0f64..6.28) {
        let s = Symbol::mobius(c(re, im), th).unwrap();
        let xi = s.preimages(Anchor::at(t))[0];
        prop_assert!((s.eval(xi.point) - Complex64::from_polar(1.0, t)).norm() < 1e-12);
        let w = c(0.3 * re, 0.2);
        prop_assert!((s.eval(s.inverse(w).unwrap()) - w).norm() < 1e-12);
    }

    #[test]
    fn blaschke_preimages_map_back(a in -0.7f64..0.7, b in -0.7f64..0.7, t in 0.0f64..6.28) {
        let s = Symbol::FiniteBlaschke { zeros: vec![c(a, 0.1), c(0.2, b)], theta: 0.4 };
        let pre = s.preimages(Anchor::at(t));
        prop_assert_eq!(pre.len(), 2);
        for xi in pre {
            prop_assert!((s.eval(xi.point) - Complex64::from_polar(1.0, t)).norm() < 1e-10);
        }
    }

    #[test]
    fn difference_is_accurate(t in 0.0f64..6.28, d in 1e-12f64..1e-3) {
        let s = Symbol::FiniteBlaschke { zeros: vec![c(0.3, 0.1), c(-0.2, 0.4)], theta: 0.0 };
        let z1 = Complex64::from_polar(0.9, t);
        let dz = c(d, 0.0);
        let approx = s.deriv(z1) * dz;
        prop_assert!((s.difference(z1, dz) - approx).norm() <= 1e-2 * approx.norm() + 1e-300);
    }
}
