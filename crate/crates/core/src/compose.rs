//! Composition operators `C_φ f = f∘φ` on `H^p_u` and their boundedness.

use crate::error::{Error, Result};
use crate::hardy::{membership, HardyFunction, Outcome, Verdict, Witness};
use crate::loc::{wrap_angle, Anchor, Loc};
use crate::measure::BoundaryDensity;
use crate::quad::{CirclePoint, SingularityTag};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Symbol {
    /// `e^{iθ}(z − a)/(1 − āz)`.
    Mobius { a: Complex64, theta: f64 },
    /// `e^{iθ} Π (z − a_j)/(1 − ā_j z)`.
    FiniteBlaschke { zeros: Vec<Complex64>, theta: f64 },
    Monomial { n: u32 },
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Mobius { a, theta } => write!(f, "mobius:{a},{theta}"),
            Symbol::FiniteBlaschke { zeros, theta } => {
                let z: Vec<String> = zeros.iter().map(|a| a.to_string()).collect();
                write!(f, "blaschke:{}@{theta}", z.join(";"))
            }
            Symbol::Monomial { n } => write!(f, "monomial:{n}"),
        }
    }
}

fn parse_real(s: &str) -> Result<f64> {
    let v = crate::expr::parse_complex(s)?;
    if v.im != 0.0 {
        return Err(Error::Parse(format!("'{s}' is not real")));
    }
    Ok(v.re)
}

impl std::str::FromStr for Symbol {
    type Err = Error;

    /// `id`, `rot:<θ>`, `mobius:<a>,<θ>`, `monomial:<n>`, `blaschke:<a1>;<a2>;...[@<θ>]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad symbol '{s}'"));
        if s == "id" || s == "identity" {
            return Ok(Symbol::identity());
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "rot" => Ok(Symbol::Mobius { a: Complex64::new(0.0, 0.0), theta: parse_real(rest)? }),
            "mobius" => {
                let (a, t) = rest.rsplit_once(',').ok_or_else(bad)?;
                Symbol::mobius(crate::expr::parse_complex(a)?, parse_real(t)?)
            }
            "monomial" => {
                let n: u32 = rest.trim().parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(Error::Domain("monomial degree must be >= 1".into()));
                }
                Ok(Symbol::Monomial { n })
            }
            "blaschke" => {
                let (zs, t) = match rest.split_once('@') {
                    Some((z, t)) => (z, parse_real(t)?),
                    None => (rest, 0.0),
                };
                let zeros = zs.split(';').map(crate::expr::parse_complex).collect::<Result<Vec<_>>>()?;
                if zeros.is_empty() || zeros.iter().any(|a| !(a.norm() < 1.0)) {
                    return Err(Error::Domain("Blaschke symbol needs zeros inside the disc".into()));
                }
                Ok(Symbol::FiniteBlaschke { zeros, theta: t })
            }
            _ => Err(bad()),
        }
    }
}

fn mobius_eval(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (one() - a.conj() * z)
}

/// `M_a(z₁) − M_a(z₂)` from `z₁ − z₂` without cancellation.
fn mobius_diff(a: Complex64, z1: Complex64, dz: Complex64) -> Complex64 {
    let z2 = z1 - dz;
    dz * (1.0 - a.norm_sqr()) / ((one() - a.conj() * z1) * (one() - a.conj() * z2))
}

impl Symbol {
    pub fn identity() -> Symbol {
        Symbol::Mobius { a: Complex64::new(0.0, 0.0), theta: 0.0 }
    }

    pub fn mobius(a: Complex64, theta: f64) -> Result<Symbol> {
        if !(a.norm() < 1.0) {
            return Err(Error::Domain(format!("Mobius parameter {a} is not inside the disc")));
        }
        Ok(Symbol::Mobius { a, theta })
    }

    pub fn rotation(theta: f64) -> Symbol {
        Symbol::Mobius { a: Complex64::new(0.0, 0.0), theta }
    }

    pub fn degree(&self) -> usize {
        match self {
            Symbol::Mobius { .. } => 1,
            Symbol::FiniteBlaschke { zeros, .. } => zeros.len(),
            Symbol::Monomial { n } => *n as usize,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Mobius { a, theta } => Complex64::from_polar(1.0, *theta) * mobius_eval(*a, z),
            Symbol::FiniteBlaschke { zeros, theta } => {
                zeros.iter().fold(Complex64::from_polar(1.0, *theta), |acc, &a| acc * mobius_eval(a, z))
            }
            Symbol::Monomial { n } => z.powu(*n),
        }
    }

    pub fn deriv(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Mobius { a, theta } => {
                let den = one() - a.conj() * z;
                Complex64::from_polar(1.0, *theta) * (1.0 - a.norm_sqr()) / (den * den)
            }
            Symbol::FiniteBlaschke { zeros, theta } => {
                let mut v = Complex64::from_polar(1.0, *theta);
                let mut d = Complex64::new(0.0, 0.0);
                for &a in zeros {
                    let den = one() - a.conj() * z;
                    let (fv, fd) = (mobius_eval(a, z), (1.0 - a.norm_sqr()) / (den * den));
                    d = d * fv + v * fd;
                    v *= fv;
                }
                d
            }
            Symbol::Monomial { n } => z.powu(n - 1) * *n as f64,
        }
    }

    /// `φ(z₁) − φ(z₁ − dz)`, accurate for tiny `dz`.
    pub fn difference(&self, z1: Complex64, dz: Complex64) -> Complex64 {
        let z2 = z1 - dz;
        match self {
            Symbol::Mobius { a, theta } => Complex64::from_polar(1.0, *theta) * mobius_diff(*a, z1, dz),
            Symbol::FiniteBlaschke { zeros, theta } => {
                let mut total = Complex64::new(0.0, 0.0);
                for k in 0..zeros.len() {
                    let mut term = Complex64::from_polar(1.0, *theta) * mobius_diff(zeros[k], z1, dz);
                    for &a in &zeros[..k] {
                        term *= mobius_eval(a, z1);
                    }
                    for &a in &zeros[k + 1..] {
                        term *= mobius_eval(a, z2);
                    }
                    total += term;
                }
                total
            }
            Symbol::Monomial { n } => {
                let s: Complex64 = (0..*n).map(|k| z1.powu(k) * z2.powu(n - 1 - k)).sum();
                dz * s
            }
        }
    }

    /// Boundary points `ξ` with `φ(ξ) = η`.
    pub fn preimages(&self, eta: Anchor) -> Vec<Anchor> {
        match self {
            Symbol::Mobius { a, theta } => {
                let w = eta.point * Complex64::from_polar(1.0, -theta);
                let z = (w + a) / (one() + a.conj() * w);
                vec![Anchor::at(z.arg())]
            }
            Symbol::Monomial { n } => {
                let m = *n as f64;
                (0..*n).map(|k| Anchor::at((eta.t + TAU * k as f64) / m)).collect()
            }
            Symbol::FiniteBlaschke { zeros, theta } => blaschke_preimages(zeros, *theta, eta),
        }
    }

    pub fn phi_one(&self) -> Complex64 {
        self.eval(one())
    }

    /// `φ⁻¹` for Möbius symbols.
    pub fn inverse(&self, w: Complex64) -> Option<Complex64> {
        match self {
            Symbol::Mobius { a, theta } => {
                let v = w * Complex64::from_polar(1.0, -theta);
                Some((v + a) / (one() + a.conj() * v))
            }
            _ => None,
        }
    }
}

/// Boundary argument `Θ(s)` of a Blaschke product is increasing with `Θ' = Σ (1 − |a|²)/|e^{is} − a|²`.
fn blaschke_preimages(zeros: &[Complex64], theta: f64, eta: Anchor) -> Vec<Anchor> {
    let arg = |s: f64| {
        let e = Complex64::from_polar(1.0, s);
        zeros.iter().fold(theta, |acc, &a| acc + mobius_eval(a, e).arg())
    };
    let speed = |s: f64| {
        let e = Complex64::from_polar(1.0, s);
        zeros.iter().map(|&a| (1.0 - a.norm_sqr()) / (e - a).norm_sqr()).sum::<f64>()
    };
    let m = 256 * zeros.len().max(1);
    let mut lifted = Vec::with_capacity(m + 1);
    let mut prev = arg(0.0);
    let mut acc = prev;
    lifted.push(acc);
    for k in 1..=m {
        let cur = arg(TAU * k as f64 / m as f64);
        let mut d = cur - prev;
        d -= TAU * (d / TAU).round();
        acc += d;
        lifted.push(acc);
        prev = cur;
    }
    let base = lifted[0];
    let mut out = Vec::new();
    let first = ((base - eta.t) / TAU).ceil();
    for j in 0..zeros.len() {
        let target = eta.t + TAU * (first + j as f64);
        let k = lifted.partition_point(|&v| v < target).clamp(1, m);
        let (mut lo, mut hi) = (TAU * (k - 1) as f64 / m as f64, TAU * k as f64 / m as f64);
        let lift_at = |s: f64, near: f64| {
            let v = arg(s);
            v + TAU * ((near - v) / TAU).round()
        };
        let mut s = 0.5 * (lo + hi);
        for _ in 0..100 {
            let g = lift_at(s, target) - target;
            if g.abs() < 1e-15 {
                break;
            }
            if g > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let newton = s - g / speed(s);
            s = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-16 {
                break;
            }
        }
        out.push(Anchor::at(wrap_angle(s)));
    }
    out
}

/// `f∘φ` with tags transported to the boundary preimages of each tag of `f`.
pub fn compose(f: &HardyFunction, s: &Symbol) -> HardyFunction {
    let mut pairs: Vec<(Anchor, Anchor)> = Vec::new();
    let mut tags = Vec::new();
    for g in &f.tags {
        for xi in s.preimages(g.anchor) {
            pairs.push((xi, g.anchor));
            tags.push(SingularityTag::with_anchor(xi, g.exponent));
        }
    }
    let targets: Vec<Anchor> = f.tags.iter().map(|g| g.anchor).collect();
    let image = {
        let (s, pairs, targets) = (s.clone(), pairs.clone(), targets.clone());
        move |l: &Loc| -> Loc {
            if let Some((a, off)) = l.anchor() {
                if let Some((_, eta)) = pairs.iter().find(|(xi, _)| xi.angle_to(&a).abs() < 1e-15) {
                    let d = s.difference(a.point + off, off);
                    return Loc::near(*eta, d);
                }
            }
            Loc::anchored_among(s.eval(l.z()), &targets)
        }
    };
    let (f1, f2, f3) = (f.clone(), f.clone(), f.clone());
    let (i1, i2) = (image.clone(), image.clone());
    let s2 = s.clone();
    let mut out = HardyFunction::new(&format!("({})∘({s})", f.name), move |l| f1.eval_loc(&i1(l)), tags)
        .with_derivative(move |l| f2.derivative(&image(l)) * s2.deriv(l.z()));
    out = out.with_trace_abs(move |p: &CirclePoint| {
        let w = i2(&p.loc);
        f3.trace_abs(&CirclePoint { t: wrap_angle(w.z().arg()), loc: w })
    });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub symbol: String,
    pub verdict: Verdict,
    pub fixed_point_check: bool,
    pub fixed_point_error: f64,
    /// Max over the base grid of the density ratio (`N/β`, or `β∘φ⁻¹/β` for Möbius symbols).
    pub ratio_sup: f64,
    /// Same with the Jacobian `|(φ⁻¹)'|` (Möbius symbols only).
    pub ratio_sup_jacobian: Option<f64>,
    /// Max over the grid refined twice toward the singular points.
    pub ratio_sup_refined: f64,
    /// Refinement changed the max by less than 10%.
    pub ratio_stable: bool,
    /// Ratio at the finest grid point next to `η = 1`.
    pub ratio_near_one: f64,
    /// `(F ∈ H^p_u, F∘φ ∈ H^p_u)` for the witness `F`.
    pub witness_pair: Option<(Outcome, Outcome)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaGrid {
    pub uniform: usize,
    pub k_min: i32,
    pub k_max: i32,
    /// Extra geometric levels added per refinement.
    pub refine_step: i32,
    pub witness_exponent: f64,
}

impl Default for EtaGrid {
    fn default() -> Self {
        EtaGrid { uniform: 256, k_min: 3, k_max: 20, refine_step: 2, witness_exponent: 0.75 }
    }
}

impl EtaGrid {
    /// Parameters on the circle, geometric toward each of `centres`.
    fn points(&self, centres: &[f64], k_max: i32) -> Vec<f64> {
        let mut ts: Vec<f64> = (0..self.uniform).map(|k| TAU * (k as f64 + 0.5) / self.uniform as f64).collect();
        for &c in centres {
            for k in self.k_min..=k_max {
                let d = 2f64.powi(-k);
                ts.push(c + d);
                ts.push(c - d);
            }
        }
        ts
    }
}

fn fixed_point(s: &Symbol) -> (bool, f64) {
    let e = (s.phi_one() - one()).norm();
    (e < 1e-12, e)
}

fn witness_pair(s: &Symbol, bd: &BoundaryDensity, p: f64, xi: Anchor, e: f64) -> (Outcome, Outcome, Witness) {
    let big_f = HardyFunction::witness(xi, e);
    let composed = compose(&big_f, s);
    let a = membership(&big_f, p, bd);
    let b = membership(&composed, p, bd);
    let w = Witness {
        function: big_f.name.clone(),
        parameter: Some(e),
        report: b.witness.and_then(|w| w.report),
    };
    (a.outcome, b.outcome, w)
}

fn beta_at(bd: &BoundaryDensity, a: Anchor) -> f64 {
    bd.beta_point(&CirclePoint { t: a.t, loc: Loc::on_circle(a, 0.0) })
}

/// Möbius criterion: bounded iff `φ(1) = 1`, corroborated by the density ratio and a witness pair.
pub fn mobius_boundedness(s: &Symbol, bd: &BoundaryDensity, p: f64) -> Result<BoundednessReport> {
    mobius_boundedness_with(s, bd, p, &EtaGrid::default())
}

pub fn mobius_boundedness_with(s: &Symbol, bd: &BoundaryDensity, p: f64, grid: &EtaGrid) -> Result<BoundednessReport> {
    if !matches!(s, Symbol::Mobius { .. }) {
        return Err(Error::Domain(format!("{s} is not a Mobius symbol")));
    }
    let (fixed, err) = fixed_point(s);
    let phi1 = Anchor::exact(s.phi_one() / s.phi_one().norm());
    let ratio = |t: f64, jac: bool| {
        let eta = Anchor::at(t);
        let pre = s.preimages(eta)[0];
        let mut r = beta_at(bd, pre) / beta_at(bd, eta);
        if jac {
            r /= s.deriv(pre.point).norm();
        }
        r
    };
    let centres = [0.0, phi1.t];
    let sup = |k_max: i32, jac: bool| grid.points(&centres, k_max).iter().map(|&t| ratio(t, jac)).fold(0.0, f64::max);
    let base = sup(grid.k_max, false);
    let refined = sup(grid.k_max + 2 * grid.refine_step, false);
    let stable = (refined - base).abs() < 0.1 * base && (sup(grid.k_max + grid.refine_step, false) - base).abs() < 0.1 * base;
    let near_one = ratio(2f64.powi(-grid.k_max), false);
    let jac = sup(grid.k_max, true);
    let mut report = BoundednessReport {
        symbol: s.to_string(),
        verdict: Verdict::holds("phi(1) = 1", None),
        fixed_point_check: fixed,
        fixed_point_error: err,
        ratio_sup: base,
        ratio_sup_jacobian: Some(jac),
        ratio_sup_refined: refined,
        ratio_stable: stable,
        ratio_near_one: near_one,
        witness_pair: None,
    };
    if !fixed {
        let (a, b, w) = witness_pair(s, bd, p, phi1, grid.witness_exponent);
        report.witness_pair = Some((a, b));
        report.verdict = Verdict::fails(w, format!("phi(1) = {} != 1", s.phi_one()));
    }
    if fixed != stable {
        report.verdict.diagnostics.push_str(&format!("; numerical ratio check disagrees (stable = {stable})"));
    }
    Ok(report)
}

/// `N^φ_β(η) = Σ_j β(ξ_j(η))` over the boundary preimages.
pub fn counting_function(s: &Symbol, bd: &BoundaryDensity, eta: Anchor) -> Result<f64> {
    let mut total = 0.0;
    for xi in s.preimages(eta) {
        let d = s.deriv(xi.point).norm();
        if d < 1e-8 {
            return Err(Error::CriticalValue(eta.t));
        }
        total += beta_at(bd, xi);
    }
    Ok(total)
}

/// Counting-function criterion: bounded iff `φ(1) = 1` and `N^φ_β/β` stays bounded near `η = 1`.
pub fn general_boundedness(s: &Symbol, bd: &BoundaryDensity, p: f64, grid: &EtaGrid) -> Result<BoundednessReport> {
    let (fixed, err) = fixed_point(s);
    let phi1 = s.phi_one();
    let mut centres = vec![0.0];
    if !fixed {
        centres.push(wrap_angle(phi1.arg()));
    }
    let ratio = |t: f64| -> Result<f64> {
        let eta = Anchor::at(t);
        Ok(counting_function(s, bd, eta)? / beta_at(bd, eta))
    };
    let sup = |k_max: i32| -> Result<(f64, f64)> {
        let mut best = (0.0, 0.0);
        for t in grid.points(&centres, k_max) {
            let r = ratio(t)?;
            if r > best.0 {
                best = (r, t);
            }
        }
        Ok(best)
    };
    let (base, t_max) = sup(grid.k_max)?;
    let (mid, _) = sup(grid.k_max + grid.refine_step)?;
    let (refined, _) = sup(grid.k_max + 2 * grid.refine_step)?;
    let stable = (refined - base).abs() < 0.1 * base && (mid - base).abs() < 0.1 * base;
    let near_one = ratio(2f64.powi(-grid.k_max))?;
    let mut report = BoundednessReport {
        symbol: s.to_string(),
        verdict: Verdict::holds(format!("phi(1) = 1 and N/beta <= {base:.4} stably"), None),
        fixed_point_check: fixed,
        fixed_point_error: err,
        ratio_sup: base,
        ratio_sup_jacobian: None,
        ratio_sup_refined: refined,
        ratio_stable: stable,
        ratio_near_one: near_one,
        witness_pair: None,
    };
    if !(fixed && stable) {
        let eta0 = if fixed { Anchor::at(t_max) } else { Anchor::exact(phi1 / phi1.norm()) };
        let (a, b, w) = witness_pair(s, bd, p, eta0, grid.witness_exponent);
        report.witness_pair = Some((a, b));
        let why = if fixed { "N/beta is not stable under refinement".to_string() } else { format!("phi(1) = {phi1} != 1") };
        report.verdict = Verdict::fails(w, why);
    }
    Ok(report)
}

/// `(1/2π)∫|φ'(e^{it})| dt`, the degree of an inner symbol.
pub fn boundary_degree(s: &Symbol) -> f64 {
    let e = crate::quad::integrate_circle(|p| s.deriv(p.z()).norm(), &[], 1e-12).map_or(f64::NAN, |e| e.value);
    e / TAU
}

