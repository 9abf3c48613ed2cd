//! Canonical factorization `f = B·S·F` on the disc.

use crate::error::{Error, Result};
use crate::hardy::{membership_with, HardyFunction, HardyOptions, Verdict};
use crate::loc::Loc;
use crate::measure::BoundaryDensity;
use crate::quad::{integrate_circle_with, CircleOptions, CirclePoint, Estimate, ProbeConfig, SingularityTag};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, TAU};
use std::sync::Arc;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Finite Blaschke product `e^{iθ} Π (|a|/a)(a − z)/(1 − āz)`, the factor at `a = 0` being `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    pub zeros: Vec<Complex64>,
    pub rotation: Complex64,
}

pub fn blaschke_from_zeros(zeros: &[Complex64]) -> Result<BlaschkeProduct> {
    if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
        return Err(Error::Domain(format!("Blaschke zero {a} is not inside the disc")));
    }
    Ok(BlaschkeProduct { zeros: zeros.to_vec(), rotation: one() })
}

impl BlaschkeProduct {
    fn factor(a: Complex64, z: Complex64) -> (Complex64, Complex64) {
        if a == Complex64::new(0.0, 0.0) {
            return (z, one());
        }
        let u = a / a.norm();
        let den = one() - a.conj() * z;
        let v = (a - z) / den / u;
        let d = -(1.0 - a.norm_sqr()) / (den * den) / u;
        (v, d)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros.iter().fold(self.rotation, |acc, &a| acc * BlaschkeProduct::factor(a, z).0)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let mut v = self.rotation;
        let mut d = Complex64::new(0.0, 0.0);
        for &a in &self.zeros {
            let (fv, fd) = BlaschkeProduct::factor(a, z);
            d = d * fv + v * fd;
            v *= fv;
        }
        d
    }

    pub fn as_hardy(&self) -> HardyFunction {
        let (b1, b2) = (self.clone(), self.clone());
        HardyFunction::new("B", move |l: &Loc| b1.eval(l.z()), Vec::new())
            .with_derivative(move |l: &Loc| b2.derivative(l.z()))
            .with_trace_abs(|_| 1.0)
    }
}

type LogMod = Arc<dyn Fn(&CirclePoint) -> f64 + Send + Sync>;

/// Herglotz transform `(1/2π)∫ (e^{it} + z)/(e^{it} − z) h(t) dt` and its `z`-derivative.
fn herglotz(h: &LogMod, marks: &[SingularityTag], z: Complex64, with_derivative: bool) -> (Complex64, Complex64) {
    let mut tags = marks.to_vec();
    if z.norm() > 0.5 {
        tags.push(SingularityTag::at(z.arg(), 0.0));
    }
    let opts = CircleOptions::new(1e-12).abs_tol(1e-11);
    let v: Estimate<Complex64> = integrate_circle_with(
        |p| {
            let e = p.z();
            (e + z) / (e - z) * h(p)
        },
        &tags,
        opts,
    )
    .unwrap_or(Estimate { value: Complex64::new(f64::NAN, 0.0), abs_error: f64::INFINITY, evaluations: 0, converged: false });
    let d = if with_derivative {
        integrate_circle_with(
            |p| {
                let e = p.z();
                e * 2.0 / ((e - z) * (e - z)) * h(p)
            },
            &tags,
            opts,
        )
        .map_or(Complex64::new(f64::NAN, 0.0), |e: Estimate<Complex64>| e.value)
    } else {
        Complex64::new(0.0, 0.0)
    };
    (v.value / TAU, d / TAU)
}

/// Outer function with boundary modulus `exp(log_modulus)`.
///
/// `tags` describe `|F*| ~ |t − t₀|^{−e}`; their anchors are where the log-modulus is singular.
pub fn outer_from_modulus<H>(log_modulus: H, tags: &[SingularityTag]) -> Result<HardyFunction>
where
    H: Fn(&CirclePoint) -> f64 + Send + Sync + 'static,
{
    let h: LogMod = Arc::new(log_modulus);
    let marks: Vec<SingularityTag> = tags.iter().map(|g| SingularityTag::with_anchor(g.anchor, 0.0)).collect();
    let l1 = integrate_circle_with(|p| h(p).abs(), &marks, CircleOptions::new(1e-10).abs_tol(1e-11))?;
    if !l1.converged || !l1.value.is_finite() {
        return Err(Error::NonIntegrable("log-modulus is not integrable on the circle".into()));
    }
    let (h1, h2, h3) = (h.clone(), h.clone(), h.clone());
    let (m1, m2) = (marks.clone(), marks.clone());
    Ok(HardyFunction::new("F", move |l: &Loc| herglotz(&h1, &m1, l.z(), false).0.exp(), tags.to_vec())
        .with_derivative(move |l: &Loc| {
            let (v, d) = herglotz(&h2, &m2, l.z(), true);
            v.exp() * d
        })
        .with_trace_abs(move |p| h3(p).exp())
        .with_radial_trace())
}

#[derive(Debug, Clone)]
pub struct Factorization {
    pub f: HardyFunction,
    pub blaschke: BlaschkeProduct,
    pub singular: HardyFunction,
    pub outer: HardyFunction,
    /// `max |f − BSF| / (1 + |f|)` over the interior grid.
    pub residual: f64,
    /// `max |S|` over the interior grid.
    pub singular_sup: f64,
}

impl Factorization {
    /// `I = B·S`.
    pub fn inner(&self) -> HardyFunction {
        let mut i = self.blaschke.as_hardy().mul(&self.singular);
        i.name = "B*S".into();
        i
    }
}

/// Interior sample grid: `n_r` radii in `(0, r_max]` times `n_t` angles.
pub fn interior_grid(n_r: usize, n_t: usize, r_max: f64) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(n_r * n_t);
    for i in 1..=n_r {
        let r = r_max * i as f64 / n_r as f64;
        for j in 0..n_t {
            pts.push(Complex64::from_polar(r, TAU * (j as f64 + 0.5 * (i % 2) as f64) / n_t as f64));
        }
    }
    pts
}

/// Winding number of `g` around 0 along `|z| = r`, subdividing steps that turn by more than π/4.
pub fn winding_number(g: impl Fn(Complex64) -> Complex64, r: f64, n: usize) -> f64 {
    fn turn(g: &dyn Fn(Complex64) -> Complex64, r: f64, t0: f64, t1: f64, v0: Complex64, v1: Complex64, depth: u32) -> f64 {
        let d = (v1 / v0).arg();
        let tm = 0.5 * (t0 + t1);
        let vm = g(Complex64::from_polar(r, tm));
        let (d0, d1) = ((vm / v0).arg(), (v1 / vm).arg());
        if depth == 0 || (d.abs() < FRAC_PI_4 && (d0 + d1 - d).abs() < 1e-6) {
            return d;
        }
        turn(g, r, t0, tm, v0, vm, depth - 1) + turn(g, r, tm, t1, vm, v1, depth - 1)
    }
    let mut total = 0.0;
    let mut prev = g(Complex64::new(r, 0.0));
    for k in 1..=n {
        let (t0, t1) = (TAU * (k - 1) as f64 / n as f64, TAU * k as f64 / n as f64);
        let cur = g(Complex64::from_polar(r, t1));
        total += turn(&g, r, t0, t1, prev, cur, 30);
        prev = cur;
    }
    total / TAU
}

/// Zeros of `f` in the disc, repeated by multiplicity, by Newton iteration from a polar seed grid.
pub fn zeros_by_newton(f: &HardyFunction) -> Vec<Complex64> {
    let mut found: Vec<Complex64> = Vec::new();
    for seed in interior_grid(6, 16, 0.97) {
        let mut z = seed;
        for _ in 0..60 {
            let l = Loc::new(z);
            let (v, d) = (f.eval_loc(&l), f.derivative(&l));
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            z -= step;
            if step.norm() < 1e-15 * (1.0 + z.norm()) || !(z.norm() < 1.5) {
                break;
            }
        }
        let scale = 1.0 + f.derivative(&Loc::new(z)).norm();
        if z.norm() < 1.0 - 1e-9
            && f.eval(z).norm() < 1e-12 * scale
            && !found.iter().any(|w| (w - z).norm() < 1e-7)
        {
            for _ in 0..zero_multiplicity(f, z) {
                found.push(z);
            }
        }
    }
    found.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap().then(a.arg().partial_cmp(&b.arg()).unwrap()));
    found
}

/// Multiplicity of a zero at `z` by the argument principle on a small circle; 0 if there is none.
fn zero_multiplicity(f: &HardyFunction, z: Complex64) -> usize {
    let rho = (0.5 * (1.0 - z.norm())).min(1e-3);
    let vals: Vec<Complex64> = (0..=64).map(|k| f.eval(z + Complex64::from_polar(rho, TAU * k as f64 / 64.0))).collect();
    if vals.iter().any(|v| !(v.norm() > 0.0) || !v.re.is_finite() || !v.im.is_finite()) {
        return 0;
    }
    let w: f64 = vals.windows(2).map(|p| (p[1] / p[0]).arg()).sum::<f64>() / TAU;
    w.round().max(0.0) as usize
}

fn log_modulus_of(f: &HardyFunction, scale: f64) -> impl Fn(&CirclePoint) -> f64 + Send + Sync + 'static {
    let f = f.clone();
    move |p: &CirclePoint| scale * f.trace_abs(p).ln()
}

pub fn factorize(f: &HardyFunction, zeros: &[Complex64]) -> Result<Factorization> {
    let probe = interior_grid(4, 8, 0.9);
    if probe.iter().all(|&z| f.eval(z).norm() == 0.0) {
        return Err(Error::ZeroFunction);
    }
    let blaschke = blaschke_from_zeros(zeros)?;
    let outer = outer_from_modulus(log_modulus_of(f, 1.0), &f.tags)?;
    let (f1, b1, o1) = (f.clone(), blaschke.clone(), outer.clone());
    let marks: Vec<SingularityTag> = f.tags.iter().map(|g| SingularityTag::with_anchor(g.anchor, 0.0)).collect();
    let singular = HardyFunction::new("S", move |l: &Loc| f1.eval_loc(l) / (b1.eval(l.z()) * o1.eval_loc(l)), marks)
        .with_trace_abs(|_| 1.0)
        .with_radial_trace();
    let grid = interior_grid(16, 16, 0.95);
    let mut residual: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for &z in &grid {
        let l = Loc::new(z);
        let fv = f.eval_loc(&l);
        let (b, s, o) = (blaschke.eval(z), singular.eval_loc(&l), outer.eval_loc(&l));
        if b.norm() < 1e-8 {
            continue;
        }
        sup = sup.max(s.norm());
        residual = residual.max((fv - b * s * o).norm() / (1.0 + fv.norm()));
    }
    if !(sup <= 1.0 + 1e-6) {
        return Err(Error::ResidualNotInner(format!("|S| reaches {sup:.6} > 1; listed zeros are not zeros of f")));
    }
    let inside = zeros.iter().filter(|a| a.norm() < 0.97).count() as f64;
    let w = winding_number(|z| f.eval(z), 0.97, 16384) - inside;
    if w.abs() > 0.5 {
        return Err(Error::ResidualNotInner(format!("S winds {w:.2} times around 0; zeros of f are missing")));
    }
    Ok(Factorization { f: f.clone(), blaschke, singular, outer, residual, singular_sup: sup })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorVerdicts {
    pub blaschke: Verdict,
    pub singular: Verdict,
    pub outer: Verdict,
}

impl FactorVerdicts {
    pub fn all_hold(&self) -> bool {
        self.blaschke.holds_p() && self.singular.holds_p() && self.outer.holds_p()
    }
}

pub fn factors_in_space(fac: &Factorization, p: f64, bd: &BoundaryDensity) -> FactorVerdicts {
    let cfg = ProbeConfig::default();
    let opts = HardyOptions::default();
    FactorVerdicts {
        blaschke: membership_with(&fac.blaschke.as_hardy(), p, bd, &cfg, &opts),
        singular: membership_with(&fac.singular, p, bd, &cfg, &opts),
        outer: membership_with(&fac.outer, p, bd, &cfg, &opts),
    }
}

/// `f = g·h` with `h` outer, `|h*|^2 = |f*|^p` and `g = I·h^{2/p − 1}`.
pub fn h2_split(f: &HardyFunction, p: f64, zeros: &[Complex64]) -> Result<(HardyFunction, HardyFunction)> {
    let fac = factorize(f, zeros)?;
    let scale_tags = |k: f64| -> Vec<SingularityTag> {
        f.tags.iter().map(|g| SingularityTag::with_anchor(g.anchor, g.exponent * k)).collect()
    };
    let mut h = outer_from_modulus(log_modulus_of(f, 0.5 * p), &scale_tags(0.5 * p))?;
    h.name = "h".into();
    let rest = outer_from_modulus(log_modulus_of(f, 1.0 - 0.5 * p), &scale_tags((1.0 - 0.5 * p).max(0.0)))?;
    let mut g = fac.inner().mul(&rest);
    g.name = "g".into();
    g.tags = scale_tags((1.0 - 0.5 * p).max(0.0));
    for z in interior_grid(4, 12, 0.9) {
        let l = Loc::new(z);
        let (fv, gh) = (f.eval_loc(&l), g.eval_loc(&l) * h.eval_loc(&l));
        if !((fv - gh).norm() <= 1e-8 * (1.0 + fv.norm())) {
            return Err(Error::Branch(format!("f and g*h differ by {:.3e} at {z}", (fv - gh).norm())));
        }
    }
    Ok((g, h))
}

