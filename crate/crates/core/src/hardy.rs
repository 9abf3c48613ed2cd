//! Holomorphic functions on the disc and their `H^p_u` and classical `H^p` norms.

use crate::error::{Error, Result};
use crate::exhaustion::Exhaustion;
use crate::expr::Expr;
use crate::frame::ConformalFrame;
use crate::loc::{Anchor, Loc};
use crate::measure::{lelong_jensen_limit, lelong_jensen_with, BoundaryDensity, TestFunction};
use crate::quad::{
    integrate_circle, integrate_circle_with, merge_tags, probe_divergence, CircleOptions, CirclePoint,
    DivergenceReport, DivergenceVerdict, ProbeConfig, SingularityTag,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

type ValueFn = Arc<dyn Fn(&Loc) -> Complex64 + Send + Sync>;
type AbsFn = Arc<dyn Fn(&CirclePoint) -> f64 + Send + Sync>;

/// A holomorphic function on the disc with its boundary behaviour.
///
/// Tags record `|f*(t)| ~ |t − t₀|^{−e}`; exponent 0 marks a point where `f*` is merely non-smooth.
#[derive(Clone)]
pub struct HardyFunction {
    pub name: String,
    value: ValueFn,
    deriv: Option<ValueFn>,
    trace_abs: Option<AbsFn>,
    radial_trace: bool,
    pub tags: Vec<SingularityTag>,
}

impl fmt::Debug for HardyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HardyFunction").field("name", &self.name).field("tags", &self.tags).finish()
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl HardyFunction {
    pub fn new<V>(name: &str, value: V, tags: Vec<SingularityTag>) -> Self
    where
        V: Fn(&Loc) -> Complex64 + Send + Sync + 'static,
    {
        HardyFunction {
            name: name.to_string(),
            value: Arc::new(value),
            deriv: None,
            trace_abs: None,
            radial_trace: false,
            tags,
        }
    }

    pub fn with_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(&Loc) -> Complex64 + Send + Sync + 'static,
    {
        self.deriv = Some(Arc::new(d));
        self
    }

    /// Closed-form `|f*|`, used wherever only the boundary modulus matters.
    pub fn with_trace_abs<A>(mut self, a: A) -> Self
    where
        A: Fn(&CirclePoint) -> f64 + Send + Sync + 'static,
    {
        self.trace_abs = Some(Arc::new(a));
        self
    }

    /// Boundary values only through radial limits (the evaluator is not defined on the circle).
    pub fn with_radial_trace(mut self) -> Self {
        self.radial_trace = true;
        self
    }

    pub fn from_expr(e: Expr) -> Result<Self> {
        if !e.is_holomorphic() {
            return Err(Error::Domain(format!("'{}' is not holomorphic in z", e.source())));
        }
        let tags = e.boundary_tags();
        let (e1, e2) = (e.clone(), e.clone());
        Ok(HardyFunction::new(e.source(), move |l| e1.eval_loc(l), tags)
            .with_derivative(move |l| e2.eval_with_derivative(l).1))
    }

    pub fn parse(s: &str) -> Result<Self> {
        HardyFunction::from_expr(Expr::parse(s)?)
    }

    pub fn constant(v: Complex64) -> Self {
        HardyFunction::new(&format!("{v}"), move |_| v, Vec::new()).with_derivative(|_| c(0.0))
    }

    pub fn monomial(n: u32) -> Self {
        HardyFunction::new(&format!("z^{n}"), move |l| l.z().powu(n), Vec::new()).with_derivative(move |l| {
            if n == 0 {
                c(0.0)
            } else {
                l.z().powu(n - 1) * n as f64
            }
        })
    }

    /// `(ξ − z)^{−e}` for a unit `ξ`, principal branch.
    pub fn witness(xi: Anchor, e: f64) -> Self {
        let name = format!("(e^{{i{}}} - z)^(-{e})", xi.t);
        HardyFunction::new(&name, move |l| l.gap_to(&xi).powf(-e), vec![SingularityTag::with_anchor(xi, e)])
            .with_derivative(move |l| l.gap_to(&xi).powf(-e - 1.0) * e)
    }

    /// `(1 − z)^{−e}`.
    pub fn power_of_one_minus(e: f64) -> Self {
        let mut f = HardyFunction::witness(Anchor::at(0.0), e);
        f.name = format!("(1 - z)^(-{e})");
        f
    }

    /// `exp(−(ξ + z)/(ξ − z))`, the singular inner function of a unit point mass at `ξ`.
    pub fn singular_inner_atom(xi: Anchor) -> Self {
        let v = move |l: &Loc| {
            let g = l.gap_to(&xi);
            (-(xi.point + l.z()) / g).exp()
        };
        let d = move |l: &Loc| {
            let g = l.gap_to(&xi);
            (-(xi.point + l.z()) / g).exp() * (-2.0 * xi.point / (g * g))
        };
        HardyFunction::new(&format!("exp((z + e^{{i{0}}})/(z - e^{{i{0}}}))", xi.t), v, vec![SingularityTag::with_anchor(xi, 0.0)])
            .with_derivative(d)
            .with_trace_abs(|_| 1.0)
    }

    /// `f∘ψ` for an expression `f` in the Ω variable.
    pub fn on_frame(e: Expr, frame: ConformalFrame) -> Result<Self> {
        if frame.is_disc() {
            return HardyFunction::from_expr(e);
        }
        if !e.is_holomorphic() {
            return Err(Error::Domain(format!("'{}' is not holomorphic in z", e.source())));
        }
        let e2 = e.clone();
        let name = format!("({})∘ψ", e.source());
        let e1 = e.clone();
        Ok(HardyFunction::new(&name, move |l| e1.eval(frame.psi(l.z())), Vec::new()).with_derivative(move |l| {
            let w = frame.psi(l.z());
            e2.eval_with_derivative(&Loc::new(w)).1 * frame.psi_prime(l.z())
        }))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.value)(&Loc::new(z))
    }

    pub fn eval_loc(&self, l: &Loc) -> Complex64 {
        (self.value)(l)
    }

    pub fn derivative(&self, l: &Loc) -> Complex64 {
        match &self.deriv {
            Some(d) => d(l),
            None => {
                let h = 1e-5;
                let z = l.z();
                (self.eval(z + h) - self.eval(z - h)) / (2.0 * h)
            }
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    /// Boundary value `f*` at a node; radial Richardson limit when no closed form is available.
    pub fn trace(&self, p: &CirclePoint) -> Complex64 {
        if !self.radial_trace {
            let v = (self.value)(&p.loc);
            if v.re.is_finite() && v.im.is_finite() {
                return v;
            }
        }
        radial_limit(|z| self.eval(z), p.z())
    }

    pub fn trace_at(&self, t: f64) -> Complex64 {
        self.trace(&self.node(t))
    }

    pub fn trace_abs(&self, p: &CirclePoint) -> f64 {
        match &self.trace_abs {
            Some(a) => a(p),
            None => self.trace(p).norm(),
        }
    }

    /// Boundary node at `t`, anchored at the nearest tag.
    pub fn node(&self, t: f64) -> CirclePoint {
        let a = Anchor::at(t);
        let near = self.tags.iter().map(|g| g.anchor).min_by(|x, y| {
            x.chord_to(&a).norm().partial_cmp(&y.chord_to(&a).norm()).unwrap()
        });
        match near {
            Some(g) if g.chord_to(&a).norm() < 0.25 => CirclePoint { t: a.t, loc: Loc::on_circle(g, g.angle_to(&a)) },
            _ => CirclePoint::at(t),
        }
    }

    /// `Δ|f|^p` at an interior point.
    ///
    /// Uses `p²|f|^{p−2}|f'|²` when a derivative is available, otherwise a five-point stencil with `h = 1e−4`.
    /// Returns `None` when the point is within a stencil width of a zero of `f`.
    pub fn modulus_laplacian(&self, l: &Loc, p: f64) -> Option<f64> {
        const H: f64 = 1e-4;
        let v = self.eval_loc(l);
        let a = v.norm();
        if let Some(d) = &self.deriv {
            let fp = d(l);
            if p == 2.0 {
                return Some(4.0 * fp.norm_sqr());
            }
            if a <= 2.0 * H * fp.norm() || a == 0.0 {
                return None;
            }
            return Some(p * p * a.powf(p - 2.0) * fp.norm_sqr());
        }
        let z = l.z();
        let pts = [z + H, z - H, z + Complex64::new(0.0, H), z - Complex64::new(0.0, H)];
        let vals: Vec<Complex64> = pts.iter().map(|&w| self.eval(w)).collect();
        let slope = vals.iter().map(|w| (w - v).norm()).fold(0.0, f64::max);
        if a <= 2.0 * slope || a == 0.0 {
            return None;
        }
        let g = |w: Complex64| w.norm().powf(p);
        Some((vals.iter().map(|&w| g(w)).sum::<f64>() - 4.0 * g(v)) / (H * H))
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        let f = self.clone();
        let g = self.clone();
        let mut out = HardyFunction::new(&format!("{k}*({})", self.name), move |l| f.eval_loc(l) * k, self.tags.clone());
        if self.deriv.is_some() {
            out = out.with_derivative(move |l| g.derivative(l) * k);
        }
        if let Some(a) = self.trace_abs.clone() {
            out = out.with_trace_abs(move |p| a(p) * k.norm());
        }
        out.radial_trace = self.radial_trace;
        out
    }

    pub fn add(&self, other: &HardyFunction) -> Self {
        let (f, g) = (self.clone(), other.clone());
        let (f2, g2) = (self.clone(), other.clone());
        let mut tags = self.tags.clone();
        tags.extend(other.tags.iter().copied());
        let mut out = HardyFunction::new(
            &format!("({}) + ({})", self.name, other.name),
            move |l| f.eval_loc(l) + g.eval_loc(l),
            merge_tags(&tags, f64::max),
        );
        if self.deriv.is_some() && other.deriv.is_some() {
            out = out.with_derivative(move |l| f2.derivative(l) + g2.derivative(l));
        }
        out.radial_trace = self.radial_trace || other.radial_trace;
        out
    }

    pub fn mul(&self, other: &HardyFunction) -> Self {
        let (f, g) = (self.clone(), other.clone());
        let (f2, g2) = (self.clone(), other.clone());
        let (f3, g3) = (self.clone(), other.clone());
        let mut tags = self.tags.clone();
        tags.extend(other.tags.iter().copied());
        let mut out = HardyFunction::new(
            &format!("({}) * ({})", self.name, other.name),
            move |l| f.eval_loc(l) * g.eval_loc(l),
            merge_tags(&tags, |a, b| a + b),
        );
        if self.deriv.is_some() && other.deriv.is_some() {
            out = out.with_derivative(move |l| f2.derivative(l) * g2.eval_loc(l) + f2.eval_loc(l) * g2.derivative(l));
        }
        if self.trace_abs.is_some() || other.trace_abs.is_some() {
            out = out.with_trace_abs(move |p| f3.trace_abs(p) * g3.trace_abs(p));
        }
        out.radial_trace = self.radial_trace || other.radial_trace;
        out
    }

    /// The dilate `f_ρ(z) = f(ρz)`, holomorphic across the circle.
    pub fn dilate(&self, rho: f64) -> Self {
        let f = self.clone();
        let g = self.clone();
        HardyFunction::new(&format!("({})(rho z), rho={rho}", self.name), move |l| f.eval(l.z() * rho), Vec::new())
            .with_derivative(move |l| g.derivative(&Loc::new(l.z() * rho)) * rho)
    }

    /// `|f*|^p` tags.
    pub fn power_tags(&self, p: f64) -> Vec<SingularityTag> {
        self.tags.iter().map(|g| SingularityTag::with_anchor(g.anchor, g.exponent * p)).collect()
    }
}

/// Richardson extrapolation of `f((1 − δ)ξ)` over `δ ∈ {1e−4, 1e−5, 1e−6}`.
pub fn radial_limit(f: impl Fn(Complex64) -> Complex64, xi: Complex64) -> Complex64 {
    let v: Vec<Complex64> = [1e-4, 1e-5, 1e-6].iter().map(|d| f(xi * (1.0 - d))).collect();
    let r1 = (v[1] * 10.0 - v[0]) / 9.0;
    let r2 = (v[2] * 10.0 - v[1]) / 9.0;
    (r2 * 100.0 - r1) / 99.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub function: String,
    pub parameter: Option<f64>,
    pub report: Option<DivergenceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    pub diagnostics: String,
    /// Worst combined boundary exponent of the integrand.
    pub exponent: Option<f64>,
    pub norm: Option<f64>,
}

impl Verdict {
    pub fn holds(diagnostics: impl Into<String>, norm: Option<f64>) -> Self {
        Verdict { outcome: Outcome::Holds, witness: None, diagnostics: diagnostics.into(), exponent: None, norm }
    }

    pub fn fails(witness: Witness, diagnostics: impl Into<String>) -> Self {
        Verdict { outcome: Outcome::Fails, witness: Some(witness), diagnostics: diagnostics.into(), exponent: None, norm: None }
    }

    pub fn inconclusive(diagnostics: impl Into<String>) -> Self {
        Verdict { outcome: Outcome::Inconclusive, witness: None, diagnostics: diagnostics.into(), exponent: None, norm: None }
    }

    pub fn with_exponent(mut self, e: f64) -> Self {
        self.exponent = Some(e);
        self
    }

    pub fn holds_p(&self) -> bool {
        self.outcome == Outcome::Holds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyOptions {
    pub tol: f64,
    /// Combined exponents inside `[1 − w, 1 + w]` are decided by the divergence probe.
    pub probe_window: f64,
}

impl Default for HardyOptions {
    fn default() -> Self {
        HardyOptions { tol: 1e-10, probe_window: 0.1 }
    }
}

fn combined_tags(f: &HardyFunction, p: f64, bd: &BoundaryDensity) -> Vec<SingularityTag> {
    let mut tags = f.power_tags(p);
    tags.extend(bd.tags.iter().copied());
    merge_tags(&tags, |a, b| a + b)
}

fn worst_exponent(tags: &[SingularityTag]) -> f64 {
    tags.iter().map(|g| g.exponent).fold(0.0, f64::max)
}

/// `(∫ |f*|^p β dσ)^{1/p}`.
pub fn norm_boundary(f: &HardyFunction, p: f64, bd: &BoundaryDensity) -> Result<f64> {
    norm_boundary_with(f, p, bd, 1e-10)
}

pub fn norm_boundary_with(f: &HardyFunction, p: f64, bd: &BoundaryDensity, tol: f64) -> Result<f64> {
    check_p(p)?;
    let tags = combined_tags(f, p, bd);
    let e = integrate_circle(|q| f.trace_abs(q).powf(p) * bd.beta_point(q), &tags, tol)?;
    Ok(e.value.powf(1.0 / p))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must be a finite real >= 1, got {p}")));
    }
    Ok(())
}

/// `φ = |f|^p` as a Lelong–Jensen test function; the flag is raised if a stencil meets a zero of `f`.
fn modulus_test_function(f: &HardyFunction, p: f64, flag: Arc<AtomicBool>) -> TestFunction {
    let (f1, f2) = (f.clone(), f.clone());
    TestFunction::new(
        move |l: &Loc| f1.eval_loc(l).norm().powf(p),
        move |l: &Loc| match f2.modulus_laplacian(l, p) {
            Some(v) => v,
            None => {
                flag.store(true, Ordering::Relaxed);
                0.0
            }
        },
    )
    .with_tags(f.power_tags(p))
}

/// Lelong–Jensen evaluation of `‖f‖_{H^p_u}` as `r → 0⁻`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormLimit {
    /// `(μ_u(|f|^p))^{1/p}` from the `r = 0` limit of the Lelong–Jensen formula.
    pub value: f64,
    /// `(r, μ_{u,r}(|f|^p)^{1/p})` along the schedule.
    pub schedule: Vec<(f64, f64)>,
    pub monotone: bool,
    /// Distance from the last schedule value to the limit.
    pub cauchy_gap: f64,
}

pub fn default_r_schedule() -> Vec<f64> {
    (1..=8).map(|k| -(2f64.powi(-k))).collect()
}

pub fn norm_limit(f: &HardyFunction, p: f64, u: &Exhaustion, r_schedule: &[f64]) -> Result<NormLimit> {
    norm_limit_with(f, p, u, r_schedule, 1e-9)
}

pub fn norm_limit_with(f: &HardyFunction, p: f64, u: &Exhaustion, r_schedule: &[f64], tol: f64) -> Result<NormLimit> {
    check_p(p)?;
    let flag = Arc::new(AtomicBool::new(false));
    let phi = modulus_test_function(f, p, flag.clone());
    let limit = lelong_jensen_limit(u, &phi, tol)?;
    let mut schedule = Vec::with_capacity(r_schedule.len());
    for &r in r_schedule {
        let v = lelong_jensen_with(u, r, &phi, tol)?;
        schedule.push((r, v.max(0.0).powf(1.0 / p)));
    }
    if flag.load(Ordering::Relaxed) {
        return Err(Error::StencilNearZero(format!("{} vanishes inside the integration region", f.name)));
    }
    let value = limit.powf(1.0 / p);
    let mut sorted = schedule.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let slack = 1e-7 * value.max(1e-300);
    let monotone = sorted.windows(2).all(|w| w[1].1 >= w[0].1 - slack) && sorted.last().map_or(true, |l| l.1 <= value + slack);
    let cauchy_gap = sorted.last().map_or(0.0, |l| (value - l.1).abs());
    Ok(NormLimit { value, schedule, monotone, cauchy_gap })
}

/// Classical `‖f‖_{H^p} = lim_{r→1} ((1/2π)∫|f(re^{it})|^p dt)^{1/p}`.
pub fn classical_norm(f: &HardyFunction, p: f64) -> Result<f64> {
    let v = classical_membership(f, p);
    match (v.outcome, v.norm) {
        (Outcome::Holds, Some(n)) => Ok(n),
        (Outcome::Fails, _) => Err(Error::NonIntegrable(format!("{} is not in H^{p}: {}", f.name, v.diagnostics))),
        _ => Err(Error::NonIntegrable(format!("H^{p} membership of {} undecided: {}", f.name, v.diagnostics))),
    }
}

fn radial_family(f: &HardyFunction, p: f64) -> impl Fn(f64) -> Result<f64> + Sync + '_ {
    let marks: Vec<SingularityTag> = f.tags.iter().map(|g| SingularityTag::with_anchor(g.anchor, 0.0)).collect();
    move |eps: f64| {
        let r = 1.0 - eps;
        let e = integrate_circle(|q| f.eval(q.z() * r).norm().powf(p), &marks, 1e-11)?;
        Ok(e.value / TAU)
    }
}

pub fn classical_membership(f: &HardyFunction, p: f64) -> Verdict {
    classical_membership_with(f, p, &ProbeConfig::default(), &HardyOptions::default())
}

pub fn classical_membership_with(f: &HardyFunction, p: f64, cfg: &ProbeConfig, opts: &HardyOptions) -> Verdict {
    if let Err(e) = check_p(p) {
        return Verdict::inconclusive(e.to_string());
    }
    let tags = f.power_tags(p);
    let worst = worst_exponent(&tags);
    let boundary = || integrate_circle(|q| f.trace_abs(q).powf(p), &tags, opts.tol).map(|e| (e.value / TAU).powf(1.0 / p));
    if worst < 1.0 - opts.probe_window {
        return match boundary() {
            Ok(n) => Verdict::holds(format!("boundary exponent {worst:.4} < 1"), Some(n)).with_exponent(worst),
            Err(e) => Verdict::inconclusive(e.to_string()).with_exponent(worst),
        };
    }
    let report = probe_divergence(radial_family(f, p), cfg);
    decide(f, worst, report, opts, boundary, |v: f64| v.powf(1.0 / p))
}

fn decide(
    f: &HardyFunction,
    worst: f64,
    report: DivergenceReport,
    opts: &HardyOptions,
    boundary: impl Fn() -> Result<f64>,
    root: impl Fn(f64) -> f64,
) -> Verdict {
    let analytic_fail = worst > 1.0 + opts.probe_window;
    let witness = Witness { function: f.name.clone(), parameter: None, report: Some(report.clone()) };
    match report.verdict {
        DivergenceVerdict::Diverges => Verdict::fails(
            witness,
            format!("partial integrals diverge (slope {:.4}): {}", report.fitted_growth_exponent, report.reason),
        )
        .with_exponent(worst),
        _ if analytic_fail => Verdict::fails(
            witness,
            format!("combined boundary exponent {worst:.4} > 1; probe: {}", report.reason),
        )
        .with_exponent(worst),
        DivergenceVerdict::Converges => {
            let norm = if worst < 1.0 { boundary().ok() } else { None }.or(report.limit_estimate.map(&root));
            let mut v = Verdict::holds(format!("partial integrals converge: {}", report.reason), norm).with_exponent(worst);
            v.witness = Some(witness);
            v
        }
        DivergenceVerdict::Inconclusive => {
            let mut v = Verdict::inconclusive(format!("probe inconclusive: {}", report.reason)).with_exponent(worst);
            v.witness = Some(witness);
            v
        }
    }
}

/// `f ∈ H^p_u` decided from the boundary integrand `|f*|^p β`.
pub fn membership(f: &HardyFunction, p: f64, bd: &BoundaryDensity) -> Verdict {
    membership_with(f, p, bd, &ProbeConfig::default(), &HardyOptions::default())
}

pub fn membership_with(f: &HardyFunction, p: f64, bd: &BoundaryDensity, cfg: &ProbeConfig, opts: &HardyOptions) -> Verdict {
    if let Err(e) = check_p(p) {
        return Verdict::inconclusive(e.to_string());
    }
    let tags = combined_tags(f, p, bd);
    let worst = worst_exponent(&tags);
    let boundary = || norm_boundary_with(f, p, bd, opts.tol);
    if worst < 1.0 - opts.probe_window {
        return match boundary() {
            Ok(n) => Verdict::holds(format!("combined boundary exponent {worst:.4} < 1"), Some(n)).with_exponent(worst),
            Err(e) => Verdict::inconclusive(e.to_string()).with_exponent(worst),
        };
    }
    let family = |eps: f64| {
        let o = CircleOptions::new(1e-11).excluding(eps);
        integrate_circle_with(|q| f.trace_abs(q).powf(p) * bd.beta_point(q), &tags, o).map(|e: crate::quad::Estimate<f64>| e.value)
    };
    let report = probe_divergence(family, cfg);
    decide(f, worst, report, opts, boundary, |v: f64| v.powf(1.0 / p))
}

/// `‖f − f_ρ‖_{H^p_u}` along a dilation schedule.
pub fn dilation_approximation(f: &HardyFunction, p: f64, bd: &BoundaryDensity, rhos: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_p(p)?;
    let tags = combined_tags(f, p, bd);
    rhos.iter()
        .map(|&rho| {
            let g = |q: &CirclePoint| (f.trace(q) - f.eval(q.z() * rho)).norm().powf(p) * bd.beta_point(q);
            let e = integrate_circle(g, &tags, 1e-10)?;
            Ok((rho, e.value.powf(1.0 / p)))
        })
        .collect()
}

pub fn default_rho_schedule() -> Vec<f64> {
    vec![0.9, 0.99, 0.999, 0.9999]
}
