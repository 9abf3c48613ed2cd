//! Singularity-aware quadrature.
//!
//! Intervals are integrated by global adaptive bisection. Panels touching a
//! flagged endpoint use the tanh-sinh rule, all others Gauss–Kronrod 15.
//! Node positions are handed to integrands as distances from both interval
//! ends so that endpoint singularities are evaluated without cancellation.

mod circle;
mod disc;
mod divergence;
mod rules;

pub use circle::{integrate_circle, integrate_circle_with, CircleOptions, CirclePoint};
pub use disc::{
    integrate_disc, integrate_disc_region, integrate_disc_with, integrate_fan, DiscOptions,
    reduced_exponent, FanPoint,
};
pub use divergence::{probe_divergence, DivergenceReport, DivergenceVerdict, ProbeConfig};

use crate::loc::Anchor;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Sub};

use rules::{WG, WGK, XGK};

pub trait Quantity:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn mag(&self) -> f64;
    fn is_finite_q(&self) -> bool;
}

impl Quantity for f64 {
    fn zero() -> Self {
        0.0
    }
    fn mag(&self) -> f64 {
        self.abs()
    }
    fn is_finite_q(&self) -> bool {
        self.is_finite()
    }
}

impl Quantity for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn mag(&self) -> f64 {
        self.norm()
    }
    fn is_finite_q(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Boundary singularity: integrand behaves like `|t − t₀|^{−α}` near `t₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityTag {
    pub t: f64,
    pub exponent: f64,
    #[serde(skip, default = "origin_anchor")]
    pub anchor: Anchor,
}

fn origin_anchor() -> Anchor {
    Anchor::at(0.0)
}

impl SingularityTag {
    pub fn at(t: f64, exponent: f64) -> Self {
        let anchor = Anchor::at(t);
        SingularityTag { t: anchor.t, exponent, anchor }
    }

    pub fn at_point(point: Complex64, exponent: f64) -> Self {
        let anchor = Anchor::exact(point);
        SingularityTag { t: anchor.t, exponent, anchor }
    }

    pub fn with_anchor(anchor: Anchor, exponent: f64) -> Self {
        SingularityTag { t: anchor.t, exponent, anchor }
    }

    /// Re-synchronize the anchor after deserialization.
    pub fn normalized(self) -> Self {
        SingularityTag::at(self.t, self.exponent)
    }
}

/// Merge tags closer than `1e−12` in parameter; coincident exponents are combined by `join`.
pub fn merge_tags(tags: &[SingularityTag], join: impl Fn(f64, f64) -> f64) -> Vec<SingularityTag> {
    let mut v: Vec<SingularityTag> = tags.to_vec();
    v.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    let mut out: Vec<SingularityTag> = Vec::new();
    for tag in v {
        if let Some(last) = out.last_mut() {
            if last.anchor.angle_to(&tag.anchor).abs() < 1e-12 {
                last.exponent = join(last.exponent, tag.exponent);
                continue;
            }
        }
        if out.len() > 1 && out[0].anchor.angle_to(&tag.anchor).abs() < 1e-12 {
            out[0].exponent = join(out[0].exponent, tag.exponent);
            continue;
        }
        out.push(tag);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

pub type IntegralEstimate = Estimate<f64>;

impl<T: Quantity> Estimate<T> {
    pub fn zero() -> Self {
        Estimate { value: T::zero(), abs_error: 0.0, evaluations: 0, converged: true }
    }

    pub fn combine(self, other: Estimate<T>) -> Self {
        Estimate {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

/// A node of an interval rule: position and exact distances to both ends.
#[derive(Debug, Clone, Copy)]
pub struct Pos {
    pub x: f64,
    pub from_a: f64,
    pub from_b: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct IntervalOptions {
    pub tol: f64,
    /// Singular-endpoint flags with the declared exponent (0 for a kink or log).
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub max_evals: usize,
    pub parallel: bool,
    /// Absolute error floor.
    pub abs_tol: f64,
}

impl IntervalOptions {
    pub fn new(tol: f64) -> Self {
        IntervalOptions { tol, left: None, right: None, max_evals: 400_000, parallel: false, abs_tol: 0.0 }
    }
    pub fn singular(mut self, left: Option<f64>, right: Option<f64>) -> Self {
        self.left = left;
        self.right = right;
        self
    }
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }
    pub fn max_evals(mut self, n: usize) -> Self {
        self.max_evals = n;
        self
    }
    pub fn abs_tol(mut self, a: f64) -> Self {
        self.abs_tol = a;
        self
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy)]
struct Panel<T> {
    side: Side,
    d0: f64,
    d1: f64,
    de: Option<f64>,
    est: T,
    abs: f64,
    err: f64,
}

struct Ctx<'a, T, F> {
    f: &'a F,
    a: f64,
    b: f64,
    len: f64,
    parallel: bool,
    evals: usize,
    _t: std::marker::PhantomData<T>,
}

impl<'a, T: Quantity, F: Fn(Pos) -> T + Sync> Ctx<'a, T, F> {
    fn pos(&self, side: Side, d: f64) -> Pos {
        match side {
            Side::Left => Pos { x: self.a + d, from_a: d, from_b: self.len - d },
            Side::Right => Pos { x: self.b - d, from_a: self.len - d, from_b: d },
        }
    }

    fn eval_many(&mut self, pts: &[Pos]) -> Vec<T> {
        self.evals += pts.len();
        let f = self.f;
        let clean = |v: T| if v.is_finite_q() { v } else { T::zero() };
        if self.parallel && pts.len() >= 8 {
            pts.par_iter().map(|p| clean(f(*p))).collect()
        } else {
            pts.iter().map(|p| clean(f(*p))).collect()
        }
    }

    fn gk(&mut self, side: Side, d0: f64, d1: f64) -> (T, f64, f64) {
        let c = 0.5 * (d0 + d1);
        let h = 0.5 * (d1 - d0);
        let mut pts = Vec::with_capacity(15);
        pts.push(self.pos(side, c));
        for &x in &XGK[..7] {
            pts.push(self.pos(side, c - h * x));
            pts.push(self.pos(side, c + h * x));
        }
        let v = self.eval_many(&pts);
        let mut k = v[0] * WGK[7];
        let mut g = v[0] * WG[3];
        let mut abs = v[0].mag() * WGK[7];
        for j in 0..7 {
            let s = v[1 + 2 * j] + v[2 + 2 * j];
            k = k + s * WGK[j];
            abs += (v[1 + 2 * j].mag() + v[2 + 2 * j].mag()) * WGK[j];
            if j % 2 == 1 {
                g = g + s * WG[j / 2];
            }
        }
        let mean = k * 0.5;
        let mut asc = (v[0] - mean).mag() * WGK[7];
        for j in 0..7 {
            asc += ((v[1 + 2 * j] - mean).mag() + (v[2 + 2 * j] - mean).mag()) * WGK[j];
        }
        let (k, g, abs, asc) = (k * h, g * h, abs * h, asc * h);
        let mut err = (k - g).mag();
        if asc > 0.0 && err > 0.0 {
            err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
        }
        err = err.max(50.0 * f64::EPSILON * abs);
        (k, abs, err)
    }

    /// Tanh-sinh on `[0, d1]` measured from the singular end, refined to `target`.
    fn de(&mut self, side: Side, d1: f64, alpha: f64, target: f64, rel: f64) -> (T, f64, f64) {
        const TMAX_NEAR: f64 = 6.1;
        const TMAX_FAR: f64 = 3.6;
        let node = |tau: f64| -> (f64, f64) {
            let u = FRAC_PI_2 * tau.sinh();
            let e = (-2.0 * u.abs()).exp();
            let w = d1 * FRAC_PI_2 * tau.cosh() * 2.0 * e / ((1.0 + e) * (1.0 + e));
            let near = if u < 0.0 { d1 * e / (1.0 + e) } else { d1 / (1.0 + e) };
            (near, w)
        };
        let mut sum = T::zero();
        let mut abs = 0.0;
        let mut prev: Option<T> = None;
        let mut last_err = f64::INFINITY;
        let mut tail = T::zero();
        let mut smallest = f64::INFINITY;
        let mut h = 1.0;
        for level in 0..=8 {
            let step = if level == 0 { 1 } else { 2 };
            let start = if level == 0 { 0 } else { 1 };
            let mut taus = Vec::new();
            let mut j = start;
            loop {
                let tau = j as f64 * h;
                if tau > TMAX_NEAR {
                    break;
                }
                taus.push(-tau);
                if j != 0 && tau <= TMAX_FAR {
                    taus.push(tau);
                }
                j += step;
            }
            let nodes: Vec<(f64, f64)> = taus.iter().map(|&t| node(t)).collect();
            let pts: Vec<Pos> = nodes
                .iter()
                .map(|&(near, _)| self.pos(side, near))
                .collect();
            let vals = self.eval_many(&pts);
            for (k, v) in vals.iter().enumerate() {
                let (near, w) = nodes[k];
                sum = sum + *v * w;
                abs += v.mag() * w;
                if near > 0.0 && near < smallest && v.mag() > 0.0 {
                    smallest = near;
                    if alpha > 0.0 && alpha < 1.0 {
                        tail = *v * (near / (1.0 - alpha));
                    }
                }
            }
            let cur = sum * h + tail;
            if let Some(p) = prev {
                last_err = (cur - p).mag();
                let floor = 50.0 * f64::EPSILON * abs * h;
                if level >= 3 && last_err <= target.max(floor).max(rel * cur.mag()) {
                    return (cur, abs * h, last_err.max(floor));
                }
            }
            prev = Some(cur);
            h *= 0.5;
        }
        (prev.unwrap(), abs * h * 2.0, last_err)
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate_interval<T, F>(f: F, a: f64, b: f64, opts: IntervalOptions) -> Estimate<T>
where
    T: Quantity,
    F: Fn(Pos) -> T + Sync,
{
    if !(b > a) {
        return Estimate::zero();
    }
    let len = b - a;
    let half = 0.5 * len;
    let mut ctx = Ctx { f: &f, a, b, len, parallel: opts.parallel, evals: 0, _t: std::marker::PhantomData };
    let mut panels: Vec<Panel<T>> = Vec::new();
    for (side, flag) in [(Side::Left, opts.left), (Side::Right, opts.right)] {
        match flag {
            Some(alpha) => {
                let (est, abs, err) = ctx.de(side, half, alpha, 0.0, 0.1 * opts.tol);
                panels.push(Panel { side, d0: 0.0, d1: half, de: Some(alpha), est, abs, err });
            }
            None => {
                for k in 0..2 {
                    let d0 = half * k as f64 / 2.0;
                    let d1 = half * (k + 1) as f64 / 2.0;
                    let (est, abs, err) = ctx.gk(side, d0, d1);
                    panels.push(Panel { side, d0, d1, de: None, est, abs, err });
                }
            }
        }
    }
    loop {
        let total = panels.iter().fold(T::zero(), |s, p| s + p.est);
        let l1: f64 = panels.iter().map(|p| p.abs).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let target = (opts.tol * total.mag().max(1e-4 * l1)).max(200.0 * f64::EPSILON * l1).max(opts.abs_tol).max(1e-300);
        if err <= target || ctx.evals >= opts.max_evals {
            return Estimate { value: total, abs_error: err, evaluations: ctx.evals, converged: err <= target };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.err > be { (i, p.err) } else { (bi, be) });
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.d0 + p.d1);
        if mid <= p.d0 || mid >= p.d1 {
            let mut p = p;
            p.err = 0.0;
            panels.push(p);
            continue;
        }
        let share = target / (panels.len() + 2) as f64;
        match p.de {
            Some(alpha) if p.d0 == 0.0 => {
                let (est, abs, err) = ctx.de(p.side, mid, alpha, share, 0.1 * opts.tol);
                panels.push(Panel { side: p.side, d0: 0.0, d1: mid, de: Some(alpha), est, abs, err });
            }
            _ => {
                let (est, abs, err) = ctx.gk(p.side, p.d0, mid);
                panels.push(Panel { side: p.side, d0: p.d0, d1: mid, de: None, est, abs, err });
            }
        }
        let (est, abs, err) = ctx.gk(p.side, mid, p.d1);
        panels.push(Panel { side: p.side, d0: mid, d1: p.d1, de: None, est, abs, err });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate_interval(|p: Pos| p.x.powi(6), -1.0, 2.0, IntervalOptions::new(1e-12));
        assert!((e.value - (128.0 + 1.0) / 7.0).abs() < 1e-12);
        assert!(e.converged);
    }

    #[test]
    fn endpoint_power_singularity() {
        let opts = IntervalOptions::new(1e-10).singular(Some(0.75), None);
        let e = integrate_interval(|p: Pos| p.from_a.powf(-0.75), 0.0, 1.0, opts);
        assert!((e.value - 4.0).abs() < 1e-8, "{}", e.value);
    }

    #[test]
    fn near_nonintegrable_exponent_uses_tail() {
        let opts = IntervalOptions::new(1e-10).singular(Some(0.97), None);
        let e = integrate_interval(|p: Pos| p.from_a.powf(-0.97), 0.0, 1.0, opts);
        assert!((e.value / (1.0 / 0.03) - 1.0).abs() < 1e-6, "{}", e.value);
    }

    #[test]
    fn log_singularity_both_ends() {
        let opts = IntervalOptions::new(1e-11).singular(Some(0.0), Some(0.0));
        let e = integrate_interval(|p: Pos| p.from_a.ln() + p.from_b.ln(), 0.0, 1.0, opts);
        assert!((e.value + 2.0).abs() < 1e-9);
    }

    #[test]
    fn complex_values() {
        let e = integrate_interval(
            |p: Pos| Complex64::new(0.0, p.x).exp(),
            0.0,
            std::f64::consts::PI,
            IntervalOptions::new(1e-12),
        );
        assert!((e.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
