//! Monge–Ampère masses, Lelong–Jensen pairings and the boundary density `β`.
//!
//! All masses use `dd^c = (1/2π)Δ·dA`, so the Green exhaustion has unit mass.

use crate::error::{Error, Result};
use crate::exhaustion::{Atom, Exhaustion};
use crate::frame::{disc_poisson, ConformalFrame};
use crate::loc::{wrap_angle, Anchor, Loc};
use crate::quad::{
    integrate_circle, integrate_disc_region, integrate_disc_with, integrate_fan, integrate_interval, merge_tags,
    probe_divergence, reduced_exponent, CirclePoint, DiscOptions, DivergenceVerdict, IntervalOptions, Pos,
    ProbeConfig, SingularityTag,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

type LocFn = Arc<dyn Fn(&Loc) -> f64 + Send + Sync>;

/// A test function `φ` in disc coordinates together with `Δφ` (disc Laplacian of `φ∘ψ`)
/// and the point masses of `dd^c φ`.
#[derive(Clone)]
pub struct TestFunction {
    value: LocFn,
    laplacian: LocFn,
    pub atoms: Vec<Atom>,
    pub tags: Vec<SingularityTag>,
}

impl TestFunction {
    pub fn new<V, L>(value: V, laplacian: L) -> Self
    where
        V: Fn(&Loc) -> f64 + Send + Sync + 'static,
        L: Fn(&Loc) -> f64 + Send + Sync + 'static,
    {
        TestFunction { value: Arc::new(value), laplacian: Arc::new(laplacian), atoms: Vec::new(), tags: Vec::new() }
    }

    pub fn harmonic<V>(value: V) -> Self
    where
        V: Fn(&Loc) -> f64 + Send + Sync + 'static,
    {
        TestFunction::new(value, |_| 0.0)
    }

    pub fn constant(c: f64) -> Self {
        TestFunction::harmonic(move |_| c)
    }

    /// Test function given on Ω; it is pulled back through the frame.
    pub fn on_frame<V, L>(frame: ConformalFrame, value: V, laplacian: L) -> Self
    where
        V: Fn(Complex64) -> f64 + Send + Sync + 'static,
        L: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        TestFunction::new(
            move |l: &Loc| value(frame.psi(l.z())),
            move |l: &Loc| laplacian(frame.psi(l.z())) * frame.psi_prime(l.z()).norm_sqr(),
        )
    }

    pub fn with_atoms(mut self, atoms: Vec<Atom>) -> Self {
        self.atoms = atoms;
        self
    }

    pub fn with_tags(mut self, tags: Vec<SingularityTag>) -> Self {
        self.tags = tags;
        self
    }

    pub fn value(&self, loc: &Loc) -> f64 {
        (self.value)(loc)
    }

    pub fn laplacian(&self, loc: &Loc) -> f64 {
        (self.laplacian)(loc)
    }
}

/// `MA(u) = ∫_Ω dd^c u`: atoms plus `(1/2π)∫ λ̃ dA`.
pub fn ma_mass(u: &Exhaustion) -> Result<f64> {
    ma_mass_with(u, 1e-9, &ProbeConfig::default())
}

pub fn ma_mass_with(u: &Exhaustion, tol: f64, probe: &ProbeConfig) -> Result<f64> {
    let atoms: f64 = u.atoms.iter().map(|a| a.mass).sum();
    if !u.has_density() {
        return Ok(atoms);
    }
    let tags = &u.density_boundary_tags;
    let f = |l: &Loc| u.laplacian_density(l);
    let worst = tags.iter().map(|g| reduced_exponent(g.exponent)).fold(f64::NEG_INFINITY, f64::max);
    let plain = if worst < 0.9 { Some(integrate_disc_with(f, tags, DiscOptions::new(tol))?) } else { None };
    let density = match plain {
        Some(e) if e.converged => e.value,
        _ => {
            let report = probe_divergence(
                |eps| Ok(integrate_disc_with(f, tags, DiscOptions::new(tol).excluding(eps))?.value),
                probe,
            );
            match (report.verdict, report.limit_estimate) {
                (DivergenceVerdict::Converges, Some(v)) => v,
                _ => {
                    return Err(Error::NonIntegrable(format!(
                        "Monge-Ampere mass of {} is infinite: {}",
                        u.name, report.reason
                    )))
                }
            }
        }
    };
    Ok(atoms + density / TAU)
}

/// `∫_{S(r)} φ dμ_{u,r}` evaluated through the Lelong–Jensen right-hand side.
pub fn lelong_jensen_lhs(u: &Exhaustion, r: f64, phi: &TestFunction) -> Result<f64> {
    lelong_jensen_with(u, r, phi, 1e-9)
}

pub fn lelong_jensen_with(u: &Exhaustion, r: f64, phi: &TestFunction, tol: f64) -> Result<f64> {
    if !(r < 0.0) {
        return Err(Error::Domain(format!("level must be negative, got {r}")));
    }
    lelong_jensen_rhs(u, r, phi, tol)
}

/// The `r → 0⁻` limit `∫_Ω φ dd^c u + ∫_Ω (−u) dd^c φ`.
pub fn lelong_jensen_limit(u: &Exhaustion, phi: &TestFunction, tol: f64) -> Result<f64> {
    lelong_jensen_rhs(u, 0.0, phi, tol)
}

fn lelong_jensen_rhs(u: &Exhaustion, r: f64, phi: &TestFunction, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for a in &u.atoms {
        if u.value(&Loc::new(a.at)) < r || u.green_pole() == Some(a.at) {
            total += a.mass * phi.value(&Loc::new(a.at));
        }
    }
    for a in &phi.atoms {
        let ua = u.value(&Loc::new(a.at));
        if ua < r {
            total += a.mass * (r - ua);
        }
    }
    if let Some(pole) = u.green_pole() {
        return Ok(total + green_area_term(pole, r, phi, tol));
    }
    let f = |l: &Loc| {
        let uv = u.value(l);
        let lam = phi.value(l) * u.laplacian_density(l);
        let lap = phi.laplacian(l);
        let second = if lap == 0.0 { 0.0 } else { (r - uv) * lap };
        (lam + second) / TAU
    };
    let mut tags = u.density_boundary_tags.clone();
    tags.extend(phi.tags.iter().copied());
    let tags = merge_tags(&tags, |a, b| a + b);
    let opts = DiscOptions::new(tol);
    let area = if r == 0.0 {
        integrate_disc_with(f, &tags, opts)?
    } else {
        integrate_disc_region(f, |l| u.value(l) - r, &tags, opts)?
    };
    Ok(total + area.value)
}

/// `∫_{B(r)} (r − u) dd^c φ` for `u = log|M_ω|`, in coordinates `ζ = M_{−ω}(ρe^{iθ})`.
fn green_area_term(pole: Complex64, r: f64, phi: &TestFunction, tol: f64) -> f64 {
    let radius = r.exp();
    let one = Complex64::new(1.0, 0.0);
    let k = 1.0 - pole.norm_sqr();
    let outer = |p: Pos| {
        let e = Complex64::from_polar(1.0, p.x);
        let inner = |q: Pos| {
            let rho = q.x;
            let w = e * rho;
            let den = one + pole.conj() * w;
            let zeta = (w + pole) / den;
            let jac = k * k / den.norm_sqr().powi(2);
            let log_rho = if q.from_b < 0.5 * radius { (-q.from_b / radius).ln_1p() + r } else { rho.ln() };
            (r - log_rho) * phi.laplacian(&Loc::new(zeta)) * jac * rho
        };
        integrate_interval(inner, 0.0, radius, IntervalOptions::new(0.1 * tol).singular(Some(0.0), None)).value
    };
    integrate_interval(outer, 0.0, TAU, IntervalOptions::new(tol)).value / TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGrid {
    pub points: usize,
    /// Near-tag tables span distances `[near_min, near_max]` on each side.
    pub near_min: f64,
    pub near_max: f64,
    pub near_per_decade: usize,
    /// Distances used for the exponent fit.
    pub fit_min: f64,
    pub fit_max: f64,
    pub tol: f64,
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid {
            points: 4096,
            near_min: 1e-7,
            near_max: 1e-3,
            near_per_decade: 8,
            fit_min: 1e-6,
            fit_max: 1e-4,
            tol: 1e-9,
        }
    }
}

/// Monotone cubic Hermite interpolant.
#[derive(Debug, Clone)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Pchip {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        for k in 1..n - 1 {
            if s[k - 1] * s[k] > 0.0 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / s[k - 1] + w2 / s[k]);
            }
        }
        let end = |h0: f64, h1: f64, s0: f64, s1: f64| {
            let v = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
            if v * s0 <= 0.0 {
                0.0
            } else if s0 * s1 <= 0.0 && v.abs() > 3.0 * s0.abs() {
                3.0 * s0
            } else {
                v
            }
        };
        if n > 2 {
            d[0] = end(h[0], h[1], s[0], s[1]);
            d[n - 1] = end(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
        } else {
            d[0] = s[0];
            d[1] = s[0];
        }
        Pchip { x, y, d }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (h00, h10) = ((1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s), s * (1.0 - s) * (1.0 - s));
        let (h01, h11) = (s * s * (3.0 - 2.0 * s), s * s * (s - 1.0));
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

/// `log β` against `log d` on one side of a tag; power-law extrapolation below the table.
#[derive(Debug, Clone)]
struct NearTable {
    interp: Pchip,
    slope: f64,
}

impl NearTable {
    fn eval(&self, d: f64) -> f64 {
        let ld = d.ln();
        let (x0, y0) = (self.interp.x[0], self.interp.y[0]);
        if ld < x0 {
            (y0 + self.interp.d[0] * (ld - x0)).exp()
        } else {
            self.interp.eval(ld).exp()
        }
    }
}

/// `β(ξ) = ∫_Ω P(z, ξ) dd^c u(z)`, sampled and interpolated.
#[derive(Debug, Clone)]
pub struct BoundaryDensity {
    pub u: Exhaustion,
    pub frame: ConformalFrame,
    /// Tags of `β` against `dt` with fitted exponents.
    pub tags: Vec<SingularityTag>,
    pub total_mass: f64,
    pub grid: BetaGrid,
    /// Fitted local slopes of `log β` against `log|t − t₀|`, `(left, right)` per tag.
    pub side_slopes: Vec<(f64, f64)>,
    main: Option<Pchip>,
    near: Vec<(NearTable, NearTable)>,
}

/// Density part of `β` against `dt` by the chord-fan quadrature centred at `e^{it}`.
///
/// With `z = ξ(1 − s e^{iγ})`, `P dA = (2cos γ − s)/(2π) ds dγ`.
pub fn beta_density_direct(u: &Exhaustion, center: Anchor, tol: f64) -> f64 {
    if !u.has_density() {
        return 0.0;
    }
    let aims: Vec<Anchor> = u.density_boundary_tags.iter().map(|g| g.anchor).collect();
    let f = |p: &crate::quad::FanPoint| p.s_rem * u.laplacian_density(&p.loc);
    integrate_fan(f, center, &aims, tol, false).value / (TAU * TAU)
}

fn atom_part(atoms: &[Atom], t: f64) -> f64 {
    atoms.iter().map(|a| a.mass * disc_poisson(a.at, t)).sum()
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

impl BoundaryDensity {
    pub fn build(u: &Exhaustion) -> Result<BoundaryDensity> {
        BoundaryDensity::build_with(u, BetaGrid::default())
    }

    pub fn build_with(u: &Exhaustion, grid: BetaGrid) -> Result<BoundaryDensity> {
        let total_mass = ma_mass(u)?;
        let mut bd = BoundaryDensity {
            u: u.clone(),
            frame: u.frame,
            tags: Vec::new(),
            total_mass,
            grid,
            side_slopes: Vec::new(),
            main: None,
            near: Vec::new(),
        };
        if !u.has_density() {
            return Ok(bd);
        }
        let tags = merge_tags(&u.density_boundary_tags, f64::max);
        let direct = |a: Anchor| beta_density_direct(u, a, grid.tol);
        let ts = main_grid(&tags, &grid);
        let lb: Vec<f64> = ts.par_iter().map(|&t| direct(Anchor::at(t)).ln()).collect();
        bd.main = Some(Pchip::new(ts, lb));
        let decades = (grid.near_max / grid.near_min).log10();
        let m = (decades * grid.near_per_decade as f64).round() as usize;
        let ds: Vec<f64> = (0..=m).map(|k| grid.near_min * (grid.near_max / grid.near_min).powf(k as f64 / m as f64)).collect();
        for tag in &tags {
            let side = |sign: f64| {
                let ys: Vec<f64> = ds
                    .par_iter()
                    .map(|&d| {
                        let a = tag.anchor;
                        let c = Anchor::exact(a.point * crate::loc::expm1_i(sign * d) + a.point);
                        let c = Anchor { t: wrap_angle(a.t + sign * d), point: c.point };
                        (direct(c) + atom_part(&u.atoms, c.t)).ln()
                    })
                    .collect();
                let xs: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
                let (fx, fy): (Vec<f64>, Vec<f64>) = xs
                    .iter()
                    .zip(&ys)
                    .filter(|(x, _)| **x >= grid.fit_min.ln() - 1e-9 && **x <= grid.fit_max.ln() + 1e-9)
                    .map(|(x, y)| (*x, *y))
                    .unzip();
                let slope = fit_slope(&fx, &fy);
                NearTable { interp: Pchip::new(xs, ys), slope }
            };
            let (l, r) = (side(-1.0), side(1.0));
            bd.side_slopes.push((l.slope, r.slope));
            bd.tags.push(SingularityTag::with_anchor(tag.anchor, -0.5 * (l.slope + r.slope)));
            bd.near.push((l, r));
        }
        Ok(bd)
    }

    /// `β` against `dt` at a boundary node.
    pub fn beta_point(&self, p: &CirclePoint) -> f64 {
        let atoms = atom_part(&self.u.atoms, p.t);
        let Some(main) = &self.main else { return atoms };
        for (tag, (l, r)) in self.tags.iter().zip(&self.near) {
            let d = p.distance_to(&tag.anchor);
            if d < self.grid.near_max {
                let side = if tag.anchor.angle_to(&Anchor::at(p.t)) < 0.0 { l } else { r };
                return side.eval(d.max(f64::MIN_POSITIVE));
            }
        }
        atoms + main.eval(wrap_angle(p.t)).exp()
    }

    /// `β` against `dt` at parameter `t`.
    pub fn beta_dt(&self, t: f64) -> f64 {
        self.beta_point(&CirclePoint::at(t))
    }

    /// `β` against arc length on `∂Ω`.
    pub fn beta_sigma(&self, t: f64) -> f64 {
        self.beta_dt(t) / self.frame.boundary_point(t).weight
    }

    /// Direct quadrature of `β` against `dt`, bypassing the interpolant.
    pub fn beta_direct(&self, t: f64) -> f64 {
        beta_density_direct(&self.u, Anchor::at(t), self.grid.tol) + atom_part(&self.u.atoms, t)
    }

    /// `∫ β dσ`, which must reproduce `MA(u)`.
    pub fn integrated_mass(&self) -> Result<f64> {
        Ok(integrate_circle(|p| self.beta_point(p), &self.tags, 1e-10)?.value)
    }

    /// Slope of `log β` against `log d`, averaged over both sides of the first tag.
    pub fn tag_slope(&self) -> Option<f64> {
        self.side_slopes.first().map(|(l, r)| 0.5 * (l + r))
    }
}

/// Grid over `[0, 2π)` graded toward the tags, stopping `near_max` short of each.
fn main_grid(tags: &[SingularityTag], grid: &BetaGrid) -> Vec<f64> {
    let n = grid.points;
    if tags.is_empty() {
        let h = TAU / n as f64;
        return (-2..n as i64 + 2).map(|k| k as f64 * h).collect();
    }
    let d0 = grid.near_max * 0.5;
    let m = tags.len();
    let mut ts = Vec::with_capacity(n + 4);
    for i in 0..m {
        let a = tags[i].t;
        let len = if m == 1 { TAU } else { wrap_angle(tags[(i + 1) % m].t - a) };
        let k = ((n as f64) * len / TAU).ceil().max(8.0) as usize;
        for j in 0..=k {
            let s = j as f64 / k as f64;
            ts.push(a + d0 + (len - 2.0 * d0) * 0.5 * (1.0 - (PI * s).cos()));
        }
    }
    let mut out: Vec<f64> = ts.into_iter().map(wrap_angle).collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let first = out[0];
    let last = *out.last().unwrap();
    let mut full = vec![last - TAU];
    full.extend(out);
    full.push(first + TAU);
    full
}

/// A continuous boundary function with its harmonic extension.
#[derive(Clone)]
pub struct BoundaryFunction {
    boundary: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    extension: LocFn,
}

impl BoundaryFunction {
    pub fn with_extension<B, H>(boundary: B, extension: H) -> Self
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        H: Fn(&Loc) -> f64 + Send + Sync + 'static,
    {
        BoundaryFunction { boundary: Arc::new(boundary), extension: Arc::new(extension) }
    }

    /// Extension by numerical Poisson integral.
    pub fn poisson<B>(boundary: B) -> Self
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let b: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(boundary);
        let b2 = b.clone();
        let ext = move |l: &Loc| {
            let z = l.z();
            let tag = [SingularityTag::at(z.arg(), 0.0)];
            integrate_circle(|p| disc_poisson(z, p.t) * b2(p.t), &tag, 1e-11).map_or(f64::NAN, |e| e.value)
        };
        BoundaryFunction { boundary: b, extension: Arc::new(ext) }
    }

    pub fn boundary(&self, t: f64) -> f64 {
        (self.boundary)(t)
    }
}

/// `|μ_{u,r}(H) − ∫ φ β dσ|` with `H` the harmonic extension of `φ`.
pub fn weak_star_gap(bd: &BoundaryDensity, phi: &BoundaryFunction, r: f64) -> Result<f64> {
    let ext = phi.extension.clone();
    let test = TestFunction::harmonic(move |l: &Loc| ext(l));
    let sphere = lelong_jensen_with(&bd.u, r, &test, 1e-9)?;
    let limit = integrate_circle(|p| phi.boundary(p.t) * bd.beta_point(p), &bd.tags, 1e-10)?.value;
    Ok((sphere - limit).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_reproduces_monotone_data() {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let p = Pchip::new(x, y);
        assert!((p.eval(3.0) - 9.0).abs() < 1e-15);
        let v = p.eval(3.5);
        assert!(v > 9.0 && v < 16.0);
    }

    #[test]
    fn main_grid_avoids_tags() {
        let g = BetaGrid { points: 64, ..BetaGrid::default() };
        let ts = main_grid(&[SingularityTag::at(0.0, 0.5)], &g);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert!(ts.iter().all(|t| (t.rem_euclid(TAU)).min(TAU - t.rem_euclid(TAU)) >= 4e-4));
    }
}
