use super::{integrate_interval, merge_tags, Estimate, IntervalOptions, Pos, SingularityTag};
use crate::error::{Error, Result};
use crate::loc::{wrap_diff, Anchor, Loc};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy)]
pub struct DiscOptions {
    pub tol: f64,
    /// Drop the strip `1 − x < ε` in coordinates rotated to the first tag.
    pub exclusion: Option<f64>,
    pub parallel: bool,
}

impl DiscOptions {
    pub fn new(tol: f64) -> Self {
        DiscOptions { tol, exclusion: None, parallel: true }
    }
    pub fn excluding(mut self, eps: f64) -> Self {
        self.exclusion = Some(eps);
        self
    }
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }
}

/// Exponent of the x-marginal of a density `(1 − x)^{−α}` near its tag.
pub fn reduced_exponent(alpha: f64) -> f64 {
    alpha - 0.5
}

struct Frame {
    rot: Option<Anchor>,
    breaks: Vec<f64>,
    alpha: f64,
}

impl Frame {
    fn new(tags: &[SingularityTag]) -> Frame {
        let tags = merge_tags(tags, f64::max);
        match tags.first() {
            None => Frame { rot: None, breaks: Vec::new(), alpha: 0.0 },
            Some(first) => {
                let mut breaks: Vec<f64> = tags[1..]
                    .iter()
                    .map(|g| first.anchor.angle_to(&g.anchor).cos())
                    .filter(|x| x.abs() < 1.0 - 1e-12)
                    .collect();
                breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
                breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
                Frame { rot: Some(first.anchor), breaks, alpha: first.exponent }
            }
        }
    }

    /// Point with rotated coordinates `x + iy`, given `1 − x` exactly.
    fn loc(&self, x: f64, one_minus_x: f64, y: f64) -> Loc {
        match self.rot {
            Some(a) => Loc::near(a, a.point * Complex64::new(-one_minus_x, y)),
            None => Loc::new(Complex64::new(x, y)),
        }
    }

    fn panels(&self, eps: f64) -> Vec<(f64, f64)> {
        let mut pts = vec![-1.0];
        pts.extend(self.breaks.iter().copied().filter(|&b| b < 1.0 - eps));
        pts.push(1.0 - eps);
        pts.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

fn check_integrable(tags: &[SingularityTag], excluded: bool) -> Result<()> {
    if excluded {
        return Ok(());
    }
    if let Some(bad) = tags.iter().find(|g| reduced_exponent(g.exponent) >= 1.0) {
        return Err(Error::NonIntegrable(format!(
            "density tag at t={} with exponent {} has reduced exponent >= 1",
            bad.t, bad.exponent
        )));
    }
    Ok(())
}

pub fn integrate_disc<F>(f: F, tags: &[SingularityTag], tol: f64) -> Result<Estimate<f64>>
where
    F: Fn(&Loc) -> f64 + Sync,
{
    integrate_disc_with(f, tags, DiscOptions::new(tol))
}

/// Iterated integral over `x ∈ (−1, 1)`, `|y| < √(1 − x²)` in coordinates rotated so the first tag sits at `x = 1`.
pub fn integrate_disc_with<F>(f: F, tags: &[SingularityTag], opts: DiscOptions) -> Result<Estimate<f64>>
where
    F: Fn(&Loc) -> f64 + Sync,
{
    check_integrable(tags, opts.exclusion.is_some())?;
    let frame = Frame::new(tags);
    let eps = opts.exclusion.unwrap_or(0.0);
    let inner_tol = 0.1 * opts.tol;
    let inner_flags = if frame.breaks.is_empty() { None } else { Some(0.0) };
    let mut total = Estimate::zero();
    let panels = frame.panels(eps);
    let last = panels.len() - 1;
    for (k, &(xl, xr)) in panels.iter().enumerate() {
        let right_gap = if k == last { eps } else { 1.0 - xr };
        let left_gap = 1.0 + xl;
        let outer = |p: Pos| {
            let omx = right_gap + p.from_b;
            let opx = left_gap + p.from_a;
            let s = (omx * opx).sqrt();
            let x = 1.0 - omx;
            let inner = |q: Pos| f(&frame.loc(x, omx, q.x));
            integrate_interval(inner, -s, s, IntervalOptions::new(inner_tol).singular(inner_flags, inner_flags)).value
        };
        let right_alpha = if k == last && eps == 0.0 {
            reduced_exponent(frame.alpha).max(0.0)
        } else {
            0.0
        };
        let o = IntervalOptions::new(opts.tol)
            .singular(Some(0.0), Some(right_alpha))
            .parallel(opts.parallel);
        total = total.combine(integrate_interval(outer, xl, xr, o));
    }
    Ok(total)
}

/// Sub-intervals of `(lo, hi)` where `g < 0`, found by sampling plus a local minimum search.
fn negative_runs(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    const N: usize = 48;
    let xs: Vec<f64> = (0..=N).map(|k| lo + (hi - lo) * k as f64 / N as f64).collect();
    let mut vs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut xs = xs;
    if vs.iter().all(|&v| v >= 0.0) {
        let (imin, _) = vs
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
        let a = xs[imin.saturating_sub(1)];
        let b = xs[(imin + 1).min(N)];
        let (xm, vm) = golden_min(g, a, b);
        if vm >= 0.0 {
            return Vec::new();
        }
        let pos = xs.partition_point(|&x| x < xm);
        xs.insert(pos, xm);
        vs.insert(pos, vm);
    }
    let mut runs = Vec::new();
    let mut start: Option<f64> = if vs[0] < 0.0 { Some(xs[0]) } else { None };
    for k in 1..xs.len() {
        let (a, b) = (xs[k - 1], xs[k]);
        if (vs[k - 1] < 0.0) != (vs[k] < 0.0) {
            let r = bisect_root(g, a, b, vs[k - 1]);
            if vs[k] < 0.0 {
                start = Some(r);
            } else if let Some(s) = start.take() {
                runs.push((s, r));
            }
        }
    }
    if let Some(s) = start {
        runs.push((s, *xs.last().unwrap()));
    }
    runs
}

fn bisect_root(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let neg_a = ga < 0.0;
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (g(m) < 0.0) == neg_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn golden_min(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..60 {
        if gc < 0.0 {
            return (c, gc);
        }
        if gd < 0.0 {
            return (d, gd);
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    if gc < gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// `∫ f dA` over the region `{level < 0}` of the disc.
pub fn integrate_disc_region<F, L>(f: F, level: L, tags: &[SingularityTag], opts: DiscOptions) -> Result<Estimate<f64>>
where
    F: Fn(&Loc) -> f64 + Sync,
    L: Fn(&Loc) -> f64 + Sync,
{
    check_integrable(tags, opts.exclusion.is_some())?;
    let frame = Frame::new(tags);
    let inner_tol = 0.1 * opts.tol;
    let chord_runs = |x: f64, omx: f64| -> Vec<(f64, f64)> {
        let s = (omx * (2.0 - omx)).sqrt();
        let g = |y: f64| level(&frame.loc(x, omx, y));
        let lo = -s * (1.0 - 1e-12);
        negative_runs(&g, lo, -lo)
    };
    let hits = |x: f64| !chord_runs(x, 1.0 - x).is_empty();
    const M: usize = 256;
    let xs: Vec<f64> = (0..=M).map(|k| -1.0 + 2.0 * k as f64 / M as f64).collect();
    let flags: Vec<bool> = {
        use rayon::prelude::*;
        xs.par_iter().map(|&x| hits(x)).collect()
    };
    let refine = |mut a: f64, mut b: f64, a_in: bool| {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if hits(m) == a_in {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut start = if flags[0] { Some(xs[0]) } else { None };
    for k in 1..=M {
        if flags[k] != flags[k - 1] {
            let r = refine(xs[k - 1], xs[k], flags[k - 1]);
            if flags[k] {
                start = Some(r);
            } else if let Some(s) = start.take() {
                intervals.push((s, r));
            }
        }
    }
    if let Some(s) = start {
        intervals.push((s, 1.0));
    }
    let mut total = Estimate::zero();
    for (xl, xr) in intervals {
        let outer = |p: Pos| {
            let omx = (1.0 - xr) + p.from_b;
            let x = 1.0 - omx;
            chord_runs(x, omx)
                .into_iter()
                .map(|(a, b)| {
                    let inner = |q: Pos| f(&frame.loc(x, omx, q.x));
                    integrate_interval(inner, a, b, IntervalOptions::new(inner_tol)).value
                })
                .sum::<f64>()
        };
        let o = IntervalOptions::new(opts.tol).singular(Some(0.0), Some(0.0)).parallel(opts.parallel);
        total = total.combine(integrate_interval(outer, xl, xr, o));
    }
    Ok(total)
}

const NEAR_CHORD: f64 = 0.02;

/// A node of the fan of chords issuing from a boundary point `c`: `z = c(1 − s·e^{iγ})`.
#[derive(Debug, Clone, Copy)]
pub struct FanPoint {
    pub loc: Loc,
    pub s: f64,
    /// `2cos γ − s`, the remaining chord length.
    pub s_rem: f64,
    pub gamma: f64,
}

/// `∫∫ f ds dγ` over `γ ∈ (−π/2, π/2)`, `s ∈ (0, 2cos γ)`; covers the disc once.
/// Chords aimed at `aims` are used as panel breaks.
pub fn integrate_fan<F>(f: F, center: Anchor, aims: &[Anchor], tol: f64, parallel: bool) -> Estimate<f64>
where
    F: Fn(&FanPoint) -> f64 + Sync,
{
    let c = center.point;
    let mut breaks: Vec<(f64, Option<f64>)> = aims
        .iter()
        .filter(|a| center.angle_to(a).abs() > 1e-15)
        .map(|a| (0.5 * wrap_diff(a.t - center.t - PI), Some(a.t)))
        .filter(|(g, _)| g.abs() < FRAC_PI_2)
        .collect();
    breaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut ends = vec![(-FRAC_PI_2, None)];
    ends.extend(breaks);
    ends.push((FRAC_PI_2, None));
    let near = |a: &Anchor| aims.iter().any(|b| a.chord_to(b).norm() < NEAR_CHORD);
    let center_near = near(&center);
    let mut total = Estimate::zero();
    for w in ends.windows(2) {
        let ((gl, tl), (gr, tr)) = (w[0], w[1]);
        if gr - gl <= 0.0 {
            continue;
        }
        let outer = |p: Pos| {
            let (gamma, far_t, cosg) = if p.from_a <= p.from_b {
                let g = gl + p.from_a;
                let cg = if tl.is_none() { p.from_a.sin() } else { g.cos() };
                (g, tl.map(|t| t + 2.0 * p.from_a), cg)
            } else {
                let g = gr - p.from_b;
                let cg = if tr.is_none() { p.from_b.sin() } else { g.cos() };
                (g, tr.map(|t| t - 2.0 * p.from_b), cg)
            };
            let far = Anchor::at(far_t.unwrap_or(center.t + PI + 2.0 * gamma));
            let dir = Complex64::from_polar(1.0, gamma);
            let len = 2.0 * cosg;
            let inner = |q: Pos| {
                let (s, s_rem) = (q.from_a, q.from_b);
                let loc = if s <= s_rem {
                    Loc::near(center, -c * dir * s)
                } else {
                    Loc::near(far, c * dir * s_rem)
                };
                f(&FanPoint { loc, s, s_rem, gamma })
            };
            let right = if near(&far) { Some(0.0) } else { None };
            let left = if center_near { Some(0.0) } else { None };
            let io = IntervalOptions::new(0.1 * tol).singular(left, right);
            integrate_interval(inner, 0.0, len, io).value
        };
        let flag = |t: Option<f64>| if t.is_some() || center_near { Some(0.0) } else { None };
        let o = IntervalOptions::new(tol).singular(flag(tl), flag(tr)).parallel(parallel);
        total = total.combine(integrate_interval(outer, gl, gr, o));
    }
    total
}
