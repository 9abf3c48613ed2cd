use super::{integrate_interval, merge_tags, Estimate, IntervalOptions, Pos, Quantity, SingularityTag};
use crate::error::{Error, Result};
use crate::loc::{wrap_angle, Anchor, Loc};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// A boundary node: its parameter and a location anchored at the nearest tag.
#[derive(Debug, Clone, Copy)]
pub struct CirclePoint {
    pub t: f64,
    pub loc: Loc,
}

impl CirclePoint {
    pub fn at(t: f64) -> Self {
        let a = Anchor::at(t);
        CirclePoint { t: a.t, loc: Loc::on_circle(a, 0.0) }
    }

    pub fn z(&self) -> Complex64 {
        self.loc.z()
    }

    /// Parameter distance to a boundary anchor, accurate near the anchor.
    pub fn distance_to(&self, anchor: &Anchor) -> f64 {
        let chord = self.loc.gap_to(anchor).norm();
        2.0 * (0.5 * chord).min(1.0).asin()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CircleOptions {
    pub tol: f64,
    /// Skip a parameter ball of this radius around every tag.
    pub exclusion: Option<f64>,
    pub parallel: bool,
    pub max_evals: usize,
    pub abs_tol: f64,
}

impl CircleOptions {
    pub fn new(tol: f64) -> Self {
        CircleOptions { tol, exclusion: None, parallel: false, max_evals: 400_000, abs_tol: 0.0 }
    }
    pub fn excluding(mut self, eps: f64) -> Self {
        self.exclusion = Some(eps);
        self
    }
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }
    pub fn abs_tol(mut self, a: f64) -> Self {
        self.abs_tol = a;
        self
    }
}

/// `∫₀^{2π} f(t) dt` with tanh-sinh panels abutting each tag.
pub fn integrate_circle<F>(f: F, tags: &[SingularityTag], tol: f64) -> Result<Estimate<f64>>
where
    F: Fn(&CirclePoint) -> f64 + Sync,
{
    integrate_circle_with(f, tags, CircleOptions::new(tol))
}

pub fn integrate_circle_with<T, F>(f: F, tags: &[SingularityTag], opts: CircleOptions) -> Result<Estimate<T>>
where
    T: Quantity,
    F: Fn(&CirclePoint) -> T + Sync,
{
    let tags = merge_tags(tags, f64::max);
    if opts.exclusion.is_none() {
        if let Some(bad) = tags.iter().find(|g| g.exponent >= 1.0) {
            return Err(Error::NonIntegrable(format!(
                "boundary tag at t={} has exponent {} >= 1",
                bad.t, bad.exponent
            )));
        }
    }
    let iopts = IntervalOptions::new(opts.tol).parallel(opts.parallel).max_evals(opts.max_evals).abs_tol(opts.abs_tol);
    if tags.is_empty() {
        let g = |p: Pos| f(&CirclePoint { t: p.x, loc: Loc::new(Complex64::from_polar(1.0, p.x)) });
        return Ok(integrate_interval(g, 0.0, TAU, iopts));
    }
    let eps = opts.exclusion.unwrap_or(0.0);
    let n = tags.len();
    let mut total = Estimate::zero();
    for i in 0..n {
        let left = tags[i];
        let right = tags[(i + 1) % n];
        let len = if n == 1 { TAU } else { wrap_angle(right.t - left.t) };
        if len <= 2.0 * eps {
            continue;
        }
        let (la, ra) = (left.anchor, right.anchor);
        let g = |p: Pos| {
            let (da, db) = (p.from_a + eps, p.from_b + eps);
            let cp = if da <= db {
                CirclePoint { t: wrap_angle(la.t + da), loc: Loc::on_circle(la, da) }
            } else {
                CirclePoint { t: wrap_angle(ra.t - db), loc: Loc::on_circle(ra, -db) }
            };
            f(&cp)
        };
        let flags = if eps > 0.0 {
            iopts
        } else {
            iopts.singular(Some(left.exponent.max(0.0)), Some(right.exponent.max(0.0)))
        };
        let part = integrate_interval(g, eps, len - eps, flags);
        total = total.combine(part);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant() {
        let e = integrate_circle(|_| 1.0, &[], 1e-12).unwrap();
        assert!((e.value - TAU).abs() < 1e-12);
    }

    #[test]
    fn power_singularity_over_symmetric_range() {
        let tags = [SingularityTag::at(0.0, 0.75)];
        let e = integrate_circle(|p| p.distance_to(&Anchor::at(0.0)).powf(-0.75), &tags, 1e-10).unwrap();
        let exact = 8.0 * PI.powf(0.25);
        assert!((e.value - exact).abs() < 1e-8 * exact, "{} vs {}", e.value, exact);
    }

    #[test]
    fn nonintegrable_tag_rejected() {
        let tags = [SingularityTag::at(0.0, 1.25)];
        assert!(matches!(integrate_circle(|_| 1.0, &tags, 1e-8), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn distance_is_precise_near_tag() {
        let a = Anchor::at(1.0);
        let p = CirclePoint { t: 1.0 + 1e-14, loc: Loc::on_circle(a, 1e-14) };
        assert!((p.distance_to(&a) - 1e-14).abs() < 1e-28);
    }
}
