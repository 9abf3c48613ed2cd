//! Points of the closed disc that remember a nearby boundary anchor.
//!
//! Integrands that blow up at a boundary point need `ξ − z` to full relative
//! precision even when `|ξ − z|` is far below `1e−16`. A [`Loc`] carries the
//! offset from an [`Anchor`] so that the distance survives.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce an angle difference to `(−π, π]`.
pub fn wrap_diff(d: f64) -> f64 {
    let r = wrap_angle(d);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `e^{iδ} − 1` without cancellation.
pub fn expm1_i(d: f64) -> Complex64 {
    let s = (0.5 * d).sin();
    Complex64::new(-2.0 * s * s, d.sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub t: f64,
    pub point: Complex64,
}

impl Anchor {
    pub fn at(t: f64) -> Self {
        let t = wrap_angle(t);
        Anchor { t, point: Complex64::from_polar(1.0, t) }
    }

    /// Anchor at a unit-modulus point, kept bitwise as given.
    pub fn exact(point: Complex64) -> Self {
        Anchor { t: wrap_angle(point.arg()), point }
    }

    /// `other − self` along the chord, accurate when the anchors nearly coincide.
    pub fn chord_to(&self, other: &Anchor) -> Complex64 {
        if self.point == other.point {
            return Complex64::new(0.0, 0.0);
        }
        let d = wrap_diff(other.t - self.t);
        if d.abs() > 0.5 {
            return other.point - self.point;
        }
        self.point * expm1_i(d)
    }

    /// Signed parameter distance `other.t − self.t` in `(−π, π]`.
    pub fn angle_to(&self, other: &Anchor) -> f64 {
        wrap_diff(other.t - self.t)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Loc {
    z: Complex64,
    rel: Option<(Anchor, Complex64)>,
}

impl Loc {
    pub fn new(z: Complex64) -> Self {
        Loc { z, rel: None }
    }

    pub fn near(anchor: Anchor, offset: Complex64) -> Self {
        Loc { z: anchor.point + offset, rel: Some((anchor, offset)) }
    }

    /// Boundary point at parameter `anchor.t + dt`.
    pub fn on_circle(anchor: Anchor, dt: f64) -> Self {
        Loc::near(anchor, anchor.point * expm1_i(dt))
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn anchor(&self) -> Option<(Anchor, Complex64)> {
        self.rel
    }

    /// `target − z`.
    pub fn gap_to(&self, target: &Anchor) -> Complex64 {
        match self.rel {
            Some((a, off)) => {
                let c = a.chord_to(target);
                if c.norm() < 0.25 {
                    c - off
                } else {
                    target.point - self.z
                }
            }
            None => target.point - self.z,
        }
    }

    /// `1 − |z|`, accurate near the anchor.
    pub fn depth(&self) -> f64 {
        match self.rel {
            Some((a, off)) => {
                // |a + off|² − 1 = 2 Re(ā·off) + |off|²
                let s = 2.0 * (a.point.conj() * off).re + off.norm_sqr();
                let r2 = 1.0 + s;
                -s / (1.0 + r2.max(0.0).sqrt())
            }
            None => 1.0 - self.z.norm(),
        }
    }

    /// Re-anchor the point at the nearest of `anchors` if it is close to one.
    pub fn anchored_among(z: Complex64, anchors: &[Anchor]) -> Self {
        let mut best: Option<(f64, Anchor)> = None;
        for a in anchors {
            let d = (a.point - z).norm();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, *a));
            }
        }
        match best {
            Some((d, a)) if d < 0.25 => Loc::near(a, z - a.point),
            _ => Loc::new(z),
        }
    }
}

impl From<Complex64> for Loc {
    fn from(z: Complex64) -> Self {
        Loc::new(z)
    }
}
