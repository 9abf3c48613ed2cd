//! Negative subharmonic exhaustion functions and their pseudoballs.
//!
//! Every exhaustion is stored pulled back to the unit disc: `value` and
//! `laplacian_density` take disc coordinates `ζ` and return `u(ψ(ζ))` and
//! `λ(ψ(ζ))·|ψ'(ζ)|²`, so `dd^c u = λ̃/(2π) dA(ζ)` on the absolutely continuous part.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::frame::{disc_green, unit_disc_frame, ConformalFrame};
use crate::loc::{Anchor, Loc};
use crate::quad::{integrate_interval, IntervalOptions, Pos, SingularityTag};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Point mass of `dd^c u`, located in disc coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: Complex64,
    pub mass: f64,
}

type RealFn = Arc<dyn Fn(&Loc) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Green { pole: Complex64 },
    Paper,
    Custom { value: RealFn, laplacian: RealFn },
}

#[derive(Clone)]
pub struct Exhaustion {
    pub name: String,
    pub frame: ConformalFrame,
    kind: Kind,
    pub atoms: Vec<Atom>,
    pub density_boundary_tags: Vec<SingularityTag>,
    pub ma_mass_finite: bool,
}

impl fmt::Debug for Exhaustion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Exhaustion")
            .field("name", &self.name)
            .field("frame", &self.frame)
            .field("atoms", &self.atoms)
            .field("density_boundary_tags", &self.density_boundary_tags)
            .finish()
    }
}

/// The `paper-u` exhaustion on the disc, scaled so that `Δu = (1 − x)^{−5/4}` exactly.
pub mod paper {
    use super::*;
    use statrs::function::gamma::gamma;

    /// `Δ(−(1 − x)^{3/4}) = (3/16)(1 − x)^{−5/4}`; this factor makes the density unit.
    pub const SCALE: f64 = 16.0 / 3.0;

    /// Mean of the boundary data `(1 − cos t)^{3/4}` over the circle.
    pub fn c0() -> f64 {
        2f64.powf(0.75) / std::f64::consts::PI * gamma(1.25) * std::f64::consts::PI.sqrt() / gamma(1.75)
    }

    /// `Φ(z) = 3∫₀¹ v²(1 − z + z v⁴)^{3/4} dv`, with `g = 1 − z` supplied exactly.
    pub fn phi(g: Complex64) -> Complex64 {
        let f = |p: Pos| {
            let v = p.x;
            let v4 = v * v * v * v;
            let w = g * (1.0 - v4) + v4;
            w.powf(0.75) * (3.0 * v * v)
        };
        integrate_interval(f, 0.0, 1.0, IntervalOptions::new(1e-13)).value
    }

    /// Harmonic extension of `(1 − cos t)^{3/4}`: `ρ = c₀(2 Re Φ − 1)`.
    pub fn rho(g: Complex64, c0: f64) -> f64 {
        c0 * (2.0 * phi(g).re - 1.0)
    }

    pub fn value(loc: &Loc, c0: f64) -> f64 {
        let g = loc.gap_to(&Anchor::at(0.0));
        let one_minus_x = g.re.max(0.0);
        SCALE * (rho(g, c0) - one_minus_x.powf(0.75))
    }

    pub fn density(loc: &Loc) -> f64 {
        let g = loc.gap_to(&Anchor::at(0.0));
        g.re.powf(-1.25)
    }
}

impl Exhaustion {
    /// `u(ζ)` in disc coordinates.
    pub fn value(&self, loc: &Loc) -> f64 {
        match &self.kind {
            Kind::Green { pole } => disc_green(loc.z(), *pole),
            Kind::Paper => paper::value(loc, paper_c0()),
            Kind::Custom { value, .. } => value(loc),
        }
    }

    /// `λ̃(ζ)` in disc coordinates (absolutely continuous part of `2π·dd^c u / dA`).
    pub fn laplacian_density(&self, loc: &Loc) -> f64 {
        match &self.kind {
            Kind::Green { .. } => 0.0,
            Kind::Paper => paper::density(loc),
            Kind::Custom { laplacian, .. } => laplacian(loc),
        }
    }

    pub fn has_density(&self) -> bool {
        !matches!(self.kind, Kind::Green { .. })
    }

    pub fn is_paper(&self) -> bool {
        matches!(self.kind, Kind::Paper)
    }

    /// Green pole in disc coordinates, if this is a Green exhaustion.
    pub fn green_pole(&self) -> Option<Complex64> {
        match self.kind {
            Kind::Green { pole } => Some(pole),
            _ => None,
        }
    }

    /// `u(z)` at a point of Ω.
    pub fn value_at(&self, z: Complex64) -> Result<f64> {
        let zeta = self.frame.interior(z)?;
        Ok(self.value(&Loc::new(zeta)))
    }

    /// `λ(z)` at a point of Ω (the density itself, not its pullback).
    pub fn laplacian_at(&self, z: Complex64) -> Result<f64> {
        let zeta = self.frame.interior(z)?;
        let j = self.frame.psi_prime(zeta).norm_sqr();
        Ok(self.laplacian_density(&Loc::new(zeta)) / j)
    }

    pub fn pseudoball(&self, r: f64) -> Result<Pseudoball> {
        pseudoball(self, r)
    }

    /// User exhaustion from value/density closures on Ω; they are pulled back through the frame.
    pub fn custom<V, L>(
        name: &str,
        frame: ConformalFrame,
        value: V,
        laplacian: L,
        atoms: Vec<Atom>,
        tags: Vec<SingularityTag>,
    ) -> Exhaustion
    where
        V: Fn(&Loc) -> f64 + Send + Sync + 'static,
        L: Fn(&Loc) -> f64 + Send + Sync + 'static,
    {
        Exhaustion {
            name: name.to_string(),
            frame,
            kind: Kind::Custom { value: Arc::new(value), laplacian: Arc::new(laplacian) },
            atoms,
            density_boundary_tags: tags,
            ma_mass_finite: true,
        }
    }

    /// Exhaustion from a JSON record `{value_expr, laplacian_expr, atoms, tags}`.
    ///
    /// Expressions are in the Ω variable `z`; atoms are `[re, im, mass]` triples in Ω;
    /// tags are `[t, exponent]` pairs for the density.
    pub fn from_json_spec(name: &str, frame: ConformalFrame, json: &str) -> Result<Exhaustion> {
        #[derive(Deserialize)]
        struct Spec {
            value_expr: String,
            laplacian_expr: String,
            #[serde(default)]
            atoms: Vec<[f64; 3]>,
            #[serde(default)]
            tags: Vec<[f64; 2]>,
        }
        let spec: Spec = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        let v = Expr::parse(&spec.value_expr)?;
        let l = Expr::parse(&spec.laplacian_expr)?;
        let atoms = spec
            .atoms
            .iter()
            .map(|a| Ok(Atom { at: frame.interior(Complex64::new(a[0], a[1]))?, mass: a[2] }))
            .collect::<Result<Vec<_>>>()?;
        let tags = spec.tags.iter().map(|t| SingularityTag::at(t[0], t[1])).collect();
        let fr = frame;
        let value = move |loc: &Loc| {
            if fr.is_disc() {
                v.real(loc)
            } else {
                v.eval(fr.psi(loc.z())).re
            }
        };
        let laplacian = move |loc: &Loc| {
            if fr.is_disc() {
                l.real(loc)
            } else {
                l.eval(fr.psi(loc.z())).re * fr.psi_prime(loc.z()).norm_sqr()
            }
        };
        Ok(Exhaustion::custom(name, frame, value, laplacian, atoms, tags))
    }
}

fn paper_c0() -> f64 {
    use std::sync::OnceLock;
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(paper::c0)
}

pub fn green_exhaustion(frame: ConformalFrame, w: Complex64) -> Result<Exhaustion> {
    let pole = frame.interior(w)?;
    Ok(Exhaustion {
        name: if w == Complex64::new(0.0, 0.0) { "green".into() } else { format!("green:{w}") },
        frame,
        kind: Kind::Green { pole },
        atoms: vec![Atom { at: pole, mass: 1.0 }],
        density_boundary_tags: Vec::new(),
        ma_mass_finite: true,
    })
}

pub fn paper_exhaustion() -> Exhaustion {
    Exhaustion {
        name: "paper-u".into(),
        frame: unit_disc_frame(),
        kind: Kind::Paper,
        atoms: Vec::new(),
        density_boundary_tags: vec![SingularityTag::at(0.0, 1.25)],
        ma_mass_finite: true,
    }
}

/// Sublevel set `B(r) = {u < r}`.
#[derive(Clone, Debug)]
pub struct Pseudoball {
    pub r: f64,
    u: Exhaustion,
}

impl Pseudoball {
    /// Membership of a point of Ω.
    pub fn indicator(&self, z: Complex64) -> bool {
        self.u.value_at(z).map_or(false, |v| v < self.r)
    }

    /// Membership of a disc-coordinate point.
    pub fn contains(&self, loc: &Loc) -> bool {
        self.u.value(loc) < self.r
    }

    pub fn exhaustion(&self) -> &Exhaustion {
        &self.u
    }
}

pub fn pseudoball(u: &Exhaustion, r: f64) -> Result<Pseudoball> {
    if !(r < 0.0) {
        return Err(Error::Domain(format!("pseudoball level must be negative, got {r}")));
    }
    Ok(Pseudoball { r, u: u.clone() })
}

/// Resolve `"green"`, `"green:<w>"`, `"paper-u"` on a frame.
pub fn by_name(name: &str, frame: ConformalFrame) -> Result<Exhaustion> {
    let name = name.trim();
    if name == "paper-u" {
        if !frame.is_disc() {
            return Err(Error::Domain("paper-u lives on the disc frame only".into()));
        }
        return Ok(paper_exhaustion());
    }
    if name == "green" {
        return green_exhaustion(frame, Complex64::new(0.0, 0.0));
    }
    if let Some(w) = name.strip_prefix("green:") {
        let w = crate::expr::parse_complex(w)?;
        return green_exhaustion(frame, w);
    }
    Err(Error::Parse(format!("unknown exhaustion '{name}' (expected green[:w] or paper-u)")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn green_values() {
        let u = green_exhaustion(unit_disc_frame(), c(0.0, 0.0)).unwrap();
        assert!((u.value_at(c(0.5, 0.0)).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let b = u.pseudoball(-0.693).unwrap();
        assert!(b.indicator(c(0.4, 0.0)));
        assert!(!b.indicator(c(0.6, 0.0)));
        assert!(u.pseudoball(0.0).is_err());
    }

    #[test]
    fn paper_constant() {
        assert!((paper::c0() - 0.9357796256510108).abs() < 1e-14);
        assert!((paper::phi(c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((paper::phi(c(0.0, 0.0)) - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn paper_values() {
        let u = paper_exhaustion();
        let u0 = u.value_at(c(0.0, 0.0)).unwrap();
        assert!((u0 - paper::SCALE * (paper::c0() - 1.0)).abs() < 1e-13);
        for t in [0.5, 1.0, 2.0, std::f64::consts::PI] {
            let v = u.value(&Loc::on_circle(Anchor::at(t), 0.0));
            assert!(v.abs() < 1e-6, "u(e^it) = {v} at t = {t}");
        }
        assert!((u.laplacian_at(c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(u.pseudoball(-0.01).unwrap().indicator(c(-0.9, 0.0)));
    }
}
