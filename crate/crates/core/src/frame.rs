//! Conformal frames `ψ: D → Ω` with `ψ(0) = 0` and the kernels pulled back through them.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FrameKind {
    Disc,
    /// `ψ(z) = z + ε z²`.
    Polynomial { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalFrame {
    pub kind: FrameKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub t: f64,
    pub xi: Complex64,
    pub weight: f64,
}

pub fn unit_disc_frame() -> ConformalFrame {
    ConformalFrame { kind: FrameKind::Disc }
}

pub fn polynomial_frame(eps: f64) -> Result<ConformalFrame> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!(
            "z + {eps} z^2 is univalent on the closed disc only for 0 < eps < 1/2"
        )));
    }
    Ok(ConformalFrame { kind: FrameKind::Polynomial { eps } })
}

impl Default for ConformalFrame {
    fn default() -> Self {
        unit_disc_frame()
    }
}

impl fmt::Display for ConformalFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FrameKind::Disc => write!(f, "disc"),
            FrameKind::Polynomial { eps } => write!(f, "poly:{eps}"),
        }
    }
}

impl std::str::FromStr for ConformalFrame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "disc" {
            return Ok(unit_disc_frame());
        }
        if let Some(rest) = s.strip_prefix("poly:") {
            let eps: f64 = rest.trim().parse().map_err(|_| Error::Parse(format!("bad frame parameter in '{s}'")))?;
            return polynomial_frame(eps);
        }
        Err(Error::Parse(format!("unknown frame '{s}' (expected 'disc' or 'poly:<eps>')")))
    }
}

impl ConformalFrame {
    pub fn is_disc(&self) -> bool {
        matches!(self.kind, FrameKind::Disc)
    }

    pub fn psi(&self, z: Complex64) -> Complex64 {
        match self.kind {
            FrameKind::Disc => z,
            FrameKind::Polynomial { eps } => z + z * z * eps,
        }
    }

    pub fn psi_prime(&self, z: Complex64) -> Complex64 {
        match self.kind {
            FrameKind::Disc => Complex64::new(1.0, 0.0),
            FrameKind::Polynomial { eps } => Complex64::new(1.0, 0.0) + z * (2.0 * eps),
        }
    }

    /// `φ = ψ^{−1}` by Newton iteration seeded at `w`.
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        match self.kind {
            FrameKind::Disc => w,
            FrameKind::Polynomial { .. } => {
                let mut z = w;
                for _ in 0..64 {
                    let r = self.psi(z) - w;
                    if r.norm() <= 1e-13 * (1.0 + w.norm()) {
                        let step = r / self.psi_prime(z);
                        return z - step;
                    }
                    z -= r / self.psi_prime(z);
                }
                z
            }
        }
    }

    pub fn derivative_bounds(&self) -> (f64, f64) {
        match self.kind {
            FrameKind::Disc => (1.0, 1.0),
            FrameKind::Polynomial { eps } => (1.0 - 2.0 * eps, 1.0 + 2.0 * eps),
        }
    }

    pub fn boundary_point(&self, t: f64) -> BoundaryPoint {
        let tau = Complex64::from_polar(1.0, t);
        BoundaryPoint { t, xi: self.psi(tau), weight: self.psi_prime(tau).norm() }
    }

    /// Disc coordinate of an interior point of Ω, or a domain error.
    pub fn interior(&self, z: Complex64) -> Result<Complex64> {
        let zeta = self.inverse(z);
        if !(zeta.norm() < 1.0) || (self.psi(zeta) - z).norm() > 1e-9 * (1.0 + z.norm()) {
            return Err(Error::Domain(format!("{z} is not an interior point of {self}")));
        }
        Ok(zeta)
    }
}

/// Poisson kernel of the unit disc against `dt`: `(1 − |ζ|²) / (2π |e^{it} − ζ|²)`.
pub fn disc_poisson(zeta: Complex64, t: f64) -> f64 {
    let d = Complex64::from_polar(1.0, t) - zeta;
    (1.0 - zeta.norm_sqr()) / (TAU * d.norm_sqr())
}

/// Poisson kernel of Ω against arc length at `ξ(t)`.
pub fn poisson_kernel(frame: &ConformalFrame, z: Complex64, t: f64) -> Result<f64> {
    let zeta = frame.interior(z)?;
    let w = frame.boundary_point(t).weight;
    Ok(disc_poisson(zeta, t) / w)
}

/// `log|M_ω(ζ)|` for the disc automorphism `M_ω(ζ) = (ζ − ω)/(1 − ω̄ζ)`.
pub fn disc_green(zeta: Complex64, omega: Complex64) -> f64 {
    let den = Complex64::new(1.0, 0.0) - omega.conj() * zeta;
    // |1 − ω̄ζ|² − |ζ − ω|² = (1 − |ζ|²)(1 − |ω|²)
    let gap = (1.0 - zeta.norm_sqr()) * (1.0 - omega.norm_sqr());
    0.5 * (-gap / den.norm_sqr()).ln_1p()
}

pub fn green_function(frame: &ConformalFrame, z: Complex64, w: Complex64) -> Result<f64> {
    let zeta = frame.interior(z)?;
    let omega = frame.interior(w)?;
    if (zeta - omega).norm() == 0.0 {
        return Err(Error::Pole);
    }
    Ok(disc_green(zeta, omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disc_basics() {
        let f = unit_disc_frame();
        assert_eq!(f.psi(c(0.3, 0.4)), c(0.3, 0.4));
        assert_eq!(f.derivative_bounds(), (1.0, 1.0));
        assert_eq!(f.inverse(c(0.5, 0.0)), c(0.5, 0.0));
    }

    #[test]
    fn polynomial_basics() {
        let f = polynomial_frame(0.25).unwrap();
        assert_eq!(f.psi(c(1.0, 0.0)), c(1.25, 0.0));
        assert_eq!(f.derivative_bounds(), (0.5, 1.5));
        assert!(polynomial_frame(0.6).is_err());
        assert_eq!("poly:0.25".parse::<ConformalFrame>().unwrap(), f);
    }

    #[test]
    fn kernels() {
        let f = unit_disc_frame();
        assert!((poisson_kernel(&f, c(0.0, 0.0), 1.3).unwrap() - 1.0 / TAU).abs() < 1e-15);
        assert!((poisson_kernel(&f, c(0.5, 0.0), 0.0).unwrap() - 3.0 / TAU).abs() < 1e-14);
        assert!((green_function(&f, c(0.5, 0.0), c(0.0, 0.0)).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        assert!((green_function(&f, c(0.99, 0.0), c(0.0, 0.0)).unwrap() - 0.99f64.ln()).abs() < 1e-15);
        assert_eq!(green_function(&f, c(0.2, 0.0), c(0.2, 0.0)), Err(Error::Pole));
        assert!(poisson_kernel(&f, c(1.0, 0.0), 0.0).is_err());
        let p = polynomial_frame(0.25).unwrap();
        let g = green_function(&p, p.psi(c(0.5, 0.0)), c(0.0, 0.0)).unwrap();
        assert!((g - 0.5f64.ln()).abs() < 1e-13);
    }
}
