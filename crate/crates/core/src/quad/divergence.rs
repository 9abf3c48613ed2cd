use crate::error::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivergenceVerdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub schedule: Vec<f64>,
    /// Increment slopes at or below this mark a power-law divergence.
    pub slope_threshold: f64,
    /// Increment slopes below this do not contract fast enough to call Cauchy.
    pub cauchy_slope_min: f64,
    pub fit_points: usize,
    /// Relative size below which non-monotone increments count as converged noise.
    pub noise: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            schedule: (3..=12).map(|k| 2f64.powi(-k)).collect(),
            slope_threshold: -0.05,
            cauchy_slope_min: 0.025,
            fit_points: 5,
            noise: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub exclusion_radii: Vec<f64>,
    pub partial_values: Vec<f64>,
    /// Slope of `log(I(ε_{k+1}) − I(ε_k))` against `log ε_k`: the growth exponent of
    /// `I(ε)` when negative, the decay exponent of the tail `I(0) − I(ε)` when positive.
    pub fitted_growth_exponent: f64,
    pub limit_estimate: Option<f64>,
    pub verdict: DivergenceVerdict,
    pub reason: String,
}

fn slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - b * (x - mx)).powi(2)).sum();
    (b, (rss / n).sqrt())
}

/// Classify `lim_{ε→0} I(ε)` from partial integrals on a decreasing exclusion schedule.
pub fn probe_divergence<F>(family: F, cfg: &ProbeConfig) -> DivergenceReport
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    let eps = cfg.schedule.clone();
    let vals: Vec<Result<f64>> = eps.par_iter().map(|&e| family(e)).collect();
    let mut report = DivergenceReport {
        exclusion_radii: eps.clone(),
        partial_values: Vec::new(),
        fitted_growth_exponent: f64::NAN,
        limit_estimate: None,
        verdict: DivergenceVerdict::Inconclusive,
        reason: String::new(),
    };
    let mut pv = Vec::with_capacity(vals.len());
    for v in vals {
        match v {
            Ok(x) if x.is_finite() => pv.push(x),
            Ok(x) => {
                report.reason = format!("non-finite partial value {x}");
                return report;
            }
            Err(e) => {
                report.reason = format!("partial integral failed: {e}");
                return report;
            }
        }
    }
    report.partial_values = pv.clone();
    let m = cfg.fit_points.max(2);
    if eps.len() < m + 1 || eps.windows(2).any(|w| !(w[1] < w[0])) {
        report.reason = "schedule must be strictly decreasing with at least fit_points+1 entries".into();
        return report;
    }
    let n = pv.len();
    let inc: Vec<f64> = (n - m..n).map(|k| pv[k] - pv[k - 1]).collect();
    let last = pv[n - 1];
    if inc.iter().any(|&d| d <= 0.0) {
        let worst = inc.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        if worst <= cfg.noise * last.abs().max(1e-300) {
            report.fitted_growth_exponent = f64::INFINITY;
            report.limit_estimate = Some(last);
            report.verdict = DivergenceVerdict::Converges;
            report.reason = "increments at noise level".into();
        } else {
            report.reason = "partial values not monotone".into();
        }
        return report;
    }
    let xs: Vec<f64> = (n - m..n).map(|k| eps[k - 1].ln()).collect();
    let ys: Vec<f64> = inc.iter().map(|d| d.ln()).collect();
    let (s, resid) = slope(&xs, &ys);
    report.fitted_growth_exponent = s;
    if resid > 0.25 {
        report.reason = format!("increments not power-like (log residual {resid:.3})");
        return report;
    }
    if s <= cfg.slope_threshold {
        report.verdict = DivergenceVerdict::Diverges;
        report.reason = format!("partial values grow like eps^{s:.4}");
    } else if s < cfg.cauchy_slope_min {
        report.verdict = DivergenceVerdict::Diverges;
        report.reason = format!("monotone with non-contracting increments (slope {s:.4})");
    } else {
        let ratio = (eps[n - 1] / eps[n - 2]).powf(s);
        let tail = inc[m - 1] * ratio / (1.0 - ratio);
        report.limit_estimate = Some(last + tail);
        report.verdict = DivergenceVerdict::Converges;
        report.reason = format!("increments contract geometrically (ratio {ratio:.4})");
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(a: f64) -> impl Fn(f64) -> Result<f64> + Sync {
        move |e: f64| {
            let pi = std::f64::consts::PI;
            Ok(if (a - 1.0).abs() < 1e-15 {
                2.0 * (pi.ln() - e.ln())
            } else {
                2.0 * (pi.powf(1.0 - a) - e.powf(1.0 - a)) / (1.0 - a)
            })
        }
    }

    #[test]
    fn closed_form_families() {
        let cfg = ProbeConfig::default();
        assert_eq!(probe_divergence(family(0.5), &cfg).verdict, DivergenceVerdict::Converges);
        let r = probe_divergence(family(1.25), &cfg);
        assert_eq!(r.verdict, DivergenceVerdict::Diverges);
        assert!((r.fitted_growth_exponent + 0.25).abs() < 1e-9);
        let r = probe_divergence(family(1.0), &cfg);
        assert_eq!(r.verdict, DivergenceVerdict::Diverges);
        assert!(r.fitted_growth_exponent.abs() < 1e-9);
    }

    #[test]
    fn limit_extrapolation() {
        let r = probe_divergence(family(0.5), &ProbeConfig::default());
        let exact = 4.0 * std::f64::consts::PI.sqrt();
        assert!((r.limit_estimate.unwrap() - exact).abs() < 1e-9);
    }
}
