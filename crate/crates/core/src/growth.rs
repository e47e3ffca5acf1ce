//! Growth classification of partial-sum sequences: linear divergence vs convergence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative RMS residual allowed for a linear fit.
pub const LINEAR_RESIDUAL: f64 = 0.05;
/// Minimum ratio between the largest and smallest sample for linear growth.
pub const LINEAR_RANGE: f64 = 2.0;
/// Agreement required between successive extrapolated limits.
pub const LIMIT_STABILITY: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Growth {
    DivergentLinear {
        slope: f64,
        intercept: f64,
        relative_residual: f64,
    },
    Convergent {
        limit: f64,
        tail_bound: f64,
    },
    Inconclusive,
}

impl Growth {
    pub fn is_divergent_linear(&self) -> bool {
        matches!(self, Growth::DivergentLinear { .. })
    }

    pub fn is_convergent(&self) -> bool {
        matches!(self, Growth::Convergent { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Growth::DivergentLinear { .. } => "DivergentLinear",
            Growth::Convergent { .. } => "Convergent",
            Growth::Inconclusive => "Inconclusive",
        }
    }
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Classifies `(N, value)` samples.
///
/// * Linear: a line fitted to the upper half of the samples must explain *all*
///   samples to [`LINEAR_RESIDUAL`] relative RMS, with positive slope and
///   values spanning at least [`LINEAR_RANGE`]×.
/// * Convergent: per-unit increments shrink over the upper half and the last
///   three Richardson limits (error model `L + c/N`) agree to [`LIMIT_STABILITY`].
pub fn classify_growth(samples: &[(f64, f64)]) -> Result<Growth> {
    if samples.len() < 8 {
        return Err(Error::invalid(format!(
            "growth classification needs at least 8 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::invalid("sample abscissae must be strictly increasing"));
    }
    if samples.iter().any(|s| !s.1.is_finite()) {
        return Err(Error::invalid("sample values must be finite"));
    }

    let half = samples.len() / 2;
    let (intercept, slope) = least_squares(&samples[half..]);
    let n = samples.len() as f64;
    let rms_res = (samples
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let rms_val = (samples.iter().map(|(_, y)| y * y).sum::<f64>() / n).sqrt();
    let relative_residual = if rms_val > 0.0 { rms_res / rms_val } else { f64::INFINITY };
    let min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let max = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if slope > 0.0 && relative_residual < LINEAR_RESIDUAL && min > 0.0 && max >= LINEAR_RANGE * min {
        return Ok(Growth::DivergentLinear {
            slope,
            intercept,
            relative_residual,
        });
    }

    let upper = &samples[half..];
    let rates: Vec<f64> = upper
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .collect();
    let decaying = rates.windows(2).all(|r| r[1] <= r[0] * (1.0 + 1e-9) + 1e-300);

    let limits: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].0 * w[1].1 - w[0].0 * w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let last = &limits[limits.len() - 3..];
    let limit = last[2];
    let spread = last.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - last.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if decaying && spread <= LIMIT_STABILITY * limit.abs() {
        let tail_bound = (limit - samples[samples.len() - 1].1).abs() + spread;
        return Ok(Growth::Convergent { limit, tail_bound });
    }
    Ok(Growth::Inconclusive)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(ns: impl Iterator<Item = u32>, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        ns.map(|n| (n as f64, f(n as f64))).collect()
    }

    #[test]
    fn linear() {
        let g = classify_growth(&sample(1..=16, |n| 3.0 * n)).unwrap();
        match g {
            Growth::DivergentLinear { slope, .. } => assert!((slope - 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn convergent() {
        let g = classify_growth(&sample((1..=16).map(|i| 10 * i), |n| 5.0 - 2.0 / n)).unwrap();
        match g {
            Growth::Convergent { limit, .. } => assert!((limit - 5.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn logarithmic_is_inconclusive() {
        // log N on [10, 100]: the upper-half line misses the lower half by ~11% RMS,
        // and the 1/N extrapolants drift by ~0.1 per step
        let g = classify_growth(&sample((1..=10).map(|i| 10 * i), f64::ln)).unwrap();
        assert_eq!(g, Growth::Inconclusive);
        let g = classify_growth(&sample((2..=20).map(|i| 5 * i), f64::ln)).unwrap();
        assert_eq!(g, Growth::Inconclusive);
    }

    #[test]
    fn linear_minus_log_is_linear() {
        let g = classify_growth(&sample((1..=16).map(|i| 25 * i), |n| n - n.ln())).unwrap();
        assert!(g.is_divergent_linear());
    }

    #[test]
    fn sqrt_is_inconclusive() {
        let g = classify_growth(&sample((1..=16).map(|i| 25 * i), f64::sqrt)).unwrap();
        assert_eq!(g, Growth::Inconclusive);
    }

    #[test]
    fn too_few_samples() {
        assert!(classify_growth(&sample(1..=7, |n| n)).unwrap_err().is_invalid_input());
        let mut s = sample(1..=8, |n| n);
        s[3].0 = s[2].0;
        assert!(classify_growth(&s).is_err());
    }
}
