//! Adaptive Gauss-Kronrod quadrature of positive integrands given by their logarithm.
//!
//! The integrand is supplied as `t -> log f(t)`. Every panel is evaluated as
//! `exp(log f(t) - shift)` where `shift` is the largest log value seen on the
//! panel's nodes, so integrands such as `r^800 e^{-800 φ(r)}` never underflow
//! and the Wiegerinck moments never overflow. Refinement bisects the panel with
//! the largest error estimate until the global error estimate drops below
//! `rel_tol` times the global integral.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logvalue::{log_sum_exp, LogValue};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Fixed pre-split point on `[0, 1)` for radial integrals. `None` places the
    /// split where `y φ(r)` first exceeds `log(1/rel_tol) + |log max|`.
    pub endpoint_split: Option<f64>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            rel_tol: 1e-10,
            max_subdivisions: 1_000_000,
            endpoint_split: None,
        }
    }
}

impl QuadratureSettings {
    pub fn with_rel_tol(rel_tol: f64) -> Result<Self> {
        let s = QuadratureSettings {
            rel_tol,
            ..Default::default()
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-4) {
            return Err(Error::invalid(format!(
                "rel_tol must lie in (0, 1e-4], got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be positive"));
        }
        if let Some(f) = self.endpoint_split {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid(format!(
                    "endpoint_split must lie in (0, 1), got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// Result of a log-domain integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogQuadrature {
    pub value: LogValue,
    /// Natural log of the absolute error estimate.
    pub log_error: f64,
    pub panels: usize,
}

// Kronrod 15-point nodes on [0, 1] (symmetric), with the embedded Gauss 7-point rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    log_value: f64,
    log_error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Max-heap on error; ties broken by position so the order is total and deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_error
            .total_cmp(&other.log_error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod_panel<F: Fn(f64) -> f64>(log_f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut logs = [0.0f64; 15];
    logs[0] = log_f(center);
    for j in 0..7 {
        let dx = half * XGK[j];
        logs[1 + 2 * j] = log_f(center - dx);
        logs[2 + 2 * j] = log_f(center + dx);
    }
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY || shift.is_nan() {
        return Panel {
            a,
            b,
            log_value: f64::NEG_INFINITY,
            log_error: f64::NEG_INFINITY,
        };
    }
    let fv: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();

    let fc = fv[0];
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let pair = fv[1 + 2 * j] + fv[2 + 2 * j];
        resk += WGK[j] * pair;
        if j % 2 == 1 {
            resg += WG[j / 2] * pair;
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[1 + 2 * j] - mean).abs() + (fv[2 + 2 * j] - mean).abs());
    }

    let result = resk * half;
    let resabs = result;
    resasc *= half;
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }

    Panel {
        a,
        b,
        log_value: shift + result.ln(),
        log_error: shift + err.ln(),
    }
}

/// Samples `log_f` to locate its maximiser on `[a, b]` and returns interior
/// breakpoints clustered around it at multiples of the peak width.
pub fn peak_breakpoints<F: Fn(f64) -> f64>(log_f: &F, a: f64, b: f64) -> Vec<f64> {
    let width = b - a;
    let mut samples: Vec<f64> = (1..64).map(|i| a + width * i as f64 / 64.0).collect();
    for j in 7..48 {
        let d = width * 0.5f64.powi(j);
        samples.push(a + d);
        samples.push(b - d);
    }
    samples.retain(|&t| t > a && t < b);
    samples.sort_by(f64::total_cmp);
    samples.dedup();

    let values: Vec<f64> = samples.iter().map(|&t| log_f(t)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let mut points: Vec<f64> = (1..8).map(|i| a + width * i as f64 / 8.0).collect();
    if values.is_empty() || values[best] == f64::NEG_INFINITY {
        return points;
    }

    // Golden-section refinement between the neighbours of the best sample.
    let mut lo = if best == 0 { a } else { samples[best - 1] };
    let mut hi = if best + 1 == samples.len() { b } else { samples[best + 1] };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (log_f(c), log_f(d));
    for _ in 0..80 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = log_f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = log_f(d);
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let mode = 0.5 * (lo + hi);
    points.push(mode);

    match peak_width(log_f, mode, a, b) {
        Some(sigma) => {
            for j in -1..8 {
                let d = sigma * 2f64.powi(j);
                points.push(mode - d);
                points.push(mode + d);
            }
        }
        None => {
            for j in 1..40 {
                let d = width * 0.5f64.powi(j);
                points.push(mode - d);
                points.push(mode + d);
            }
        }
    }

    let eps = 1e-13 * (a.abs() + b.abs()).max(width);
    points.retain(|&t| t > a + eps && t < b - eps);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|x, y| (*x - *y).abs() <= eps);
    points
}

// Width 1/sqrt(-l'') of the peak at `mode`, from central differences.
fn peak_width<F: Fn(f64) -> f64>(log_f: &F, mode: f64, a: f64, b: f64) -> Option<f64> {
    let room = (mode - a).min(b - mode);
    let mut h = (1e-3 * (b - a)).min(0.5 * room);
    if h <= 0.0 {
        return None;
    }
    let mut sigma = None;
    for _ in 0..4 {
        let l0 = log_f(mode);
        let lp = log_f(mode + h);
        let lm = log_f(mode - h);
        let d2 = (lp - 2.0 * l0 + lm) / (h * h);
        if !(d2 < 0.0) || !d2.is_finite() {
            return sigma;
        }
        let s = 1.0 / (-d2).sqrt();
        sigma = Some(s);
        if s >= 20.0 * h {
            break;
        }
        h = s / 20.0;
    }
    sigma
}

/// Integrates `exp(log_f)` over `[a, b]` to relative accuracy `settings.rel_tol`.
///
/// `breakpoints` are extra interior split points; points outside `(a, b)` are ignored.
pub fn integrate_log<F: Fn(f64) -> f64>(
    log_f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    settings: &QuadratureSettings,
) -> Result<LogQuadrature> {
    settings.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if b <= a {
        return Ok(LogQuadrature {
            value: LogValue::ZERO,
            log_error: f64::NEG_INFINITY,
            panels: 0,
        });
    }

    let mut cuts = peak_breakpoints(&log_f, a, b);
    cuts.extend(breakpoints.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let initial: Vec<Panel> = cuts
        .windows(2)
        .map(|w| kronrod_panel(&log_f, w[0], w[1]))
        .collect();

    let reference = log_sum_exp(&initial.iter().map(|p| p.log_value).collect::<Vec<_>>());
    if reference == f64::NEG_INFINITY {
        return Ok(LogQuadrature {
            value: LogValue::ZERO,
            log_error: f64::NEG_INFINITY,
            panels: initial.len(),
        });
    }

    let scaled = |l: f64| (l - reference).exp();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut heap = BinaryHeap::with_capacity(initial.len() * 4);
    for p in initial {
        total += scaled(p.log_value);
        total_err += scaled(p.log_error);
        heap.push(p);
    }
    let mut frozen: Vec<Panel> = Vec::new();
    let mut subdivisions = 0usize;
    let tol = settings.rel_tol;

    loop {
        if subdivisions % 256 == 0 || total_err <= tol * total {
            // Resum from scratch so cancellation in the running sums cannot accumulate.
            total = heap.iter().chain(frozen.iter()).map(|p| scaled(p.log_value)).sum();
            total_err = heap.iter().chain(frozen.iter()).map(|p| scaled(p.log_error)).sum();
            if total_err <= tol * total {
                break;
            }
        }
        if subdivisions >= settings.max_subdivisions {
            return Err(failure("subdivision limit reached", reference, total, total_err));
        }
        let Some(worst) = heap.pop() else {
            return Err(failure(
                "error target unreachable at machine resolution",
                reference,
                total,
                total_err,
            ));
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            frozen.push(worst);
            continue;
        }
        let left = kronrod_panel(&log_f, worst.a, mid);
        let right = kronrod_panel(&log_f, mid, worst.b);
        total += scaled(left.log_value) + scaled(right.log_value) - scaled(worst.log_value);
        total_err += scaled(left.log_error) + scaled(right.log_error) - scaled(worst.log_error);
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    // Sum in position order so the result does not depend on heap layout.
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value_log = log_sum_exp(&panels.iter().map(|p| p.log_value).collect::<Vec<_>>());
    let err_log = log_sum_exp(&panels.iter().map(|p| p.log_error).collect::<Vec<_>>());
    Ok(LogQuadrature {
        value: LogValue::from_log(value_log),
        log_error: err_log,
        panels: panels.len(),
    })
}

fn failure(message: &str, reference: f64, total: f64, total_err: f64) -> Error {
    Error::NumericalFailure {
        message: message.to_string(),
        estimate: reference + total.ln(),
        error: reference + total_err.ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn polynomial_is_exact() {
        let q = integrate_log(|t: f64| 3.0 * t.ln(), 0.0, 1.0, &[], &Default::default()).unwrap();
        assert!(rel(q.value.value(), 0.25) < 1e-14);
    }

    #[test]
    fn narrow_peak_is_found() {
        // r^800 (1-r)^800 has its mass in a window of width ~0.018 around 1/2
        let log_f = |t: f64| 800.0 * t.ln() + 800.0 * (1.0 - t).ln();
        let q = integrate_log(log_f, 0.0, 1.0, &[], &Default::default()).unwrap();
        let exact = statrs::function::beta::ln_beta(801.0, 801.0);
        assert!((q.value.ln() - exact).abs() < 1e-10);
    }

    #[test]
    fn huge_logs_do_not_overflow() {
        let log_f = |t: f64| 5000.0 + t;
        let q = integrate_log(log_f, 0.0, 1.0, &[], &Default::default()).unwrap();
        let exact = 5000.0 + (1f64.exp() - 1.0).ln();
        assert!((q.value.ln() - exact).abs() < 1e-12);
    }

    #[test]
    fn square_root_endpoint_singularity() {
        let q = integrate_log(|t: f64| -0.5 * t.ln(), 0.0, 1.0, &[], &Default::default()).unwrap();
        assert!(rel(q.value.value(), 2.0) < 1e-9);
    }

    #[test]
    fn identically_zero_integrand() {
        let q = integrate_log(|_| f64::NEG_INFINITY, 0.0, 1.0, &[], &Default::default()).unwrap();
        assert!(q.value.is_zero());
    }

    #[test]
    fn subdivision_limit_reports_estimate() {
        let settings = QuadratureSettings {
            rel_tol: 1e-12,
            max_subdivisions: 1,
            endpoint_split: None,
        };
        let err = integrate_log(|t: f64| -0.9 * t.ln(), 0.0, 1.0, &[], &settings).unwrap_err();
        match err {
            Error::NumericalFailure { estimate, error, .. } => {
                assert!(estimate.is_finite());
                assert!(error.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn settings_validation() {
        assert!(QuadratureSettings::with_rel_tol(1e-3).is_err());
        assert!(QuadratureSettings::with_rel_tol(0.0).is_err());
        assert!(QuadratureSettings::with_rel_tol(1e-6).is_ok());
    }

    #[test]
    fn deterministic_bits() {
        let log_f = |t: f64| 37.0 * t.ln() - 12.0 / (1.0 - t);
        let a = integrate_log(log_f, 0.0, 1.0, &[], &Default::default()).unwrap();
        let b = integrate_log(log_f, 0.0, 1.0, &[], &Default::default()).unwrap();
        assert_eq!(a.value.ln().to_bits(), b.value.ln().to_bits());
    }
}
