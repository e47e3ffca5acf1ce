//! A quantitative lower bound `S_α(N) ≥ λ_α |I_N|` for profile domains
//! `{|z₂| < e^{-φ(|z₁|)}}` with subharmonic `φ`.
//!
//! For `γ = (k, N−k)` put `x = 2k+1`, `y = 2(N−k)+2`. The shell term is
//!
//! ```text
//! c_{γ+α}²/c_γ² = (y/2)/(y/2 + α₂) · ∫₀¹ g_α Φ_{x,y},   g_α(r) = r^{2α₁} e^{−2α₂φ(r)},
//! Φ_{x,y}(r) = r^x e^{−yφ(r)} / M(x, y).
//! ```
//!
//! When `x/y` lies in `(aφ′(a), bφ′(b))` the density `Φ_{x,y}` peaks inside `(a, b)`
//! and keeps at least half its mass on `(a/2, (1+b)/2)`, where `g_α` is bounded
//! below. Every such `k` contributes at least `λ_α`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{MultiIndex, RadialProfile};
use crate::error::{Error, Result};
use crate::moments::{log_radial_integral, log_radial_moment};
use crate::quadrature::QuadratureSettings;

/// Grid step used when scanning for the window's left end.
pub const WINDOW_GRID_STEP: f64 = 1e-3;
/// Required value of `rφ′(r)` at the window's left end.
pub const WINDOW_THRESHOLD: f64 = 0.1;
/// Slack allowed below one half in the mass checks.
pub const MASS_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicCheck {
    pub passed: bool,
    /// Smallest `φ″ + φ′/r` seen on the grid.
    pub min_laplacian: f64,
    pub at: f64,
}

/// Checks `φ″ + φ′/r ≥ −1e−9` on a geometric-plus-uniform grid over `(1e−6, 1−1e−6)`.
pub fn check_subharmonic(profile: &RadialProfile, grid_points: usize) -> Result<SubharmonicCheck> {
    if grid_points < 100 {
        return Err(Error::invalid(format!("need at least 100 grid points, got {grid_points}")));
    }
    const EPS: f64 = 1e-6;
    let half = grid_points / 2;
    let mut grid: Vec<f64> = (0..half)
        .map(|i| EPS + (1.0 - 2.0 * EPS) * i as f64 / (half - 1) as f64)
        .collect();
    // geometric clustering toward both ends
    let geo = grid_points - half;
    let per_end = geo / 2;
    for i in 0..per_end {
        let d = EPS * (0.5 / EPS).powf(i as f64 / (per_end.max(2) - 1) as f64);
        grid.push(d);
        grid.push(1.0 - d);
    }
    grid.sort_by(f64::total_cmp);

    let mut min = f64::INFINITY;
    let mut at = f64::NAN;
    for &r in &grid {
        let v = profile.laplacian(r);
        if v.is_nan() {
            return Err(Error::invalid(format!(
                "derivatives of profile {} are undefined at r = {r}",
                profile.name()
            )));
        }
        if v < min {
            min = v;
            at = r;
        }
    }
    Ok(SubharmonicCheck {
        passed: min >= -1e-9,
        min_laplacian: min,
        at,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub a: f64,
    pub b: f64,
    /// `aφ′(a)`.
    pub lower: f64,
    /// `bφ′(b)`.
    pub upper: f64,
}

impl Window {
    pub fn new(a: f64, b: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(0.0 < a && a < b && b < 1.0) {
            return Err(Error::invalid(format!("window needs 0 < a < b < 1, got ({a}, {b})")));
        }
        if !(0.0 < lower && lower < upper) {
            return Err(Error::invalid(format!(
                "window needs 0 < aφ′(a) < bφ′(b), got {lower} and {upper}"
            )));
        }
        Ok(Window { a, b, lower, upper })
    }

    /// `(a/2, (1+b)/2)`, the interval carrying at least half the mass.
    pub fn mass_interval(&self) -> (f64, f64) {
        (self.a / 2.0, (1.0 + self.b) / 2.0)
    }

    pub fn admits(&self, x: f64, y: f64) -> bool {
        let q = x / y;
        self.lower < q && q < self.upper
    }
}

/// `a` is the first grid point with `aφ′(a) ≥ 0.1`; `b = (1+a)/2`, pushed toward 1
/// until `bφ′(b) > aφ′(a)`.
pub fn find_window(profile: &RadialProfile) -> Result<Window> {
    if !profile.diverges_at_boundary() {
        return Err(Error::invalid(format!(
            "profile {} is not declared to grow to infinity at the boundary",
            profile.name()
        )));
    }
    let steps = (1.0 / WINDOW_GRID_STEP).round() as usize;
    let a = (1..steps)
        .map(|i| i as f64 * WINDOW_GRID_STEP)
        .find(|&s| profile.r_dphi(s) >= WINDOW_THRESHOLD)
        .ok_or_else(|| Error::invalid(format!("profile {} does not grow to infinity", profile.name())))?;
    let lower = profile.r_dphi(a);
    let mut b = (a + 1.0) / 2.0;
    for _ in 0..60 {
        let upper = profile.r_dphi(b);
        if upper > lower && profile.phi(b).is_finite() {
            return Window::new(a, b, lower, upper);
        }
        b += (1.0 - b) / 2.0;
    }
    Err(Error::invalid(format!(
        "no right window end found for profile {}",
        profile.name()
    )))
}

/// `log M(x+2α₁, y+2α₂) − log M(x, y)`.
pub fn log_ratio_r(
    profile: &RadialProfile,
    x: f64,
    y: f64,
    alpha: MultiIndex,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if alpha.is_zero() {
        return Ok(0.0);
    }
    let up = log_radial_moment(profile, x + 2.0 * alpha.g1 as f64, y + 2.0 * alpha.g2 as f64, settings)?;
    let base = log_radial_moment(profile, x, y, settings)?;
    Ok(up.ln() - base.ln())
}

/// The root of `x − yrφ′(r)` in `(a, b)`, the mode of `Φ_{x,y}`.
pub fn critical_point(profile: &RadialProfile, x: f64, y: f64, window: &Window) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::invalid(format!("need x, y > 0, got ({x}, {y})")));
    }
    if !window.admits(x, y) {
        return Err(Error::invalid(format!(
            "x/y = {} outside ({}, {})",
            x / y,
            window.lower,
            window.upper
        )));
    }
    let f = |r: f64| x - y * profile.r_dphi(r);
    let (mut lo, mut hi) = (window.a, window.b);
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::numerical(format!(
            "x − yrφ′(r) does not change sign on ({lo}, {hi})"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `∫_lo^hi Φ_{x,y}`.
pub fn density_mass(
    profile: &RadialProfile,
    x: f64,
    y: f64,
    interval: (f64, f64),
    settings: &QuadratureSettings,
) -> Result<f64> {
    let (lo, hi) = interval;
    let part = log_radial_integral(profile, x, y, lo, hi, settings)?;
    let total = log_radial_moment(profile, x, y, settings)?;
    Ok(part.ratio(total))
}

/// `log Φ_{x,y}(r)` given `log M(x, y)`.
pub fn log_density(profile: &RadialProfile, x: f64, y: f64, r: f64, log_total: f64) -> f64 {
    if r <= 0.0 {
        return if x == 0.0 { -y * profile.phi(0.0) - log_total } else { f64::NEG_INFINITY };
    }
    x * r.ln() - y * profile.phi(r) - log_total
}

/// Largest relative violation of "increasing up to the mode, decreasing after"
/// for `Φ_{x,y}` sampled at `points` interior grid points.
pub fn unimodality_violation(
    profile: &RadialProfile,
    x: f64,
    y: f64,
    window: &Window,
    points: usize,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let rho = critical_point(profile, x, y, window)?;
    let log_total = log_radial_moment(profile, x, y, settings)?.ln();
    let values: Vec<(f64, f64)> = (1..=points)
        .map(|i| {
            let r = i as f64 / (points + 1) as f64;
            (r, log_density(profile, x, y, r, log_total))
        })
        .collect();
    let mut worst = 0.0f64;
    for w in values.windows(2) {
        let ((r0, l0), (r1, l1)) = (w[0], w[1]);
        if !(l0.is_finite() && l1.is_finite()) {
            continue;
        }
        // relative drop against the expected direction
        let drop = if r1 <= rho {
            -(l1 - l0).exp_m1()
        } else if r0 >= rho {
            (l1 - l0).exp_m1()
        } else {
            0.0
        };
        worst = worst.max(drop);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexWindow {
    pub count: u32,
    pub lo: f64,
    pub hi: f64,
}

/// `I_N`: the integers `k` with `(2k+1)/(2N−2k+2)` strictly between the window values.
pub fn index_window(window: &Window, n: u32) -> Result<IndexWindow> {
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let (a, b) = (window.lower, window.upper);
    if !(0.0 < a && a < b) {
        return Err(Error::invalid(format!("degenerate window values {a}, {b}")));
    }
    let nf = n as f64;
    let edge = |v: f64| (2.0 * v / (2.0 * v + 2.0)) * nf + (2.0 * v - 1.0) / (2.0 * v + 2.0);
    let lo = edge(a).max(0.0);
    let hi = edge(b).min(nf);
    let first = lo.floor() as i64 + 1;
    let last = hi.ceil() as i64 - 1;
    let count = (last - first + 1).max(0) as u32;
    Ok(IndexWindow { count, lo, hi })
}

fn index_range(iw: &IndexWindow) -> std::ops::RangeInclusive<u32> {
    let first = iw.lo.floor() as u32 + 1;
    first..=first + iw.count.saturating_sub(1)
}

/// `min g_α / (2(1+α₂))` over the mass interval, by dense sampling plus golden-section refinement.
pub fn lambda_alpha(profile: &RadialProfile, alpha: MultiIndex, window: &Window) -> f64 {
    let (lo, hi) = window.mass_interval();
    let log_g = |r: f64| 2.0 * alpha.g1 as f64 * r.ln() - 2.0 * alpha.g2 as f64 * profile.phi(r);
    const SAMPLES: usize = 10_000;
    let step = (hi - lo) / (SAMPLES - 1) as f64;
    let (best_i, mut best) = (0..SAMPLES)
        .map(|i| (i, log_g(lo + step * i as f64)))
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });

    let mut left = lo + step * best_i.saturating_sub(1) as f64;
    let mut right = (lo + step * (best_i + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = right - inv_phi * (right - left);
        let d = left + inv_phi * (right - left);
        if log_g(c) < log_g(d) {
            right = d;
        } else {
            left = c;
        }
    }
    best = best.min(log_g(0.5 * (left + right)));
    best.exp() / (2.0 * (1.0 + alpha.g2 as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    pub n: u32,
    pub x: f64,
    pub y: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub profile: String,
    pub window: Window,
    pub alpha: MultiIndex,
    pub lambda: f64,
    pub subharmonic: SubharmonicCheck,
    pub counts: Vec<(u32, u32)>,
    pub bounds: Vec<(u32, f64)>,
    pub mass_checks: Vec<MassCheck>,
    pub min_mass: f64,
}

/// Certified bounds `λ_α |I_N|` at each requested `N`, after checking the
/// mass inequality for every `k ∈ I_N` and the prefactor `(N−k+1)/(N−k+α₂+1) ≥ 1/(1+α₂)`.
pub fn certify(
    profile: &RadialProfile,
    alpha: MultiIndex,
    ns: &[u32],
    settings: &QuadratureSettings,
) -> Result<Certificate> {
    if alpha.is_zero() {
        return Err(Error::invalid("the certificate concerns nonzero α"));
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::invalid("truncation levels must be positive and nonempty"));
    }
    let subharmonic = check_subharmonic(profile, 2000)?;
    if !subharmonic.passed {
        return Err(Error::invalid(format!(
            "profile {} is not subharmonic: φ″ + φ′/r = {} at r = {}",
            profile.name(),
            subharmonic.min_laplacian,
            subharmonic.at
        )));
    }
    let window = find_window(profile)?;
    let lambda = lambda_alpha(profile, alpha, &window);
    if !(lambda > 0.0) {
        return Err(Error::numerical(format!("λ_α = {lambda} is not positive")));
    }

    let mut counts = Vec::with_capacity(ns.len());
    let mut bounds = Vec::with_capacity(ns.len());
    let mut jobs = Vec::new();
    for &n in ns {
        let iw = index_window(&window, n)?;
        counts.push((n, iw.count));
        bounds.push((n, lambda * iw.count as f64));
        for k in index_range(&iw).filter(|_| iw.count > 0) {
            let rest = (n - k) as f64;
            let a2 = alpha.g2 as f64;
            if (rest + 1.0) / (rest + a2 + 1.0) < 1.0 / (1.0 + a2) {
                return Err(Error::numerical(format!("prefactor bound fails at N = {n}, k = {k}")));
            }
            jobs.push((n, 2.0 * k as f64 + 1.0, 2.0 * rest + 2.0));
        }
    }

    let interval = window.mass_interval();
    let mass_checks: Vec<MassCheck> = jobs
        .par_iter()
        .map(|&(n, x, y)| {
            let mass = density_mass(profile, x, y, interval, settings)?;
            Ok(MassCheck { n, x, y, mass })
        })
        .collect::<Result<_>>()?;
    if let Some(bad) = mass_checks.iter().find(|m| !(m.mass >= 0.5 - MASS_SLACK)) {
        return Err(Error::NumericalFailure {
            message: format!(
                "mass inequality fails at (x, y) = ({}, {}): mass {}",
                bad.x, bad.y, bad.mass
            ),
            estimate: bad.mass,
            error: f64::NAN,
        });
    }
    let min_mass = mass_checks.iter().map(|m| m.mass).fold(f64::INFINITY, f64::min);

    Ok(Certificate {
        profile: profile.name(),
        window,
        alpha,
        lambda,
        subharmonic,
        counts,
        bounds,
        mass_checks,
        min_mass,
    })
}

/// The certificate at a single `N`.
pub fn certified_lower_bound(
    profile: &RadialProfile,
    alpha: MultiIndex,
    n: u32,
    settings: &QuadratureSettings,
) -> Result<Certificate> {
    certify(profile, alpha, &[n], settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::CustomProfile;
    use std::sync::Arc;

    fn s() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    fn neg_log() -> RadialProfile {
        RadialProfile::neg_log_one_minus_r2()
    }

    fn inv_pow() -> RadialProfile {
        RadialProfile::inv_one_minus_pow(1.0).unwrap()
    }

    fn concave() -> RadialProfile {
        RadialProfile::custom(CustomProfile {
            name: "neg_r2".into(),
            phi: Arc::new(|r| -r * r),
            dphi: Arc::new(|r| -2.0 * r),
            d2phi: Arc::new(|_| -2.0),
            diverges_at_boundary: false,
        })
    }

    fn window(lower: f64, upper: f64) -> Window {
        Window::new(0.2, 0.6, lower, upper).unwrap()
    }

    #[test]
    fn subharmonicity() {
        assert!(check_subharmonic(&neg_log(), 1000).unwrap().passed);
        assert!(check_subharmonic(&inv_pow(), 1000).unwrap().passed);
        let c = check_subharmonic(&concave(), 1000).unwrap();
        assert!(!c.passed);
        assert!((c.min_laplacian + 4.0).abs() < 1e-12);
        assert!(check_subharmonic(&neg_log(), 99).is_err());
    }

    #[test]
    fn windows() {
        // 2a²/(1−a²) = 0.1 at a = 0.21822
        let w = find_window(&neg_log()).unwrap();
        assert!((w.a - 0.219).abs() < 1e-12);
        assert!((w.b - 0.6095).abs() < 1e-12);
        assert!(w.lower >= 0.1 && w.lower < w.upper);
        // a/(1−a)² = 0.1 at a = 0.08392
        let w = find_window(&inv_pow()).unwrap();
        assert!((w.a - 0.084).abs() < 1e-12);
        assert!(find_window(&RadialProfile::zero()).unwrap_err().is_invalid_input());
        assert!(find_window(&concave()).unwrap_err().is_invalid_input());
    }

    #[test]
    fn ratio_examples() {
        let half = log_ratio_r(&RadialProfile::zero(), 1.0, 3.0, MultiIndex::new(1, 0), &s()).unwrap();
        assert!((half - 0.5f64.ln()).abs() < 1e-14);
        let r = log_ratio_r(&neg_log(), 1.0, 2.0, MultiIndex::new(0, 1), &s()).unwrap();
        assert!((r - 0.6f64.ln()).abs() < 1e-13);
        assert_eq!(log_ratio_r(&inv_pow(), 3.0, 4.0, MultiIndex::ZERO, &s()).unwrap(), 0.0);
    }

    #[test]
    fn critical_points() {
        let w = find_window(&neg_log()).unwrap();
        let rho = critical_point(&neg_log(), 1.0, 1.0, &w).unwrap();
        assert!((rho - (1.0f64 / 3.0).sqrt()).abs() < 1e-11);
        // x/y = 2 needs bφ′(b) > 2, beyond the default window
        let p = neg_log();
        let wide = Window::new(w.a, 0.9, w.lower, p.r_dphi(0.9)).unwrap();
        let rho = critical_point(&p, 2.0, 1.0, &wide).unwrap();
        assert!((rho - 0.5f64.sqrt()).abs() < 1e-11);
        assert!(critical_point(&neg_log(), 100.0, 1.0, &w).unwrap_err().is_invalid_input());
    }

    #[test]
    fn masses() {
        let z = RadialProfile::zero();
        assert!((density_mass(&z, 1.0, 5.0, (0.0, 0.5), &s()).unwrap() - 0.25).abs() < 1e-13);
        assert!((density_mass(&inv_pow(), 7.0, 3.0, (0.0, 1.0), &s()).unwrap() - 1.0).abs() < 1e-10);
        let w = find_window(&neg_log()).unwrap();
        let m = density_mass(&neg_log(), 21.0, 40.0, w.mass_interval(), &s()).unwrap();
        assert!(m >= 0.5);
    }

    #[test]
    fn index_window_examples() {
        let iw = index_window(&window(1.0, 3.0), 100).unwrap();
        assert!((iw.lo - 50.25).abs() < 1e-12 && (iw.hi - 75.625).abs() < 1e-12);
        assert_eq!(iw.count, 25);
        assert_eq!(index_range(&iw), 51..=75);
        let iw = index_window(&window(1.0, 3.0), 10).unwrap();
        assert!((iw.lo - 5.25).abs() < 1e-12 && (iw.hi - 8.125).abs() < 1e-12);
        assert_eq!(iw.count, 3);
        assert!(Window::new(0.2, 0.6, 1.0, 1.0).is_err());
    }

    #[test]
    fn counted_indices_satisfy_the_interval_condition() {
        let w = window(0.37, 2.9);
        for n in 1..300u32 {
            let iw = index_window(&w, n).unwrap();
            let inside: Vec<u32> = (0..=n)
                .filter(|&k| {
                    let q = (2 * k + 1) as f64 / (2 * (n - k) + 2) as f64;
                    w.lower < q && q < w.upper && (k as f64) > 0.0 && k < n
                })
                .collect();
            let counted: Vec<u32> = if iw.count > 0 { index_range(&iw).collect() } else { vec![] };
            assert_eq!(counted, inside, "N = {n}");
        }
    }

    #[test]
    fn count_is_linear() {
        let w = find_window(&neg_log()).unwrap();
        let slope = 2.0 * w.upper / (2.0 * w.upper + 2.0) - 2.0 * w.lower / (2.0 * w.lower + 2.0);
        for n in [50u32, 100, 400, 1000] {
            let c = index_window(&w, n).unwrap().count as f64;
            assert!((c / n as f64 - slope).abs() <= 2.0 / n as f64);
        }
    }

    #[test]
    fn lambda_examples() {
        let w = find_window(&neg_log()).unwrap();
        assert!((lambda_alpha(&neg_log(), MultiIndex::ZERO, &w) - 0.5).abs() < 1e-15);
        let l = lambda_alpha(&neg_log(), MultiIndex::new(1, 0), &w);
        assert!((l - 0.5 * (w.a / 2.0).powi(2)).abs() < 1e-15);
        let hi = (1.0 + w.b) / 2.0;
        let l = lambda_alpha(&neg_log(), MultiIndex::new(0, 1), &w);
        assert!((l - 0.25 * (-2.0 * neg_log().phi(hi)).exp()).abs() < 1e-15);
    }

    #[test]
    fn unimodal_density() {
        let w = find_window(&inv_pow()).unwrap();
        let v = unimodality_violation(&inv_pow(), 31.0, 60.0, &w, 1000, &s()).unwrap();
        assert!(v <= 1e-6);
    }

    #[test]
    fn certificate_runs() {
        let c = certified_lower_bound(&neg_log(), MultiIndex::new(1, 1), 100, &s()).unwrap();
        assert!(c.lambda > 0.0);
        assert!(c.bounds[0].1 > 0.0);
        assert_eq!(c.mass_checks.len() as u32, c.counts[0].1);
        assert!(c.min_mass >= 0.5);
        assert!(certified_lower_bound(&neg_log(), MultiIndex::ZERO, 10, &s()).unwrap_err().is_invalid_input());
        assert!(certified_lower_bound(&concave(), MultiIndex::new(1, 0), 10, &s()).is_err());
    }
}
