//! Radial shadows of complete Reinhardt domains in the `(r₁, r₂)` quarter-plane.
//!
//! A region is a list of pieces. Each piece integrates over an outer radial
//! variable (usually `r₁`) with a fiber `[lo(t), hi(t)]` in the other variable.
//! Unbounded pieces carry a [`TailDecay`] so convergence of `∫ |z^γ|²` can be
//! decided from exponents instead of from quadrature.

use crate::domain::profile::RadialProfile;
use crate::error::{Error, Result};
use crate::logvalue::log_add_exp;

/// Which radial variable a piece integrates over in its outer integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    R1,
    R2,
}

/// One edge of a fiber as a function of the outer variable `t`.
#[derive(Clone, Debug)]
pub enum FiberBound {
    Const(f64),
    /// `e^{-φ(t)}`.
    ExpNegProfile(RadialProfile),
    /// `sqrt(1 - t²)`.
    UnitCircle,
    /// `1 / (t log t)`, for `t > 1`.
    InvTLogT,
    /// Upper edge of the strip `|r₁ - r₂| < (r₁ + r₂)^{-m}` above the diagonal.
    StripUpper { m: f64 },
}

/// The set of inner radii over a given outer radius.
#[derive(Clone, Debug)]
pub enum Fiber {
    /// `[0, hi(t)]`.
    Below(FiberBound),
    /// `[lo(t), hi(t)]`, empty where `hi < lo`.
    Between(FiberBound, FiberBound),
    /// `(t - δ₋, t + δ₊)` with `|r₁ - r₂| < (r₁ + r₂)^{-m}`, clipped below at `floor`.
    Strip { m: f64, floor: f64 },
}

/// Asymptotics of the outer integrand `t^{2γ_outer+1} ∫_fiber s^{2γ_inner+1} ds`
/// as `t → ∞`: it behaves like `t^s (log t)^q` with `s` and `q` affine in the
/// multi-index, `s = power[0] + power[1]·γ_outer + power[2]·γ_inner`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailDecay {
    pub power: [f64; 3],
    pub log_power: [f64; 3],
}

impl TailDecay {
    pub fn exponents(&self, g_outer: u32, g_inner: u32) -> (f64, f64) {
        let (a, b) = (g_outer as f64, g_inner as f64);
        (
            self.power[0] + self.power[1] * a + self.power[2] * b,
            self.log_power[0] + self.log_power[1] * a + self.log_power[2] * b,
        )
    }

    /// `∫^∞ t^s (log t)^q dt < ∞` iff `s < -1`, or `s = -1` and `q < -1`.
    pub fn converges(&self, g_outer: u32, g_inner: u32) -> bool {
        let (s, q) = self.exponents(g_outer, g_inner);
        const EPS: f64 = 1e-12;
        s < -1.0 - EPS || ((s + 1.0).abs() <= EPS && q < -1.0 - EPS)
    }
}

#[derive(Clone, Debug)]
pub struct RegionPiece {
    pub outer: Axis,
    pub start: f64,
    /// `None` means the piece extends to `+∞`.
    pub end: Option<f64>,
    pub fiber: Fiber,
    pub tail: Option<TailDecay>,
}

#[derive(Clone, Debug)]
pub struct RadialRegion {
    pieces: Vec<RegionPiece>,
    bounded: bool,
}

impl FiberBound {
    /// `log` of the bound at outer radius `t` (with `log_t = ln t` supplied so
    /// that tails far beyond `f64` range can be evaluated).
    pub fn log_at(&self, t: f64, log_t: f64) -> f64 {
        match self {
            FiberBound::Const(c) => c.ln(),
            FiberBound::ExpNegProfile(p) => {
                if t >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    -p.phi(t)
                }
            }
            FiberBound::UnitCircle => {
                if t >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    0.5 * (-t * t).ln_1p()
                }
            }
            FiberBound::InvTLogT => {
                if log_t <= 0.0 {
                    f64::INFINITY
                } else {
                    -log_t - log_t.ln()
                }
            }
            FiberBound::StripUpper { m } => log_t + strip_log_offset(*m, log_t, 1.0).exp().ln_1p(),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.log_at(t, t.ln()).exp()
    }
}

/// `log ε` where `ε = t^{-m-1} (2 + sign·ε)^{-m}` is the relative half-width
/// of the strip `|r₁ - r₂| < (r₁ + r₂)^{-m}` at `r₁ = t` (sign `+1` above the diagonal).
fn strip_log_offset(m: f64, log_t: f64, sign: f64) -> f64 {
    let base = -(m + 1.0) * log_t;
    let mut log_eps = base - m * 2f64.ln();
    for _ in 0..200 {
        let eps = log_eps.exp();
        let next = base - m * (2.0 + sign * eps).ln();
        if (next - log_eps).abs() <= 1e-15 * next.abs().max(1.0) {
            return next;
        }
        log_eps = next;
    }
    log_eps
}

impl Fiber {
    /// `log ∫_fiber s^{p-1} ds = log((hi^p - lo^p)/p)` at outer radius `t`.
    pub fn log_inner(&self, t: f64, log_t: f64, p: f64) -> f64 {
        match self {
            Fiber::Below(hi) => p * hi.log_at(t, log_t) - p.ln(),
            Fiber::Between(lo, hi) => {
                let (ll, lh) = (lo.log_at(t, log_t), hi.log_at(t, log_t));
                log_power_difference(lh, ll, p) - p.ln()
            }
            Fiber::Strip { m, floor } => {
                let log_up = strip_log_offset(*m, log_t, 1.0);
                let mut log_down = strip_log_offset(*m, log_t, -1.0);
                // lower edge is max(floor, t(1 - ε₋))
                let clip = 1.0 - floor / t;
                if clip <= 0.0 {
                    log_down = f64::NEG_INFINITY;
                } else if log_down > clip.ln() {
                    log_down = clip.ln();
                }
                if log_up.max(log_down) < -40.0 {
                    // (1+ε₊)^p - (1-ε₋)^p = p(ε₊ + ε₋) to relative O(p ε)
                    return p * log_t + log_add_exp(log_up, log_down);
                }
                let up = log_up.exp().ln_1p();
                let down = (-log_down.exp()).ln_1p();
                p * log_t + p * down + (p * (up - down)).exp_m1().ln() - p.ln()
            }
        }
    }

    /// The plain interval `(lo, hi)` at outer radius `t`.
    pub fn bounds_at(&self, t: f64) -> (f64, f64) {
        match self {
            Fiber::Below(hi) => (0.0, hi.at(t)),
            Fiber::Between(lo, hi) => (lo.at(t), hi.at(t)),
            Fiber::Strip { m, floor } => {
                let lt = t.ln();
                let up = strip_log_offset(*m, lt, 1.0).exp();
                let down = strip_log_offset(*m, lt, -1.0).exp();
                ((t * (1.0 - down)).max(*floor), t * (1.0 + up))
            }
        }
    }
}

// log(e^{p·lh} - e^{p·ll}), or -inf when hi ≤ lo.
fn log_power_difference(lh: f64, ll: f64, p: f64) -> f64 {
    if ll == f64::NEG_INFINITY {
        return p * lh;
    }
    if lh <= ll {
        return f64::NEG_INFINITY;
    }
    p * lh + (-(p * (ll - lh)).exp_m1()).ln()
}

impl RegionPiece {
    pub fn contains_outer(&self, t: f64) -> bool {
        t >= self.start && self.end.map_or(true, |e| t < e)
    }

    /// Largest value of the outer variable at which the fiber contains `inner`,
    /// for pieces with a nonincreasing `Below` fiber.
    fn outer_limit(&self, inner: f64) -> Option<f64> {
        let Fiber::Below(bound) = &self.fiber else {
            return None;
        };
        if inner > bound.at(self.start) {
            return None;
        }
        let end = self.end.unwrap_or(f64::MAX);
        if bound.at(end.min(1e300)) >= inner {
            return Some(end);
        }
        let (mut lo, mut hi) = (self.start, self.start.max(1.0));
        while hi < end && bound.at(hi) >= inner {
            hi *= 2.0;
        }
        hi = hi.min(end);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bound.at(mid) >= inner {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}

impl RadialRegion {
    pub fn new(pieces: Vec<RegionPiece>, bounded: bool) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("a radial region needs at least one piece"));
        }
        for (i, piece) in pieces.iter().enumerate() {
            if !(piece.start >= 0.0 && piece.start.is_finite()) {
                return Err(Error::invalid(format!("piece {i}: start must be finite and ≥ 0")));
            }
            if let Some(end) = piece.end {
                if !(end > piece.start) {
                    return Err(Error::invalid(format!("piece {i}: empty outer interval")));
                }
            } else if bounded {
                return Err(Error::invalid(format!(
                    "piece {i} is unbounded but the region is flagged bounded"
                )));
            }
            if piece.outer == Axis::R2 && !matches!(piece.fiber, Fiber::Below(_)) {
                return Err(Error::invalid(format!(
                    "piece {i}: pieces over r₂ must use a fiber of the form [0, hi]"
                )));
            }
            let end = piece.end.unwrap_or(piece.start.max(1.0) * 16.0);
            for j in 1..16 {
                let t = piece.start + (end - piece.start) * j as f64 / 16.0;
                let (lo, hi) = piece.fiber.bounds_at(t);
                let ok = match piece.fiber {
                    Fiber::Between(..) => lo >= 0.0,
                    _ => lo >= 0.0 && lo <= hi * (1.0 + 1e-12),
                };
                if !ok {
                    return Err(Error::invalid(format!(
                        "piece {i}: fiber bounds ({lo}, {hi}) invalid at t = {t}"
                    )));
                }
            }
        }
        Ok(RadialRegion { pieces, bounded })
    }

    pub fn pieces(&self) -> &[RegionPiece] {
        &self.pieces
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    /// Intervals of `r₂` above `r₁`, one per contributing piece, sorted.
    pub fn fiber_at(&self, r1: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for piece in &self.pieces {
            match piece.outer {
                Axis::R1 => {
                    if piece.contains_outer(r1) {
                        let (lo, hi) = piece.fiber.bounds_at(r1);
                        if hi > lo {
                            out.push((lo, hi));
                        }
                    }
                }
                Axis::R2 => {
                    if let Some(limit) = piece.outer_limit(r1) {
                        if limit > piece.start {
                            out.push((piece.start, limit));
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        self.pieces.iter().any(|piece| {
            let (outer, inner) = match piece.outer {
                Axis::R1 => (r1, r2),
                Axis::R2 => (r2, r1),
            };
            if !piece.contains_outer(outer) {
                return false;
            }
            let (lo, hi) = piece.fiber.bounds_at(outer);
            inner >= lo && inner < hi
        })
    }
}
