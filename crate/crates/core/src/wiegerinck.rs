//! Closed-form diagonal moments on the Wiegerinck domain Ω₀ and the
//! structure of the finite-dimensional spaces A²(Ω_k).
//!
//! On the radial shadow of Ω₀ the diagonal moment splits into the square
//! `X₃ = [0,e]²` and the two mirror tails `X₁`, `X₂`:
//!
//! ```text
//! c_{(k,k)}² = 4π² ( e^{4k+4}/(2k+2)²  +  2/((2k+1)(2k+2)) ).
//! ```
//!
//! Each tail contributes `4π²/((2k+1)(2k+2))`: the fiber integral gives
//! `(t log t)^{-(2k+2)}/(2k+2)` and `∫_e^∞ t^{-1} (log t)^{-(2k+2)} dt = 1/(2k+1)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logvalue::{log_add_exp, LogValue};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaZeroMoment {
    pub k: u32,
    pub log_c_sq: LogValue,
}

impl OmegaZeroMoment {
    pub fn new(k: u32) -> Self {
        OmegaZeroMoment {
            k,
            log_c_sq: omega0_log_ck_sq(k),
        }
    }
}

/// `log c_{(k,k)}²` on Ω₀, evaluated entirely in log form.
pub fn omega0_log_ck_sq(k: u32) -> LogValue {
    let kf = k as f64;
    let square = (4.0 * kf + 4.0) - 2.0 * (2.0 * kf + 2.0).ln();
    let tails = 2f64.ln() - (2.0 * kf + 1.0).ln() - (2.0 * kf + 2.0).ln();
    LogValue::from_log((4.0 * PI * PI).ln() + log_add_exp(square, tails))
}

/// `u_k = c_{(k+1,k+1)}² / c_{(k,k)}²`.
pub fn omega0_ratio(k: u32) -> f64 {
    omega0_log_ck_sq(k + 1).ratio(omega0_log_ck_sq(k))
}

/// `u_k - u_{k-1}` from two log-ratio exponentials. Fails when the difference
/// is below 1e-13 relative or within 100× of the rounding carried by the logs.
pub fn omega0_term_naive(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("the Ω₀ series term is defined for k ≥ 1"));
    }
    let hi = omega0_ratio(k);
    let lo = omega0_ratio(k - 1);
    let diff = hi - lo;
    // rounding in the log differences scales with the size of the logs themselves
    let log_scale = omega0_log_ck_sq(k + 1).ln().abs();
    let noise = 4.0 * f64::EPSILON * log_scale * hi;
    if diff < (1e-13 * hi).max(100.0 * noise) {
        return Err(Error::numerical(format!(
            "catastrophic cancellation in u_{k} - u_{}: difference {diff:e} against rounding {noise:e}",
            k - 1
        )));
    }
    Ok(diff)
}

// log(B_k / A_k) with A_k = e^{4k+4}/(2k+2)², B_k = 2/((2k+1)(2k+2))
fn log_tail_share(k: u32) -> f64 {
    let kf = k as f64;
    2f64.ln() + (2.0 * kf + 2.0).ln() - (2.0 * kf + 1.0).ln() - (4.0 * kf + 4.0)
}

/// `u_k - u_{k-1}` in the single-fraction form
///
/// ```text
/// u_k = e⁴ ρ_k ω_k,  ρ_k = ((k+1)/(k+2))²,  ω_k = (1+β_{k+1})/(1+β_k),  β_k = B_k/A_k
/// u_k - u_{k-1} = e⁴ [ (ρ_k - ρ_{k-1}) ω_k + ρ_{k-1} (ω_k - ω_{k-1}) ]
/// ρ_k - ρ_{k-1} = (2k² + 4k + 1) / ((k+1)²(k+2)²)
/// ```
///
/// which has no cancellation for any `k ≥ 1`.
pub fn omega0_term_compensated(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("the Ω₀ series term is defined for k ≥ 1"));
    }
    let beta = |j: u32| log_tail_share(j).exp();
    // ω_j - 1 = (β_{j+1} - β_j)/(1 + β_j)
    let omega_minus_one = |j: u32| (beta(j + 1) - beta(j)) / (1.0 + beta(j));
    let kf = k as f64;
    let rho_prev = (kf / (kf + 1.0)).powi(2);
    let d_rho = (2.0 * kf * kf + 4.0 * kf + 1.0) / ((kf + 1.0).powi(2) * (kf + 2.0).powi(2));
    let om_k = omega_minus_one(k);
    let d_omega = om_k - omega_minus_one(k - 1);
    let term = 4f64.exp() * (d_rho * (1.0 + om_k) + rho_prev * d_omega);
    if !(term.is_finite() && term > 0.0) {
        return Err(Error::numerical(format!("Ω₀ term at k = {k} evaluated to {term}")));
    }
    Ok(term)
}

/// `c_{(k+1,k+1)}²/c_{(k,k)}² - c_{(k,k)}²/c_{(k-1,k-1)}²`, switching to the
/// compensated form once the two ratios agree to 1e-4.
pub fn omega0_term(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("the Ω₀ series term is defined for k ≥ 1"));
    }
    match omega0_term_naive(k) {
        Ok(t) if t > 1e-4 * omega0_ratio(k) => Ok(t),
        _ => omega0_term_compensated(k),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct S11Summary {
    pub m: u32,
    /// Term-by-term sum over the diagonal `j ≤ M`.
    pub partial_sum: f64,
    /// `c_{(M+1,M+1)}²/c_{(M,M)}²`, the telescoped value of the same sum.
    pub telescoped: f64,
    pub limit_estimate: f64,
    /// `3e⁴/M`, valid for `M ≥ 100`.
    pub tail_bound: f64,
}

/// Partial sums of `S_{(1,1)}` on Ω₀. The `j = 0` term is `u_0` since
/// `(−1,−1)` is off the lattice.
pub fn omega0_s11(m: u32) -> Result<S11Summary> {
    if m == 0 {
        return Err(Error::invalid("omega0_s11 needs M ≥ 1"));
    }
    let mut sum = omega0_ratio(0);
    let mut comp = 0.0;
    for j in 1..=m {
        // Kahan summation: 10⁴ terms of size ~1/j² against a sum of ~55
        let y = omega0_term(j)? - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let limit = 4f64.exp();
    Ok(S11Summary {
        m,
        partial_sum: sum,
        telescoped: omega0_ratio(m),
        limit_estimate: limit,
        tail_bound: 3.0 * limit / m as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSeriesStructure {
    /// Symbol index `(j, j)`.
    pub j: u32,
    /// Lattice points `(i, i)` with `i + j ≤ k`: the terms of `S_{(j,j)}` that can be nonzero.
    pub nonzero_terms: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaKReport {
    pub k: u32,
    /// Exponents `j` of the basis monomials `(z₁z₂)^j`.
    pub basis: Vec<u32>,
    pub series: Vec<DiagonalSeriesStructure>,
    pub finite_dimensional: bool,
    pub verdict: String,
}

/// Structure of A²(Ω_k): basis `{(z₁z₂)^j}_{j=0}^k`, every `S_{(j,j)}` a finite sum.
pub fn omegak_report(k: u32) -> Result<OmegaKReport> {
    if k == 0 {
        return Err(Error::invalid("Ω_k is defined for positive k"));
    }
    Ok(OmegaKReport {
        k,
        basis: (0..=k).collect(),
        series: (1..=k)
            .map(|j| DiagonalSeriesStructure {
                j,
                nonzero_terms: k - j + 1,
            })
            .collect(),
        finite_dimensional: true,
        verdict: "Hilbert-Schmidt on the subspace where bounded (finite-dimensional Bergman space)"
            .to_string(),
    })
}
