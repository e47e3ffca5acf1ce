//! The Hilbert–Schmidt series `S_α` of Hankel operators with symbol `z̄^α`.
//!
//! For the orthonormal basis `z^γ/c_γ`,
//!
//! ```text
//! ‖H_{f̄}(z^γ/c_γ)‖² summed over γ  =  Σ_α |f_α|² S_α,
//! S_α = Σ_γ ( c_{γ+α}²/c_γ² − c_γ²/c_{γ−α}² ),
//! ```
//!
//! with the second ratio taken as 0 when `γ−α` is not a basis index. Partial
//! sums run over the simplex `|γ| ≤ N` (or diagonal index `≤ N`).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, MultiIndex, ProfileFamily};
use crate::error::{Error, Result};
use crate::growth::{classify_growth, Growth};
use crate::moments::{monomial_in_basis, MomentTable};

/// A finitely supported holomorphic symbol `f = Σ f_α z^α / c_α`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<(MultiIndex, Complex64)>", from = "Vec<(MultiIndex, Complex64)>")]
pub struct SymbolSpec {
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl SymbolSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c · z^α / c_α`; zero coefficients are dropped.
    pub fn with(mut self, alpha: MultiIndex, c: Complex64) -> Self {
        if c != Complex64::new(0.0, 0.0) {
            *self.coeffs.entry(alpha).or_default() += c;
        }
        self
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coeffs
    }
}

impl From<SymbolSpec> for Vec<(MultiIndex, Complex64)> {
    fn from(s: SymbolSpec) -> Self {
        s.coeffs.into_iter().collect()
    }
}

impl From<Vec<(MultiIndex, Complex64)>> for SymbolSpec {
    fn from(v: Vec<(MultiIndex, Complex64)>) -> Self {
        v.into_iter().fold(SymbolSpec::new(), |s, (a, c)| s.with(a, c))
    }
}

fn require_in_space(table: &MomentTable, g: MultiIndex, what: &str) -> Result<()> {
    if monomial_in_basis(table.spec(), g) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} {g} is not a basis index of {}",
            table.spec().label()
        )))
    }
}

fn check_alpha(table: &MomentTable, alpha: MultiIndex) -> Result<()> {
    if alpha.is_zero() {
        return Err(Error::invalid("S_α is only defined for nonzero α"));
    }
    require_in_space(table, alpha, "α =")
}

/// `c_{γ+α}²/c_γ² − c_γ²/c_{γ−α}²`, from log-moment differences.
pub fn hs_term(table: &MomentTable, gamma: MultiIndex, alpha: MultiIndex) -> Result<f64> {
    require_in_space(table, gamma, "γ =")?;
    require_in_space(table, alpha, "α =")?;
    if alpha.is_zero() {
        return Ok(0.0);
    }
    let c_g = table.log_c_sq(gamma)?;
    let up = table.log_c_sq(gamma + alpha)?.ratio(c_g);
    let down = match gamma.checked_sub(alpha) {
        Some(d) if monomial_in_basis(table.spec(), d) => c_g.ratio(table.log_c_sq(d)?),
        _ => 0.0,
    };
    Ok(up - down)
}

/// The same term as `‖(I−P)(z̄^α z^γ)‖²/c_γ² = (c_{γ+α}² c_{γ−α}² − c_γ⁴)/(c_γ² c_{γ−α}²)`,
/// evaluated as a difference of products.
pub fn hs_term_projection(table: &MomentTable, gamma: MultiIndex, alpha: MultiIndex) -> Result<f64> {
    require_in_space(table, gamma, "γ =")?;
    require_in_space(table, alpha, "α =")?;
    if alpha.is_zero() {
        return Ok(0.0);
    }
    let c_g = table.log_c_sq(gamma)?;
    let c_up = table.log_c_sq(gamma + alpha)?;
    let c_down = match gamma.checked_sub(alpha) {
        Some(d) if monomial_in_basis(table.spec(), d) => table.log_c_sq(d)?,
        _ => return Ok(c_up.ratio(c_g)),
    };
    let plus = c_up * c_down;
    let minus = c_g * c_g;
    let denom = c_g * c_down;
    Ok(match plus.checked_sub(minus) {
        Some(d) => d.ratio(denom),
        None => -minus.checked_sub(plus).expect("one ordering is nonnegative").ratio(denom),
    })
}

fn level_indices(table: &MomentTable, n: u32) -> Vec<MultiIndex> {
    table.spec().lattice().level(n)
}

fn prefetch_levels(table: &MomentTable, alpha: MultiIndex, max_level: u32) -> Result<()> {
    let mut needed = Vec::new();
    for n in 0..=max_level {
        for g in level_indices(table, n) {
            needed.push(g);
            needed.push(g + alpha);
            if let Some(d) = g.checked_sub(alpha) {
                if monomial_in_basis(table.spec(), d) {
                    needed.push(d);
                }
            }
        }
    }
    needed.sort();
    needed.dedup();
    table.prefetch(&needed)
}

fn level_sums(
    table: &MomentTable,
    max_level: u32,
    term: impl Fn(MultiIndex) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    (0..=max_level)
        .into_par_iter()
        .map(|n| {
            let mut sum = 0.0;
            for g in level_indices(table, n) {
                sum += term(g)?;
            }
            Ok(sum)
        })
        .collect()
}

fn check_levels(ns: &[u32]) -> Result<u32> {
    if ns.is_empty() {
        return Err(Error::invalid("at least one truncation level is required"));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("truncation levels must be strictly increasing"));
    }
    Ok(*ns.last().expect("nonempty"))
}

/// `S_α(N)` for each requested `N`, summing `hs_term` level by level.
pub fn s_alpha_partials(table: &MomentTable, alpha: MultiIndex, ns: &[u32]) -> Result<Vec<(u32, f64)>> {
    check_alpha(table, alpha)?;
    let max = check_levels(ns)?;
    prefetch_levels(table, alpha, max)?;
    let levels = level_sums(table, max, |g| hs_term(table, g, alpha))?;

    let mut out = Vec::with_capacity(ns.len());
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut wanted = ns.iter().peekable();
    for (n, v) in levels.into_iter().enumerate() {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if wanted.peek() == Some(&&(n as u32)) {
            out.push((n as u32, sum));
            wanted.next();
        }
    }
    Ok(out)
}

/// `S_α(N)` at a single truncation level.
pub fn s_alpha_partial(table: &MomentTable, alpha: MultiIndex, n: u32) -> Result<f64> {
    Ok(s_alpha_partials(table, alpha, &[n])?[0].1)
}

/// `Σ_{level(γ) = N} c_{γ+α}²/c_γ²`, a lower bound for `S_α(M)` whenever `M ≥ N`.
pub fn shell_bound(table: &MomentTable, alpha: MultiIndex, n: u32) -> Result<f64> {
    check_alpha(table, alpha)?;
    let mut sum = 0.0;
    for g in level_indices(table, n) {
        sum += table.log_c_sq(g + alpha)?.ratio(table.log_c_sq(g)?);
    }
    Ok(sum)
}

/// `Σ_{M−|α| < level(γ) ≤ M} c_{γ+α}²/c_γ²`: the value `S_α(M)` telescopes to.
pub fn boundary_band_sum(table: &MomentTable, alpha: MultiIndex, m: u32) -> Result<f64> {
    check_alpha(table, alpha)?;
    let width = table.spec().lattice().level_of(alpha);
    let mut sum = 0.0;
    for n in (m + 1).saturating_sub(width)..=m {
        sum += shell_bound(table, alpha, n)?;
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SAlphaReport {
    pub domain: String,
    pub alpha: MultiIndex,
    pub partials: Vec<(u32, f64)>,
    pub shell_bounds: Vec<(u32, f64)>,
    /// Inconclusive when fewer than 8 levels were sampled.
    pub classification: Growth,
    /// `λ_α·|I_N|`, filled in when a certificate applies.
    pub certificate_bound: Option<Vec<(u32, f64)>>,
    pub notes: Vec<String>,
}

impl SAlphaReport {
    pub fn partial_at(&self, n: u32) -> Option<f64> {
        self.partials.iter().find(|p| p.0 == n).map(|p| p.1)
    }
}

fn report_notes(spec: &DomainSpec) -> Vec<String> {
    let mut notes = vec!["shell sums bound S_alpha(M) from below for every M >= N".to_string()];
    if let DomainSpec::Profile(p) = spec {
        if p.family() != Some(ProfileFamily::Zero) {
            notes.push("monomials assumed complete in the Bergman space of the profile domain".into());
        }
    }
    notes
}

/// Partial sums, shell bounds and growth class at the given levels.
pub fn s_alpha_report(table: &MomentTable, alpha: MultiIndex, ns: &[u32]) -> Result<SAlphaReport> {
    let partials = s_alpha_partials(table, alpha, ns)?;
    let shell_bounds = ns
        .iter()
        .map(|&n| shell_bound(table, alpha, n).map(|v| (n, v)))
        .collect::<Result<Vec<_>>>()?;
    let classification = if partials.len() >= 8 {
        let samples: Vec<(f64, f64)> = partials.iter().map(|&(n, v)| (n as f64, v)).collect();
        classify_growth(&samples)?
    } else {
        Growth::Inconclusive
    };
    Ok(SAlphaReport {
        domain: table.spec().label(),
        alpha,
        partials,
        shell_bounds,
        classification,
        certificate_bound: None,
        notes: report_notes(table.spec()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsNormEntry {
    pub alpha: MultiIndex,
    pub coeff_abs_sq: f64,
    pub s_alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsNormReport {
    pub n: u32,
    /// `Σ_α |f_α|² S_α(N)`, a lower bound for `‖H_{f̄}‖²_HS`.
    pub value: f64,
    pub breakdown: Vec<HsNormEntry>,
}

/// Truncated squared Hilbert–Schmidt norm of `H_{f̄}`. The constant term contributes 0.
pub fn hs_norm_sq(table: &MomentTable, symbol: &SymbolSpec, n: u32) -> Result<HsNormReport> {
    for &alpha in symbol.coeffs().keys() {
        if !monomial_in_basis(table.spec(), alpha) {
            return Err(Error::invalid(format!(
                "symbol not in Bergman space: z^{alpha} is not square integrable on {}",
                table.spec().label()
            )));
        }
        if table.spec().lattice().level_of(alpha) > n {
            return Err(Error::invalid(format!("N = {n} is below the symbol index {alpha}")));
        }
    }
    let mut breakdown = Vec::new();
    let mut value = 0.0;
    for (&alpha, c) in symbol.coeffs() {
        let s = if alpha.is_zero() { 0.0 } else { s_alpha_partial(table, alpha, n)? };
        let w = c.norm_sqr();
        value += w * s;
        breakdown.push(HsNormEntry {
            alpha,
            coeff_abs_sq: w,
            s_alpha: s,
        });
    }
    Ok(HsNormReport { n, value, breakdown })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CoordinateSeries {
    NotInSpace { alpha: MultiIndex },
    Computed { report: SAlphaReport },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DbarVerdict {
    #[serde(rename = "not Hilbert-Schmidt")]
    NotHilbertSchmidt,
    #[serde(rename = "Hilbert-Schmidt")]
    HilbertSchmidt,
    #[serde(rename = "inconclusive")]
    Inconclusive,
    #[serde(rename = "not applicable")]
    NotApplicable,
}

impl DbarVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            DbarVerdict::NotHilbertSchmidt => "not Hilbert-Schmidt",
            DbarVerdict::HilbertSchmidt => "Hilbert-Schmidt",
            DbarVerdict::Inconclusive => "inconclusive",
            DbarVerdict::NotApplicable => "not applicable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbarReport {
    pub domain: String,
    pub n: u32,
    pub coordinates: Vec<CoordinateSeries>,
    pub verdict: DbarVerdict,
}

/// Up to 16 evenly spread levels in `1..=n`, always ending at `n`.
pub fn sample_levels(n: u32, count: u32) -> Vec<u32> {
    let mut v: Vec<u32> = (1..=count)
        .map(|i| ((n as u64 * i as u64) / count as u64) as u32)
        .filter(|&m| m > 0)
        .collect();
    v.dedup();
    v
}

/// `S_{(1,0)}` and `S_{(0,1)}`: the canonical solution operator of ∂̄ on
/// holomorphic (0,1)-forms is Hilbert–Schmidt iff both converge.
pub fn dbar_canonical_report(table: &MomentTable, n: u32) -> Result<DbarReport> {
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let ns = sample_levels(n, 16);
    let mut coordinates = Vec::new();
    for alpha in [MultiIndex::new(1, 0), MultiIndex::new(0, 1)] {
        if monomial_in_basis(table.spec(), alpha) {
            coordinates.push(CoordinateSeries::Computed {
                report: s_alpha_report(table, alpha, &ns)?,
            });
        } else {
            coordinates.push(CoordinateSeries::NotInSpace { alpha });
        }
    }
    let classes: Vec<Option<Growth>> = coordinates
        .iter()
        .map(|c| match c {
            CoordinateSeries::Computed { report } => Some(report.classification),
            CoordinateSeries::NotInSpace { .. } => None,
        })
        .collect();
    let verdict = if classes.iter().any(Option::is_none) {
        DbarVerdict::NotApplicable
    } else if classes.iter().flatten().any(Growth::is_divergent_linear) {
        DbarVerdict::NotHilbertSchmidt
    } else if classes.iter().flatten().all(Growth::is_convergent) {
        DbarVerdict::HilbertSchmidt
    } else {
        DbarVerdict::Inconclusive
    };
    Ok(DbarReport {
        domain: table.spec().label(),
        n,
        coordinates,
        verdict,
    })
}
