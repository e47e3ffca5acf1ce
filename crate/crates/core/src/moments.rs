//! Log-domain monomial moments `c_γ² = ∫_Ω |z^γ|² dV`.
//!
//! On a profile domain the moment reduces to a one-dimensional radial integral
//!
//! ```text
//! c_γ² = 2π²/(γ₂+1) · M(2γ₁+1, 2γ₂+2),    M(x, y) = ∫₀¹ r^x e^{-y φ(r)} dr,
//! ```
//!
//! and on a general radial shadow to `4π² ∬ r₁^{2γ₁+1} r₂^{2γ₂+1} dr₁ dr₂`, with the
//! inner integral taken in closed form.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::domain::{radial_shadow, Axis, DomainSpec, MultiIndex, ProfileFamily, RadialProfile, RadialRegion, RegionPiece};
use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::quadrature::{integrate_log, QuadratureSettings};
use crate::wiegerinck::omega0_log_ck_sq;

/// A moment that is either finite or infinite (monomial not square integrable).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "log", rename_all = "snake_case")]
pub enum Moment {
    Finite(LogValue),
    Divergent,
}

impl Moment {
    pub fn finite(self) -> Option<LogValue> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Moment::Divergent)
    }
}

fn radial_log_integrand(profile: &RadialProfile, x: f64, y: f64) -> impl Fn(f64) -> f64 + '_ {
    move |r: f64| {
        if r <= 0.0 {
            return if x == 0.0 { -y * profile.phi(0.0) } else { f64::NEG_INFINITY };
        }
        if r >= 1.0 {
            return if y == 0.0 && !profile.diverges_at_boundary() { 0.0 } else { f64::NEG_INFINITY };
        }
        let power = if x == 0.0 { 0.0 } else { x * r.ln() };
        let weight = if y == 0.0 { 0.0 } else { -y * profile.phi(r) };
        power + weight
    }
}

fn check_exponents(x: f64, y: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite() && y >= 0.0 && y.is_finite()) {
        return Err(Error::invalid(format!("radial moment needs finite x, y ≥ 0, got ({x}, {y})")));
    }
    Ok(())
}

// Where y·φ(r) first exceeds log(1/rel_tol) + |log max|: beyond it the integrand
// is below rel_tol times its maximum.
fn automatic_split(profile: &RadialProfile, x: f64, y: f64, settings: &QuadratureSettings) -> Option<f64> {
    if y == 0.0 || !profile.diverges_at_boundary() {
        return None;
    }
    let log_f = radial_log_integrand(profile, x, y);
    let (mut best_r, mut best) = (0.5, f64::NEG_INFINITY);
    for i in 1..256 {
        let r = i as f64 / 256.0;
        let v = log_f(r);
        if v > best {
            best = v;
            best_r = r;
        }
    }
    if !best.is_finite() {
        return None;
    }
    let threshold = (1.0 / settings.rel_tol).ln() + best.abs();
    let exceeds = |r: f64| y * profile.phi(r) > threshold;
    let (mut lo, mut hi) = (best_r, 1.0 - f64::EPSILON);
    if exceeds(lo) || !exceeds(hi) {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if exceeds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `log ∫₀¹ r^x e^{-y φ(r)} dr` by adaptive quadrature only (no closed forms).
pub fn log_radial_moment_quadrature(
    profile: &RadialProfile,
    x: f64,
    y: f64,
    settings: &QuadratureSettings,
) -> Result<LogValue> {
    check_exponents(x, y)?;
    let split = match settings.endpoint_split {
        Some(f) => Some(f),
        None => automatic_split(profile, x, y, settings),
    };
    let breaks: Vec<f64> = split.into_iter().collect();
    let q = integrate_log(radial_log_integrand(profile, x, y), 0.0, 1.0, &breaks, settings)?;
    Ok(q.value)
}

/// `M(x, y) = ∫₀¹ r^x e^{-y φ(r)} dr` in log form, using the closed form when the
/// profile family has one (`zero`: `1/(x+1)`; `neg_log_one_minus_r2`: `½B((x+1)/2, y+1)`).
pub fn log_radial_moment(
    profile: &RadialProfile,
    x: f64,
    y: f64,
    settings: &QuadratureSettings,
) -> Result<LogValue> {
    check_exponents(x, y)?;
    settings.validate()?;
    match profile.family() {
        Some(ProfileFamily::Zero) => Ok(LogValue::from_log(-(x + 1.0).ln())),
        Some(ProfileFamily::NegLogOneMinusR2) => {
            let a = 0.5 * (x + 1.0);
            let b = y + 1.0;
            Ok(LogValue::from_log(
                ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b) - 2f64.ln(),
            ))
        }
        _ => log_radial_moment_quadrature(profile, x, y, settings),
    }
}

/// `log ∫_lo^hi r^x e^{-y φ(r)} dr` by quadrature, for `0 ≤ lo < hi ≤ 1`.
pub fn log_radial_integral(
    profile: &RadialProfile,
    x: f64,
    y: f64,
    lo: f64,
    hi: f64,
    settings: &QuadratureSettings,
) -> Result<LogValue> {
    check_exponents(x, y)?;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::invalid(format!("need 0 ≤ lo < hi ≤ 1, got ({lo}, {hi})")));
    }
    let q = integrate_log(radial_log_integrand(profile, x, y), lo, hi, &[], settings)?;
    Ok(q.value)
}

fn piece_exponents(piece: &RegionPiece, gamma: MultiIndex) -> (u32, u32) {
    match piece.outer {
        Axis::R1 => (gamma.g1, gamma.g2),
        Axis::R2 => (gamma.g2, gamma.g1),
    }
}

/// `∫ t^{2γ_o+1} ∫_fiber s^{2γ_i+1} ds dt` over one piece, in log form.
fn log_piece_integral(piece: &RegionPiece, gamma: MultiIndex, settings: &QuadratureSettings) -> Result<Moment> {
    let (g_outer, g_inner) = piece_exponents(piece, gamma);
    let q = 2.0 * g_outer as f64 + 1.0;
    let p = 2.0 * g_inner as f64 + 2.0;
    let fiber = &piece.fiber;

    if let Some(end) = piece.end {
        let log_f = |t: f64| {
            if t <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let lt = t.ln();
            q * lt + fiber.log_inner(t, lt, p)
        };
        let r = integrate_log(log_f, piece.start, end, &[], settings)?;
        return Ok(Moment::Finite(r.value));
    }

    let tail = piece
        .tail
        .ok_or_else(|| Error::invalid("unbounded region piece without a tail description"))?;
    if !tail.converges(g_outer, g_inner) {
        return Ok(Moment::Divergent);
    }
    if piece.start <= 0.0 {
        return Err(Error::invalid("unbounded region pieces must start at a positive radius"));
    }
    let (s, qlog) = tail.exponents(g_outer, g_inner);

    // t = e^u, dt = e^u du
    let log_g = |u: f64| (q + 1.0) * u + fiber.log_inner(u.exp(), u, p);
    let u0 = piece.start.ln();
    let mut total = LogValue::ZERO;
    let mut a = u0;
    let mut len = u0.abs().max(1.0);
    for _ in 0..400 {
        let b = a + len;
        // far segments get an absolute budget of rel_tol/64 of the running total:
        // at large u the exponent sum loses digits to cancellation
        let mut rel_tol = settings.rel_tol / 4.0;
        if !total.is_zero() {
            let log_guess = (0..=8)
                .map(|i| log_g(a + len * i as f64 / 8.0))
                .fold(f64::NEG_INFINITY, f64::max)
                + len.ln();
            let budget = (settings.rel_tol / 64.0).ln() + total.ln() - log_guess;
            rel_tol = rel_tol.max(budget.exp()).min(1e-4);
        }
        let seg_settings = QuadratureSettings { rel_tol, ..*settings };
        let seg = integrate_log(log_g, a, b, &[], &seg_settings)?;
        total = total + seg.value;
        a = b;
        len *= 2.0;

        // ∫_U^∞ e^{(s+1)u} u^q du ≈ g(U) / (-(s+1) - q/U), or g(U)·U/(-q-1) when s = -1
        let rate = -(s + 1.0);
        let log_tail = if rate > 1e-12 {
            let denom = rate - qlog / a;
            if denom < 0.5 * rate {
                continue;
            }
            log_g(a) - denom.ln()
        } else {
            log_g(a) + a.ln() - (-qlog - 1.0).ln()
        };
        if !total.is_zero() && log_tail <= total.ln() + (settings.rel_tol / 8.0).ln() {
            return Ok(Moment::Finite(total));
        }
    }
    Err(Error::NumericalFailure {
        message: "tail truncation point not reached".into(),
        estimate: total.ln(),
        error: f64::NAN,
    })
}

/// `c_γ²` over a radial shadow: `4π² Σ_pieces ∬ r₁^{2γ₁+1} r₂^{2γ₂+1}`.
/// Divergent as soon as one unbounded piece fails its tail test.
pub fn log_region_moment(
    region: &RadialRegion,
    gamma: MultiIndex,
    settings: &QuadratureSettings,
) -> Result<Moment> {
    settings.validate()?;
    let mut total = LogValue::ZERO;
    for piece in region.pieces() {
        match log_piece_integral(piece, gamma, settings)? {
            Moment::Divergent => return Ok(Moment::Divergent),
            Moment::Finite(v) => total = total + v,
        }
    }
    Ok(Moment::Finite(total.scale(4.0 * PI * PI)))
}

/// `log c_γ²` on any supported domain.
pub fn log_c_gamma_sq(spec: &DomainSpec, gamma: MultiIndex, settings: &QuadratureSettings) -> Result<Moment> {
    match spec {
        DomainSpec::Profile(profile) => {
            let m = log_radial_moment(
                profile,
                2.0 * gamma.g1 as f64 + 1.0,
                2.0 * gamma.g2 as f64 + 2.0,
                settings,
            )?;
            Ok(Moment::Finite(m.scale(2.0 * PI * PI / (gamma.g2 as f64 + 1.0))))
        }
        DomainSpec::WiegerinckOmega0 => {
            if gamma.g1 != gamma.g2 {
                Ok(Moment::Divergent)
            } else {
                Ok(Moment::Finite(omega0_log_ck_sq(gamma.g1)))
            }
        }
        DomainSpec::WiegerinckOmegaK { .. } => {
            if !spec.lattice().contains(gamma) {
                Ok(Moment::Divergent)
            } else {
                Err(Error::invalid(
                    "moment values on Ω_k (including the strip) are not computed; \
                     only its basis structure is reported",
                ))
            }
        }
        DomainSpec::Polydisc { .. } | DomainSpec::Ball | DomainSpec::Region(_) => {
            log_region_moment(&radial_shadow(spec), gamma, settings)
        }
    }
}

/// Whether `z^γ` belongs to the Bergman space of the domain.
pub fn monomial_in_basis(spec: &DomainSpec, gamma: MultiIndex) -> bool {
    match spec {
        DomainSpec::Region(region) => {
            region.is_bounded()
                || region.pieces().iter().all(|piece| {
                    if piece.end.is_some() {
                        return true;
                    }
                    let (o, i) = piece_exponents(piece, gamma);
                    piece.tail.is_some_and(|t| t.converges(o, i))
                })
        }
        _ => spec.lattice().contains(gamma),
    }
}

/// Memoised moments for one domain. Cached values are exactly what
/// [`log_c_gamma_sq`] returns, so caching never changes results.
pub struct MomentTable {
    spec: DomainSpec,
    settings: QuadratureSettings,
    cache: RwLock<HashMap<MultiIndex, Moment>>,
}

impl MomentTable {
    pub fn new(spec: DomainSpec, settings: QuadratureSettings) -> Result<Self> {
        settings.validate()?;
        Ok(MomentTable {
            spec,
            settings,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    pub fn moment(&self, gamma: MultiIndex) -> Result<Moment> {
        if let Some(m) = self.cache.read().expect("moment cache poisoned").get(&gamma) {
            return Ok(*m);
        }
        let m = log_c_gamma_sq(&self.spec, gamma, &self.settings)?;
        self.cache
            .write()
            .expect("moment cache poisoned")
            .insert(gamma, m);
        Ok(m)
    }

    /// The finite moment, or an invalid-input error naming the divergent index.
    pub fn log_c_sq(&self, gamma: MultiIndex) -> Result<LogValue> {
        self.moment(gamma)?.finite().ok_or_else(|| {
            Error::invalid(format!("z^{gamma} is not square integrable on {}", self.spec.label()))
        })
    }

    /// Computes the listed moments in parallel and stores them.
    pub fn prefetch(&self, gammas: &[MultiIndex]) -> Result<()> {
        let missing: Vec<MultiIndex> = {
            let cache = self.cache.read().expect("moment cache poisoned");
            gammas.iter().copied().filter(|g| !cache.contains_key(g)).collect()
        };
        let computed: Vec<(MultiIndex, Moment)> = missing
            .par_iter()
            .map(|&g| log_c_gamma_sq(&self.spec, g, &self.settings).map(|m| (g, m)))
            .collect::<Result<_>>()?;
        self.cache
            .write()
            .expect("moment cache poisoned")
            .extend(computed);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cache.read().expect("moment cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn zero_profile_moment() {
        let m = log_radial_moment(&RadialProfile::zero(), 3.0, 7.0, &s()).unwrap();
        assert!(close(m.value(), 0.25, 1e-15));
    }

    #[test]
    fn neg_log_profile_small_moment() {
        let p = RadialProfile::neg_log_one_minus_r2();
        let m = log_radial_moment(&p, 1.0, 1.0, &s()).unwrap();
        assert!(close(m.value(), 0.25, 1e-13));
    }

    #[test]
    fn neg_log_profile_quadrature_agrees_with_beta_at_large_exponents() {
        // ½ B(101, 401) with integer arguments: 100!·400!/(2·501!), as a sum of logs
        let oracle: f64 = (1..=100).map(|i| (i as f64).ln()).sum::<f64>()
            + (1..=400).map(|i| (i as f64).ln()).sum::<f64>()
            - (1..=501).map(|i| (i as f64).ln()).sum::<f64>()
            - 2f64.ln();
        let p = RadialProfile::neg_log_one_minus_r2();
        let closed = log_radial_moment(&p, 201.0, 400.0, &s()).unwrap();
        let quad = log_radial_moment_quadrature(&p, 201.0, 400.0, &s()).unwrap();
        assert!((closed.ln() - oracle).abs() < 1e-8);
        assert!((quad.ln() - oracle).abs() < 1e-8);
    }

    #[test]
    fn polydisc_volume() {
        let spec = DomainSpec::polydisc(1.0).unwrap();
        let m = log_c_gamma_sq(&spec, MultiIndex::ZERO, &s()).unwrap().finite().unwrap();
        assert!(close(m.value(), PI * PI, 1e-13));
        let m = log_c_gamma_sq(&spec, MultiIndex::new(3, 4), &s()).unwrap().finite().unwrap();
        assert!(close(m.value(), PI * PI / 20.0, 1e-12));
    }

    #[test]
    fn ball_moment_2_1() {
        let m = log_c_gamma_sq(&DomainSpec::Ball, MultiIndex::new(2, 1), &s())
            .unwrap()
            .finite()
            .unwrap();
        assert!(close(m.value(), PI * PI / 60.0, 1e-12));
    }

    #[test]
    fn beta_profile_volume() {
        let spec = DomainSpec::Profile(RadialProfile::neg_log_one_minus_r2());
        let m = log_c_gamma_sq(&spec, MultiIndex::ZERO, &s()).unwrap().finite().unwrap();
        assert!(close(m.value(), PI * PI / 3.0, 1e-13));
    }

    #[test]
    fn omega0_off_diagonal_diverges_by_region_and_by_lattice() {
        let region = radial_shadow(&DomainSpec::WiegerinckOmega0);
        assert!(log_region_moment(&region, MultiIndex::new(1, 0), &s()).unwrap().is_divergent());
        assert!(log_c_gamma_sq(&DomainSpec::WiegerinckOmega0, MultiIndex::new(1, 0), &s())
            .unwrap()
            .is_divergent());
    }

    #[test]
    fn omega0_region_quadrature_at_k0() {
        // X₃ gives π²e⁴, X₁ and X₂ give 2π² each
        let region = radial_shadow(&DomainSpec::WiegerinckOmega0);
        let m = log_region_moment(&region, MultiIndex::ZERO, &s()).unwrap().finite().unwrap();
        let exact = PI * PI * (4.0 + 4f64.exp());
        assert!(close(m.value(), exact, 1e-8), "{} vs {}", m.value(), exact);
    }

    #[test]
    fn profile_shadow_matches_direct_reduction() {
        let spec = DomainSpec::Profile(RadialProfile::inv_one_minus_pow(1.0).unwrap());
        let region = radial_shadow(&spec);
        for g in [MultiIndex::new(0, 0), MultiIndex::new(3, 5), MultiIndex::new(12, 2)] {
            let a = log_c_gamma_sq(&spec, g, &s()).unwrap().finite().unwrap();
            let b = log_region_moment(&region, g, &s()).unwrap().finite().unwrap();
            assert!((a.ln() - b.ln()).abs() < 1e-9, "{g}: {} vs {}", a.ln(), b.ln());
        }
    }

    #[test]
    fn membership() {
        assert!(monomial_in_basis(&DomainSpec::WiegerinckOmega0, MultiIndex::new(3, 3)));
        assert!(!monomial_in_basis(&DomainSpec::omega_k(2).unwrap(), MultiIndex::new(3, 3)));
        assert!(monomial_in_basis(&DomainSpec::polydisc(1.0).unwrap(), MultiIndex::new(7, 0)));
        let shadow = DomainSpec::Region(radial_shadow(&DomainSpec::WiegerinckOmega0));
        assert!(monomial_in_basis(&shadow, MultiIndex::new(4, 4)));
        assert!(!monomial_in_basis(&shadow, MultiIndex::new(4, 3)));
    }

    #[test]
    fn strip_tail_admits_diagonal_indices_below_k() {
        // B_{4k} makes (z₁z₂)^j integrable iff 4j + 3 < 4k
        let shadow = DomainSpec::Region(radial_shadow(&DomainSpec::omega_k(3).unwrap()));
        assert!(monomial_in_basis(&shadow, MultiIndex::new(2, 2)));
        assert!(!monomial_in_basis(&shadow, MultiIndex::new(3, 3)));
    }

    #[test]
    fn missing_tail_is_invalid_input() {
        let region = RadialRegion::new(
            vec![RegionPiece {
                outer: Axis::R1,
                start: 1.0,
                end: None,
                fiber: crate::domain::Fiber::Below(crate::domain::FiberBound::InvTLogT),
                tail: None,
            }],
            false,
        )
        .unwrap();
        assert!(log_region_moment(&region, MultiIndex::ZERO, &s()).unwrap_err().is_invalid_input());
    }

    #[test]
    fn omega_k_moments_not_computed() {
        let spec = DomainSpec::omega_k(2).unwrap();
        assert!(log_c_gamma_sq(&spec, MultiIndex::new(1, 1), &s()).is_err());
        assert!(log_c_gamma_sq(&spec, MultiIndex::new(3, 3), &s()).unwrap().is_divergent());
    }

    #[test]
    fn table_is_cache_transparent() {
        let spec = DomainSpec::Profile(RadialProfile::inv_one_minus_pow(1.0).unwrap());
        let table = MomentTable::new(spec.clone(), s()).unwrap();
        let gs: Vec<MultiIndex> = (0..6).flat_map(MultiIndex::shell).collect();
        table.prefetch(&gs).unwrap();
        for g in gs {
            let direct = log_c_gamma_sq(&spec, g, &s()).unwrap();
            assert_eq!(table.moment(g).unwrap(), direct);
        }
    }
}
