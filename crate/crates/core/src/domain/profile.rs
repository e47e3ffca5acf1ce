//! Radial profiles `φ` defining `Ω = {z₁ ∈ 𝔻, |z₂| < e^{-φ(|z₁|)}}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Built-in profile families, each with analytically coded derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileFamily {
    /// `φ ≡ 0`: the unit bidisc.
    Zero,
    /// `φ(r) = -log(1 - r²)`.
    NegLogOneMinusR2,
    /// `φ(r) = (1 - r)^{-p}`, `p > 0`.
    InvOneMinusPow { p: f64 },
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied profile for programmatic use (tests, experiments).
/// Config files cannot express these.
#[derive(Clone)]
pub struct CustomProfile {
    pub name: String,
    pub phi: RealFn,
    pub dphi: RealFn,
    pub d2phi: RealFn,
    /// Whether `φ(r) → +∞` as `r → 1⁻` is declared for this profile.
    pub diverges_at_boundary: bool,
}

#[derive(Clone)]
enum Kind {
    Family(ProfileFamily),
    Custom(CustomProfile),
}

#[derive(Clone)]
pub struct RadialProfile {
    kind: Kind,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Family(fam) => write!(f, "RadialProfile({fam:?})"),
            Kind::Custom(c) => write!(f, "RadialProfile(custom {:?})", c.name),
        }
    }
}

/// Instantiates a built-in profile by family name.
///
/// Recognised names: `zero`, `neg_log_one_minus_r2`, `inv_one_minus_pow` (requires `p > 0`).
pub fn profile_family(name: &str, params: &BTreeMap<String, f64>) -> Result<RadialProfile> {
    let family = match name {
        "zero" => ProfileFamily::Zero,
        "neg_log_one_minus_r2" => ProfileFamily::NegLogOneMinusR2,
        "inv_one_minus_pow" => {
            let p = *params
                .get("p")
                .ok_or_else(|| Error::invalid("inv_one_minus_pow requires parameter p"))?;
            ProfileFamily::InvOneMinusPow { p }
        }
        other => return Err(Error::invalid(format!("unknown profile family {other:?}"))),
    };
    let allowed: &[&str] = match family {
        ProfileFamily::InvOneMinusPow { .. } => &["p"],
        _ => &[],
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::invalid(format!(
            "profile family {name:?} does not take parameter {extra:?}"
        )));
    }
    RadialProfile::from_family(family)
}

impl RadialProfile {
    pub fn from_family(family: ProfileFamily) -> Result<Self> {
        if let ProfileFamily::InvOneMinusPow { p } = family {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("inv_one_minus_pow needs p > 0, got {p}")));
            }
        }
        Ok(RadialProfile {
            kind: Kind::Family(family),
        })
    }

    pub fn zero() -> Self {
        RadialProfile {
            kind: Kind::Family(ProfileFamily::Zero),
        }
    }

    pub fn neg_log_one_minus_r2() -> Self {
        RadialProfile {
            kind: Kind::Family(ProfileFamily::NegLogOneMinusR2),
        }
    }

    pub fn inv_one_minus_pow(p: f64) -> Result<Self> {
        Self::from_family(ProfileFamily::InvOneMinusPow { p })
    }

    pub fn custom(profile: CustomProfile) -> Self {
        RadialProfile {
            kind: Kind::Custom(profile),
        }
    }

    pub fn family(&self) -> Option<ProfileFamily> {
        match &self.kind {
            Kind::Family(f) => Some(*f),
            Kind::Custom(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Family(ProfileFamily::Zero) => "zero".into(),
            Kind::Family(ProfileFamily::NegLogOneMinusR2) => "neg_log_one_minus_r2".into(),
            Kind::Family(ProfileFamily::InvOneMinusPow { .. }) => "inv_one_minus_pow".into(),
            Kind::Custom(c) => c.name.clone(),
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        if let Kind::Family(ProfileFamily::InvOneMinusPow { p }) = &self.kind {
            m.insert("p".to_string(), *p);
        }
        m
    }

    /// Declared `lim_{r→1⁻} φ(r) = +∞`.
    pub fn diverges_at_boundary(&self) -> bool {
        match &self.kind {
            Kind::Family(ProfileFamily::Zero) => false,
            Kind::Family(_) => true,
            Kind::Custom(c) => c.diverges_at_boundary,
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Family(ProfileFamily::Zero) => 0.0,
            Kind::Family(ProfileFamily::NegLogOneMinusR2) => -(-r * r).ln_1p(),
            Kind::Family(ProfileFamily::InvOneMinusPow { p }) => (1.0 - r).powf(-p),
            Kind::Custom(c) => (c.phi)(r),
        }
    }

    pub fn dphi(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Family(ProfileFamily::Zero) => 0.0,
            Kind::Family(ProfileFamily::NegLogOneMinusR2) => 2.0 * r / (1.0 - r * r),
            Kind::Family(ProfileFamily::InvOneMinusPow { p }) => p * (1.0 - r).powf(-p - 1.0),
            Kind::Custom(c) => (c.dphi)(r),
        }
    }

    pub fn d2phi(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Family(ProfileFamily::Zero) => 0.0,
            Kind::Family(ProfileFamily::NegLogOneMinusR2) => {
                let s = 1.0 - r * r;
                (2.0 + 2.0 * r * r) / (s * s)
            }
            Kind::Family(ProfileFamily::InvOneMinusPow { p }) => {
                p * (p + 1.0) * (1.0 - r).powf(-p - 2.0)
            }
            Kind::Custom(c) => (c.d2phi)(r),
        }
    }

    /// `r φ'(r)`, the quantity compared against `x/y` in the window condition.
    pub fn r_dphi(&self, r: f64) -> f64 {
        r * self.dphi(r)
    }

    /// The radial Laplacian `φ'' + φ'/r` of `z ↦ φ(|z|)`.
    pub fn laplacian(&self, r: f64) -> f64 {
        self.d2phi(r) + self.dphi(r) / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn zero_family_at_half() {
        let p = profile_family("zero", &params(&[])).unwrap();
        assert_eq!((p.phi(0.5), p.dphi(0.5), p.d2phi(0.5)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn neg_log_family_at_half() {
        let p = profile_family("neg_log_one_minus_r2", &params(&[])).unwrap();
        assert!((p.phi(0.5) - 0.287_682_072_451_780_9).abs() < 1e-15);
    }

    #[test]
    fn inv_pow_family_at_half() {
        let p = profile_family("inv_one_minus_pow", &params(&[("p", 1.0)])).unwrap();
        assert!((p.phi(0.5) - 2.0).abs() < 1e-15);
        assert!((p.dphi(0.5) - 4.0).abs() < 1e-14);
        assert!((p.d2phi(0.5) - 16.0).abs() < 1e-13);
    }

    #[test]
    fn unknown_family_rejected() {
        let e = profile_family("cosh", &params(&[])).unwrap_err();
        assert!(e.is_invalid_input());
        assert!(profile_family("inv_one_minus_pow", &params(&[])).is_err());
        assert!(profile_family("inv_one_minus_pow", &params(&[("p", -1.0)])).is_err());
        assert!(profile_family("zero", &params(&[("p", 1.0)])).is_err());
    }
}
