//! Domain descriptions: multi-indices, basis lattices, profiles, radial shadows.

pub mod profile;
pub mod region;

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use profile::{profile_family, CustomProfile, ProfileFamily, RadialProfile};
pub use region::{Axis, Fiber, FiberBound, RadialRegion, RegionPiece, TailDecay};

/// Exponent pair `(γ₁, γ₂)` of the monomial `z₁^γ₁ z₂^γ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    pub g1: u32,
    pub g2: u32,
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex { g1: 0, g2: 0 };

    pub const fn new(g1: u32, g2: u32) -> Self {
        MultiIndex { g1, g2 }
    }

    pub fn order(self) -> u32 {
        self.g1 + self.g2
    }

    pub fn is_zero(self) -> bool {
        self == MultiIndex::ZERO
    }

    /// Componentwise difference, `None` if any component would go negative.
    pub fn checked_sub(self, other: MultiIndex) -> Option<MultiIndex> {
        Some(MultiIndex::new(
            self.g1.checked_sub(other.g1)?,
            self.g2.checked_sub(other.g2)?,
        ))
    }

    /// All multi-indices with `|γ| = n`, ordered by `γ₁`.
    pub fn shell(n: u32) -> impl Iterator<Item = MultiIndex> {
        (0..=n).map(move |k| MultiIndex::new(k, n - k))
    }
}

impl std::ops::Add for MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: MultiIndex) -> MultiIndex {
        MultiIndex::new(self.g1 + rhs.g1, self.g2 + rhs.g2)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.g1, self.g2)
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Parses `"a,b"` (optionally parenthesised).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = t.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::invalid(format!("multi-index must be 'a,b', got {s:?}")));
        }
        let parse = |p: &str| {
            p.parse::<u32>()
                .map_err(|_| Error::invalid(format!("bad multi-index component {p:?}")))
        };
        Ok(MultiIndex::new(parse(parts[0])?, parse(parts[1])?))
    }
}

/// The monomials `z^γ` that belong to the Bergman space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisLattice {
    FullQuadrant,
    /// `γ₁ = γ₂`.
    Diagonal,
    /// `γ₁ = γ₂ ≤ k`.
    DiagonalTruncated { k: u32 },
}

impl BasisLattice {
    pub fn contains(self, g: MultiIndex) -> bool {
        match self {
            BasisLattice::FullQuadrant => true,
            BasisLattice::Diagonal => g.g1 == g.g2,
            BasisLattice::DiagonalTruncated { k } => g.g1 == g.g2 && g.g1 <= k,
        }
    }

    /// Lattice points of "level" `n`: the shell `|γ| = n` for the full quadrant,
    /// the single point `(n, n)` for diagonal lattices.
    pub fn level(self, n: u32) -> Vec<MultiIndex> {
        match self {
            BasisLattice::FullQuadrant => MultiIndex::shell(n).collect(),
            BasisLattice::Diagonal => vec![MultiIndex::new(n, n)],
            BasisLattice::DiagonalTruncated { k } => {
                if n <= k {
                    vec![MultiIndex::new(n, n)]
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Level of a lattice point: `|γ|` on the quadrant, the diagonal index otherwise.
    pub fn level_of(self, g: MultiIndex) -> u32 {
        match self {
            BasisLattice::FullQuadrant => g.order(),
            _ => g.g1,
        }
    }
}

#[derive(Clone, Debug)]
pub enum DomainSpec {
    Profile(RadialProfile),
    Region(RadialRegion),
    /// `𝔻 × c𝔻` with `c = radius`.
    Polydisc { radius: f64 },
    /// The unit ball of `ℂ²`.
    Ball,
    WiegerinckOmega0,
    WiegerinckOmegaK { k: u32 },
}

impl DomainSpec {
    pub fn polydisc(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("polydisc radius must be positive, got {radius}")));
        }
        Ok(DomainSpec::Polydisc { radius })
    }

    pub fn omega_k(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("Ω_k is defined for positive k"));
        }
        Ok(DomainSpec::WiegerinckOmegaK { k })
    }

    pub fn lattice(&self) -> BasisLattice {
        match self {
            DomainSpec::WiegerinckOmega0 => BasisLattice::Diagonal,
            DomainSpec::WiegerinckOmegaK { k } => BasisLattice::DiagonalTruncated { k: *k },
            _ => BasisLattice::FullQuadrant,
        }
    }

    pub fn profile(&self) -> Option<&RadialProfile> {
        match self {
            DomainSpec::Profile(p) => Some(p),
            _ => None,
        }
    }

    /// Stable textual identity, also accepted by [`DomainSpec::parse`] for built-ins.
    pub fn label(&self) -> String {
        match self {
            DomainSpec::Profile(p) => {
                let params: Vec<String> =
                    p.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
                if params.is_empty() {
                    format!("profile:{}", p.name())
                } else {
                    format!("profile:{}:{}", p.name(), params.join(","))
                }
            }
            DomainSpec::Region(_) => "region".to_string(),
            DomainSpec::Polydisc { radius } => format!("polydisc:{radius}"),
            DomainSpec::Ball => "ball".to_string(),
            DomainSpec::WiegerinckOmega0 => "omega0".to_string(),
            DomainSpec::WiegerinckOmegaK { k } => format!("omegak:{k}"),
        }
    }

    /// Parses `family[:params]`: `polydisc[:c]`, `ball`, `omega0`, `omegak:k`,
    /// `profile:zero`, `profile:neg_log_one_minus_r2`, `profile:inv_one_minus_pow:p=1`
    /// (a bare number is read as `p`).
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.trim().splitn(3, ':');
        let head = parts.next().unwrap_or_default();
        let arg = parts.next();
        let rest = parts.next();
        let num = |v: &str, what: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad {what} {v:?} in domain {s:?}")))
        };
        match (head, arg, rest) {
            ("polydisc", None, None) => DomainSpec::polydisc(1.0),
            ("polydisc", Some(c), None) => DomainSpec::polydisc(num(c, "radius")?),
            ("ball", None, None) => Ok(DomainSpec::Ball),
            ("omega0", None, None) => Ok(DomainSpec::WiegerinckOmega0),
            ("omegak", Some(k), None) => {
                let k = k
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::invalid(format!("bad k {k:?} in domain {s:?}")))?;
                DomainSpec::omega_k(k)
            }
            ("profile", Some(name), params) => {
                let mut map = BTreeMap::new();
                if let Some(params) = params {
                    for kv in params.split(',').filter(|x| !x.trim().is_empty()) {
                        match kv.split_once('=') {
                            Some((k, v)) => map.insert(k.trim().to_string(), num(v, "parameter")?),
                            None => map.insert("p".to_string(), num(kv, "parameter")?),
                        };
                    }
                }
                Ok(DomainSpec::Profile(profile_family(name.trim(), &map)?))
            }
            _ => Err(Error::invalid(format!("unrecognised domain {s:?}"))),
        }
    }
}

/// The region of the `(r₁, r₂)` quarter-plane whose rotations recover the domain.
pub fn radial_shadow(spec: &DomainSpec) -> RadialRegion {
    let build = |pieces, bounded| RadialRegion::new(pieces, bounded).expect("built-in region");
    let below = |start: f64, end: Option<f64>, bound: FiberBound| RegionPiece {
        outer: Axis::R1,
        start,
        end,
        fiber: Fiber::Below(bound),
        tail: None,
    };
    match spec {
        DomainSpec::Profile(p) => build(
            vec![below(0.0, Some(1.0), FiberBound::ExpNegProfile(p.clone()))],
            true,
        ),
        DomainSpec::Region(r) => r.clone(),
        DomainSpec::Polydisc { radius } => {
            build(vec![below(0.0, Some(1.0), FiberBound::Const(*radius))], true)
        }
        DomainSpec::Ball => build(vec![below(0.0, Some(1.0), FiberBound::UnitCircle)], true),
        DomainSpec::WiegerinckOmega0 => build(omega0_pieces(), false),
        DomainSpec::WiegerinckOmegaK { k } => {
            let m = 4.0 * *k as f64;
            let mut pieces = omega0_pieces();
            pieces.extend(strip_pieces(m));
            build(pieces, false)
        }
    }
}

// X₃ = {r₁ ≤ e, r₂ ≤ e}, X₁ = {r₁ > e, r₂ < 1/(r₁ log r₁)}, X₂ the mirror of X₁.
fn omega0_pieces() -> Vec<RegionPiece> {
    // t^{2γ_o+1} (t log t)^{-(2γ_i+2)} = t^{-1 + 2γ_o - 2γ_i} (log t)^{-(2γ_i+2)}
    let tail = TailDecay {
        power: [-1.0, 2.0, -2.0],
        log_power: [-2.0, 0.0, -2.0],
    };
    vec![
        RegionPiece {
            outer: Axis::R1,
            start: 0.0,
            end: Some(E),
            fiber: Fiber::Below(FiberBound::Const(E)),
            tail: None,
        },
        RegionPiece {
            outer: Axis::R1,
            start: E,
            end: None,
            fiber: Fiber::Below(FiberBound::InvTLogT),
            tail: Some(tail),
        },
        RegionPiece {
            outer: Axis::R2,
            start: E,
            end: None,
            fiber: Fiber::Below(FiberBound::InvTLogT),
            tail: Some(tail),
        },
    ]
}

// The part of B_m = {r₁, r₂ > 1, |r₁ - r₂| < (r₁+r₂)^{-m}} outside X₃.
fn strip_pieces(m: f64) -> Vec<RegionPiece> {
    let upper = FiberBound::StripUpper { m };
    // smallest r₁ ≤ e whose strip fiber reaches above r₂ = e
    let (mut lo, mut hi) = (1.0, E);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper.at(mid) > E {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    vec![
        RegionPiece {
            outer: Axis::R1,
            start: hi,
            end: Some(E),
            fiber: Fiber::Between(FiberBound::Const(E), upper),
            tail: None,
        },
        RegionPiece {
            outer: Axis::R1,
            start: E,
            end: None,
            fiber: Fiber::Strip { m, floor: 1.0 },
            // width ~ 2(2t)^{-m} times t^{2γ_i+1}
            tail: Some(TailDecay {
                power: [2.0 - m, 2.0, 2.0],
                log_power: [0.0, 0.0, 0.0],
            }),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polydisc_shadow() {
        let r = radial_shadow(&DomainSpec::polydisc(1.0).unwrap());
        assert_eq!(r.fiber_at(0.3), vec![(0.0, 1.0)]);
        assert!(r.fiber_at(1.0).is_empty());
        assert!(r.is_bounded());
    }

    #[test]
    fn omega0_fiber_at_e_squared() {
        let r = radial_shadow(&DomainSpec::WiegerinckOmega0);
        let f = r.fiber_at(E * E);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].0, 0.0);
        assert!((f[0].1 - 1.0 / (E * E * 2.0)).abs() < 1e-15);
        assert!(!r.is_bounded());
    }

    #[test]
    fn omega0_fiber_through_x2() {
        // for r₁ < 1/e the fiber is [0, e] ∪ (e, T] with T log T = 1/r₁
        let r = radial_shadow(&DomainSpec::WiegerinckOmega0);
        let r1 = 0.01;
        let f = r.fiber_at(r1);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0], (0.0, E));
        let t = f[1].1;
        assert!((t * t.ln() - 1.0 / r1).abs() < 1e-9);
        assert!(r.contains(r1, 0.5 * (E + t)));
        assert!(!r.contains(r1, 1.01 * t));
    }

    #[test]
    fn ball_fiber() {
        let r = radial_shadow(&DomainSpec::Ball);
        let f = r.fiber_at(0.6);
        assert!((f[0].1 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn omega_k_strip_is_symmetric_and_disjoint_from_x3() {
        let r = radial_shadow(&DomainSpec::omega_k(1).unwrap());
        assert!(r.contains(5.0, 5.0));
        assert!(r.contains(5.0, 5.0 + 0.5 * 10f64.powi(-4)));
        assert!(!r.contains(5.0, 5.0 + 2.0 * 10f64.powi(-4)));
        assert!(r.contains(2.0, 2.0));
    }

    #[test]
    fn lattice_membership_matches_variant() {
        let cases = [
            (DomainSpec::Ball, BasisLattice::FullQuadrant),
            (DomainSpec::polydisc(2.0).unwrap(), BasisLattice::FullQuadrant),
            (DomainSpec::Profile(RadialProfile::zero()), BasisLattice::FullQuadrant),
            (DomainSpec::WiegerinckOmega0, BasisLattice::Diagonal),
            (
                DomainSpec::omega_k(3).unwrap(),
                BasisLattice::DiagonalTruncated { k: 3 },
            ),
        ];
        for (spec, lattice) in cases {
            assert_eq!(spec.lattice(), lattice);
            for n in 0..=50u32 {
                for g in MultiIndex::shell(n) {
                    let expected = match lattice {
                        BasisLattice::FullQuadrant => true,
                        BasisLattice::Diagonal => g.g1 == g.g2,
                        BasisLattice::DiagonalTruncated { k } => g.g1 == g.g2 && g.g1 <= k,
                    };
                    assert_eq!(spec.lattice().contains(g), expected);
                }
            }
        }
    }

    #[test]
    fn parse_round_trips_labels() {
        for s in [
            "polydisc:2",
            "ball",
            "omega0",
            "omegak:3",
            "profile:zero",
            "profile:neg_log_one_minus_r2",
            "profile:inv_one_minus_pow:p=1",
        ] {
            let spec = DomainSpec::parse(s).unwrap();
            assert_eq!(DomainSpec::parse(&spec.label()).unwrap().label(), spec.label());
        }
        assert_eq!(
            DomainSpec::parse("profile:inv_one_minus_pow:2").unwrap().label(),
            "profile:inv_one_minus_pow:p=2"
        );
        assert!(DomainSpec::parse("omegak:0").is_err());
        assert!(DomainSpec::parse("torus").is_err());
    }

    #[test]
    fn multi_index_parse() {
        assert_eq!("1,2".parse::<MultiIndex>().unwrap(), MultiIndex::new(1, 2));
        assert_eq!("(3, 0)".parse::<MultiIndex>().unwrap(), MultiIndex::new(3, 0));
        assert!("1".parse::<MultiIndex>().is_err());
        assert!("-1,2".parse::<MultiIndex>().is_err());
    }
}
