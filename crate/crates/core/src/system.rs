//! Phase-space points, the four Hamiltonian families and their conformal
//! multipliers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};

/// A point `(x, y, z, px, py, pz)` of the six-dimensional phase space.
///
/// The default parameter is `f64`; [`PhasePoint<Dual>`] is the same point
/// carrying derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint<S = f64> {
    pub x: S,
    pub y: S,
    pub z: S,
    pub px: S,
    pub py: S,
    pub pz: S,
}

impl<S: Scalar> PhasePoint<S> {
    pub fn position(&self) -> [S; 3] {
        [self.x, self.y, self.z]
    }

    pub fn momentum(&self) -> [S; 3] {
        [self.px, self.py, self.pz]
    }

    pub fn radius_squared(&self) -> S {
        self.x.square() + self.y.square() + self.z.square()
    }

    pub fn momentum_squared(&self) -> S {
        self.px.square() + self.py.square() + self.pz.square()
    }

    /// `x px + y py + z pz`
    pub fn dilation(&self) -> S {
        self.x * self.px + self.y * self.py + self.z * self.pz
    }

    pub fn values(&self) -> PhasePoint<f64> {
        PhasePoint {
            x: self.x.value(),
            y: self.y.value(),
            z: self.z.value(),
            px: self.px.value(),
            py: self.py.value(),
            pz: self.pz.value(),
        }
    }
}

impl PhasePoint<f64> {
    pub const fn new(x: f64, y: f64, z: f64, px: f64, py: f64, pz: f64) -> Self {
        Self {
            x,
            y,
            z,
            px,
            py,
            pz,
        }
    }

    pub fn from_position(position: [f64; 3], momentum: [f64; 3]) -> Self {
        Self::new(
            position[0],
            position[1],
            position[2],
            momentum[0],
            momentum[1],
            momentum[2],
        )
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.z, self.px, self.py, self.pz]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Same point with momenta reversed.
    pub fn reversed(&self) -> Self {
        Self::new(self.x, self.y, self.z, -self.px, -self.py, -self.pz)
    }

    /// Lift to dual numbers with each coordinate seeded as an independent variable.
    pub fn seeded(&self) -> PhasePoint<Dual> {
        let a = self.to_array();
        PhasePoint {
            x: Dual::variable(a[0], 0),
            y: Dual::variable(a[1], 1),
            z: Dual::variable(a[2], 2),
            px: Dual::variable(a[3], 3),
            py: Dual::variable(a[4], 4),
            pz: Dual::variable(a[5], 5),
        }
    }
}

/// The four Hamiltonian families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// Isotropic oscillator with linear terms `k2 x + k3 y + k4 z`, multiplier `1/(1 - λ r²)`.
    #[serde(rename = "osc_linear")]
    OscLinear,
    /// Caged oscillator with `k2/x² + k3/y² + k4/z²`, multiplier `1/(1 - λ r²)`.
    #[serde(rename = "osc_inverse_sq")]
    OscInverseSq,
    /// 1:1:2 oscillator with inverse-square terms, multiplier `1/(1 - λ(x² + y² + 4z²))`.
    #[serde(rename = "osc_112")]
    Osc112,
    /// Kepler potential with inverse-square terms, multiplier `1/(1 - κ/r)`.
    #[serde(rename = "kepler")]
    Kepler,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::OscLinear,
        Family::OscInverseSq,
        Family::Osc112,
        Family::Kepler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::OscLinear => "osc_linear",
            Family::OscInverseSq => "osc_inverse_sq",
            Family::Osc112 => "osc_112",
            Family::Kepler => "kepler",
        }
    }

    /// Whether the potential carries `k_j / q²` barrier terms.
    pub fn has_inverse_square_terms(self) -> bool {
        !matches!(self, Family::OscLinear)
    }

    pub fn is_oscillator(self) -> bool {
        !matches!(self, Family::Kepler)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown family `{s}` (expected osc_linear, osc_inverse_sq, osc_112 or kepler)"
                ))
            })
    }
}

/// One Hamiltonian: a family plus its couplings and deformation parameter.
///
/// `deform` is λ for the oscillator families and κ for Kepler. `deform = 0`
/// is the Euclidean system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub family: Family,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub deform: f64,
}

impl SystemSpec {
    pub fn new(family: Family, k: [f64; 4], deform: f64) -> Self {
        Self {
            family,
            k1: k[0],
            k2: k[1],
            k3: k[2],
            k4: k[3],
            deform,
        }
    }

    pub fn couplings(&self) -> [f64; 4] {
        [self.k1, self.k2, self.k3, self.k4]
    }

    /// The undeformed (Euclidean) system with the same couplings.
    pub fn euclidean(&self) -> Self {
        self.with_deform(0.0)
    }

    pub fn with_deform(&self, deform: f64) -> Self {
        Self { deform, ..*self }
    }

    pub fn with_couplings(&self, k: [f64; 4]) -> Self {
        Self::new(self.family, k, self.deform)
    }

    /// Inverse-square couplings `(k2, k3, k4)` attached to `x, y, z`.
    pub fn barrier_couplings(&self) -> [f64; 3] {
        [self.k2, self.k3, self.k4]
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .couplings()
            .iter()
            .chain([&self.deform])
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "non-finite parameter in {self:?}"
            )))
        }
    }

    pub fn expect_family(&self, family: Family) -> Result<()> {
        if self.family == family {
            Ok(())
        } else {
            Err(Error::FamilyMismatch {
                expected: family,
                found: self.family,
            })
        }
    }
}

/// `x² + y² + 4 z²`, the quadratic form of the 1:1:2 oscillator.
pub(crate) fn anisotropic_form<S: Scalar>(z: &PhasePoint<S>) -> S {
    z.x.square() + z.y.square() + z.z.square() * 4.0
}

/// `1/μ`: `1 - λ r²`, `1 - λ (x² + y² + 4z²)` or `1 - κ/r`.
pub fn conformal_denominator<S: Scalar>(spec: &SystemSpec, z: &PhasePoint<S>) -> Result<S> {
    let lam = spec.deform;
    Ok(match spec.family {
        Family::OscLinear | Family::OscInverseSq => -(z.radius_squared() * lam) + 1.0,
        Family::Osc112 => -(anisotropic_form(z) * lam) + 1.0,
        Family::Kepler => {
            if lam == 0.0 {
                S::constant(1.0)
            } else {
                let inv_r = z.radius_squared().checked_sqrt()?.checked_recip()?;
                -(inv_r * lam) + 1.0
            }
        }
    })
}

/// Conformal multiplier μ at `point`.
pub fn mu(spec: &SystemSpec, point: &PhasePoint) -> Result<f64> {
    let d = conformal_denominator(spec, point)
        .map_err(|_| Error::Domain("conformal multiplier undefined at r = 0".into()))?;
    if d <= 0.0 {
        return Err(Error::Domain(format!(
            "conformal denominator {d} <= 0 (outside the {} domain)",
            spec.family
        )));
    }
    Ok(1.0 / d)
}

/// Describes the first domain constraint violated by `point`, if any.
pub fn domain_violation(spec: &SystemSpec, point: &PhasePoint, margin: f64) -> Option<String> {
    if !point.is_finite() {
        return Some("phase point has non-finite components".into());
    }
    if spec.family == Family::Kepler {
        let r = point.radius_squared().sqrt();
        if r <= margin {
            return Some(format!("radius r = {r} must exceed {margin}"));
        }
    }
    match conformal_denominator(spec, point) {
        Ok(d) if d > margin => {}
        Ok(d) => {
            let what = match spec.family {
                Family::OscLinear | Family::OscInverseSq => "1 - λ r²",
                Family::Osc112 => "1 - λ (x² + y² + 4z²)",
                Family::Kepler => "1 - κ/r",
            };
            return Some(format!(
                "conformal denominator {what} = {d} must exceed {margin}"
            ));
        }
        Err(_) => return Some("conformal denominator undefined".into()),
    }
    if spec.family.has_inverse_square_terms() {
        let coords = [("x", point.x), ("y", point.y), ("z", point.z)];
        for ((name, q), k) in coords.into_iter().zip(spec.barrier_couplings()) {
            if k != 0.0 && q.abs() <= margin {
                return Some(format!(
                    "|{name}| = {} must exceed {margin} (inverse-square term)",
                    q.abs()
                ));
            }
        }
    }
    None
}

/// True iff the conformal denominator exceeds `margin` and every coordinate
/// carrying an inverse-square term stays farther than `margin` from zero.
pub fn in_domain(spec: &SystemSpec, point: &PhasePoint, margin: f64) -> bool {
    domain_violation(spec, point, margin).is_none()
}

pub(crate) fn require_domain<S: Scalar>(spec: &SystemSpec, z: &PhasePoint<S>) -> Result<()> {
    match domain_violation(spec, &z.values(), 0.0) {
        None => Ok(()),
        Some(msg) => Err(Error::Domain(msg)),
    }
}

/// `Σ k_j / q_j²` over the barrier terms, skipping vanishing couplings.
pub(crate) fn inverse_square_sum<S: Scalar>(weights: [f64; 3], z: &PhasePoint<S>) -> Result<S> {
    let mut acc = S::zero();
    for (k, q) in weights.into_iter().zip(z.position()) {
        if k != 0.0 {
            acc += q.square().checked_recip()? * k;
        }
    }
    Ok(acc)
}

/// The undeformed potential of the family.
pub fn euclidean_potential<S: Scalar>(spec: &SystemSpec, z: &PhasePoint<S>) -> Result<S> {
    let k1 = spec.k1;
    Ok(match spec.family {
        Family::OscLinear => {
            z.radius_squared() * k1 + z.x * spec.k2 + z.y * spec.k3 + z.z * spec.k4
        }
        Family::OscInverseSq => {
            z.radius_squared() * k1 + inverse_square_sum(spec.barrier_couplings(), z)?
        }
        Family::Osc112 => {
            anisotropic_form(z) * k1 + inverse_square_sum(spec.barrier_couplings(), z)?
        }
        Family::Kepler => {
            let mut v = inverse_square_sum(spec.barrier_couplings(), z)?;
            if k1 != 0.0 {
                v += z.radius_squared().checked_sqrt()?.checked_recip()? * k1;
            }
            v
        }
    })
}

/// The undeformed Hamiltonian `½ p² + V`, evaluated without domain checks.
pub fn euclidean_hamiltonian<S: Scalar>(spec: &SystemSpec, z: &PhasePoint<S>) -> Result<S> {
    Ok(z.momentum_squared() * 0.5 + euclidean_potential(spec, z)?)
}

/// `H_μ = μ · H_euclid`.
pub fn hamiltonian<S: Scalar>(spec: &SystemSpec, z: &PhasePoint<S>) -> Result<S> {
    require_domain(spec, z)?;
    let he = euclidean_hamiltonian(spec, z)?;
    if spec.deform == 0.0 {
        return Ok(he);
    }
    let denom = conformal_denominator(spec, z)?;
    he.checked_div(denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(x: f64, y: f64, z: f64) -> PhasePoint {
        PhasePoint::new(x, y, z, 0.0, 0.0, 0.0)
    }

    #[test]
    fn mu_examples() {
        let lin = SystemSpec::new(Family::OscLinear, [0.0; 4], 0.0);
        assert_eq!(mu(&lin, &pos(3.0, -1.0, 7.0)).unwrap(), 1.0);
        let lin = lin.with_deform(0.1);
        assert!((mu(&lin, &pos(1.0, 1.0, 1.0)).unwrap() - 10.0 / 7.0).abs() < 1e-15);
        let kep = SystemSpec::new(Family::Kepler, [0.0; 4], 1.0);
        assert!((mu(&kep, &pos(2.0, 0.0, 0.0)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn mu_rejects_outside() {
        let lin = SystemSpec::new(Family::OscLinear, [0.0; 4], 1.0);
        assert!(matches!(
            mu(&lin, &pos(1.0, 1.0, 1.0)),
            Err(Error::Domain(_))
        ));
        let kep = SystemSpec::new(Family::Kepler, [0.0; 4], 1.0);
        assert!(mu(&kep, &pos(0.5, 0.0, 0.0)).is_err());
    }

    #[test]
    fn in_domain_examples() {
        let lin = SystemSpec::new(Family::OscLinear, [0.0; 4], 1.0);
        assert!(!in_domain(&lin, &pos(1.0, 1.0, 1.0), 0.0));
        let inv = SystemSpec::new(Family::OscInverseSq, [1.0, 0.2, 0.3, 0.4], -1.0);
        assert!(in_domain(&inv, &pos(0.5, 0.5, 0.5), 0.1));
        assert!(!in_domain(&inv, &pos(0.05, 0.5, 0.5), 0.1));
        let kep = SystemSpec::new(Family::Kepler, [-1.0, 0.0, 0.0, 0.0], 1.0);
        assert!(!in_domain(&kep, &pos(0.5, 0.5, 0.5), 0.0));
    }

    #[test]
    fn hamiltonian_examples() {
        let lin = SystemSpec::new(Family::OscLinear, [0.0; 4], 0.5);
        let h = hamiltonian(&lin, &PhasePoint::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(h, 0.5);
        let osc = SystemSpec::new(Family::Osc112, [1.0, 0.0, 0.0, 0.0], 0.0);
        assert_eq!(hamiltonian(&osc, &pos(1.0, 1.0, 1.0)).unwrap(), 6.0);
        let kep = SystemSpec::new(Family::Kepler, [-1.0, 0.0, 0.0, 0.0], 0.0);
        assert_eq!(hamiltonian(&kep, &pos(2.0, 0.0, 0.0)).unwrap(), -0.5);
    }

    #[test]
    fn hamiltonian_outside_domain_is_error() {
        let lin = SystemSpec::new(Family::OscLinear, [1.0; 4], 1.0);
        assert!(matches!(
            hamiltonian(&lin, &pos(1.0, 1.0, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("oscillator".parse::<Family>().is_err());
    }
}
