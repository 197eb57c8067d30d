use super::{Axis, Kind};
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::system::{euclidean_hamiltonian, hamiltonian, Family, PhasePoint, SystemSpec};

fn q<S: Scalar>(z: &PhasePoint<S>, a: Axis) -> S {
    z.position()[a.index()]
}

fn p<S: Scalar>(z: &PhasePoint<S>, a: Axis) -> S {
    z.momentum()[a.index()]
}

/// Component `J_1 = y pz - z py`, `J_2 = z px - x pz` or `J_3 = x py - y px`.
pub fn angular_momentum<S: Scalar>(axis: Axis, z: &PhasePoint<S>) -> S {
    match axis {
        Axis::X => z.y * z.pz - z.z * z.py,
        Axis::Y => z.z * z.px - z.x * z.pz,
        Axis::Z => z.x * z.py - z.y * z.px,
    }
}

fn other_axes(a: Axis) -> (Axis, Axis) {
    match a {
        Axis::X => (Axis::Y, Axis::Z),
        Axis::Y => (Axis::X, Axis::Z),
        Axis::Z => (Axis::X, Axis::Y),
    }
}

fn barrier(spec: &SystemSpec, a: Axis) -> f64 {
    spec.barrier_couplings()[a.index()]
}

fn sqrt_two(k: f64) -> Result<f64> {
    if k < 0.0 {
        return Err(Error::Parameter(format!("sqrt(2 k) needs k >= 0, got {k}")));
    }
    Ok((2.0 * k).sqrt())
}

/// `2 k (num/den)²`, dropped entirely when `k = 0`.
fn ratio_term<S: Scalar>(k: f64, num: S, den: S) -> Result<S> {
    if k == 0.0 {
        return Ok(S::zero());
    }
    Ok(num.checked_div(den)?.square() * (2.0 * k))
}

/// `2 k / q²`, dropped when `k = 0`.
fn inverse_square_term<S: Scalar>(k: f64, q: S) -> Result<S> {
    if k == 0.0 {
        return Ok(S::zero());
    }
    Ok(q.square().checked_recip()? * (2.0 * k))
}

/// `2 λ c H_μ`, or zero in the Euclidean case.
fn deformation_term<S: Scalar>(spec: &SystemSpec, coeff: S, z: &PhasePoint<S>) -> Result<S> {
    if spec.deform == 0.0 {
        return Ok(S::zero());
    }
    Ok(coeff * hamiltonian(spec, z)? * (2.0 * spec.deform))
}

fn fradkin<S: Scalar>(spec: &SystemSpec, a: Axis, b: Axis, z: &PhasePoint<S>) -> Result<S> {
    let (qa, qb) = (q(z, a), q(z, b));
    let linear = qa * barrier(spec, b) + qb * barrier(spec, a);
    Ok(
        p(z, a) * p(z, b)
            + qa * qb * (2.0 * spec.k1)
            + linear
            + deformation_term(spec, qa * qb, z)?,
    )
}

fn separated<S: Scalar>(spec: &SystemSpec, a: Axis, z: &PhasePoint<S>) -> Result<S> {
    let weight = if spec.family == Family::Osc112 && a == Axis::Z {
        4.0
    } else {
        1.0
    };
    let qa = q(z, a);
    Ok(p(z, a).square()
        + qa.square() * (2.0 * weight * spec.k1)
        + inverse_square_term(barrier(spec, a), qa)?
        + deformation_term(spec, qa.square() * weight, z)?)
}

fn separated_literal<S: Scalar>(spec: &SystemSpec, z: &PhasePoint<S>) -> Result<S> {
    Ok(z.py.square()
        + z.y.square() * (2.0 * spec.k1)
        + inverse_square_term(spec.k2, z.x)?
        + deformation_term(spec, z.y.square(), z)?)
}

fn angular_barrier<S: Scalar>(spec: &SystemSpec, a: Axis, z: &PhasePoint<S>) -> Result<S> {
    let (b, c) = other_axes(a);
    let (qb, qc) = (q(z, b), q(z, c));
    Ok(angular_momentum(a, z).square()
        + ratio_term(barrier(spec, b), qc, qb)?
        + ratio_term(barrier(spec, c), qb, qc)?)
}

fn runge_lenz_112<S: Scalar>(spec: &SystemSpec, a: Axis, z: &PhasePoint<S>) -> Result<S> {
    let kinematic = runge_lenz_kinematic(a, z)?;
    let qa = q(z, a);
    let barrier_part = if barrier(spec, a) == 0.0 {
        S::zero()
    } else {
        z.z.checked_div(qa.square())? * (2.0 * barrier(spec, a))
    };
    Ok(
        kinematic + qa.square() * z.z * (2.0 * spec.k1) - barrier_part
            + deformation_term(spec, qa.square() * z.z, z)?,
    )
}

fn dilation_112<S: Scalar>(spec: &SystemSpec, a: Axis, z: &PhasePoint<S>) -> Result<S> {
    Ok((q(z, a) * p(z, a)).checked_div(z.z)? * sqrt_two(spec.k4)?)
}

fn kepler_radius<S: Scalar>(z: &PhasePoint<S>) -> Result<S> {
    z.radius_squared().checked_sqrt()
}

fn kepler_w<S: Scalar>(spec: &SystemSpec, a: Axis, z: &PhasePoint<S>) -> Result<S> {
    let r = kepler_radius(z)?;
    let mut force = if spec.k1 == 0.0 {
        S::zero()
    } else {
        r.checked_recip()? * spec.k1
    };
    for axis in Axis::ALL {
        force += inverse_square_term(barrier(spec, axis), q(z, axis))?;
    }
    let mut w = kepler_cross(a, z) - q(z, a) * force;
    if spec.deform != 0.0 {
        let kappa = spec.deform;
        let he = euclidean_hamiltonian(spec, z)?;
        w = w - q(z, a).checked_div(r - kappa)? * he * kappa;
    }
    Ok(w)
}

fn kepler_dilation<S: Scalar>(spec: &SystemSpec, a: Axis, z: &PhasePoint<S>) -> Result<S> {
    Ok(z.dilation().checked_div(q(z, a))? * sqrt_two(barrier(spec, a))?)
}

fn runge_lenz_kinematic<S: Scalar>(a: Axis, z: &PhasePoint<S>) -> Result<S> {
    match a {
        Axis::X => Ok(-(z.px * angular_momentum(Axis::Y, z))),
        Axis::Y => Ok(z.py * angular_momentum(Axis::X, z)),
        Axis::Z => Err(Error::Parameter("K_RL is defined for x and y only".into())),
    }
}

/// `(J × p)_a` with the cyclic orientation of `(a, b, c)`.
fn kepler_cross<S: Scalar>(a: Axis, z: &PhasePoint<S>) -> S {
    let (b, c) = other_axes(a);
    match a {
        Axis::Y => angular_momentum(Axis::Z, z) * z.px - angular_momentum(Axis::X, z) * z.pz,
        _ => angular_momentum(b, z) * p(z, c) - angular_momentum(c, z) * p(z, b),
    }
}

/// First term of each displayed closed form.
pub(super) fn leading_term<S: Scalar>(
    kind: Kind,
    spec: &SystemSpec,
    z: &PhasePoint<S>,
) -> Result<S> {
    match kind {
        Kind::Fradkin(a, b) => Ok(p(z, a) * p(z, b)),
        Kind::LinearAngular => Ok(angular_momentum(Axis::X, z) * spec.k2),
        Kind::Separated(a) => Ok(p(z, a).square()),
        Kind::SeparatedLiteralTypo => Ok(z.py.square()),
        Kind::AngularBarrier(a) => Ok(angular_momentum(a, z).square()),
        Kind::RungeLenz112(a) => runge_lenz_kinematic(a, z),
        Kind::Dilation112(_) | Kind::KeplerDilation(_) => evaluate(kind, spec, z),
        Kind::Cubic112 => Ok(dilation_112(spec, Axis::X, z)? * runge_lenz_112(spec, Axis::Y, z)?),
        Kind::Quartic112Mixed => {
            Ok(runge_lenz_112(spec, Axis::X, z)? * runge_lenz_112(spec, Axis::Y, z)?)
        }
        Kind::Quartic112Modulus(a) => Ok(runge_lenz_112(spec, a, z)?.square()),
        Kind::KeplerW(a) => Ok(kepler_cross(a, z)),
        Kind::KeplerQuartic(a) => Ok(kepler_w(spec, a, z)?.square()),
    }
}

pub(super) fn evaluate<S: Scalar>(kind: Kind, spec: &SystemSpec, z: &PhasePoint<S>) -> Result<S> {
    match kind {
        Kind::Fradkin(a, b) => fradkin(spec, a, b, z),
        Kind::LinearAngular => Ok(angular_momentum(Axis::X, z) * spec.k2
            + angular_momentum(Axis::Y, z) * spec.k3
            + angular_momentum(Axis::Z, z) * spec.k4),
        Kind::Separated(a) => separated(spec, a, z),
        Kind::SeparatedLiteralTypo => separated_literal(spec, z),
        Kind::AngularBarrier(a) => angular_barrier(spec, a, z),
        Kind::RungeLenz112(a) => runge_lenz_112(spec, a, z),
        Kind::Dilation112(a) => dilation_112(spec, a, z),
        Kind::Cubic112 => {
            let (r1, r2) = (
                runge_lenz_112(spec, Axis::X, z)?,
                runge_lenz_112(spec, Axis::Y, z)?,
            );
            let (d1, d2) = (
                dilation_112(spec, Axis::X, z)?,
                dilation_112(spec, Axis::Y, z)?,
            );
            Ok(d1 * r2 - d2 * r1)
        }
        Kind::Quartic112Mixed => {
            let (r1, r2) = (
                runge_lenz_112(spec, Axis::X, z)?,
                runge_lenz_112(spec, Axis::Y, z)?,
            );
            let (d1, d2) = (
                dilation_112(spec, Axis::X, z)?,
                dilation_112(spec, Axis::Y, z)?,
            );
            Ok(r1 * r2 + d1 * d2)
        }
        Kind::Quartic112Modulus(a) => {
            Ok(runge_lenz_112(spec, a, z)?.square() + dilation_112(spec, a, z)?.square())
        }
        Kind::KeplerW(a) => kepler_w(spec, a, z),
        Kind::KeplerDilation(a) => kepler_dilation(spec, a, z),
        Kind::KeplerQuartic(a) => {
            Ok(kepler_w(spec, a, z)?.square() + kepler_dilation(spec, a, z)?.square())
        }
    }
}
