//! Gradients, canonical Poisson brackets and Hamiltonian vector fields,
//! all computed with forward-mode dual numbers.

use crate::dual::{Dual, DIM};
use crate::error::Result;
use crate::system::{hamiltonian, PhasePoint, SystemSpec};

/// A scalar function on phase space that can be evaluated on dual numbers.
pub trait PhaseFunction {
    fn eval_dual(&self, z: &PhasePoint<Dual>) -> Result<Dual>;

    fn eval(&self, point: &PhasePoint) -> Result<f64> {
        let lifted = PhasePoint {
            x: Dual::constant(point.x),
            y: Dual::constant(point.y),
            z: Dual::constant(point.z),
            px: Dual::constant(point.px),
            py: Dual::constant(point.py),
            pz: Dual::constant(point.pz),
        };
        Ok(self.eval_dual(&lifted)?.value)
    }
}

impl<F> PhaseFunction for F
where
    F: Fn(&PhasePoint<Dual>) -> Result<Dual>,
{
    fn eval_dual(&self, z: &PhasePoint<Dual>) -> Result<Dual> {
        self(z)
    }
}

/// The Hamiltonian `H_μ` of a system as a [`PhaseFunction`].
#[derive(Debug, Clone, Copy)]
pub struct Hamiltonian(pub SystemSpec);

impl PhaseFunction for Hamiltonian {
    fn eval_dual(&self, z: &PhasePoint<Dual>) -> Result<Dual> {
        hamiltonian(&self.0, z)
    }

    fn eval(&self, point: &PhasePoint) -> Result<f64> {
        hamiltonian(&self.0, point)
    }
}

/// `∂f/∂q` and `∂f/∂p` at one phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientVector {
    pub dq: [f64; 3],
    pub dp: [f64; 3],
}

impl GradientVector {
    pub fn from_partials(partials: [f64; DIM]) -> Self {
        Self {
            dq: [partials[0], partials[1], partials[2]],
            dp: [partials[3], partials[4], partials[5]],
        }
    }

    pub fn to_array(&self) -> [f64; DIM] {
        [
            self.dq[0], self.dq[1], self.dq[2], self.dp[0], self.dp[1], self.dp[2],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Value and exact gradient of `f` at `point`.
pub fn value_and_gradient<F: PhaseFunction + ?Sized>(
    f: &F,
    point: &PhasePoint,
) -> Result<(f64, GradientVector)> {
    let d = f.eval_dual(&point.seeded())?;
    Ok((d.value, GradientVector::from_partials(d.partials)))
}

pub fn gradient<F: PhaseFunction + ?Sized>(f: &F, point: &PhasePoint) -> Result<GradientVector> {
    value_and_gradient(f, point).map(|(_, g)| g)
}

/// `Σ_i (∂f/∂q_i ∂g/∂p_i - ∂f/∂p_i ∂g/∂q_i)` from precomputed gradients.
pub fn bracket_of_gradients(df: &GradientVector, dg: &GradientVector) -> f64 {
    (0..3)
        .map(|i| df.dq[i] * dg.dp[i] - df.dp[i] * dg.dq[i])
        .sum()
}

/// Canonical Poisson bracket `{f, g}` at `point`.
pub fn poisson_bracket<F, G>(f: &F, g: &G, point: &PhasePoint) -> Result<f64>
where
    F: PhaseFunction + ?Sized,
    G: PhaseFunction + ?Sized,
{
    Ok(bracket_of_gradients(
        &gradient(f, point)?,
        &gradient(g, point)?,
    ))
}

/// `(∂H/∂p, -∂H/∂q)` ordered as `(ẋ, ẏ, ż, ṗx, ṗy, ṗz)`.
pub fn hamiltonian_vector_field(spec: &SystemSpec, point: &PhasePoint) -> Result<[f64; DIM]> {
    let g = gradient(&Hamiltonian(*spec), point)?;
    Ok([g.dp[0], g.dp[1], g.dp[2], -g.dq[0], -g.dq[1], -g.dq[2]])
}
