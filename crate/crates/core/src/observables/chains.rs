//! Ladder relations between the Runge–Lenz-type functions and their
//! dilation-type companions.
//!
//! For the 1:1:2 oscillator, with `λ_μ = μ/z²` and `D_1 = x px / z`:
//! `{K_RL1μ, H_μ} = 2 k4 λ_μ D_1` and `{D_1, H_μ} = -λ_μ K_RL1μ` (same for
//! index 2 with `y py`). For Kepler, with `λ_aμ = μ/a²` and
//! `D_a = (x px + y py + z pz)/a`: `{W_a, H} = 2 k_j λ_aμ D_a` and
//! `{D_a, H} = -λ_aμ W_a`. Together they give
//! `{M, H} = -i √(2k) λ M` for `M = re + i √(2k) D`.

use super::{kepler_w, osc112_runge_lenz, Axis, Observable};
use crate::diff::{bracket_of_gradients, value_and_gradient, GradientVector, Hamiltonian};
use crate::dual::{Dual, Scalar};
use crate::error::Result;
use crate::system::{mu, Family, PhasePoint, SystemSpec};

/// Both sides of one ladder relation at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResidual {
    pub name: String,
    /// The bracket side.
    pub lhs: f64,
    /// The closed-form side.
    pub rhs: f64,
    /// `|lhs - rhs|`
    pub residual: f64,
    /// `1 + |F| + |H|` for the bracketed function `F`.
    pub scale: f64,
}

struct Ladder {
    prefix: String,
    dilation_name: String,
    /// Runge–Lenz-type function and its value/gradient.
    rl: (f64, GradientVector),
    /// Dilation-type companion.
    dil: (f64, GradientVector),
    coupling: f64,
    coefficient: f64,
}

fn push_ladder(
    out: &mut Vec<ChainResidual>,
    ladder: Ladder,
    h: &(f64, GradientVector),
    prefix_m: &str,
) {
    let (rl, drl) = ladder.rl;
    let (d, dd) = ladder.dil;
    let lam = ladder.coefficient;
    let mut push = |name: String, lhs: f64, rhs: f64, f: f64| {
        out.push(ChainResidual {
            name,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            scale: 1.0 + f.abs() + h.0.abs(),
        })
    };
    let rl_dot = bracket_of_gradients(&drl, &h.1);
    let d_dot = bracket_of_gradients(&dd, &h.1);
    push(
        format!("{}_ladder", ladder.prefix),
        rl_dot,
        2.0 * ladder.coupling * lam * d,
        rl,
    );
    push(
        format!("{}_ladder", ladder.dilation_name),
        d_dot,
        -lam * rl,
        d,
    );
    if ladder.coupling > 0.0 {
        let sigma = (2.0 * ladder.coupling).sqrt();
        // {re + i σ D, H} = -i σ λ (re + i σ D)
        push(
            format!("{prefix_m}_ladder_re"),
            rl_dot,
            sigma * lam * sigma * d,
            rl,
        );
        push(
            format!("{prefix_m}_ladder_im"),
            sigma * d_dot,
            -sigma * lam * rl,
            sigma * d,
        );
    }
}

/// Residuals of every ladder relation of the family at `point`.
///
/// The oscillator families without ladders return an empty list.
pub fn bracket_chain_residuals(
    spec: &SystemSpec,
    point: &PhasePoint,
) -> Result<Vec<ChainResidual>> {
    let h = value_and_gradient(&Hamiltonian(*spec), point)?;
    let multiplier = mu(spec, point)?;
    let mut out = Vec::new();
    match spec.family {
        Family::OscLinear | Family::OscInverseSq => {}
        Family::Osc112 => {
            let lam = multiplier / (point.z * point.z);
            for (axis, idx) in [(Axis::X, 1), (Axis::Y, 2)] {
                let rl: Observable = osc112_runge_lenz(spec, axis)?;
                let dil = move |z: &PhasePoint<Dual>| -> Result<Dual> {
                    let (qa, pa) = match axis {
                        Axis::X => (z.x, z.px),
                        _ => (z.y, z.py),
                    };
                    (qa * pa).checked_div(z.z)
                };
                push_ladder(
                    &mut out,
                    Ladder {
                        prefix: format!("k_rl{idx}_mu"),
                        dilation_name: format!("dilation_{idx}"),
                        rl: value_and_gradient(&rl, point)?,
                        dil: value_and_gradient(&dil, point)?,
                        coupling: spec.k4,
                        coefficient: lam,
                    },
                    &h,
                    &format!("m_{idx}_mu"),
                );
            }
        }
        Family::Kepler => {
            for (axis, k) in Axis::ALL.into_iter().zip(spec.barrier_couplings()) {
                let qa = point.position()[axis.index()];
                let lam = multiplier / (qa * qa);
                let w = kepler_w(spec, axis)?;
                let dil = move |z: &PhasePoint<Dual>| -> Result<Dual> {
                    z.dilation().checked_div(z.position()[axis.index()])
                };
                push_ladder(
                    &mut out,
                    Ladder {
                        prefix: format!("w_{}", axis.letter()),
                        dilation_name: format!("dilation_{}", axis.letter()),
                        rl: value_and_gradient(&w, point)?,
                        dil: value_and_gradient(&dil, point)?,
                        coupling: k,
                        coefficient: lam,
                    },
                    &h,
                    &format!("m_{}_mu", axis.letter()),
                );
            }
        }
    }
    Ok(out)
}
