//! Conformally flat metrics `g = (1/μ) I`, their closed-form curvatures, and
//! a finite-difference curvature oracle that knows nothing about the closed
//! forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{Family, PhasePoint, SystemSpec};

/// Step of the central differences used by the oracle.
pub const ORACLE_STEP: f64 = 1e-4;
/// Minimum conformal factor required by the oracle.
pub const ORACLE_MARGIN: f64 = 1e-3;

/// The metric at one configuration-space position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricAt {
    pub position: [f64; 3],
    pub g: [[f64; 3]; 3],
}

/// Three sectional curvatures plus the scalar curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureValues {
    pub sectional: [f64; 3],
    pub scalar: f64,
}

impl CurvatureValues {
    /// Largest curvature magnitude at the point: `max(|K_ab|, |R|/6)`.
    pub fn magnitude(&self) -> f64 {
        self.sectional
            .iter()
            .map(|k| k.abs())
            .fold(self.scalar.abs() / 6.0, f64::max)
    }

    /// Largest component deviation from `other`, relative to this point's
    /// curvature magnitude (absolute when the space is flat here).
    pub fn relative_deviation(&self, other: &CurvatureValues) -> f64 {
        let diff = self
            .sectional
            .iter()
            .zip(other.sectional)
            .map(|(a, b)| (a - b).abs())
            .fold((self.scalar - other.scalar).abs() / 6.0, f64::max);
        let scale = self.magnitude();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }
}

/// Labels of the three 2-planes, in the order curvatures are returned.
pub fn curvature_planes(family: Family) -> [&'static str; 3] {
    match family {
        Family::Kepler => ["r_theta", "r_phi", "theta_phi"],
        _ => ["xy", "xz", "yz"],
    }
}

fn radius(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// `(1/μ) - 1`: `-λ r²`, `-λ(x² + y² + 4z²)` or `-κ/r`.
fn conformal_deficit(spec: &SystemSpec, p: [f64; 3]) -> f64 {
    let lam = spec.deform;
    match spec.family {
        Family::OscLinear | Family::OscInverseSq => {
            -lam * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
        }
        Family::Osc112 => -lam * (p[0] * p[0] + p[1] * p[1] + 4.0 * p[2] * p[2]),
        Family::Kepler => -lam / radius(p),
    }
}

fn conformal_factor(spec: &SystemSpec, position: [f64; 3], margin: f64) -> Result<f64> {
    if spec.family == Family::Kepler && radius(position) == 0.0 {
        return Err(Error::Domain("metric undefined at r = 0".into()));
    }
    let factor = 1.0 + conformal_deficit(spec, position);
    if !(factor > margin) {
        return Err(Error::Domain(format!(
            "conformal factor {factor} at {position:?} must exceed {margin}"
        )));
    }
    Ok(factor)
}

pub fn metric(spec: &SystemSpec, position: [f64; 3]) -> Result<MetricAt> {
    let c = conformal_factor(spec, position, 0.0)?;
    let mut g = [[0.0; 3]; 3];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = c;
    }
    Ok(MetricAt { position, g })
}

/// Closed-form sectional curvatures: coordinate planes `(xy, xz, yz)` for
/// the oscillators, spherical planes `(rθ, rφ, θφ)` for Kepler.
pub fn sectional_curvatures(spec: &SystemSpec, position: [f64; 3]) -> Result<[f64; 3]> {
    let w = conformal_factor(spec, position, 0.0)?;
    let lam = spec.deform;
    let [x, y, z] = position;
    Ok(match spec.family {
        Family::OscLinear | Family::OscInverseSq => {
            let w3 = w.powi(3);
            [
                lam * (2.0 - 3.0 * lam * z * z) / w3,
                lam * (2.0 - 3.0 * lam * y * y) / w3,
                lam * (2.0 - 3.0 * lam * x * x) / w3,
            ]
        }
        Family::Osc112 => {
            let w3 = w.powi(3);
            let (x2, y2, z2) = (x * x, y * y, z * z);
            [
                2.0 * lam * (1.0 - 12.0 * lam * z2) / w3,
                lam * (5.0 - 3.0 * lam * (x2 + 2.0 * y2 - 4.0 * z2)) / w3,
                lam * (5.0 - 3.0 * lam * (2.0 * x2 + y2 - 4.0 * z2)) / w3,
            ]
        }
        Family::Kepler => {
            let r = radius(position);
            let d3 = (r - lam).powi(3);
            let radial = lam / (2.0 * d3);
            [radial, radial, lam * (3.0 * lam - 4.0 * r) / (4.0 * r * d3)]
        }
    })
}

pub fn ricci_scalar(spec: &SystemSpec, position: [f64; 3]) -> Result<f64> {
    let w = conformal_factor(spec, position, 0.0)?;
    let lam = spec.deform;
    let [x, y, _] = position;
    Ok(match spec.family {
        Family::OscLinear | Family::OscInverseSq => {
            let r2 = radius(position).powi(2);
            6.0 * lam * (2.0 - lam * r2) / w.powi(3)
        }
        Family::Osc112 => 6.0 * lam * (4.0 - 3.0 * lam * (x * x + y * y)) / w.powi(3),
        Family::Kepler => {
            let r = radius(position);
            3.0 * lam * lam / (2.0 * r * (r - lam).powi(3))
        }
    })
}

pub fn closed_form_curvature(spec: &SystemSpec, position: [f64; 3]) -> Result<CurvatureValues> {
    Ok(CurvatureValues {
        sectional: sectional_curvatures(spec, position)?,
        scalar: ricci_scalar(spec, position)?,
    })
}

type Tensor3 = [[[f64; 3]; 3]; 3];
type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

/// Metric and its first and second partial derivatives at one point.
struct MetricJet {
    g: [[f64; 3]; 3],
    /// `dg[c][a][b] = ∂_c g_ab`
    dg: Tensor3,
    /// `ddg[c][d][a][b] = ∂_c ∂_d g_ab`
    ddg: Tensor4,
}

fn shifted(p: [f64; 3], moves: &[(usize, f64)]) -> [f64; 3] {
    let mut q = p;
    for &(i, d) in moves {
        q[i] += d;
    }
    q
}

/// Central differences of the metric `(1 + δ) I`, differencing the deficit `δ`.
fn metric_jet(spec: &SystemSpec, p: [f64; 3]) -> MetricJet {
    let h = ORACLE_STEP;
    let f = |q: [f64; 3]| conformal_deficit(spec, q);
    let f0 = f(p);
    let mut grad = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        let fp = f(shifted(p, &[(i, h)]));
        let fm = f(shifted(p, &[(i, -h)]));
        grad[i] = (fp - fm) / (2.0 * h);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let fpp = f(shifted(p, &[(i, h), (j, h)]));
            let fpm = f(shifted(p, &[(i, h), (j, -h)]));
            let fmp = f(shifted(p, &[(i, -h), (j, h)]));
            let fmm = f(shifted(p, &[(i, -h), (j, -h)]));
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    let mut jet = MetricJet {
        g: [[0.0; 3]; 3],
        dg: [[[0.0; 3]; 3]; 3],
        ddg: [[[[0.0; 3]; 3]; 3]; 3],
    };
    for a in 0..3 {
        jet.g[a][a] = 1.0 + f0;
        for c in 0..3 {
            jet.dg[c][a][a] = grad[c];
            for d in 0..3 {
                jet.ddg[c][d][a][a] = hess[c][d];
            }
        }
    }
    jet
}

fn invert3(m: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let inv = nalgebra::Matrix3::from_fn(|i, j| m[i][j])
        .try_inverse()
        .ok_or_else(|| Error::Domain("degenerate metric".into()))?;
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| inv[(i, j)])
    }))
}

/// All-lower Riemann tensor `R_abcd` with the sign convention in which
/// `R_abab > 0` on a round sphere.
fn riemann(jet: &MetricJet) -> Result<([[f64; 3]; 3], Tensor4)> {
    let ginv = invert3(&jet.g)?;
    // Christoffel symbols of the first kind Γ_{d,bc} and second kind Γ^a_bc
    let mut first: Tensor3 = [[[0.0; 3]; 3]; 3];
    for d in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                first[d][b][c] = 0.5 * (jet.dg[b][d][c] + jet.dg[c][d][b] - jet.dg[d][b][c]);
            }
        }
    }
    let mut second: Tensor3 = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                second[a][b][c] = (0..3).map(|d| ginv[a][d] * first[d][b][c]).sum();
            }
        }
    }
    let mut r: Tensor4 = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let dd = &jet.ddg;
                    let mut v =
                        0.5 * (dd[b][c][a][d] + dd[a][d][b][c] - dd[a][c][b][d] - dd[b][d][a][c]);
                    for e in 0..3 {
                        for f in 0..3 {
                            v += jet.g[e][f]
                                * (second[e][b][c] * second[f][a][d]
                                    - second[e][b][d] * second[f][a][c]);
                        }
                    }
                    r[a][b][c][d] = v;
                }
            }
        }
    }
    Ok((ginv, r))
}

fn sectional_from_riemann(g: &[[f64; 3]; 3], r: &Tensor4, u: [f64; 3], v: [f64; 3]) -> f64 {
    let mut num = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    num += r[a][b][c][d] * u[a] * v[b] * u[c] * v[d];
                }
            }
        }
    }
    let dot = |x: [f64; 3], y: [f64; 3]| -> f64 {
        (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| g[i][j] * x[i] * y[j])
            .sum()
    };
    num / (dot(u, u) * dot(v, v) - dot(u, v).powi(2))
}

/// Orthonormal spherical directions `(e_r, e_θ, e_φ)` at `p`, in Cartesian components.
fn spherical_frame(p: [f64; 3]) -> [[f64; 3]; 3] {
    let r = radius(p);
    let theta = (p[2] / r).clamp(-1.0, 1.0).acos();
    let phi = p[1].atan2(p[0]);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        [st * cp, st * sp, ct],
        [ct * cp, ct * sp, -st],
        [-sp, cp, 0.0],
    ]
}

/// Curvatures computed from central finite differences of the metric
/// (step [`ORACLE_STEP`]): Christoffel symbols, the Riemann tensor, its
/// sectional values in the family's planes, and the full contraction.
pub fn numeric_curvature_oracle(spec: &SystemSpec, position: [f64; 3]) -> Result<CurvatureValues> {
    conformal_factor(spec, position, ORACLE_MARGIN)?;
    let jet = metric_jet(spec, position);
    let (ginv, r) = riemann(&jet)?;
    let frame = match spec.family {
        Family::Kepler => spherical_frame(position),
        _ => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };
    let planes = [(0, 1), (0, 2), (1, 2)];
    let sectional = planes.map(|(i, j)| sectional_from_riemann(&jet.g, &r, frame[i], frame[j]));
    let mut scalar = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    scalar += ginv[a][c] * ginv[b][d] * r[a][b][c][d];
                }
            }
        }
    }
    Ok(CurvatureValues { sectional, scalar })
}

/// Position part of a phase point.
pub fn position_of(point: &PhasePoint) -> [f64; 3] {
    [point.x, point.y, point.z]
}
