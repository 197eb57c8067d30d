//! Catalog of the constants of motion of each family.
//!
//! Every integral is an [`Observable`]: a stable snake_case name, a momentum
//! degree and a closed-form evaluator generic over [`Scalar`], so the same
//! formula yields values (on `f64`) and exact gradients (on [`Dual`]).
//! Complex functions whose modulus is conserved are stored as
//! [`ComplexObservable`] pairs of real observables.

mod chains;
mod formulas;

use std::fmt;

use crate::diff::PhaseFunction;
use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::system::{Family, PhasePoint, SystemSpec};

pub use chains::{bracket_chain_residuals, ChainResidual};
pub use formulas::angular_momentum;

/// Coordinate axis; also indexes `J_1, J_2, J_3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }

    fn from_index(i: usize) -> Axis {
        Axis::ALL[i]
    }
}

/// The closed form behind an observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Kind {
    /// `K_abλ` of the linear-term oscillator (the deformed Fradkin tensor).
    Fradkin(Axis, Axis),
    /// `I = k2 J1 + k3 J2 + k4 J3`.
    LinearAngular,
    /// Cartesian separation integral `K_iλ` (inverse-square and 1:1:2 families).
    Separated(Axis),
    /// `K_2λ` of the caged oscillator exactly as printed, with `k2/x²`.
    SeparatedLiteralTypo,
    /// Angular-momentum integral `K_Ji`.
    AngularBarrier(Axis),
    /// `K_RL1μ` (X) or `K_RL2μ` (Y) of the 1:1:2 oscillator.
    RungeLenz112(Axis),
    /// `√(2k4) (x px)/z` (X) or `√(2k4) (y py)/z` (Y); imaginary part of `M_iμ`.
    Dilation112(Axis),
    /// `K_5λ = Im(M_1μ M_2μ*)`.
    Cubic112,
    /// `K_6aλ = Re(M_1μ M_2μ*)`.
    Quartic112Mixed,
    /// `K_6bλ = |M_1μ|²` (X) or `K_6cλ = |M_2μ|²` (Y).
    Quartic112Modulus(Axis),
    /// `W_a`, the deformed Runge–Lenz-type component.
    KeplerW(Axis),
    /// `√(2k_j) (x px + y py + z pz)/a`; imaginary part of `M_aμ`.
    KeplerDilation(Axis),
    /// `K_4aμ = |M_aμ|²`.
    KeplerQuartic(Axis),
}

/// One coefficient of a system; used to build mutated observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    K1,
    K2,
    K3,
    K4,
    Deform,
}

impl Coefficient {
    pub const ALL: [Coefficient; 5] = [
        Coefficient::K1,
        Coefficient::K2,
        Coefficient::K3,
        Coefficient::K4,
        Coefficient::Deform,
    ];

    fn scale(self, spec: &mut SystemSpec, factor: f64) {
        match self {
            Coefficient::K1 => spec.k1 *= factor,
            Coefficient::K2 => spec.k2 *= factor,
            Coefficient::K3 => spec.k3 *= factor,
            Coefficient::K4 => spec.k4 *= factor,
            Coefficient::Deform => spec.deform *= factor,
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coefficient::K1 => "k1",
            Coefficient::K2 => "k2",
            Coefficient::K3 => "k3",
            Coefficient::K4 => "k4",
            Coefficient::Deform => "deform",
        })
    }
}

/// A named closed-form phase-space function.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub name: String,
    pub family: Family,
    /// Polynomial degree in the momenta. `K_5λ` is recorded as 3 although
    /// it also carries a `1/z` position factor.
    pub degree: u8,
    spec: SystemSpec,
    kind: Kind,
    /// Weight of the leading term; 1 except in mutated copies.
    leading_weight: f64,
}

impl Observable {
    pub(crate) fn new(name: impl Into<String>, degree: u8, spec: &SystemSpec, kind: Kind) -> Self {
        Self {
            name: name.into(),
            family: spec.family,
            degree,
            spec: *spec,
            kind,
            leading_weight: 1.0,
        }
    }

    /// Parameters the closed form was built with.
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn evaluate<S: Scalar>(&self, z: &PhasePoint<S>) -> Result<S> {
        let value = formulas::evaluate(self.kind, &self.spec, z)?;
        if self.leading_weight == 1.0 {
            return Ok(value);
        }
        let lead = formulas::leading_term(self.kind, &self.spec, z)?;
        Ok(value + lead * (self.leading_weight - 1.0))
    }

    pub fn value(&self, point: &PhasePoint) -> Result<f64> {
        self.evaluate(point)
    }

    /// The same closed form with one coefficient multiplied by `factor`,
    /// while the name is kept. Used for negative controls.
    pub fn mutated(&self, coefficient: Coefficient, factor: f64) -> Observable {
        let mut spec = self.spec;
        coefficient.scale(&mut spec, factor);
        Observable {
            spec,
            ..self.clone()
        }
    }

    /// The same closed form with the coefficient of its first displayed
    /// term (`p_a p_b`, `p_a²`, `J_a²`, `(J × p)_a`, `W_a²`, ...) multiplied
    /// by `factor`. Used for negative controls.
    pub fn with_leading_coefficient(&self, factor: f64) -> Observable {
        Observable {
            leading_weight: self.leading_weight * factor,
            ..self.clone()
        }
    }
}

impl PhaseFunction for Observable {
    fn eval_dual(&self, z: &PhasePoint<Dual>) -> Result<Dual> {
        self.evaluate(z)
    }

    fn eval(&self, point: &PhasePoint) -> Result<f64> {
        self.evaluate(point)
    }
}

/// A complex function `re + i·im` whose modulus squared is a registered quartic.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexObservable {
    pub name: String,
    pub re: Observable,
    pub im: Observable,
    /// Name of the integral equal to `re² + im²`.
    pub modulus: String,
}

impl ComplexObservable {
    pub fn modulus_squared(&self, point: &PhasePoint) -> Result<f64> {
        Ok(self.re.value(point)?.powi(2) + self.im.value(point)?.powi(2))
    }
}

/// Registered integrals of one system plus its complex ladder functions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntegralSet {
    pub integrals: Vec<Observable>,
    pub complex: Vec<ComplexObservable>,
}

impl IntegralSet {
    pub fn get(&self, name: &str) -> Option<&Observable> {
        self.integrals.iter().find(|o| o.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.integrals.iter().map(|o| o.name.as_str()).collect()
    }
}

const FRADKIN_NAMES: [[&str; 3]; 3] = [
    ["k_xx_lambda", "k_xy_lambda", "k_zx_lambda"],
    ["k_xy_lambda", "k_yy_lambda", "k_yz_lambda"],
    ["k_zx_lambda", "k_yz_lambda", "k_zz_lambda"],
];

/// The six `K_abλ` and the linear integral `I`.
pub fn osc_linear_integrals(spec: &SystemSpec) -> Result<Vec<Observable>> {
    spec.expect_family(Family::OscLinear)?;
    let pairs = [
        (Axis::X, Axis::X),
        (Axis::Y, Axis::Y),
        (Axis::Z, Axis::Z),
        (Axis::X, Axis::Y),
        (Axis::Y, Axis::Z),
        (Axis::Z, Axis::X),
    ];
    let mut out: Vec<Observable> = pairs
        .into_iter()
        .map(|(a, b)| {
            Observable::new(
                FRADKIN_NAMES[a.index()][b.index()],
                2,
                spec,
                Kind::Fradkin(a, b),
            )
        })
        .collect();
    out.push(Observable::new("i_linear", 1, spec, Kind::LinearAngular));
    Ok(out)
}

/// The symmetric matrix `[K_abλ]` at `point`.
pub fn fradkin_matrix(spec: &SystemSpec, point: &PhasePoint) -> Result<[[f64; 3]; 3]> {
    spec.expect_family(Family::OscLinear)?;
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = formulas::evaluate(
                Kind::Fradkin(Axis::from_index(i), Axis::from_index(j)),
                spec,
                point,
            )?;
        }
    }
    Ok(m)
}

fn separated(spec: &SystemSpec, axis: Axis) -> Observable {
    let name = format!("k_{}_lambda", axis.index() + 1);
    Observable::new(name, 2, spec, Kind::Separated(axis))
}

fn angular_barrier(spec: &SystemSpec, axis: Axis) -> Observable {
    let name = format!("k_j{}", axis.index() + 1);
    Observable::new(name, 2, spec, Kind::AngularBarrier(axis))
}

/// `K_1λ, K_2λ, K_3λ` and `K_J1, K_J2, K_J3` of the caged oscillator.
///
/// `K_2λ` uses `k3/y²`; see [`osc_inverse_sq_k2_literal`] for the printed variant.
pub fn osc_inverse_sq_integrals(spec: &SystemSpec) -> Result<Vec<Observable>> {
    spec.expect_family(Family::OscInverseSq)?;
    let mut out: Vec<Observable> = Axis::ALL.iter().map(|&a| separated(spec, a)).collect();
    out.extend(Axis::ALL.iter().map(|&a| angular_barrier(spec, a)));
    Ok(out)
}

/// `K_2λ = py² + 2(k1 y² + k2/x²) + 2λ y² H_μ`, the caged-oscillator integral
/// with the `k2/x²` term as printed. It is not conserved unless `k2 = k3 = 0`
/// and is kept only to document the discrepancy.
pub fn osc_inverse_sq_k2_literal(spec: &SystemSpec) -> Result<Observable> {
    spec.expect_family(Family::OscInverseSq)?;
    Ok(Observable::new(
        "k_2_lambda_literal",
        2,
        spec,
        Kind::SeparatedLiteralTypo,
    ))
}

/// `K_RL1μ` (`Axis::X`) or `K_RL2μ` (`Axis::Y`).
pub fn osc112_runge_lenz(spec: &SystemSpec, axis: Axis) -> Result<Observable> {
    spec.expect_family(Family::Osc112)?;
    let name = match axis {
        Axis::X => "k_rl1_mu",
        Axis::Y => "k_rl2_mu",
        Axis::Z => return Err(Error::Parameter("K_RL is defined for x and y only".into())),
    };
    Ok(Observable::new(name, 2, spec, Kind::RungeLenz112(axis)))
}

/// `√(2k4)(x px)/z` or `√(2k4)(y py)/z`.
pub fn osc112_dilation(spec: &SystemSpec, axis: Axis) -> Result<Observable> {
    spec.expect_family(Family::Osc112)?;
    let name = match axis {
        Axis::X => "m_1_mu_im",
        Axis::Y => "m_2_mu_im",
        Axis::Z => return Err(Error::Parameter("M_iμ is defined for x and y only".into())),
    };
    Ok(Observable::new(name, 1, spec, Kind::Dilation112(axis)))
}

/// Integrals of the deformed 1:1:2 oscillator.
///
/// With `k4 > 0`: `K_1λ..K_3λ`, `K_4 = K_J3`, `K_5λ`, `K_6aλ`, `K_6bλ`,
/// `K_6cλ` and the complex pair `M_1μ, M_2μ`. With `k4 = 0` the quadratic
/// `K_RL1μ`, `K_RL2μ` replace the cubic and quartic functions.
pub fn osc112_integrals(spec: &SystemSpec) -> Result<IntegralSet> {
    spec.expect_family(Family::Osc112)?;
    if spec.k4 < 0.0 {
        return Err(Error::Parameter(format!(
            "osc_112 requires k4 >= 0 (sqrt(2 k4) appears), got k4 = {}",
            spec.k4
        )));
    }
    let mut set = IntegralSet::default();
    set.integrals
        .extend(Axis::ALL.iter().map(|&a| separated(spec, a)));
    set.integrals.push(Observable::new(
        "k_4",
        2,
        spec,
        Kind::AngularBarrier(Axis::Z),
    ));
    if spec.k4 == 0.0 {
        set.integrals.push(osc112_runge_lenz(spec, Axis::X)?);
        set.integrals.push(osc112_runge_lenz(spec, Axis::Y)?);
        return Ok(set);
    }
    set.integrals
        .push(Observable::new("k_5_lambda", 3, spec, Kind::Cubic112));
    set.integrals.push(Observable::new(
        "k_6a_lambda",
        4,
        spec,
        Kind::Quartic112Mixed,
    ));
    set.integrals.push(Observable::new(
        "k_6b_lambda",
        4,
        spec,
        Kind::Quartic112Modulus(Axis::X),
    ));
    set.integrals.push(Observable::new(
        "k_6c_lambda",
        4,
        spec,
        Kind::Quartic112Modulus(Axis::Y),
    ));
    for (axis, name, modulus) in [
        (Axis::X, "m_1_mu", "k_6b_lambda"),
        (Axis::Y, "m_2_mu", "k_6c_lambda"),
    ] {
        set.complex.push(ComplexObservable {
            name: name.into(),
            re: osc112_runge_lenz(spec, axis)?,
            im: osc112_dilation(spec, axis)?,
            modulus: modulus.into(),
        });
    }
    Ok(set)
}

/// `W_a` for the deformed Kepler system.
pub fn kepler_w(spec: &SystemSpec, axis: Axis) -> Result<Observable> {
    spec.expect_family(Family::Kepler)?;
    Ok(Observable::new(
        format!("w_{}", axis.letter()),
        2,
        spec,
        Kind::KeplerW(axis),
    ))
}

/// `√(2k_j)(x px + y py + z pz)/a`, the imaginary part of `M_aμ`.
pub fn kepler_dilation(spec: &SystemSpec, axis: Axis) -> Result<Observable> {
    spec.expect_family(Family::Kepler)?;
    Ok(Observable::new(
        format!("m_{}_mu_im", axis.letter()),
        1,
        spec,
        Kind::KeplerDilation(axis),
    ))
}

/// `K_J1..K_J3` plus, per axis, the quartic `K_4aμ` when its coupling is
/// positive or the quadratic `W_a` when it vanishes.
pub fn kepler_integrals(spec: &SystemSpec) -> Result<IntegralSet> {
    spec.expect_family(Family::Kepler)?;
    if let Some(k) = spec.barrier_couplings().iter().find(|k| **k < 0.0) {
        return Err(Error::Parameter(format!(
            "kepler requires k2, k3, k4 >= 0 (sqrt(2 k_j) appears), got {k}"
        )));
    }
    let mut set = IntegralSet::default();
    set.integrals
        .extend(Axis::ALL.iter().map(|&a| angular_barrier(spec, a)));
    for (axis, k) in Axis::ALL.into_iter().zip(spec.barrier_couplings()) {
        if k > 0.0 {
            let quartic = format!("k_4{}_mu", axis.letter());
            set.integrals.push(Observable::new(
                quartic.clone(),
                4,
                spec,
                Kind::KeplerQuartic(axis),
            ));
            set.complex.push(ComplexObservable {
                name: format!("m_{}_mu", axis.letter()),
                re: kepler_w(spec, axis)?,
                im: kepler_dilation(spec, axis)?,
                modulus: quartic,
            });
        } else {
            set.integrals.push(kepler_w(spec, axis)?);
        }
    }
    Ok(set)
}

/// All registered integrals of `spec`, whatever its family.
pub fn integrals(spec: &SystemSpec) -> Result<IntegralSet> {
    spec.validate()?;
    match spec.family {
        Family::OscLinear => Ok(IntegralSet {
            integrals: osc_linear_integrals(spec)?,
            complex: Vec::new(),
        }),
        Family::OscInverseSq => Ok(IntegralSet {
            integrals: osc_inverse_sq_integrals(spec)?,
            complex: Vec::new(),
        }),
        Family::Osc112 => osc112_integrals(spec),
        Family::Kepler => kepler_integrals(spec),
    }
}
