//! Numerical verification harness: bracket residuals, functional
//! independence, algebraic identities, drift along flows and curvature
//! cross-checks, assembled into a serializable report.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diff::{bracket_of_gradients, gradient, value_and_gradient, Hamiltonian, PhaseFunction};
use crate::dual::Dual;
use crate::dynamics::{drift_report, integrate, IntegratorConfig, Termination};
use crate::error::{Error, Result};
use crate::geometry::{closed_form_curvature, numeric_curvature_oracle};
use crate::observables::{
    angular_momentum, bracket_chain_residuals, fradkin_matrix, integrals, Axis, Coefficient,
    IntegralSet, Observable,
};
use crate::sampling::DomainSampler;
use crate::system::{hamiltonian, Family, PhasePoint, SystemSpec};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Sampling margin for independence witness points.
pub const WITNESS_MARGIN: f64 = 0.1;
pub const WITNESS_POINTS: usize = 5;
/// Rank of a maximally superintegrable system in three degrees of freedom.
pub const EXPECTED_RANK: usize = 5;
/// Curvature comparisons use at most this many positions.
pub const CURVATURE_POINTS: usize = 50;
/// Initial points tried for the drift run before giving up on a complete trajectory.
const DRIFT_ATTEMPTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub bracket_tol: f64,
    pub identity_tol: f64,
    pub drift_tol: f64,
    pub curvature_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_samples: 100,
            seed: 0,
            bracket_tol: 1e-9,
            identity_tol: 1e-8,
            drift_tol: 1e-6,
            curvature_tol: 1e-5,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("verify n_samples must be at least 1".into()));
        }
        for (name, v) in [
            ("bracket_tol", self.bracket_tol),
            ("identity_tol", self.identity_tol),
            ("drift_tol", self.drift_tol),
            ("curvature_tol", self.curvature_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!(
                    "verify {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
}

impl ResidualStats {
    fn from_values(values: &[f64]) -> Self {
        let max = values.iter().copied().fold(0.0, f64::max);
        let mean = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        Self { max, mean }
    }
}

/// `|{F, H}| / (1 + |F| + |H|)`.
pub fn bracket_residual<F: PhaseFunction + ?Sized>(
    spec: &SystemSpec,
    f: &F,
    point: &PhasePoint,
) -> Result<f64> {
    let (fv, df) = value_and_gradient(f, point)?;
    let (hv, dh) = value_and_gradient(&Hamiltonian(*spec), point)?;
    Ok(bracket_of_gradients(&df, &dh).abs() / (1.0 + fv.abs() + hv.abs()))
}

fn sample_points(
    spec: &SystemSpec,
    n: usize,
    seed: u64,
    margin: Option<f64>,
) -> Result<Vec<PhasePoint>> {
    let mut sampler = DomainSampler::new(spec, seed);
    if let Some(m) = margin {
        sampler = sampler.with_margin(m);
    }
    Ok(sampler.sample_n(n)?.into_iter().map(|s| s.point).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketCheck {
    pub sample_count: usize,
    pub residuals: BTreeMap<String, ResidualStats>,
    pub passed: bool,
}

/// Scale-normalized `{K, H}` for every registered integral over `n_samples`
/// seeded domain samples.
pub fn check_brackets(
    spec: &SystemSpec,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<BracketCheck> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let set = integrals(spec)?;
    let points = sample_points(spec, n_samples, seed, None)?;
    let mut residuals = BTreeMap::new();
    for obs in &set.integrals {
        let values = points
            .iter()
            .map(|p| bracket_residual(spec, obs, p))
            .collect::<Result<Vec<_>>>()?;
        residuals.insert(obs.name.clone(), ResidualStats::from_values(&values));
    }
    let passed = residuals.values().all(|r| r.max <= tol);
    Ok(BracketCheck {
        sample_count: n_samples,
        residuals,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    /// Singular values of the row-normalized gradient matrix, descending.
    pub singular_values: Vec<f64>,
}

/// Numerical rank of the gradients of `observables` (and of `H` when
/// `include_hamiltonian`) at `point`. Rows are normalized to unit length
/// before the SVD so quartic and quadratic integrals weigh alike.
pub fn independence_rank(
    spec: &SystemSpec,
    observables: &[&Observable],
    include_hamiltonian: bool,
    point: &PhasePoint,
) -> Result<RankResult> {
    let mut rows: Vec<[f64; 6]> = Vec::new();
    if include_hamiltonian {
        rows.push(gradient(&Hamiltonian(*spec), point)?.to_array());
    }
    for obs in observables {
        rows.push(gradient(*obs, point)?.to_array());
    }
    if rows.is_empty() {
        return Ok(RankResult {
            rank: 0,
            singular_values: Vec::new(),
        });
    }
    let m = DMatrix::from_fn(rows.len(), 6, |i, j| {
        let norm = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            rows[i][j] / norm
        } else {
            0.0
        }
    });
    let mut singular_values: Vec<f64> = m.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values
        .iter()
        .filter(|s| top > 0.0 && **s > RANK_THRESHOLD * top)
        .count();
    Ok(RankResult {
        rank,
        singular_values,
    })
}

/// One identity evaluated at one point.
struct IdentityValue {
    name: String,
    residual: f64,
}

fn identity(name: impl Into<String>, lhs: f64, rhs: f64, terms: &[f64]) -> IdentityValue {
    let scale = 1.0 + rhs.abs() + terms.iter().map(|t| t.abs()).sum::<f64>();
    IdentityValue {
        name: name.into(),
        residual: (lhs - rhs).abs() / scale,
    }
}

fn bracket_identity<F: PhaseFunction, G: PhaseFunction>(
    name: &str,
    f: &F,
    g: &G,
    point: &PhasePoint,
) -> Result<IdentityValue> {
    let (fv, df) = value_and_gradient(f, point)?;
    let (gv, dg) = value_and_gradient(g, point)?;
    Ok(identity(
        name,
        bracket_of_gradients(&df, &dg),
        0.0,
        &[fv, gv],
    ))
}

fn named<'a>(set: &'a IntegralSet, name: &str) -> Result<&'a Observable> {
    set.get(name)
        .ok_or_else(|| Error::Parameter(format!("integral {name} is not registered")))
}

fn sum_of<'a>(parts: Vec<&'a Observable>) -> impl PhaseFunction + 'a {
    move |z: &PhasePoint<Dual>| -> Result<Dual> {
        let mut acc = Dual::constant(0.0);
        for p in &parts {
            acc += p.evaluate(z)?;
        }
        Ok(acc)
    }
}

fn fradkin_identities(
    spec: &SystemSpec,
    set: &IntegralSet,
    z: &PhasePoint,
) -> Result<Vec<IdentityValue>> {
    let k = fradkin_matrix(spec, z)?;
    let h = hamiltonian(spec, z)?;
    let i_lin = named(set, "i_linear")?.value(z)?;
    let q = z.position();
    let p = z.momentum();
    let j = Axis::ALL.map(|a| angular_momentum(a, z));
    let [x, y, zc] = q;
    let [px, py, pz] = p;
    let (k1, k2, k3, k4) = (spec.k1, spec.k2, spec.k3, spec.k4);
    let lam_h = spec.deform * h + k1;
    let s = z.dilation();
    let p2 = z.momentum_squared();
    let r2 = z.radius_squared();
    let mut out = Vec::new();

    out.push(identity(
        "trace_equals_2h",
        k[0][0] + k[1][1] + k[2][2],
        2.0 * h,
        &[k[0][0], k[1][1], k[2][2]],
    ));
    for a in 0..3 {
        let row: f64 = (0..3).map(|b| k[a][b] * j[b]).sum();
        let terms: Vec<f64> = (0..3).map(|b| k[a][b] * j[b]).collect();
        out.push(identity(
            format!("fradkin_times_j_{}", Axis::ALL[a].letter()),
            row,
            i_lin * q[a],
            &terms,
        ));
    }
    // x_b² K_aa − 2 x_a x_b K_ab + x_a² K_bb = J_c²
    for (a, b, c, label) in [(0, 1, 2, "xy"), (1, 2, 0, "yz"), (2, 0, 1, "zx")] {
        let terms = [
            q[b] * q[b] * k[a][a],
            2.0 * q[a] * q[b] * k[a][b],
            q[a] * q[a] * k[b][b],
        ];
        out.push(identity(
            format!("quadratic_form_{label}"),
            terms[0] - terms[1] + terms[2],
            j[c] * j[c],
            &terms,
        ));
    }
    let det_xy = [k[0][0] * k[1][1], k[0][1] * k[0][1]];
    let rhs_xy = [
        2.0 * j[2] * j[2] * lam_h,
        2.0 * (k3 * px - k2 * py) * j[2],
        (k3 * x - k2 * y).powi(2),
    ];
    out.push(identity(
        "minor_xy",
        det_xy[0] - det_xy[1],
        rhs_xy[0] - rhs_xy[1] - rhs_xy[2],
        &[det_xy[0], det_xy[1], rhs_xy[0], rhs_xy[1], rhs_xy[2]],
    ));
    let det_yz = [k[1][1] * k[2][2], k[1][2] * k[1][2]];
    let rhs_yz = [
        2.0 * j[0] * j[0] * lam_h,
        2.0 * (k4 * py - k3 * pz) * j[0],
        (k4 * y - k3 * zc).powi(2),
    ];
    out.push(identity(
        "minor_yz",
        det_yz[0] - det_yz[1],
        rhs_yz[0] - rhs_yz[1] - rhs_yz[2],
        &[det_yz[0], det_yz[1], rhs_yz[0], rhs_yz[1], rhs_yz[2]],
    ));
    let contract = |u: [f64; 3], v: [f64; 3]| -> (f64, f64) {
        let mut total = 0.0;
        let mut mag = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let t = k[a][b] * u[a] * v[b];
                total += t;
                mag += t.abs();
            }
        }
        (total, mag)
    };
    let jsq = j.iter().map(|v| v * v).sum::<f64>();
    let (qq, qq_mag) = contract(q, q);
    out.push(identity(
        "contraction_qq",
        qq,
        2.0 * r2 * h - jsq,
        &[qq_mag, 2.0 * r2 * h, jsq],
    ));
    let (qp, qp_mag) = contract(q, p);
    let linear = (k3 * x - k2 * y) * j[2] + (k4 * y - k3 * zc) * j[0] + (k2 * zc - k4 * x) * j[1];
    out.push(identity(
        "contraction_qp",
        qp,
        2.0 * s * h + linear,
        &[qp_mag, 2.0 * s * h, linear],
    ));
    let (pp, pp_mag) = contract(p, p);
    let rhs = [
        p2 * p2,
        2.0 * s * s * lam_h,
        2.0 * (k2 * px + k3 * py + k4 * pz) * s,
    ];
    out.push(identity(
        "contraction_pp",
        pp,
        rhs.iter().sum(),
        &[pp_mag, rhs[0], rhs[1], rhs[2]],
    ));
    Ok(out)
}

fn separated_trace(
    set: &IntegralSet,
    spec: &SystemSpec,
    z: &PhasePoint,
    names: [&str; 3],
) -> Result<IdentityValue> {
    let v = names
        .iter()
        .map(|n| named(set, n)?.value(z))
        .collect::<Result<Vec<_>>>()?;
    let h = hamiltonian(spec, z)?;
    Ok(identity("trace_equals_2h", v.iter().sum(), 2.0 * h, &v))
}

fn identities_at(
    spec: &SystemSpec,
    set: &IntegralSet,
    z: &PhasePoint,
) -> Result<Vec<IdentityValue>> {
    let mut out = Vec::new();
    match spec.family {
        Family::OscLinear => out.extend(fradkin_identities(spec, set, z)?),
        Family::OscInverseSq => {
            out.push(separated_trace(
                set,
                spec,
                z,
                ["k_1_lambda", "k_2_lambda", "k_3_lambda"],
            )?);
            let j23 = sum_of(vec![named(set, "k_j2")?, named(set, "k_j3")?]);
            out.push(bracket_identity(
                "bracket_kj1_kj2_plus_kj3",
                named(set, "k_j1")?,
                &j23,
                z,
            )?);
            for (a, b) in [(1, 2), (1, 3), (2, 3)] {
                out.push(bracket_identity(
                    &format!("bracket_k{a}_k{b}"),
                    named(set, &format!("k_{a}_lambda"))?,
                    named(set, &format!("k_{b}_lambda"))?,
                    z,
                )?);
            }
        }
        Family::Osc112 => {
            out.push(separated_trace(
                set,
                spec,
                z,
                ["k_1_lambda", "k_2_lambda", "k_3_lambda"],
            )?);
            if let (Some(k5), Some(k6a), Some(k6b), Some(k6c)) = (
                set.get("k_5_lambda"),
                set.get("k_6a_lambda"),
                set.get("k_6b_lambda"),
                set.get("k_6c_lambda"),
            ) {
                let (k5, k6a, k6b, k6c) =
                    (k5.value(z)?, k6a.value(z)?, k6b.value(z)?, k6c.value(z)?);
                out.push(identity(
                    "det_equals_k5_squared",
                    k6b * k6c - k6a * k6a,
                    k5 * k5,
                    &[k6b * k6c, k6a * k6a],
                ));
            }
        }
        Family::Kepler => {
            let j23 = sum_of(vec![named(set, "k_j2")?, named(set, "k_j3")?]);
            out.push(bracket_identity(
                "bracket_kj1_kj2_plus_kj3",
                named(set, "k_j1")?,
                &j23,
                z,
            )?);
        }
    }
    for c in &set.complex {
        let m = c.modulus_squared(z)?;
        let q = named(set, &c.modulus)?.value(z)?;
        out.push(identity(format!("modulus_{}", c.name), m, q, &[]));
    }
    for chain in bracket_chain_residuals(spec, z)? {
        out.push(IdentityValue {
            name: chain.name,
            residual: chain.residual / chain.scale,
        });
    }
    let pos = z.position();
    let sectional = crate::geometry::sectional_curvatures(spec, pos)?;
    let ricci = crate::geometry::ricci_scalar(spec, pos)?;
    out.push(identity(
        "ricci_equals_twice_sectional_sum",
        ricci,
        2.0 * sectional.iter().sum::<f64>(),
        &sectional,
    ));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub sample_count: usize,
    /// Largest normalized residual per identity.
    pub residuals: BTreeMap<String, f64>,
}

/// Algebraic identities, ladder relations and modulus relations of the
/// family, each as `|lhs - rhs| / (1 + magnitudes of the terms)`.
pub fn check_identities(spec: &SystemSpec, n_samples: usize, seed: u64) -> Result<IdentityCheck> {
    let set = integrals(spec)?;
    let points = sample_points(spec, n_samples, seed, None)?;
    let mut residuals: BTreeMap<String, f64> = BTreeMap::new();
    for z in &points {
        for v in identities_at(spec, &set, z)? {
            let slot = residuals.entry(v.name).or_insert(0.0);
            *slot = slot.max(v.residual);
        }
    }
    Ok(IdentityCheck {
        sample_count: n_samples,
        residuals,
    })
}

/// Fraction of `points` at which the mutated observable's bracket residual
/// exceeds `threshold`, or `None` when the coefficient does not enter it.
/// Points where the mutant cannot be evaluated (a scaled deformation can move
/// the domain boundary) are left out of the fraction.
pub fn mutation_detection_rate(
    spec: &SystemSpec,
    observable: &Observable,
    coefficient: Coefficient,
    factor: f64,
    threshold: f64,
    points: &[PhasePoint],
) -> Result<Option<f64>> {
    let mutant = observable.mutated(coefficient, factor);
    let mut changes = false;
    let mut evaluated = 0usize;
    let mut detected = 0usize;
    for p in points {
        let (Ok(a), Ok(b)) = (observable.value(p), mutant.value(p)) else {
            continue;
        };
        changes |= (a - b).abs() > 1e-12 * (1.0 + a.abs());
        if let Ok(r) = bracket_residual(spec, &mutant, p) {
            evaluated += 1;
            if r > threshold {
                detected += 1;
            }
        }
    }
    if !changes || evaluated == 0 {
        return Ok(None);
    }
    Ok(Some(detected as f64 / evaluated as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Independence {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub witness_point: PhasePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub spec: SystemSpec,
    pub sample_count: usize,
    pub bracket_residuals: BTreeMap<String, ResidualStats>,
    pub identity_residuals: BTreeMap<String, f64>,
    pub independence: Option<Independence>,
    pub drift: BTreeMap<String, f64>,
    pub curvature_check: Option<f64>,
    pub passed: bool,
    /// Failures of individual stages; any entry makes `passed` false.
    pub errors: Vec<String>,
}

fn max_rank_witness(spec: &SystemSpec, set: &IntegralSet, seed: u64) -> Result<Independence> {
    let points = sample_points(spec, WITNESS_POINTS, seed, Some(WITNESS_MARGIN))?;
    let all: Vec<&Observable> = set.integrals.iter().collect();
    let mut best: Option<Independence> = None;
    for p in points {
        let r = independence_rank(spec, &all, true, &p)?;
        if best.as_ref().is_none_or(|b| r.rank > b.rank) {
            best = Some(Independence {
                rank: r.rank,
                singular_values: r.singular_values,
                witness_point: p,
            });
        }
    }
    Ok(best.expect("at least one witness point"))
}

fn drift_run(
    spec: &SystemSpec,
    set: &IntegralSet,
    integrator: &IntegratorConfig,
    seed: u64,
) -> Result<BTreeMap<String, f64>> {
    let mut sampler = DomainSampler::new(spec, seed).with_margin(WITNESS_MARGIN);
    let mut last = None;
    for _ in 0..DRIFT_ATTEMPTS {
        let start = sampler.sample()?.point;
        let traj = integrate(spec, &start, integrator, &set.integrals)?;
        let done = traj.termination == Termination::Completed;
        last = Some((traj.termination, traj.final_time()));
        if done {
            return Ok(drift_report(&traj)
                .into_iter()
                .map(|(k, d)| (k, d.max_rel_drift))
                .collect());
        }
    }
    let (termination, t) = last.expect("at least one drift attempt");
    Err(Error::Domain(format!(
        "no complete drift trajectory in {DRIFT_ATTEMPTS} attempts (last ended with {termination:?} at t = {t})"
    )))
}

fn curvature_run(spec: &SystemSpec, n: usize, seed: u64) -> Result<f64> {
    let points = sample_points(spec, n.min(CURVATURE_POINTS), seed, None)?;
    let mut worst: f64 = 0.0;
    for p in points {
        let pos = p.position();
        let closed = closed_form_curvature(spec, pos)?;
        let oracle = numeric_curvature_oracle(spec, pos)?;
        worst = worst.max(closed.relative_deviation(&oracle));
        let sign_ok = match spec.family {
            Family::Kepler => closed.scalar >= 0.0,
            _ => closed.scalar * spec.deform >= 0.0 && (spec.deform == 0.0 || closed.scalar != 0.0),
        };
        if !sign_ok {
            return Err(Error::Domain(format!(
                "scalar curvature {} has the wrong sign at {pos:?}",
                closed.scalar
            )));
        }
    }
    Ok(worst)
}

/// Runs every check for one system. Stage failures are collected into
/// `errors` rather than returned.
pub fn run_full_suite(
    spec: &SystemSpec,
    config: &VerifyConfig,
    integrator: &IntegratorConfig,
) -> VerificationReport {
    let mut report = VerificationReport {
        spec: *spec,
        sample_count: config.n_samples,
        bracket_residuals: BTreeMap::new(),
        identity_residuals: BTreeMap::new(),
        independence: None,
        drift: BTreeMap::new(),
        curvature_check: None,
        passed: false,
        errors: Vec::new(),
    };
    let setup = config
        .validate()
        .and_then(|_| integrator.validate())
        .and_then(|_| integrals(spec));
    let set = match setup {
        Ok(set) => set,
        Err(e) => {
            report.errors.push(e.to_string());
            return report;
        }
    };
    let seed = config.seed;
    let mut errors = Vec::new();

    match check_brackets(spec, config.n_samples, seed, config.bracket_tol) {
        Ok(b) => report.bracket_residuals = b.residuals,
        Err(e) => errors.push(report_error("brackets", e)),
    }
    match check_identities(spec, config.n_samples, seed.wrapping_add(1)) {
        Ok(c) => report.identity_residuals = c.residuals,
        Err(e) => errors.push(report_error("identities", e)),
    }
    match max_rank_witness(spec, &set, seed.wrapping_add(2)) {
        Ok(ind) => report.independence = Some(ind),
        Err(e) => errors.push(report_error("independence", e)),
    }
    match drift_run(spec, &set, integrator, seed.wrapping_add(3)) {
        Ok(d) => report.drift = d,
        Err(e) => errors.push(report_error("drift", e)),
    }
    match curvature_run(spec, config.n_samples, seed.wrapping_add(4)) {
        Ok(c) => report.curvature_check = Some(c),
        Err(e) => errors.push(report_error("curvature", e)),
    }
    report.errors = errors;

    let brackets_ok = report
        .bracket_residuals
        .values()
        .all(|r| r.max <= config.bracket_tol);
    let identities_ok = report
        .identity_residuals
        .values()
        .all(|r| *r <= config.identity_tol);
    let rank_ok = report
        .independence
        .as_ref()
        .is_some_and(|i| i.rank == EXPECTED_RANK);
    let drift_ok = report.drift.values().all(|d| *d <= config.drift_tol);
    let curvature_ok = report
        .curvature_check
        .is_some_and(|c| c <= config.curvature_tol);
    report.passed = report.errors.is_empty()
        && brackets_ok
        && identities_ok
        && rank_ok
        && drift_ok
        && curvature_ok;
    report
}

fn report_error(stage: &str, e: Error) -> String {
    format!("{stage}: {e}")
}
