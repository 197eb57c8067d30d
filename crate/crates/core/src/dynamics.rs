//! Flows of Hamilton's equations: an embedded Dormand–Prince 5(4) scheme with
//! adaptive steps and the implicit midpoint rule with a fixed step.

use std::collections::BTreeMap;
use std::io::{self, Write};

use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::diff::hamiltonian_vector_field;
use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::system::{domain_violation, hamiltonian, PhasePoint, SystemSpec};

/// Steps are bisected down to this size before giving up at a domain boundary.
pub const MIN_STEP: f64 = 1e-12;
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AdaptiveRk,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step of the fixed-step method.
    pub step: f64,
    pub t_end: f64,
    /// Attempted steps (accepted or rejected) before giving up.
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveRk,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            step: 1e-3,
            t_end: 10.0,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(t_end: f64, tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            t_end,
            ..Self::default()
        }
    }

    pub fn implicit_midpoint(t_end: f64, step: f64) -> Self {
        Self {
            method: Method::ImplicitMidpoint,
            step,
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "integrator {name} must be positive, got {v}"
                )))
            }
        };
        positive("t_end", self.t_end)?;
        match self.method {
            Method::AdaptiveRk => {
                positive("rel_tol", self.rel_tol)?;
                positive("abs_tol", self.abs_tol)?;
            }
            Method::ImplicitMidpoint => positive("step", self.step)?,
        }
        if self.max_steps == 0 {
            return Err(Error::Config(
                "integrator max_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    DomainExit,
    StepLimit,
}

/// Values of one observable at every stored state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    /// `H_μ` at every state.
    pub energy: Vec<f64>,
    /// Requested observables, in the order they were passed.
    pub observable_values: Vec<Series>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn final_state(&self) -> &PhasePoint {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds the initial time")
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        if name == "H" {
            return Some(&self.energy);
        }
        self.observable_values
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
    }

    /// CSV with header `t,x,y,z,px,py,pz,H,<observables>`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = String::from("t,x,y,z,px,py,pz,H");
        for s in &self.observable_values {
            header.push(',');
            header.push_str(&s.name);
        }
        writeln!(out, "{header}")?;
        for (i, (t, state)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = format!("{t:.16e}");
            for v in state.to_array().into_iter().chain([self.energy[i]]) {
                row.push_str(&format!(",{v:.16e}"));
            }
            for s in &self.observable_values {
                row.push_str(&format!(",{:.16e}", s.values[i]));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub max_abs_drift: f64,
    pub max_rel_drift: f64,
}

fn series_drift(values: &[f64]) -> Drift {
    let Some(&first) = values.first() else {
        return Drift {
            max_abs_drift: 0.0,
            max_rel_drift: 0.0,
        };
    };
    let max_abs_drift = values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
    Drift {
        max_abs_drift,
        max_rel_drift: max_abs_drift / (1.0 + first.abs()),
    }
}

/// Per observable (and `H`), the largest `|K(t) - K(0)|` and that value over `1 + |K(0)|`.
pub fn drift_report(trajectory: &Trajectory) -> BTreeMap<String, Drift> {
    let mut out = BTreeMap::new();
    out.insert("H".to_string(), series_drift(&trajectory.energy));
    for s in &trajectory.observable_values {
        out.insert(s.name.clone(), series_drift(&s.values));
    }
    out
}

type State = Vector6<f64>;

fn to_point(y: &State) -> PhasePoint {
    PhasePoint::from_array([y[0], y[1], y[2], y[3], y[4], y[5]])
}

fn field(spec: &SystemSpec, y: &State) -> Result<State> {
    let v = hamiltonian_vector_field(spec, &to_point(y))?;
    if v.iter().all(|c| c.is_finite()) {
        Ok(State::from_column_slice(&v))
    } else {
        Err(Error::Domain("non-finite vector field".into()))
    }
}

/// H and observable values at a state, or an error if any is undefined there.
fn stamp(
    spec: &SystemSpec,
    observables: &[Observable],
    point: &PhasePoint,
) -> Result<(f64, Vec<f64>)> {
    if let Some(msg) = domain_violation(spec, point, 0.0) {
        return Err(Error::Domain(msg));
    }
    let h = hamiltonian(spec, point)?;
    let values = observables
        .iter()
        .map(|o| o.value(point))
        .collect::<Result<Vec<_>>>()?;
    if !h.is_finite() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("observable not finite".into()));
    }
    Ok((h, values))
}

struct Recorder<'a> {
    observables: &'a [Observable],
    times: Vec<f64>,
    states: Vec<PhasePoint>,
    energy: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl Recorder<'_> {
    fn push(&mut self, t: f64, point: PhasePoint, stamped: (f64, Vec<f64>)) {
        self.times.push(t);
        self.states.push(point);
        self.energy.push(stamped.0);
        for (series, v) in self.values.iter_mut().zip(stamped.1) {
            series.push(v);
        }
    }

    fn finish(self, termination: Termination) -> Trajectory {
        Trajectory {
            times: self.times,
            states: self.states,
            energy: self.energy,
            observable_values: self
                .observables
                .iter()
                .zip(self.values)
                .map(|(o, values)| Series {
                    name: o.name.clone(),
                    values,
                })
                .collect(),
            termination,
        }
    }
}

/// Outcome of one attempted step.
enum Attempt {
    /// New state and the error ratio (≤ 1 means acceptable).
    Done(State, f64),
    /// The step left the domain or hit a singular evaluation.
    Invalid,
}

// Dormand–Prince 5(4) tableau; the flow is autonomous so the nodes are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri_step(spec: &SystemSpec, y: &State, h: f64, cfg: &IntegratorConfig) -> Attempt {
    let mut k = [State::zeros(); 7];
    for i in 0..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi += kj * (h * A[i][j]);
        }
        match field(spec, &yi) {
            Ok(f) => k[i] = f,
            Err(_) => return Attempt::Invalid,
        }
    }
    let mut y5 = *y;
    let mut err = State::zeros();
    for i in 0..7 {
        y5 += k[i] * (h * B5[i]);
        err += k[i] * (h * (B5[i] - B4[i]));
    }
    let ratio = (0..6)
        .map(|i| {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum::<f64>()
        / 6.0;
    Attempt::Done(y5, ratio.sqrt())
}

/// Solves `Y = y + h f((y + Y)/2)` by Newton iteration.
fn midpoint_step(spec: &SystemSpec, y: &State, h: f64, t: f64) -> Result<Option<State>> {
    let Ok(f0) = field(spec, y) else {
        return Ok(None);
    };
    let mut next = y + f0 * h;
    for _ in 0..NEWTON_MAX_ITER {
        let mid = (y + next) * 0.5;
        let Ok(fm) = field(spec, &mid) else {
            return Ok(None);
        };
        let residual = next - y - fm * h;
        let mut jac = Matrix6::<f64>::identity();
        for c in 0..6 {
            let eps = 1e-7 * (1.0 + mid[c].abs());
            let (mut plus, mut minus) = (mid, mid);
            plus[c] += eps;
            minus[c] -= eps;
            let (Ok(fp), Ok(fn_)) = (field(spec, &plus), field(spec, &minus)) else {
                return Ok(None);
            };
            let column = (fp - fn_) * (h * 0.5 / (2.0 * eps));
            for r in 0..6 {
                jac[(r, c)] -= column[r];
            }
        }
        let Some(delta) = jac.lu().solve(&residual) else {
            return Err(Error::NewtonFailed { t });
        };
        next -= delta;
        if delta.amax() <= NEWTON_TOL * (1.0 + next.amax()) {
            return Ok(Some(next));
        }
    }
    Err(Error::NewtonFailed { t })
}

/// Integrates the flow of `H_μ` from `initial` to `config.t_end`, stamping
/// every stored state with `H_μ` and each requested observable.
pub fn integrate(
    spec: &SystemSpec,
    initial: &PhasePoint,
    config: &IntegratorConfig,
    observables: &[Observable],
) -> Result<Trajectory> {
    spec.validate()?;
    config.validate()?;
    let first = stamp(spec, observables, initial)?;
    let mut rec = Recorder {
        observables,
        times: Vec::new(),
        states: Vec::new(),
        energy: Vec::new(),
        values: vec![Vec::new(); observables.len()],
    };
    rec.push(0.0, *initial, first);

    let mut y = State::from_column_slice(&initial.to_array());
    let mut t = 0.0;
    let nominal = match config.method {
        Method::AdaptiveRk => (config.t_end * 1e-3).min(1e-2),
        Method::ImplicitMidpoint => config.step,
    };
    let mut h = nominal;
    let mut attempts = 0;
    while t < config.t_end {
        if attempts >= config.max_steps {
            return Ok(rec.finish(Termination::StepLimit));
        }
        attempts += 1;
        let remaining = config.t_end - t;
        let last = h >= remaining;
        let step = if last { remaining } else { h };

        let (candidate, ratio) = match config.method {
            Method::AdaptiveRk => match dopri_step(spec, &y, step, config) {
                Attempt::Done(next, ratio) => (Some(next), ratio),
                Attempt::Invalid => (None, 0.0),
            },
            Method::ImplicitMidpoint => (midpoint_step(spec, &y, step, t)?, 0.0),
        };
        let accepted = candidate.and_then(|next| {
            if ratio > 1.0 {
                return Some(Err(next));
            }
            let point = to_point(&next);
            stamp(spec, observables, &point)
                .ok()
                .map(|s| Ok((next, point, s)))
        });
        match accepted {
            Some(Ok((next, point, stamped))) => {
                t = if last { config.t_end } else { t + step };
                y = next;
                rec.push(t, point, stamped);
                h = match config.method {
                    Method::AdaptiveRk => {
                        step * (0.9 * ratio.max(1e-10).powf(-0.2)).clamp(0.2, 5.0)
                    }
                    Method::ImplicitMidpoint => nominal,
                };
            }
            Some(Err(_)) => {
                // error estimate too large
                h = step * (0.9 * ratio.powf(-0.2)).clamp(0.2, 1.0);
            }
            None => {
                h = step * 0.5;
                if h < MIN_STEP {
                    return Ok(rec.finish(Termination::DomainExit));
                }
            }
        }
    }
    Ok(rec.finish(Termination::Completed))
}
