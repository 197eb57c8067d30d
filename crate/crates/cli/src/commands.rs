use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use superint_core::dynamics::{integrate, Termination};
use superint_core::geometry::{closed_form_curvature, curvature_planes, numeric_curvature_oracle};
use superint_core::observables::integrals;
use superint_core::system::domain_violation;
use superint_core::verify::{check_brackets, run_full_suite};
use superint_core::Family;

use crate::config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_DOMAIN_EXIT: u8 = 2;
pub const EXIT_STEP_LIMIT: u8 = 3;

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut out = open_output(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn simulate(config: &RunConfig, output: Option<&Path>) -> Result<u8> {
    let spec = &config.system;
    let initial = config
        .initial_point()
        .ok_or_else(|| anyhow!("simulate needs an `initial` state in the config"))?;
    if let Some(violation) = domain_violation(spec, &initial, 0.0) {
        bail!("initial state is outside the domain: {violation}");
    }
    let set = integrals(spec)?;
    let trajectory = integrate(spec, &initial, &config.integrator, &set.integrals)?;

    let mut out = open_output(output)?;
    trajectory.write_csv(&mut out)?;
    out.flush()?;

    let code = match trajectory.termination {
        Termination::Completed => EXIT_OK,
        Termination::DomainExit => EXIT_DOMAIN_EXIT,
        Termination::StepLimit => EXIT_STEP_LIMIT,
    };
    eprintln!(
        "{}: {} steps, t = {}",
        serde_json::to_value(trajectory.termination)?
            .as_str()
            .unwrap_or("?"),
        trajectory.times.len() - 1,
        trajectory.final_time()
    );
    Ok(code)
}

pub fn verify(configs: &[RunConfig], as_array: bool, output: Option<&Path>) -> Result<u8> {
    let reports: Vec<_> = configs
        .iter()
        .map(|c| run_full_suite(&c.system, &c.verify, &c.integrator))
        .collect();
    for r in &reports {
        for e in &r.errors {
            eprintln!("{}: {e}", r.spec.family);
        }
    }
    let json = if as_array {
        serde_json::to_string_pretty(&reports)?
    } else {
        serde_json::to_string_pretty(&reports[0])?
    };
    write_text(output, &(json + "\n"))?;
    Ok(if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

pub fn brackets(configs: &[RunConfig], output: Option<&Path>) -> Result<u8> {
    let mut text = String::new();
    let mut all_passed = true;
    for c in configs {
        let s = &c.system;
        let tol = c.verify.bracket_tol;
        let check = check_brackets(s, c.verify.n_samples, c.verify.seed, tol)?;
        all_passed &= check.passed;
        writeln!(
            text,
            "{} k = ({}, {}, {}, {}) deform = {}: {} samples, tol {:e}",
            s.family, s.k1, s.k2, s.k3, s.k4, s.deform, check.sample_count, tol
        )?;
        writeln!(
            text,
            "{:<20} {:>12} {:>12}  status",
            "observable", "max", "mean"
        )?;
        for (name, stats) in &check.residuals {
            let status = if stats.max <= tol { "ok" } else { "FAIL" };
            writeln!(
                text,
                "{name:<20} {:>12.3e} {:>12.3e}  {status}",
                stats.max, stats.mean
            )?;
        }
        text.push('\n');
    }
    write_text(output, &text)?;
    Ok(if all_passed { EXIT_OK } else { EXIT_FAILURE })
}

#[derive(Serialize)]
struct CurvatureRow {
    family: Family,
    position: [f64; 3],
    planes: [&'static str; 3],
    sectional: [f64; 3],
    ricci_scalar: f64,
    oracle_rel_dev: f64,
}

pub fn parse_position(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("position `{text}` is not x,y,z"))?;
    parts
        .try_into()
        .map_err(|_| anyhow!("position `{text}` must have three components"))
}

pub fn curvature(
    configs: &[RunConfig],
    positions: &[[f64; 3]],
    output: Option<&Path>,
) -> Result<u8> {
    let mut rows = Vec::new();
    for c in configs {
        for &position in positions {
            let closed = closed_form_curvature(&c.system, position)
                .with_context(|| format!("{} at {position:?}", c.system.family))?;
            let oracle = numeric_curvature_oracle(&c.system, position)
                .with_context(|| format!("{} oracle at {position:?}", c.system.family))?;
            rows.push(CurvatureRow {
                family: c.system.family,
                position,
                planes: curvature_planes(c.system.family),
                sectional: closed.sectional,
                ricci_scalar: closed.scalar,
                oracle_rel_dev: closed.relative_deviation(&oracle),
            });
        }
    }
    write_text(output, &(serde_json::to_string_pretty(&rows)? + "\n"))?;
    Ok(EXIT_OK)
}

pub fn print_configs(configs: &[RunConfig], output: Option<&Path>) -> Result<u8> {
    let text = configs
        .iter()
        .map(RunConfig::to_toml)
        .collect::<Result<Vec<_>>>()?
        .join("\n");
    write_text(output, &text)?;
    Ok(EXIT_OK)
}
