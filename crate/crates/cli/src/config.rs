//! Run configuration file.
//!
//! ```toml
//! initial = [1.0, 0.5, 0.8, 0.0, 0.3, -0.2]
//!
//! [system]
//! family = "osc_112"
//! k1 = 1.0
//! k2 = 0.2
//! k3 = 0.3
//! k4 = 0.4
//! deform = 0.05
//!
//! [integrator]
//! method = "adaptive_rk"
//! t_end = 10.0
//!
//! [verify]
//! n_samples = 100
//! seed = 0
//!
//! [output]
//! path = "trajectory.csv"
//! ```
//!
//! Every section except `[system]` may be omitted. Unknown keys are errors.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use superint_core::dynamics::IntegratorConfig;
use superint_core::verify::VerifyConfig;
use superint_core::{Family, PhasePoint, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Initial state `(x, y, z, px, py, pz)`; required by `simulate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<[f64; 6]>,
    pub system: SystemSpec,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
}

impl RunConfig {
    /// Configuration used when no file is given: bound couplings
    /// `(±1, 0.2, 0.3, 0.4)` and a small deformation.
    pub fn default_for(family: Family) -> Self {
        let (k1, deform) = match family {
            Family::Kepler => (-1.0, 0.4),
            _ => (1.0, 0.05),
        };
        RunConfig {
            initial: None,
            system: SystemSpec::new(family, [k1, 0.2, 0.3, 0.4], deform),
            integrator: IntegratorConfig::default(),
            verify: VerifyConfig::default(),
            output: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        self.verify.validate()?;
        Ok(())
    }

    pub fn initial_point(&self) -> Option<PhasePoint> {
        self.initial.map(PhasePoint::from_array)
    }

    pub fn output_path(&self) -> Option<&Path> {
        self.output.as_ref().map(|o| o.path.as_path())
    }
}
