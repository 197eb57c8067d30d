//! Seeded rejection sampling of phase points inside a family's domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{in_domain, Family, PhasePoint, SystemSpec};

pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_MOMENTUM_BOX: f64 = 1.0;
/// Consecutive rejections tolerated before giving up.
pub const MAX_ATTEMPTS: usize = 10_000;

/// A phase point together with the distance it keeps from every singular set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSample {
    pub point: PhasePoint,
    pub margin: f64,
}

/// Draws uniform points from `[-B, B]³ × [-P, P]³` and keeps those inside
/// the domain with the configured margin.
#[derive(Debug, Clone)]
pub struct DomainSampler {
    spec: SystemSpec,
    margin: f64,
    position_box: f64,
    momentum_box: f64,
    rng: ChaCha8Rng,
}

/// Half-width of the position box: `0.9/√λ` for oscillators with `λ > 0`, else 3.
pub fn default_position_box(spec: &SystemSpec) -> f64 {
    if spec.family.is_oscillator() && spec.deform > 0.0 {
        0.9 / spec.deform.sqrt()
    } else {
        3.0
    }
}

impl DomainSampler {
    pub fn new(spec: &SystemSpec, seed: u64) -> Self {
        Self {
            spec: *spec,
            margin: DEFAULT_MARGIN,
            position_box: default_position_box(spec),
            momentum_box: DEFAULT_MOMENTUM_BOX,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_momentum_box(mut self, half_width: f64) -> Self {
        self.momentum_box = half_width;
        self
    }

    pub fn with_position_box(mut self, half_width: f64) -> Self {
        self.position_box = half_width;
        self
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    fn draw(&mut self) -> PhasePoint {
        let b = self.position_box;
        let p = self.momentum_box;
        let mut pos = [0.0; 3];
        for c in &mut pos {
            *c = self.rng.random_range(-b..=b);
        }
        let mut mom = [0.0; 3];
        for c in &mut mom {
            *c = if p > 0.0 {
                self.rng.random_range(-p..=p)
            } else {
                0.0
            };
        }
        if self.spec.family == Family::Kepler && self.spec.deform > 0.0 {
            let r = pos.iter().map(|c| c * c).sum::<f64>().sqrt();
            let floor = self.spec.deform * (1.0 + self.margin);
            if r < floor && r > 0.0 {
                let stretch = (r + floor) / r;
                for c in &mut pos {
                    *c *= stretch;
                }
            }
        }
        PhasePoint::from_position(pos, mom)
    }

    pub fn sample(&mut self) -> Result<DomainSample> {
        for _ in 0..MAX_ATTEMPTS {
            let point = self.draw();
            if in_domain(&self.spec, &point, self.margin) {
                return Ok(DomainSample {
                    point,
                    margin: self.margin,
                });
            }
        }
        Err(Error::Sampling {
            attempts: MAX_ATTEMPTS,
        })
    }

    pub fn sample_n(&mut self, n: usize) -> Result<Vec<DomainSample>> {
        (0..n).map(|_| self.sample()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_respect_margin() {
        for family in Family::ALL {
            for deform in [-0.3, 0.0, 0.05, 0.4] {
                let spec = SystemSpec::new(family, [1.0, 0.2, 0.3, 0.4], deform);
                let mut s = DomainSampler::new(&spec, 7);
                for sample in s.sample_n(200).unwrap() {
                    assert!(in_domain(&spec, &sample.point, DEFAULT_MARGIN));
                }
            }
        }
    }

    #[test]
    fn same_seed_same_points() {
        let spec = SystemSpec::new(Family::Kepler, [-1.0, 0.1, 0.1, 0.1], 0.4);
        let a = DomainSampler::new(&spec, 42).sample_n(10).unwrap();
        let b = DomainSampler::new(&spec, 42).sample_n(10).unwrap();
        assert_eq!(a, b);
        let c = DomainSampler::new(&spec, 43).sample_n(10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn impossible_domain_reports_sampling_error() {
        let spec = SystemSpec::new(Family::OscLinear, [1.0; 4], 0.05);
        let mut s = DomainSampler::new(&spec, 1)
            .with_position_box(100.0)
            .with_margin(0.999);
        assert!(matches!(s.sample(), Err(Error::Sampling { .. })));
    }
}
