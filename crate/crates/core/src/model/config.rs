use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the periodic Lennard-Jones system, independent of
/// the integration step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub n_particles: usize,
    pub box_edge: f64,
    pub r_cutoff: f64,
    pub temperature: f64,
    pub boltzmann_k: f64,
    /// Subtract `V(r_cutoff)` from every interacting pair so the potential is
    /// continuous at the cutoff. Forces are unaffected.
    #[serde(default)]
    pub shift_potential: bool,
}

impl Default for SystemParams {
    /// 100 particles in an 11.5 x 11.5 periodic box at unit temperature.
    fn default() -> Self {
        SystemParams {
            n_particles: 100,
            box_edge: 11.5,
            r_cutoff: 2.5,
            temperature: 1.0,
            boltzmann_k: 1.0,
            shift_potential: false,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::Config(format!("n_particles must be at least 2, got {}", self.n_particles)));
        }
        if !(self.box_edge > 0.0 && self.box_edge.is_finite()) {
            return Err(Error::Config(format!("box_edge must be positive, got {}", self.box_edge)));
        }
        if !(self.r_cutoff > 0.0 && self.r_cutoff <= self.box_edge / 2.0) {
            return Err(Error::Config(format!(
                "r_cutoff must lie in (0, box_edge/2 = {}], got {}",
                self.box_edge / 2.0,
                self.r_cutoff
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!("temperature must be positive, got {}", self.temperature)));
        }
        if !(self.boltzmann_k > 0.0 && self.boltzmann_k.is_finite()) {
            return Err(Error::Config(format!("boltzmann_k must be positive, got {}", self.boltzmann_k)));
        }
        Ok(())
    }

    /// `k T`, the thermal energy scale.
    pub fn thermal_energy(&self) -> f64 {
        self.boltzmann_k * self.temperature
    }

    pub fn with_step(&self, dt: f64, seed: u64) -> Result<SimConfig> {
        SimConfig::new(self.clone(), dt, seed)
    }
}

/// Immutable physical and numerical parameters for one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub system: SystemParams,
    pub dt: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(system: SystemParams, dt: f64, seed: u64) -> Result<Self> {
        let config = SimConfig { system, dt, seed };
        config.validate()?;
        Ok(config)
    }

    /// The default 100-particle system with the given step.
    pub fn paper_default(dt: f64, seed: u64) -> Self {
        SimConfig { system: SystemParams::default(), dt, seed }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    #[inline]
    pub fn n_particles(&self) -> usize {
        self.system.n_particles
    }

    #[inline]
    pub fn box_edge(&self) -> f64 {
        self.system.box_edge
    }

    #[inline]
    pub fn r_cutoff(&self) -> f64 {
        self.system.r_cutoff
    }

    pub fn with_dt(&self, dt: f64) -> Result<SimConfig> {
        SimConfig::new(self.system.clone(), dt, self.seed)
    }
}
