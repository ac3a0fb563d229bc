use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::error::{Error, Result};
use crate::integrator::{drift, kick};
use crate::model::{ForceEvaluator, ForceField, SimConfig, SystemState};

/// Parameters of the Langevin sampler used to draw canonical initial conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    /// Friction coefficient gamma (1/time).
    pub friction: f64,
    /// Langevin time step.
    pub step: f64,
    /// Equilibration time from the lattice start.
    pub burn_in: f64,
    /// Time between successive samples of one chain.
    pub gap: f64,
}

/// Upper bound on the Langevin step at the default density.
pub const MAX_LANGEVIN_STEP: f64 = 0.005;

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { friction: 1.0, step: 0.001, burn_in: 100.0, gap: 10.0 }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("friction", self.friction), ("step", self.step), ("burn_in", self.burn_in), ("gap", self.gap)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("sampler {name} must be positive, got {v}")));
            }
        }
        if self.step > MAX_LANGEVIN_STEP {
            return Err(Error::Config(format!(
                "sampler step {} exceeds the stability limit {MAX_LANGEVIN_STEP}",
                self.step
            )));
        }
        Ok(())
    }

    pub fn burn_in_steps(&self) -> u64 {
        (self.burn_in / self.step).round() as u64
    }

    pub fn gap_steps(&self) -> u64 {
        ((self.gap / self.step).round() as u64).max(1)
    }
}

/// Kinetic Langevin stepper
/// `dq = p dt, dp = -grad V dt - gamma p dt + sqrt(2 gamma k T) dW`.
///
/// Each step of size `h` is the symmetric splitting
/// half-drift, half Ornstein-Uhlenbeck, kick, half Ornstein-Uhlenbeck, half-drift.
/// The OU substeps use the exact coefficients `c = exp(-gamma h/2)` and
/// `sqrt(k T (1 - c^2))`, so with `gamma = 0` a step is the Verlet map exactly.
#[derive(Clone, Debug)]
pub struct Langevin {
    config: SimConfig,
    decay: f64,
    noise: f64,
    evaluator: ForceEvaluator,
    field: ForceField,
}

impl Langevin {
    pub fn new(config: &SimConfig, sampler: &SamplerConfig) -> Result<Self> {
        if !(sampler.friction >= 0.0 && sampler.friction.is_finite()) {
            return Err(Error::Config(format!("friction must be non-negative, got {}", sampler.friction)));
        }
        let config = config.with_dt(sampler.step)?;
        let decay = (-0.5 * sampler.friction * sampler.step).exp();
        let noise = (config.system.thermal_energy() * (1.0 - decay * decay)).sqrt();
        Ok(Langevin { config, decay, noise, evaluator: ForceEvaluator::new(), field: ForceField::default() })
    }

    fn thermostat(&self, state: &mut SystemState, rng: &mut RngStream) {
        for v in state.velocities.iter_mut() {
            v.x = self.decay * v.x + self.noise * rng.normal();
            v.y = self.decay * v.y + self.noise * rng.normal();
        }
    }

    pub fn step(&mut self, state: &mut SystemState, rng: &mut RngStream, step: u64) -> Result<()> {
        let h = self.config.dt;
        let box_edge = self.config.box_edge();
        drift(state, 0.5 * h, box_edge);
        self.thermostat(state, rng);
        self.evaluator
            .evaluate(&state.positions, &self.config, &mut self.field)
            .map_err(|e| Error::Sampling { step, reason: e.to_string() })?;
        kick(state, &self.field.forces, h);
        self.thermostat(state, rng);
        drift(state, 0.5 * h, box_edge);
        state.time += h;
        Ok(())
    }

    pub fn run(&mut self, state: &mut SystemState, rng: &mut RngStream, n_steps: u64) -> Result<()> {
        (1..=n_steps).try_for_each(|k| self.step(state, rng, k))
    }

    pub fn potential(&mut self, state: &SystemState) -> Result<f64> {
        self.evaluator.potential(&state.positions, &self.config)
    }
}

/// One Langevin step of size `sampler.step`.
pub fn langevin_step(
    state: &SystemState,
    config: &SimConfig,
    sampler: &SamplerConfig,
    rng: &mut RngStream,
) -> Result<SystemState> {
    let mut next = state.clone();
    Langevin::new(config, sampler)?.step(&mut next, rng, 1)?;
    Ok(next)
}
