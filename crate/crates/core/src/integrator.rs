//! Störmer-Verlet (drift-kick-drift leapfrog) integration and a streaming driver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{wrap_coordinate, EnergyReport, ForceEvaluator, ForceField, SimConfig, SystemState, Vec2};

/// Which form of the Störmer-Verlet map is applied.
///
/// Only the symmetric drift-kick-drift form is implemented:
/// `q' = q + p dt/2`, `p_new = p - dt grad V(q')`, `q_new = q' + p_new dt/2`.
/// The tag is recorded in every experiment output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerletVariant {
    #[default]
    DriftKickDrift,
}

impl VerletVariant {
    pub fn tag(self) -> &'static str {
        match self {
            VerletVariant::DriftKickDrift => "drift-kick-drift",
        }
    }
}

/// One sample taken by [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepObservation {
    pub step: u64,
    pub time: f64,
    /// Present when the observer asked for energies.
    pub energy: Option<EnergyReport>,
    /// Unwrapped displacement of particle 0 since the state's origin.
    pub tracer_displacement: Vec2,
}

/// Consumer of observations streamed by [`integrate`].
pub trait Observer {
    /// Whether observations should carry an [`EnergyReport`]. Energies cost
    /// one extra force evaluation per observation.
    fn wants_energy(&self) -> bool {
        true
    }

    /// Returning an error aborts the integration.
    fn observe(&mut self, obs: &StepObservation, state: &SystemState) -> Result<()>;
}

impl<F: FnMut(&StepObservation)> Observer for F {
    fn observe(&mut self, obs: &StepObservation, _state: &SystemState) -> Result<()> {
        self(obs);
        Ok(())
    }
}

/// Advances every position by `velocity * h`, wrapping into the box and
/// accumulating the pre-wrap increment into the displacement.
#[inline]
pub(crate) fn drift(state: &mut SystemState, h: f64, box_edge: f64) {
    for ((q, v), d) in state.positions.iter_mut().zip(&state.velocities).zip(state.displacement.iter_mut()) {
        let inc = *v * h;
        *q = Vec2::new(wrap_coordinate(q.x + inc.x, box_edge), wrap_coordinate(q.y + inc.y, box_edge));
        *d += inc;
    }
}

#[inline]
pub(crate) fn kick(state: &mut SystemState, forces: &[Vec2], h: f64) {
    for (v, f) in state.velocities.iter_mut().zip(forces) {
        *v += *f * h;
    }
}

/// Stateful stepper that keeps force-evaluation buffers between steps.
#[derive(Clone, Debug)]
pub struct Verlet {
    config: SimConfig,
    evaluator: ForceEvaluator,
    field: ForceField,
}

impl Verlet {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        Ok(Verlet { config: config.clone(), evaluator: ForceEvaluator::new(), field: ForceField::default() })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Applies one step in place. `step` is only used to label errors.
    pub fn step(&mut self, state: &mut SystemState, step: u64) -> Result<()> {
        let dt = self.config.dt;
        let box_edge = self.config.box_edge();
        drift(state, 0.5 * dt, box_edge);
        self.evaluator
            .evaluate(&state.positions, &self.config, &mut self.field)
            .map_err(|e| Error::Integration { step, reason: e.to_string() })?;
        kick(state, &self.field.forces, dt);
        drift(state, 0.5 * dt, box_edge);
        state.time += dt;
        Ok(())
    }

    pub fn energy(&mut self, state: &SystemState) -> Result<EnergyReport> {
        self.evaluator.energy(state, &self.config)
    }
}

/// One Störmer-Verlet step of size `config.dt`.
pub fn verlet_step(state: &SystemState, config: &SimConfig) -> Result<SystemState> {
    let mut next = state.clone();
    Verlet::new(config)?.step(&mut next, 0)?;
    Ok(next)
}

/// Applies `n_steps` Verlet steps, observing at step 0 and every
/// `observe_every` steps thereafter, and returns the final state.
pub fn integrate<O: Observer + ?Sized>(
    state: &SystemState,
    config: &SimConfig,
    n_steps: u64,
    observe_every: u64,
    observer: &mut O,
) -> Result<SystemState> {
    if observe_every == 0 {
        return Err(Error::Config("observe_every must be at least 1".into()));
    }
    let mut verlet = Verlet::new(config)?;
    let mut current = state.clone();
    let energy = observer.wants_energy();
    let mut emit = |verlet: &mut Verlet, current: &SystemState, step: u64| -> Result<()> {
        let report = if energy {
            Some(verlet.energy(current).map_err(|e| Error::Integration { step, reason: e.to_string() })?)
        } else {
            None
        };
        let obs = StepObservation {
            step,
            time: step as f64 * config.dt,
            energy: report,
            tracer_displacement: current.displacement[0],
        };
        observer.observe(&obs, current)
    };
    emit(&mut verlet, &current, 0)?;
    for step in 1..=n_steps {
        verlet.step(&mut current, step)?;
        if step % observe_every == 0 {
            emit(&mut verlet, &current, step)?;
        }
    }
    Ok(current)
}
