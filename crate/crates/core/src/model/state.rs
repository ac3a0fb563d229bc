use serde::{Deserialize, Serialize};

use super::geometry::wrap_position;
use super::{SimConfig, Vec2};
use crate::error::{Error, Result};

/// Phase-space state of the particle system (unit mass, so velocity = momentum).
///
/// `displacement` holds each particle's net motion on the universal cover
/// since the state was created: it is the sum of every pre-wrap position
/// increment and may exceed the box edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub displacement: Vec<Vec2>,
    pub time: f64,
}

impl SystemState {
    /// Creates a state at time zero, wrapping positions into the box.
    pub fn new(positions: Vec<Vec2>, velocities: Vec<Vec2>, box_edge: f64) -> Result<Self> {
        if positions.len() != velocities.len() {
            return Err(Error::Config(format!("{} positions but {} velocities", positions.len(), velocities.len())));
        }
        if positions.iter().chain(&velocities).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite coordinate in initial state".into()));
        }
        let n = positions.len();
        Ok(SystemState {
            positions: positions.into_iter().map(|p| wrap_position(p, box_edge)).collect(),
            velocities,
            displacement: vec![Vec2::ZERO; n],
            time: 0.0,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Zeroes the displacement accumulators and the clock, keeping phase-space coordinates.
    pub fn reset_origin(&mut self) {
        self.displacement.iter_mut().for_each(|d| *d = Vec2::ZERO);
        self.time = 0.0;
    }

    /// Checks the structural invariants against a configuration.
    pub fn check(&self, config: &SimConfig) -> Result<()> {
        let n = config.n_particles();
        if self.positions.len() != n || self.velocities.len() != n || self.displacement.len() != n {
            return Err(Error::Config(format!(
                "state has {} particles, configuration expects {n}",
                self.positions.len()
            )));
        }
        let l = config.box_edge();
        if let Some(p) = self.positions.iter().find(|p| !(p.x >= 0.0 && p.x < l && p.y >= 0.0 && p.y < l)) {
            return Err(Error::Domain(format!("position {p:?} outside [0, {l})")));
        }
        Ok(())
    }

    /// Total velocity (equal to total momentum).
    pub fn total_momentum(&self) -> Vec2 {
        self.velocities.iter().fold(Vec2::ZERO, |acc, v| acc + *v)
    }
}
