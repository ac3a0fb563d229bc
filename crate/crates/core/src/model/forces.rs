use serde::{Deserialize, Serialize};

use super::cells::CellList;
use super::geometry::min_image_disp;
use super::potential::PairKernel;
use super::{SimConfig, SystemState, Vec2};
use crate::error::{Error, Result};

/// Per-particle forces and the total potential energy of one configuration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ForceField {
    pub forces: Vec<Vec2>,
    pub potential: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

impl EnergyReport {
    pub fn new(kinetic: f64, potential: f64) -> Self {
        EnergyReport { kinetic, potential, total: kinetic + potential }
    }
}

pub fn kinetic_energy(velocities: &[Vec2]) -> f64 {
    0.5 * velocities.iter().map(|v| v.norm2()).sum::<f64>()
}

/// Reusable cell-list force evaluator.
///
/// Pairs are visited in ascending `(i, j)` order with `i < j`, adding the pair
/// force to `i` and subtracting it from `j`. Every particle therefore receives
/// its contributions in ascending neighbour order, and the result is bitwise
/// identical to a plain all-pairs double loop over the same pair kernel.
#[derive(Clone, Debug, Default)]
pub struct ForceEvaluator {
    cells: CellList,
}

impl ForceEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn evaluate(&mut self, positions: &[Vec2], config: &SimConfig, out: &mut ForceField) -> Result<()> {
        let box_edge = config.box_edge();
        let kernel = PairKernel::new(config.r_cutoff(), config.system.shift_potential);
        self.cells.rebuild(positions, box_edge, config.r_cutoff());

        out.forces.clear();
        out.forces.resize(positions.len(), Vec2::ZERO);
        let mut potential = 0.0;
        let cutoff2 = kernel.cutoff2();
        for i in 0..positions.len() {
            let qi = positions[i];
            let mut fi = out.forces[i];
            for &j in self.cells.candidates_above(i) {
                let j = j as usize;
                let d = min_image_disp(qi, positions[j], box_edge);
                let r2 = d.norm2();
                if r2 > cutoff2 {
                    // identical to accumulating a zero pair force, including the sign of zero
                    fi += Vec2::ZERO;
                    continue;
                }
                if r2 == 0.0 {
                    return Err(Error::Domain(format!("particles {i} and {j} coincide")));
                }
                let (f, e) = kernel.evaluate(d, r2);
                fi += f;
                out.forces[j] -= f;
                potential += e;
            }
            out.forces[i] = fi;
        }
        if !potential.is_finite() || out.forces.iter().any(|f| !f.is_finite()) {
            return Err(Error::Domain("non-finite force or potential".into()));
        }
        out.potential = potential;
        Ok(())
    }

    /// Potential energy only.
    pub fn potential(&mut self, positions: &[Vec2], config: &SimConfig) -> Result<f64> {
        let mut field = ForceField::default();
        self.evaluate(positions, config, &mut field)?;
        Ok(field.potential)
    }

    pub fn energy(&mut self, state: &SystemState, config: &SimConfig) -> Result<EnergyReport> {
        let potential = self.potential(&state.positions, config)?;
        Ok(EnergyReport::new(kinetic_energy(&state.velocities), potential))
    }
}

/// Forces on every particle and the total potential `sum_{i<j} V(|q_i - q_j|)`.
pub fn compute_forces(state: &SystemState, config: &SimConfig) -> Result<ForceField> {
    let mut field = ForceField::default();
    ForceEvaluator::new().evaluate(&state.positions, config, &mut field)?;
    Ok(field)
}

pub fn total_energy(state: &SystemState, config: &SimConfig) -> Result<EnergyReport> {
    ForceEvaluator::new().energy(state, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;

    fn config(n: usize) -> SimConfig {
        SimConfig::new(SystemParams { n_particles: n, ..SystemParams::default() }, 0.01, 0).unwrap()
    }

    fn state(positions: Vec<Vec2>, velocities: Vec<Vec2>) -> SystemState {
        SystemState::new(positions, velocities, 11.5).unwrap()
    }

    #[test]
    fn pair_at_minimum() {
        let r = 2f64.powf(1.0 / 6.0);
        // straddles the periodic boundary
        let s = state(vec![Vec2::new(11.0, 3.0), Vec2::new(11.0 + r - 11.5, 3.0)], vec![Vec2::ZERO; 2]);
        let f = compute_forces(&s, &config(2)).unwrap();
        assert!((f.potential + 1.0).abs() < 1e-12);
        for force in &f.forces {
            assert!(force.norm() < 1e-10);
        }
        let e = total_energy(&s, &config(2)).unwrap();
        assert_eq!(e.kinetic, 0.0);
        assert!((e.total + 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_particles_do_not_interact() {
        let s = state(
            vec![Vec2::new(1.0, 1.0), Vec2::new(5.0, 1.0), Vec2::new(1.0, 5.0), Vec2::new(5.0, 5.0)],
            vec![Vec2::ZERO; 4],
        );
        let f = compute_forces(&s, &config(4)).unwrap();
        assert_eq!(f.potential, 0.0);
        assert!(f.forces.iter().all(|v| *v == Vec2::ZERO));
        assert_eq!(total_energy(&s, &config(4)).unwrap().total, 0.0);
    }

    #[test]
    fn kinetic_energy_of_single_mover() {
        let s = state(vec![Vec2::new(1.0, 1.0), Vec2::new(6.0, 6.0)], vec![Vec2::new(1.0, 1.0), Vec2::ZERO]);
        let e = total_energy(&s, &config(2)).unwrap();
        assert_eq!(e.kinetic, 1.0);
        assert_eq!(e.potential, 0.0);
        assert_eq!(e.total, e.kinetic + e.potential);
    }

    #[test]
    fn coincident_particles_rejected() {
        let s = state(vec![Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)], vec![Vec2::ZERO; 2]);
        assert!(matches!(compute_forces(&s, &config(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn shifted_energy_differs_by_pair_count() {
        let s = state(vec![Vec2::new(1.0, 1.0), Vec2::new(2.2, 1.0)], vec![Vec2::ZERO; 2]);
        let plain = config(2);
        let mut shifted = plain.clone();
        shifted.system.shift_potential = true;
        let a = compute_forces(&s, &plain).unwrap();
        let b = compute_forces(&s, &shifted).unwrap();
        assert_eq!(a.forces, b.forces);
        let vc = crate::model::lj_potential(2.5, 2.5).unwrap();
        assert!((a.potential - b.potential - vc).abs() < 1e-15);
    }
}
