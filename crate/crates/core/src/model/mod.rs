//! Domain types, periodic geometry and the truncated Lennard-Jones force field.

mod cells;
mod config;
mod forces;
mod geometry;
mod potential;
mod state;
mod vec2;

pub use cells::CellList;
pub use config::{SimConfig, SystemParams};
pub use forces::{compute_forces, kinetic_energy, total_energy, EnergyReport, ForceEvaluator, ForceField};
pub use geometry::{min_image_disp, wrap_coordinate, wrap_position};
pub use potential::{lj_pair_force, lj_potential, PairKernel};
pub use state::SystemState;
pub use vec2::Vec2;

/// Cell list for `state` under `config`; see [`CellList`].
pub fn build_cell_list(state: &SystemState, config: &SimConfig) -> CellList {
    CellList::build(state, config)
}
