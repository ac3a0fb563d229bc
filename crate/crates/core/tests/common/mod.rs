#![allow(dead_code)]

use ljmd::model::{min_image_disp, SimConfig, SystemParams, SystemState, Vec2};
use ljmd::sampler::{equilibrate, RngStream, SamplerConfig};

/// Fast sampler settings used throughout the tests: the largest allowed
/// Langevin step and a short burn-in.
pub fn quick_sampler() -> SamplerConfig {
    SamplerConfig { friction: 1.0, step: 0.005, burn_in: 25.0, gap: 5.0 }
}

pub fn paper(dt: f64) -> SimConfig {
    SimConfig::paper_default(dt, 0)
}

/// An equilibrated state of the paper system.
pub fn canonical_state(seed: u64, stream: u64) -> SystemState {
    equilibrate(&paper(0.01), &quick_sampler(), seed, stream).unwrap().0
}

/// `n` particles placed uniformly at random with unit-normal velocities.
pub fn random_state(rng: &mut RngStream, n: usize, box_edge: f64) -> SystemState {
    let positions = (0..n).map(|_| Vec2::new(rng.uniform() * box_edge, rng.uniform() * box_edge)).collect();
    let velocities = (0..n).map(|_| Vec2::new(rng.normal(), rng.normal())).collect();
    SystemState::new(positions, velocities, box_edge).unwrap()
}

pub fn config_for(n: usize, box_edge: f64, r_cutoff: f64, dt: f64) -> SimConfig {
    let system = SystemParams { n_particles: n, box_edge, r_cutoff, ..SystemParams::default() };
    SimConfig::new(system, dt, 0).unwrap()
}

/// Brute-force O(n^2) oracle: the formula applied to every pair in ascending
/// `(i, j)` order, accumulating `f_i += f` and `f_j -= f`.
pub fn all_pairs(positions: &[Vec2], box_edge: f64, r_cutoff: f64) -> (Vec<Vec2>, f64) {
    let n = positions.len();
    let rc2 = r_cutoff * r_cutoff;
    let mut forces = vec![Vec2::ZERO; n];
    let mut potential = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = min_image_disp(positions[i], positions[j], box_edge);
            let r2 = d.x * d.x + d.y * d.y;
            let (f, e) = if r2 > rc2 {
                (Vec2::ZERO, 0.0)
            } else {
                let ir2 = 1.0 / r2;
                let ir6 = ir2 * ir2 * ir2;
                (d * (24.0 * ir2 * ir6 * (2.0 * ir6 - 1.0)), 4.0 * ir6 * (ir6 - 1.0))
            };
            forces[i] += f;
            forces[j] -= f;
            potential += e;
        }
    }
    (forces, potential)
}

/// Largest componentwise difference in positions and velocities.
pub fn max_abs_diff(a: &SystemState, b: &SystemState) -> f64 {
    let mut m: f64 = 0.0;
    for k in 0..a.len() {
        m = m
            .max((a.positions[k].x - b.positions[k].x).abs())
            .max((a.positions[k].y - b.positions[k].y).abs())
            .max((a.velocities[k].x - b.velocities[k].x).abs())
            .max((a.velocities[k].y - b.velocities[k].y).abs());
    }
    m
}
