//! Canonical-ensemble initial conditions via Langevin dynamics.

mod langevin;
mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use langevin::{langevin_step, Langevin, SamplerConfig, MAX_LANGEVIN_STEP};
pub use rng::{RngStream, RngStreamState, RNG_ALGORITHM};

use crate::error::{Error, Result};
use crate::model::{SimConfig, SystemState, Vec2};

/// Smallest lattice spacing accepted by [`lattice_init`]; closer packing
/// starts the sampler from a strongly repulsive state.
pub const MIN_LATTICE_SPACING: f64 = 0.8;

/// A canonical state tagged with the random stream that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSample {
    pub stream: u64,
    /// Position of the sample within its chain.
    pub index: usize,
    pub state: SystemState,
}

/// Places the particles on a square lattice with zero velocities.
///
/// The lattice has `ceil(sqrt(n))` sites per side and spacing
/// `L / ceil(sqrt(n))`; sites are filled row by row.
pub fn lattice_init(config: &SimConfig) -> Result<SystemState> {
    config.validate()?;
    let n = config.n_particles();
    let l = config.box_edge();
    let per_side = (n as f64).sqrt().ceil() as usize;
    let spacing = l / per_side as f64;
    if spacing < MIN_LATTICE_SPACING {
        return Err(Error::Config(format!(
            "box of edge {l} is too small for {n} particles (lattice spacing {spacing:.4}, minimum {MIN_LATTICE_SPACING})"
        )));
    }
    let positions =
        (0..n).map(|k| Vec2::new((k % per_side) as f64 * spacing, (k / per_side) as f64 * spacing)).collect();
    SystemState::new(positions, vec![Vec2::ZERO; n], l)
}

/// Runs one independent chain: lattice start, burn-in, origin reset.
/// Returns the equilibrated state and the stream positioned after burn-in.
pub fn equilibrate(
    config: &SimConfig,
    sampler: &SamplerConfig,
    root_seed: u64,
    stream: u64,
) -> Result<(SystemState, RngStream)> {
    sampler.validate()?;
    let mut rng = RngStream::new(root_seed, stream);
    let mut state = lattice_init(config)?;
    Langevin::new(config, sampler)?.run(&mut state, &mut rng, sampler.burn_in_steps())?;
    state.reset_origin();
    Ok((state, rng))
}

/// Draws `n_samples` states from a single Langevin chain on stream 0:
/// burn-in from the lattice, then one sample every `sampler.gap`.
/// Every sample has zero displacement and time.
pub fn sample_canonical(
    config: &SimConfig,
    sampler: &SamplerConfig,
    n_samples: usize,
    root_seed: u64,
) -> Result<Vec<CanonicalSample>> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let (mut state, mut rng) = equilibrate(config, sampler, root_seed, 0)?;
    let mut langevin = Langevin::new(config, sampler)?;
    let mut samples = Vec::with_capacity(n_samples);
    for index in 0..n_samples {
        if index > 0 {
            langevin.run(&mut state, &mut rng, sampler.gap_steps())?;
        }
        let mut emitted = state.clone();
        emitted.reset_origin();
        samples.push(CanonicalSample { stream: 0, index, state: emitted });
    }
    Ok(samples)
}

/// Draws one state per stream in `streams`, each from its own independently
/// burned-in chain. Output order follows `streams`, whatever the thread count.
pub fn sample_independent(
    config: &SimConfig,
    sampler: &SamplerConfig,
    streams: &[u64],
    root_seed: u64,
) -> Result<Vec<CanonicalSample>> {
    streams
        .par_iter()
        .map(|&stream| {
            equilibrate(config, sampler, root_seed, stream).map(|(state, _)| CanonicalSample {
                stream,
                index: 0,
                state,
            })
        })
        .collect()
}

/// Mean kinetic energy per degree of freedom across `states`, with its
/// standard error over states.
pub fn equipartition_report<'a, I>(states: I) -> Result<(f64, f64)>
where
    I: IntoIterator<Item = &'a SystemState>,
{
    let per_state: Vec<f64> = states
        .into_iter()
        .map(|s| {
            let dof = 2 * s.len();
            crate::model::kinetic_energy(&s.velocities) / dof as f64
        })
        .collect();
    if per_state.len() < 2 {
        return Err(Error::Statistics(format!("equipartition needs at least 2 states, got {}", per_state.len())));
    }
    let (mean, se) = crate::observables::mean_and_se(&per_state)?;
    Ok((mean, se))
}

/// Sample skewness and excess kurtosis of every velocity component pooled over `states`.
pub fn velocity_shape<'a, I>(states: I) -> Result<(f64, f64)>
where
    I: IntoIterator<Item = &'a SystemState>,
{
    let values: Vec<f64> = states.into_iter().flat_map(|s| s.velocities.iter().flat_map(|v| [v.x, v.y])).collect();
    crate::observables::skewness_kurtosis(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::verlet_step;
    use crate::model::{total_energy, SystemParams};

    fn paper(dt: f64) -> SimConfig {
        SimConfig::paper_default(dt, 0)
    }

    #[test]
    fn paper_lattice_is_ten_by_ten() {
        let s = lattice_init(&paper(0.01)).unwrap();
        assert_eq!(s.len(), 100);
        assert!((s.positions[1].x - 1.15).abs() < 1e-12);
        assert!((s.positions[10].y - 1.15).abs() < 1e-12);
        assert_eq!(s.positions[99], Vec2::new(9.0 * 1.15, 9.0 * 1.15));
        let e = total_energy(&s, &paper(0.01)).unwrap();
        assert_eq!(e.kinetic, 0.0);
        assert!(e.potential.is_finite());
        // 1.15 sits just past the potential minimum, so each bond is near -1
        assert!(e.potential < 0.0);
    }

    #[test]
    fn four_particles_use_half_box_spacing() {
        let cfg = SimConfig::new(SystemParams { n_particles: 4, ..SystemParams::default() }, 0.01, 0).unwrap();
        let s = lattice_init(&cfg).unwrap();
        assert_eq!(s.positions[1], Vec2::new(5.75, 0.0));
        assert_eq!(s.positions[2], Vec2::new(0.0, 5.75));
    }

    #[test]
    fn overcrowded_box_is_config_error() {
        let cfg = SimConfig::new(SystemParams { n_particles: 400, box_edge: 11.5, ..SystemParams::default() }, 0.01, 0)
            .unwrap();
        assert!(matches!(lattice_init(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn zero_friction_is_exactly_verlet() {
        let cfg = paper(0.001);
        let sampler = SamplerConfig { friction: 0.0, step: cfg.dt, ..SamplerConfig::default() };
        let mut rng = RngStream::new(1, 0);
        // start from a thermalised-looking state: lattice plus random velocities
        let mut s = lattice_init(&cfg).unwrap();
        for v in s.velocities.iter_mut() {
            *v = Vec2::new(rng.normal(), rng.normal());
        }
        let a = langevin_step(&s, &cfg, &sampler, &mut rng).unwrap();
        let b = verlet_step(&s, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn langevin_is_deterministic() {
        let cfg = paper(0.001);
        let sampler = SamplerConfig::default();
        let s = lattice_init(&cfg).unwrap();
        let run = || {
            let mut rng = RngStream::new(42, 3);
            let mut lg = Langevin::new(&cfg, &sampler).unwrap();
            let mut st = s.clone();
            lg.run(&mut st, &mut rng, 200).unwrap();
            st
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn free_particle_velocity_variance_matches_temperature() {
        // two particles in a huge box never come within the cutoff
        let params = SystemParams { n_particles: 2, box_edge: 1.0e6, ..SystemParams::default() };
        let cfg = SimConfig::new(params, 0.005, 0).unwrap();
        let sampler = SamplerConfig { friction: 1.0, step: 0.005, burn_in: 10.0, gap: 1.0 };
        let mut state =
            SystemState::new(vec![Vec2::new(1.0, 1.0), Vec2::new(5.0e5, 5.0e5)], vec![Vec2::ZERO; 2], 1.0e6).unwrap();
        let mut rng = RngStream::new(5, 0);
        let mut lg = Langevin::new(&cfg, &sampler).unwrap();
        lg.run(&mut state, &mut rng, 2000).unwrap();
        // samples one relaxation time apart are nearly independent
        let mut values = Vec::new();
        for _ in 0..4000 {
            lg.run(&mut state, &mut rng, 400).unwrap();
            values.extend(state.velocities.iter().flat_map(|v| [v.x, v.y]));
        }
        let n = values.len() as f64;
        let var = values.iter().map(|v| v * v).sum::<f64>() / n;
        // standard error of a Gaussian second moment: sqrt(2/n) var, inflated for residual correlation
        let se = (2.0 / n).sqrt() * 1.2;
        assert!((var - 1.0).abs() < 3.0 * se, "variance {var}, se {se}");
    }

    #[test]
    fn equipartition_edge_cases() {
        let cfg = paper(0.01);
        let s = lattice_init(&cfg).unwrap();
        assert_eq!(equipartition_report([&s, &s]).unwrap(), (0.0, 0.0));
        assert!(matches!(equipartition_report([&s]), Err(Error::Statistics(_))));
        let mut moving = s.clone();
        moving.velocities.iter_mut().for_each(|v| *v = Vec2::new(1.0, -1.0));
        let (mean, se) = equipartition_report([&moving, &moving]).unwrap();
        assert_eq!((mean, se), (0.5, 0.0));
    }

    #[test]
    fn sample_canonical_single_sample() {
        let cfg = paper(0.01);
        let sampler = SamplerConfig { burn_in: 1.0, gap: 0.5, ..SamplerConfig::default() };
        let samples = sample_canonical(&cfg, &sampler, 1, 9).unwrap();
        assert_eq!(samples.len(), 1);
        let st = &samples[0].state;
        assert_eq!(st.time, 0.0);
        assert!(st.displacement.iter().all(|d| *d == Vec2::ZERO));
        st.check(&cfg).unwrap();
        assert!(sample_canonical(&cfg, &sampler, 0, 9).is_err());
    }

    #[test]
    fn sampler_config_validation() {
        SamplerConfig::default().validate().unwrap();
        assert!(SamplerConfig { step: 0.01, ..SamplerConfig::default() }.validate().is_err());
        assert!(SamplerConfig { friction: 0.0, ..SamplerConfig::default() }.validate().is_err());
        assert_eq!(SamplerConfig::default().burn_in_steps(), 100_000);
        assert_eq!(SamplerConfig::default().gap_steps(), 10_000);
    }
}
