//! Ensemble scheduling: initial conditions, (member, dt) tasks on a worker
//! pool, and member-ordered folding with periodic checkpoints.

use std::ops::Range;
use std::path::PathBuf;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::checkpoint::{fingerprint, CheckpointStore, InitialCondition, Progress};
use super::manifest::{ExperimentManifest, SamplingMode};
use crate::error::{Error, Result};
use crate::integrator::{integrate, Observer, StepObservation};
use crate::model::{kinetic_energy, SimConfig, SystemParams, SystemState};
use crate::sampler::{equilibrate, Langevin, RngStream, SamplerConfig};

/// How an experiment is executed; none of these options change its results.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Size of the worker pool.
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Where initial conditions and partial results are kept; `None`
    /// disables checkpointing.
    pub checkpoint_dir: Option<PathBuf>,
    /// Print progress to stderr.
    pub progress: bool,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunOptions { workers: 1, out_dir: out_dir.into(), checkpoint_dir: None, progress: false }
    }
}

/// A (member, dt) task that blew up or produced non-finite forces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub member: usize,
    pub dt: f64,
    pub step: u64,
    pub time: f64,
    pub reason: String,
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Turns numerical failures into a recorded [`Failure`]; other errors pass through.
pub(crate) fn classify<T>(result: Result<T>, member: usize, dt: f64) -> Result<Outcome<T>> {
    match result {
        Ok(v) => Ok(Ok(v)),
        Err(Error::Integration { step, reason }) => {
            Ok(Err(Failure { member, dt, step, time: step as f64 * dt, reason }))
        }
        Err(e) => Err(e),
    }
}

/// Folds task outcomes; members arrive in increasing order, and for each
/// member its step sizes arrive in manifest order.
pub(crate) trait Accumulator<T> {
    fn add(&mut self, member: usize, dt_index: usize, outcome: Outcome<T>) -> Result<()>;
}

/// Number of `dt` steps spanning `duration`, which must be a whole multiple of `dt`.
pub fn steps_for(duration: f64, dt: f64, what: &str) -> Result<u64> {
    let k = (duration / dt).round();
    if k < 1.0 || (k * dt - duration).abs() > 1e-9 * duration.abs().max(dt) {
        return Err(Error::Config(format!("{what} {duration} is not a positive whole multiple of dt = {dt}")));
    }
    Ok(k as u64)
}

/// Observer that aborts once the kinetic energy has moved by more than
/// `limit` from its first observed value, then forwards to `f`.
pub(crate) struct Guarded<F> {
    limit: f64,
    reference: Option<f64>,
    f: F,
}

impl<F: FnMut(&StepObservation, &SystemState)> Guarded<F> {
    pub(crate) fn new(limit: f64, f: F) -> Self {
        Guarded { limit, reference: None, f }
    }
}

impl<F: FnMut(&StepObservation, &SystemState)> Observer for Guarded<F> {
    fn wants_energy(&self) -> bool {
        false
    }

    fn observe(&mut self, obs: &StepObservation, state: &SystemState) -> Result<()> {
        let ke = kinetic_energy(&state.velocities);
        let ke0 = *self.reference.get_or_insert(ke);
        if !((ke - ke0).abs() <= self.limit) {
            return Err(Error::Integration {
                step: obs.step,
                reason: format!("energy blow-up: kinetic energy moved from {ke0} to {ke} (limit {})", self.limit),
            });
        }
        (self.f)(obs, state);
        Ok(())
    }
}

/// Shared machinery for one experiment run.
pub(crate) struct Context<'a> {
    pub manifest: &'a ExperimentManifest,
    pub options: &'a RunOptions,
    pool: rayon::ThreadPool,
    store: Option<CheckpointStore>,
    initial_key: String,
    manifest_text: String,
    /// Last emitted sample of each sequential chain, by stream.
    chain_tails: Mutex<Vec<InitialCondition>>,
}

#[derive(Serialize)]
struct SamplerKey<'a> {
    system: &'a SystemParams,
    sampler: &'a SamplerConfig,
    #[serde(with = "seed_text")]
    root_seed: u64,
    sampling: SamplingMode,
}

mod seed_text {
    pub fn serialize<S: serde::Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&seed.to_string())
    }
}

impl<'a> Context<'a> {
    pub fn new(manifest: &'a ExperimentManifest, options: &'a RunOptions) -> Result<Self> {
        manifest.validate()?;
        if options.workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        let store = options.checkpoint_dir.as_ref().map(CheckpointStore::open).transpose()?;
        let key = SamplerKey {
            system: &manifest.system,
            sampler: &manifest.sampler,
            root_seed: manifest.root_seed,
            sampling: manifest.sampling,
        };
        let key_text = toml::to_string(&key).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Context {
            manifest,
            options,
            pool,
            store,
            initial_key: fingerprint(&key_text),
            manifest_text: manifest.to_toml()?,
            chain_tails: Mutex::new(Vec::new()),
        })
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    pub fn sim_config(&self, dt: f64) -> Result<SimConfig> {
        self.manifest.system.with_step(dt, self.manifest.root_seed)
    }

    /// Energy change per run beyond which a member counts as blown up.
    pub fn blowup_limit(&self) -> f64 {
        self.manifest.blowup_energy_per_particle * self.manifest.system.n_particles as f64
    }

    fn progress(&self, msg: impl FnOnce() -> String) {
        if self.options.progress {
            eprintln!("{}: {}", self.manifest.kind().name(), msg());
        }
    }

    /// `(stream, index)` of member `member` for step-size variant `variant`.
    fn source(&self, member: usize, variant: usize) -> (u64, usize) {
        let variant = if self.manifest.common_random_numbers { 0 } else { variant };
        match self.manifest.sampling {
            SamplingMode::Independent => ((variant * self.manifest.ensemble + member) as u64, 0),
            SamplingMode::Chain => (variant as u64, member),
        }
    }

    fn sampling_config(&self) -> Result<SimConfig> {
        let dt = self.manifest.dt.first().copied().unwrap_or(self.manifest.sampler.step);
        self.sim_config(dt)
    }

    fn load(&self, stream: u64, index: usize) -> Result<Option<InitialCondition>> {
        match &self.store {
            Some(s) => s.load_initial(&self.initial_key, stream, index),
            None => Ok(None),
        }
    }

    fn save(&self, ic: &InitialCondition) -> Result<()> {
        match &self.store {
            Some(s) => s.save_initial(&self.initial_key, ic),
            None => Ok(()),
        }
    }

    fn independent(&self, config: &SimConfig, stream: u64) -> Result<InitialCondition> {
        if let Some(ic) = self.load(stream, 0)? {
            ic.state.check(config)?;
            return Ok(ic);
        }
        let (state, rng) = equilibrate(config, &self.manifest.sampler, self.manifest.root_seed, stream)?;
        let ic = InitialCondition { stream, index: 0, state, rng: rng.save() };
        self.save(&ic)?;
        Ok(ic)
    }

    fn chain(&self, config: &SimConfig, stream: u64, index: usize) -> Result<InitialCondition> {
        if let Some(ic) = self.load(stream, index)? {
            ic.state.check(config)?;
            return Ok(ic);
        }
        let mut tails = self.chain_tails.lock().expect("chain cache poisoned");
        let tail = tails.iter().find(|t| t.stream == stream && t.index < index).cloned();
        let mut current = match tail {
            Some(t) => t,
            None => match self.load(stream, 0)? {
                Some(ic) => ic,
                None => {
                    let (state, rng) = equilibrate(config, &self.manifest.sampler, self.manifest.root_seed, stream)?;
                    let ic = InitialCondition { stream, index: 0, state, rng: rng.save() };
                    self.save(&ic)?;
                    ic
                }
            },
        };
        let mut langevin = Langevin::new(config, &self.manifest.sampler)?;
        while current.index < index {
            let next_index = current.index + 1;
            current = match self.load(stream, next_index)? {
                Some(ic) => ic,
                None => {
                    let mut rng = RngStream::restore(&current.rng)?;
                    let mut state = current.state;
                    langevin.run(&mut state, &mut rng, self.manifest.sampler.gap_steps())?;
                    state.reset_origin();
                    let ic = InitialCondition { stream, index: next_index, state, rng: rng.save() };
                    self.save(&ic)?;
                    ic
                }
            };
        }
        tails.retain(|t| t.stream != stream);
        tails.push(current.clone());
        Ok(current)
    }

    /// Initial conditions of `members` for step-size variant `variant`, in member order.
    pub fn initial_conditions(&self, members: Range<usize>, variant: usize) -> Result<Vec<InitialCondition>> {
        let config = self.sampling_config()?;
        match self.manifest.sampling {
            SamplingMode::Independent => self.install(|| {
                members.into_par_iter().map(|m| self.independent(&config, self.source(m, variant).0)).collect()
            }),
            SamplingMode::Chain => members
                .map(|m| {
                    let (stream, index) = self.source(m, variant);
                    self.chain(&config, stream, index)
                })
                .collect(),
        }
    }

    fn progress_key(&self) -> String {
        fingerprint(&self.manifest_text)
    }

    /// Runs `task(member, dt_index, initial_state)` for every member and each
    /// of `n_dt` step sizes, folding outcomes into `acc` in member order.
    /// Members are processed in batches; after each batch the accumulator is
    /// checkpointed.
    pub fn run_ensemble<T, A, F>(&self, mut acc: A, n_dt: usize, task: F) -> Result<A>
    where
        T: Send,
        A: Accumulator<T> + Serialize + DeserializeOwned,
        F: Fn(usize, usize, &SystemState) -> Result<Outcome<T>> + Sync,
    {
        let n = self.manifest.ensemble;
        let key = self.progress_key();
        let mut next = 0;
        if let Some(store) = &self.store {
            if let Some(p) = store.load_progress::<A>(&key, &self.manifest_text)? {
                self.progress(|| format!("resuming at member {} of {n}", p.next_member));
                next = p.next_member;
                acc = p.accumulator;
            }
        }
        let batch = (4 * self.options.workers).max(8);
        while next < n {
            let end = (next + batch).min(n);
            let variants = if self.manifest.common_random_numbers { 1 } else { n_dt };
            let initial: Vec<Vec<InitialCondition>> =
                (0..variants).map(|v| self.initial_conditions(next..end, v)).collect::<Result<_>>()?;
            let tasks: Vec<(usize, usize)> = (next..end).flat_map(|m| (0..n_dt).map(move |j| (m, j))).collect();
            let outcomes: Vec<Result<Outcome<T>>> = self.install(|| {
                tasks
                    .par_iter()
                    .map(|&(m, j)| {
                        let v = if self.manifest.common_random_numbers { 0 } else { j };
                        task(m, j, &initial[v][m - next].state)
                    })
                    .collect()
            });
            for (&(m, j), outcome) in tasks.iter().zip(outcomes) {
                acc.add(m, j, outcome?)?;
            }
            next = end;
            if let Some(store) = &self.store {
                store.save_progress(
                    &key,
                    &Progress { manifest: self.manifest_text.clone(), next_member: next, accumulator: &acc },
                )?;
            }
            self.progress(|| format!("{next}/{n} members"));
        }
        Ok(acc)
    }

    /// Drops the progress checkpoint once outputs are safely written.
    pub fn finish(&self) -> Result<()> {
        match &self.store {
            Some(store) => store.clear_progress(&self.progress_key()),
            None => Ok(()),
        }
    }
}

/// Integrates `state` to `horizon`, calling `f` at `t = 0` and every
/// `interval`, aborting on a kinetic-energy blow-up beyond `limit`.
pub(crate) fn run_guarded<F>(
    state: &SystemState,
    config: &SimConfig,
    horizon: f64,
    interval: f64,
    limit: f64,
    f: F,
) -> Result<SystemState>
where
    F: FnMut(&StepObservation, &SystemState),
{
    let n_steps = steps_for(horizon, config.dt, "horizon")?;
    let every = steps_for(interval, config.dt, "observation interval")?;
    let mut guard = Guarded::new(limit, f);
    integrate(state, config, n_steps, every, &mut guard)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_must_divide() {
        assert_eq!(steps_for(5.0, 0.01, "horizon").unwrap(), 500);
        assert_eq!(steps_for(100.0, 0.000625, "horizon").unwrap(), 160_000);
        assert_eq!(steps_for(0.01, 1e-5, "interval").unwrap(), 1000);
        assert!(steps_for(0.015, 0.01, "interval").is_err());
        assert!(steps_for(0.001, 0.01, "interval").is_err());
    }

    #[test]
    fn only_integration_errors_become_failures() {
        let f = classify::<()>(Err(Error::Integration { step: 7, reason: "x".into() }), 3, 0.5).unwrap();
        assert_eq!(f.unwrap_err().time, 3.5);
        assert!(classify::<()>(Err(Error::Config("bad".into())), 0, 0.1).is_err());
    }
}
