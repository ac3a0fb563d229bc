mod common;

use std::fs;
use std::path::Path;

use common::quick_sampler;
use ljmd::experiments::output::split_output;
use ljmd::experiments::{
    self, run_conjecture_table, run_energy_drift_experiment, run_histogram_experiment, run_msd_experiment,
    run_trajectory_divergence, ExperimentKind, ExperimentManifest, ExperimentParams, RunOptions, SamplingMode,
};
use proptest::prelude::*;

fn small(kind: ExperimentKind) -> ExperimentManifest {
    let mut m = ExperimentManifest::default_for(kind);
    m.sampler = quick_sampler();
    m.root_seed = 7;
    match kind {
        ExperimentKind::Sample => m.ensemble = 6,
        ExperimentKind::Divergence => {
            m.dt = vec![0.01, 0.001];
            m.horizon = 0.5;
        }
        ExperimentKind::Histogram => {
            m.ensemble = 6;
            m.dt = vec![0.01, 0.005];
            m.horizon = 1.0;
        }
        ExperimentKind::Msd => {
            m.ensemble = 5;
            m.dt = vec![0.01, 0.005];
            m.horizon = 1.0;
            m.params = ExperimentParams::Msd { zoom_horizon: 0.5 };
        }
        ExperimentKind::EnergyDrift => {
            m.dt = vec![0.01, 0.005];
            m.horizon = 2.0;
        }
        ExperimentKind::Conjecture => {
            m.ensemble = 4;
            m.dt = vec![0.02, 0.01];
            m.horizon = 2.0;
            m.params = ExperimentParams::Conjecture { reference_dt: 0.005, checkpoints: vec![1.0, 2.0] };
        }
    }
    m
}

fn options(dir: &Path, workers: usize) -> RunOptions {
    RunOptions { workers, out_dir: dir.to_path_buf(), checkpoint_dir: None, progress: false }
}

/// Every CSV in `dir`, sorted by name.
fn outputs(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    files.sort();
    files
}

const KINDS: [ExperimentKind; 6] = [
    ExperimentKind::Sample,
    ExperimentKind::Divergence,
    ExperimentKind::Histogram,
    ExperimentKind::Msd,
    ExperimentKind::EnergyDrift,
    ExperimentKind::Conjecture,
];

#[test]
fn outputs_do_not_depend_on_worker_count() {
    for kind in KINDS {
        let m = small(kind);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        experiments::run(&m, &options(a.path(), 1)).unwrap();
        experiments::run(&m, &options(b.path(), 8)).unwrap();
        let (fa, fb) = (outputs(a.path()), outputs(b.path()));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{kind:?}");
    }
}

#[test]
fn every_output_header_embeds_the_manifest() {
    for kind in KINDS {
        let m = small(kind);
        let dir = tempfile::tempdir().unwrap();
        experiments::run(&m, &options(dir.path(), 2)).unwrap();
        for (name, text) in outputs(dir.path()) {
            let (parsed, body) = split_output(&text).unwrap();
            assert_eq!(parsed, m, "{name}");
            assert!(text.contains("# verlet_variant = \"drift-kick-drift\"\n"), "{name}");
            assert!(!body.starts_with('#'), "{name}");
        }
    }
}

#[test]
fn chain_sampling_is_reproducible() {
    let mut m = small(ExperimentKind::Histogram);
    m.sampling = SamplingMode::Chain;
    m.sampler.gap = 1.0;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_histogram_experiment(&m, &options(a.path(), 1)).unwrap();
    let rb = run_histogram_experiment(&m, &options(b.path(), 4)).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(outputs(a.path()), outputs(b.path()));
}

#[test]
fn checkpointed_run_resumes_to_identical_output() {
    let m = small(ExperimentKind::Msd);
    let fresh = tempfile::tempdir().unwrap();
    run_msd_experiment(&m, &options(fresh.path(), 1)).unwrap();

    let work = tempfile::tempdir().unwrap();
    let ckpt = work.path().join("ckpt");
    // An output "directory" that is a regular file makes the first attempt
    // fail after all members have been folded and checkpointed.
    let blocker = work.path().join("blocked");
    fs::write(&blocker, "").unwrap();
    let broken =
        RunOptions { workers: 2, out_dir: blocker.clone(), checkpoint_dir: Some(ckpt.clone()), progress: false };
    let err = run_msd_experiment(&m, &broken).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert_eq!(fs::read_dir(ckpt.join("progress")).unwrap().count(), 1);
    assert_eq!(fs::read_dir(ckpt.join("initial")).unwrap().count(), 1);

    let out = work.path().join("out");
    let resumed = RunOptions { workers: 3, out_dir: out.clone(), checkpoint_dir: Some(ckpt.clone()), progress: false };
    run_msd_experiment(&m, &resumed).unwrap();
    assert_eq!(outputs(&out), outputs(fresh.path()));
    assert_eq!(fs::read_dir(ckpt.join("progress")).unwrap().count(), 0);

    // cached initial conditions are reused by a second run
    let again = work.path().join("again");
    run_msd_experiment(&m, &RunOptions { out_dir: again.clone(), ..resumed }).unwrap();
    assert_eq!(outputs(&again), outputs(fresh.path()));
}

#[test]
fn identical_step_sizes_never_diverge() {
    let mut m = small(ExperimentKind::Divergence);
    m.dt = vec![0.01, 0.01];
    let dir = tempfile::tempdir().unwrap();
    let r = run_trajectory_divergence(&m, &options(dir.path(), 1)).unwrap();
    assert_eq!(r.divergence.len(), 1);
    assert_eq!(r.divergence[0].time, None);
    assert_eq!(r.curves[0].x, r.curves[1].x);
    assert_eq!(r.curves[0].times.len(), 51);
    let text = fs::read_to_string(dir.path().join("divergence_times.csv")).unwrap();
    assert!(text.trim_end().ends_with(",none"));
}

#[test]
fn reference_step_in_coarse_list_gives_zero_difference() {
    let mut m = small(ExperimentKind::Conjecture);
    m.dt = vec![0.02, 0.005];
    let dir = tempfile::tempdir().unwrap();
    let r = run_conjecture_table(&m, &options(dir.path(), 2)).unwrap();
    for t in [1.0, 2.0] {
        let row = r.row(0.005, t).unwrap();
        assert_eq!(row.difference, 0.0);
        assert_eq!(row.paired_se, 0.0);
        assert!(r.row(0.02, t).unwrap().difference > 0.0);
    }
}

#[test]
fn members_share_initial_conditions_across_step_sizes() {
    // With common random numbers, member k starts from the same state at every
    // dt, so at t = 0 the displacement records coincide and the first grid
    // interval differs only by integration error.
    let m = small(ExperimentKind::Msd);
    let dir = tempfile::tempdir().unwrap();
    let r = run_msd_experiment(&m, &options(dir.path(), 2)).unwrap();
    let a = r.curves[0].get(ljmd::observables::Statistic::RSquared).unwrap();
    let b = r.curves[1].get(ljmd::observables::Statistic::RSquared).unwrap();
    let k = a.index_of(0.01).unwrap();
    assert!((a.mean[k] - b.mean[k]).abs() < 1e-2 * a.mean[k]);

    let mut independent = m.clone();
    independent.common_random_numbers = false;
    let dir = tempfile::tempdir().unwrap();
    let r = run_msd_experiment(&independent, &options(dir.path(), 2)).unwrap();
    let a = r.curves[0].get(ljmd::observables::Statistic::RSquared).unwrap();
    let b = r.curves[1].get(ljmd::observables::Statistic::RSquared).unwrap();
    assert!((a.mean[k] - b.mean[k]).abs() > 5e-2 * a.mean[k]);
}

#[test]
fn single_member_histogram_has_one_count() {
    let mut m = small(ExperimentKind::Histogram);
    m.ensemble = 1;
    let dir = tempfile::tempdir().unwrap();
    let r = run_histogram_experiment(&m, &options(dir.path(), 1)).unwrap();
    for set in &r.sets {
        let h = &set.histogram;
        assert_eq!(h.counts.iter().sum::<u64>() + h.underflow + h.overflow, 1);
        assert_eq!(set.mean_se, None);
    }
}

#[test]
fn histogram_mean_is_near_zero() {
    let mut m = small(ExperimentKind::Histogram);
    m.ensemble = 60;
    m.dt = vec![0.01];
    let dir = tempfile::tempdir().unwrap();
    let r = run_histogram_experiment(&m, &options(dir.path(), 1)).unwrap();
    let (mean, se) = r.sets[0].mean_se.unwrap();
    assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    assert!(r.failures.is_empty());
}

#[test]
fn large_step_blow_up_is_reported() {
    let mut m = small(ExperimentKind::EnergyDrift);
    m.dt = vec![0.1, 0.01];
    let dir = tempfile::tempdir().unwrap();
    let r = run_energy_drift_experiment(&m, &options(dir.path(), 1)).unwrap();
    let big = r.row(0.1).unwrap();
    assert!(big.failure.as_ref().unwrap().reason.contains("blow-up"));
    assert!(r.row(0.01).unwrap().failure.is_none());
    assert_eq!(r.failures(), 1);
    assert_eq!(r.slope, None);
}

#[test]
fn mismatched_manifest_kind_is_config_error() {
    let m = small(ExperimentKind::Msd);
    let dir = tempfile::tempdir().unwrap();
    let err = run_histogram_experiment(&m, &options(dir.path(), 1)).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

fn manifest_strategy() -> impl Strategy<Value = ExperimentManifest> {
    (
        prop::sample::select(KINDS.to_vec()),
        any::<u64>(),
        1usize..5000,
        prop::collection::vec(1e-6f64..0.05, 1..5),
        0.1f64..1000.0,
        any::<bool>(),
        prop::sample::select(vec![SamplingMode::Independent, SamplingMode::Chain]),
        0.5f64..3.0,
    )
        .prop_map(|(kind, seed, ensemble, dt, horizon, crn, sampling, rc)| {
            let mut m = ExperimentManifest::default_for(kind);
            m.root_seed = seed;
            m.ensemble = ensemble;
            m.dt = dt;
            m.horizon = horizon;
            m.common_random_numbers = crn;
            m.sampling = sampling;
            m.system.r_cutoff = rc;
            m
        })
}

proptest! {
    #[test]
    fn manifest_round_trips(m in manifest_strategy()) {
        prop_assert_eq!(&ExperimentManifest::from_toml(&m.to_toml().unwrap()).unwrap(), &m);
        prop_assert_eq!(&ExperimentManifest::from_key_values(&m.to_key_values().unwrap()).unwrap(), &m);
    }
}
