mod common;

use common::{paper, quick_sampler};
use ljmd::integrator::{integrate, StepObservation};
use ljmd::model::ForceEvaluator;
use ljmd::observables::{correlation, mean_and_se};
use ljmd::sampler::{sample_canonical, sample_independent, SamplerConfig};

#[test]
fn chains_are_bit_reproducible() {
    let sampler = SamplerConfig { burn_in: 2.0, gap: 0.5, ..quick_sampler() };
    let a = sample_canonical(&paper(0.01), &sampler, 4, 99).unwrap();
    let b = sample_canonical(&paper(0.01), &sampler, 4, 99).unwrap();
    assert_eq!(a, b);
    for s in &a {
        assert_eq!(s.stream, 0);
        assert_eq!(s.state.time, 0.0);
        assert!(s.state.displacement.iter().all(|d| d.x == 0.0 && d.y == 0.0));
        assert!(s.state.positions.iter().all(|q| (0.0..11.5).contains(&q.x) && (0.0..11.5).contains(&q.y)));
    }
}

#[test]
fn burn_in_is_adequate() {
    // Potential energy over the first and second halves of a long chain agree
    // within 3 combined standard errors.
    let config = paper(0.01);
    let samples = sample_canonical(&config, &quick_sampler(), 200, 17).unwrap();
    let mut evaluator = ForceEvaluator::new();
    let pe: Vec<f64> = samples.iter().map(|s| evaluator.potential(&s.state.positions, &config).unwrap()).collect();
    let (m1, s1) = mean_and_se(&pe[..100]).unwrap();
    let (m2, s2) = mean_and_se(&pe[100..]).unwrap();
    let combined = (s1 * s1 + s2 * s2).sqrt();
    assert!((m1 - m2).abs() < 3.0 * combined, "halves {m1} +/- {s1} and {m2} +/- {s2}");
}

#[test]
fn distinct_streams_give_uncorrelated_tracers() {
    let config = paper(0.01);
    let pairs = 40;
    let streams: Vec<u64> = (0..2 * pairs as u64).collect();
    let samples = sample_independent(&config, &quick_sampler(), &streams, 8).unwrap();
    let dx: Vec<f64> = samples
        .iter()
        .map(|s| {
            let end = integrate(&s.state, &config, 100, 100, &mut |_: &StepObservation| {}).unwrap();
            end.displacement[0].x
        })
        .collect();
    let a: Vec<f64> = dx.iter().step_by(2).copied().collect();
    let b: Vec<f64> = dx.iter().skip(1).step_by(2).copied().collect();
    let r = correlation(&a, &b).unwrap();
    assert!(r.abs() < 3.0 / (pairs as f64).sqrt(), "correlation {r}");
    for (k, s) in samples.iter().enumerate() {
        assert_eq!(s.stream, k as u64);
    }
}
