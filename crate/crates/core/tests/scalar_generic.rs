use shuffle_parity::counting::{run_counting, CountingConfig, NoiseMode};
use shuffle_parity::learner::{learn_shuffle, LearnerConfig};
use shuffle_parity::noise::{dlap_sum_pmf, DiscreteLaplace};
use shuffle_parity::panprivate::lower_bound_value;
use shuffle_parity::stats::trial_rng;
use shuffle_parity::{LabeledExample, ParityConcept, PartyStatus, Point, Sign, Subset};

#[test]
fn single_precision_pipeline() {
    let cfg = CountingConfig::<f32>::new(20, 1.0, 3, 2).unwrap().with_noise(NoiseMode::Disabled);
    let bits: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
    let mut rng = trial_rng(1, 0);
    let out = run_counting(&bits, &cfg, &PartyStatus::all_honest(20), &mut rng).unwrap();
    assert_eq!(out.estimate, 7);

    let target = ParityConcept::new(5, Subset::from_mask(0b10100), Sign::Plus).unwrap();
    let samples: Vec<_> = (0..80)
        .map(|_| LabeledExample::labeled_by(&target, Point::uniform(5, &mut rng)).unwrap())
        .collect();
    let counting = CountingConfig::<f32>::new(80, 1.0, 3, 1).unwrap();
    let learner = LearnerConfig::new(5, 5, counting).unwrap();
    let out = learn_shuffle(&samples, &learner, &PartyStatus::all_honest(80), &mut rng).unwrap();
    assert_eq!(out.hypothesis, target);
}

#[test]
fn precisions_agree_on_exact_quantities() {
    let single = dlap_sum_pmf(1.0f32, 3, 60).unwrap();
    let double = dlap_sum_pmf(1.0f64, 3, 60).unwrap();
    for i in -20..=20 {
        assert!((single.prob(i) as f64 - double.prob(i)).abs() < 1e-6);
    }
    assert!((DiscreteLaplace::new(0.5f32).unwrap().variance() as f64
        - DiscreteLaplace::new(0.5f64).unwrap().variance())
    .abs()
        < 1e-4);
    let a: f32 = lower_bound_value(10, 10, 1.0, 0.0, 0.5, 1.0).unwrap();
    let b: f64 = lower_bound_value(10, 10, 1.0, 0.0, 0.5, 1.0).unwrap();
    assert!((a as f64 / b - 1.0).abs() < 1e-6);
}
