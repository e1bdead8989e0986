use shuffle_parity::domain::{cube_points, UniformCube};
use shuffle_parity::panprivate::{
    dist_pu, distinguishing_advantage, hard_labels, identify_hard, learn_par_unif, sample_points,
    InnerLearner, ReductionHooks,
};
use shuffle_parity::shuffle::StepKind;
use shuffle_parity::stats::{trial_rng, RateEstimate};
use shuffle_parity::{
    CountingConfig, DistinguisherConfig, HardDistribution, HardFamily, LabeledExample,
    LearnerConfig, ParityConcept, Point, ReductionConfig, Sign, Subset,
};

fn reduction(dim: usize, parties: usize) -> ReductionConfig {
    let counting = CountingConfig::new(parties, 1.0, 3, 1).unwrap();
    ReductionConfig::new(LearnerConfig::new(dim, dim, counting).unwrap()).unwrap()
}

fn distinguisher(dim: usize, parties: usize) -> DistinguisherConfig {
    DistinguisherConfig::new(dim, dim, 1.0, InnerLearner::PanPrivate(reduction(dim - 1, parties)))
        .unwrap()
}

#[test]
fn every_probed_state_keeps_a_third_of_pads() {
    let cfg = reduction(4, 45);
    let target = ParityConcept::new(4, Subset::from_mask(0b0101), Sign::Minus).unwrap();
    for t in 0..100 {
        let mut rng = trial_rng(3, t);
        let labeled: Vec<_> = (0..15)
            .map(|_| LabeledExample::labeled_by(&target, Point::uniform(4, &mut rng)).unwrap())
            .collect();
        let run = learn_par_unif(&labeled, &cfg, &mut rng).unwrap();
        let transcript = &run.transcript;
        assert_eq!(transcript.count_kind(StepKind::Prefix), 15);
        assert_eq!(transcript.count_kind(StepKind::Online), 15);
        assert_eq!(transcript.count_kind(StepKind::Suffix), 15);
        assert!(run.online_examples <= 15);
        // the first state holds only the n/3 prefix pads
        let counters = cfg.learner().hypotheses().len();
        assert_eq!(transcript.state(0).len(), 15 * counters);
        let mut previous = transcript.state(0);
        for s in 1..transcript.state_count() {
            let state = transcript.state(s);
            assert!(state.contains_all(&previous));
            previous = state;
        }
    }
}

#[test]
fn labels_match_naive_reconstruction() {
    let dist = HardDistribution::new(7, Subset::from_mask(0b1011001), Sign::Plus, 0.5).unwrap();
    let mut rng = trial_rng(5, 0);
    let z = sample_points(&dist, 500, &mut rng);
    for erased in 0..7 {
        let labeled = hard_labels(&z, erased).unwrap();
        for (p, ex) in z.iter().zip(&labeled) {
            let coords = p.coords();
            let mut rest = coords.clone();
            rest.remove(erased);
            assert_eq!(ex.x.coords(), rest);
            assert_eq!(ex.y.value(), coords[erased]);
        }
    }
}

#[test]
fn erase_and_reinsert_round_trip() {
    for dim in 2..=8usize {
        for mask in 0u32..(1 << (dim - 1)) {
            let r = Subset::from_mask(mask);
            for erased in 0..dim {
                let back = r.expand_around(erased).with(erased);
                assert!(back.fits(dim) && back.contains(erased));
                assert_eq!(back.project_out(erased), r);
            }
        }
    }
}

#[test]
fn identification_with_full_support() {
    let cfg = reduction(5, 90);
    let support = Subset::full(6);
    let mut hits = 0;
    for t in 0..200 {
        let mut rng = trial_rng(9, t);
        let sign = Sign::random(&mut rng);
        let dist = HardDistribution::new(6, support, sign, 0.5).unwrap();
        let z = sample_points(&dist, 30, &mut rng);
        let run = identify_hard(&z, &cfg, &mut rng).unwrap();
        hits += ((run.support, run.sign) == (support, sign)) as u64;
    }
    let rate = RateEstimate::new(hits, 200);
    assert!(rate.rate >= 0.25 - rate.half_width(), "{rate:?}");
}

#[test]
fn pad_sign_hook_lifts_recovery() {
    let target = ParityConcept::new(6, Subset::from_mask(0b100110), Sign::Minus).unwrap();
    let hooks = ReductionHooks {
        pad_sign: Some(Sign::Minus),
        ..ReductionHooks::default()
    };
    let cfg = reduction(6, 150).with_hooks(hooks);
    let points: Vec<Point> = cube_points(6).collect();
    let mut hits = 0;
    for t in 0..200 {
        let mut rng = trial_rng(13, t);
        let labeled: Vec<_> = (0..50)
            .map(|_| {
                let x = points[rand::Rng::random_range(&mut rng, 0..points.len())];
                LabeledExample::labeled_by(&target, x).unwrap()
            })
            .collect();
        hits += (learn_par_unif(&labeled, &cfg, &mut rng).unwrap().hypothesis == target) as u64;
    }
    let rate = RateEstimate::new(hits, 200);
    assert!(rate.rate >= 0.5 - rate.half_width(), "{rate:?}");
}

#[test]
fn uniform_samples_rarely_pass_the_test() {
    let cfg = distinguisher(6, 60);
    let uniform = UniformCube::new(6).unwrap();
    let total = cfg.learner_samples() + cfg.test_samples();
    let mut accepted = 0;
    for t in 0..500 {
        let mut rng = trial_rng(17, t);
        let z = sample_points::<f64, _>(&uniform, total, &mut rng);
        accepted += dist_pu(&z, &cfg, &mut rng).unwrap().accept as u64;
    }
    assert!(accepted as f64 / 500.0 <= 1.0 / 64.0 + 0.01);
}

#[test]
fn advantage_grows_with_inner_budget() {
    let family = HardFamily::new(6, 6, 0.5).unwrap();
    let estimates: Vec<_> = [6usize, 30, 150]
        .iter()
        .map(|&parties| {
            let mut rng = trial_rng(23, parties as u64);
            distinguishing_advantage(&family, &distinguisher(6, parties), 1500, &mut rng).unwrap()
        })
        .collect();
    for pair in estimates.windows(2) {
        assert!(
            pair[0].advantage - pair[0].half_width <= pair[1].advantage + pair[1].half_width,
            "{pair:?}"
        );
    }
    let ample = estimates.last().unwrap();
    assert!(ample.advantage >= 1.0 / 64.0 - ample.half_width);
    assert!(!ample.degenerate);
}

#[test]
fn constant_stub_is_flagged() {
    let family = HardFamily::new(6, 6, 0.5).unwrap();
    let stub = InnerLearner::Constant {
        support: Subset::full(6),
        sign: Sign::Plus,
        samples: 10,
    };
    let cfg = DistinguisherConfig::new(6, 6, 1.0, stub).unwrap();
    let mut rng = trial_rng(29, 0);
    let est = distinguishing_advantage(&family, &cfg, 400, &mut rng).unwrap();
    assert!(est.degenerate);
    assert!(est.advantage >= -est.half_width);
}
