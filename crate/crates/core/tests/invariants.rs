use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shuffle_parity::counting::{run_counting, NoiseMode};
use shuffle_parity::learner::{exact_counts, hypotheses, learn_shuffle, ArgmaxAnalyzer, ParityRandomizer};
use shuffle_parity::shuffle::{run_round, LocalRandomizer};
use shuffle_parity::{
    CountingConfig, LabeledExample, LearnerConfig, Message, MessageBag, PartyStatus, Point, Sign,
};

const CASES: u32 = 10_000;

fn random_examples(dim: usize, n: usize, pads: bool, rng: &mut ChaCha8Rng) -> Vec<LabeledExample> {
    (0..n)
        .map(|_| {
            let x = if pads && rng.random_bool(0.2) {
                Point::pad(dim).unwrap()
            } else {
                Point::uniform(dim, rng)
            };
            LabeledExample::new(x, Sign::random(rng))
        })
        .collect()
}

fn learner(dim: usize, k: usize, n: usize, splits: usize, noise: NoiseMode) -> LearnerConfig {
    let counting = CountingConfig::new(n, 1.0, 3, splits).unwrap().with_noise(noise);
    LearnerConfig::new(dim, k, counting).unwrap()
}

fn dropout(n: usize, rng: &mut ChaCha8Rng) -> PartyStatus {
    let dropped = rng.random_range(0..=n * 2 / 3);
    PartyStatus::random_dropout(n, dropped, rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn shuffler_ignores_submission_order(seed in any::<u64>(), len in 0usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut messages: Vec<Message> = (0..len)
            .map(|_| Message::new(rng.random_range(0..4), rng.random_range(0..8)))
            .collect();
        let bag = MessageBag::from_messages(messages.clone());
        messages.shuffle(&mut rng);
        prop_assert_eq!(MessageBag::from_messages(messages), bag);
    }

    #[test]
    fn learner_output_invariant_under_party_permutation(
        seed in any::<u64>(),
        dim in 1usize..=5,
        n in 1usize..30,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=dim);
        let cfg = learner(dim, k, n, 2, NoiseMode::Disabled);
        let mut samples = random_examples(dim, n, true, &mut rng);
        let status = PartyStatus::all_honest(n);
        let before = learn_shuffle(&samples, &cfg, &status, &mut rng).unwrap();
        samples.shuffle(&mut rng);
        let after = learn_shuffle(&samples, &cfg, &status, &mut rng).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn messages_are_conserved(
        seed in any::<u64>(),
        dim in 1usize..=4,
        n in 1usize..25,
        splits in 1usize..=3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = learner(dim, dim, n, splits, NoiseMode::Enabled);
        let samples = random_examples(dim, n, true, &mut rng);
        let status = dropout(n, &mut rng);
        let randomizer = ParityRandomizer::new(&cfg);
        let handles: Vec<&dyn LocalRandomizer<LabeledExample>> = vec![&randomizer; n];
        let analyzer = ArgmaxAnalyzer::new(&cfg);
        let (_, transcript) = run_round(&handles, &samples, &status, &analyzer, &mut rng).unwrap();
        let bag = transcript.final_bag();
        let counters = cfg.hypotheses().len();
        prop_assert_eq!(bag.len(), status.honest_count() * counters * splits);
        for tag in 0..counters as u32 {
            prop_assert_eq!(bag.with_tag(tag).len(), status.honest_count() * splits);
        }
    }

    #[test]
    fn noiseless_counting_recovers_exact_sum(
        seed in any::<u64>(),
        n in 1usize..300,
        splits in 1usize..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = CountingConfig::new(n, 0.5, 3, splits).unwrap().with_noise(NoiseMode::Disabled);
        let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let status = dropout(n, &mut rng);
        let out = run_counting(&bits, &cfg, &status, &mut rng).unwrap();
        let honest: i64 = (0..n).filter(|&i| bits[i] && status.is_honest(i)).count() as i64;
        prop_assert_eq!(out.estimate, honest);
        prop_assert_eq!(out.noise, 0);
    }

    #[test]
    fn complementary_hypotheses_count_every_example_once(
        seed in any::<u64>(),
        dim in 1usize..=6,
        n in 0usize..40,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = random_examples(dim, n, true, &mut rng);
        let hs = hypotheses(dim, dim).unwrap();
        let counts = exact_counts(&samples, &hs);
        // hypotheses come in (ℓ, +1), (ℓ, -1) pairs
        for (pair, h) in counts.chunks(2).zip(hs.chunks(2)) {
            prop_assert_eq!(h[0].support(), h[1].support());
            prop_assert_eq!(h[0].sign(), -h[1].sign());
            prop_assert_eq!(pair[0] + pair[1], n as i64);
        }
        if n > 0 {
            let cfg = learner(dim, dim, n, 1, NoiseMode::Disabled);
            let out = learn_shuffle(&samples, &cfg, &PartyStatus::all_honest(n), &mut rng).unwrap();
            prop_assert_eq!(out.noisy_counts, counts);
        }
    }
}
