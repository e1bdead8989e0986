//! Agnostic parity learner in the shuffle model.
//!
//! Every party runs the private counting protocol once per hypothesis
//! `(ℓ, b)` with `|ℓ| <= k`, on the bit "my example is consistent with
//! `(ℓ, b)`". All counters share one shuffle round and are told apart by
//! message tag. The analyzer returns the hypothesis with the largest noisy
//! count.

use rand::RngCore;

use crate::counting::{centered, CountingConfig};
use crate::domain::{binomial_range_sum, check_dim, LabeledExample, ParityConcept, Sign, Subset};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::shuffle::{run_round, Analyzer, LocalRandomizer, Message, MessageBag, PartyStatus};

/// All parity concepts of weight at most `max_weight` in tie-break order:
/// support mask ascending, then `+1` before `-1`.
pub fn hypotheses(dim: usize, max_weight: usize) -> Result<Vec<ParityConcept>> {
    check_dim(dim)?;
    let mut out = Vec::with_capacity(2 * binomial_range_sum(dim, 0, max_weight) as usize);
    for mask in 0u32..(1 << dim) {
        if mask.count_ones() as usize <= max_weight {
            for sign in Sign::BOTH {
                out.push(ParityConcept::new(dim, Subset::from_mask(mask), sign)?);
            }
        }
    }
    Ok(out)
}

/// 1 iff the hypothesis labels the example's point with its label. The padding
/// point agrees exactly with the hypotheses of its label's sign.
pub fn consistency_bit(h: &ParityConcept, ex: &LabeledExample) -> bool {
    debug_assert_eq!(h.dim(), ex.x.dim());
    h.sign() * ex.x.product_over(h.support()) == ex.y
}

/// Privacy accounting of one learner run. Each example contributes one bit
/// to every counter, so the composed figure is basic composition over all
/// counters; it is reported, not claimed tight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget<F: Real = f64> {
    pub per_counter: F,
    pub counters: usize,
    pub composed: F,
}

#[derive(Clone, Debug)]
pub struct LearnerConfig<F: Real = f64> {
    dim: usize,
    max_weight: usize,
    counting: CountingConfig<F>,
    hypotheses: Vec<ParityConcept>,
}

impl<F: Real> LearnerConfig<F> {
    /// Learner over `PARITY_{dim, max_weight}` for `counting.parties()` samples.
    pub fn new(dim: usize, max_weight: usize, counting: CountingConfig<F>) -> Result<Self> {
        check_dim(dim)?;
        if max_weight > dim {
            return Err(Error::param("k", format!("{max_weight} > dimension {dim}")));
        }
        Ok(LearnerConfig {
            dim,
            max_weight,
            hypotheses: hypotheses(dim, max_weight)?,
            counting,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn samples(&self) -> usize {
        self.counting.parties()
    }

    pub fn counting(&self) -> &CountingConfig<F> {
        &self.counting
    }

    pub fn hypotheses(&self) -> &[ParityConcept] {
        &self.hypotheses
    }

    pub fn budget(&self) -> PrivacyBudget<F> {
        let counters = self.hypotheses.len();
        PrivacyBudget {
            per_counter: self.counting.epsilon(),
            counters,
            composed: self.counting.epsilon() * F::from_count(counters as u64),
        }
    }
}

/// The learner's local randomizer: one counting contribution per hypothesis.
pub struct ParityRandomizer<'a, F: Real = f64> {
    cfg: &'a LearnerConfig<F>,
}

impl<'a, F: Real> ParityRandomizer<'a, F> {
    pub fn new(cfg: &'a LearnerConfig<F>) -> Self {
        ParityRandomizer { cfg }
    }
}

impl<F: Real> LocalRandomizer<LabeledExample> for ParityRandomizer<'_, F> {
    fn randomize(&self, input: &LabeledExample, out: &mut Vec<Message>, rng: &mut dyn RngCore) {
        let counting = &self.cfg.counting;
        out.reserve(self.cfg.hypotheses.len() * counting.splits());
        for (tag, h) in self.cfg.hypotheses.iter().enumerate() {
            counting.encode_bit(consistency_bit(h, input), tag as u32, out, rng);
        }
    }
}

/// Result of one learner run.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnOutcome {
    pub hypothesis: ParityConcept,
    /// Noisy count per hypothesis, indexed like [`LearnerConfig::hypotheses`].
    pub noisy_counts: Vec<i64>,
}

/// Index of the first maximum, i.e. the tie-break winner.
pub fn argmax_first(counts: &[i64]) -> Option<usize> {
    let mut best: Option<(usize, i64)> = None;
    for (i, &c) in counts.iter().enumerate() {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i)
}

/// Decodes every counter from the bag and picks the argmax.
pub struct ArgmaxAnalyzer<'a, F: Real = f64> {
    cfg: &'a LearnerConfig<F>,
}

impl<'a, F: Real> ArgmaxAnalyzer<'a, F> {
    pub fn new(cfg: &'a LearnerConfig<F>) -> Self {
        ArgmaxAnalyzer { cfg }
    }

    pub fn noisy_counts(&self, bag: &MessageBag) -> Vec<i64> {
        let q = self.cfg.counting.modulus();
        let mut sums = vec![0u64; self.cfg.hypotheses.len()];
        for m in bag.iter() {
            // Foreign tags carry no counter and are ignored.
            if let Some(s) = sums.get_mut(m.tag as usize) {
                *s = (*s + m.value % q) % q;
            }
        }
        sums.into_iter().map(|s| centered(s, q)).collect()
    }
}

impl<F: Real> Analyzer for ArgmaxAnalyzer<'_, F> {
    type Output = LearnOutcome;

    fn analyze(&self, bag: &MessageBag) -> LearnOutcome {
        let noisy_counts = self.noisy_counts(bag);
        let best = argmax_first(&noisy_counts).expect("hypothesis class is never empty");
        LearnOutcome {
            hypothesis: self.cfg.hypotheses[best],
            noisy_counts,
        }
    }
}

pub(crate) fn check_samples<F: Real>(
    samples: &[LabeledExample],
    cfg: &LearnerConfig<F>,
) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.len() != cfg.samples() {
        return Err(Error::LengthMismatch {
            what: "samples",
            expected: cfg.samples(),
            actual: samples.len(),
        });
    }
    if let Some(bad) = samples.iter().find(|s| s.x.dim() != cfg.dim) {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            actual: bad.x.dim(),
        });
    }
    Ok(())
}

/// Runs the learner as one shuffle round with the given party status.
pub fn learn_shuffle<F: Real>(
    samples: &[LabeledExample],
    cfg: &LearnerConfig<F>,
    status: &PartyStatus,
    rng: &mut dyn RngCore,
) -> Result<LearnOutcome> {
    check_samples(samples, cfg)?;
    let randomizer = ParityRandomizer::new(cfg);
    let handles: Vec<&dyn LocalRandomizer<LabeledExample>> = vec![&randomizer; samples.len()];
    let (outcome, _) = run_round(&handles, samples, status, &ArgmaxAnalyzer::new(cfg), rng)?;
    Ok(outcome)
}

/// Noise-free consistency counts, indexed like `hypotheses`.
pub fn exact_counts(samples: &[LabeledExample], hypotheses: &[ParityConcept]) -> Vec<i64> {
    hypotheses
        .iter()
        .map(|h| samples.iter().filter(|ex| consistency_bit(h, ex)).count() as i64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::NoiseMode;
    use crate::domain::{cube_points, eval_parity, Point};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noiseless(dim: usize, k: usize, n: usize) -> LearnerConfig {
        let counting = CountingConfig::new(n, 1.0, 3, 1)
            .unwrap()
            .with_noise(NoiseMode::Disabled);
        LearnerConfig::new(dim, k, counting).unwrap()
    }

    #[test]
    fn hypothesis_class_size_and_order() {
        assert_eq!(hypotheses(8, 8).unwrap().len(), 512);
        assert_eq!(hypotheses(6, 2).unwrap().len(), 2 * (1 + 6 + 15));
        let h = hypotheses(3, 3).unwrap();
        assert_eq!(h[0].support(), Subset::EMPTY);
        assert_eq!((h[0].sign(), h[1].sign()), (Sign::Plus, Sign::Minus));
        assert!(h.windows(2).all(|w| (w[0].support(), w[0].sign()) < (w[1].support(), w[1].sign())));
        let cfg = noiseless(4, 4, 3);
        assert_eq!(cfg.budget().counters, 32);
        assert_eq!(cfg.budget().composed, 32.0);
    }

    #[test]
    fn consistency_examples() {
        let h = ParityConcept::new(4, Subset::from_mask(0b0101), Sign::Minus).unwrap();
        let x = Point::new(&[1, -1, -1, 1]).unwrap();
        let own = LabeledExample::labeled_by(&h, x).unwrap();
        assert!(consistency_bit(&h, &own));
        assert!(!consistency_bit(&h.negated(), &own));

        let pad = LabeledExample::new(Point::pad(4).unwrap(), Sign::Plus);
        let plus = ParityConcept::new(4, Subset::from_mask(0b1010), Sign::Plus).unwrap();
        assert!(consistency_bit(&plus, &pad));
        assert!(!consistency_bit(&plus.negated(), &pad));
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax_first(&[1, 5, 5, 2]), Some(1));
        assert_eq!(argmax_first(&[-3]), Some(0));
        assert_eq!(argmax_first(&[]), None);
    }

    #[test]
    fn noiseless_learner_recovers_from_full_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dim = 4;
        let points: Vec<Point> = cube_points(dim).collect();
        let cfg = noiseless(dim, dim, points.len());
        for target in hypotheses(dim, dim).unwrap() {
            let samples: Vec<_> = points
                .iter()
                .map(|&x| LabeledExample::labeled_by(&target, x).unwrap())
                .collect();
            let out = learn_shuffle(&samples, &cfg, &PartyStatus::all_honest(16), &mut rng).unwrap();
            assert_eq!(out.hypothesis, target);
            let idx = cfg.hypotheses().iter().position(|h| *h == target).unwrap();
            assert_eq!(out.noisy_counts[idx], 16);
            assert_eq!(out.noisy_counts[idx ^ 1], 0);
        }
    }

    #[test]
    fn noisy_counts_match_oracle_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dim = 5;
        let n = 37;
        let cfg = noiseless(dim, 3, n);
        let samples: Vec<_> = (0..n)
            .map(|_| LabeledExample::new(Point::uniform(dim, &mut rng), Sign::random(&mut rng)))
            .collect();
        let out = learn_shuffle(&samples, &cfg, &PartyStatus::all_honest(n), &mut rng).unwrap();
        // naive oracle through eval_parity
        for (h, &got) in cfg.hypotheses().iter().zip(&out.noisy_counts) {
            let want = samples
                .iter()
                .filter(|ex| eval_parity(h, &ex.x).unwrap() == ex.y)
                .count() as i64;
            assert_eq!(got, want);
        }
        assert_eq!(out.noisy_counts, exact_counts(&samples, cfg.hypotheses()));
    }

    #[test]
    fn rejects_bad_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = noiseless(3, 3, 2);
        let ex = LabeledExample::new(Point::new(&[1, 1, 1]).unwrap(), Sign::Plus);
        let status = PartyStatus::all_honest(2);
        assert_eq!(
            learn_shuffle(&[], &cfg, &status, &mut rng).unwrap_err(),
            Error::EmptySample
        );
        assert!(matches!(
            learn_shuffle(&[ex], &cfg, &status, &mut rng).unwrap_err(),
            Error::LengthMismatch { .. }
        ));
        let short = LabeledExample::new(Point::new(&[1, 1]).unwrap(), Sign::Plus);
        assert!(matches!(
            learn_shuffle(&[ex, short], &cfg, &status, &mut rng).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
        assert!(LearnerConfig::new(3, 4, cfg.counting().clone()).is_err());
    }

    #[test]
    fn noisy_learner_realizable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dim = 6;
        let n = 200;
        let cfg = LearnerConfig::new(dim, dim, CountingConfig::new(n, 1.0, 3, 2).unwrap()).unwrap();
        let mut wins = 0;
        for _ in 0..20 {
            let target = ParityConcept::new(
                dim,
                Subset::from_mask(rng.random::<u32>() & 0x3f),
                Sign::random(&mut rng),
            )
            .unwrap();
            let samples: Vec<_> = (0..n)
                .map(|_| LabeledExample::labeled_by(&target, Point::uniform(dim, &mut rng)).unwrap())
                .collect();
            let out = learn_shuffle(&samples, &cfg, &PartyStatus::all_honest(n), &mut rng).unwrap();
            wins += (out.hypothesis == target) as u32;
        }
        assert_eq!(wins, 20);
    }
}
