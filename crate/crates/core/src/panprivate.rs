//! Reductions from a robust shuffle-model parity learner to pan-private
//! learning, hard-distribution identification and distinguishing.
//!
//! * [`learn_par_unif`] turns the shuffle learner `M` on `n` parties into an
//!   online learner over `n/3` labeled examples: `n/3` padding parties go
//!   first, then a binomially distributed number of real examples (the rest
//!   padded), then `n/3` more padding parties, with `M`'s randomizers applied
//!   in a random order.
//! * [`identify_hard`] uses a uniformly random coordinate of each sample as
//!   its label and learns on the remaining coordinates.
//! * [`dist_pu`] runs the identifier on the first `n` samples and checks the
//!   identified parity on the next `m` with two Laplace perturbations.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution};

use crate::domain::{
    binomial, binomial_range_sum, check_dim, CubeDistribution, HardFamily, LabeledExample,
    ParityConcept, Point, Sign, Subset, UniformCube,
};
use crate::error::{Error, Result};
use crate::learner::{check_samples, ArgmaxAnalyzer, LearnerConfig, ParityRandomizer};
use crate::noise::sample_lap;
use crate::scalar::Real;
use crate::shuffle::{run_incremental, ExecutionTranscript, InjectionSchedule, LocalRandomizer};
use crate::stats::RateEstimate;

/// Test hooks that pin otherwise random choices of the reductions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReductionHooks {
    /// Number of real examples fed online (still capped at `n/3`).
    pub online_count: Option<usize>,
    /// Label of the padding point.
    pub pad_sign: Option<Sign>,
    /// Coordinate erased by [`identify_hard`].
    pub erased_index: Option<usize>,
}

/// The pan-private learner built around an inner shuffle learner on `n`
/// parties. Its inputs have the inner learner's dimension.
#[derive(Clone, Debug)]
pub struct ReductionConfig<F: Real = f64> {
    learner: LearnerConfig<F>,
    hooks: ReductionHooks,
}

impl<F: Real> ReductionConfig<F> {
    pub fn new(learner: LearnerConfig<F>) -> Result<Self> {
        let parties = learner.samples();
        if parties == 0 || parties % 3 != 0 {
            return Err(Error::param(
                "n",
                format!("party budget {parties} must be a positive multiple of 3"),
            ));
        }
        Ok(ReductionConfig {
            learner,
            hooks: ReductionHooks::default(),
        })
    }

    pub fn with_hooks(mut self, hooks: ReductionHooks) -> Self {
        self.hooks = hooks;
        self
    }

    pub fn hooks(&self) -> &ReductionHooks {
        &self.hooks
    }

    pub fn learner(&self) -> &LearnerConfig<F> {
        &self.learner
    }

    pub fn dim(&self) -> usize {
        self.learner.dim()
    }

    /// Party budget `n` of the inner learner.
    pub fn parties(&self) -> usize {
        self.learner.samples()
    }

    /// Number of labeled examples the reduction consumes, `n/3`.
    pub fn sample_count(&self) -> usize {
        self.parties() / 3
    }
}

/// One execution of [`learn_par_unif`].
#[derive(Clone, Debug)]
pub struct ReductionRun {
    pub hypothesis: ParityConcept,
    pub pad_sign: Sign,
    /// Number of real examples fed to the inner learner (`N'` after the cap).
    pub online_examples: usize,
    /// `order[j]` is the inner randomizer applied at position `j`.
    pub order: Vec<usize>,
    pub noisy_counts: Vec<i64>,
    pub transcript: ExecutionTranscript,
}

/// Online uniform-distribution learner from the inner shuffle learner.
pub fn learn_par_unif<F: Real>(
    labeled: &[LabeledExample],
    cfg: &ReductionConfig<F>,
    rng: &mut dyn RngCore,
) -> Result<ReductionRun> {
    let third = cfg.sample_count();
    if labeled.len() != third {
        return Err(Error::LengthMismatch {
            what: "labeled examples",
            expected: third,
            actual: labeled.len(),
        });
    }
    let dim = cfg.dim();
    if let Some(bad) = labeled.iter().find(|ex| ex.x.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.x.dim(),
        });
    }
    let parties = cfg.parties();

    let mut order: Vec<usize> = (0..parties).collect();
    order.shuffle(rng);
    let pad_sign = match cfg.hooks.pad_sign {
        Some(sign) => sign,
        None => Sign::random(rng),
    };
    let online_examples = match cfg.hooks.online_count {
        Some(count) => count,
        None => Binomial::new(parties as u64, 2.0 / 9.0)
            .expect("valid binomial")
            .sample(rng) as usize,
    }
    .min(third);

    let pad = LabeledExample::new(Point::pad(dim)?, pad_sign);
    let mut inputs = Vec::with_capacity(parties);
    inputs.extend(std::iter::repeat_n(pad, third));
    inputs.extend_from_slice(&labeled[..online_examples]);
    inputs.extend(std::iter::repeat_n(pad, parties - third - online_examples));
    check_samples(&inputs, &cfg.learner)?;

    let randomizers: Vec<ParityRandomizer<'_, F>> =
        (0..parties).map(|_| ParityRandomizer::new(&cfg.learner)).collect();
    let handles: Vec<&dyn LocalRandomizer<LabeledExample>> = order
        .iter()
        .map(|&i| &randomizers[i] as &dyn LocalRandomizer<LabeledExample>)
        .collect();
    let schedule = InjectionSchedule {
        prefix: third,
        online: third,
        suffix: third,
    };
    let analyzer = ArgmaxAnalyzer::new(&cfg.learner);
    let (outcome, transcript) = run_incremental(&handles, &inputs, &schedule, &analyzer, rng)?;
    Ok(ReductionRun {
        hypothesis: outcome.hypothesis,
        pad_sign,
        online_examples,
        order,
        noisy_counts: outcome.noisy_counts,
        transcript,
    })
}

/// Labels each sample with its coordinate `erased` and removes that
/// coordinate from the point.
pub fn hard_labels(z: &[Point], erased: usize) -> Result<Vec<LabeledExample>> {
    z.iter()
        .map(|p| {
            if !p.is_full_support() {
                return Err(Error::NotFullSupport);
            }
            let y = Sign::from_value(p.coord(erased).into())?;
            Ok(LabeledExample::new(p.erase(erased)?, y))
        })
        .collect()
}

/// One execution of [`identify_hard`].
#[derive(Clone, Debug)]
pub struct IdentifyRun {
    pub support: Subset,
    pub sign: Sign,
    pub erased: usize,
    pub labeled: Vec<LabeledExample>,
    pub inner: ReductionRun,
}

/// Identifies `(ℓ, b)` of a hard distribution from `n/3` samples of
/// dimension `cfg.dim() + 1`.
pub fn identify_hard<F: Real>(
    z: &[Point],
    cfg: &ReductionConfig<F>,
    rng: &mut dyn RngCore,
) -> Result<IdentifyRun> {
    let dim = cfg.dim() + 1;
    check_dim(dim)?;
    if dim < 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if let Some(bad) = z.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.dim(),
        });
    }
    let erased = match cfg.hooks.erased_index {
        Some(i) if i < dim => i,
        Some(i) => return Err(Error::param("erased_index", format!("{i} >= {dim}"))),
        None => rng.random_range(0..dim),
    };
    let labeled = hard_labels(z, erased)?;
    let inner = learn_par_unif(&labeled, cfg, rng)?;
    let support = inner.hypothesis.support().expand_around(erased).with(erased);
    Ok(IdentifyRun {
        support,
        sign: inner.hypothesis.sign(),
        erased,
        labeled,
        inner,
    })
}

/// The identifier used inside [`dist_pu`].
#[derive(Clone, Debug)]
pub enum InnerLearner<F: Real = f64> {
    /// [`identify_hard`] around the given reduction.
    PanPrivate(ReductionConfig<F>),
    /// Always answers the same `(ℓ, b)`; a degenerate baseline.
    Constant {
        support: Subset,
        sign: Sign,
        samples: usize,
    },
}

/// Test-sample count `⌈max{512d/k, 64·√(2d/k)/ε}⌉`.
pub fn test_sample_count<F: Real>(dim: usize, max_weight: usize, eps: F) -> Result<usize> {
    if max_weight == 0 || max_weight > dim {
        return Err(Error::param("k", format!("{max_weight} not in 1..={dim}")));
    }
    if !(eps > F::zero() && eps.is_finite()) {
        return Err(Error::param("epsilon", format!("{eps} must be positive")));
    }
    let ratio = F::from_count(dim as u64) / F::from_count(max_weight as u64);
    let first = F::lit(512.0) * ratio;
    let second = F::lit(64.0) * (F::lit(2.0) * ratio).sqrt() / eps;
    Ok(first.max(second).ceil().to_usize().expect("finite sample count"))
}

#[derive(Clone, Debug)]
pub struct DistinguisherConfig<F: Real = f64> {
    dim: usize,
    max_weight: usize,
    epsilon: F,
    test_samples: usize,
    inner: InnerLearner<F>,
}

impl<F: Real> DistinguisherConfig<F> {
    pub fn new(dim: usize, max_weight: usize, eps: F, inner: InnerLearner<F>) -> Result<Self> {
        check_dim(dim)?;
        let test_samples = test_sample_count(dim, max_weight, eps)?;
        match &inner {
            InnerLearner::PanPrivate(reduction) if reduction.dim() + 1 != dim => {
                return Err(Error::DimensionMismatch {
                    expected: dim - 1,
                    actual: reduction.dim(),
                });
            }
            InnerLearner::Constant { support, .. } if support.is_empty() || !support.fits(dim) => {
                return Err(Error::param("support", format!("{support} invalid for dimension {dim}")));
            }
            _ => {}
        }
        Ok(DistinguisherConfig {
            dim,
            max_weight,
            epsilon: eps,
            test_samples,
            inner,
        })
    }

    /// Replaces the formula's `m`.
    pub fn with_test_samples(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("m", "need at least one test sample"));
        }
        self.test_samples = m;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    pub fn inner(&self) -> &InnerLearner<F> {
        &self.inner
    }

    /// `m`.
    pub fn test_samples(&self) -> usize {
        self.test_samples
    }

    /// `n`, the samples handed to the identifier.
    pub fn learner_samples(&self) -> usize {
        match &self.inner {
            InnerLearner::PanPrivate(reduction) => reduction.sample_count(),
            InnerLearner::Constant { samples, .. } => *samples,
        }
    }

    /// `3m/4`.
    pub fn threshold(&self) -> F {
        F::lit(0.75) * F::from_count(self.test_samples as u64)
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.inner, InnerLearner::Constant { .. })
    }
}

/// One execution of [`dist_pu`], with every random draw logged.
#[derive(Clone, Debug, PartialEq)]
pub struct DistRun<F: Real = f64> {
    pub accept: bool,
    pub support: Subset,
    pub sign: Sign,
    pub first_noise: F,
    pub second_noise: F,
    /// Test samples whose product over `support` equals `sign`.
    pub matches: usize,
    /// `first_noise + matches + second_noise`.
    pub statistic: F,
}

/// Returns `1` iff the identified parity holds on at least `3m/4` of the
/// test samples after two Laplace(1/ε) perturbations.
pub fn dist_pu<F: Real>(
    z: &[Point],
    cfg: &DistinguisherConfig<F>,
    rng: &mut dyn RngCore,
) -> Result<DistRun<F>> {
    let n = cfg.learner_samples();
    let m = cfg.test_samples;
    if z.len() != n + m {
        return Err(Error::LengthMismatch {
            what: "samples",
            expected: n + m,
            actual: z.len(),
        });
    }
    if let Some(bad) = z.iter().find(|p| p.dim() != cfg.dim) {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            actual: bad.dim(),
        });
    }
    let (support, sign) = match &cfg.inner {
        InnerLearner::PanPrivate(reduction) => {
            let run = identify_hard(&z[..n], reduction, rng)?;
            (run.support, run.sign)
        }
        InnerLearner::Constant { support, sign, .. } => (*support, *sign),
    };
    debug_assert!(!support.is_empty());
    let scale = F::one() / cfg.epsilon;
    let first_noise = sample_lap(scale, rng);
    let matches = z[n..]
        .iter()
        .filter(|p| p.product_over(support) == sign)
        .count();
    let second_noise = sample_lap(scale, rng);
    let statistic = first_noise + F::from_count(matches as u64) + second_noise;
    Ok(DistRun {
        accept: statistic >= cfg.threshold(),
        support,
        sign,
        first_noise,
        second_noise,
        matches,
        statistic,
    })
}

/// Monte Carlo estimate of `Pr[1 | P_{L,B}] - Pr[1 | U]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdvantageEstimate {
    pub hard: RateEstimate,
    pub uniform: RateEstimate,
    pub advantage: f64,
    /// Sum of the two Wilson half-widths.
    pub half_width: f64,
    /// The inner learner was the constant baseline.
    pub degenerate: bool,
}

impl AdvantageEstimate {
    pub fn from_rates(hard: RateEstimate, uniform: RateEstimate, degenerate: bool) -> Self {
        AdvantageEstimate {
            hard,
            uniform,
            advantage: hard.rate - uniform.rate,
            half_width: hard.half_width() + uniform.half_width(),
            degenerate,
        }
    }
}

/// Draws `count` points from `dist`.
pub fn sample_points<F: Real, D: CubeDistribution<F>>(
    dist: &D,
    count: usize,
    rng: &mut dyn RngCore,
) -> Vec<Point> {
    (0..count).map(|_| dist.sample(rng)).collect()
}

/// Runs `trials` distinguisher executions on samples from a uniformly chosen
/// family member and `trials` on uniform samples.
pub fn distinguishing_advantage<F: Real>(
    family: &HardFamily<F>,
    cfg: &DistinguisherConfig<F>,
    trials: u64,
    rng: &mut dyn RngCore,
) -> Result<AdvantageEstimate> {
    if trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    if family.dim() != cfg.dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            actual: family.dim(),
        });
    }
    let total = cfg.learner_samples() + cfg.test_samples;
    let uniform = UniformCube::new(cfg.dim)?;
    let (mut hard_hits, mut uniform_hits) = (0u64, 0u64);
    for _ in 0..trials {
        let member = family.sample_member(rng);
        let z = sample_points(&member, total, rng);
        hard_hits += dist_pu(&z, cfg, rng)?.accept as u64;
        let z = sample_points::<F, _>(&uniform, total, rng);
        uniform_hits += dist_pu(&z, cfg, rng)?.accept as u64;
    }
    Ok(AdvantageEstimate::from_rates(
        RateEstimate::new(hard_hits, trials),
        RateEstimate::new(uniform_hits, trials),
        cfg.is_degenerate(),
    ))
}

/// Reference value of the pan-private distinguishing lower bound
/// `T / √(ε²α²/C + δ·ln(C/δ))` with `C = Σ_{j≤k} C(d, j)` and the constant
/// hidden in the asymptotic notation set to 1.
pub fn lower_bound_value<F: Real>(
    dim: usize,
    max_weight: usize,
    eps: F,
    delta: F,
    alpha: F,
    advantage: F,
) -> Result<F> {
    if !(1..=62).contains(&dim) {
        return Err(Error::param("d", format!("{dim} not in 1..=62")));
    }
    if !(1..=dim).contains(&max_weight) {
        return Err(Error::param("k", format!("{max_weight} not in 1..={dim}")));
    }
    if !(eps > F::zero() && eps.is_finite()) {
        return Err(Error::param("epsilon", format!("{eps} must be positive")));
    }
    if !(delta >= F::zero() && delta < F::one()) {
        return Err(Error::param("delta", format!("{delta} not in [0, 1)")));
    }
    if !(alpha > F::zero() && alpha <= F::lit(0.5)) {
        return Err(Error::param("alpha", format!("{alpha} not in (0, 1/2]")));
    }
    if !(advantage > F::zero() && advantage <= F::one()) {
        return Err(Error::param("T", format!("{advantage} not in (0, 1]")));
    }
    let classes = if max_weight == dim {
        F::lit(2.0).powi(dim as i32)
    } else {
        F::from_count(binomial_range_sum(dim, 0, max_weight))
    };
    let pure = eps * eps * alpha * alpha / classes;
    let approx = if delta > F::zero() {
        delta * (classes / delta).ln()
    } else {
        F::zero()
    };
    Ok(advantage / (pure + approx).sqrt())
}

/// Chebyshev bound `4/m + 64/(ε²m²)` on the uniform-case acceptance rate.
pub fn uniform_acceptance_bound<F: Real>(test_samples: usize, eps: F) -> F {
    let m = F::from_count(test_samples as u64);
    F::lit(4.0) / m + F::lit(64.0) / (eps * eps * m * m)
}

/// `Pr[|L| >= k/2]` for `L` uniform over non-empty subsets of size at most `k`.
pub fn heavy_support_fraction(dim: usize, max_weight: usize) -> f64 {
    let all = binomial_range_sum(dim, 1, max_weight) as f64;
    let heavy: u64 = (1..=max_weight)
        .filter(|&j| 2 * j >= max_weight)
        .map(|j| binomial(dim, j))
        .sum();
    heavy as f64 / all
}
