//! One function per subcommand. Trial `t` always draws from stream `t` of
//! the configured seed, so results do not depend on evaluation order.

use rand::Rng;
use shuffle_parity::counting::{first_message_tv, run_counting};
use shuffle_parity::domain::{generalization_error, ErrorMode, UniformCube};
use shuffle_parity::learner::{hypotheses, learn_shuffle};
use shuffle_parity::noise::{default_radius, dlap_sum_pmf, share_params, NoiseShare, PolyaSampler};
use shuffle_parity::panprivate::{
    dist_pu, learn_par_unif, lower_bound_value, sample_points, uniform_acceptance_bound,
    AdvantageEstimate, InnerLearner, ReductionHooks,
};
use shuffle_parity::stats::{trial_rng, Histogram, RateEstimate};
use shuffle_parity::{
    CountingConfig, DistinguisherConfig, HardDistribution, HardFamily, LabeledExample,
    LearnerConfig, PartyStatus, Point, ReductionConfig, Result, Sign, Subset,
};

use crate::config::{learner_sample_size, CommandKind, ExperimentConfig, LEARNER_CONSTANT};
use crate::report::Report;

/// Largest |i| checked by the pointwise ratio audit.
pub const RATIO_RADIUS: i64 = 100;

/// Trials used for the first-message uniformity proxy.
const FIRST_MESSAGE_TRIALS: u64 = 200_000;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.command {
        CommandKind::NoiseAudit => noise_audit(cfg),
        CommandKind::Learn => learn(cfg),
        CommandKind::Reduction => reduction(cfg),
        CommandKind::Distinguish => distinguish(cfg),
        CommandKind::Bound => bound(cfg),
    }
}

fn noise_audit(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    // Truncating each factor below the audited range would distort the
    // ratios near its edge.
    let exact = dlap_sum_pmf(cfg.eps, cfg.c, RATIO_RADIUS + default_radius(cfg.eps))?;
    let sampler = PolyaSampler::new(share_params(cfg.n, cfg.eps, cfg.c)?);
    let counting = CountingConfig::new(cfg.n, cfg.eps, cfg.c, cfg.splits)?;
    let status = PartyStatus::all_honest(cfg.n);

    let mut shares = Histogram::new();
    let mut errors = Histogram::new();
    let mut wrapped = 0u64;
    let mut bits = vec![false; cfg.n];
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let sum: i64 = (0..cfg.n)
            .map(|_| NoiseShare::draw(&sampler, &mut rng).contribution())
            .sum();
        shares.record(sum);
        bits.iter_mut().for_each(|b| *b = rng.random());
        let out = run_counting(&bits, &counting, &status, &mut rng)?;
        errors.record(out.estimate - out.honest_sum);
        wrapped += out.wrapped as u64;
    }

    let tv_shares = shares.tv_distance(|i| exact.prob(i));
    let tv_counting = errors.tv_distance(|i| exact.prob(i));
    let variance: f64 = shares.variance();
    let ratio = exact.max_shift_ratio(-RATIO_RADIUS, RATIO_RADIUS);
    let bound = cfg.eps.exp();
    report.value("tv_shares", tv_shares);
    report.value("tv_counting_error", tv_counting);
    report.value("variance_shares", variance);
    report.value("variance_exact", exact.variance());
    report.value("max_shift_ratio", ratio);
    report.value("exp_eps", bound);
    report.value("wrapped", wrapped as f64);
    if cfg.splits > 1 {
        let mut rng = trial_rng(cfg.seed, cfg.trials);
        let tv: f64 = first_message_tv(true, &counting, FIRST_MESSAGE_TRIALS, &mut rng);
        report.value("first_message_tv", tv);
    }

    report.check("tv_shares", tv_shares <= 0.01, format!("{tv_shares} <= 0.01"));
    report.check("tv_counting_error", tv_counting <= 0.01, format!("{tv_counting} <= 0.01"));
    let rel = (variance / exact.variance() - 1.0).abs();
    report.check("variance", rel <= 0.05, format!("relative error {rel} <= 0.05"));
    // the single-copy ratio equals e^ε up to rounding
    report.check(
        "shift_ratio",
        ratio <= bound * (1.0 + 1e-12),
        format!("{ratio} <= {bound}"),
    );
    report.check("no_wraparound", wrapped == 0, format!("{wrapped} wrapped sums"));
    Ok(report)
}

fn learn(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    let counting = CountingConfig::new(cfg.n, cfg.eps, cfg.c, cfg.splits)?;
    let learner = LearnerConfig::new(cfg.d, cfg.k, counting)?;
    let targets = hypotheses(cfg.d, cfg.k)?;
    let uniform = UniformCube::new(cfg.d)?;
    let status = PartyStatus::all_honest(cfg.n);

    let mut successes = 0u64;
    let mut errors = Vec::with_capacity(cfg.trials as usize);
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let target = targets[rng.random_range(0..targets.len())];
        let samples: Vec<LabeledExample> = (0..cfg.n)
            .map(|_| {
                let x = Point::uniform(cfg.d, &mut rng);
                let y = target.eval(&x).expect("matching dimension");
                let flip = cfg.noise_rate > 0.0 && rng.random_bool(cfg.noise_rate);
                LabeledExample::new(x, if flip { -y } else { y })
            })
            .collect();
        let out = learn_shuffle(&samples, &learner, &status, &mut rng)?;
        successes += (out.hypothesis == target) as u64;
        let err: f64 =
            generalization_error(&target, &out.hypothesis, &uniform, ErrorMode::Exact, &mut rng)?;
        errors.push(err);
    }
    errors.sort_by(f64::total_cmp);
    let quantile = |q: f64| errors[((errors.len() - 1) as f64 * q).round() as usize];
    let rate = RateEstimate::new(successes, cfg.trials);
    let budget = learner.budget();

    report.rate("success_rate", &rate);
    report.value("gen_error_mean", errors.iter().sum::<f64>() / errors.len() as f64);
    report.value("gen_error_q50", quantile(0.5));
    report.value("gen_error_q90", quantile(0.9));
    report.value("gen_error_max", quantile(1.0));
    report.value("counters", budget.counters as f64);
    report.value("eps_composed", budget.composed);
    report.value("sample_constant", cfg.n as f64 / learner_sample_size(cfg.d, 1.0) as f64);

    if cfg.noise_rate == 0.0 && cfg.n >= learner_sample_size(cfg.d, LEARNER_CONSTANT) {
        report.check(
            "success_floor",
            rate.rate >= 0.9,
            format!("success {} >= 0.9", rate.rate),
        );
    }
    Ok(report)
}

fn reduction(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    let counting = CountingConfig::new(cfg.n, cfg.eps, cfg.c, cfg.splits)?;
    let plain = ReductionConfig::new(LearnerConfig::new(cfg.d, cfg.k, counting)?)?;
    let targets = hypotheses(cfg.d, cfg.k)?;
    let third = plain.sample_count();

    let (mut hits, mut matched_hits, mut online, mut capped) = (0u64, 0u64, 0u64, 0u64);
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let target = targets[rng.random_range(0..targets.len())];
        let labeled: Vec<LabeledExample> = (0..third)
            .map(|_| LabeledExample::labeled_by(&target, Point::uniform(cfg.d, &mut rng)))
            .collect::<Result<_>>()?;
        let run = learn_par_unif(&labeled, &plain, &mut rng)?;
        hits += (run.hypothesis == target) as u64;
        online += run.online_examples as u64;
        capped += (run.online_examples == third) as u64;

        let matched = plain.clone().with_hooks(ReductionHooks {
            pad_sign: Some(target.sign()),
            ..ReductionHooks::default()
        });
        let run = learn_par_unif(&labeled, &matched, &mut rng)?;
        matched_hits += (run.hypothesis == target) as u64;
    }
    let rate = RateEstimate::new(hits, cfg.trials);
    let matched = RateEstimate::new(matched_hits, cfg.trials);
    report.rate("recovery_rate", &rate);
    report.rate("recovery_rate_matched_pad", &matched);
    report.value("online_examples_mean", online as f64 / cfg.trials as f64);
    report.value("cap_binding_fraction", capped as f64 / cfg.trials as f64);

    let floor = 0.25 - rate.half_width();
    report.check("recovery_floor", rate.rate >= floor, format!("{} >= {floor}", rate.rate));
    let floor = 0.5 - matched.half_width();
    report.check(
        "matched_pad_floor",
        matched.rate >= floor,
        format!("{} >= {floor}", matched.rate),
    );
    Ok(report)
}

fn distinguish(cfg: &ExperimentConfig) -> Result<Report> {
    let counting = CountingConfig::new(cfg.n, cfg.eps, cfg.c, cfg.splits)?;
    let inner_dim = cfg.d - 1;
    let learner = LearnerConfig::new(inner_dim, cfg.k.min(inner_dim), counting)?;
    let inner = InnerLearner::PanPrivate(ReductionConfig::new(learner)?);
    let mut dist = DistinguisherConfig::new(cfg.d, cfg.k, cfg.eps, inner)?;
    if let Some(m) = cfg.m {
        dist = dist.with_test_samples(m)?;
    }
    let mut resolved = cfg.clone();
    resolved.m = Some(dist.test_samples());
    let mut report = Report::new(&resolved);

    let family = HardFamily::new(cfg.d, cfg.k, cfg.alpha)?;
    let uniform = UniformCube::new(cfg.d)?;
    let total = dist.learner_samples() + dist.test_samples();
    let full_support = cfg.k == cfg.d;
    let (mut hard, mut null, mut full) = (0u64, 0u64, 0u64);
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let member = family.sample_member(&mut rng);
        let z = sample_points(&member, total, &mut rng);
        hard += dist_pu(&z, &dist, &mut rng)?.accept as u64;
        let z = sample_points::<f64, _>(&uniform, total, &mut rng);
        null += dist_pu(&z, &dist, &mut rng)?.accept as u64;
        if full_support {
            let sign = Sign::random(&mut rng);
            let member = HardDistribution::new(cfg.d, Subset::full(cfg.d), sign, cfg.alpha)?;
            let z = sample_points(&member, total, &mut rng);
            full += dist_pu(&z, &dist, &mut rng)?.accept as u64;
        }
    }
    let estimate = AdvantageEstimate::from_rates(
        RateEstimate::new(hard, cfg.trials),
        RateEstimate::new(null, cfg.trials),
        dist.is_degenerate(),
    );
    let advantage_floor = cfg.k as f64 / (64.0 * cfg.d as f64);

    report.rate("accept_rate_hard", &estimate.hard);
    report.rate("accept_rate_uniform", &estimate.uniform);
    let mut row = report.base_row("advantage", estimate.advantage);
    row.ci_low = Some(estimate.advantage - estimate.half_width);
    row.ci_high = Some(estimate.advantage + estimate.half_width);
    report.push(row);
    report.value("test_samples", dist.test_samples() as f64);
    report.value("threshold", dist.threshold());
    report.value("uniform_chebyshev_bound", uniform_acceptance_bound(dist.test_samples(), cfg.eps));

    let uniform_rate = estimate.uniform.rate;
    report.check(
        "uniform_ceiling",
        uniform_rate <= advantage_floor + 0.01,
        format!("{uniform_rate} <= {}", advantage_floor + 0.01),
    );
    if full_support {
        let rate = RateEstimate::new(full, cfg.trials);
        report.rate("accept_rate_full_support", &rate);
        report.check("full_support_floor", rate.rate >= 0.125, format!("{} >= 0.125", rate.rate));
    }
    let floor = advantage_floor - estimate.half_width;
    report.check(
        "advantage_floor",
        estimate.advantage >= floor,
        format!("{} >= {floor}", estimate.advantage),
    );
    Ok(report)
}

fn bound(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    let follow_d = cfg.k == cfg.d;
    let shape_case = cfg.delta == 0.0 && cfg.alpha == 0.5 && follow_d;
    let mut homogeneous = true;
    let mut shape_gap = 0.0f64;
    for d in cfg.d_min..=cfg.d {
        let k = if follow_d { d } else { cfg.k.min(d) };
        let value = lower_bound_value(d, k, cfg.eps, cfg.delta, cfg.alpha, cfg.advantage)?;
        let reference = 2f64.powf(d as f64 / 2.0) / cfg.eps;
        for (metric, v) in [("lower_bound", value), ("pure_shape", reference)] {
            let mut row = report.base_row(metric, v);
            row.d = d;
            row.k = Some(k);
            row.n = None;
            row.c = None;
            row.trials = None;
            report.push(row);
        }
        if cfg.delta == 0.0 {
            let doubled = lower_bound_value(d, k, 2.0 * cfg.eps, 0.0, cfg.alpha, cfg.advantage)?;
            homogeneous &= doubled * 2.0 == value;
        }
        if shape_case {
            shape_gap = shape_gap.max((value / (2.0 * cfg.advantage * reference) - 1.0).abs());
        }
    }
    if cfg.delta == 0.0 {
        report.check("eps_homogeneity", homogeneous, "doubling eps halves the bound".into());
    }
    if shape_case {
        report.check(
            "shape",
            shape_gap <= 1e-12,
            format!("max relative gap to 2T*2^(d/2)/eps is {shape_gap}"),
        );
    }
    Ok(report)
}
