//! Robust shuffle-model private counting.
//!
//! Each party holds a bit `a`. It draws a [`NoiseShare`] with Polya shape
//! `c/n`, forms `v = a + plus - minus`, and sends `v` as `splits` uniformly
//! random additive shares modulo `q`. The analyzer sums everything modulo `q`
//! and returns the centered representative, i.e. `Σ a_i` plus the sum of `c`
//! Discrete Laplace draws when everyone participates. With only a third of
//! the parties honest and `c = 3`, one full Discrete Laplace draw survives.

use std::cell::Cell;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::noise::{share_params, NoiseShare, PolyaSampler};
use crate::scalar::Real;
use crate::shuffle::{run_round, LocalRandomizer, Message, MessageBag, PartyStatus};
use crate::stats::Histogram;

const MAX_MODULUS: u64 = 1 << 62;

/// Whether parties add their noise shares. `Disabled` is a test hook.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseMode {
    Enabled,
    Disabled,
}

#[derive(Clone, Debug)]
pub struct CountingConfig<F: Real = f64> {
    parties: usize,
    epsilon: F,
    copies: u32,
    splits: usize,
    modulus: u64,
    noise: NoiseMode,
    sampler: PolyaSampler<F>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime strictly greater than `bound`.
pub fn next_prime_above(bound: u64) -> u64 {
    let mut n = bound + 1;
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// Default modulus: the smallest prime above `8n + 400/ε`.
pub fn default_modulus<F: Real>(parties: usize, eps: F) -> u64 {
    let bound = F::lit(8.0) * F::from_count(parties as u64) + F::lit(400.0) / eps;
    next_prime_above(bound.floor().to_u64().unwrap_or(MAX_MODULUS))
}

/// Centered representative of `value mod modulus` in `(-q/2, q/2]`.
pub fn centered(value: u64, modulus: u64) -> i64 {
    let value = value % modulus;
    if value <= modulus / 2 {
        value as i64
    } else {
        value as i64 - modulus as i64
    }
}

impl<F: Real> CountingConfig<F> {
    /// `parties` counters of one bit each, privacy `eps` per counter,
    /// `copies` Discrete Laplace draws of total noise, `splits` messages per
    /// party, and the default modulus.
    pub fn new(parties: usize, eps: F, copies: u32, splits: usize) -> Result<Self> {
        let params = share_params(parties, eps, copies)?;
        if splits == 0 {
            return Err(Error::param("splits", "need at least one message per party"));
        }
        let modulus = default_modulus(parties, eps);
        let cfg = CountingConfig {
            parties,
            epsilon: eps,
            copies,
            splits,
            modulus,
            noise: NoiseMode::Enabled,
            sampler: PolyaSampler::new(params),
        };
        cfg.check_modulus(modulus)?;
        Ok(cfg)
    }

    /// Overrides the modulus; it must leave room for `n` plus the noise bound
    /// on both sides of zero.
    pub fn with_modulus(mut self, modulus: u64) -> Result<Self> {
        self.check_modulus(modulus)?;
        self.modulus = modulus;
        Ok(self)
    }

    pub fn with_noise(mut self, noise: NoiseMode) -> Self {
        self.noise = noise;
        self
    }

    fn check_modulus(&self, modulus: u64) -> Result<()> {
        let needed = 2 * (self.parties as u64 + self.noise_bound());
        if modulus <= needed || modulus > MAX_MODULUS {
            return Err(Error::param(
                "modulus",
                format!("{modulus} must be in ({needed}, 2^62]"),
            ));
        }
        Ok(())
    }

    /// `⌈20·c/ε⌉`, a magnitude the total noise exceeds with probability
    /// below `c·e^{-20}`.
    pub fn noise_bound(&self) -> u64 {
        (F::lit(20.0) * F::from_count(self.copies as u64) / self.epsilon)
            .ceil()
            .to_u64()
            .unwrap_or(MAX_MODULUS)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn splits(&self) -> usize {
        self.splits
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn noise(&self) -> NoiseMode {
        self.noise
    }

    pub fn sampler(&self) -> &PolyaSampler<F> {
        &self.sampler
    }

    /// Appends the messages for bit `a` on `tag` and returns the noise share
    /// that was mixed in.
    pub fn encode_bit(
        &self,
        a: bool,
        tag: u32,
        out: &mut Vec<Message>,
        rng: &mut dyn RngCore,
    ) -> NoiseShare {
        let share = match self.noise {
            NoiseMode::Enabled => NoiseShare::draw(&self.sampler, rng),
            NoiseMode::Disabled => NoiseShare::default(),
        };
        let q = self.modulus as i64;
        let v = (a as i64 + share.contribution()).rem_euclid(q) as u64;
        let mut rest = v;
        for _ in 1..self.splits {
            let s = rng.random_range(0..self.modulus);
            out.push(Message::new(tag, s));
            rest = (rest + self.modulus - s) % self.modulus;
        }
        out.push(Message::new(tag, rest));
        share
    }
}

/// Messages for one party's bit on counter tag 0.
pub fn randomize_bit<F: Real>(a: bool, cfg: &CountingConfig<F>, rng: &mut dyn RngCore) -> Vec<Message> {
    let mut out = Vec::with_capacity(cfg.splits);
    cfg.encode_bit(a, 0, &mut out, rng);
    out
}

fn sum_mod(messages: &[Message], modulus: u64) -> u64 {
    messages
        .iter()
        .fold(0u64, |acc, m| (acc + m.value % modulus) % modulus)
}

/// Centered sum of every message in a single-counter bag.
pub fn analyze_count<F: Real>(bag: &MessageBag, cfg: &CountingConfig<F>) -> i64 {
    centered(sum_mod(bag.as_slice(), cfg.modulus), cfg.modulus)
}

/// Centered sum of the messages carrying `tag`.
pub fn analyze_tag<F: Real>(bag: &MessageBag, tag: u32, cfg: &CountingConfig<F>) -> i64 {
    centered(sum_mod(bag.with_tag(tag), cfg.modulus), cfg.modulus)
}

/// Counting randomizer for one tag. Keeps a running total of the noise it
/// mixed in so simulations can audit the analyzer.
pub struct CountingRandomizer<'a, F: Real = f64> {
    cfg: &'a CountingConfig<F>,
    tag: u32,
    noise_total: Cell<i64>,
}

impl<'a, F: Real> CountingRandomizer<'a, F> {
    pub fn new(cfg: &'a CountingConfig<F>, tag: u32) -> Self {
        CountingRandomizer {
            cfg,
            tag,
            noise_total: Cell::new(0),
        }
    }

    pub fn noise_total(&self) -> i64 {
        self.noise_total.get()
    }
}

impl<F: Real> LocalRandomizer<bool> for CountingRandomizer<'_, F> {
    fn randomize(&self, input: &bool, out: &mut Vec<Message>, rng: &mut dyn RngCore) {
        let share = self.cfg.encode_bit(*input, self.tag, out, rng);
        self.noise_total.set(self.noise_total.get() + share.contribution());
    }
}

/// Result of one simulated counting round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountingOutcome {
    /// What the analyzer reports.
    pub estimate: i64,
    /// Sum of the honest parties' bits.
    pub honest_sum: i64,
    /// Sum of the honest parties' noise contributions.
    pub noise: i64,
    /// `honest_sum + noise` fell outside `(-q/2, q/2]`.
    pub wrapped: bool,
    /// The analyzer saw no messages at all.
    pub empty: bool,
}

/// Runs the counting protocol on `bits` through the shuffler.
pub fn run_counting<F: Real>(
    bits: &[bool],
    cfg: &CountingConfig<F>,
    status: &PartyStatus,
    rng: &mut dyn RngCore,
) -> Result<CountingOutcome> {
    if bits.len() != cfg.parties {
        return Err(Error::LengthMismatch {
            what: "bits",
            expected: cfg.parties,
            actual: bits.len(),
        });
    }
    let randomizer = CountingRandomizer::new(cfg, 0);
    let handles: Vec<&dyn LocalRandomizer<bool>> = vec![&randomizer; bits.len()];
    let analyzer = |bag: &MessageBag| (analyze_count(bag, cfg), bag.is_empty());
    let ((estimate, empty), _) = run_round(&handles, bits, status, &analyzer, rng)?;
    let honest_sum = bits
        .iter()
        .enumerate()
        .filter(|&(i, &a)| a && status.is_honest(i))
        .count() as i64;
    let noise = randomizer.noise_total();
    let half = (cfg.modulus / 2) as i64;
    let truth = honest_sum + noise;
    Ok(CountingOutcome {
        estimate,
        honest_sum,
        noise,
        wrapped: truth > half || truth <= -half,
        empty,
    })
}

/// Statistical-closeness proxy for δ: total variation between the empirical
/// law of one party's first message and the uniform law on `Z_q`.
pub fn first_message_tv<F: Real>(
    a: bool,
    cfg: &CountingConfig<F>,
    trials: u64,
    rng: &mut dyn RngCore,
) -> F {
    let mut hist = Histogram::new();
    let mut out = Vec::with_capacity(cfg.splits);
    for _ in 0..trials {
        out.clear();
        cfg.encode_bit(a, 0, &mut out, rng);
        hist.record(out[0].value as i64);
    }
    let uniform = F::one() / F::from_count(cfg.modulus);
    hist.tv_distance(|v| {
        if (0..cfg.modulus as i64).contains(&v) {
            uniform
        } else {
            F::zero()
        }
    })
}
