//! Discrete Laplace, Polya and continuous Laplace noise, with exact pmf
//! oracles for the Discrete Laplace sums that the counting protocol targets.
//!
//! The Discrete Laplace law with parameter `ε` has pmf proportional to
//! `e^{-ε|i|}` and is infinitely divisible: if every one of `n` parties draws
//! two independent `Polya(c/n, e^{-ε})` values and contributes their
//! difference, the total is distributed as the sum of `c` independent
//! Discrete Laplace variables.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_eps<F: Real>(eps: F) -> Result<()> {
    if eps > F::zero() && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::param("epsilon", format!("{eps} must be positive and finite")))
    }
}

/// Exact Discrete Laplace pmf, `(1-e^{-ε})/(1+e^{-ε}) · e^{-ε|i|}`.
pub fn dlap_pmf<F: Real>(eps: F, i: i64) -> Result<F> {
    check_eps(eps)?;
    let p = (-eps).exp();
    let magnitude = F::from_i64(i.saturating_abs()).expect("i64 as real");
    Ok((F::one() - p) / (F::one() + p) * (-eps * magnitude).exp())
}

/// Variance of one Discrete Laplace draw, `2e^{-ε}/(1-e^{-ε})²`.
pub fn dlap_variance<F: Real>(eps: F) -> Result<F> {
    check_eps(eps)?;
    let p = (-eps).exp();
    Ok(F::lit(2.0) * p / ((F::one() - p) * (F::one() - p)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteLaplace<F: Real = f64> {
    eps: F,
}

impl<F: Real> DiscreteLaplace<F> {
    pub fn new(eps: F) -> Result<Self> {
        check_eps(eps)?;
        Ok(DiscreteLaplace { eps })
    }

    pub fn epsilon(&self) -> F {
        self.eps
    }

    pub fn pmf(&self, i: i64) -> F {
        dlap_pmf(self.eps, i).expect("validated epsilon")
    }

    pub fn variance(&self) -> F {
        dlap_variance(self.eps).expect("validated epsilon")
    }

    /// Difference of two geometric draws on `{0, 1, ...}` with ratio `e^{-ε}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let geometric = |rng: &mut R| -> i64 {
            let u = F::one() - F::sample_unit(rng);
            (u.ln() / -self.eps).floor().to_i64().unwrap_or(i64::MAX)
        };
        geometric(rng) - geometric(rng)
    }
}

/// Negative binomial with real shape `r` and success parameter `p`:
/// `Pr[k] = Γ(k+r)/(k!·Γ(r)) · p^k · (1-p)^r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyaParams<F: Real = f64> {
    shape: F,
    p: F,
}

impl<F: Real> PolyaParams<F> {
    pub fn new(shape: F, p: F) -> Result<Self> {
        if !(shape > F::zero() && shape.is_finite()) {
            return Err(Error::param("shape", format!("{shape} must be positive")));
        }
        if !(p > F::zero() && p < F::one()) {
            return Err(Error::param("p", format!("{p} not in (0, 1)")));
        }
        Ok(PolyaParams { shape, p })
    }

    pub fn shape(&self) -> F {
        self.shape
    }

    pub fn p(&self) -> F {
        self.p
    }

    pub fn mean(&self) -> F {
        self.shape * self.p / (F::one() - self.p)
    }

    pub fn variance(&self) -> F {
        let q = F::one() - self.p;
        self.shape * self.p / (q * q)
    }

    /// Exact pmf by the ratio recurrence `Pr[k+1]/Pr[k] = p·(k+r)/(k+1)`.
    pub fn pmf(&self, k: u64) -> F {
        let mut prob = (F::one() - self.p).powf(self.shape);
        for j in 0..k {
            let j = F::from_count(j);
            prob = prob * self.p * (j + self.shape) / (j + F::one());
        }
        prob
    }
}

/// One Polya draw through the Gamma–Poisson mixture:
/// `G ~ Gamma(r, p/(1-p))`, return `Poisson(G)`.
pub fn sample_polya<F: Real, R: Rng + ?Sized>(params: &PolyaParams<F>, rng: &mut R) -> u64 {
    let scale = params.p / (F::one() - params.p);
    let rate = F::sample_gamma(params.shape, scale, rng);
    F::sample_poisson(rate, rng)
}

/// Inverse-CDF Polya sampler for the protocol's hot path.
///
/// Same law as [`sample_polya`] but one uniform per draw when the shape is
/// small. The walk stops at `limit`; the mass beyond it is below `1e-15` and
/// falls back to the Gamma–Poisson route.
#[derive(Clone, Copy, Debug)]
pub struct PolyaSampler<F: Real = f64> {
    params: PolyaParams<F>,
    zero_mass: F,
    limit: u64,
}

impl<F: Real> PolyaSampler<F> {
    pub fn new(params: PolyaParams<F>) -> Self {
        let zero_mass = (F::one() - params.p).powf(params.shape);
        let spread = params.mean() + F::lit(40.0) * params.variance().sqrt();
        let limit = spread.to_u64().unwrap_or(u64::MAX / 2).saturating_add(200);
        PolyaSampler {
            params,
            zero_mass,
            limit,
        }
    }

    pub fn params(&self) -> &PolyaParams<F> {
        &self.params
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut u = F::sample_unit(rng);
        let mut prob = self.zero_mass;
        let mut k = 0u64;
        while u >= prob {
            u -= prob;
            let kf = F::from_count(k);
            prob = prob * self.params.p * (kf + self.params.shape) / (kf + F::one());
            k += 1;
            if k > self.limit || prob <= F::zero() {
                return sample_polya(&self.params, rng);
            }
        }
        k
    }
}

/// One party's contribution to a distributed Discrete Laplace sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct NoiseShare {
    pub plus: u64,
    pub minus: u64,
}

impl NoiseShare {
    pub fn draw<F: Real, R: Rng + ?Sized>(sampler: &PolyaSampler<F>, rng: &mut R) -> NoiseShare {
        NoiseShare {
            plus: sampler.sample(rng),
            minus: sampler.sample(rng),
        }
    }

    pub fn contribution(&self) -> i64 {
        self.plus as i64 - self.minus as i64
    }
}

/// Polya parameters `(c/n, e^{-ε})` for one of `parties` shares whose total
/// is `copies` Discrete Laplace draws.
pub fn share_params<F: Real>(parties: usize, eps: F, copies: u32) -> Result<PolyaParams<F>> {
    if parties == 0 {
        return Err(Error::param("n", "need at least one party"));
    }
    if copies == 0 {
        return Err(Error::param("c", "divisibility multiplier must be >= 1"));
    }
    check_eps(eps)?;
    PolyaParams::new(
        F::from_count(copies as u64) / F::from_count(parties as u64),
        (-eps).exp(),
    )
}

/// Draws the `parties` shares whose contributions sum to `copies` independent
/// Discrete Laplace(ε) draws in distribution.
pub fn make_shares<F: Real, R: Rng + ?Sized>(
    parties: usize,
    eps: F,
    copies: u32,
    rng: &mut R,
) -> Result<Vec<NoiseShare>> {
    let sampler = PolyaSampler::new(share_params(parties, eps, copies)?);
    Ok((0..parties)
        .map(|_| NoiseShare::draw(&sampler, rng))
        .collect())
}

/// Continuous Laplace draw with mean zero and the given scale.
pub fn sample_lap<F: Real, R: Rng + ?Sized>(scale: F, rng: &mut R) -> F {
    debug_assert!(scale > F::zero());
    let half = F::lit(0.5);
    let u = F::sample_unit(rng) - half;
    let tail = F::one() - F::lit(2.0) * u.abs();
    // `tail` is in (0, 1]; u = -1/2 is the only way to hit 0.
    let tail = tail.max(F::min_positive_value());
    -scale * u.signum() * tail.ln()
}

/// Default per-factor truncation radius `⌈60·max(1, 1/ε)⌉`.
///
/// The dropped tail of one factor is `2e^{-ε(R+1)}/(1+e^{-ε}) < 10^{-25}`.
pub fn default_radius<F: Real>(eps: F) -> i64 {
    let scale = F::one().max(F::one() / eps);
    (F::lit(60.0) * scale).ceil().to_i64().unwrap_or(i64::MAX)
}

/// Exact pmf of the sum of `copies` independent Discrete Laplace(ε) draws,
/// each factor truncated at `|i| <= radius`.
#[derive(Clone, Debug)]
pub struct DlapSumPmf<F: Real = f64> {
    eps: F,
    copies: u32,
    lowest: i64,
    probs: Vec<F>,
}

/// Convolves `copies` truncated Discrete Laplace pmfs.
pub fn dlap_sum_pmf<F: Real>(eps: F, copies: u32, radius: i64) -> Result<DlapSumPmf<F>> {
    check_eps(eps)?;
    if copies == 0 {
        return Err(Error::param("c", "need at least one copy"));
    }
    if radius < 0 {
        return Err(Error::param("radius", "must be non-negative"));
    }
    let factor: Vec<F> = (-radius..=radius)
        .map(|i| dlap_pmf(eps, i))
        .collect::<Result<_>>()?;
    let mut probs = factor.clone();
    for _ in 1..copies {
        let mut next = vec![F::zero(); probs.len() + factor.len() - 1];
        for (a, &pa) in probs.iter().enumerate() {
            for (b, &pb) in factor.iter().enumerate() {
                next[a + b] += pa * pb;
            }
        }
        probs = next;
    }
    Ok(DlapSumPmf {
        eps,
        copies,
        lowest: -radius * copies as i64,
        probs,
    })
}

impl<F: Real> DlapSumPmf<F> {
    pub fn epsilon(&self) -> F {
        self.eps
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    /// Smallest and largest value carrying mass.
    pub fn support(&self) -> (i64, i64) {
        (self.lowest, self.lowest + self.probs.len() as i64 - 1)
    }

    pub fn prob(&self, i: i64) -> F {
        let offset = i - self.lowest;
        if offset < 0 {
            return F::zero();
        }
        self.probs.get(offset as usize).copied().unwrap_or_else(F::zero)
    }

    pub fn total(&self) -> F {
        self.probs.iter().fold(F::zero(), |acc, &p| acc + p)
    }

    pub fn variance(&self) -> F {
        let mut acc = F::zero();
        for (offset, &p) in self.probs.iter().enumerate() {
            let i = F::from_i64(self.lowest + offset as i64).expect("i64 as real");
            acc += p * i * i;
        }
        acc
    }

    /// Largest of `Pr[i]/Pr[i+1]` and `Pr[i+1]/Pr[i]` over `i ∈ [lo, hi]`.
    pub fn max_shift_ratio(&self, lo: i64, hi: i64) -> F {
        let mut worst = F::zero();
        for i in lo..=hi {
            let (a, b) = (self.prob(i), self.prob(i + 1));
            worst = worst.max(a / b).max(b / a);
        }
        worst
    }
}
