//! Points of the signed cube, parity concepts, labeled examples and the
//! tilted "hard" distributions used by the distinguishing experiments.
//!
//! Coordinates are indexed from 0. A [`Point`] stores its negative and zero
//! coordinates as bitmasks, so parity evaluation is a popcount.

use std::fmt;
use std::ops::{Mul, Neg};

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 24;

/// Largest dimension for which exact evaluation enumerates `{±1}^d`.
pub const MAX_EXACT_DIM: usize = 20;

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

fn low_mask(dim: usize) -> u32 {
    if dim >= 32 {
        u32::MAX
    } else {
        (1u32 << dim) - 1
    }
}

/// A label or concept sign in `{+1, -1}`.
///
/// `Plus` orders before `Minus`; the learner's tie rule relies on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    /// `-1` raised to the parity of `odd`.
    pub fn from_parity(odd: bool) -> Sign {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn from_value(value: i64) -> Result<Sign> {
        match value {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::InvalidCoordinate(other)),
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Sign {
        Sign::from_parity(rng.random())
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity(self != rhs)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// A subset of the coordinate indices `0..MAX_DIM`, stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_mask(mask: u32) -> Subset {
        Subset(mask)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Subset> {
        let mut mask = 0u32;
        for i in indices {
            if i >= MAX_DIM {
                return Err(Error::param("subset", format!("index {i} >= {MAX_DIM}")));
            }
            mask |= 1 << i;
        }
        Ok(Subset(mask))
    }

    /// All indices `0..dim`.
    pub fn full(dim: usize) -> Subset {
        Subset(low_mask(dim))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, index: usize) -> bool {
        index < 32 && self.0 & (1 << index) != 0
    }

    pub fn with(self, index: usize) -> Subset {
        debug_assert!(index < MAX_DIM);
        Subset(self.0 | (1 << index))
    }

    pub fn min_index(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Whether every index is below `dim`.
    pub fn fits(self, dim: usize) -> bool {
        self.0 & !low_mask(dim) == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            Some(i as usize)
        })
    }

    /// Drops `index` and shifts every larger index down by one.
    pub fn project_out(self, index: usize) -> Subset {
        let below = self.0 & low_mask(index);
        let above = (self.0 >> (index + 1)) << index;
        Subset(below | above)
    }

    /// Shifts every index `>= index` up by one, leaving `index` itself absent.
    /// Inverse of [`Subset::project_out`] on subsets not containing `index`.
    pub fn expand_around(self, index: usize) -> Subset {
        let below = self.0 & low_mask(index);
        let above = (self.0 & !low_mask(index)) << 1;
        Subset(below | above)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (pos, i) in self.iter().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// A vector over `{-1, 0, +1}`. Data points are full-support; the all-zero
/// point is the padding point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    dim: u8,
    neg: u32,
    zero: u32,
}

impl Point {
    pub fn new(coords: &[i8]) -> Result<Point> {
        check_dim(coords.len())?;
        let (mut neg, mut zero) = (0u32, 0u32);
        for (i, &c) in coords.iter().enumerate() {
            match c {
                1 => {}
                -1 => neg |= 1 << i,
                0 => zero |= 1 << i,
                other => return Err(Error::InvalidCoordinate(other.into())),
            }
        }
        Ok(Point {
            dim: coords.len() as u8,
            neg,
            zero,
        })
    }

    /// Full-support point whose coordinate `i` is `-1` iff bit `i` of `mask` is set.
    pub fn from_neg_mask(dim: usize, mask: u32) -> Result<Point> {
        check_dim(dim)?;
        if mask & !low_mask(dim) != 0 {
            return Err(Error::param("mask", format!("bits set above dimension {dim}")));
        }
        Ok(Point {
            dim: dim as u8,
            neg: mask,
            zero: 0,
        })
    }

    /// The padding point `0^d`.
    pub fn pad(dim: usize) -> Result<Point> {
        check_dim(dim)?;
        Ok(Point {
            dim: dim as u8,
            neg: 0,
            zero: low_mask(dim),
        })
    }

    /// Uniform draw from `{±1}^d`. `dim` must already be validated.
    pub fn uniform<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Point {
        debug_assert!(check_dim(dim).is_ok());
        Point {
            dim: dim as u8,
            neg: rng.random::<u32>() & low_mask(dim),
            zero: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coord(&self, index: usize) -> i8 {
        assert!(index < self.dim(), "coordinate {index} out of range");
        if self.zero & (1 << index) != 0 {
            0
        } else if self.neg & (1 << index) != 0 {
            -1
        } else {
            1
        }
    }

    pub fn coords(&self) -> Vec<i8> {
        (0..self.dim()).map(|i| self.coord(i)).collect()
    }

    pub fn neg_mask(&self) -> u32 {
        self.neg
    }

    pub fn is_full_support(&self) -> bool {
        self.zero == 0
    }

    pub fn is_pad(&self) -> bool {
        self.zero == low_mask(self.dim())
    }

    /// Product of the non-zero coordinates indexed by `subset`.
    pub fn product_over(&self, subset: Subset) -> Sign {
        Sign::from_parity((self.neg & subset.mask()).count_ones() % 2 == 1)
    }

    /// The `(d-1)`-dimensional point with coordinate `index` removed; later
    /// coordinates shift down by one.
    pub fn erase(&self, index: usize) -> Result<Point> {
        if index >= self.dim() {
            return Err(Error::param("index", format!("{index} >= dimension {}", self.dim)));
        }
        let dim = self.dim() - 1;
        check_dim(dim)?;
        Ok(Point {
            dim: dim as u8,
            neg: Subset(self.neg).project_out(index).mask(),
            zero: Subset(self.zero).project_out(index).mask(),
        })
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for i in 0..self.dim() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", self.coord(i))?;
        }
        f.write_str(")")
    }
}

/// All points of `{±1}^d` in mask order.
pub fn cube_points(dim: usize) -> impl Iterator<Item = Point> {
    let dim = dim.min(MAX_DIM);
    (0..(1u32 << dim)).map(move |mask| Point {
        dim: dim as u8,
        neg: mask,
        zero: 0,
    })
}

/// The concept `x ↦ sign · ∏_{i ∈ support} x_i` on a fixed dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParityConcept {
    dim: u8,
    support: Subset,
    sign: Sign,
}

impl ParityConcept {
    pub fn new(dim: usize, support: Subset, sign: Sign) -> Result<ParityConcept> {
        check_dim(dim)?;
        if !support.fits(dim) {
            return Err(Error::param("support", format!("{support} exceeds dimension {dim}")));
        }
        Ok(ParityConcept {
            dim: dim as u8,
            support,
            sign,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn support(&self) -> Subset {
        self.support
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn negated(&self) -> ParityConcept {
        ParityConcept {
            sign: -self.sign,
            ..*self
        }
    }

    /// Zero coordinates are skipped, so the padding point evaluates to the
    /// concept's sign.
    pub fn eval(&self, x: &Point) -> Result<Sign> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(self.sign * x.product_over(self.support))
    }
}

impl fmt::Display for ParityConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.support, self.sign)
    }
}

pub fn eval_parity(concept: &ParityConcept, x: &Point) -> Result<Sign> {
    concept.eval(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LabeledExample {
    pub x: Point,
    pub y: Sign,
}

impl LabeledExample {
    pub fn new(x: Point, y: Sign) -> LabeledExample {
        LabeledExample { x, y }
    }

    /// Labels `x` with `concept`.
    pub fn labeled_by(concept: &ParityConcept, x: Point) -> Result<LabeledExample> {
        Ok(LabeledExample {
            x,
            y: concept.eval(&x)?,
        })
    }
}

/// A distribution on `{±1}^d`.
pub trait CubeDistribution<F: Real> {
    fn dim(&self) -> usize;

    /// Probability of a full-support point.
    fn pmf(&self, x: &Point) -> Result<F>;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformCube {
    dim: usize,
}

impl UniformCube {
    pub fn new(dim: usize) -> Result<UniformCube> {
        check_dim(dim)?;
        Ok(UniformCube { dim })
    }
}

fn check_full_point(dim: usize, x: &Point) -> Result<()> {
    if x.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.dim(),
        });
    }
    if !x.is_full_support() {
        return Err(Error::NotFullSupport);
    }
    Ok(())
}

impl<F: Real> CubeDistribution<F> for UniformCube {
    fn dim(&self) -> usize {
        self.dim
    }

    fn pmf(&self, x: &Point) -> Result<F> {
        check_full_point(self.dim, x)?;
        Ok(F::lit(0.5).powi(self.dim as i32))
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::uniform(self.dim, rng)
    }
}

/// The cube distribution tilted by `2·alpha` towards `∏_{i∈support} x_i = sign`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardDistribution<F: Real = f64> {
    dim: usize,
    support: Subset,
    sign: Sign,
    alpha: F,
}

impl<F: Real> HardDistribution<F> {
    pub fn new(dim: usize, support: Subset, sign: Sign, alpha: F) -> Result<Self> {
        check_dim(dim)?;
        if support.is_empty() {
            return Err(Error::param("support", "hard distributions need a non-empty set"));
        }
        if !support.fits(dim) {
            return Err(Error::param("support", format!("{support} exceeds dimension {dim}")));
        }
        if !(alpha >= F::zero() && alpha <= F::lit(0.5)) {
            return Err(Error::param("alpha", format!("{alpha} not in [0, 1/2]")));
        }
        Ok(HardDistribution {
            dim,
            support,
            sign,
            alpha,
        })
    }

    pub fn support(&self) -> Subset {
        self.support
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    /// The parity concept whose positive half-cube carries the extra mass.
    pub fn concept(&self) -> ParityConcept {
        ParityConcept {
            dim: self.dim as u8,
            support: self.support,
            sign: self.sign,
        }
    }
}

impl<F: Real> CubeDistribution<F> for HardDistribution<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn pmf(&self, x: &Point) -> Result<F> {
        check_full_point(self.dim, x)?;
        let base = F::lit(0.5).powi(self.dim as i32);
        let tilt = F::lit(2.0) * self.alpha;
        if x.product_over(self.support) == self.sign {
            Ok((F::one() + tilt) * base)
        } else {
            Ok((F::one() - tilt) * base)
        }
    }

    /// Uniform draw, then the product is forced to `sign` with probability
    /// `(1+2α)/2` by flipping the lowest index of the support when needed.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut x = Point::uniform(self.dim, rng);
        let toward = F::sample_unit(rng) < (F::one() + F::lit(2.0) * self.alpha) / F::lit(2.0);
        let target = if toward { self.sign } else { -self.sign };
        if x.product_over(self.support) != target {
            let flip = self.support.min_index().expect("non-empty support");
            x.neg ^= 1 << flip;
        }
        x
    }
}

pub fn hard_pmf<F: Real>(dist: &HardDistribution<F>, x: &Point) -> Result<F> {
    dist.pmf(x)
}

pub fn sample_hard<F: Real, R: Rng + ?Sized>(dist: &HardDistribution<F>, rng: &mut R) -> Point {
    dist.sample(rng)
}

/// How [`generalization_error`] evaluates the disagreement probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMode {
    /// Sum the pmf over the whole cube (`d <= MAX_EXACT_DIM`).
    Exact,
    MonteCarlo { trials: u64 },
}

/// `Pr_{x~dist}[h(x) != c(x)]`.
pub fn generalization_error<F, D, R>(
    target: &ParityConcept,
    hypothesis: &ParityConcept,
    dist: &D,
    mode: ErrorMode,
    rng: &mut R,
) -> Result<F>
where
    F: Real,
    D: CubeDistribution<F>,
    R: Rng + ?Sized,
{
    let dim = dist.dim();
    for c in [target, hypothesis] {
        if c.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: c.dim(),
            });
        }
    }
    // The two concepts disagree exactly where the symmetric difference of the
    // supports has product equal to -(sign product).
    let diff = Subset(target.support.mask() ^ hypothesis.support.mask());
    let flip = target.sign * hypothesis.sign;
    let disagrees = |x: &Point| x.product_over(diff) != flip;
    match mode {
        ErrorMode::Exact => {
            if dim > MAX_EXACT_DIM {
                return Err(Error::ExactTooLarge { dim });
            }
            let mut total = F::zero();
            for x in cube_points(dim) {
                if disagrees(&x) {
                    total += dist.pmf(&x)?;
                }
            }
            Ok(total)
        }
        ErrorMode::MonteCarlo { trials } => {
            if trials == 0 {
                return Err(Error::param("trials", "must be positive"));
            }
            let hits = (0..trials).filter(|_| disagrees(&dist.sample(rng))).count();
            Ok(F::from_count(hits as u64) / F::from_count(trials))
        }
    }
}

/// Binomial coefficient; exact for the dimensions supported here.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// `Σ_{j=lo}^{hi} C(n, j)`.
pub fn binomial_range_sum(n: usize, lo: usize, hi: usize) -> u64 {
    (lo..=hi.min(n)).map(|j| binomial(n, j)).sum()
}

/// Colex rank of a subset among the subsets of the same size
/// (combinatorial number system).
pub fn subset_rank(subset: Subset) -> u64 {
    subset
        .iter()
        .enumerate()
        .map(|(pos, elem)| binomial(elem, pos + 1))
        .sum()
}

/// Inverse of [`subset_rank`] for subsets of `size` elements.
pub fn subset_unrank(mut rank: u64, size: usize) -> Subset {
    let mut mask = 0u32;
    let mut upper = MAX_DIM;
    for pos in (1..=size).rev() {
        let mut elem = pos - 1;
        while elem + 1 < upper && binomial(elem + 1, pos) <= rank {
            elem += 1;
        }
        rank -= binomial(elem, pos);
        mask |= 1 << elem;
        upper = elem;
    }
    Subset(mask)
}

/// The family `{P_{d,ℓ,b,α} : ℓ non-empty, |ℓ| ≤ k, b = ±1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardFamily<F: Real = f64> {
    dim: usize,
    max_weight: usize,
    alpha: F,
}

impl<F: Real> HardFamily<F> {
    pub fn new(dim: usize, max_weight: usize, alpha: F) -> Result<Self> {
        check_dim(dim)?;
        if !(1..=dim).contains(&max_weight) {
            return Err(Error::param("k", format!("{max_weight} not in 1..={dim}")));
        }
        if !(alpha >= F::zero() && alpha <= F::lit(0.5)) {
            return Err(Error::param("alpha", format!("{alpha} not in [0, 1/2]")));
        }
        Ok(HardFamily {
            dim,
            max_weight,
            alpha,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn cardinality(&self) -> u64 {
        2 * binomial_range_sum(self.dim, 1, self.max_weight)
    }

    /// Member with the given rank: even ranks carry sign `+1`; supports are
    /// ordered by size, then colex.
    pub fn member(&self, rank: u64) -> Result<HardDistribution<F>> {
        if rank >= self.cardinality() {
            return Err(Error::param("rank", format!("{rank} >= {}", self.cardinality())));
        }
        let sign = if rank % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let mut index = rank / 2;
        for size in 1..=self.max_weight {
            let count = binomial(self.dim, size);
            if index < count {
                let support = subset_unrank(index, size);
                return HardDistribution::new(self.dim, support, sign, self.alpha);
            }
            index -= count;
        }
        unreachable!("rank checked against cardinality")
    }

    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> HardDistribution<F> {
        let rank = rng.random_range(0..self.cardinality());
        self.member(rank).expect("rank in range")
    }
}

pub fn sample_family_member<F: Real, R: Rng + ?Sized>(
    family: &HardFamily<F>,
    rng: &mut R,
) -> HardDistribution<F> {
    family.sample_member(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn subset(ix: &[usize]) -> Subset {
        Subset::from_indices(ix.iter().copied()).unwrap()
    }

    #[test]
    fn parity_examples() {
        // r = {1,3} (1-based) -> {0,2}
        let c = ParityConcept::new(4, subset(&[0, 2]), Sign::Plus).unwrap();
        let x = Point::new(&[1, -1, -1, 1]).unwrap();
        assert_eq!(eval_parity(&c, &x).unwrap(), Sign::Minus);

        let constant = ParityConcept::new(4, Subset::EMPTY, Sign::Plus).unwrap();
        assert_eq!(constant.eval(&x).unwrap(), Sign::Plus);

        let c = ParityConcept::new(4, subset(&[0, 1]), Sign::Minus).unwrap();
        assert_eq!(c.eval(&Point::pad(4).unwrap()).unwrap(), Sign::Minus);
    }

    #[test]
    fn parity_dimension_mismatch() {
        let c = ParityConcept::new(3, subset(&[0]), Sign::Plus).unwrap();
        let x = Point::new(&[1, 1]).unwrap();
        assert_eq!(
            c.eval(&x),
            Err(Error::DimensionMismatch {
                expected: 3,
                actual: 2
            })
        );
    }

    #[test]
    fn point_validation() {
        assert!(Point::new(&[]).is_err());
        assert!(Point::new(&[2, 1]).is_err());
        assert!(Point::pad(25).is_err());
        let p = Point::new(&[1, 0, -1]).unwrap();
        assert_eq!(p.coords(), vec![1, 0, -1]);
        assert!(!p.is_full_support());
        assert!(!p.is_pad());
        assert!(Point::pad(3).unwrap().is_pad());
    }

    #[test]
    fn erase_shifts_down() {
        let p = Point::new(&[1, -1, 1, -1, -1]).unwrap();
        assert_eq!(p.erase(1).unwrap().coords(), vec![1, 1, -1, -1]);
        assert_eq!(p.erase(4).unwrap().coords(), vec![1, -1, 1, -1]);
        assert!(Point::new(&[1]).unwrap().erase(0).is_err());
    }

    #[test]
    fn subset_projection_roundtrip() {
        for mask in 0u32..(1 << 7) {
            let r = Subset::from_mask(mask);
            for i in 0..8 {
                let lifted = r.expand_around(i).with(i);
                assert!(lifted.contains(i));
                assert_eq!(lifted.project_out(i), r);
                assert_eq!(lifted.len(), r.len() + 1);
            }
        }
    }

    #[test]
    fn hard_pmf_examples() {
        let p = HardDistribution::new(2, subset(&[0]), Sign::Plus, 0.5).unwrap();
        let x = Point::new(&[1, -1]).unwrap();
        assert_eq!(hard_pmf(&p, &x).unwrap(), 0.5);
        let x = Point::new(&[-1, 1]).unwrap();
        assert_eq!(hard_pmf(&p, &x).unwrap(), 0.0);

        let u = HardDistribution::new(5, subset(&[1, 3]), Sign::Minus, 0.0).unwrap();
        for x in cube_points(5) {
            assert_eq!(u.pmf(&x).unwrap(), 1.0 / 32.0);
        }
        assert_eq!(u.pmf(&Point::pad(5).unwrap()), Err(Error::NotFullSupport));
        assert!(u.pmf(&Point::new(&[1, 1]).unwrap()).is_err());
    }

    #[test]
    fn hard_distribution_rejects_bad_parameters() {
        assert!(HardDistribution::new(3, Subset::EMPTY, Sign::Plus, 0.1).is_err());
        assert!(HardDistribution::new(3, subset(&[3]), Sign::Plus, 0.1).is_err());
        assert!(HardDistribution::new(3, subset(&[0]), Sign::Plus, 0.6).is_err());
        assert!(HardDistribution::new(3, subset(&[0]), Sign::Plus, f64::NAN).is_err());
    }

    #[test]
    fn hard_pmf_sums_to_one() {
        for dim in 1..=12 {
            let mut rng = ChaCha8Rng::seed_from_u64(dim as u64);
            for _ in 0..4 {
                let mask = loop {
                    let m = rng.random::<u32>() & low_mask(dim);
                    if m != 0 {
                        break m;
                    }
                };
                let alpha: f64 = rng.random::<f64>() * 0.5;
                let p = HardDistribution::new(dim, Subset(mask), Sign::random(&mut rng), alpha)
                    .unwrap();
                let total: f64 = cube_points(dim).map(|x| p.pmf(&x).unwrap()).sum();
                assert!((total - 1.0).abs() < 1e-12, "dim {dim}: {total}");
            }
        }
    }

    #[test]
    fn f32_pmf_matches_f64() {
        let p64 = HardDistribution::new(6, subset(&[0, 4]), Sign::Minus, 0.3).unwrap();
        let p32 = HardDistribution::new(6, subset(&[0, 4]), Sign::Minus, 0.3f32).unwrap();
        for x in cube_points(6) {
            let a = p64.pmf(&x).unwrap();
            let b = p32.pmf(&x).unwrap() as f64;
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn alpha_half_samples_lie_on_the_half_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = HardDistribution::new(8, subset(&[1, 2, 6]), Sign::Minus, 0.5).unwrap();
        for _ in 0..10_000 {
            let x = p.sample(&mut rng);
            assert!(x.is_full_support());
            assert_eq!(x.product_over(p.support()), Sign::Minus);
        }
    }

    #[test]
    fn uniform_case_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = HardDistribution::new(4, subset(&[0, 3]), Sign::Plus, 0.0).unwrap();
        let trials = 100_000u32;
        let mut counts = [0u32; 16];
        for _ in 0..trials {
            counts[sample_hard(&p, &mut rng).neg_mask() as usize] += 1;
        }
        let expected = trials as f64 / 16.0;
        let sigma = (trials as f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 3.0 * sigma + 1.0, "{counts:?}");
        }
    }

    #[test]
    fn tilted_mean_is_two_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = HardDistribution::new(6, subset(&[0, 2, 5]), Sign::Minus, 0.25).unwrap();
        let trials = 100_000;
        let sum: i64 = (0..trials)
            .map(|_| (p.sign() * p.sample(&mut rng).product_over(p.support())).value() as i64)
            .sum();
        let mean = sum as f64 / trials as f64;
        // E[b·∏x] = 2α = 0.5, Var = 1 - 0.25
        let sigma = (0.75f64 / trials as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn generalization_error_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = UniformCube::new(5).unwrap();
        let c = ParityConcept::new(5, subset(&[0]), Sign::Plus).unwrap();
        let h = ParityConcept::new(5, subset(&[1]), Sign::Plus).unwrap();
        let err = |a: &ParityConcept, b: &ParityConcept, rng: &mut ChaCha8Rng| {
            generalization_error::<f64, _, _>(a, b, &u, ErrorMode::Exact, rng).unwrap()
        };
        assert_eq!(err(&c, &c, &mut rng), 0.0);
        assert_eq!(err(&c, &c.negated(), &mut rng), 1.0);
        assert_eq!(err(&c, &h, &mut rng), 0.5);

        let big = UniformCube::new(21).unwrap();
        let c21 = ParityConcept::new(21, subset(&[0]), Sign::Plus).unwrap();
        assert_eq!(
            generalization_error::<f64, _, _>(&c21, &c21, &big, ErrorMode::Exact, &mut rng),
            Err(Error::ExactTooLarge { dim: 21 })
        );
        let mc: f64 = generalization_error(
            &c21,
            &c21.negated(),
            &big,
            ErrorMode::MonteCarlo { trials: 100 },
            &mut rng,
        )
        .unwrap();
        assert_eq!(mc, 1.0);
    }

    #[test]
    fn generalization_error_on_hard_distribution() {
        // Under P_{ℓ,b,1/2} the concept (ℓ,b) itself is always right.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = HardDistribution::new(6, subset(&[1, 4]), Sign::Plus, 0.5).unwrap();
        let c = ParityConcept::new(6, subset(&[0]), Sign::Plus).unwrap();
        let err: f64 =
            generalization_error(&c, &p.concept(), &p, ErrorMode::Exact, &mut rng).unwrap();
        assert_eq!(err, 0.5);
        let est: f64 = generalization_error(
            &c,
            &p.concept(),
            &p,
            ErrorMode::MonteCarlo { trials: 40_000 },
            &mut rng,
        )
        .unwrap();
        assert!((est - 0.5).abs() < 0.01);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(24, 12), 2_704_156);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial_range_sum(8, 0, 8), 256);
    }

    #[test]
    fn rank_unrank_roundtrip() {
        for size in 0..=6 {
            let mut seen = Vec::new();
            for rank in 0..binomial(9, size) {
                let s = subset_unrank(rank, size);
                assert_eq!(s.len(), size);
                assert!(s.fits(9));
                assert_eq!(subset_rank(s), rank);
                seen.push(s);
            }
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len() as u64, binomial(9, size));
        }
    }

    #[test]
    fn family_cardinality_and_members() {
        let f = HardFamily::new(2, 2, 0.5).unwrap();
        assert_eq!(f.cardinality(), 6);
        let f = HardFamily::new(10, 3, 0.5).unwrap();
        assert_eq!(f.cardinality(), 2 * (10 + 45 + 120));
        let mut members: Vec<_> = (0..f.cardinality())
            .map(|r| {
                let m = f.member(r).unwrap();
                (m.support(), m.sign())
            })
            .collect();
        members.sort();
        members.dedup();
        assert_eq!(members.len() as u64, f.cardinality());
        assert!(f.member(f.cardinality()).is_err());
        assert!(HardFamily::new(4, 0, 0.5).is_err());
        assert!(HardFamily::new(4, 5, 0.5).is_err());
    }

    #[test]
    fn family_sampling_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = HardFamily::new(2, 2, 0.5).unwrap();
        let trials = 100_000u32;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..trials {
            let m = sample_family_member(&f, &mut rng);
            *counts.entry((m.support(), m.sign())).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = trials as f64 / 6.0;
        let sigma = (trials as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - expected).abs() < 3.0 * sigma);
        }

        let singletons = HardFamily::new(7, 1, 0.5).unwrap();
        for _ in 0..1000 {
            assert_eq!(singletons.sample_member(&mut rng).support().len(), 1);
        }

        // d=3, k=2: Pr[|L|=2] = 3/6
        let f = HardFamily::new(3, 2, 0.5).unwrap();
        let pairs = (0..trials)
            .filter(|_| f.sample_member(&mut rng).support().len() == 2)
            .count() as f64;
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((pairs - trials as f64 / 2.0).abs() < 3.0 * sigma);
    }
}
