//! Simulation of shuffle-model private parity learning.
//!
//! * [`domain`]: points of `{±1}^d`, parity concepts and the tilted hard
//!   distributions.
//! * [`noise`]: Discrete Laplace, Polya and Laplace samplers with exact pmfs.
//! * [`shuffle`]: the one-round shuffle model executor.
//! * [`counting`]: robust private counting from divisible noise shares.
//! * [`learner`]: the agnostic parity learner built from one counter per
//!   hypothesis.
//! * [`panprivate`]: the reductions from shuffle learning to pan-private
//!   learning, hard-distribution identification and distinguishing.
//!
//! Real-valued code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

pub mod counting;
pub mod domain;
pub mod error;
pub mod learner;
pub mod noise;
pub mod panprivate;
pub mod scalar;
pub mod shuffle;
pub mod stats;

pub use domain::{LabeledExample, ParityConcept, Point, Sign, Subset};
pub use error::{Error, Result};
pub use scalar::Real;
pub use shuffle::{Message, MessageBag, PartyStatus};

pub type HardDistribution = domain::HardDistribution<f64>;
pub type HardFamily = domain::HardFamily<f64>;
pub type DiscreteLaplace = noise::DiscreteLaplace<f64>;
pub type PolyaParams = noise::PolyaParams<f64>;
pub type CountingConfig = counting::CountingConfig<f64>;
pub type LearnerConfig = learner::LearnerConfig<f64>;
pub type ReductionConfig = panprivate::ReductionConfig<f64>;
pub type DistinguisherConfig = panprivate::DistinguisherConfig<f64>;
