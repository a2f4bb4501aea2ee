//! Fractional Gittins indices and ratio-optimal policies for semi-Markov
//! bandits.
//!
//! Processes are semi-Markov reward chains with per-state termination. The
//! objective throughout is the ratio of expected total payload to expected
//! total time until termination. The crate provides:
//!
//! * [`model`]: chains, discounting, validation and arms;
//! * [`ratiomdp`]: ratio-optimal policies by policy iteration or linear
//!   programming;
//! * [`gittins`]: fractional indices by restart-in-state or elimination;
//! * [`bandit`]: the product MDP of several arms, switching delays, and the
//!   comparison of the optimal and index policies;
//! * [`modelgen`]: seeded random handover-like models;
//! * [`sim`]: Monte Carlo rollouts.

pub mod bandit;
pub mod error;
pub mod fixtures;
pub mod gittins;
pub mod model;
pub mod modelgen;
pub mod numerics;
pub mod ratiomdp;
pub mod rng;
pub mod sim;
#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use bandit::{BanditModel, DeviationRecord, InitialState, ProductMdp, StateCodec};
pub use error::{Error, Result};
pub use gittins::{IndexMethod, IndexTable};
pub use model::{Arm, DiscountedChain, InitialDistribution, SemiMarkovChain, ValidationReport, Violation};
pub use modelgen::EnsembleSpec;
pub use numerics::Matrix;
pub use ratiomdp::{PolicyValue, RatioMdp, RatioSolution, SolveMethod};
pub use sim::{McEstimate, RolloutResult};
