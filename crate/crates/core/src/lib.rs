//! Adversarial multiple-play bandits with unknown, arbitrary feedback delays.
//!
//! The learner ([`policy::Dexp3m`]) keeps a distribution on the probability
//! simplex, scales it by `k` and samples `k` arms with dependent rounding.
//! Feedback arrives after per-round delays without its origin round and is
//! folded in one item at a time with a clipped, trimmed exponential-weights
//! step mixed with uniform exploration.
//!
//! Strategies (learners, loss generators, delay models) are trait objects
//! built by name from registries; see [`policy::registry`],
//! [`environment::loss_registry`] and [`environment::delay_registry`].

pub mod analysis;
pub mod depround;
pub mod environment;
pub mod error;
pub mod feedback;
pub mod policy;
pub mod registry;
pub mod simplex;

pub use error::{Error, Result};
