//! Atomic (unsplittable-flow) routing games on graphs.
//!
//! The crate models a routing game as a graph plus a set of players, each
//! with an explicit list of candidate paths. On top of that sit exact
//! congestion-cost evaluation under pluggable cost models, best-response
//! dynamics with potential tracking, exhaustive Nash enumeration, and
//! price-of-anarchy / price-of-stability computation.
//!
//! All cost arithmetic is generic over [`scalar::CostScalar`]; the
//! crate-root aliases pin the defaults used by the CLI and the
//! verification battery.

pub mod analysis;
pub mod dynamics;
pub mod fileio;
pub mod game;
pub mod generators;
pub mod graph;
pub mod scalar;
pub mod verification;

/// Default cost scalar: arbitrary-precision, never overflows.
pub type ExactCost = num_bigint::BigUint;

/// Fixed-width cost scalar for hot enumeration loops; exact or it
/// reports overflow, never wrong.
pub type NativeCost = u128;

/// Exact ratio type used for price of anarchy / stability (always in
/// reduced form with positive denominator).
pub type Rational = num_rational::Ratio<num_bigint::BigInt>;

pub use game::{CongestionProfile, CostModel, GameInstance, Player, Routing};
pub use graph::{Graph, Path};
