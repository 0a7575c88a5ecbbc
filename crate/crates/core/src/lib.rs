//! Configuration-model random graphs built by edge exploration, additive
//! graph statistics, and Monte Carlo checks of their central limit
//! behaviour.
//!
//! The numeric core is generic over [`Scalar`]: integer-valued statistics
//! and the exact enumeration oracle run in [`Rational`], the Monte Carlo
//! machinery in [`Value`] (`f64`).

pub mod conditions;
pub mod degree;
pub mod enumerate;
pub mod error;
pub mod exploration;
pub mod graph;
pub mod harness;
pub mod martingale;
pub mod rng;
pub mod scalar;
pub mod statistics;
pub mod summary;
pub mod switchings;

pub use degree::{validate, DegreeLaw, DegreeSequence, LawKind, ValidationReport};
pub use error::{Error, Result};
pub use exploration::{build_graph, explore, resume, ExplorationTrace, Explorer, HalfEdge, Pairing};
pub use graph::{Component, ComponentDecomposition, MultiGraph};
pub use scalar::{Real, Scalar};
pub use statistics::{StatisticKind, StatisticSpec, TreePattern};

/// Exact scalar for integer-valued statistics and the enumeration oracle.
pub type Rational = num_rational::Ratio<i64>;
/// Exact scalar with headroom for fourth moments on larger enumerations.
pub type WideRational = num_rational::Ratio<i128>;
/// Scalar used by the Monte Carlo estimators.
pub type Value = f64;

pub type Moments = summary::Moments<Value>;
pub type ExactMoments = enumerate::ExactMoments<Rational>;
