//! Conditional probability logic over lifted Bayesian networks.
//!
//! Formulas are parsed against a relational signature, evaluated on finite
//! structures, and reduced to quantifier-free form almost surely with respect
//! to the distribution a lifted network induces on large domains.

pub mod asymptotics;
pub mod atomic_types;
pub mod eliminator;
pub mod error;
pub mod evaluator;
pub mod fixtures;
pub mod network;
pub mod formula;
pub mod rational;
pub mod verify;
pub mod worlds;

pub use error::{Error, Result};
pub use formula::{parse, render, Comparison, Formula, Side, Signature, Var};
pub use rational::Rational;
