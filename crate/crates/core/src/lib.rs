//! Exact computations around canonical filtrations of μ-ordinary
//! p-divisible groups with an action of an unramified ring of integers.
//!
//! Everything is exact rational arithmetic; see [`rational::Q`].

pub mod error;
pub mod rational;
pub mod signature;

pub mod group_models;
pub mod hn;
pub mod lt_crystals;
pub mod periods;
pub mod polygon;
pub mod tower;

pub mod cli;
pub mod report;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Q;
pub use signature::{EmbeddingIndex, EmbeddingSet, Signature};
