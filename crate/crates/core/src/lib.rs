//! Randomly weighted feature networks and logic tensor networks over fuzzy
//! first-order knowledge bases.

pub mod cli;
pub mod data;
pub mod encoder;
pub mod eval;
pub mod error;
pub mod logic;
pub mod numerics;
pub mod predicates;
pub mod training;

pub use error::{Error, Result};
