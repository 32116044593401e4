//! Look-Compute-Move robot simulation and trace analysis.

pub mod algorithms;
pub mod checker;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod scenarios;
pub mod scheduling;
pub mod ssync_builder;
pub mod synchronizer;

pub use error::{Error, Result};
