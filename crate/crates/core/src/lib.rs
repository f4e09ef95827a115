//! Offline 3D detection metrics, online driving metrics and the
//! online/offline correlation protocol, plus a synthetic scenario generator
//! and brute-force oracles for validation.

pub mod ap;
pub mod correlation;
pub mod driving;
pub mod error;
pub mod evaluate;
pub mod geometry;
pub mod log;
pub mod matching;
pub mod nds;
pub mod planner_metrics;
pub mod synth;
pub mod tracking;
pub mod types;

pub use error::{Error, Result};
pub use types::*;
