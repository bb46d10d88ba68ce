//! Deterministic benchmark harness for output-feedback adaptive tracking on
//! a friction-dominated, unit-mass servo plant.
//!
//! Two observers — a smooth adaptive one and a super-twisting sliding-mode
//! one — estimate the unmeasured velocity and the two friction levels from
//! the position alone; each drives the same certainty-equivalence tracking
//! controller through a piecewise hold/ramp reference, with optional
//! sample-and-hold measurement noise. The crate simulates these closed loops
//! on a fixed grid, logs and plots them, summarizes them into metrics, and
//! sweeps the smooth observer's gain to map where higher gain stops paying.
//!
//! Everything is reproducible: seeded noise, fixed-step integration, and
//! byte-stable CSV/SVG outputs.

pub mod config;
pub mod controller;
pub mod error;
pub mod observers;
pub mod plant;
pub mod plots;
pub mod reference;
pub mod report;
pub mod runlog;
pub mod scenario;
pub mod sim;

pub use error::{ConfigError, OutputError, SimError};
