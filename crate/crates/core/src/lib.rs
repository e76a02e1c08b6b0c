//! Exact simulation of quantum-controlled foundational experiments.
//!
//! * [`quantum`]: dense state vectors, gates, measurement and partial trace.
//! * [`delayed_choice`]: Mach-Zehnder delayed-choice circuits with classical,
//!   quantum and entanglement-assisted control of the second beamsplitter.
//! * [`hv`]: binary hidden-variable models of the interferometer, their
//!   adequacy system and its solution families, plus generic property checks.
//! * [`chsh`]: CHSH experiment whose measurement settings are selected by
//!   quantum-controlled rotations.
//! * [`report`]: CSV/JSON serialization shared by the command-line tool.

pub mod chsh;
pub mod delayed_choice;
mod error;
mod joint;
pub mod hv;
pub mod quantum;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use joint::JointDistribution;
