//! Simulation and feedforward control of flexible robot joints.
//!
//! A robot joint is modeled as a two-mass oscillator: motor inertia and link
//! inertia coupled through an elastic gearbox with lost motion (backlash) and
//! Coulomb + viscous friction. The crate provides the component laws
//! (friction, stiffness, their smooth approximations and inverses), a
//! fixed-step plant simulator, C⁴ reference trajectory generation, a
//! flatness-based feedforward controller with conventional and model-based
//! feedback, and a scenario harness with CSV output driven by the
//! `flexjoint` CLI.

pub mod config;
pub mod control;
pub mod error;
pub mod friction;
pub mod harness;
pub mod numeric;
pub mod params;
pub mod plant;
pub mod stiffness;
pub mod trajectory;
pub mod validate;

pub use error::{Error, Result};
