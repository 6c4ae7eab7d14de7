//! Circuit-level simulation of full-duplex magnetic-induction (MI)
//! communication links.
//!
//! Tuned coil networks are modeled as magnetically coupled series-RLC
//! loops: geometry in [`model`], inductances/couplings in [`magnetics`],
//! the phasor solver and frequency sweeps in [`circuit`], the canonical
//! two-node orthogonal-coil link with its self-interference, distance,
//! and orientation experiments in [`scenarios`], and a declarative JSON
//! front end with deterministic CSV/JSON output in [`config`]/[`emit`].
//!
//! Sweeps evaluate their points in parallel (rayon) when the default
//! `parallel` feature is on; output is assembled in sweep order either
//! way, so results are byte-identical across feature choices, thread
//! counts, and runs.

pub mod circuit;
pub mod cli;
pub mod config;
pub mod emit;
pub mod error;
pub mod exec;
pub mod magnetics;
pub mod model;
pub mod scenarios;
pub mod selfcheck;

pub use error::{Error, Result};

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;

/// mu0 / 4 pi, the Neumann kernel prefactor.
pub const MU0_OVER_4PI: f64 = 1.0e-7;

/// Copper resistivity at room temperature, ohm meters. Together with
/// [`DEFAULT_WIRE_RADIUS`] this is the documented resistance calibration:
/// a 100-turn, 10 cm loop comes out at about 7.5 ohms.
pub const COPPER_RESISTIVITY: f64 = 1.68e-8;

/// Conductor radius used when a coil does not specify one, m.
pub const DEFAULT_WIRE_RADIUS: f64 = 2.12e-4;
