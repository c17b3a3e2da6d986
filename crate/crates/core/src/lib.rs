//! Numerical laboratory for bipartite state discrimination under local
//! operations and classical communication (LOCC), with entangled catalysts
//! and reusable quantum memory.
//!
//! Modules, bottom-up:
//! - [`qmat`]: dense complex operators on labeled tensor factors.
//! - [`states`]: the state families (Werner-projector hiding pair, near-product
//!   entangled state, maximally entangled states, separable samplers).
//! - [`distinguish`]: Helstrom optimum, measurement channels, one-way LOCC
//!   lower bounds, PPT upper bounds.
//! - [`protocols`]: teleportation and Schmidt-type entanglement concentration.
//! - [`game`]: multi-round discrimination engine, detection protocols and
//!   concentration-bound validators.
//! - [`cli`]: command-line driver.

pub mod cli;
pub mod distinguish;
pub mod error;
pub mod game;
pub mod protocols;
pub mod qmat;
pub mod rng;
pub mod states;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
