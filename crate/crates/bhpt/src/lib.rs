//! Black-hole perturbation toolkit.
//!
//! Assembles the stationary wave-type operators of Schwarzschild/slowly
//! rotating Kerr linear perturbation theory as radial ODE systems per
//! tensor-spherical-harmonic sector, reduces metric perturbations to
//! Regge–Wheeler/Zerilli master equations, certifies mode stability by
//! frequency-domain Wronskian scans, verifies closed-form (generalized)
//! zero modes and their pairing constants, tracks the constraint-damping
//! root, and demonstrates late-time decay in 1+1 time evolution.
//!
//! The crate is `no_std` + `alloc`; everything needing an OS (CLI, files,
//! parallelism) lives in the companion `bhpt-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod background;
pub mod error;
pub mod expr;
pub mod grid;
pub mod harmonics;
pub mod jet;
pub mod linalg;
pub mod master;
pub mod quad;
pub mod radial_ops;

pub use background::BlackHoleParams;
pub use error::{Error, Result};
