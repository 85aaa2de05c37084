//! Simulation and spectral diagnostics for homogeneous discrete-time quantum
//! walks on Z^d restricted to periodic boxes: Floquet analysis, No-Repeating-Graphs
//! statistics, phase-shift relations, exact infinite-time measures and
//! equidistribution gaps.

pub mod cli;
pub mod dynamics;
pub mod ergodicity;
pub mod error;
pub mod linalg;
pub mod spectra;
pub mod walk_core;
pub mod zoo;

pub use error::{Result, WalkError};
pub use linalg::CMat;
pub use num_complex::Complex64 as C64;
pub use walk_core::{build_walk, Amplitude, LatticeVector, WalkSpec};
