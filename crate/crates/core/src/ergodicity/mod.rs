//! Observables, equidistribution gaps and limiting coefficients.

mod averages;
mod coefficients;
mod observable;
mod report;

pub use averages::{
    fqe_gap, pqe_gap, spectral_spin_weights, subset_averages, target_average, tv_distance,
    uniform_average,
};
pub use coefficients::{
    c_psi, c_psi_j, subset_coefficients, symbol, Quadrature, SubsetCoefficients, DEFAULT_QUAD_GRID,
    MAX_QUAD_NODES,
};
pub use observable::{Observable, BOUNDED_TOL};
pub use report::{ergodicity_report, ErgodicityReport, ReportOptions};
