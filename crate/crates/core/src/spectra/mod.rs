//! Eigen-decomposition, branch tracking, flat bands, NRG, phase relations.

pub mod branches;
pub mod eigen;
pub mod nrg;
pub mod relations;
pub mod zeta;

pub use branches::{branch_table, BranchTable, Line};
pub use eigen::{eigensystem, FloquetEigen};
pub use nrg::{
    detect_flat_bands, nrg_budget, nrg_ratio_at, nrg_statistic, NrgReport, NrgRow, NODE_GROUP_TOL,
};
pub use relations::{
    compute_m, detect_phase_relations, subsequence, PhaseRelation, RelationReport,
};
pub use zeta::zeta_shift_invariances;
