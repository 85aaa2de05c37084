//! Structured summary of every diagnostic for one walk, state and box size.

use super::averages::{fqe_gap, pqe_gap, tv_distance};
use super::coefficients::{subset_coefficients, DEFAULT_QUAD_GRID};
use super::observable::Observable;
use crate::dynamics::{limit_measure, CompactState, PositionMeasure, DEFAULT_GROUP_TOL};
use crate::error::Result;
use crate::spectra::{nrg_budget, nrg_statistic, NODE_GROUP_TOL};
use crate::walk_core::WalkSpec;
use crate::zoo::{classify_with, ClassifyOptions};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub classify: ClassifyOptions,
    pub eig_tol: f64,
    pub quad_grid: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            classify: ClassifyOptions::default(),
            eig_tol: 1e-8,
            quad_grid: DEFAULT_QUAD_GRID,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Tolerances {
    pub eig_tol: f64,
    pub group_tol: f64,
    pub node_group_tol: f64,
    pub flat_grid: usize,
    pub flat_tol: f64,
    pub q_max: usize,
    pub relation_grid: usize,
    pub relation_tol: f64,
    pub quad_grid: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct NrgSummary {
    pub sup_ratio: f64,
    pub argmax: Vec<i64>,
    pub tolerance_sensitive: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RelationRow {
    /// 1-based branch labels.
    pub s: usize,
    pub w: usize,
    pub phi: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CoefficientRow {
    pub u: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ErgodicityReport {
    pub n: usize,
    pub d: usize,
    pub nu: usize,
    /// Infinite-time limits are exact (spectral grouping), not truncated.
    pub exact: bool,
    pub regime: Option<String>,
    pub implications: Vec<String>,
    pub flat_bands: Vec<[f64; 2]>,
    pub m: Option<i64>,
    pub k: Option<usize>,
    pub relations: Vec<RelationRow>,
    pub nrg: Option<NrgSummary>,
    pub pqe_gap: f64,
    pub fqe_gap: f64,
    pub tvd_uniform: f64,
    pub grouping_unstable: bool,
    pub coefficients: Vec<CoefficientRow>,
    pub coefficient_error: Option<f64>,
    pub tolerances: Tolerances,
}

/// Run classification (d = 1), NRG, exact PQE/FQE gaps for φ (a_j = φ for all j),
/// TVD to uniform and, when relations are present, c_{u,ψ}^{(k)} for k ≡ N mod M.
pub fn ergodicity_report(
    walk: &WalkSpec,
    psi: &CompactState,
    n: usize,
    phi: &Observable,
    opt: &ReportOptions,
) -> Result<ErgodicityReport> {
    let d = walk.d();
    let psi = psi.normalized()?;
    let state = psi.to_box(n);
    let cls = if d == 1 {
        Some(classify_with(walk, &opt.classify)?)
    } else {
        None
    };
    let nrg = if n <= nrg_budget(d) {
        Some(nrg_statistic(walk, n, opt.eig_tol)?)
    } else {
        None
    };
    let lm = limit_measure(walk, &state, DEFAULT_GROUP_TOL)?;
    let tvd = tv_distance(&lm.total, &PositionMeasure::uniform(n, d))?;
    let pqe = pqe_gap(walk, &state, phi)?;
    let a = vec![phi.clone(); walk.nu()];
    let fqe = fqe_gap(walk, &state, &a)?;
    let (mut coefficients, mut coefficient_error, mut k) = (Vec::new(), None, None);
    if let Some(c) = cls.as_ref().filter(|c| !c.relations.is_empty()) {
        let m = c.m as usize;
        let kk = (n - 1) % m + 1;
        let sc = subset_coefficients(walk, &psi, kk, m, &c.relations, opt.quad_grid)?;
        coefficients = sc
            .values
            .iter()
            .enumerate()
            .map(|(u, v)| CoefficientRow {
                u,
                re: v.re,
                im: v.im,
            })
            .collect();
        coefficient_error = Some(sc.error);
        k = Some(kk);
    }
    Ok(ErgodicityReport {
        n,
        d,
        nu: walk.nu(),
        exact: true,
        regime: cls.as_ref().map(|c| c.regime.to_string()),
        implications: cls
            .as_ref()
            .map(|c| c.implications.iter().map(|s| s.to_string()).collect())
            .unwrap_or_default(),
        flat_bands: cls
            .as_ref()
            .map(|c| c.flat_bands.iter().map(|z| [z.re, z.im]).collect())
            .unwrap_or_default(),
        m: cls.as_ref().map(|c| c.m),
        k,
        relations: cls
            .as_ref()
            .map(|c| {
                c.relations
                    .iter()
                    .map(|r| RelationRow {
                        s: r.s + 1,
                        w: r.w + 1,
                        phi: format!("{}/{}", r.p, r.q),
                        residual: r.residual,
                    })
                    .collect()
            })
            .unwrap_or_default(),
        nrg: nrg.map(|r| NrgSummary {
            sup_ratio: r.sup_ratio,
            argmax: r.argmax.0,
            tolerance_sensitive: r.tolerance_sensitive,
        }),
        pqe_gap: pqe,
        fqe_gap: fqe,
        tvd_uniform: tvd,
        grouping_unstable: lm.grouping_unstable,
        coefficients,
        coefficient_error,
        tolerances: Tolerances {
            eig_tol: opt.eig_tol,
            group_tol: DEFAULT_GROUP_TOL,
            node_group_tol: NODE_GROUP_TOL,
            flat_grid: opt.classify.flat_grid,
            flat_tol: opt.classify.flat_tol,
            q_max: opt.classify.q_max,
            relation_grid: opt.classify.relation_grid,
            relation_tol: opt.classify.relation_tol,
            quad_grid: opt.quad_grid,
        },
    })
}
