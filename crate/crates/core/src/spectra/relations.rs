//! Phase-shift relations E_s(θ+φ) ≡ e^{2πiξ} E_w(θ), the modulus M and subsequences.

use super::branches::{branch_table, BranchTable, Line, MAX_GRID};
use crate::error::{Result, WalkError};
use crate::walk_core::{LaurentPoly, WalkSpec};
use num_complex::Complex64 as C64;
use num_integer::Integer;
use std::f64::consts::TAU;

/// Snapping window for ξ.
pub const XI_SNAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRelation {
    /// Branch labels (0-based, ordered by angle at θ = 0).
    pub s: usize,
    pub w: usize,
    /// φ = p/q reduced, 0 ≤ p < q.
    pub p: i64,
    pub q: i64,
    /// ξ ∈ [0,1).
    pub xi: f64,
    /// ξ as a reduced fraction when it was snapped.
    pub xi_rational: Option<(i64, i64)>,
    pub residual: f64,
}

impl PhaseRelation {
    pub fn phi(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// ξ = 0 relations are the ones that break NRG.
    pub fn is_xi_zero(&self) -> bool {
        self.xi_rational == Some((0, 1))
    }
}

#[derive(Clone, Debug)]
pub struct RelationReport {
    pub relations: Vec<PhaseRelation>,
    /// Grid the relations were tested on (after refinement).
    pub grid: usize,
    pub monodromy: Vec<usize>,
}

impl RelationReport {
    pub fn xi_zero(&self) -> Vec<PhaseRelation> {
        self.relations
            .iter()
            .filter(|r| r.is_xi_zero())
            .cloned()
            .collect()
    }
}

/// lcm(1..=q_max).
fn lcm_upto(q_max: usize) -> usize {
    (1..=q_max).fold(1, |a, b| a.lcm(&b))
}

/// Test every reduced φ = p/q (q ≤ q_max) and ordered branch pair for a constant ratio.
pub fn detect_phase_relations(
    walk: &WalkSpec,
    q_max: usize,
    g: usize,
    tol: f64,
) -> Result<RelationReport> {
    if walk.d() != 1 {
        return Err(WalkError::DimensionMismatch(
            "phase relations need d = 1".into(),
        ));
    }
    if q_max == 0 {
        return Err(WalkError::InvalidParams("q_max must be positive".into()));
    }
    let base = lcm_upto(q_max);
    if 2 * base > MAX_GRID {
        return Err(WalkError::SizeLimit(format!(
            "lcm(1..{q_max}) = {base} exceeds the grid cap"
        )));
    }
    let g_rel = base * g.max(1).div_ceil(base);
    // the doubled grid contains the G-grid, so a pass here is a pass after one doubling
    let table = branch_table(walk, &Line::axis1(), 2 * g_rel)?;
    let mut relations = Vec::new();
    for q in 1..=q_max as i64 {
        for p in 0..q {
            if p.gcd(&q) != 1 {
                continue;
            }
            for s in 0..table.nu() {
                for w in 0..table.nu() {
                    if p == 0 && s == w {
                        continue;
                    }
                    if let Some(rel) = test_pair(&table, s, w, p, q, q_max, tol) {
                        relations.push(rel);
                    }
                }
            }
        }
    }
    Ok(RelationReport {
        relations,
        grid: table.g,
        monodromy: table.monodromy.clone(),
    })
}

fn test_pair(
    t: &BranchTable,
    s: usize,
    w: usize,
    p: i64,
    q: i64,
    q_max: usize,
    tol: f64,
) -> Option<PhaseRelation> {
    let shift = t.g * p as usize / q as usize;
    let mut sum = C64::new(0.0, 0.0);
    for j in 0..t.g {
        sum += t.value(s, j + shift) / t.value(w, j);
    }
    if sum.norm() < 0.5 * t.g as f64 {
        return None;
    }
    let c = sum / sum.norm();
    let mut residual: f64 = 0.0;
    for j in 0..t.g {
        residual = residual.max((t.value(s, j + shift) - c * t.value(w, j)).norm());
        if residual >= tol {
            return None;
        }
    }
    let mut xi = c.arg() / TAU;
    if xi < 0.0 {
        xi += 1.0;
    }
    let xi_rational = snap(xi, 2 * q_max as i64);
    if let Some((a, b)) = xi_rational {
        xi = a as f64 / b as f64;
    }
    Some(PhaseRelation {
        s,
        w,
        p,
        q,
        xi,
        xi_rational,
        residual,
    })
}

/// Nearest rational a/b (b ≤ max_den) within the snapping window, reduced mod 1.
fn snap(x: f64, max_den: i64) -> Option<(i64, i64)> {
    for b in 1..=max_den {
        let a = (x * b as f64).round() as i64;
        if (x - a as f64 / b as f64).abs() < XI_SNAP_TOL {
            let a = a.rem_euclid(b);
            let g = a.gcd(&b);
            return Some((a / g, b / g));
        }
    }
    None
}

/// lcm of the denominators of ξ = 0 relations with φ > 0; 1 if there are none.
pub fn compute_m(relations: &[PhaseRelation]) -> i64 {
    relations
        .iter()
        .filter(|r| r.is_xi_zero() && r.p > 0)
        .fold(1, |m, r| m.lcm(&r.q))
}

/// N = nM + k.
pub fn subsequence(m: i64, k: i64, n: i64) -> Result<i64> {
    if m < 1 || k < 1 || k > m {
        return Err(WalkError::InvalidParams(format!(
            "subsequence needs 1 <= k <= M, got M = {m}, k = {k}"
        )));
    }
    Ok(n * m + k)
}

/// Coefficient distance between p(e^{2πiφ}z, e^{2πiξ}λ) and its best multiple of p.
/// Zero when the shift permutes the whole spectrum.
pub fn charpoly_relation_residual(poly: &LaurentPoly, phi: (i64, i64), xi: f64) -> f64 {
    let shifted = poly.zeta_substitute(&vec![phi; poly.d()]);
    let terms: Vec<_> = shifted
        .terms()
        .iter()
        .map(|((z, l), c)| {
            (
                (z.clone(), *l),
                c * C64::from_polar(1.0, TAU * xi * *l as f64),
            )
        })
        .collect();
    let shifted = LaurentPoly::from_terms(poly.d(), terms);
    super::zeta::proportional_residual(poly, &shifted)
}
