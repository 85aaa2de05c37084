//! Weak-limit constants c_{ψ,j} and subset-equidistribution coefficients c_{u,ψ}^{(k)}.

use crate::dynamics::CompactState;
use crate::error::{Result, WalkError};
use crate::spectra::{eigensystem, FloquetEigen, PhaseRelation};
use crate::walk_core::{box_coords, WalkSpec};
use num_complex::Complex64 as C64;
use num_integer::Integer;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Default quadrature size per axis in d = 1.
pub const DEFAULT_QUAD_GRID: usize = 512;
/// Largest number of quadrature nodes (at the refined size).
pub const MAX_QUAD_NODES: usize = 1 << 24;
/// Eigenvalues closer than this are the same value.
const MATCH_TOL: f64 = 1e-8;
/// Distinct values closer than this mark a crossing; the node is moved by half a step.
const CROSSING_TOL: f64 = 1e-6;
const GROUP_TOL: f64 = 1e-9;
/// Irrational grid offset keeps nodes off rational crossing points.
const OFFSET: f64 = 0.381_966_011_250_105_1;

/// A trapezoid value at G and 2G nodes per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    /// Value on the refined (2G) grid.
    pub value: f64,
    pub coarse: f64,
    /// |refined − coarse|.
    pub error: f64,
    pub g: usize,
}

/// ψ̂(θ) = Σ_m ψ(m) e^{−2πi m·θ}.
pub fn symbol(psi: &CompactState, theta: &[f64]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); psi.nu];
    for (m, f) in &psi.entries {
        let ph = C64::from_polar(1.0, -TAU * m.dot_frac(theta));
        for (a, x) in v.iter_mut().zip(f) {
            *a += ph * x;
        }
    }
    v
}

fn min_gap(a: &[C64], b: &[C64], skip_self: bool) -> f64 {
    let mut g = f64::INFINITY;
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if skip_self && i >= j {
                continue;
            }
            let d = (x - y).norm();
            if !(skip_self || d >= MATCH_TOL) {
                continue;
            }
            g = g.min(d);
        }
    }
    g
}

fn eig_at(walk: &WalkSpec, theta: &[f64]) -> Result<FloquetEigen> {
    eigensystem(&walk.floquet_matrix(theta), GROUP_TOL)
}

fn node(j: usize, g: usize, d: usize, jitter: bool) -> Vec<f64> {
    let h = if jitter { 0.5 } else { 0.0 };
    box_coords(j, g, d)
        .iter()
        .map(|&c| (c as f64 + OFFSET + h) / g as f64)
        .collect()
}

fn check_grid(g: usize, d: usize) -> Result<()> {
    if g == 0 {
        return Err(WalkError::InvalidParams(
            "quadrature size must be positive".into(),
        ));
    }
    match (2 * g).checked_pow(d as u32) {
        Some(n) if n <= MAX_QUAD_NODES => Ok(()),
        _ => Err(WalkError::SizeLimit(format!(
            "quadrature grid (2·{g})^{d} exceeds {MAX_QUAD_NODES} nodes"
        ))),
    }
}

fn check_state(walk: &WalkSpec, psi: &CompactState) -> Result<()> {
    if psi.d != walk.d() || psi.nu != walk.nu() {
        return Err(WalkError::DimensionMismatch(
            "state does not match the walk".into(),
        ));
    }
    Ok(())
}

/// Σ_s |[P_{E_s}(θ) ψ̂(θ)]_j|² averaged over the G^d offset grid, for every j.
fn spin_weights_on_grid(walk: &WalkSpec, psi: &CompactState, g: usize) -> Result<Vec<f64>> {
    let d = walk.d();
    let nu = walk.nu();
    let nodes = g.pow(d as u32);
    let sums = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let mut th = node(j, g, d, false);
            let mut e = eig_at(walk, &th)?;
            if min_gap(&e.values, &e.values, true) < CROSSING_TOL {
                th = node(j, g, d, true);
                e = eig_at(walk, &th)?;
            }
            let v = symbol(psi, &th);
            let mut w = vec![0.0; nu];
            for p in &e.projections {
                for (acc, x) in w.iter_mut().zip(p.mul_vec(&v)) {
                    *acc += x.norm_sqr();
                }
            }
            Ok(w)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut out = vec![0.0; nu];
    for w in sums {
        for (a, b) in out.iter_mut().zip(w) {
            *a += b;
        }
    }
    Ok(out.into_iter().map(|x| x / nodes as f64).collect())
}

/// c_{ψ,j} = ∫ Σ_s |[P_{E_s}(θ) ψ̂(θ)]_j|² dθ for every spin j.
pub fn c_psi(walk: &WalkSpec, psi: &CompactState, g: usize) -> Result<Vec<Quadrature>> {
    check_state(walk, psi)?;
    check_grid(g, walk.d())?;
    let coarse = spin_weights_on_grid(walk, psi, g)?;
    let fine = spin_weights_on_grid(walk, psi, 2 * g)?;
    Ok(coarse
        .into_iter()
        .zip(fine)
        .map(|(c, f)| Quadrature {
            value: f,
            coarse: c,
            error: (f - c).abs(),
            g,
        })
        .collect())
}

/// c_{ψ,j} for one spin (0-based).
pub fn c_psi_j(walk: &WalkSpec, psi: &CompactState, j: usize, g: usize) -> Result<Quadrature> {
    if j >= walk.nu() {
        return Err(WalkError::DimensionMismatch(format!(
            "spin {} out of range 1..={}",
            j + 1,
            walk.nu()
        )));
    }
    Ok(c_psi(walk, psi, g)?.swap_remove(j))
}

/// c_{u,ψ}^{(k)} for u = 0..M−1.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetCoefficients {
    pub m: usize,
    pub k: usize,
    pub gcd: usize,
    pub values: Vec<C64>,
    /// Shifts φ = p/q with φ·gcd(M,k) ∈ Z at which eigenvalues coincide identically.
    pub shifts: Vec<(i64, i64)>,
    /// max_u |refined − coarse|.
    pub error: f64,
    pub g: usize,
}

/// (∫ Σ_{a,b: E_a(θ+φ) = E_b(θ)} ⟨P_a(θ+φ)ψ̂(θ+φ), P_b(θ)ψ̂(θ)⟩ dθ, fraction of nodes with a match).
fn shift_integral(walk: &WalkSpec, psi: &CompactState, phi: f64, g: usize) -> Result<(C64, f64)> {
    let parts = (0..g)
        .into_par_iter()
        .map(|j| {
            let mut jitter = false;
            loop {
                let th = node(j, g, 1, jitter);
                let ts = [th[0] + phi];
                let (e0, e1) = (eig_at(walk, &th)?, eig_at(walk, &ts)?);
                let crossing = min_gap(&e0.values, &e0.values, true) < CROSSING_TOL
                    || min_gap(&e1.values, &e1.values, true) < CROSSING_TOL
                    || min_gap(&e1.values, &e0.values, false) < CROSSING_TOL;
                if crossing && !jitter {
                    jitter = true;
                    continue;
                }
                let (v0, v1) = (symbol(psi, &th), symbol(psi, &ts));
                let mut acc = C64::new(0.0, 0.0);
                let mut hit = false;
                for (a, pa) in e1.values.iter().zip(&e1.projections) {
                    for (b, pb) in e0.values.iter().zip(&e0.projections) {
                        if (a - b).norm() < MATCH_TOL {
                            hit = true;
                            let x = pa.mul_vec(&v1);
                            let y = pb.mul_vec(&v0);
                            acc += x.iter().zip(&y).map(|(p, q)| p.conj() * q).sum::<C64>();
                        }
                    }
                }
                return Ok((acc, hit));
            }
        })
        .collect::<Result<Vec<(C64, bool)>>>()?;
    let total: C64 = parts.iter().map(|p| p.0).sum();
    let hits = parts.iter().filter(|p| p.1).count();
    Ok((total / g as f64, hits as f64 / g as f64))
}

fn coefficients_at(
    walk: &WalkSpec,
    psi: &CompactState,
    m: usize,
    gcd: usize,
    g: usize,
) -> Result<(Vec<C64>, Vec<(i64, i64)>)> {
    let norm = psi.norm_sqr();
    let mut values = vec![C64::new(norm, 0.0); m];
    let mut shifts = Vec::new();
    for rho in 1..gcd {
        let r = rho.gcd(&gcd);
        let (p, q) = ((rho / r) as i64, (gcd / r) as i64);
        let phi = p as f64 / q as f64;
        let (integral, frac) = shift_integral(walk, psi, phi, g)?;
        // an identical relation matches at all but isolated nodes
        if frac > 0.5 {
            shifts.push((p, q));
        }
        for (u, c) in values.iter_mut().enumerate() {
            *c += C64::from_polar(1.0, -TAU * u as f64 * phi) * integral;
        }
    }
    Ok((values.into_iter().map(|c| c / m as f64).collect(), shifts))
}

/// c_{u,ψ}^{(k)} = (1/M)[‖ψ‖² + Σ_{0<φ<1, φ·gcd(M,k)∈Z} e^{−2πiuφ} I_φ].
///
/// I_φ pairs eigenvalue groups at θ+φ and θ that coincide; every shift with
/// identical coincidences must appear among the ξ = 0 `relations`.
pub fn subset_coefficients(
    walk: &WalkSpec,
    psi: &CompactState,
    k: usize,
    m: usize,
    relations: &[PhaseRelation],
    g: usize,
) -> Result<SubsetCoefficients> {
    check_state(walk, psi)?;
    if walk.d() != 1 {
        return Err(WalkError::DimensionMismatch(
            "subset coefficients need d = 1".into(),
        ));
    }
    if m == 0 || k == 0 || k > m {
        return Err(WalkError::InvalidParams(format!(
            "need 1 ≤ k ≤ M, got k = {k}, M = {m}"
        )));
    }
    check_grid(g, 1)?;
    let gcd = m.gcd(&k);
    let (coarse, _) = coefficients_at(walk, psi, m, gcd, g)?;
    let (values, shifts) = coefficients_at(walk, psi, m, gcd, 2 * g)?;
    for &(p, q) in &shifts {
        if !relations
            .iter()
            .any(|r| r.is_xi_zero() && r.p == p && r.q == q)
        {
            return Err(WalkError::RelationMissing { p, q });
        }
    }
    let error = values
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(SubsetCoefficients {
        m,
        k,
        gcd,
        values,
        shifts,
        error,
        g,
    })
}
