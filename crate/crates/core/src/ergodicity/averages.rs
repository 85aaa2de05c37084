//! Uniform and spectral averages, PQE/FQE gaps and total variation.

use super::observable::Observable;
use crate::dynamics::{
    dft_forward, fqe_limit, limit_measure, node_eigensystems, BoxState, PositionMeasure,
    DEFAULT_GROUP_TOL,
};
use crate::error::{Result, WalkError};
use crate::walk_core::WalkSpec;
use num_complex::Complex64 as C64;

/// ⟨φ⟩ = N^{−d} Σ_r φ(r).
pub fn uniform_average(phi: &Observable, n: usize) -> Result<C64> {
    let t = phi.table(n)?;
    Ok(t.iter().sum::<C64>() / t.len() as f64)
}

/// w_j = Σ_r Σ_s |[P_{E_s}(r/N) ψ̂(r)]_j|², one weight per spin.
pub fn spectral_spin_weights(walk: &WalkSpec, state: &BoxState) -> Result<Vec<f64>> {
    if walk.d() != state.d || walk.nu() != state.nu() {
        return Err(WalkError::DimensionMismatch(
            "state does not match the walk".into(),
        ));
    }
    let eig = node_eigensystems(walk, state.n, DEFAULT_GROUP_TOL)?;
    let hat = dft_forward(state);
    let nu = walk.nu();
    let mut w = vec![0.0; nu];
    for (r, e) in eig.iter().enumerate() {
        let v: Vec<C64> = (0..nu).map(|i| hat.fields[i][r]).collect();
        for p in &e.projections {
            for (acc, x) in w.iter_mut().zip(p.mul_vec(&v)) {
                *acc += x.norm_sqr();
            }
        }
    }
    Ok(w)
}

fn check_spins(walk: &WalkSpec, a: &[Observable]) -> Result<()> {
    if a.len() != walk.nu() {
        return Err(WalkError::DimensionMismatch(format!(
            "observable has {} spins, walk has {}",
            a.len(),
            walk.nu()
        )));
    }
    Ok(())
}

/// ⟨a⟩_ψ = Σ_j ⟨a_j⟩ w_j.
pub fn target_average(walk: &WalkSpec, state: &BoxState, a: &[Observable]) -> Result<C64> {
    check_spins(walk, a)?;
    let w = spectral_spin_weights(walk, state)?;
    a.iter()
        .zip(&w)
        .map(|(aj, wj)| Ok(uniform_average(aj, state.n)? * *wj))
        .sum()
}

/// |Σ_r φ(r) μ_ψ^N(r) − ⟨φ⟩| with the exact infinite-time measure.
pub fn pqe_gap(walk: &WalkSpec, state: &BoxState, phi: &Observable) -> Result<f64> {
    let mu = limit_measure(walk, state, DEFAULT_GROUP_TOL)?;
    let t = phi.table(state.n)?;
    Ok((mu.total.expect(&t) - uniform_average(phi, state.n)?).norm())
}

/// |lim_T Cesàro ⟨U^kψ, a U^kψ⟩ − ⟨a⟩_ψ|.
pub fn fqe_gap(walk: &WalkSpec, state: &BoxState, a: &[Observable]) -> Result<f64> {
    check_spins(walk, a)?;
    let tables: Vec<Vec<C64>> = a.iter().map(|x| x.table(state.n)).collect::<Result<_>>()?;
    let lim = fqe_limit(walk, state, &tables, DEFAULT_GROUP_TOL)?;
    Ok((lim - target_average(walk, state, a)?).norm())
}

/// (1/2) Σ_r |μ1(r) − μ2(r)|.
pub fn tv_distance(mu1: &PositionMeasure, mu2: &PositionMeasure) -> Result<f64> {
    if mu1.n != mu2.n || mu1.d != mu2.d {
        return Err(WalkError::BoxMismatch(
            format!("N = {}, d = {}", mu1.n, mu1.d),
            format!("N = {}, d = {}", mu2.n, mu2.d),
        ));
    }
    Ok(0.5
        * mu1
            .weights
            .iter()
            .zip(&mu2.weights)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// ⟨φ⟩_{B_u} over B_u = {r ∈ L_N : r ≡ u mod M}, u = 0..M−1, for N = nM + k.
pub fn subset_averages(phi: &Observable, n: usize, m: usize, k: usize) -> Result<Vec<C64>> {
    if phi.d() != 1 {
        return Err(WalkError::DimensionMismatch(
            "subset averages need d = 1".into(),
        ));
    }
    if m == 0 || k == 0 || k > m || n < m || n % m != k % m {
        return Err(WalkError::ModulusMismatch { n, k, m });
    }
    let t = phi.table(n)?;
    Ok((0..m)
        .map(|u| {
            let cls: Vec<C64> = t.iter().skip(u).step_by(m).copied().collect();
            cls.iter().sum::<C64>() / cls.len() as f64
        })
        .collect())
}
