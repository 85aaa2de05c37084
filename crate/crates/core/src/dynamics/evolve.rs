//! Exact momentum-space evolution and the position-space reference stepper.

use super::state::{dft_forward, dft_inverse, BoxState};
use crate::error::{Result, WalkError};
use crate::linalg::{CMat, ZERO};
use crate::spectra::{eigensystem, FloquetEigen};
use crate::walk_core::{box_coords, box_index, WalkSpec};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Grouping tolerance for per-node spectral decompositions.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;

/// Spectral decomposition of Û(r/N) at every node, in flat index order.
pub fn node_eigensystems(walk: &WalkSpec, n: usize, group_tol: f64) -> Result<Vec<FloquetEigen>> {
    let d = walk.d();
    (0..n.pow(d as u32))
        .into_par_iter()
        .map(|idx| {
            let r = box_coords(idx, n, d);
            let mut e = eigensystem(&walk.floquet_at_node(&r, n as i64), group_tol)?;
            e.theta = r.iter().map(|&x| x as f64 / n as f64).collect();
            Ok(e)
        })
        .collect()
}

pub(crate) fn check_shape(walk: &WalkSpec, state: &BoxState) -> Result<()> {
    if walk.d() != state.d || walk.nu() != state.nu() {
        return Err(WalkError::DimensionMismatch(format!(
            "walk has (d, nu) = ({}, {}), state has ({}, {})",
            walk.d(),
            walk.nu(),
            state.d,
            state.nu()
        )));
    }
    Ok(())
}

/// U_N^k ψ via ψ̂(r) ↦ Σ_s E_s(r/N)^k P_s(r/N) ψ̂(r).
pub fn evolve(walk: &WalkSpec, state: &BoxState, k: u64) -> Result<BoxState> {
    check_shape(walk, state)?;
    let eig = node_eigensystems(walk, state.n, DEFAULT_GROUP_TOL)?;
    Ok(evolve_with(&eig, state, k))
}

/// Evolution with precomputed node decompositions.
pub fn evolve_with(eig: &[FloquetEigen], state: &BoxState, k: u64) -> BoxState {
    let mut hat = dft_forward(state);
    let nu = state.nu();
    let updated: Vec<Vec<C64>> = eig
        .par_iter()
        .enumerate()
        .map(|(r, e)| {
            let v: Vec<C64> = (0..nu).map(|i| hat.fields[i][r]).collect();
            e.power(k).mul_vec(&v)
        })
        .collect();
    for (r, v) in updated.into_iter().enumerate() {
        for (i, x) in v.into_iter().enumerate() {
            hat.fields[i][r] = x;
        }
    }
    dft_inverse(&hat)
}

/// Position-space stepper (Uψ)_i(k) = Σ_p Σ_j U_ij(p) ψ_j(k − p) mod N.
pub struct DirectStepper {
    nu: usize,
    /// (block, source index for each target index).
    terms: Vec<(CMat, Vec<usize>)>,
}

impl DirectStepper {
    pub fn new(walk: &WalkSpec, n: usize) -> Self {
        let d = walk.d();
        let sites = n.pow(d as u32);
        let terms = walk
            .blocks()
            .iter()
            .map(|(p, m)| {
                let src = (0..sites)
                    .map(|idx| {
                        let k = box_coords(idx, n, d);
                        let from: Vec<i64> = k.iter().zip(&p.0).map(|(a, b)| a - b).collect();
                        box_index(&from, n)
                    })
                    .collect();
                (m.clone(), src)
            })
            .collect();
        DirectStepper {
            nu: walk.nu(),
            terms,
        }
    }

    pub fn step(&self, state: &BoxState) -> BoxState {
        let mut out = BoxState::zeros(state.n, state.d, self.nu);
        for (m, src) in &self.terms {
            for i in 0..self.nu {
                for j in 0..self.nu {
                    let c = m[(i, j)];
                    if c == ZERO {
                        continue;
                    }
                    let from = &state.fields[j];
                    for (x, &s) in out.fields[i].iter_mut().zip(src) {
                        *x += c * from[s];
                    }
                }
            }
        }
        out
    }
}

/// Apply the coefficient table k times in position space.
pub fn evolve_direct(walk: &WalkSpec, state: &BoxState, k: u64) -> Result<BoxState> {
    check_shape(walk, state)?;
    let stepper = DirectStepper::new(walk, state.n);
    let mut s = state.clone();
    for _ in 0..k {
        s = stepper.step(&s);
    }
    Ok(s)
}
