//! Spinor fields on L_N^d in position and momentum representation.

use super::fft::dft_nd;
use crate::error::{Result, WalkError};
use crate::linalg::ZERO;
use crate::walk_core::{box_index, LatticeVector};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

/// ψ_i(k) on the periodic box, stored per spin with flat lattice index.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxState {
    pub n: usize,
    pub d: usize,
    /// `fields[i][idx]` = ψ_i(k) with idx = box_index(k).
    pub fields: Vec<Vec<C64>>,
}

/// ψ̂_i(r), same layout as `BoxState`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumState {
    pub n: usize,
    pub d: usize,
    pub fields: Vec<Vec<C64>>,
}

impl BoxState {
    pub fn zeros(n: usize, d: usize, nu: usize) -> Self {
        BoxState {
            n,
            d,
            fields: vec![vec![ZERO; n.pow(d as u32)]; nu],
        }
    }

    pub fn nu(&self) -> usize {
        self.fields.len()
    }

    pub fn sites(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// δ_pos ⊗ f.
    pub fn qubit(n: usize, pos: &[i64], f: &[C64]) -> Self {
        let mut s = Self::zeros(n, pos.len(), f.len());
        let idx = box_index(pos, n);
        for (i, v) in f.iter().enumerate() {
            s.fields[i][idx] = *v;
        }
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.fields.iter().flatten().map(|x| x.norm_sqr()).sum()
    }

    /// Copy scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm_sqr().sqrt();
        if nrm == 0.0 {
            return Err(WalkError::InvalidParams("state has zero norm".into()));
        }
        let mut s = self.clone();
        s.fields.iter_mut().flatten().for_each(|x| *x /= nrm);
        Ok(s)
    }

    /// ‖ψ(k)‖² per site.
    pub fn site_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.sites()];
        for f in &self.fields {
            for (acc, x) in w.iter_mut().zip(f) {
                *acc += x.norm_sqr();
            }
        }
        w
    }

    pub fn max_diff(&self, other: &BoxState) -> f64 {
        self.fields
            .iter()
            .flatten()
            .zip(other.fields.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A compactly supported state on Z^d: position → spinor.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactState {
    pub d: usize,
    pub nu: usize,
    pub entries: BTreeMap<LatticeVector, Vec<C64>>,
}

impl CompactState {
    pub fn new(d: usize, nu: usize) -> Self {
        CompactState {
            d,
            nu,
            entries: BTreeMap::new(),
        }
    }

    pub fn qubit(pos: LatticeVector, f: &[C64]) -> Self {
        let mut s = Self::new(pos.dim(), f.len());
        s.entries.insert(pos, f.to_vec());
        s
    }

    /// Add amplitude `v` at (pos, spin).
    pub fn add(&mut self, pos: LatticeVector, spin: usize, v: C64) -> Result<()> {
        if pos.dim() != self.d || spin >= self.nu {
            return Err(WalkError::DimensionMismatch(format!(
                "entry {pos} spin {} does not fit",
                spin + 1
            )));
        }
        self.entries
            .entry(pos)
            .or_insert_with(|| vec![ZERO; self.nu])[spin] += v;
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().flatten().map(|x| x.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm_sqr().sqrt();
        if nrm == 0.0 {
            return Err(WalkError::InvalidParams("state has zero norm".into()));
        }
        let mut s = self.clone();
        s.entries.values_mut().flatten().for_each(|x| *x /= nrm);
        Ok(s)
    }

    /// Max-norm radius of the support.
    pub fn radius(&self) -> i64 {
        self.entries.keys().map(|p| p.max_norm()).max().unwrap_or(0)
    }

    /// Place on L_N^d with positions taken mod N.
    pub fn to_box(&self, n: usize) -> BoxState {
        let mut s = BoxState::zeros(n, self.d, self.nu);
        for (p, f) in &self.entries {
            let idx = box_index(&p.0, n);
            for (i, v) in f.iter().enumerate() {
                s.fields[i][idx] += v;
            }
        }
        s
    }
}

/// Forward transform ψ ↦ ψ̂.
pub fn dft_forward(state: &BoxState) -> MomentumState {
    let mut fields = state.fields.clone();
    for f in fields.iter_mut() {
        dft_nd(f, state.n, state.d, false);
    }
    MomentumState {
        n: state.n,
        d: state.d,
        fields,
    }
}

/// Inverse transform ψ̂ ↦ ψ.
pub fn dft_inverse(state: &MomentumState) -> BoxState {
    let mut fields = state.fields.clone();
    for f in fields.iter_mut() {
        dft_nd(f, state.n, state.d, true);
    }
    BoxState {
        n: state.n,
        d: state.d,
        fields,
    }
}
