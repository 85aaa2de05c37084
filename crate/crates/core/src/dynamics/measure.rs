//! Time-averaged and exact infinite-time position measures.

use super::evolve::{check_shape, node_eigensystems, DirectStepper};
use super::fft::dft_nd;
use super::state::{dft_forward, BoxState};
use crate::error::{Result, WalkError};
use crate::linalg::ZERO;
use crate::spectra::eigen::angle01;
use crate::walk_core::{box_coords, unit_root, WalkSpec};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Weights below this are treated as rounding noise and clipped to zero.
const CLIP_TOL: f64 = 1e-12;
/// Clusters touching more nodes than this are projected with a full FFT.
const SPARSE_LIMIT: usize = 16;
/// Work units for the parallel cluster sum.
const CHUNKS: usize = 64;

/// Nonnegative weights on L_N^d.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionMeasure {
    pub n: usize,
    pub d: usize,
    pub weights: Vec<f64>,
}

impl PositionMeasure {
    pub fn new(n: usize, d: usize, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n.pow(d as u32) {
            return Err(WalkError::DimensionMismatch(
                "weights do not fill the box".into(),
            ));
        }
        for w in weights.iter_mut() {
            if *w < -CLIP_TOL {
                return Err(WalkError::Invariant(format!("negative weight {w}")));
            }
            *w = w.max(0.0);
        }
        Ok(PositionMeasure { n, d, weights })
    }

    pub fn uniform(n: usize, d: usize) -> Self {
        let sites = n.pow(d as u32);
        PositionMeasure {
            n,
            d,
            weights: vec![1.0 / sites as f64; sites],
        }
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Σ_k φ(k) μ(k).
    pub fn expect(&self, phi: &[C64]) -> C64 {
        self.weights.iter().zip(phi).map(|(w, p)| p * *w).sum()
    }

    pub fn at(&self, pos: &[i64]) -> f64 {
        self.weights[crate::walk_core::box_index(pos, self.n)]
    }
}

fn sum_spins(n: usize, d: usize, per_spin: &[PositionMeasure]) -> PositionMeasure {
    let mut w = vec![0.0; n.pow(d as u32)];
    for m in per_spin {
        for (a, b) in w.iter_mut().zip(&m.weights) {
            *a += b;
        }
    }
    PositionMeasure { n, d, weights: w }
}

/// μ_T(k) = (1/T) Σ_{t<T} ‖(U_N^t ψ)(k)‖², total and per spin.
pub fn time_avg_measure(
    walk: &WalkSpec,
    state: &BoxState,
    t: u64,
) -> Result<(PositionMeasure, Vec<PositionMeasure>)> {
    check_shape(walk, state)?;
    if t == 0 {
        return Err(WalkError::InvalidParams("T must be positive".into()));
    }
    let stepper = DirectStepper::new(walk, state.n);
    let mut acc = vec![vec![0.0; state.sites()]; state.nu()];
    let mut s = state.clone();
    for step in 0..t {
        for (a, f) in acc.iter_mut().zip(&s.fields) {
            for (x, v) in a.iter_mut().zip(f) {
                *x += v.norm_sqr();
            }
        }
        if step + 1 < t {
            s = stepper.step(&s);
        }
    }
    let per_spin: Vec<PositionMeasure> = acc
        .into_iter()
        .map(|a| {
            PositionMeasure::new(
                state.n,
                state.d,
                a.into_iter().map(|x| x / t as f64).collect(),
            )
        })
        .collect::<Result<_>>()?;
    Ok((sum_spins(state.n, state.d, &per_spin), per_spin))
}

/// Exact T → ∞ limit of the time-averaged measure.
#[derive(Clone, Debug)]
pub struct LimitMeasure {
    pub total: PositionMeasure,
    pub per_spin: Vec<PositionMeasure>,
    /// Part carried by eigenvalues present at every node (flat bands);
    /// converges exponentially in N to the infinite-volume point-spectrum part.
    pub flat: PositionMeasure,
    /// Number of distinct eigenvalues of U_N found.
    pub eigenvalues: usize,
    /// The eigenvalue count changes when the grouping tolerance is divided by 10.
    pub grouping_unstable: bool,
}

impl LimitMeasure {
    /// Σ_j Σ_k a_j(k) μ_j(k).
    pub fn expect_per_spin(&self, a: &[Vec<C64>]) -> C64 {
        self.per_spin
            .iter()
            .zip(a)
            .map(|(m, aj)| m.expect(aj))
            .sum()
    }
}

struct Piece {
    r: usize,
    angle: f64,
    vec: Vec<C64>,
}

struct Acc {
    uni: Vec<f64>,
    loc: Vec<Vec<f64>>,
    flat_uni: f64,
    flat: Vec<f64>,
}

impl Acc {
    fn merge(mut self, other: Acc) -> Acc {
        for (a, b) in self.uni.iter_mut().zip(other.uni) {
            *a += b;
        }
        for (a, b) in self.loc.iter_mut().zip(other.loc) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.flat_uni += other.flat_uni;
        for (a, b) in self.flat.iter_mut().zip(other.flat) {
            *a += b;
        }
        self
    }
}

/// Group angle-sorted pieces into clusters whose consecutive gaps are below tol,
/// merging across the 2π wrap.
fn cluster(pieces: &[Piece], order: &[usize], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &i in order {
        let a = pieces[i].angle;
        if a - last < tol {
            out.last_mut().unwrap().push(i);
        } else {
            out.push(vec![i]);
        }
        last = a;
    }
    if out.len() > 1 {
        let first = pieces[out[0][0]].angle;
        if first + TAU - last < tol {
            let tail = out.pop().unwrap();
            out[0].extend(tail);
        }
    }
    out
}

/// μ_ψ^N(k) = Σ_λ ‖(P_λ ψ)(k)‖² over the distinct eigenvalues λ of U_N.
pub fn limit_measure(walk: &WalkSpec, state: &BoxState, group_tol: f64) -> Result<LimitMeasure> {
    check_shape(walk, state)?;
    let (n, d, nu) = (state.n, state.d, state.nu());
    let sites = state.sites();
    let eig = node_eigensystems(walk, n, group_tol)?;
    let hat = dft_forward(state);
    let mut pieces = Vec::new();
    for (r, e) in eig.iter().enumerate() {
        let v: Vec<C64> = (0..nu).map(|i| hat.fields[i][r]).collect();
        for (val, p) in e.values.iter().zip(&e.projections) {
            pieces.push(Piece {
                r,
                angle: angle01(*val),
                vec: p.mul_vec(&v),
            });
        }
    }
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&a, &b| pieces[a].angle.total_cmp(&pieces[b].angle));
    let clusters = cluster(&pieces, &order, group_tol);
    let unstable = cluster(&pieces, &order, group_tol / 10.0).len() != clusters.len();

    let roots: Vec<C64> = (0..n as i64).map(|k| unit_root(k, n as i64)).collect();
    let coords: Vec<Vec<i64>> = (0..sites).map(|i| box_coords(i, n, d)).collect();
    let norm = (sites as f64).sqrt();
    let zero = || Acc {
        uni: vec![0.0; nu],
        loc: vec![vec![0.0; sites]; nu],
        flat_uni: 0.0,
        flat: vec![0.0; sites],
    };
    // fixed chunking keeps the summation order, hence the bits, independent of the thread count
    let chunk = clusters.len().div_ceil(CHUNKS).max(1);
    let partial: Vec<Acc> = clusters
        .par_chunks(chunk)
        .map(|chunk| {
            chunk.iter().fold(zero(), |mut acc, cl| {
                let mut by_r: BTreeMap<usize, Vec<C64>> = BTreeMap::new();
                for &i in cl {
                    let e = by_r.entry(pieces[i].r).or_insert_with(|| vec![ZERO; nu]);
                    for (a, b) in e.iter_mut().zip(&pieces[i].vec) {
                        *a += b;
                    }
                }
                let is_flat = by_r.len() == sites;
                if by_r.len() == 1 {
                    // a single plane wave has constant modulus
                    let v = by_r.values().next().unwrap();
                    for (u, x) in acc.uni.iter_mut().zip(v) {
                        *u += x.norm_sqr() / sites as f64;
                        if is_flat {
                            acc.flat_uni += x.norm_sqr() / sites as f64;
                        }
                    }
                } else if by_r.len() <= SPARSE_LIMIT {
                    for (k, kc) in coords.iter().enumerate() {
                        let mut amp = vec![ZERO; nu];
                        for (r, v) in &by_r {
                            let dot: i64 = kc.iter().zip(&coords[*r]).map(|(a, b)| a * b).sum();
                            let ph = roots[dot.rem_euclid(n as i64) as usize];
                            for (a, x) in amp.iter_mut().zip(v) {
                                *a += ph * x;
                            }
                        }
                        for (j, a) in amp.iter().enumerate() {
                            let w = a.norm_sqr() / (norm * norm);
                            acc.loc[j][k] += w;
                            if is_flat {
                                acc.flat[k] += w;
                            }
                        }
                    }
                } else {
                    for j in 0..nu {
                        let mut field = vec![ZERO; sites];
                        for (r, v) in &by_r {
                            field[*r] = v[j];
                        }
                        dft_nd(&mut field, n, d, true);
                        for (k, x) in field.iter().enumerate() {
                            acc.loc[j][k] += x.norm_sqr();
                            if is_flat {
                                acc.flat[k] += x.norm_sqr();
                            }
                        }
                    }
                }
                acc
            })
        })
        .collect();
    let acc = partial.into_iter().reduce(Acc::merge).unwrap_or_else(zero);
    let flat = PositionMeasure::new(n, d, acc.flat.iter().map(|x| x + acc.flat_uni).collect())?;
    let (local, uniform) = (acc.loc, acc.uni);
    let per_spin: Vec<PositionMeasure> = local
        .into_iter()
        .zip(uniform)
        .map(|(l, u)| PositionMeasure::new(n, d, l.into_iter().map(|x| x + u).collect()))
        .collect::<Result<_>>()?;
    Ok(LimitMeasure {
        total: sum_spins(n, d, &per_spin),
        per_spin,
        flat,
        eigenvalues: clusters.len(),
        grouping_unstable: unstable,
    })
}

/// lim_T (1/T) Σ_t ⟨U^tψ, a U^tψ⟩ for a per-spin multiplication observable.
pub fn fqe_limit(walk: &WalkSpec, state: &BoxState, a: &[Vec<C64>], group_tol: f64) -> Result<C64> {
    if a.len() != walk.nu() {
        return Err(WalkError::DimensionMismatch(format!(
            "observable has {} spins, walk has {}",
            a.len(),
            walk.nu()
        )));
    }
    Ok(limit_measure(walk, state, group_tol)?.expect_per_spin(a))
}
