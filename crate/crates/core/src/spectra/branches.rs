//! Continuity-consistent labeling of Floquet eigenvalues along a closed line.

use super::eigen::{angle01, eigenpairs};
use crate::error::{Result, WalkError};
use crate::walk_core::WalkSpec;
use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

/// Values closer than this are treated as one degenerate eigenvalue.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Largest grid size reached by refinement.
pub const MAX_GRID: usize = 1 << 16;
/// A labeling is accepted when every swap costs this many times the chosen one.
const SWAP_MARGIN: f64 = 25.0;

/// Closed line t ↦ base + t·dir through the torus, t ∈ [0,1].
#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub base: Vec<f64>,
    pub dir: Vec<i64>,
}

impl Line {
    /// The full circle for d = 1.
    pub fn axis1() -> Self {
        Line {
            base: vec![0.0],
            dir: vec![1],
        }
    }

    /// Coordinate axis `axis` in dimension d through `base`.
    pub fn axis(d: usize, axis: usize, base: Vec<f64>) -> Self {
        let mut dir = vec![0; d];
        dir[axis] = 1;
        Line { base, dir }
    }
}

#[derive(Clone, Debug)]
pub struct BranchTable {
    pub g: usize,
    /// `samples[s][j]` = E_s(j/G), j = 0..=G.
    pub samples: Vec<Vec<C64>>,
    /// E_s(t+1) = E_{monodromy[s]}(t).
    pub monodromy: Vec<usize>,
    /// Some consecutive step exceeded the local inter-branch gap.
    pub refine_needed: bool,
}

impl BranchTable {
    pub fn nu(&self) -> usize {
        self.samples.len()
    }

    /// E_s at grid index j ≥ 0, continued past t = 1 through the monodromy.
    pub fn value(&self, s: usize, j: usize) -> C64 {
        let mut s = s;
        let mut j = j;
        while j > self.g {
            s = self.monodromy[s];
            j -= self.g;
        }
        self.samples[s][j]
    }
}

/// Eigenvalue multiset of Û on the line at t = j/G, phases reduced exactly.
pub fn line_values(walk: &WalkSpec, line: &Line, j: usize, g: usize) -> Result<Vec<C64>> {
    let m = line_matrix(walk, line, j as i64, g as i64);
    let (mut vals, _) = eigenpairs(&m)?;
    vals.sort_by(|a, b| angle01(*a).total_cmp(&angle01(*b)));
    Ok(vals)
}

fn line_matrix(walk: &WalkSpec, line: &Line, j: i64, g: i64) -> crate::linalg::CMat {
    let mut out = crate::linalg::CMat::zeros(walk.nu());
    for (p, m) in walk.blocks() {
        let base: f64 = p.dot_frac(&line.base);
        let k: i64 = p.0.iter().zip(&line.dir).map(|(a, b)| a * b).sum::<i64>() * j;
        let frac = (k.rem_euclid(g)) as f64 / g as f64 + base;
        let z = C64::from_polar(1.0, -TAU * (frac - frac.floor()));
        out = &out + &m.scale(z);
    }
    out
}

/// Label eigenvalue branches on a grid of size G, doubling G while ambiguous.
pub fn branch_table(walk: &WalkSpec, line: &Line, g: usize) -> Result<BranchTable> {
    if line.base.len() != walk.d() || line.dir.len() != walk.d() {
        return Err(WalkError::DimensionMismatch(
            "line does not match walk dimension".into(),
        ));
    }
    let mut g = g.max(8);
    loop {
        if let Some(t) = try_label(walk, line, g)? {
            return Ok(t);
        }
        if g * 2 > MAX_GRID {
            return Err(WalkError::RefineExhausted(g));
        }
        g *= 2;
    }
}

fn try_label(walk: &WalkSpec, line: &Line, g: usize) -> Result<Option<BranchTable>> {
    let nu = walk.nu();
    let nodes: Vec<Vec<C64>> = (0..=g)
        .map(|j| line_values(walk, line, j, g))
        .collect::<Result<_>>()?;
    let mut samples: Vec<Vec<C64>> = (0..nu).map(|s| vec![nodes[0][s]]).collect();
    let mut refine_needed = false;
    for (j, vals) in nodes.iter().enumerate().skip(1) {
        let pred: Vec<C64> = samples.iter().map(|b| extrapolate(b)).collect();
        let perm = min_cost_assignment(&pred, vals);
        let assigned: Vec<C64> = perm.iter().map(|&k| vals[k]).collect();
        if ambiguous(&pred, &assigned) {
            return Ok(None);
        }
        let gap = min_gap(vals);
        for (b, v) in samples.iter_mut().zip(&assigned) {
            if (v - b[j - 1]).norm() >= gap {
                refine_needed = true;
            }
            b.push(*v);
        }
    }
    // monodromy: match value at t=1 and its continuation to samples at t=0 and t=1/G
    let cost: Vec<Vec<f64>> = (0..nu)
        .map(|s| {
            let end = samples[s][g];
            let next = 3.0 * samples[s][g] - 3.0 * samples[s][g - 1] + samples[s][g - 2];
            (0..nu)
                .map(|t| (end - samples[t][0]).norm_sqr() + (next - samples[t][1]).norm_sqr())
                .collect()
        })
        .collect();
    let monodromy = assign(&cost);
    Ok(Some(BranchTable {
        g,
        samples,
        monodromy,
        refine_needed,
    }))
}

fn extrapolate(b: &[C64]) -> C64 {
    let n = b.len();
    match n {
        1 => b[0],
        2 => 2.0 * b[1] - b[0],
        _ => 3.0 * b[n - 1] - 3.0 * b[n - 2] + b[n - 3],
    }
}

fn min_gap(vals: &[C64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let d = (vals[i] - vals[j]).norm();
            if d > CLUSTER_TOL {
                g = g.min(d);
            }
        }
    }
    g
}

fn ambiguous(pred: &[C64], assigned: &[C64]) -> bool {
    let n = pred.len();
    for a in 0..n {
        for b in a + 1..n {
            if (assigned[a] - assigned[b]).norm() <= CLUSTER_TOL {
                continue;
            }
            if (pred[a] - pred[b]).norm() <= CLUSTER_TOL {
                continue;
            }
            let direct = (assigned[a] - pred[a]).norm_sqr() + (assigned[b] - pred[b]).norm_sqr();
            let swap = (assigned[b] - pred[a]).norm_sqr() + (assigned[a] - pred[b]).norm_sqr();
            if swap <= SWAP_MARGIN * direct + 1e-24 {
                return true;
            }
        }
    }
    false
}

/// perm[s] = index of the value assigned to prediction s.
fn min_cost_assignment(pred: &[C64], vals: &[C64]) -> Vec<usize> {
    let cost: Vec<Vec<f64>> = pred
        .iter()
        .map(|p| vals.iter().map(|v| (p - v).norm_sqr()).collect())
        .collect();
    assign(&cost)
}

/// Exact min-cost perfect matching by DP over subsets (n ≤ 16).
pub fn assign(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let full = 1usize << n;
    let mut best = vec![f64::INFINITY; full];
    let mut choice = vec![usize::MAX; full];
    best[0] = 0.0;
    for mask in 0..full {
        if !best[mask].is_finite() {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == n {
            continue;
        }
        for (col, &c) in cost[row].iter().enumerate() {
            if mask & (1 << col) != 0 {
                continue;
            }
            let next = mask | (1 << col);
            let v = best[mask] + c;
            if v < best[next] {
                best[next] = v;
                choice[next] = col;
            }
        }
    }
    let mut perm = vec![0; n];
    let mut mask = full - 1;
    for row in (0..n).rev() {
        let col = choice[mask];
        perm[row] = col;
        mask &= !(1 << col);
    }
    perm
}
