//! Flat-band detection and the No-Repeating-Graphs coincidence statistic.

use super::eigen::eigensystem;
use crate::error::{Result, WalkError};
use crate::walk_core::{box_coords, box_index, LatticeVector, WalkSpec};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Grouping tolerance used for node eigenvalue sets.
pub const NODE_GROUP_TOL: f64 = 1e-9;

/// Distinct eigenvalues of Û(r/N) at every node of L_N^d, angle-sorted.
pub fn node_values(walk: &WalkSpec, n: usize) -> Result<Vec<Vec<C64>>> {
    let d = walk.d();
    let total = n.pow(d as u32);
    (0..total)
        .into_par_iter()
        .map(|idx| {
            let r = box_coords(idx, n, d);
            Ok(eigensystem(&walk.floquet_at_node(&r, n as i64), NODE_GROUP_TOL)?.values)
        })
        .collect()
}

/// Eigenvalues that stay constant (within `tol`) over the G^d grid and the
/// half-step shifted grid.
pub fn detect_flat_bands(walk: &WalkSpec, g: usize, tol: f64) -> Result<Vec<C64>> {
    let d = walk.d();
    let grid = node_values(walk, g)?;
    let candidates = grid[0].clone();
    let shifted: Vec<Vec<C64>> = (0..g.pow(d as u32))
        .into_par_iter()
        .map(|idx| {
            let r = box_coords(idx, g, d);
            let th: Vec<f64> = r.iter().map(|&x| (x as f64 + 0.5) / g as f64).collect();
            Ok(eigensystem(&walk.floquet_matrix(&th), NODE_GROUP_TOL)?.values)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    'cand: for c in candidates {
        let mut sum = C64::new(0.0, 0.0);
        for vals in grid.iter().chain(&shifted) {
            let nearest = vals
                .iter()
                .copied()
                .min_by(|a, b| (a - c).norm().total_cmp(&(b - c).norm()));
            match nearest {
                Some(v) if (v - c).norm() < tol => sum += v,
                _ => continue 'cand,
            }
        }
        out.push(sum / (grid.len() + shifted.len()) as f64);
    }
    Ok(out)
}

/// Largest box accepted by `nrg_statistic` per dimension.
pub fn nrg_budget(d: usize) -> usize {
    match d {
        1 => 4096,
        2 => 128,
        _ => (16384f64).powf(1.0 / d as f64).floor() as usize,
    }
}

/// Coincidence counts for one shift m.
#[derive(Clone, Debug, PartialEq)]
pub struct NrgRow {
    pub m: LatticeVector,
    /// Angle-sorted labels (s at r+m, w at r) of the pair with the largest count.
    pub s: usize,
    pub w: usize,
    pub pair_count: usize,
    /// Number of r where the eigenvalue sets at r+m and r share a value.
    pub count: usize,
    /// Same count at tolerance eig_tol/10.
    pub count_fine: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct NrgReport {
    pub n: usize,
    pub eig_tol: f64,
    pub sup_ratio: f64,
    pub argmax: LatticeVector,
    pub sup_ratio_fine: f64,
    /// Counts differ between eig_tol and eig_tol/10 for some m.
    pub tolerance_sensitive: bool,
    pub rows: Vec<NrgRow>,
}

/// sup over m ≠ 0 of #{r : E_s((r+m)/N) = E_w(r/N) for some s, w} / N^d.
pub fn nrg_statistic(walk: &WalkSpec, n: usize, eig_tol: f64) -> Result<NrgReport> {
    let d = walk.d();
    if n == 0 || n > nrg_budget(d) {
        return Err(WalkError::BudgetExceeded(format!(
            "nrg_statistic supports N <= {} for d = {d}, got {n}",
            nrg_budget(d)
        )));
    }
    let nodes = node_values(walk, n)?;
    nrg_from_nodes(&nodes, n, d, eig_tol)
}

pub(crate) fn nrg_from_nodes(
    nodes: &[Vec<C64>],
    n: usize,
    d: usize,
    eig_tol: f64,
) -> Result<NrgReport> {
    let total = nodes.len();
    let fine = eig_tol / 10.0;
    let rows: Vec<NrgRow> = (1..total)
        .into_par_iter()
        .map(|midx| {
            let m = box_coords(midx, n, d);
            let width = nodes.iter().map(|v| v.len()).max().unwrap_or(0);
            let mut pair = vec![0usize; width * width];
            let mut count = 0;
            let mut count_fine = 0;
            let mut shifted = vec![0i64; d];
            for (ridx, here) in nodes.iter().enumerate() {
                let r = box_coords(ridx, n, d);
                for k in 0..d {
                    shifted[k] = r[k] + m[k];
                }
                let there = &nodes[box_index(&shifted, n)];
                let mut hit = false;
                let mut hit_fine = false;
                for (s, a) in there.iter().enumerate() {
                    for (w, b) in here.iter().enumerate() {
                        let dist = (a - b).norm();
                        if dist < eig_tol {
                            pair[s * width + w] += 1;
                            hit = true;
                            if dist < fine {
                                hit_fine = true;
                            }
                        }
                    }
                }
                count += hit as usize;
                count_fine += hit_fine as usize;
            }
            let (best, pc) =
                pair.iter()
                    .enumerate()
                    .fold((0, 0), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
            NrgRow {
                m: LatticeVector(m),
                s: best / width.max(1),
                w: best % width.max(1),
                pair_count: pc,
                count,
                count_fine,
                ratio: count as f64 / total as f64,
            }
        })
        .collect();
    let mut sup = 0.0;
    let mut sup_fine = 0.0;
    let mut argmax = LatticeVector(box_coords(1.min(total.saturating_sub(1)), n, d));
    let mut sensitive = false;
    for row in &rows {
        if row.ratio > sup {
            sup = row.ratio;
            argmax = row.m.clone();
        }
        sup_fine = f64::max(sup_fine, row.count_fine as f64 / total as f64);
        sensitive |= row.count != row.count_fine;
    }
    Ok(NrgReport {
        n,
        eig_tol,
        sup_ratio: sup,
        argmax,
        sup_ratio_fine: sup_fine,
        tolerance_sensitive: sensitive,
        rows,
    })
}

/// Coincidence ratio for a single shift m.
pub fn nrg_ratio_at(walk: &WalkSpec, n: usize, m: &[i64], eig_tol: f64) -> Result<f64> {
    let d = walk.d();
    let nodes = node_values(walk, n)?;
    let mut count = 0;
    let mut shifted = vec![0i64; d];
    for (ridx, here) in nodes.iter().enumerate() {
        let r = box_coords(ridx, n, d);
        for k in 0..d {
            shifted[k] = r[k] + m[k];
        }
        let there = &nodes[box_index(&shifted, n)];
        if there
            .iter()
            .any(|a| here.iter().any(|b| (a - b).norm() < eig_tol))
        {
            count += 1;
        }
    }
    Ok(count as f64 / nodes.len() as f64)
}
