//! Position observables on L_N^d.

use crate::error::{Result, WalkError};
use crate::walk_core::{box_coords, box_index, unit_root, LatticeVector};
use num_complex::Complex64 as C64;

/// Allowed excess of |φ| over 1 for bounded tables.
pub const BOUNDED_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// Trigonometric polynomial f on the torus, sampled as φ(k) = f(k/N) = Σ_m ĉ_m e^{2πi m·k/N}.
    SampledField {
        d: usize,
        coeffs: Vec<(LatticeVector, C64)>,
    },
    /// Finitely supported function on Z^d; positions are folded onto L_N^d.
    SummableRestriction {
        d: usize,
        entries: Vec<(LatticeVector, C64)>,
    },
    /// Explicit table on L_N^d with sup norm ≤ 1.
    Bounded {
        n: usize,
        d: usize,
        values: Vec<C64>,
    },
}

impl Observable {
    pub fn constant(d: usize, c: C64) -> Self {
        Observable::SampledField {
            d,
            coeffs: vec![(LatticeVector::zero(d), c)],
        }
    }

    /// δ_pos.
    pub fn delta(pos: LatticeVector) -> Self {
        Observable::SummableRestriction {
            d: pos.dim(),
            entries: vec![(pos, C64::new(1.0, 0.0))],
        }
    }

    /// Indicator of a finite set of sites.
    pub fn indicator(sites: &[LatticeVector]) -> Result<Self> {
        let d = sites
            .first()
            .map(|p| p.dim())
            .ok_or_else(|| WalkError::InvalidParams("empty site set".into()))?;
        if sites.iter().any(|p| p.dim() != d) {
            return Err(WalkError::DimensionMismatch(
                "sites of mixed dimension".into(),
            ));
        }
        Ok(Observable::SummableRestriction {
            d,
            entries: sites
                .iter()
                .map(|p| (p.clone(), C64::new(1.0, 0.0)))
                .collect(),
        })
    }

    pub fn bounded(n: usize, d: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != n.pow(d as u32) {
            return Err(WalkError::DimensionMismatch(format!(
                "table has {} entries, box has {}",
                values.len(),
                n.pow(d as u32)
            )));
        }
        if let Some(v) = values.iter().find(|v| v.norm() > 1.0 + BOUNDED_TOL) {
            return Err(WalkError::InvalidParams(format!(
                "bounded observable has |φ| = {} > 1",
                v.norm()
            )));
        }
        Ok(Observable::Bounded { n, d, values })
    }

    /// 1_odd or 1_even of the coordinate sum on L_N^d.
    pub fn parity(n: usize, d: usize, odd: bool) -> Self {
        let values = (0..n.pow(d as u32))
            .map(|i| {
                let s: i64 = box_coords(i, n, d).iter().sum();
                C64::new(if (s % 2 == 1) == odd { 1.0 } else { 0.0 }, 0.0)
            })
            .collect();
        Observable::Bounded { n, d, values }
    }

    pub fn d(&self) -> usize {
        match self {
            Observable::SampledField { d, .. }
            | Observable::SummableRestriction { d, .. }
            | Observable::Bounded { d, .. } => *d,
        }
    }

    /// φ on L_N^d in flat index order.
    pub fn table(&self, n: usize) -> Result<Vec<C64>> {
        let d = self.d();
        let sites = n.pow(d as u32);
        match self {
            Observable::SampledField { coeffs, .. } => Ok((0..sites)
                .map(|i| {
                    let k = box_coords(i, n, d);
                    coeffs
                        .iter()
                        .map(|(m, c)| {
                            let dot: i64 = m.0.iter().zip(&k).map(|(a, b)| a * b).sum();
                            c * unit_root(dot, n as i64)
                        })
                        .sum()
                })
                .collect()),
            Observable::SummableRestriction { entries, .. } => {
                let mut t = vec![C64::new(0.0, 0.0); sites];
                for (p, v) in entries {
                    if p.dim() != d {
                        return Err(WalkError::DimensionMismatch(format!(
                            "entry {p} is not in dimension {d}"
                        )));
                    }
                    t[box_index(&p.0, n)] += v;
                }
                Ok(t)
            }
            Observable::Bounded { n: m, values, .. } => {
                if *m != n {
                    return Err(WalkError::BoxMismatch(
                        format!("observable on N = {m}"),
                        format!("box N = {n}"),
                    ));
                }
                Ok(values.clone())
            }
        }
    }
}
