//! Eigen-decomposition of small unitary matrices through commuting Hermitian parts.

use crate::error::{Result, WalkError};
use crate::linalg::{CMat, ZERO};
use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

const MAX_SWEEPS: usize = 64;
/// Eigenvalues of a Hermitian part closer than this share a refinement block.
const PART_CLUSTER_TOL: f64 = 1e-5;

/// Spectral data of Û(θ) at one quasimomentum.
#[derive(Clone, Debug)]
pub struct FloquetEigen {
    pub theta: Vec<f64>,
    /// Distinct eigenvalues, ordered by angle in [0, 2π).
    pub values: Vec<C64>,
    pub projections: Vec<CMat>,
    pub multiplicities: Vec<usize>,
}

impl FloquetEigen {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn multiset(&self) -> Vec<C64> {
        self.values
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&v, &m)| std::iter::repeat_n(v, m))
            .collect()
    }

    /// Σ_s E_s^k P_s, with powers taken by angle multiplication.
    pub fn power(&self, k: u64) -> CMat {
        let n = self.projections[0].dim();
        let mut out = CMat::zeros(n);
        for (v, p) in self.values.iter().zip(&self.projections) {
            out = &out + &p.scale(unit_power(*v, k));
        }
        out
    }
}

/// λ^k for |λ| = 1, computed as e^{ik arg λ}.
pub fn unit_power(lambda: C64, k: u64) -> C64 {
    let a = lambda.arg();
    let ang = (a * k as f64) % TAU;
    C64::from_polar(1.0, ang)
}

/// Angle of z in [0, 2π).
pub fn angle01(z: C64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        // tiny negative angles round up to exactly 2π
        let b = a + TAU;
        if b < TAU {
            b
        } else {
            0.0
        }
    } else {
        a
    }
}

/// Eigenpairs of a unitary (normal) matrix: values and orthonormal vectors.
pub fn eigenpairs(m: &CMat) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let n = m.dim();
    let ma = m.adjoint();
    let half = C64::new(0.5, 0.0);
    let h_re = (m + &ma).scale(half);
    let h_im = (m - &ma).scale(C64::new(0.0, -0.5));
    let ident: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { C64::new(1.0, 0.0) } else { ZERO })
                .collect()
        })
        .collect();
    let mut vecs = Vec::with_capacity(n);
    refine(&[&h_re, &h_im, &h_re], 0, ident, &mut vecs)?;
    let values = vecs
        .iter()
        .map(|v| {
            let mv = m.mul_vec(v);
            v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
        })
        .collect();
    Ok((values, vecs))
}

/// Diagonalize parts[level] on span(basis); split into clusters and recurse.
fn refine(
    parts: &[&CMat],
    level: usize,
    basis: Vec<Vec<C64>>,
    out: &mut Vec<Vec<C64>>,
) -> Result<()> {
    let k = basis.len();
    if k == 1 {
        out.push(basis.into_iter().next().unwrap());
        return Ok(());
    }
    if level == parts.len() {
        out.extend(basis);
        return Ok(());
    }
    let a = parts[level];
    // compressed matrix B = V† A V
    let av: Vec<Vec<C64>> = basis.iter().map(|v| a.mul_vec(v)).collect();
    let mut b = CMat::zeros(k);
    for i in 0..k {
        for j in 0..k {
            b[(i, j)] = basis[i].iter().zip(&av[j]).map(|(x, y)| x.conj() * y).sum();
        }
    }
    let (evals, w) = jacobi_hermitian(&b)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| evals[x].total_cmp(&evals[y]));
    let n = basis[0].len();
    let rotated: Vec<Vec<C64>> = order
        .iter()
        .map(|&c| {
            let mut v = vec![ZERO; n];
            for (r, bv) in basis.iter().enumerate() {
                let coef = w[(r, c)];
                for (x, y) in v.iter_mut().zip(bv) {
                    *x += coef * y;
                }
            }
            v
        })
        .collect();
    let last = level + 1 == parts.len();
    let mut start = 0;
    for i in 1..=k {
        let split = i == k || last || evals[order[i]] - evals[order[i - 1]] > PART_CLUSTER_TOL;
        if split {
            refine(parts, level + 1, rotated[start..i].to_vec(), out)?;
            start = i;
        }
    }
    Ok(())
}

/// Cyclic Jacobi for a Hermitian matrix: (eigenvalues, unitary V with A V = V diag).
pub fn jacobi_hermitian(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = h.dim();
    // drop the rounding-level anti-Hermitian part, which rotations cannot remove
    let mut a = (h + &h.adjoint()).scale(C64::new(0.5, 0.0));
    let mut v = CMat::identity(n);
    let fro: f64 = a.as_slice().iter().map(|x| x.norm_sqr()).sum::<f64>();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= 1e-30 * fro || off == 0.0 {
            let vals = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((vals, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ph = phase.conj();
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = ph * (-s);
                let jqq = ph * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    Err(WalkError::ConvergenceFailure(MAX_SWEEPS))
}

/// Group eigenpairs whose values lie within `group_tol` (single linkage).
pub fn eigensystem(m: &CMat, group_tol: f64) -> Result<FloquetEigen> {
    let (values, vecs) = eigenpairs(m)?;
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() < group_tol {
                let (a, b) = (label[i], label[j]);
                if a != b {
                    for l in label.iter_mut() {
                        if *l == b {
                            *l = a;
                        }
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..n {
        if let Some(pos) = seen.iter().position(|&l| l == label[i]) {
            groups[pos].push(i);
        } else {
            seen.push(label[i]);
            groups.push(vec![i]);
        }
    }
    let mut items: Vec<(C64, CMat, usize)> = groups
        .into_iter()
        .map(|g| {
            let mut p = CMat::zeros(m.dim());
            let mut val = ZERO;
            for &i in &g {
                p = &p + &CMat::outer(&vecs[i], &vecs[i]);
                val += values[i];
            }
            val /= g.len() as f64;
            (val, p, g.len())
        })
        .collect();
    items.sort_by(|a, b| angle01(a.0).total_cmp(&angle01(b.0)));
    Ok(FloquetEigen {
        theta: Vec::new(),
        values: items.iter().map(|x| x.0).collect(),
        multiplicities: items.iter().map(|x| x.2).collect(),
        projections: items.into_iter().map(|x| x.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(m: &CMat, e: &FloquetEigen) {
        let n = m.dim();
        let mut sum = CMat::zeros(n);
        let mut recon = CMat::zeros(n);
        for (v, p) in e.values.iter().zip(&e.projections) {
            assert!((v.norm() - 1.0).abs() < 1e-10);
            assert!((&(p * p) - p).max_abs() < 1e-10);
            assert!((&p.adjoint() - p).max_abs() < 1e-10);
            sum = &sum + p;
            recon = &recon + &p.scale(*v);
        }
        assert!((&sum - &CMat::identity(n)).max_abs() < 1e-10);
        assert!((&recon - m).max_abs() < 1e-9);
    }

    #[test]
    fn hadamard_coin_eigenvalues() {
        let s = 0.5f64.sqrt();
        let m = CMat::from_real_rows(2, &[s, s, s, -s]);
        let e = eigensystem(&m, 1e-9).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e.values[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((e.values[1] - C64::new(-1.0, 0.0)).norm() < 1e-12);
        check_decomposition(&m, &e);
    }

    #[test]
    fn grover_coin_multiplicity() {
        let m = CMat::from_real_rows(3, &[-1.0, 2.0, 2.0, 2.0, -1.0, 2.0, 2.0, 2.0, -1.0])
            .scale(C64::new(1.0 / 3.0, 0.0));
        let e = eigensystem(&m, 1e-9).unwrap();
        assert_eq!(e.multiplicities, vec![1, 2]);
        check_decomposition(&m, &e);
    }

    #[test]
    fn conjugate_pair_with_equal_real_part() {
        let a = 0.3;
        let m = CMat::diag(&[
            C64::from_polar(1.0, a),
            C64::from_polar(1.0, -a),
            C64::new(1.0, 0.0),
        ]);
        let e = eigensystem(&m, 1e-9).unwrap();
        assert_eq!(e.len(), 3);
        check_decomposition(&m, &e);
    }

    #[test]
    fn near_degenerate_real_parts_are_separated() {
        // equal imaginary parts, real parts 1e-7 apart
        let x = 0.6f64;
        let y1 = (1.0 - x * x).sqrt();
        let x2 = x + 1e-7;
        let y2 = (1.0 - x2 * x2).sqrt();
        let d = CMat::diag(&[C64::new(x, y1), C64::new(x2, y2)]);
        let s = 0.5f64.sqrt();
        let u = CMat::from_rows(
            2,
            vec![
                C64::new(s, 0.0),
                C64::new(0.0, s),
                C64::new(0.0, s),
                C64::new(s, 0.0),
            ],
        );
        let m = &(&u * &d) * &u.adjoint();
        let e = eigensystem(&m, 1e-9).unwrap();
        assert_eq!(e.len(), 2);
        check_decomposition(&m, &e);
    }
}
