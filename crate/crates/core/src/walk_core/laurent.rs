//! Laurent polynomials in z_1..z_d (integer exponents) and λ (non-negative degree).

use super::{WalkSpec, PRUNE_TOL};
use crate::error::{Result, WalkError};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Largest spin count for which the cofactor expansion is attempted.
pub const CHARPOLY_MAX_NU: usize = 8;

/// Monomial key: (z-exponents, λ-degree).
pub type Monomial = (Vec<i64>, u32);

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    d: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl LaurentPoly {
    pub fn zero(d: usize) -> Self {
        LaurentPoly {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: C64) -> Self {
        Self::monomial(d, vec![0; d], 0, c)
    }

    pub fn monomial(d: usize, z: Vec<i64>, lambda: u32, c: C64) -> Self {
        assert_eq!(z.len(), d);
        let mut p = Self::zero(d);
        p.terms.insert((z, lambda), c);
        p.prune();
        p
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Monomial, C64)>) -> Self {
        let mut p = Self::zero(d);
        for (k, c) in terms {
            assert_eq!(k.0.len(), d);
            *p.terms.entry(k).or_insert(C64::new(0.0, 0.0)) += c;
        }
        p.prune();
        p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C64> {
        &self.terms
    }

    pub fn coeff(&self, z: &[i64], lambda: u32) -> C64 {
        self.terms
            .get(&(z.to_vec(), lambda))
            .copied()
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lambda_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            *out.terms.entry(k.clone()).or_default() += c;
        }
        out.prune();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= s);
        out.prune();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.d);
        for ((za, la), ca) in &self.terms {
            for ((zb, lb), cb) in &other.terms {
                let z: Vec<i64> = za.iter().zip(zb).map(|(a, b)| a + b).collect();
                *out.terms.entry((z, la + lb)).or_default() += ca * cb;
            }
        }
        out.prune();
        out
    }

    /// Multiply by z^shift.
    pub fn shift_z(&self, shift: &[i64]) -> Self {
        LaurentPoly {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|((z, l), c)| ((z.iter().zip(shift).map(|(a, b)| a + b).collect(), *l), *c))
                .collect(),
        }
    }

    pub fn eval(&self, z: &[C64], lambda: C64) -> C64 {
        self.terms
            .iter()
            .map(|((e, l), c)| {
                let zp: C64 = e.iter().zip(z).map(|(&k, &zi)| zi.powi(k as i32)).product();
                c * zp * lambda.powu(*l)
            })
            .sum()
    }

    /// Evaluate at z = e^{2πiθ}.
    pub fn eval_theta(&self, theta: &[f64], lambda: C64) -> C64 {
        let z: Vec<C64> = theta
            .iter()
            .map(|t| C64::from_polar(1.0, TAU * t))
            .collect();
        self.eval(&z, lambda)
    }

    /// p(ζz, λ) for ζ_i = e^{2πi p_i/q_i}.
    pub fn zeta_substitute(&self, zeta: &[(i64, i64)]) -> Self {
        let mut out = self.clone();
        for ((z, _), c) in out.terms.iter_mut() {
            let mut ph = 0.0;
            for (e, (p, q)) in z.iter().zip(zeta) {
                ph += ((e * p).rem_euclid(*q)) as f64 / *q as f64;
            }
            *c *= C64::from_polar(1.0, TAU * ph.fract());
        }
        out
    }

    /// Largest coefficient difference to another polynomial.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<&Monomial> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.iter()
            .map(|k| {
                let a = self.terms.get(*k).copied().unwrap_or_default();
                let b = other.terms.get(*k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// det(Û(z) − λI) where Û(z)_{ij} = Σ_p U_{ij}(p) z^{−p}.
pub fn laurent_charpoly(walk: &WalkSpec) -> Result<LaurentPoly> {
    let nu = walk.nu();
    let d = walk.d();
    if nu > CHARPOLY_MAX_NU {
        return Err(WalkError::SizeLimit(format!(
            "charpoly cofactor expansion supports nu <= {CHARPOLY_MAX_NU}, got {nu}"
        )));
    }
    let mut entries = vec![LaurentPoly::zero(d); nu * nu];
    for (p, m) in walk.blocks() {
        let neg: Vec<i64> = p.0.iter().map(|x| -x).collect();
        for i in 0..nu {
            for j in 0..nu {
                if m[(i, j)].norm() > 0.0 {
                    let t = LaurentPoly::monomial(d, neg.clone(), 0, m[(i, j)]);
                    entries[i * nu + j] = entries[i * nu + j].add(&t);
                }
            }
        }
    }
    let minus_lambda = LaurentPoly::monomial(d, vec![0; d], 1, C64::new(-1.0, 0.0));
    for i in 0..nu {
        entries[i * nu + i] = entries[i * nu + i].add(&minus_lambda);
    }
    Ok(det_poly(nu, &entries))
}

/// Determinant by Laplace expansion memoized over column subsets.
fn det_poly(n: usize, a: &[LaurentPoly]) -> LaurentPoly {
    let d = a[0].d();
    // minors[mask] = det of rows 0..popcount(mask) restricted to columns in mask
    let mut minors: Vec<Option<LaurentPoly>> = vec![None; 1 << n];
    minors[0] = Some(LaurentPoly::constant(d, C64::new(1.0, 0.0)));
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = LaurentPoly::zero(d);
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let entry = &a[row * n + j];
            if entry.is_zero() {
                continue;
            }
            let rest = mask & !(1 << j);
            let minor = minors[rest].as_ref().unwrap();
            if minor.is_zero() {
                continue;
            }
            let above = (mask >> (j + 1)).count_ones();
            let term = entry.mul(minor);
            acc = if above % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        minors[mask] = Some(acc);
    }
    minors[(1 << n) - 1].take().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;

    #[test]
    fn det_poly_matches_numeric() {
        let d = 1;
        let c = |re: f64, im: f64| C64::new(re, im);
        let vals = [
            c(1.0, 2.0),
            c(0.5, 0.0),
            c(-1.0, 1.0),
            c(3.0, 0.0),
            c(0.0, -1.0),
            c(2.0, 2.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(-2.0, 0.5),
        ];
        let polys: Vec<LaurentPoly> = vals.iter().map(|&v| LaurentPoly::constant(d, v)).collect();
        let p = det_poly(3, &polys);
        let m = CMat::from_rows(3, vals.to_vec());
        assert!((p.coeff(&[0], 0) - m.det()).norm() < 1e-12);
    }

    #[test]
    fn zeta_substitution_scales_monomials() {
        let p = LaurentPoly::monomial(2, vec![1, 2], 0, C64::new(1.0, 0.0));
        let q = p.zeta_substitute(&[(1, 2), (1, 4)]);
        // (-1)^1 * i^2 = 1
        assert!((q.coeff(&[1, 2], 0) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
