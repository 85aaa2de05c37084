//! Root-of-unity shift invariances p(ζz, λ) ∝ p(z, λ) of a Laurent characteristic polynomial.

use crate::walk_core::LaurentPoly;
use num_complex::Complex64 as C64;
use num_integer::Integer;

/// Coefficient tolerance for invariance.
pub const ZETA_TOL: f64 = 1e-10;

/// A root of unity e^{2πi p/q}, reduced with 0 ≤ p < q.
pub type Root = (i64, i64);

/// All roots of unity of order ≤ q_max.
pub fn roots_upto(q_max: i64) -> Vec<Root> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        for p in 0..q {
            if p.gcd(&q) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// max |b − κa| with κ fixed by the largest coefficient of a.
pub fn proportional_residual(a: &LaurentPoly, b: &LaurentPoly) -> f64 {
    let Some((key, ca)) = a
        .terms()
        .iter()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
    else {
        return if b.is_zero() { 0.0 } else { f64::INFINITY };
    };
    let kappa = b.coeff(&key.0, key.1) / ca;
    b.max_diff(&a.scale(kappa))
}

/// Every ζ ≠ (1,…,1) with root-of-unity components of order ≤ q_max leaving p invariant
/// up to a constant factor.
pub fn zeta_shift_invariances(p: &LaurentPoly, q_max: i64) -> Vec<Vec<Root>> {
    let roots = roots_upto(q_max);
    let d = p.d();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let zeta: Vec<Root> = idx.iter().map(|&i| roots[i]).collect();
        if zeta.iter().any(|r| r.0 != 0) {
            let shifted = p.zeta_substitute(&zeta);
            if proportional_residual(p, &shifted) < ZETA_TOL {
                out.push(zeta);
            }
        }
        // odometer over roots^d
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < roots.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    out.sort();
    out
}

/// ζ as complex numbers.
pub fn zeta_values(zeta: &[Root]) -> Vec<C64> {
    zeta.iter()
        .map(|&(p, q)| C64::from_polar(1.0, std::f64::consts::TAU * p as f64 / q as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_count() {
        assert_eq!(roots_upto(8).len(), 22);
    }

    #[test]
    fn even_polynomial_has_minus_one_shift() {
        let one = C64::new(1.0, 0.0);
        let p = LaurentPoly::from_terms(
            2,
            vec![
                ((vec![0, 0], 2), one),
                ((vec![2, 0], 1), one),
                ((vec![0, 2], 1), one),
                ((vec![0, 0], 0), one),
            ],
        );
        let z = zeta_shift_invariances(&p, 8);
        assert!(z.contains(&vec![(1, 2), (1, 2)]));
        assert!(z.contains(&vec![(1, 2), (0, 1)]));
    }
}
