//! Homogeneous finite-range walks: coefficient tables, algebraic unitarity,
//! Floquet matrices and Laurent characteristic polynomials.

pub mod expr;
pub mod laurent;

pub use laurent::{laurent_charpoly, LaurentPoly};

use crate::error::{Result, WalkError};
use crate::linalg::{self, CMat, ZERO};
use num_complex::Complex64 as C64;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;

/// Entries below this modulus are treated as structural zeros.
pub const PRUNE_TOL: f64 = 1e-14;
/// Entrywise tolerance of the convolution unitarity identity.
pub const UNITARITY_TOL: f64 = 1e-12;

/// A point of Z^d.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zero(d: usize) -> Self {
        LatticeVector(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn max_norm(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn dot_frac(&self, theta: &[f64]) -> f64 {
        self.0.iter().zip(theta).map(|(&p, &t)| p as f64 * t).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

impl std::ops::Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl std::ops::Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl std::ops::Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<i64> for LatticeVector {
    fn from(x: i64) -> Self {
        LatticeVector(vec![x])
    }
}

impl From<[i64; 2]> for LatticeVector {
    fn from(x: [i64; 2]) -> Self {
        LatticeVector(x.to_vec())
    }
}

/// One entry U_{i,j}(p) of a coefficient table (spins are 0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct Amplitude {
    pub row: usize,
    pub col: usize,
    pub jump: LatticeVector,
    pub value: C64,
}

/// A validated homogeneous walk U = Σ_p U(p) S_p with ν×ν blocks U(p).
#[derive(Clone, Debug, PartialEq)]
pub struct WalkSpec {
    d: usize,
    nu: usize,
    coeffs: BTreeMap<LatticeVector, CMat>,
}

/// Validate a coefficient table and build the walk.
pub fn build_walk(d: usize, nu: usize, table: &[Amplitude]) -> Result<WalkSpec> {
    if d == 0 || nu == 0 {
        return Err(WalkError::DimensionMismatch(
            "d and nu must be positive".into(),
        ));
    }
    let mut coeffs: BTreeMap<LatticeVector, CMat> = BTreeMap::new();
    for a in table {
        if a.jump.dim() != d {
            return Err(WalkError::DimensionMismatch(format!(
                "jump {} has {} components, expected {d}",
                a.jump,
                a.jump.dim()
            )));
        }
        if a.row >= nu || a.col >= nu {
            return Err(WalkError::DimensionMismatch(format!(
                "spin index ({},{}) outside 0..{nu}",
                a.row, a.col
            )));
        }
        let m = coeffs
            .entry(a.jump.clone())
            .or_insert_with(|| CMat::zeros(nu));
        m[(a.row, a.col)] += a.value;
    }
    WalkSpec::from_blocks(d, nu, coeffs)
}

impl WalkSpec {
    /// Build from jump → block map, pruning zeros and checking unitarity.
    pub fn from_blocks(d: usize, nu: usize, blocks: BTreeMap<LatticeVector, CMat>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (p, mut m) in blocks {
            if p.dim() != d || m.dim() != nu {
                return Err(WalkError::DimensionMismatch(format!(
                    "block at {p} has wrong shape"
                )));
            }
            for i in 0..nu {
                for j in 0..nu {
                    if m[(i, j)].norm() < PRUNE_TOL {
                        m[(i, j)] = ZERO;
                    }
                }
            }
            if !m.is_zero(0.0) {
                coeffs.insert(p, m);
            }
        }
        if coeffs.is_empty() {
            return Err(WalkError::InvalidParams(
                "walk has no nonzero amplitude".into(),
            ));
        }
        let w = WalkSpec { d, nu, coeffs };
        let (q, err) = w.unitarity_residual();
        if err > UNITARITY_TOL {
            return Err(WalkError::UnitarityViolation {
                q: q.0,
                max_err: err,
            });
        }
        Ok(w)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Jump set F.
    pub fn support(&self) -> impl Iterator<Item = &LatticeVector> {
        self.coeffs.keys()
    }

    pub fn blocks(&self) -> &BTreeMap<LatticeVector, CMat> {
        &self.coeffs
    }

    /// Max-norm radius R of F.
    pub fn range(&self) -> i64 {
        self.coeffs.keys().map(|p| p.max_norm()).max().unwrap_or(0)
    }

    /// Flat amplitude table (round-trips through `build_walk`).
    pub fn table(&self) -> Vec<Amplitude> {
        let mut out = Vec::new();
        for (p, m) in &self.coeffs {
            for i in 0..self.nu {
                for j in 0..self.nu {
                    if m[(i, j)] != ZERO {
                        out.push(Amplitude {
                            row: i,
                            col: j,
                            jump: p.clone(),
                            value: m[(i, j)],
                        });
                    }
                }
            }
        }
        out
    }

    /// Worst violation of Σ_p U(p)† U(p+q) = δ_{q,0} I over all jump differences q.
    pub fn unitarity_residual(&self) -> (LatticeVector, f64) {
        let jumps: Vec<&LatticeVector> = self.coeffs.keys().collect();
        let mut diffs: BTreeSet<LatticeVector> = BTreeSet::new();
        for a in &jumps {
            for b in &jumps {
                diffs.insert(*b - *a);
            }
        }
        let mut worst = (LatticeVector::zero(self.d), 0.0);
        for q in diffs {
            let mut acc = CMat::zeros(self.nu);
            for (p, m) in &self.coeffs {
                if let Some(m2) = self.coeffs.get(&(p + &q)) {
                    acc = &acc + &(&m.adjoint() * m2);
                }
            }
            if q.is_zero() {
                acc = &acc - &CMat::identity(self.nu);
            }
            let e = acc.max_abs();
            if e > worst.1 {
                worst = (q, e);
            }
        }
        worst
    }

    /// Û(θ) with entries Σ_p U_{ij}(p) e^{−2πiθ·p}.
    pub fn floquet_matrix(&self, theta: &[f64]) -> CMat {
        assert_eq!(theta.len(), self.d, "theta must have d components");
        let mut out = CMat::zeros(self.nu);
        for (p, m) in &self.coeffs {
            let ph = p.dot_frac(theta);
            let ph = ph - ph.floor();
            let z = C64::from_polar(1.0, -TAU * ph);
            out = &out + &m.scale(z);
        }
        out
    }

    /// Û(r/N) with phases reduced exactly in integer arithmetic.
    pub fn floquet_at_node(&self, r: &[i64], n: i64) -> CMat {
        let mut out = CMat::zeros(self.nu);
        for (p, m) in &self.coeffs {
            let k: i64 =
                p.0.iter()
                    .zip(r)
                    .map(|(a, b)| a * b)
                    .sum::<i64>()
                    .rem_euclid(n);
            let z = unit_root(-k, n);
            out = &out + &m.scale(z);
        }
        out
    }

    /// Operator product self ∘ other (apply `other` first).
    pub fn compose(&self, other: &WalkSpec) -> Result<WalkSpec> {
        if self.d != other.d || self.nu != other.nu {
            return Err(WalkError::DimensionMismatch(
                "compose needs equal d and nu".into(),
            ));
        }
        let mut out: BTreeMap<LatticeVector, CMat> = BTreeMap::new();
        for (p1, a) in &self.coeffs {
            for (p2, b) in &other.coeffs {
                let e = out.entry(p1 + p2).or_insert_with(|| CMat::zeros(self.nu));
                *e = &*e + &(a * b);
            }
        }
        WalkSpec::from_blocks(self.d, self.nu, out)
    }

    /// Separable walk on Z^{d1+d2} with spin space C^{ν1} ⊗ C^{ν2}.
    pub fn tensor(&self, other: &WalkSpec) -> Result<WalkSpec> {
        let mut out: BTreeMap<LatticeVector, CMat> = BTreeMap::new();
        for (p1, a) in &self.coeffs {
            for (p2, b) in &other.coeffs {
                let mut p = p1.0.clone();
                p.extend_from_slice(&p2.0);
                out.insert(LatticeVector(p), linalg::kron(a, b));
            }
        }
        WalkSpec::from_blocks(self.d + other.d, self.nu * other.nu, out)
    }

    /// Block-diagonal sum of walks on the same lattice.
    pub fn direct_sum(parts: &[&WalkSpec]) -> Result<WalkSpec> {
        let d = parts
            .first()
            .ok_or_else(|| WalkError::InvalidParams("empty direct sum".into()))?
            .d;
        if parts.iter().any(|w| w.d != d) {
            return Err(WalkError::DimensionMismatch(
                "direct sum needs equal d".into(),
            ));
        }
        let nu: usize = parts.iter().map(|w| w.nu).sum();
        let jumps: BTreeSet<LatticeVector> = parts
            .iter()
            .flat_map(|w| w.coeffs.keys().cloned())
            .collect();
        let mut out = BTreeMap::new();
        for p in jumps {
            let blocks: Vec<CMat> = parts
                .iter()
                .map(|w| {
                    w.coeffs
                        .get(&p)
                        .cloned()
                        .unwrap_or_else(|| CMat::zeros(w.nu))
                })
                .collect();
            let refs: Vec<&CMat> = blocks.iter().collect();
            out.insert(p, linalg::direct_sum(&refs));
        }
        WalkSpec::from_blocks(d, nu, out)
    }
}

/// Coordinates of flat index `idx` in L_N^d (first coordinate varies slowest).
pub fn box_coords(idx: usize, n: usize, d: usize) -> Vec<i64> {
    let mut c = vec![0i64; d];
    let mut rest = idx;
    for k in (0..d).rev() {
        c[k] = (rest % n) as i64;
        rest /= n;
    }
    c
}

/// Flat index of a lattice point reduced mod N.
pub fn box_index(coords: &[i64], n: usize) -> usize {
    coords
        .iter()
        .fold(0usize, |acc, &x| acc * n + x.rem_euclid(n as i64) as usize)
}

/// e^{2πi k/n} with the angle reduced in integers.
pub fn unit_root(k: i64, n: i64) -> C64 {
    let k = k.rem_euclid(n);
    C64::from_polar(1.0, TAU * (k as f64) / (n as f64))
}

/// Pure shift S_p on ν=1.
pub fn shift(p: LatticeVector) -> Result<WalkSpec> {
    let d = p.dim();
    build_walk(
        d,
        1,
        &[Amplitude {
            row: 0,
            col: 0,
            jump: p,
            value: linalg::ONE,
        }],
    )
}

/// Constant (position-independent) coin C ⊗ I.
pub fn coin(d: usize, c: &CMat) -> Result<WalkSpec> {
    let mut m = BTreeMap::new();
    m.insert(LatticeVector::zero(d), c.clone());
    WalkSpec::from_blocks(d, c.dim(), m)
}

/// Spin-dependent shift diag(S_{p_1}, ..., S_{p_ν}).
pub fn spin_shift(jumps: &[LatticeVector]) -> Result<WalkSpec> {
    let d = jumps.first().map(|p| p.dim()).unwrap_or(1);
    let table: Vec<Amplitude> = jumps
        .iter()
        .enumerate()
        .map(|(i, p)| Amplitude {
            row: i,
            col: i,
            jump: p.clone(),
            value: linalg::ONE,
        })
        .collect();
    build_walk(d, jumps.len(), &table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn had_table(u22: f64) -> Vec<Amplitude> {
        let s = 0.5f64.sqrt();
        let a = |row, col, p: i64, v: f64| Amplitude {
            row,
            col,
            jump: LatticeVector(vec![p]),
            value: C64::new(v, 0.0),
        };
        vec![
            a(0, 0, -1, s),
            a(0, 1, -1, s),
            a(1, 0, 1, s),
            a(1, 1, 1, u22 * s),
        ]
    }

    #[test]
    fn hadamard_builds_and_floquet_at_zero() {
        let w = build_walk(1, 2, &had_table(-1.0)).unwrap();
        let f: Vec<i64> = w.support().map(|p| p.0[0]).collect();
        assert_eq!(f, vec![-1, 1]);
        let m = w.floquet_matrix(&[0.0]);
        let s = 0.5f64.sqrt();
        let expect = CMat::from_real_rows(2, &[s, s, s, -s]);
        assert!((&m - &expect).max_abs() < 1e-15);
    }

    #[test]
    fn sign_flip_breaks_unitarity_at_q0() {
        match build_walk(1, 2, &had_table(1.0)) {
            Err(WalkError::UnitarityViolation { q, max_err }) => {
                assert_eq!(q, vec![0]);
                assert!((max_err - 1.0).abs() < 1e-12);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let t = vec![Amplitude {
            row: 0,
            col: 0,
            jump: LatticeVector(vec![1, 0]),
            value: linalg::ONE,
        }];
        assert!(matches!(
            build_walk(1, 1, &t),
            Err(WalkError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pure_shift_symbol() {
        let w = shift(LatticeVector(vec![1])).unwrap();
        let th = 0.3;
        let m = w.floquet_matrix(&[th]);
        assert!((m[(0, 0)] - C64::from_polar(1.0, -TAU * th)).norm() < 1e-15);
        let node = w.floquet_at_node(&[3], 10);
        assert!((node[(0, 0)] - m[(0, 0)]).norm() < 1e-15);
    }

    #[test]
    fn compose_matches_symbol_product() {
        let s = 0.5f64.sqrt();
        let h = coin(1, &CMat::from_real_rows(2, &[s, s, s, -s])).unwrap();
        let sh = spin_shift(&[LatticeVector(vec![-1]), LatticeVector(vec![1])]).unwrap();
        let w = sh.compose(&h).unwrap();
        let had = build_walk(1, 2, &had_table(-1.0)).unwrap();
        assert_eq!(w, had);
    }
}
