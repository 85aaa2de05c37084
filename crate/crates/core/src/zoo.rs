//! Named walk models and the one-dimensional regime classification.

use crate::error::{Result, WalkError};
use crate::linalg::{CMat, ONE, ZERO};
use crate::spectra::{compute_m, detect_flat_bands, detect_phase_relations, PhaseRelation};
use crate::walk_core::{coin, spin_shift, unit_root, LatticeVector, WalkSpec};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::fmt;

const PARAM_TOL: f64 = 1e-12;

/// Parameters of a zoo model. Coins are row-major (a, b; c, d).
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Hadamard,
    Grover,
    /// diag(S_1, S_{−2}).
    Example39,
    /// [[a S_{−α}, b S_{−α}], [c S_β, d S_β]].
    Coined {
        coin: [C64; 4],
        alpha: i64,
        beta: i64,
    },
    /// diag(a S_{−α}, d S_β); signed steps allowed.
    Diagonal {
        a: C64,
        d: C64,
        alpha: i64,
        beta: i64,
    },
    /// [[0, b S_{−α}], [c S_β, 0]].
    Antidiagonal {
        b: C64,
        c: C64,
        alpha: i64,
        beta: i64,
    },
    /// diag(S_α, 1) C diag(1, S_{−β}) C with C = [[−t, r], [r, t]].
    SplitStep {
        r: f64,
        t: f64,
        alpha: i64,
        beta: i64,
    },
    /// Flip · diag(S_{−1}, S_1) · C on Z.
    ArcReversal {
        coin: [C64; 4],
    },
    /// Standard PUTO walk on Z² with the 4×4 Fourier coin.
    Fourier2d,
    PutoStd {
        d: usize,
        coin: CMat,
    },
    PutoLazy {
        d: usize,
        coin: CMat,
    },
    Tensor(Box<Model>, Box<Model>),
    /// 1D walks, the i-th acting along e_i.
    DirectSum(Vec<Model>),
    /// S^(y) C S^(x) C on Z² with S^(x) = diag(S_{e1}, S_{−e1}).
    Dfmb {
        coin: [C64; 4],
    },
    Shift(LatticeVector),
    Custom(WalkSpec),
}

fn coin2(c: &[C64; 4]) -> CMat {
    CMat::from_rows(2, c.to_vec())
}

fn check_unitary(c: &CMat, what: &str) -> Result<()> {
    let err = (&(&c.adjoint() * c) - &CMat::identity(c.dim())).max_abs();
    if err > PARAM_TOL {
        return Err(WalkError::InvalidParams(format!(
            "{what} coin is not unitary (error {err:.3e})"
        )));
    }
    Ok(())
}

fn positive_steps(alpha: i64, beta: i64) -> Result<()> {
    if alpha < 1 || beta < 1 {
        return Err(WalkError::InvalidParams(format!(
            "step sizes must be >= 1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    Ok(())
}

fn lv1(x: i64) -> LatticeVector {
    LatticeVector(vec![x])
}

/// Unit vector ±e_axis in Z^d.
fn unit(d: usize, axis: usize, sign: i64) -> LatticeVector {
    let mut v = vec![0; d];
    v[axis] = sign;
    LatticeVector(v)
}

/// Walk whose row i carries the single jump `rows[i]` with amplitudes c_{i,·}.
fn row_shift_walk(c: &CMat, rows: &[LatticeVector]) -> Result<WalkSpec> {
    let nu = c.dim();
    let d = rows[0].dim();
    let mut blocks: BTreeMap<LatticeVector, CMat> = BTreeMap::new();
    for (i, p) in rows.iter().enumerate() {
        let m = blocks.entry(p.clone()).or_insert_with(|| CMat::zeros(nu));
        for j in 0..nu {
            m[(i, j)] = c[(i, j)];
        }
    }
    WalkSpec::from_blocks(d, nu, blocks)
}

/// Grover coin (2/ν)J − I.
pub fn grover_coin(nu: usize) -> CMat {
    let mut m = CMat::identity(nu).scale(C64::new(-1.0, 0.0));
    for i in 0..nu {
        for j in 0..nu {
            m[(i, j)] += C64::new(2.0 / nu as f64, 0.0);
        }
    }
    m
}

/// Fourier coin ν^{−1/2} ω^{(p−1)(q−1)}.
pub fn fourier_coin(nu: usize) -> CMat {
    let s = 1.0 / (nu as f64).sqrt();
    let data = (0..nu * nu)
        .map(|k| unit_root(((k / nu) * (k % nu)) as i64, nu as i64) * s)
        .collect();
    CMat::from_rows(nu, data)
}

/// Embed a 1D walk along axis `axis` of Z^d.
pub fn embed_axis(walk: &WalkSpec, d: usize, axis: usize) -> Result<WalkSpec> {
    if walk.d() != 1 || axis >= d {
        return Err(WalkError::DimensionMismatch(
            "embedding needs a 1D walk and axis < d".into(),
        ));
    }
    let blocks = walk
        .blocks()
        .iter()
        .map(|(p, m)| {
            let mut v = vec![0; d];
            v[axis] = p.0[0];
            (LatticeVector(v), m.clone())
        })
        .collect();
    WalkSpec::from_blocks(d, walk.nu(), blocks)
}

/// Build the walk for a parameter set.
pub fn make_model(model: &Model) -> Result<WalkSpec> {
    let s = 0.5f64.sqrt();
    match model {
        Model::Hadamard => {
            let h = CMat::from_real_rows(2, &[s, s, s, -s]);
            row_shift_walk(&h, &[lv1(-1), lv1(1)])
        }
        Model::Grover => row_shift_walk(&grover_coin(3), &[lv1(-1), lv1(0), lv1(1)]),
        Model::Example39 => spin_shift(&[lv1(1), lv1(-2)]),
        Model::Coined { coin, alpha, beta } => {
            positive_steps(*alpha, *beta)?;
            let c = coin2(coin);
            check_unitary(&c, "coined")?;
            row_shift_walk(&c, &[lv1(-alpha), lv1(*beta)])
        }
        Model::Diagonal { a, d, alpha, beta } => {
            let c = CMat::diag(&[*a, *d]);
            check_unitary(&c, "diagonal")?;
            row_shift_walk(&c, &[lv1(-alpha), lv1(*beta)])
        }
        Model::Antidiagonal { b, c, alpha, beta } => {
            positive_steps(*alpha, *beta)?;
            let m = CMat::from_rows(2, vec![ZERO, *b, *c, ZERO]);
            check_unitary(&m, "anti-diagonal")?;
            row_shift_walk(&m, &[lv1(-alpha), lv1(*beta)])
        }
        Model::SplitStep { r, t, alpha, beta } => {
            positive_steps(*alpha, *beta)?;
            if (r * r + t * t - 1.0).abs() > PARAM_TOL {
                return Err(WalkError::InvalidParams(format!(
                    "split-step needs r^2 + t^2 = 1, got {}",
                    r * r + t * t
                )));
            }
            let c = coin(1, &CMat::from_real_rows(2, &[-t, *r, *r, *t]))?;
            let s1 = spin_shift(&[lv1(*alpha), lv1(0)])?;
            let s2 = spin_shift(&[lv1(0), lv1(-beta)])?;
            s1.compose(&c)?.compose(&s2)?.compose(&c)
        }
        Model::ArcReversal { coin: cf } => {
            let c = coin2(cf);
            check_unitary(&c, "arc-reversal")?;
            let flip = CMat::from_rows(2, vec![ZERO, ONE, ONE, ZERO]);
            row_shift_walk(&(&flip * &c), &[lv1(1), lv1(-1)])
        }
        Model::Fourier2d => make_model(&Model::PutoStd {
            d: 2,
            coin: fourier_coin(4),
        }),
        Model::PutoStd { d, coin: c } => {
            if *d == 0 || c.dim() != 2 * d {
                return Err(WalkError::InvalidParams(format!(
                    "standard PUTO needs a {0}x{0} coin",
                    2 * d
                )));
            }
            check_unitary(c, "PUTO")?;
            let rows: Vec<LatticeVector> = (0..2 * d)
                .map(|i| {
                    if i % 2 == 0 {
                        unit(*d, i / 2, 1)
                    } else {
                        unit(*d, i / 2, -1)
                    }
                })
                .collect();
            row_shift_walk(c, &rows)
        }
        Model::PutoLazy { d, coin: c } => {
            if *d == 0 || c.dim() != 2 * d + 1 {
                return Err(WalkError::InvalidParams(format!(
                    "lazy PUTO needs a {0}x{0} coin",
                    2 * d + 1
                )));
            }
            check_unitary(c, "PUTO")?;
            let rows: Vec<LatticeVector> = (0..2 * d + 1)
                .map(|i| match i.cmp(d) {
                    std::cmp::Ordering::Less => unit(*d, i, 1),
                    std::cmp::Ordering::Equal => LatticeVector::zero(*d),
                    std::cmp::Ordering::Greater => unit(*d, i - d - 1, -1),
                })
                .collect();
            row_shift_walk(c, &rows)
        }
        Model::Tensor(a, b) => make_model(a)?.tensor(&make_model(b)?),
        Model::DirectSum(parts) => {
            let d = parts.len();
            let walks: Vec<WalkSpec> = parts
                .iter()
                .enumerate()
                .map(|(i, m)| embed_axis(&make_model(m)?, d, i))
                .collect::<Result<_>>()?;
            let refs: Vec<&WalkSpec> = walks.iter().collect();
            WalkSpec::direct_sum(&refs)
        }
        Model::Dfmb { coin: cf } => {
            let c = coin2(cf);
            check_unitary(&c, "DFMB")?;
            let c = coin(2, &c)?;
            let sx = spin_shift(&[unit(2, 0, 1), unit(2, 0, -1)])?;
            let sy = spin_shift(&[unit(2, 1, 1), unit(2, 1, -1)])?;
            sy.compose(&c)?.compose(&sx)?.compose(&c)
        }
        Model::Shift(p) => crate::walk_core::shift(p.clone()),
        Model::Custom(w) => Ok(w.clone()),
    }
}

/// Spectral regime of a 1D walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Nrg,
    NoFlatBandsRelationsPresent,
    FlatBand,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Nrg => "NRG",
            Regime::NoFlatBandsRelationsPresent => "NoFlatBands+RelationsPresent",
            Regime::FlatBand => "FlatBand",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub regime: Regime,
    pub flat_bands: Vec<C64>,
    /// ξ = 0 relations with φ > 0.
    pub relations: Vec<PhaseRelation>,
    pub m: i64,
    /// Statements implied by the regime (not verified dynamically).
    pub implications: Vec<&'static str>,
}

/// Settings used by `classify`.
#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub flat_grid: usize,
    pub flat_tol: f64,
    pub q_max: usize,
    pub relation_grid: usize,
    pub relation_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            flat_grid: 64,
            flat_tol: 1e-8,
            q_max: 8,
            relation_grid: 256,
            relation_tol: 1e-8,
        }
    }
}

pub fn classify(walk: &WalkSpec) -> Result<Classification> {
    classify_with(walk, &ClassifyOptions::default())
}

pub fn classify_with(walk: &WalkSpec, opt: &ClassifyOptions) -> Result<Classification> {
    if walk.d() != 1 {
        return Err(WalkError::DimensionMismatch("classify needs d = 1".into()));
    }
    let flat_bands = detect_flat_bands(walk, opt.flat_grid, opt.flat_tol)?;
    if !flat_bands.is_empty() {
        return Ok(Classification {
            regime: Regime::FlatBand,
            flat_bands,
            relations: Vec::new(),
            m: 1,
            implications: vec![
                "position ergodicity fails for regular observables",
                "a compactly supported eigenvector exists",
            ],
        });
    }
    let report = detect_phase_relations(walk, opt.q_max, opt.relation_grid, opt.relation_tol)?;
    let relations: Vec<PhaseRelation> = report.xi_zero().into_iter().filter(|r| r.p > 0).collect();
    let m = compute_m(&relations);
    if relations.is_empty() {
        Ok(Classification {
            regime: Regime::Nrg,
            flat_bands,
            relations,
            m,
            implications: vec![
                "full quantum ergodicity for bounded observables",
                "position ergodicity for regular observables",
            ],
        })
    } else {
        Ok(Classification {
            regime: Regime::NoFlatBandsRelationsPresent,
            flat_bands,
            relations,
            m,
            implications: vec![
                "position ergodicity for regular observables",
                "full quantum ergodicity along N = nM + k with gcd(M, k) = 1",
                "equidistribution on residue classes mod M along N = nM + k",
            ],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn hadamard_floquet_at_zero() {
        let w = make_model(&Model::Hadamard).unwrap();
        let s = 0.5f64.sqrt();
        let m = w.floquet_matrix(&[0.0]);
        assert!((&m - &CMat::from_real_rows(2, &[s, s, s, -s])).max_abs() < 1e-15);
    }

    #[test]
    fn grover_floquet_at_zero() {
        let w = make_model(&Model::Grover).unwrap();
        let m = w.floquet_matrix(&[0.0]);
        assert!((&m - &grover_coin(3)).max_abs() < 1e-15);
    }

    #[test]
    fn split_step_matches_expanded_form() {
        let (r, t) = (0.6, 0.8);
        let w = make_model(&Model::SplitStep {
            r,
            t,
            alpha: 2,
            beta: 3,
        })
        .unwrap();
        let th = 0.17;
        let e = |k: f64| C64::from_polar(1.0, std::f64::consts::TAU * k * th);
        // row 1: r² S_{α−β} + t² S_α, rt S_{α−β} − rt S_α; row 2: rt S_{−β} − rt, r² + t² S_{−β}
        let expect = CMat::from_rows(
            2,
            vec![
                e(1.0) * (r * r) + e(-2.0) * (t * t),
                e(1.0) * (r * t) - e(-2.0) * (r * t),
                e(3.0) * (r * t) - r * t,
                c(r * r) + e(3.0) * (t * t),
            ],
        );
        assert!((&w.floquet_matrix(&[th]) - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn fourier_rows_carry_axis_shifts() {
        let w = make_model(&Model::Fourier2d).unwrap();
        assert_eq!(w.nu(), 4);
        let th = [0.1, 0.3];
        let m = w.floquet_matrix(&th);
        let z1 = C64::from_polar(1.0, -std::f64::consts::TAU * 0.1);
        assert!((m[(0, 0)] - z1 * 0.5).norm() < 1e-15);
        assert!((m[(1, 1)] - C64::new(0.0, 0.5) * z1.conj()).norm() < 1e-15);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(make_model(&Model::SplitStep {
            r: 0.5,
            t: 0.5,
            alpha: 1,
            beta: 1
        })
        .is_err());
        assert!(make_model(&Model::Coined {
            coin: [c(1.0), c(1.0), c(1.0), c(1.0)],
            alpha: 1,
            beta: 1
        })
        .is_err());
        assert!(make_model(&Model::Antidiagonal {
            b: c(1.0),
            c: c(1.0),
            alpha: 0,
            beta: 1
        })
        .is_err());
    }

    #[test]
    fn composite_models_are_unitary() {
        let s = 0.5f64.sqrt();
        let had = [c(s), c(s), c(s), c(-s)];
        for m in [
            Model::Tensor(Box::new(Model::Hadamard), Box::new(Model::Grover)),
            Model::DirectSum(vec![Model::Hadamard, Model::Hadamard]),
            Model::Dfmb { coin: had },
            Model::ArcReversal { coin: had },
            Model::PutoLazy {
                d: 1,
                coin: grover_coin(3),
            },
        ] {
            make_model(&m).unwrap();
        }
    }
}
