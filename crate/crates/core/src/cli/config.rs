//! Experiment configuration: TOML documents, model strings, states and observables.

use super::CliError;
use crate::dynamics::CompactState;
use crate::ergodicity::Observable;
use crate::linalg::CMat;
use crate::walk_core::expr::{eval, eval_real};
use crate::walk_core::{build_walk, Amplitude, LatticeVector, WalkSpec};
use crate::zoo::{fourier_coin, grover_coin, make_model, Model};
use num_complex::Complex64 as C64;
use serde::Deserialize;
use std::path::{Path, PathBuf};

type Res<T> = std::result::Result<T, CliError>;

fn cfg<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError::Config(msg.into()))
}

/// A number given either literally or as an amplitude expression.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Expr(String),
}

impl Num {
    pub fn complex(&self) -> Res<C64> {
        match self {
            Num::Int(x) => Ok(C64::new(*x as f64, 0.0)),
            Num::Float(x) => Ok(C64::new(*x, 0.0)),
            Num::Expr(s) => Ok(eval(s)?),
        }
    }

    pub fn real(&self) -> Res<f64> {
        match self {
            Num::Int(x) => Ok(*x as f64),
            Num::Float(x) => Ok(*x),
            Num::Expr(s) => Ok(eval_real(s)?),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    /// 1-based.
    pub row: usize,
    pub col: usize,
    pub jump: Vec<i64>,
    pub value: Num,
}

/// `[walk]`: a zoo model with parameters, a custom table, or a file holding either.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    pub model: Option<String>,
    pub file: Option<PathBuf>,
    pub alpha: Option<i64>,
    pub beta: Option<i64>,
    /// Row-major coin entries.
    pub coin: Option<Vec<Num>>,
    pub a: Option<Num>,
    pub b: Option<Num>,
    pub c: Option<Num>,
    pub d: Option<Num>,
    pub r: Option<Num>,
    pub t: Option<Num>,
    /// Lattice dimension (PUTO models, custom tables).
    pub dim: Option<usize>,
    pub nu: Option<usize>,
    /// Jump of a pure shift.
    pub step: Option<Vec<i64>>,
    pub parts: Option<Vec<WalkConfig>>,
    pub table: Option<Vec<TableEntry>>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    /// Subsequence N = nM + k for n in n_range (inclusive).
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub n_range: Option<[usize; 2]>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub pos: Vec<i64>,
    /// 1-based.
    pub spin: usize,
    pub amp: Num,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub group_tol: Option<f64>,
    pub eig_tol: Option<f64>,
    pub flat_tol: Option<f64>,
    pub relation_tol: Option<f64>,
    pub quad_grid: Option<usize>,
    pub grid: Option<usize>,
    pub q_max: Option<usize>,
    pub zeta_q: Option<i64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
}

/// Whole configuration document.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub walk: Option<WalkConfig>,
    #[serde(rename = "box")]
    pub box_: Option<BoxConfig>,
    pub state: Option<Vec<StateEntry>>,
    /// Observable strings, one per spin or one for all spins.
    pub observable: Option<Vec<String>>,
    pub tolerances: Option<Tolerances>,
    pub output: Option<OutputConfig>,
    /// Time steps for evolve/measure, n_max for rage.
    #[serde(rename = "T")]
    pub t: Option<u64>,
    pub window: Option<Vec<Vec<i64>>>,
    pub spin: Option<usize>,
    pub axis: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Res<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Res<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Res<()> {
        if let Some(t) = &self.tolerances {
            for (name, v) in [
                ("group_tol", t.group_tol),
                ("eig_tol", t.eig_tol),
                ("flat_tol", t.flat_tol),
                ("relation_tol", t.relation_tol),
            ] {
                if let Some(v) = v {
                    if !(v > 0.0) {
                        return cfg(format!("tolerance {name} must be positive"));
                    }
                }
            }
            for (name, v) in [
                ("quad_grid", t.quad_grid),
                ("grid", t.grid),
                ("q_max", t.q_max),
            ] {
                if v == Some(0) {
                    return cfg(format!("{name} must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Split `name(arg, arg)` at top-level commas.
fn split_call(s: &str) -> Res<(String, Vec<String>)> {
    let s = s.trim();
    let Some(open) = s.find('(') else {
        return Ok((s.to_lowercase(), Vec::new()));
    };
    if !s.ends_with(')') {
        return cfg(format!("unbalanced model string `{s}`"));
    }
    let name = s[..open].trim().to_lowercase();
    let inner = &s[open + 1..s.len() - 1];
    let mut args = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                args.push(inner[start..i].trim().to_string());
                start = i + 1;
            }
            _ => {}
        }
    }
    if !inner.trim().is_empty() {
        args.push(inner[start..].trim().to_string());
    }
    Ok((name, args))
}

/// `tensor(hadamard,grover)`, `directsum(hadamard,hadamard)`, `shift(1)` or a plain model name.
pub fn parse_model_string(s: &str) -> Res<WalkConfig> {
    let (name, args) = split_call(s)?;
    let mut w = WalkConfig {
        model: Some(name.clone()),
        ..Default::default()
    };
    match name.as_str() {
        "tensor" | "directsum" | "direct-sum" => {
            w.parts = Some(
                args.iter()
                    .map(|a| parse_model_string(a))
                    .collect::<Res<_>>()?,
            );
        }
        "shift" => {
            let step = args
                .iter()
                .map(|a| a.parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>();
            w.step = Some(step.map_err(|_| CliError::Config(format!("bad shift `{s}`")))?);
        }
        _ if !args.is_empty() => {
            return cfg(format!(
                "model `{name}` takes no arguments in a model string"
            ))
        }
        _ => {}
    }
    Ok(w)
}

fn coin_entries(w: &WalkConfig, n: usize) -> Res<Option<Vec<C64>>> {
    match &w.coin {
        None => Ok(None),
        Some(v) if v.len() == n * n => Ok(Some(v.iter().map(Num::complex).collect::<Res<_>>()?)),
        Some(v) => cfg(format!("coin needs {} entries, got {}", n * n, v.len())),
    }
}

fn coin4(w: &WalkConfig, default: [f64; 4]) -> Res<[C64; 4]> {
    Ok(match coin_entries(w, 2)? {
        Some(v) => [v[0], v[1], v[2], v[3]],
        None => default.map(|x| C64::new(x, 0.0)),
    })
}

fn opt_c(v: &Option<Num>, default: f64) -> Res<C64> {
    v.as_ref()
        .map(Num::complex)
        .transpose()
        .map(|x| x.unwrap_or(C64::new(default, 0.0)))
}

fn steps(w: &WalkConfig) -> (i64, i64) {
    (w.alpha.unwrap_or(1), w.beta.unwrap_or(1))
}

/// Turn a walk configuration into a zoo model.
pub fn model_of(w: &WalkConfig, base: &Path) -> Res<Model> {
    if let Some(file) = &w.file {
        let path = if file.is_absolute() {
            file.clone()
        } else {
            base.join(file)
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let doc: ExperimentConfig = ExperimentConfig::parse(&text)?;
        let inner = doc
            .walk
            .ok_or_else(|| CliError::Config(format!("{} has no [walk] section", path.display())))?;
        return model_of(&inner, path.parent().unwrap_or(base));
    }
    if let Some(table) = &w.table {
        let nu =
            w.nu.ok_or_else(|| CliError::Config("custom table needs `nu`".into()))?;
        let d = w
            .dim
            .or_else(|| table.first().map(|e| e.jump.len()))
            .unwrap_or(1);
        let amps = table
            .iter()
            .map(|e| {
                if e.row == 0 || e.col == 0 {
                    return cfg("table rows and columns are 1-based");
                }
                Ok(Amplitude {
                    row: e.row - 1,
                    col: e.col - 1,
                    jump: LatticeVector(e.jump.clone()),
                    value: e.value.complex()?,
                })
            })
            .collect::<Res<Vec<_>>>()?;
        return Ok(Model::Custom(build_walk(d, nu, &amps)?));
    }
    let name = w
        .model
        .as_deref()
        .ok_or_else(|| CliError::Config("walk needs `model`, `table` or `file`".into()))?;
    let s = 0.5f64.sqrt();
    let had = [s, s, s, -s];
    let (alpha, beta) = steps(w);
    let parts = || -> Res<Vec<Model>> {
        w.parts
            .as_ref()
            .map(|p| p.iter().map(|x| model_of(x, base)).collect())
            .unwrap_or_else(|| cfg(format!("{name} needs `parts`")))
    };
    Ok(match name.to_lowercase().as_str() {
        "hadamard" => Model::Hadamard,
        "grover" => Model::Grover,
        "example39" => Model::Example39,
        "coined" => Model::Coined {
            coin: coin4(w, had)?,
            alpha,
            beta,
        },
        "diagonal" => Model::Diagonal {
            a: opt_c(&w.a, 1.0)?,
            d: opt_c(&w.d, 1.0)?,
            alpha,
            beta,
        },
        "antidiagonal" | "anti-diagonal" => Model::Antidiagonal {
            b: opt_c(&w.b, 1.0)?,
            c: opt_c(&w.c, 1.0)?,
            alpha,
            beta,
        },
        "split-step" | "splitstep" => Model::SplitStep {
            r: w.r.as_ref().map(Num::real).transpose()?.unwrap_or(s),
            t: w.t.as_ref().map(Num::real).transpose()?.unwrap_or(s),
            alpha,
            beta,
        },
        "arc-reversal" | "arcreversal" => Model::ArcReversal {
            coin: coin4(w, had)?,
        },
        "fourier2d" | "fourier" => Model::Fourier2d,
        "puto-std" | "puto" | "puto-lazy" => {
            let lazy = name.ends_with("lazy");
            let d = w.dim.unwrap_or(2);
            let nu = if lazy { 2 * d + 1 } else { 2 * d };
            let coin = match coin_entries(w, nu)? {
                Some(v) => CMat::from_rows(nu, v),
                None if lazy => grover_coin(nu),
                None => fourier_coin(nu),
            };
            if lazy {
                Model::PutoLazy { d, coin }
            } else {
                Model::PutoStd { d, coin }
            }
        }
        "tensor" => {
            let p = parts()?;
            if p.len() != 2 {
                return cfg("tensor needs exactly two parts");
            }
            let mut it = p.into_iter();
            Model::Tensor(Box::new(it.next().unwrap()), Box::new(it.next().unwrap()))
        }
        "directsum" | "direct-sum" => Model::DirectSum(parts()?),
        "dfmb" => Model::Dfmb {
            coin: coin4(w, had)?,
        },
        "shift" => Model::Shift(LatticeVector(w.step.clone().unwrap_or(vec![1]))),
        "custom" => return cfg("model `custom` needs a `table`"),
        other => return cfg(format!("unknown model `{other}`")),
    })
}

pub fn build(w: &WalkConfig, base: &Path) -> Res<WalkSpec> {
    Ok(make_model(&model_of(w, base)?)?)
}

/// `pos:spinK:amp` entries separated by `;`; positions are comma-separated d-tuples.
pub fn parse_state_string(s: &str) -> Res<Vec<StateEntry>> {
    s.split(';')
        .filter(|e| !e.trim().is_empty())
        .map(|e| {
            let parts: Vec<&str> = e.trim().splitn(3, ':').collect();
            if parts.len() != 3 {
                return cfg(format!("state entry `{e}` is not pos:spinK:amp"));
            }
            let pos = parts[0]
                .split(',')
                .map(|x| x.trim().parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| CliError::Config(format!("bad position in `{e}`")))?;
            let spin = parts[1]
                .trim()
                .strip_prefix("spin")
                .and_then(|x| x.parse::<usize>().ok())
                .filter(|&x| x >= 1)
                .ok_or_else(|| {
                    CliError::Config(format!("bad spin in `{e}` (expected spin1, spin2, ...)"))
                })?;
            Ok(StateEntry {
                pos,
                spin,
                amp: Num::Expr(parts[2].trim().to_string()),
            })
        })
        .collect()
}

/// Normalized compact state; δ_0 ⊗ e_1 when no entries are given.
pub fn compact_state(entries: Option<&[StateEntry]>, d: usize, nu: usize) -> Res<CompactState> {
    let mut st = CompactState::new(d, nu);
    match entries {
        None | Some([]) => st.add(LatticeVector::zero(d), 0, C64::new(1.0, 0.0))?,
        Some(es) => {
            for e in es {
                if e.pos.len() != d || e.spin == 0 || e.spin > nu {
                    return cfg(format!(
                        "state entry {:?} spin{} does not fit d = {d}, nu = {nu}",
                        e.pos, e.spin
                    ));
                }
                st.add(LatticeVector(e.pos.clone()), e.spin - 1, e.amp.complex()?)?;
            }
        }
    }
    Ok(st.normalized()?)
}

fn parse_pos(s: &str, d: usize) -> Res<LatticeVector> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| CliError::Config(format!("bad position `{s}`")))?;
    if v.len() != d {
        return cfg(format!("position `{s}` is not in dimension {d}"));
    }
    Ok(LatticeVector(v))
}

/// Observable strings:
/// `const:<expr>`, `delta:<pos>`, `indicator:<pos>;<pos>...`, `odd`, `even`,
/// `field:<m>=<expr>;<m>=<expr>...` (trigonometric polynomial), `table:<expr>,<expr>,...` (bounded, flat order).
pub fn parse_observable(s: &str, d: usize, n: usize) -> Res<Observable> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    match kind.trim() {
        "const" => Ok(Observable::constant(
            d,
            eval(if arg.is_empty() { "1" } else { arg })?,
        )),
        "delta" => Ok(Observable::delta(parse_pos(arg, d)?)),
        "indicator" => Ok(Observable::indicator(
            &arg.split(';')
                .map(|p| parse_pos(p, d))
                .collect::<Res<Vec<_>>>()?,
        )?),
        "odd" => Ok(Observable::parity(n, d, true)),
        "even" => Ok(Observable::parity(n, d, false)),
        "field" => {
            let coeffs = arg
                .split(';')
                .map(|t| {
                    let (m, c) = t.split_once('=').ok_or_else(|| {
                        CliError::Config(format!("field term `{t}` is not m=coef"))
                    })?;
                    Ok((parse_pos(m, d)?, eval(c)?))
                })
                .collect::<Res<Vec<_>>>()?;
            Ok(Observable::SampledField { d, coeffs })
        }
        "table" => {
            let v = arg
                .split(',')
                .map(|x| Ok(eval(x)?))
                .collect::<Res<Vec<_>>>()?;
            Ok(Observable::bounded(n, d, v)?)
        }
        other => cfg(format!("unknown observable kind `{other}`")),
    }
}
