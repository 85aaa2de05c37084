//! Configuration-driven experiment runner.

pub mod commands;
pub mod config;
pub mod output;

use crate::error::WalkError;
use crate::walk_core::{LatticeVector, WalkSpec};
use clap::{Args, Parser, Subcommand};
use config::{
    build, parse_model_string, parse_state_string, ExperimentConfig, Num, StateEntry, WalkConfig,
};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("{context}: {source}")]
    Walk { context: String, source: WalkError },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        CliError::Walk {
            context: "walk".into(),
            source: e,
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Walk { source, .. } => match source {
                WalkError::SizeLimit(_)
                | WalkError::BudgetExceeded(_)
                | WalkError::ConvergenceFailure(_)
                | WalkError::RefineExhausted(_) => EXIT_BUDGET,
                WalkError::UnitarityViolation { .. } | WalkError::Invariant(_) => EXIT_INVARIANT,
                _ => EXIT_CONFIG,
            },
        }
    }

    fn with_context(self, context: &str) -> Self {
        match self {
            CliError::Walk { source, .. } => CliError::Walk {
                context: context.into(),
                source,
            },
            e => e,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "walklab",
    version,
    about = "Spectral and ergodicity diagnostics for discrete-time quantum walks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the command named in the config file.
    Run(Common),
    /// Check unitarity of the walk.
    Validate(Common),
    /// Continued eigenvalue branches along a line in quasimomentum.
    Spectrum(Common),
    /// θ-independent eigenvalues.
    Flatbands(Common),
    /// Per-shift eigenvalue coincidence counts on L_N^d.
    Nrg(Common),
    /// Phase-shift relations, the modulus M and a subsequence preview (d = 1).
    Relations(Common),
    /// det(Û(z) − λ) as a Laurent polynomial and its root-of-unity shift invariances.
    Charpoly(Common),
    /// U_N^T ψ on L_N^d.
    Evolve(Common),
    /// Time-averaged position measure over T steps.
    Measure(Common),
    /// Exact infinite-time position measure.
    LimitMeasure(Common),
    /// Position ergodicity gap for an observable.
    Pqe(Common),
    /// Full ergodicity gap for a per-spin observable.
    Fqe(Common),
    /// Total variation distance to the uniform measure.
    Tvd(Common),
    /// Subset-equidistribution coefficients along N = nM + k (d = 1).
    SubsetCoefs(Common),
    /// Weak-limit constants c_{ψ,j}.
    Cpsij(Common),
    /// Escape norms ‖χ_Λ U^n ψ‖ on Z^d.
    Rage(Common),
    /// Full diagnostic battery as one document.
    Report(Common),
}

#[derive(Debug, Args, Default, Clone)]
pub struct Common {
    /// TOML experiment configuration; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model name or string such as `tensor(hadamard,grover)`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<i64>,
    /// Row-major coin entries, comma separated expressions.
    #[arg(long, allow_hyphen_values = true)]
    pub coin: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Lattice dimension for PUTO models.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Box sizes.
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Modulus for subsequences and subset coefficients.
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Inclusive range `lo,hi` of n for N = nM + k.
    #[arg(long, value_delimiter = ',')]
    pub n_range: Option<Vec<usize>>,
    /// Initial state `pos:spinK:amp;...`.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,
    /// Observable (repeat once per spin, or give one for all spins).
    #[arg(long, allow_hyphen_values = true)]
    pub observable: Option<Vec<String>>,
    /// Time steps (evolve, measure) or n_max (rage).
    #[arg(long = "T")]
    pub time: Option<u64>,
    /// Window: `lo..hi` per axis (cube) or explicit `pos;pos;...`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Spin (1-based).
    #[arg(long)]
    pub spin: Option<usize>,
    /// Axis (1-based) of the spectrum line for d > 1.
    #[arg(long)]
    pub axis: Option<usize>,
    #[arg(long)]
    pub group_tol: Option<f64>,
    #[arg(long)]
    pub eig_tol: Option<f64>,
    #[arg(long)]
    pub flat_tol: Option<f64>,
    #[arg(long)]
    pub relation_tol: Option<f64>,
    #[arg(long)]
    pub quad_grid: Option<usize>,
    /// Grid for branch tables, flat-band and relation detection.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub q_max: Option<usize>,
    /// Largest root-of-unity order for charpoly shift invariances.
    #[arg(long)]
    pub zeta_q: Option<i64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved tolerances.
#[derive(Clone, Debug)]
pub struct Tol {
    pub group_tol: f64,
    pub eig_tol: f64,
    pub flat_tol: f64,
    pub relation_tol: f64,
    pub quad_grid: usize,
    pub grid: Option<usize>,
    pub q_max: usize,
    pub zeta_q: i64,
}

/// Configuration after merging the document with command-line flags.
pub struct Settings {
    pub command: String,
    pub walk: WalkSpec,
    pub sizes: Option<Vec<usize>>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub state: Option<Vec<StateEntry>>,
    pub observables: Vec<String>,
    pub time: Option<u64>,
    pub window: Option<String>,
    pub window_cfg: Option<Vec<Vec<i64>>>,
    pub spin: Option<usize>,
    pub axis: Option<usize>,
    pub tol: Tol,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn sizes_or(&self, default: usize) -> Vec<usize> {
        self.sizes.clone().unwrap_or_else(|| vec![default])
    }

    pub fn window(&self) -> Result<Option<Vec<LatticeVector>>, CliError> {
        let d = self.walk.d();
        if let Some(w) = &self.window {
            return commands::parse_window(w, d).map(Some);
        }
        Ok(self
            .window_cfg
            .as_ref()
            .map(|v| v.iter().map(|p| LatticeVector(p.clone())).collect()))
    }
}

fn expr_num(s: &Option<String>) -> Option<Num> {
    s.as_ref().map(|x| Num::Expr(x.clone()))
}

fn apply_flags(w: &mut WalkConfig, c: &Common) {
    if c.alpha.is_some() {
        w.alpha = c.alpha;
    }
    if c.beta.is_some() {
        w.beta = c.beta;
    }
    if let Some(coin) = &c.coin {
        w.coin = Some(
            coin.split(',')
                .map(|x| Num::Expr(x.trim().to_string()))
                .collect(),
        );
    }
    for (slot, v) in [
        (&mut w.a, &c.a),
        (&mut w.b, &c.b),
        (&mut w.c, &c.c),
        (&mut w.d, &c.d),
        (&mut w.r, &c.r),
        (&mut w.t, &c.t),
    ] {
        if let Some(n) = expr_num(v) {
            *slot = Some(n);
        }
    }
    if c.dim.is_some() {
        w.dim = c.dim;
    }
}

/// Merge config file and flags into resolved settings.
pub fn resolve(command: &str, c: &Common) -> Result<Settings, CliError> {
    let (doc, base) = match &c.config {
        Some(p) => (
            ExperimentConfig::load(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    doc.validate()?;
    let command = if command == "run" {
        doc.command
            .clone()
            .ok_or_else(|| CliError::Config("`run` needs `command` in the config".into()))?
    } else {
        command.to_string()
    };
    let mut wc = match &c.model {
        Some(m) => parse_model_string(m)?,
        None => doc
            .walk
            .clone()
            .ok_or_else(|| CliError::Config("no walk given (use --model or [walk])".into()))?,
    };
    apply_flags(&mut wc, c);
    let walk = build(&wc, &base).map_err(|e| e.with_context("building the walk"))?;

    let bx = doc.box_.clone().unwrap_or_default();
    let m = c.m.or(bx.m);
    let k = c.k.or(bx.k);
    let n_range = c
        .n_range
        .clone()
        .map(|v| v.to_vec())
        .or(bx.n_range.map(|r| r.to_vec()));
    let sizes = match (&c.n, &bx.n, &n_range) {
        (Some(n), _, _) => Some(n.clone()),
        (None, _, Some(r)) => {
            let (Some(m), Some(k), [lo, hi]) = (m, k, r.as_slice()) else {
                return Err(CliError::Config(
                    "n_range needs M, k and exactly two bounds".into(),
                ));
            };
            Some((*lo..=*hi).map(|n| n * m + k).collect())
        }
        (None, Some(n), None) => Some(n.clone()),
        _ => None,
    };
    if let Some(s) = &sizes {
        if s.is_empty() || s.contains(&0) {
            return Err(CliError::Config("box sizes must be positive".into()));
        }
    }
    let state = match &c.state {
        Some(s) => Some(parse_state_string(s)?),
        None => doc.state.clone(),
    };
    let t = doc.tolerances.clone().unwrap_or_default();
    let tol = Tol {
        group_tol: c
            .group_tol
            .or(t.group_tol)
            .unwrap_or(crate::dynamics::DEFAULT_GROUP_TOL),
        eig_tol: c.eig_tol.or(t.eig_tol).unwrap_or(1e-8),
        flat_tol: c.flat_tol.or(t.flat_tol).unwrap_or(1e-8),
        relation_tol: c.relation_tol.or(t.relation_tol).unwrap_or(1e-8),
        quad_grid: c
            .quad_grid
            .or(t.quad_grid)
            .unwrap_or(crate::ergodicity::DEFAULT_QUAD_GRID),
        grid: c.grid.or(t.grid),
        q_max: c.q_max.or(t.q_max).unwrap_or(8),
        zeta_q: c.zeta_q.or(t.zeta_q).unwrap_or(8),
    };
    for v in [tol.group_tol, tol.eig_tol, tol.flat_tol, tol.relation_tol] {
        if !(v > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
    }
    if tol.quad_grid == 0 || tol.q_max == 0 || tol.zeta_q < 1 || tol.grid == Some(0) {
        return Err(CliError::Config(
            "grid sizes and orders must be positive".into(),
        ));
    }
    Ok(Settings {
        command,
        walk,
        sizes,
        m,
        k,
        state,
        observables: c
            .observable
            .clone()
            .or(doc.observable.clone())
            .unwrap_or_default(),
        time: c.time.or(doc.t),
        window: c.window.clone(),
        window_cfg: doc.window.clone(),
        spin: c.spin.or(doc.spin),
        axis: c.axis.or(doc.axis),
        tol,
        out: c.out.clone().or(doc.output.and_then(|o| o.path)),
    })
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Run(c) => ("run", c),
            Command::Validate(c) => ("validate", c),
            Command::Spectrum(c) => ("spectrum", c),
            Command::Flatbands(c) => ("flatbands", c),
            Command::Nrg(c) => ("nrg", c),
            Command::Relations(c) => ("relations", c),
            Command::Charpoly(c) => ("charpoly", c),
            Command::Evolve(c) => ("evolve", c),
            Command::Measure(c) => ("measure", c),
            Command::LimitMeasure(c) => ("limit-measure", c),
            Command::Pqe(c) => ("pqe", c),
            Command::Fqe(c) => ("fqe", c),
            Command::Tvd(c) => ("tvd", c),
            Command::SubsetCoefs(c) => ("subset-coefs", c),
            Command::Cpsij(c) => ("cpsij", c),
            Command::Rage(c) => ("rage", c),
            Command::Report(c) => ("report", c),
        }
    }
}

/// Execute one invocation; returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let (name, common) = cli.command.parts();
    let result = resolve(name, common).and_then(|s| {
        let text = commands::dispatch(&s).map_err(|e| e.with_context(&s.command))?;
        match &s.out {
            Some(p) => {
                std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if let CliError::Walk {
                source: WalkError::UnitarityViolation { .. },
                ..
            } = &e
            {
                if name == "validate" {
                    println!("unitary: false");
                }
            }
            eprintln!("walklab: {e}");
            e.exit_code()
        }
    }
}
