//! One function per subcommand; each returns the artifact text.

use super::config::{compact_state, parse_observable};
use super::output::{check_mass, num, pos_header, Csv};
use super::{CliError, Settings};
use crate::dynamics::{evolve, limit_measure, rage_escape, time_avg_measure, PositionMeasure};
use crate::ergodicity::{
    c_psi, ergodicity_report, fqe_gap, subset_coefficients, target_average, tv_distance,
    uniform_average, Observable, ReportOptions,
};
use crate::spectra::eigen::angle01;
use crate::spectra::{
    branch_table, compute_m, detect_flat_bands, detect_phase_relations, nrg_statistic, subsequence,
    zeta_shift_invariances, Line,
};
use crate::walk_core::{box_coords, laurent_charpoly, LatticeVector};
use crate::zoo::{classify_with, ClassifyOptions};
use serde::Serialize;

type Res<T> = std::result::Result<T, CliError>;

const DEFAULT_N: usize = 64;

pub fn dispatch(s: &Settings) -> Res<String> {
    match s.command.as_str() {
        "validate" => validate(s),
        "spectrum" => spectrum(s),
        "flatbands" => flatbands(s),
        "nrg" => nrg(s),
        "relations" => relations(s),
        "charpoly" => charpoly(s),
        "evolve" => evolve_cmd(s),
        "measure" => measure(s),
        "limit-measure" => limit(s),
        "pqe" => pqe(s),
        "fqe" => fqe(s),
        "tvd" => tvd(s),
        "subset-coefs" => subset_coefs(s),
        "cpsij" => cpsij(s),
        "rage" => rage(s),
        "report" => report(s),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }
}

fn to_toml<T: Serialize>(v: &T) -> Res<String> {
    toml::to_string(v).map_err(|e| CliError::Invariant(format!("report serialization failed: {e}")))
}

fn classify_options(s: &Settings) -> ClassifyOptions {
    let mut o = ClassifyOptions::default();
    if let Some(g) = s.tol.grid {
        o.flat_grid = g;
        o.relation_grid = g;
    }
    o.flat_tol = s.tol.flat_tol;
    o.relation_tol = s.tol.relation_tol;
    o.q_max = s.tol.q_max;
    o
}

/// `lo..hi` (cube in every axis) or `pos;pos;...`.
pub fn parse_window(w: &str, d: usize) -> Res<Vec<LatticeVector>> {
    let bad = || CliError::Config(format!("bad window `{w}`"));
    if let Some((lo, hi)) = w.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        let side = (hi - lo + 1) as usize;
        return Ok((0..side.pow(d as u32))
            .map(|i| LatticeVector(box_coords(i, side, d).into_iter().map(|c| c + lo).collect()))
            .collect());
    }
    w.split(';')
        .map(|p| {
            let v: Vec<i64> = p
                .split(',')
                .map(|x| x.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if v.len() != d {
                return Err(bad());
            }
            Ok(LatticeVector(v))
        })
        .collect()
}

fn observables(s: &Settings, n: usize, spins: usize, default: &str) -> Res<Vec<Observable>> {
    let d = s.walk.d();
    let specs: Vec<String> = if s.observables.is_empty() {
        vec![default.to_string()]
    } else {
        s.observables.clone()
    };
    let obs: Vec<Observable> = specs
        .iter()
        .map(|o| parse_observable(o, d, n))
        .collect::<Res<_>>()?;
    match obs.len() {
        1 => Ok(vec![obs[0].clone(); spins]),
        l if l == spins => Ok(obs),
        l => Err(CliError::Config(format!(
            "{l} observables given, need 1 or {spins}"
        ))),
    }
}

fn state(s: &Settings) -> Res<crate::dynamics::CompactState> {
    compact_state(s.state.as_deref(), s.walk.d(), s.walk.nu())
}

#[derive(Serialize)]
struct Validation {
    unitary: bool,
    max_residual: f64,
    worst_shift: Vec<i64>,
    d: usize,
    nu: usize,
    range: i64,
    support: Vec<Vec<i64>>,
}

fn validate(s: &Settings) -> Res<String> {
    let (q, err) = s.walk.unitarity_residual();
    to_toml(&Validation {
        unitary: err < 1e-12,
        max_residual: err,
        worst_shift: q.0,
        d: s.walk.d(),
        nu: s.walk.nu(),
        range: s.walk.range(),
        support: s.walk.support().map(|p| p.0.clone()).collect(),
    })
}

fn spectrum(s: &Settings) -> Res<String> {
    let d = s.walk.d();
    let line = if d == 1 {
        Line::axis1()
    } else {
        let axis = s.axis.unwrap_or(1);
        if axis == 0 || axis > d {
            return Err(CliError::Config(format!("axis must be in 1..={d}")));
        }
        Line::axis(d, axis - 1, vec![0.0; d])
    };
    let t = branch_table(&s.walk, &line, s.tol.grid.unwrap_or(256))?;
    let mut csv = Csv::with(&["j", "theta", "branch", "re", "im", "angle"]);
    for j in 0..=t.g {
        for (b, row) in t.samples.iter().enumerate() {
            let z = row[j];
            csv.row(vec![
                j.to_string(),
                num(j as f64 / t.g as f64),
                (b + 1).to_string(),
                num(z.re),
                num(z.im),
                num(angle01(z)),
            ]);
        }
    }
    Ok(csv.finish())
}

fn flatbands(s: &Settings) -> Res<String> {
    let mut v = detect_flat_bands(&s.walk, s.tol.grid.unwrap_or(64), s.tol.flat_tol)?;
    v.sort_by(|a, b| angle01(*a).total_cmp(&angle01(*b)));
    let mut csv = Csv::with(&["index", "re", "im", "angle"]);
    for (i, z) in v.iter().enumerate() {
        csv.row(vec![
            (i + 1).to_string(),
            num(z.re),
            num(z.im),
            num(angle01(*z)),
        ]);
    }
    Ok(csv.finish())
}

fn nrg(s: &Settings) -> Res<String> {
    let d = s.walk.d();
    let mut header = vec!["N".to_string()];
    header.extend((1..=d).map(|i| format!("m{i}")));
    header.extend(["count", "ratio", "s", "w", "pair_count", "count_fine"].map(String::from));
    let mut csv = Csv::new(&header);
    for n in s.sizes_or(DEFAULT_N) {
        let r = nrg_statistic(&s.walk, n, s.tol.eig_tol)?;
        eprintln!(
            "N = {n}: sup ratio {} at {}{}",
            num(r.sup_ratio),
            r.argmax,
            if r.tolerance_sensitive {
                " (tolerance sensitive)"
            } else {
                ""
            }
        );
        for row in &r.rows {
            let mut cells = vec![n.to_string()];
            cells.extend(row.m.0.iter().map(|x| x.to_string()));
            cells.extend([
                row.count.to_string(),
                num(row.ratio),
                (row.s + 1).to_string(),
                (row.w + 1).to_string(),
                row.pair_count.to_string(),
                row.count_fine.to_string(),
            ]);
            csv.row(cells);
        }
    }
    Ok(csv.finish())
}

#[derive(Serialize)]
struct RelationDoc {
    #[serde(rename = "M")]
    m: i64,
    k: i64,
    subsequence: Vec<i64>,
    grid: usize,
    monodromy: Vec<usize>,
    relation: Vec<RelationEntry>,
}

#[derive(Serialize)]
struct RelationEntry {
    s: usize,
    w: usize,
    phi: String,
    xi: f64,
    xi_rational: String,
    residual: f64,
}

fn relations(s: &Settings) -> Res<String> {
    let rep = detect_phase_relations(
        &s.walk,
        s.tol.q_max,
        s.tol.grid.unwrap_or(256),
        s.tol.relation_tol,
    )?;
    let xi0: Vec<_> = rep.xi_zero().into_iter().filter(|r| r.p > 0).collect();
    let m = compute_m(&xi0);
    let k = s.k.map(|k| k as i64).unwrap_or(1);
    let subsequence = (1..=5)
        .map(|n| subsequence(m, k, n))
        .collect::<crate::Result<Vec<_>>>()?;
    to_toml(&RelationDoc {
        m,
        k,
        subsequence,
        grid: rep.grid,
        monodromy: rep.monodromy.iter().map(|x| x + 1).collect(),
        relation: rep
            .relations
            .iter()
            .map(|r| RelationEntry {
                s: r.s + 1,
                w: r.w + 1,
                phi: format!("{}/{}", r.p, r.q),
                xi: r.xi,
                xi_rational: r
                    .xi_rational
                    .map(|(a, b)| format!("{a}/{b}"))
                    .unwrap_or_default(),
                residual: r.residual,
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct CharpolyDoc {
    d: usize,
    nu: usize,
    zeta_q: i64,
    /// Root-of-unity tuples (p/q per axis) leaving the polynomial invariant up to a constant.
    zeta_shifts: Vec<Vec<String>>,
    term: Vec<TermEntry>,
}

#[derive(Serialize)]
struct TermEntry {
    z: Vec<i64>,
    lambda: u32,
    re: f64,
    im: f64,
}

fn charpoly(s: &Settings) -> Res<String> {
    let p = laurent_charpoly(&s.walk)?;
    let shifts = zeta_shift_invariances(&p, s.tol.zeta_q);
    to_toml(&CharpolyDoc {
        d: s.walk.d(),
        nu: s.walk.nu(),
        zeta_q: s.tol.zeta_q,
        zeta_shifts: shifts
            .iter()
            .map(|t| t.iter().map(|(a, b)| format!("{a}/{b}")).collect())
            .collect(),
        term: p
            .terms()
            .iter()
            .map(|((z, l), c)| TermEntry {
                z: z.clone(),
                lambda: *l,
                re: c.re,
                im: c.im,
            })
            .collect(),
    })
}

fn box_rows(csv: &mut Csv, n: usize, d: usize, mut f: impl FnMut(usize) -> Vec<String>) {
    for i in 0..n.pow(d as u32) {
        let mut cells: Vec<String> = box_coords(i, n, d).iter().map(|x| x.to_string()).collect();
        cells.extend(f(i));
        csv.row(cells);
    }
}

fn single_size(s: &Settings) -> Res<usize> {
    let sizes = s.sizes_or(DEFAULT_N);
    if sizes.len() != 1 {
        return Err(CliError::Config(format!(
            "{} takes a single box size",
            s.command
        )));
    }
    Ok(sizes[0])
}

fn evolve_cmd(s: &Settings) -> Res<String> {
    let n = single_size(s)?;
    let psi = state(s)?.to_box(n);
    let out = evolve(&s.walk, &psi, s.time.unwrap_or(1))?;
    let mut header = pos_header(s.walk.d());
    header.extend(["spin", "re", "im"].map(String::from));
    let mut csv = Csv::new(&header);
    for i in 0..out.sites() {
        for (j, f) in out.fields.iter().enumerate() {
            let mut cells: Vec<String> = box_coords(i, n, out.d)
                .iter()
                .map(|x| x.to_string())
                .collect();
            cells.extend([(j + 1).to_string(), num(f[i].re), num(f[i].im)]);
            csv.row(cells);
        }
    }
    Ok(csv.finish())
}

fn measure_csv(mu: &PositionMeasure) -> Res<String> {
    check_mass(&mu.weights, 1.0, "position measure")?;
    let mut header = pos_header(mu.d);
    header.push("weight".into());
    let mut csv = Csv::new(&header);
    box_rows(&mut csv, mu.n, mu.d, |i| vec![num(mu.weights[i])]);
    Ok(csv.finish())
}

fn measure(s: &Settings) -> Res<String> {
    let n = single_size(s)?;
    let (mu, _) = time_avg_measure(&s.walk, &state(s)?.to_box(n), s.time.unwrap_or(100))?;
    measure_csv(&mu)
}

fn limit(s: &Settings) -> Res<String> {
    let n = single_size(s)?;
    let lm = limit_measure(&s.walk, &state(s)?.to_box(n), s.tol.group_tol)?;
    if lm.grouping_unstable {
        eprintln!("warning: eigenvalue grouping changes at group_tol/10");
    }
    measure_csv(&lm.total)
}

fn pqe(s: &Settings) -> Res<String> {
    let psi = state(s)?;
    let mut csv = Csv::with(&[
        "N",
        "limit_re",
        "limit_im",
        "uniform_re",
        "uniform_im",
        "gap",
    ]);
    let zero = format!("delta:{}", vec!["0"; s.walk.d()].join(","));
    for n in s.sizes_or(DEFAULT_N) {
        let phi = observables(s, n, 1, &zero)?.remove(0);
        let lm = limit_measure(&s.walk, &psi.to_box(n), s.tol.group_tol)?;
        let lim = lm.total.expect(&phi.table(n)?);
        let uni = uniform_average(&phi, n)?;
        csv.row(vec![
            n.to_string(),
            num(lim.re),
            num(lim.im),
            num(uni.re),
            num(uni.im),
            num((lim - uni).norm()),
        ]);
    }
    Ok(csv.finish())
}

fn fqe(s: &Settings) -> Res<String> {
    let psi = state(s)?;
    let nu = s.walk.nu();
    let mut csv = Csv::with(&["N", "limit_re", "limit_im", "target_re", "target_im", "gap"]);
    for n in s.sizes_or(DEFAULT_N) {
        let a = observables(s, n, nu, "const:1")?;
        let st = psi.to_box(n);
        let tables: Vec<_> = a.iter().map(|x| x.table(n)).collect::<crate::Result<_>>()?;
        let lim = crate::dynamics::fqe_limit(&s.walk, &st, &tables, s.tol.group_tol)?;
        let target = target_average(&s.walk, &st, &a)?;
        let gap = fqe_gap(&s.walk, &st, &a)?;
        csv.row(vec![
            n.to_string(),
            num(lim.re),
            num(lim.im),
            num(target.re),
            num(target.im),
            num(gap),
        ]);
    }
    Ok(csv.finish())
}

fn tvd(s: &Settings) -> Res<String> {
    let psi = state(s)?;
    let d = s.walk.d();
    let mut csv = Csv::with(&["N", "mode", "tvd"]);
    for n in s.sizes_or(DEFAULT_N) {
        let st = psi.to_box(n);
        let (mode, mu) = match s.time {
            Some(t) => (format!("T={t}"), time_avg_measure(&s.walk, &st, t)?.0),
            None => (
                "exact".to_string(),
                limit_measure(&s.walk, &st, s.tol.group_tol)?.total,
            ),
        };
        csv.row(vec![
            n.to_string(),
            mode,
            num(tv_distance(&mu, &PositionMeasure::uniform(n, d))?),
        ]);
    }
    Ok(csv.finish())
}

fn subset_coefs(s: &Settings) -> Res<String> {
    let cls = classify_with(&s.walk, &classify_options(s))?;
    let m = s.m.unwrap_or(cls.m as usize);
    let k =
        s.k.ok_or_else(|| CliError::Config("subset-coefs needs --k".into()))?;
    let sc = subset_coefficients(&s.walk, &state(s)?, k, m, &cls.relations, s.tol.quad_grid)?;
    eprintln!(
        "M = {m}, k = {k}, gcd = {}, quadrature error {}",
        sc.gcd,
        num(sc.error)
    );
    let mut csv = Csv::with(&["u", "re", "im"]);
    for (u, c) in sc.values.iter().enumerate() {
        csv.row(vec![u.to_string(), num(c.re), num(c.im)]);
    }
    Ok(csv.finish())
}

fn cpsij(s: &Settings) -> Res<String> {
    let g = s.tol.quad_grid;
    let q = c_psi(&s.walk, &state(s)?, g)?;
    let mut csv = Csv::with(&["j", "value", "error"]);
    for (j, x) in q.iter().enumerate() {
        if s.spin.is_none_or(|sp| sp == j + 1) {
            csv.row(vec![(j + 1).to_string(), num(x.value), num(x.error)]);
        }
    }
    Ok(csv.finish())
}

fn rage(s: &Settings) -> Res<String> {
    let d = s.walk.d();
    let window = s.window()?.unwrap_or_else(|| vec![LatticeVector::zero(d)]);
    let n_max = s.time.unwrap_or(100) as usize;
    let norms = rage_escape(&s.walk, &state(s)?, &window, n_max)?;
    let mut csv = Csv::with(&["n", "norm"]);
    for (n, x) in norms.iter().enumerate() {
        csv.row(vec![n.to_string(), num(*x)]);
    }
    Ok(csv.finish())
}

fn report(s: &Settings) -> Res<String> {
    let n = single_size(s)?;
    let zero = format!("delta:{}", vec!["0"; s.walk.d()].join(","));
    let phi = observables(s, n, 1, &zero)?.remove(0);
    let opt = ReportOptions {
        classify: classify_options(s),
        eig_tol: s.tol.eig_tol,
        quad_grid: s.tol.quad_grid,
    };
    to_toml(&ergodicity_report(&s.walk, &state(s)?, n, &phi, &opt)?)
}
