use std::path::PathBuf;
use std::process::{Command, Output};

fn walklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walklab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = walklab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Structural equality; floats agree to 1e-9 so goldens survive FFT kernel differences across CPUs.
fn same(a: &toml::Value, b: &toml::Value, path: &str) -> Result<(), String> {
    use toml::Value::*;
    match (a, b) {
        (Float(x), Float(y)) if (x - y).abs() <= 1e-9 * (1.0 + y.abs()) => Ok(()),
        (Integer(x), Float(y)) | (Float(y), Integer(x)) if (*x as f64 - y).abs() <= 1e-9 => Ok(()),
        (Array(x), Array(y)) if x.len() == y.len() => x
            .iter()
            .zip(y)
            .enumerate()
            .try_for_each(|(i, (p, q))| same(p, q, &format!("{path}[{i}]"))),
        (Table(x), Table(y)) if x.len() == y.len() => {
            x.iter().try_for_each(|(k, v)| match y.get(k) {
                Some(w) => same(v, w, &format!("{path}.{k}")),
                None => Err(format!("{path}.{k} missing from golden")),
            })
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} != {b}")),
    }
}

fn check_golden(name: &str, text: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("WALKLAB_BLESS").is_some() {
        std::fs::write(&path, text).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    let (a, b): (toml::Value, toml::Value) = (
        toml::from_str(text).unwrap(),
        toml::from_str(&want).unwrap(),
    );
    if let Err(e) = same(&a, &b, name) {
        panic!("{e}");
    }
}

#[test]
fn validate_hadamard() {
    let out = stdout(&["validate", "--model", "hadamard"]);
    let v: toml::Value = toml::from_str(&out).unwrap();
    assert_eq!(v["unitary"].as_bool(), Some(true));
    assert!(v["max_residual"].as_float().unwrap() < 1e-12);
}

#[test]
fn nrg_hadamard_sup_bound() {
    let rows = csv_rows(&stdout(&["nrg", "--model", "hadamard", "--N", "64"]));
    assert_eq!(rows.len(), 63);
    let sup = rows
        .iter()
        .map(|r| r[3].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(sup <= 4.0 / 64.0, "sup {sup}");
}

#[test]
fn subset_coefs_example39() {
    let rows = csv_rows(&stdout(&[
        "subset-coefs",
        "--model",
        "example39",
        "--k",
        "2",
        "--state",
        "0:spin2:1",
    ]));
    let want = [(0, 1.0, 0.0), (1, 0.0, 0.0)];
    assert_eq!(rows.len(), 2);
    for (r, (u, re, im)) in rows.iter().zip(want) {
        assert_eq!(r[0].parse::<usize>().unwrap(), u);
        assert!((r[1].parse::<f64>().unwrap() - re).abs() < 1e-10);
        assert!((r[2].parse::<f64>().unwrap() - im).abs() < 1e-10);
    }
}

#[test]
fn config_file_matches_flags() {
    let dir = std::env::temp_dir().join(format!("walklab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("exp.toml");
    std::fs::write(
        &cfg,
        "command = \"subset-coefs\"\nstate = [{ pos = [0], spin = 2, amp = 1 }]\n\n[walk]\nmodel = \"example39\"\n\n[box]\nk = 2\n",
    )
    .unwrap();
    let from_cfg = stdout(&["run", "--config", cfg.to_str().unwrap()]);
    let from_flags = stdout(&[
        "subset-coefs",
        "--model",
        "example39",
        "--k",
        "2",
        "--state",
        "0:spin2:1",
    ]);
    assert_eq!(from_cfg, from_flags);
    let out = dir.join("out.csv");
    stdout(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), from_flags);
}

#[test]
fn custom_table_config() {
    let dir = std::env::temp_dir().join(format!("walklab-custom-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let table = |last: &str| {
        format!(
            "command = \"validate\"\n\n[walk]\nmodel = \"custom\"\nnu = 2\ntable = [\n  {{ row = 1, col = 1, jump = [-1], value = \"1/sqrt(2)\" }},\n  {{ row = 1, col = 2, jump = [-1], value = \"1/sqrt(2)\" }},\n  {{ row = 2, col = 1, jump = [1], value = \"1/sqrt(2)\" }},\n  {{ row = 2, col = 2, jump = [1], value = \"{last}\" }},\n]\n"
        )
    };
    let good = dir.join("good.toml");
    std::fs::write(&good, table("-1/sqrt(2)")).unwrap();
    let a = stdout(&["run", "--config", good.to_str().unwrap()]);
    assert_eq!(a, stdout(&["validate", "--model", "hadamard"]));
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, table("1/sqrt(2)")).unwrap();
    assert_eq!(
        walklab(&["run", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        walklab(&["validate", "--model", "nosuchwalk"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        walklab(&["pqe", "--model", "hadamard", "--N", "16", "--eig-tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        walklab(&["nrg", "--model", "hadamard", "--N", "100000"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(walklab(&["run"]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let cases: [&[&str]; 4] = [
        &["limit-measure", "--model", "grover", "--N", "40"],
        &[
            "report",
            "--model",
            "antidiagonal",
            "--alpha",
            "1",
            "--beta",
            "4",
            "--N",
            "30",
        ],
        &["nrg", "--model", "splitstep", "--N", "32"],
        &["measure", "--model", "hadamard", "--N", "32", "--T", "50"],
    ];
    for args in cases {
        let one = stdout(args);
        let threads = Command::new(env!("CARGO_BIN_EXE_walklab"))
            .args(args)
            .env("WALKLAB_THREADS", "1")
            .output()
            .unwrap();
        assert_eq!(one, stdout(args), "{args:?}");
        assert_eq!(
            one.as_bytes(),
            threads.stdout.as_slice(),
            "{args:?} with one thread"
        );
        assert!(!one.contains('\r'));
    }
}

#[test]
fn probability_columns_sum_to_one() {
    for args in [
        ["limit-measure", "--model", "grover", "--N", "30"],
        ["measure", "--model", "example39", "--N", "30"],
    ] {
        let total: f64 = csv_rows(&stdout(&args))
            .iter()
            .map(|r| r.last().unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-8);
    }
}

fn report(model: &[&str], n: &str) -> String {
    let mut args = vec!["report", "--model"];
    args.extend(model);
    args.extend(["--N", n]);
    stdout(&args)
}

#[test]
fn report_classifications_match_goldens() {
    let cases: [(&str, &[&str], &str); 8] = [
        ("hadamard", &["hadamard"], "NRG"),
        ("grover", &["grover"], "FlatBand"),
        ("example39", &["example39"], "NoFlatBands+RelationsPresent"),
        (
            "antidiagonal_1_4",
            &["antidiagonal", "--alpha", "1", "--beta", "4"],
            "NoFlatBands+RelationsPresent",
        ),
        (
            "diagonal_1_2",
            &["diagonal", "--alpha", "1", "--beta", "2"],
            "NoFlatBands+RelationsPresent",
        ),
        (
            "coined_1_2",
            &["coined", "--alpha", "1", "--beta", "2"],
            "NRG",
        ),
        ("splitstep", &["splitstep"], "NRG"),
        ("arcreversal", &["arcreversal"], "NRG"),
    ];
    for (name, model, regime) in cases {
        let text = report(model, "24");
        let v: toml::Value = toml::from_str(&text).unwrap();
        assert_eq!(v["regime"].as_str(), Some(regime), "{name}");
        check_golden(&format!("report_{name}.toml"), &text);
    }
    let m = |model: &[&str]| {
        toml::from_str::<toml::Value>(&report(model, "24")).unwrap()["m"].as_integer()
    };
    assert_eq!(m(&["example39"]), Some(2));
    assert_eq!(m(&["antidiagonal", "--alpha", "1", "--beta", "4"]), Some(3));
}

#[test]
fn relations_preview() {
    let v: toml::Value = toml::from_str(&stdout(&[
        "relations",
        "--model",
        "antidiagonal",
        "--alpha",
        "1",
        "--beta",
        "4",
        "--k",
        "2",
    ]))
    .unwrap();
    assert_eq!(v["M"].as_integer(), Some(3));
    let sub: Vec<i64> = v["subsequence"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_integer().unwrap())
        .collect();
    assert_eq!(sub, [5, 8, 11, 14, 17]);
}

#[test]
fn rage_window_forms_agree() {
    let a = stdout(&["rage", "--model", "hadamard", "--T", "20", "--window=-1..1"]);
    let b = stdout(&[
        "rage", "--model", "hadamard", "--T", "20", "--window", "-1;0;1",
    ]);
    assert_eq!(a, b);
}
