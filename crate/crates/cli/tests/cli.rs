use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn solmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solmap"))
        .args(args)
        .env_remove("SOLMAP_JOBS")
        .output()
        .unwrap()
}

fn with_out<'a>(args: &[&'a str], out: &'a str) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend(["--out", out]);
    v
}

fn manifest(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_to_string(dir.join("manifest.txt"))
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[test]
fn transport_solve_reports_exact_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = solmap(&with_out(
        &[
            "transport-solve",
            "--y0",
            "0.5",
            "--phi",
            "xi^2",
            "--T",
            "1.5",
            "--n",
            "256",
            "--exact",
            "1/(2−t)",
        ],
        out,
    ));
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let stdout = String::from_utf8(r.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    let m = manifest(dir.path());
    let err: f64 = m["sup_error"].parse().unwrap();
    assert!(err < 5e-4);
    for k in [
        "config_sha256",
        "grid.ntheta",
        "constants.A",
        "constants.M",
        "constants.R",
        "constants.L",
        "constants.alpha",
    ] {
        assert!(m.contains_key(k), "{k}");
    }
    assert_eq!(m["regular"], "true");
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,eta,value,error"));
    assert_eq!(csv.lines().count(), 1 + 385 * 256);
    assert!(dir.path().join("solution.dat").is_file());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cases: [(&[&str], i32); 8] = [
        (&["transport-solve", "--y0", "0.5", "--T", "1"], 1),
        (
            &["transport-solve", "--y0", "0.5", "--phi", "xi^", "--T", "1"],
            1,
        ),
        (
            &[
                "transport-solve",
                "--y0",
                "0.5",
                "--phi",
                "xi",
                "--T",
                "1",
                "--bogus",
                "2",
            ],
            1,
        ),
        (&["no-such-command"], 1),
        (&["ivp", "--phi", "xi2^2 − t"], 2),
        (&["bvp", "--phi", "-pi^2*xi1", "--n", "200"], 2),
        (
            &[
                "transport-solve",
                "--y0",
                "0.5",
                "--phi",
                "xi^2",
                "--T",
                "3",
                "--n",
                "64",
            ],
            3,
        ),
        (
            &[
                "transport-solve",
                "--y0",
                "0.5",
                "--phi",
                "log(xi - 1)",
                "--T",
                "1",
                "--n",
                "64",
            ],
            4,
        ),
    ];
    for (args, code) in cases {
        let r = solmap(&with_out(args, out));
        assert_eq!(
            r.status.code(),
            Some(code),
            "{args:?}: {}",
            String::from_utf8_lossy(&r.stderr)
        );
    }
}

#[test]
fn stagnation_keeps_partial_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    solmap(&with_out(
        &[
            "transport-solve",
            "--y0",
            "0.5",
            "--phi",
            "xi^2",
            "--T",
            "3",
            "--n",
            "64",
        ],
        out,
    ));
    let m = manifest(dir.path());
    assert_eq!(m["exit_code"], "3");
    let t: f64 = m["t_reached"].parse().unwrap();
    assert!(t > 0.0 && t < 2.0);
    assert!(dir.path().join("partial.csv").is_file());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# holo run\nn = 3\nepsilon = 0.5\norder = 200\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let r = solmap(&[
        "holo",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let r = solmap(&[
        "holo",
        "--config",
        cfg.to_str().unwrap(),
        "--order",
        "120",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    assert_eq!(manifest(&a)["config.order"], "200");
    assert_eq!(manifest(&b)["config.order"], "120");
    assert_ne!(manifest(&a)["config_sha256"], manifest(&b)["config_sha256"]);
    let rows = std::fs::read_to_string(b.join("coefficients.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 122);
}

#[test]
fn data_forms_agree() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("y0.csv");
    let n = 16;
    let mut text = String::from("node,value\n");
    let mut list = Vec::new();
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let v = 0.25 + 0.1 * (std::f64::consts::TAU * x).cos();
        text.push_str(&format!("{x:?},{v:?}\n"));
        list.push(format!("{v:?}"));
    }
    std::fs::write(&csv, text).unwrap();
    let list = format!("[{}]", list.join(","));
    let expr = "0.25 + 0.1*cos(2*pi*eta)".to_string();
    let mut solutions = Vec::new();
    for (i, y0) in [csv.to_str().unwrap().to_string(), list, expr]
        .iter()
        .enumerate()
    {
        let out = dir.path().join(format!("r{i}"));
        let r = solmap(&[
            "transport-solve",
            "--y0",
            y0,
            "--phi",
            "-xi",
            "--T",
            "0.5",
            "--n",
            "16",
            "--policy",
            "fixed:4",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        solutions.push(std::fs::read(out.join("solution.csv")).unwrap());
    }
    assert_eq!(solutions[0], solutions[1]);
    let parse = |b: &[u8]| -> Vec<f64> {
        String::from_utf8_lossy(b)
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    };
    let (a, c) = (parse(&solutions[0]), parse(&solutions[2]));
    assert!(a.iter().zip(&c).all(|(x, y)| (x - y).abs() < 1e-14));
}

#[test]
fn resonance_scan_and_solvability() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = solmap(&with_out(
        &[
            "bvp-resonance-scan",
            "--rmin",
            "-100",
            "--rmax",
            "0",
            "--steps",
            "2000",
            "--v",
            "sin(pi*s)",
        ],
        out,
    ));
    assert!(r.status.success());
    let m = manifest(dir.path());
    let minima: Vec<f64> = m["minima"].split(',').map(|s| s.parse().unwrap()).collect();
    for k in [1.0f64, 2.0, 3.0] {
        let target = -(k * std::f64::consts::PI).powi(2);
        assert!(minima.iter().any(|r| (r - target).abs() < 0.5), "{target}");
    }
    assert_eq!(m["solvability.solvable"], "false");
    let scan = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(scan.lines().count(), 2001);
}

#[test]
fn help_lists_subcommands() {
    let r = solmap(&["--help"]);
    assert!(r.status.success());
    let s = String::from_utf8(r.stdout).unwrap();
    for c in [
        "transport-solve",
        "harness-exp",
        "convergence-study",
        "holo-counterexample",
    ] {
        assert!(s.contains(c));
    }
    let r = solmap(&["bvp", "--help"]);
    assert!(String::from_utf8(r.stdout).unwrap().contains("--threshold"));
    assert_eq!(solmap(&[]).status.code(), Some(1));
}

#[test]
fn other_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 6] = [
        &[
            "ivp-sensitivity",
            "--phi",
            "xi2 - xi1^2 - t",
            "--dphi",
            "sin(t)",
        ],
        &["bvp", "--phi", "xi2 - xi1^3 - 1", "--eta0", "0.1"],
        &["holo-counterexample"],
        &[
            "harness-consistency",
            "--y0",
            "0.5",
            "--phi",
            "xi^2",
            "--n",
            "128",
            "--ladder",
            "0.25,0.5",
            "--trials",
            "2",
        ],
        &[
            "convergence-study",
            "--y0",
            "0.5",
            "--phi",
            "xi^2",
            "--T",
            "1.5",
            "--exact",
            "1/(2-t)",
            "--n-list",
            "256,512",
        ],
        &[
            "transport-sensitivity",
            "--y0",
            "0.5",
            "--phi",
            "xi^2",
            "--T",
            "0.5",
            "--n",
            "64",
            "--dy0",
            "1",
        ],
    ];
    for (i, args) in runs.iter().enumerate() {
        let out = dir.path().join(i.to_string());
        let r = solmap(&with_out(args, out.to_str().unwrap()));
        assert!(
            r.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&r.stderr)
        );
        assert_eq!(manifest(&out)["exit_code"], "0");
    }
    let conv = std::fs::read_to_string(dir.path().join("4/convergence.csv")).unwrap();
    let order: f64 = conv
        .lines()
        .nth(2)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(order > 1.85, "{order}");
}

#[test]
fn jobs_env_is_validated() {
    let r = Command::new(env!("CARGO_BIN_EXE_solmap"))
        .args(["holo-counterexample", "--n-max", "4", "--out"])
        .arg(tempfile::tempdir().unwrap().path())
        .env("SOLMAP_JOBS", "zero")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(1));
}
