use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use focusfocus_cli::{modelfile, InvariantFile};
use tempfile::TempDir;

const K1: &str = "ffinv v1
k 1
order 3
series s0
coeff 1 0 0/1 1/2
coeff 0 1 1/1 0/1
coeff 0 2 1/10 0/1
";

const K3: &str = "ffinv v1
k 3
order 3
series s0
coeff 0 1 1/1 0/1
coeff 2 0 1/20 0/1
series g 0 1
coeff 0 1 2/1 0/1
series g 1 2
coeff 0 1 1/1 0/1
coeff 1 1 1/1 0/1
";

const ZERO: &str = "ffinv v1
k 1
order 2
series s0
";

fn focusfocus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focusfocus")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Self(TempDir::new().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.0.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_string_lossy().into_owned()
    }
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn parse_print_is_identity_on_canonical_files() {
    for text in [K1, K3] {
        assert_eq!(InvariantFile::parse(text).unwrap().print(), text);
    }
    let d = Dir::new();
    let full = d.path("full.ffinv");
    assert_eq!(code(&focusfocus(&["expand", &d.file("k3.ffinv", K3), "-o", &full])), 0);
    let text = read(&full);
    assert_eq!(InvariantFile::parse(&text).unwrap().print(), text);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let bad = "ffinv v1\nk 1\norder 2\nseries s0\ncoeff 0 1 1/0 0/1\n";
    let d = Dir::new();
    let out = focusfocus(&["validate", &d.file("bad.ffinv", bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    let pi_in_g = "ffinv v1\nk 2\norder 1\nseries s0\nseries g 0 1\ncoeff 0 1 1/1 1/1\n";
    assert_eq!(code(&focusfocus(&["validate", &d.file("g.ffinv", pi_in_g)])), 2);
    let unknown = "ffinv v1\nk 1\norder 1\ncolour blue\n";
    assert_eq!(code(&focusfocus(&["validate", &d.file("u.ffinv", unknown)])), 2);
}

#[test]
fn validate_accepts_expanded_tuples_and_reports_violations() {
    let d = Dir::new();
    let full = d.path("full.ffinv");
    focusfocus(&["expand", &d.file("k3.ffinv", K3), "-o", &full]);
    assert_eq!(code(&focusfocus(&["validate", &full])), 0);
    let broken = read(&full).replacen("series g 1 0\ncoeff 0 1 1/2 0/1", "series g 1 0\ncoeff 0 1 1/3 0/1", 1);
    let out = focusfocus(&["validate", &d.file("broken.ffinv", &broken)]);
    assert_eq!(code(&out), 1);
    assert!(!out.stdout.is_empty());
}

#[test]
fn act_rot_zero_is_byte_identical() {
    let d = Dir::new();
    for (name, text) in [("k1.ffinv", K1), ("k3.ffinv", K3)] {
        let input = d.file(name, text);
        let out = d.path("out.ffinv");
        assert_eq!(code(&focusfocus(&["act", &input, "--rot", "0", "-o", &out])), 0);
        assert_eq!(read(&out), text);
    }
}

#[test]
fn equiv_decides_orbit_membership() {
    let d = Dir::new();
    let input = d.file("k3.ffinv", K3);
    for flags in [&["--gx"][..], &["--gy"], &["--rot", "2"], &["--gx", "--gy", "--rot", "-1"]] {
        let moved = d.path("moved.ffinv");
        let mut args = vec!["act", &input];
        args.extend_from_slice(flags);
        args.extend_from_slice(&["-o", &moved]);
        assert_eq!(code(&focusfocus(&args)), 0);
        assert_eq!(code(&focusfocus(&["equiv", &input, &moved])), 0, "{flags:?}");
    }
    let other = d.file("other.ffinv", &K3.replace("coeff 2 0 1/20 0/1", "coeff 2 0 1/21 0/1"));
    assert_eq!(code(&focusfocus(&["equiv", &input, &other])), 1);
    let k1 = d.file("k1.ffinv", K1);
    assert_eq!(code(&focusfocus(&["equiv", &input, &k1])), 2);
}

#[test]
fn canon_is_constant_on_orbits() {
    let d = Dir::new();
    let input = d.file("k3.ffinv", K3);
    let moved = d.path("moved.ffinv");
    focusfocus(&["act", &input, "--gy", "--rot", "1", "-o", &moved]);
    let a = focusfocus(&["canon", &input]);
    let b = focusfocus(&["canon", &moved]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stderr).starts_with("element "));
}

#[test]
fn convert_round_trips() {
    let d = Dir::new();
    let once = d.path("once.ffinv");
    let twice = d.path("twice.ffinv");
    assert_eq!(code(&focusfocus(&["convert", &d.file("k1.ffinv", K1), "-o", &once])), 0);
    assert!(read(&once).contains("series S"));
    assert_eq!(code(&focusfocus(&["convert", &once, "-o", &twice])), 0);
    assert_eq!(read(&twice), K1);
}

#[test]
fn model_file_reload_is_bit_identical() {
    let d = Dir::new();
    let model = d.path("k3.ffmodel");
    assert_eq!(code(&focusfocus(&["build", &d.file("k3.ffinv", K3), "--delta", "0.5", "-o", &model])), 0);
    let text = read(&model);
    let sys = modelfile::parse(&text).unwrap();
    assert_eq!(modelfile::print(&sys), text);
}

#[test]
fn roundtrip_on_zero_data_passes() {
    let d = Dir::new();
    let out = focusfocus(&["roundtrip", &d.file("zero.ffinv", ZERO), "--fit-order", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = text.lines().filter(|l| l.ends_with("PASS") || l.ends_with("FAIL")).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let fitted: f64 = row.split_whitespace().nth(3).unwrap().parse().unwrap();
        assert!(fitted.abs() < 1e-6, "{row}");
    }
}

#[test]
fn roundtrip_k3_passes() {
    let d = Dir::new();
    let out = focusfocus(&["roundtrip", &d.file("k3.ffinv", K3), "--workers", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn periods_on_zero_data_follow_the_log() {
    let d = Dir::new();
    let model = d.path("zero.ffmodel");
    focusfocus(&["build", &d.file("zero.ffinv", ZERO), "-o", &model]);
    let out = focusfocus(&["periods", &model]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("c1,c2,tau1,tau2,sigma1,sigma2"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        let r = v[0].hypot(v[1]);
        assert!((v[3] + r.ln()).abs() < 1e-9, "{line}");
        assert!(v[4].abs() < 1e-9 && v[5].abs() < 1e-9, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 96);
}

#[test]
fn periods_do_not_depend_on_worker_count() {
    let d = Dir::new();
    let model = d.path("k3.ffmodel");
    focusfocus(&["build", &d.file("k3.ffinv", K3), "-o", &model]);
    let one = focusfocus(&["periods", &model, "--workers", "1"]);
    let four = focusfocus(&["periods", &model, "--workers", "4"]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn extract_recovers_an_equivalent_tuple() {
    let d = Dir::new();
    let input = d.file("k1.ffinv", K1);
    let model = d.path("k1.ffmodel");
    let fitted = d.path("fit.ffinv");
    let report = d.path("fit.txt");
    focusfocus(&["build", &input, "-o", &model]);
    let out = focusfocus(&["extract", &model, "-o", &fitted, "--report", &report]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(&report).contains("condition"));
    assert_eq!(code(&focusfocus(&["equiv", &input, &fitted, "--tol", "1e-6"])), 0);
    assert_eq!(code(&focusfocus(&["equiv", &input, &fitted, "--tol", "1e-20"])), 1);

    let csv = d.path("samples.csv");
    focusfocus(&["periods", &model, "-o", &csv]);
    let from_csv = d.path("fit_csv.ffinv");
    assert_eq!(code(&focusfocus(&["extract", &model, "--samples", &csv, "-o", &from_csv])), 0);
    assert_eq!(read(&from_csv), read(&fitted));
}

#[test]
fn extract_keeps_transitions_for_several_charts() {
    let d = Dir::new();
    let input = d.file("k3.ffinv", K3);
    let model = d.path("k3.ffmodel");
    let fitted = d.path("fit.ffinv");
    focusfocus(&["build", &input, "-o", &model]);
    assert_eq!(code(&focusfocus(&["extract", &model, "-o", &fitted])), 0);
    assert_eq!(code(&focusfocus(&["equiv", &input, &fitted, "--tol", "1e-6"])), 0);
}

#[test]
fn numeric_failures_exit_with_three() {
    let d = Dir::new();
    let out = focusfocus(&["build", &d.file("k1.ffinv", K1), "--delta", "2"]);
    assert_eq!(code(&out), 3);
}

