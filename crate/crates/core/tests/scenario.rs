use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use std::fs;
use std::path::Path;
use std::process::Command;
use ws_acoustics::scenario::*;
use ws_acoustics::WsError;

const BIN: &str = env!("CARGO_BIN_EXE_ws-scatter");

fn parse(text: &str) -> Result<ScenarioConfig, WsError> {
    ScenarioConfig::parse(text, Path::new("."))
}

fn parse_location(text: &str) -> String {
    match parse(text) {
        Err(WsError::Parse { location, .. }) => location,
        other => panic!("expected a parse error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    assert_eq!(parse_location("scenario=sphere bc=soft a=1\nk=-1\n"), "line 2");
    assert_eq!(parse_location("scenario=sphere\nbc=soft\n\nbogus=1\n"), "line 4");
    assert_eq!(parse_location("scenario=sphere bc=soft a=1\nk=1\nk=2\n"), "line 3");
    assert_eq!(parse_location("scenario=sphere bc=wet a=1\n"), "line 1");
    assert_eq!(parse_location("scenario=sphere bc=soft a=1\nM=10\n"), "line 2");
    assert_eq!(parse_location("scenario=cylinder bc=soft a=1\nM=10\n"), "line 2");
    assert_eq!(parse_location("scenario=cylinder bc=soft a=1\nchecks=volume-q,nope\n"), "line 2");
    assert_eq!(parse_location("scenario=cylinder bc=soft a=1\nfields=1,0\n"), "line 2");
    assert_eq!(parse_location("scenario=sphere bc=soft a=1 justaword\n"), "line 1");
    assert!(parse("scenario=sphere bc=soft\n").is_err());
    assert!(parse("scenario=cavity bc=soft\n").is_err());
    assert!(parse("bc=soft a=1\n").is_err());
}

#[test]
fn config_accepts_comments_and_defaults() {
    let c = parse("# comment\nscenario=strip bc=hard # trailing\nk=2 gate=1e-5\n").unwrap();
    assert_eq!(c.scenario, ScenarioKind::Strip);
    assert_eq!(c.k, 2.0);
    assert_eq!(c.bem.gate, 1e-5);
    assert!(c.grid.is_none());
    let c = parse("scenario=sphere bc=soft a=1 M=16 checks=volume-q,simdiag fields=1,3\n").unwrap();
    assert_eq!(c.mode_count, Some(16));
    assert_eq!(c.checks.len(), 2);
    assert_eq!(c.field_modes, vec![1, 3]);
}

#[test]
fn polyline_file_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.csv"), "x,y\n0,0\n1,0\n1,oops\n").unwrap();
    let err = ScenarioConfig::parse("scenario=custom bc=soft polyline=p.csv\n", dir.path()).unwrap_err();
    let WsError::Parse { location, .. } = err else { panic!("{err:?}") };
    assert!(location.ends_with("p.csv:4"), "{location}");
    fs::write(dir.path().join("q.csv"), "0,0\n1,0\n0,1\n").unwrap();
    let c = ScenarioConfig::parse("scenario=custom bc=soft polyline=q.csv\n", dir.path()).unwrap();
    assert_eq!(c.polyline.unwrap().len(), 3);
}

fn random_unitary(n: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    a.qr().q()
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let id = DMatrix::<C64>::identity(3, 3);
    let mut buf = Vec::new();
    write_complex_matrix_to(&mut buf, &id).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert_eq!(parse_complex_matrix(&text).unwrap(), id);

    let u = random_unitary(8, 7);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    write_complex_matrix(&path, &u).unwrap();
    let back = read_complex_matrix(&path).unwrap();
    let diff = u.iter().zip(back.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert_eq!(diff, 0.0);

    let big = random_unitary(111, 11);
    let mut buf = Vec::new();
    write_complex_matrix_to(&mut buf, &big).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 12321);
}

#[test]
fn csv_rejects_malformed_input() {
    assert!(parse_complex_matrix("r,c\n").is_err());
    assert!(parse_complex_matrix("row,col,re,im\n0,0,1.0\n").is_err());
    assert!(parse_complex_matrix("row,col,re,im\n0,0,1,0\n0,1,1,0\n1,0,0,0\n").is_err());
    assert!(parse_complex_matrix("row,col,re,im\n0,0,1,0\n0,0,1,0\n").is_err());
    assert!(parse_complex_matrix("row,col,re,im\n0,0,x,0\n").is_err());
}

fn sphere_config(out: &Path) -> ScenarioConfig {
    let mut c = parse("scenario=sphere bc=hard a=1 k=1.5 M=16 checks=simdiag\n").unwrap();
    c.out = out.to_path_buf();
    c
}

#[test]
fn sphere_run_writes_artifacts_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&sphere_config(dir.path())).unwrap();
    assert!(o.pass());
    assert_eq!(o.delays.len(), 16);
    for f in ["smatrix.csv", "sprime.csv", "qmatrix.csv", "wmatrix.csv", "modes.csv", "spectrum.csv", "classification.csv", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let s = read_complex_matrix(&dir.path().join("smatrix.csv")).unwrap();
    assert_eq!(s, o.smatrix.data);
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    for g in &o.gates {
        let line = report.lines().find(|l| l.starts_with(&format!("{}=", g.name))).unwrap();
        let v: f64 = line.split_once('=').unwrap().1.parse().unwrap();
        assert!((v - g.value).abs() <= 1e-6 * g.value.abs().max(1e-300));
    }
    assert!(report.lines().any(|l| l == "pass=true"));
    assert!(o.gate("unimodularity").is_some());
}

#[test]
fn reruns_are_byte_identical() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut c = parse("scenario=cylinder bc=soft a=1 k=1 M=9\n").unwrap();
    c.out = d1.path().to_path_buf();
    run_scenario(&c).unwrap();
    c.out = d2.path().to_path_buf();
    run_scenario(&c).unwrap();
    let mut names: Vec<_> = fs::read_dir(d1.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8);
    for n in names {
        assert_eq!(fs::read(d1.path().join(&n)).unwrap(), fs::read(d2.path().join(&n)).unwrap(), "{n:?}");
    }
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.conf");
    fs::write(&p, text).unwrap();
    p
}

fn run_bin(args: &[&str]) -> i32 {
    Command::new(BIN).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();

    let cfg = write_config(dir.path(), "scenario=sphere bc=soft a=1 k=1 M=9\n");
    assert_eq!(run_bin(&["--config", cfg.to_str().unwrap(), "--out", out_s, "--check", "simdiag,volume-q"]), 0);
    assert!(out.join("report.txt").exists());

    let cfg = write_config(dir.path(), "scenario=sphere bc=soft a=1 k=1 M=9\nnot_a_key=1\n");
    assert_eq!(run_bin(&["--config", cfg.to_str().unwrap(), "--out", out_s]), 3);
    let missing = dir.path().join("missing.conf");
    assert_eq!(run_bin(&["--config", missing.to_str().unwrap()]), 3);

    let cfg = write_config(dir.path(), "scenario=sphere bc=soft a=1 k=1 M=9\n");
    assert_eq!(run_bin(&["--config", cfg.to_str().unwrap(), "--out", out_s, "--check", "bogus"]), 3);
    assert_eq!(run_bin(&["--config", cfg.to_str().unwrap(), "--out", out_s, "--modes", "0"]), 3);

    let cfg = write_config(dir.path(), "scenario=cylinder bc=hard a=1 k=1 M=7 gate=1e-30\n");
    assert_eq!(run_bin(&["--config", cfg.to_str().unwrap(), "--out", out_s, "--seed", "3"]), 2);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("pass=false"));
    assert!(report.contains("seed=3"));
}
