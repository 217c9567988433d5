use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isoent::io::basis_json;
use isoent::rng::{haar_unitary, seeded};
use isoent::Basis;
use serde_json::Value;

const EJM_ARGS: [&str; 5] = ["--family", "elegant", "--theta", "0.7853981634", "--zeta"];

fn isoent() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_isoent"));
    c.env_remove("ISOENT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    isoent().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    stdout(o)
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn ejm_file(dir: &Path) -> PathBuf {
    let p = dir.join("ejm.json");
    let mut args = vec!["gen"];
    args.extend(EJM_ARGS);
    args.extend(["1.5707963268", "--out", p.to_str().unwrap()]);
    let o = run(&args);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty(), "--out keeps stdout empty");
    p
}

#[test]
fn gen_elegant_reports_quarter_tangle() {
    let mut args = vec!["gen"];
    args.extend(EJM_ARGS);
    args.push("1.5707963268");
    let v = json(&run(&args));
    assert!((v["tangle"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    for t in v["tangles"].as_array().unwrap() {
        assert!((t.as_f64().unwrap() - 0.25).abs() < 1e-9);
    }
}

#[test]
fn gen_skewed_is_product() {
    let v = json(&run(&["gen", "--family", "skewed", "--tau", "0.3"]));
    assert!(v["tangle"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn gen_general_at_singular_beta_exits_2() {
    let ok = run(&["gen", "--family", "general", "--delta", "0.7853981634", "--theta", "0.5", "--beta", "0.1"]);
    assert_eq!(code(&ok), 0);
    let o = run(&["gen", "--family", "general", "--delta", "0.3", "--theta", "0.5", "--beta", "1.5707963268"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bell"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["gen", "--family", "nope"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["scan", "--grid", "1"])), 2);
    assert_eq!(code(&run(&["triangle", "--eps", "2"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn classify_reference_bases() {
    let dir = tempfile::tempdir().unwrap();
    let ejm = ejm_file(dir.path());
    assert_eq!(json(&run(&["classify", ejm.to_str().unwrap()]))["label"], "elegant");

    let bsm = dir.path().join("bsm.json");
    let o = run(&["gen", "--family", "i5", "--phi", "1.5707963267948966", "--out", bsm.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&run(&["classify", bsm.to_str().unwrap()]))["label"], "bell");

    let mut rng = seeded(11);
    let haar = Basis::bipartite(haar_unitary(&mut rng, 4), (2, 2)).unwrap();
    let haar = write(dir.path(), "haar.json", &basis_json(&haar));
    assert_eq!(json(&run(&["classify", haar.to_str().unwrap()]))["label"], "not-iso-entangled");
}

#[test]
fn bad_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // columns are not orthonormal
    let skewed = write(
        dir.path(),
        "skew.json",
        r#"{"matrix": [[[1,0],[1,0],[0,0],[0,0]],
                       [[0,0],[0,0],[0,0],[0,0]],
                       [[0,0],[0,0],[1,0],[0,0]],
                       [[0,0],[0,0],[0,0],[1,0]]]}"#,
    );
    assert_eq!(code(&run(&["classify", skewed.to_str().unwrap()])), 3);
    let garbage = write(dir.path(), "garbage.json", "{\"matrix\": 3}");
    assert_eq!(code(&run(&["tangle", garbage.to_str().unwrap()])), 3);
    assert_eq!(code(&run(&["tangle", dir.path().join("missing.json").to_str().unwrap()])), 3);
}

#[test]
fn gen_output_feeds_basis_commands() {
    let dir = tempfile::tempdir().unwrap();
    let ejm = ejm_file(dir.path());
    let p = ejm.to_str().unwrap();
    let check = json(&run(&["check", p]));
    assert_eq!(check["orthonormal"], true);
    assert_eq!(check["iso_entangled"], true);
    let canon = json(&run(&["canonicalize", p]));
    let tau = canon["params"]["tau"].as_f64().unwrap();
    assert!(tau.sin().abs() < 1e-6, "tau {tau}");
}

#[test]
fn scan_ejm_noise_endpoints() {
    let rows = csv_rows(&run(&["scan", "--curve", "ejm-noise", "--grid", "11"]));
    assert_eq!(rows[0].join(","), "param,p1,p2,p3,finner_margin,max_deviation");
    assert_eq!(rows.len(), 12);
    let num = |r: &[String], i: usize| r[i].parse::<f64>().unwrap();
    let first = &rows[1];
    assert!((num(first, 1) - 25.0 / 256.0).abs() < 1e-12);
    assert!((num(first, 2) - 1.0 / 256.0).abs() < 1e-12);
    assert!((num(first, 3) - 5.0 / 256.0).abs() < 1e-12);
    let last = &rows[11];
    assert!((num(last, 0) - 1.0).abs() < 1e-12);
    assert!((num(last, 1) - 1.0 / 64.0).abs() < 1e-12);
    assert!((num(last, 3) - 1.0 / 64.0).abs() < 1e-12);
}

#[test]
fn scan_elegant_opi_stays_on_the_elegant_statistics() {
    let rows = csv_rows(&run(&["scan", "--curve", "elegant-opi", "--grid", "5"]));
    for r in &rows[1..] {
        assert!(r[5].parse::<f64>().unwrap() <= 1e-9, "{r:?}");
    }
}

#[test]
fn triangle_full_noise_is_uniform() {
    let rows = csv_rows(&run(&["triangle", "--eps", "1"]));
    assert_eq!(rows[0].join(","), "a,b,c,p");
    assert_eq!(rows.len(), 65);
    for r in &rows[1..] {
        assert!((r[3].parse::<f64>().unwrap() - 1.0 / 64.0).abs() < 1e-12);
    }
    let summary = csv_rows(&run(&["triangle", "--summary"]));
    assert_eq!(summary.len(), 2);
}

#[test]
fn embed_endpoint_rows() {
    let rows = csv_rows(&run(&["embed", "--grid", "2"]));
    assert_eq!(rows[0].join(","), "phi,beta,theta,delta,cost,status");
    for r in &rows[1..] {
        assert!(r[4].parse::<f64>().unwrap() <= 1e-12, "{r:?}");
        assert_eq!(r[5], "ok");
    }
}

#[test]
fn highdim_writes_latin_side_file() {
    let dir = tempfile::tempdir().unwrap();
    let latin = dir.path().join("latin.csv");
    let v = json(&run(&["highdim", "--d", "4", "--matrix", "robust", "--chi", "0.4", "--latin-out", latin.to_str().unwrap()]));
    assert!(v["orthonormality_residual"].as_f64().unwrap() < 1e-12);
    assert!(v["trace_orthogonality_residual"].as_f64().unwrap() < 1e-12);
    let back = run(&["highdim", "--d", "4", "--matrix", "robust", "--chi", "0.4", "--latin-file", latin.to_str().unwrap()]);
    assert_eq!(stdout(&back), serde_json::to_string_pretty(&v).unwrap() + "\n");
    assert_eq!(code(&run(&["highdim", "--d", "3", "--latin-file", latin.to_str().unwrap()])), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", r#"{"command": "scan", "scan": {"curve": "ejm-noise", "grid": 3}}"#);
    let c = cfg.to_str().unwrap();
    assert_eq!(csv_rows(&run(&["--config", c, "scan"])).len(), 4);
    assert_eq!(csv_rows(&run(&["--config", c, "scan", "--grid", "5"])).len(), 6);
    // the document names a different command
    assert_eq!(code(&run(&["--config", c, "triangle"])), 2);
    let bad = write(dir.path(), "bad.json", r#"{"scan": {"grids": 3}}"#);
    assert_eq!(code(&run(&["--config", bad.to_str().unwrap(), "scan"])), 2);
}

#[test]
fn seed_sources_and_determinism() {
    let args = ["highdim", "--d", "3", "--construction", "conditional"];
    let a = stdout(&run(&args));
    assert_eq!(a, stdout(&run(&args)), "repeat runs are byte-identical");
    let flagged = stdout(&run(&["--seed", "9", "highdim", "--d", "3", "--construction", "conditional"]));
    assert_ne!(a, flagged);
    let env = isoent().env("ISOENT_SEED", "9").args(args).output().unwrap();
    assert_eq!(stdout(&env), flagged);
    let bad = isoent().env("ISOENT_SEED", "nine").args(args).output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn out_replaces_the_file_whole() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    std::fs::write(&out, "stale contents that are longer than nothing").unwrap();
    let o = run(&["--out", out.to_str().unwrap(), "scan", "--grid", "2"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("param,p1"));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}
