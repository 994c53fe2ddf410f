//! End-to-end runs of the `semilinear-lab` binary.

use std::path::Path;
use std::process::{Command, Output};

use semilinear_lab::{Field, GridGeometry};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_semilinear-lab"));
    c.env_remove("SEMILINEAR_LAB_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const CASE_C: &str = r#"
[geometry]
N = 1
L = 4.0
M = 256

[params]
N = 1
p = 3.0
q = 3.0

[schedule]
T = 0.08
J = 16

[data]
case = "C"
c1 = C1
c2 = C1

[[norms]]
kind = "strong"
r = 1.0
alpha = 0.5
R = 1.0
phi = { family = "log_power", power = 1.0 }

[run]
c_values = [0.0]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn first_value(json: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    v["records"][0]["value"].as_f64().unwrap()
}

#[test]
fn classify_prints_case_and_rejects_small_pq() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["classify", "--N", "1", "--p", "3", "--q", "3"], tmp.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("C"));
    let o = run(&["classify", "--N", "2", "--p", "2", "--q", "3"], tmp.path());
    assert_eq!(stdout(&o).lines().next(), Some("A"));
    let o = run(&["classify", "--N", "1", "--p", "0.5", "--q", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pq"), "{}", stderr(&o));
}

#[test]
fn norm_of_indicator_and_homogeneity() {
    let tmp = tempfile::tempdir().unwrap();
    let g = GridGeometry::new(1, 4.0, 256).unwrap();
    let ind = Field::from_fn(g, |x| if x[0].abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
    let field = tmp.path().join("ind.bin");
    ind.save(&field).unwrap();
    let cfg = CASE_C.replace("C1", "1.0").replace(
        "[[norms]]\nkind = \"strong\"\nr = 1.0\nalpha = 0.5\nR = 1.0\nphi = { family = \"log_power\", power = 1.0 }",
        "[[norms]]\nkind = \"weak\"\nr = 2.0",
    );
    let path = write_config(tmp.path(), "weak.toml", &cfg);
    let o = run(&["norm", path.to_str().unwrap(), "--field", field.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    // cells whose centre lies in |x| < 1
    let measure = (ind.values().iter().filter(|v| **v > 0.0).count() as f64) * g.spacing();
    let v = first_value(&stdout(&o));
    assert!((v - measure.sqrt()).abs() < 1e-12, "{v}");
    assert!((v - 2f64.sqrt()).abs() < 2e-2, "{v}");

    let one = write_config(tmp.path(), "c1.toml", &CASE_C.replace("C1", "1.0"));
    let two = write_config(tmp.path(), "c2.toml", &CASE_C.replace("C1", "2.0"));
    let a = first_value(&stdout(&run(&["norm", one.to_str().unwrap()], tmp.path())));
    let b = first_value(&stdout(&run(&["norm", two.to_str().unwrap()], tmp.path())));
    assert!((b - 2.0 * a).abs() <= 1e-12 * b, "{a} {b}");
}

#[test]
fn morrey_of_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let g = GridGeometry::new(1, 4.0, 64).unwrap();
    let field = tmp.path().join("c.csv");
    Field::constant(g, 3.0).unwrap().save(&field).unwrap();
    let cfg = CASE_C.replace("C1", "1.0").replace("M = 256", "M = 64").replace(
        "kind = \"strong\"\nr = 1.0\nalpha = 0.5\nR = 1.0\nphi = { family = \"log_power\", power = 1.0 }",
        "kind = \"morrey\"\nr = 2.0\nalpha = 2.0\nR = 1.0",
    );
    let path = write_config(tmp.path(), "m.toml", &cfg);
    let o = run(&["norm", path.to_str().unwrap(), "--field", field.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let ball = g.ball_offsets(1.0).len() as f64 * g.cell_volume();
    let v = first_value(&stdout(&o));
    assert!((v - 3.0 * ball.sqrt()).abs() < 1e-12, "{v} vs {}", 3.0 * ball.sqrt());
}

#[test]
fn norm_output_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), "c.toml", &CASE_C.replace("C1", "1.0"));
    let a = run(&["norm", path.to_str().unwrap()], tmp.path());
    let b = run(&["norm", path.to_str().unwrap(), "--jobs", "1"], tmp.path());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_config_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = CASE_C.replace("C1", "1.0").replace("J = 16", "J = 16\nsteps = 3");
    let path = write_config(tmp.path(), "bad.toml", &bad);
    let o = run(&["norm", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schedule.steps"), "{}", stderr(&o));

    let mismatch = CASE_C.replace("C1", "1.0").replace("case = \"C\"", "case = \"A\"");
    let path = write_config(tmp.path(), "mismatch.toml", &mismatch);
    let o = run(&["dichotomy", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("data.case"), "{}", stderr(&o));
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--suite", "semigroup"], tmp.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(tmp.path().join("run_verify.json").exists());
    let o = run(&["verify", "--suite", "inequalities", "--seed", "42"], tmp.path());
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run_verify.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 42);
    assert_eq!(report["schema_version"], 1);
    assert!(report["suites"][0]["checks"].as_array().unwrap().iter().all(|c| c["value"].is_number()));
    assert_eq!(run(&["verify"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "bogus"], tmp.path()).status.code(), Some(2));
}

#[test]
fn dichotomy_single_zero_amplitude() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), "c.toml", &CASE_C.replace("C1", "1.0"));
    let o = run(&["dichotomy", path.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("run_dichotomy.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("0,converged"), "{csv}");
}

#[test]
fn dichotomy_case_f_huge_mass_blows_up() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"
[geometry]
N = 1
L = 4.0
M = 64

[params]
N = 1
p = 1.2
q = 2.0

[schedule]
T = 0.2
J = 16

[data]
case = "F"
c1 = 1.0
c2 = 1.0
nu_mass = 1000.0
nu_shape = "ball"

[run]
c_values = [0.1, 1.0, 10.0, 100.0]
"#;
    let path = write_config(tmp.path(), "f.toml", cfg);
    let o = run(&["dichotomy", path.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("run_dichotomy.csv")).unwrap();
    let verdicts: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(verdicts.last(), Some(&"blew_up"), "{csv}");
    assert!(verdicts.iter().filter(|v| **v == "blew_up").count() >= 2, "{csv}");
}

#[test]
fn iterate_evolve_and_rearrange_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = CASE_C.replace("C1", "0.05") + "\n[output]\nprefix = \"c\"\nformats = [\"json\", \"csv\", \"binary\"]\n";
    let path = write_config(tmp.path(), "c.toml", &cfg);
    let o = run(&["iterate", path.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged"));
    for f in ["c_iterate.json", "c_iterate.csv", "c_u_T.bin", "c_v_T.csv"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let u = Field::load(&tmp.path().join("c_u_T.bin")).unwrap();
    let u_csv = Field::load(&tmp.path().join("c_u_T.csv")).unwrap();
    assert_eq!(u.values(), u_csv.values());

    let o = run(&["evolve", path.to_str().unwrap(), "--t", "0.01"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "evolve");
    assert!(tmp.path().join("c_evolve_mu.bin").exists());

    let o = run(&["rearrange", path.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let levels: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(levels.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["verify", "--suite", "phi"]).env("SEMILINEAR_LAB_OUT", tmp.path()).output().unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("run_verify.json").exists());
}
