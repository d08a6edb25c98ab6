use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lrcone_cli::config::LoadedConfig;
use lrcone_cli::RunError;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lrcone"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_config(path: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(path).arg("--out").arg(out).args(extra).output().unwrap()
}

#[test]
fn list_shows_five_kinds() {
    let o = bin().arg("list").output().unwrap();
    assert!(o.status.success());
    let kinds: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(kinds, ["particle", "lr", "commutator", "ladder", "verify"]);
}

#[test]
fn describe_texts() {
    let lr = stdout(&bin().args(["describe", "lr"]).output().unwrap());
    assert!(lr.contains("trace norm") && lr.contains("τ^R"), "{lr}");
    let particle = stdout(&bin().args(["describe", "particle"]).output().unwrap());
    assert!(particle.contains("v > 2d|J|"), "{particle}");
    let unknown = bin().args(["describe", "teleport"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).contains("unknown experiment kind"));
}

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            LoadedConfig::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn slow_particle_velocity_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(configs().join("particle_chain11.toml"))
        .unwrap()
        .replace("v = 2.5", "v = 2.0");
    let path = dir.path().join("slow.toml");
    std::fs::write(&path, &src).unwrap();
    let o = run_config(&path, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let line = src.lines().position(|l| l.starts_with("v = ")).unwrap() + 1;
    let err = stderr(&o);
    assert!(err.contains(&format!("line {line}, column 1")), "{err}");
    assert!(err.contains("particle.v"), "{err}");
}

#[test]
fn unknown_key_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(configs().join("lr_chain10.toml"))
        .unwrap()
        .replace("[lr]\n", "[lr]\nradius = 3\n");
    let path = dir.path().join("typo.toml");
    std::fs::write(&path, &src).unwrap();
    let o = run_config(&path, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let line = src.lines().position(|l| l.starts_with("radius")).unwrap() + 1;
    assert!(stderr(&o).contains(&format!("line {line}")), "{}", stderr(&o));
}

#[test]
fn oversized_dense_sweep_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(configs().join("lr_chain10.toml"))
        .unwrap()
        .replace("extents = [10]", "extents = [14]")
        .replace("n_tot = 2\nn_max = 2", "n_tot = 4\nn_max = 4")
        .replace("lambda = 1.0\n", "");
    let path = dir.path().join("big.toml");
    std::fs::write(&path, src).unwrap();
    let o = run_config(&path, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("2380"));
}

#[test]
fn verify_passes() {
    let o = bin().args(["verify", "--seed", "3"]).output().unwrap();
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains(", 0 failed"));

    let dir = tempfile::tempdir().unwrap();
    let o = run_config(&configs().join("verify_small.toml"), dir.path(), &[]);
    assert!(o.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify_small.json")).unwrap()).unwrap();
    assert!(json["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn invariant_failures_exit_4() {
    assert_eq!(RunError::Invariant(Vec::new()).exit_code(), 4);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("commutator_chain12.toml");
    assert!(run_config(&cfg, a.path(), &["--threads", "1"]).status.success());
    assert!(run_config(&cfg, b.path(), &["--threads", "4"]).status.success());
    let read = |d: &Path| std::fs::read(d.join("commutator_chain12.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn outputs_embed_version_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("lr_chain10.toml");
    assert!(run_config(&cfg, dir.path(), &["--threads", "2"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("lr_chain10.csv")).unwrap();
    let hash = lrcone_cli::output::config_hash(&std::fs::read_to_string(&cfg).unwrap());
    let first = csv.lines().next().unwrap();
    assert_eq!(first, format!("# lrcone {} config_sha256={hash}", env!("CARGO_PKG_VERSION")));
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "experiment_id,d,L_extents,N_tot,n_max,J,U,mu,potential_form,eta,nu,lambda,x,r,R,t,s,value,flag"
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lr_chain10.json")).unwrap()).unwrap();
    assert_eq!(json["config_sha256"], hash);
    assert_eq!(json["basis_dim"], 55);
    assert_eq!(json["density_check"]["passed"], true);

    let golden = std::fs::read_to_string(configs().join("golden/lr_chain10.csv")).unwrap();
    let body = |s: &str| s.split_once('\n').unwrap().1.to_string();
    assert_eq!(body(&csv), body(&golden));
}
