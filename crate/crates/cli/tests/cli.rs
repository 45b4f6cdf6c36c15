use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn nlse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlse"))
        .args(args)
        .env_remove("NLSE_CORPUS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn lag(name: &str) -> String {
    corpus().join(name).display().to_string()
}

#[test]
fn derive_prints_the_nonlinearity() {
    let o = nlse(&["derive", &lag("gp_m2.lag")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("nonlinearity: −2e*|ψ|²ψ"), "{out}");
    assert!(out.contains("iħ∂ψ/∂t = −(ħ²/2m)∇²ψ + Vψ − 2e*|ψ|²ψ"), "{out}");

    let linear = stdout(&nlse(&["derive", &lag("linear.lag")]));
    assert!(linear.contains("linear (N = 0)"), "{linear}");
}

#[test]
fn derive_reports_missing_files_and_syntax_errors() {
    let o = nlse(&["derive", "does_not_exist.lag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no such file"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lag");
    fs::write(&bad, "i*hbar*psi^* * dpsi/dt + e*(psi^* *psi)^(").unwrap();
    let o = nlse(&["derive", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1:41: expected an exponent"), "{}", stderr(&o));
}

#[test]
fn dimension_expands_couplings() {
    let o = nlse(&["dimension", &lag("gp_m2.lag"), "e"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("[E][L]^3 = ħ³ m⁻² c⁻¹ × dimensionless g"), "{out}");
    assert!(out.contains("kinetic-to-nonlinear ratio: 1.29"), "{out}");

    let out = stdout(&nlse(&["dimension", &lag("quintic_m3.lag"), "e", "--length", "1e-9"]));
    assert!(out.contains("[E][L]^6 = ħ⁶ m⁻⁵ c⁻⁴"), "{out}");

    assert_eq!(nlse(&["dimension", &lag("gp_m2.lag"), "q"]).status.code(), Some(2));
}

#[test]
fn verify_reproduces_the_table() {
    let o = nlse(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("(46)") && out.contains("erratum: constant-term sign"));
    assert!(out.contains("(23)") && out.contains("D=1 only"));
    assert_eq!(out.lines().filter(|l| l.contains("FAIL")).count(), 0);
}

#[test]
fn verify_flags_a_corrupted_corpus() {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(corpus()).unwrap() {
        let path = entry.unwrap().path();
        fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    fs::write(dir.path().join("power_m4.lag"), "i*hbar*psi^* * dpsi/dt + e*(psi^* *psi)^3").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nlse"))
        .arg("verify")
        .env("NLSE_CORPUS", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let failing: Vec<&str> = out.lines().filter(|l| l.contains("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{out}");
    assert!(failing[0].starts_with("(41)"));

    let empty = tempfile::tempdir().unwrap();
    let o = nlse(&["verify", "--corpus", empty.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("corpus missing"));
}

fn write_job(dir: &Path, name: &str, body: &str) -> PathBuf {
    for file in ["gp_m2.lag", "linear.lag", "log_density.lag"] {
        fs::copy(corpus().join(file), dir.join(file)).unwrap();
    }
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SOLITON_JOB: &str = "\
[equation]
lagrangian = gp_m2.lag
[constants]
e = 0.5+0i
[initial]
kind = sech
amplitude = 1.0
velocity = 0.5
[grid]
points = 128
lengths = 30
[run]
dt = 1e-3
t_final = 0.5
snapshot_stride = 100
observable_stride = 10
[output]
dir = out
[check]
tolerance = 1e-5
";

#[test]
fn evolve_writes_outputs_and_checks_the_soliton() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "soliton.ini", SOLITON_JOB);
    let o = nlse(&["evolve", job.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("method: strang"));
    assert!(out.contains("soliton profile L∞ error"), "{out}");

    let out_dir = dir.path().join("out");
    let csv = fs::read_to_string(out_dir.join("observables.csv")).unwrap();
    assert!(csv.starts_with("t,norm,energy,momentum_x,width_x,peak\n"));
    assert_eq!(csv.lines().count(), 1 + 1 + 50);
    assert_eq!(fs::read_dir(out_dir.join("snapshots")).unwrap().count(), 1 + 5);
    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("e = 0.5+0i") && manifest.contains("method = strang"));
}

#[test]
fn manifest_reruns_to_identical_observables() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "soliton.ini", SOLITON_JOB);
    assert_eq!(nlse(&["evolve", job.to_str().unwrap()]).status.code(), Some(0));
    let first = fs::read(dir.path().join("out/observables.csv")).unwrap();

    // The manifest is itself a job file; point it at a fresh directory.
    let manifest = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    let again = dir.path().join("again");
    let rerun = manifest.replace(
        &format!("dir = {}", fs::canonicalize(dir.path().join("out")).unwrap().display()),
        &format!("dir = {}", again.display()),
    );
    let rerun_path = dir.path().join("rerun.ini");
    fs::write(&rerun_path, rerun).unwrap();
    assert_eq!(nlse(&["evolve", rerun_path.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(fs::read(again.join("observables.csv")).unwrap(), first);
}

#[test]
fn evolve_checks_the_gaussian_width_law() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "gauss.ini",
        "[equation]\nlagrangian = linear.lag\n[initial]\nkind = gaussian\nsigma = 1\n\
         [grid]\npoints = 256\nlengths = 40\n[run]\ndt = 1e-2\nt_final = 2\n[output]\ndir = out\n[check]\ntolerance = 1e-4\n",
    );
    let o = nlse(&["evolve", job.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("width-law relative error"));
}

#[test]
fn evolve_rejects_bad_jobs_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(dir.path(), "bad.ini", &SOLITON_JOB.replace("t_final = 0.5", "t_final = 1e-4"));
    let o = nlse(&["evolve", job.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dt must not exceed t_final"));
    assert!(!dir.path().join("out").exists());

    let job = write_job(dir.path(), "two.ini", &SOLITON_JOB.replace("kind = sech", "kind = cosine"));
    assert_eq!(nlse(&["evolve", job.to_str().unwrap()]).status.code(), Some(2));

    let job = write_job(dir.path(), "unbound.ini", &SOLITON_JOB.replace("e = 0.5+0i", "z = 1"));
    assert_eq!(nlse(&["evolve", job.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn evolve_reports_blow_up_as_a_runtime_abort() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "blowup.ini",
        "[equation]\nlagrangian = linear.lag\n[initial]\nkind = gaussian\nsigma = 0.5\n\
         [grid]\npoints = 64\nlengths = 20\n[run]\ndt = 0.2\nt_final = 5\nmethod = rk4\n[output]\ndir = out\n",
    );
    let o = nlse(&["evolve", job.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}
