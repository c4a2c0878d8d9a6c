use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relay-secrecy"))
}

#[test]
fn manifest_reproduces_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let status = bin()
        .args(["sweep", "-o"])
        .arg(&first)
        .args(["n_slots=2000", "replicates=2", "values=0.5,2", "protocols=fixed,conventional", "seed=9"])
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = dir.path().join("a.csv.manifest");
    let status = bin().args(["sweep", "-c"]).arg(&manifest).arg("-o").arg(&second).status().unwrap();
    assert!(status.success());
    let a = fs::read_to_string(&first).unwrap();
    assert_eq!(a, fs::read_to_string(&second).unwrap());
    assert!(a.starts_with("# schema="));
    assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn run_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let status = bin().args(["run", "n_slots=1000", "protocol=adaptive", "-o"]).arg(&out).status().unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("adaptive,R,1,1,"));
}

#[test]
fn analyze_prints_reference_outage() {
    let out = bin().args(["analyze", "protocol=fixed"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("outage_sd=0.682924"));
    assert!(text.contains("analytic_throughput="));
}

#[test]
fn bad_input_exits_nonzero() {
    for args in [vec!["run", "E_max=1"], vec!["run", "nope=3"], vec!["sweep", "protocols=fast"], vec!["run", "P_S"]] {
        let out = bin().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?}");
    }
    let out = bin().args(["run", "-c", "/nonexistent/cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
