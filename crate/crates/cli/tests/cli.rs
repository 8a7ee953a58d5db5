use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sseq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sseq"))
        .args(args)
        .current_dir(dir)
        .env_remove("SSEQ_FIELD")
        .output()
        .expect("run sseq")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture(dir: &Path, file: &str, args: &[&str]) {
    let mut full = vec!["fixture"];
    full.extend_from_slice(args);
    let o = sseq(&full, dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::write(dir.join(file), &o.stdout).unwrap();
}

#[test]
fn pi_t_is_not_a_surjection() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "pi_T.txt", &["pi_T"]);
    let o = sseq(&["predicates", "pi_T.txt", "--r", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("surjection: false"), "{}", stdout(&o));
}

#[test]
fn filtered_lambda_pages_match_lambda() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "lambda_fc_1.txt", &["lambda_fc", "1"]);
    fixture(dir.path(), "lambda_1.txt", &["lambda", "1"]);
    let o = sseq(&["ss", "lambda_fc_1.txt"], dir.path());
    assert!(o.status.success());
    fs::write(dir.path().join("e.txt"), &o.stdout).unwrap();
    let v = sseq(&["validate", "e.txt"], dir.path());
    assert_eq!(stdout(&v), "ok: spectral-sequence\n");
    let a = stdout(&sseq(&["pages", "e.txt"], dir.path()));
    let b = stdout(&sseq(&["pages", "lambda_1.txt"], dir.path()));
    assert_eq!(a, b);
}

#[test]
fn factor_writes_three_documents() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "f.txt", &["f"]);
    let o = sseq(&["factor", "f.txt", "--r", "1", "--out-dir", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for name in ["f.Pbar.txt", "f.i.txt", "f.p.txt"] {
        let path = dir.path().join("out").join(name);
        let v = sseq(&["validate", path.to_str().unwrap()], dir.path());
        assert!(v.status.success(), "{name}");
    }
    let p = sseq(&["predicates", "out/f.p.txt", "--r", "1"], dir.path());
    assert!(stdout(&p).contains("\nr-fibration: true"));
}

#[test]
fn rlp_agrees_and_homotopy_is_reflexive() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "f.txt", &["f"]);
    let o = sseq(&["rlp", "f.txt", "--r", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("agree true").count(), 2);
    let h = sseq(&["homotopy", "f.txt", "f.txt", "--r", "2"], dir.path());
    assert!(stdout(&h).starts_with("2-homotopic: true"));
}

#[test]
fn tot_then_ss_of_a_multicomplex() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "mc.txt", &["lambda_mc", "2"]);
    let t = sseq(&["tot", "mc.txt"], dir.path());
    assert!(stdout(&t).contains("kind filtered-complex"));
    fs::write(dir.path().join("tot.txt"), &t.stdout).unwrap();
    let a = stdout(&sseq(&["ss", "tot.txt"], dir.path()));
    let b = stdout(&sseq(&["ss", "mc.txt"], dir.path()));
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(sseq(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(sseq(&["validate", "missing.txt"], dir.path()).status.code(), Some(1));
    fs::write(dir.path().join("bad.txt"), "format 1\nfield Fp:7\nkind spectral-sequence\nstable 0\npage 0\nmodule (0,0):x\n").unwrap();
    let bad = sseq(&["validate", "bad.txt"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 6"));
    let clean = sseq(&["fuzz", "--check", "lifting", "--trials", "10", "--r", "1"], dir.path());
    assert_eq!(clean.status.code(), Some(0));
    assert!(stdout(&clean).contains("counterexamples=0"));
    let broken = sseq(&["fuzz", "--check", "axiom-d", "--trials", "10", "--mutation", "no-fibrations"], dir.path());
    assert_eq!(broken.status.code(), Some(3));
}

#[test]
fn field_selection() {
    let dir = TempDir::new().unwrap();
    let q = Command::new(env!("CARGO_BIN_EXE_sseq"))
        .args(["fixture", "S"])
        .env("SSEQ_FIELD", "Q")
        .output()
        .unwrap();
    assert!(stdout(&q).contains("field Q"));
    let f5 = sseq(&["--field", "Fp:5", "fixture", "T"], dir.path());
    assert!(stdout(&f5).contains("field Fp:5"));
    fs::write(dir.path().join("t5.txt"), &f5.stdout).unwrap();
    assert_eq!(sseq(&["validate", "t5.txt"], dir.path()).status.code(), Some(0));
    assert_eq!(sseq(&["--field", "Fp:7", "validate", "t5.txt"], dir.path()).status.code(), Some(2));
    assert_eq!(sseq(&["--field", "Fp:4", "fixture", "T"], dir.path()).status.code(), Some(1));
}

#[test]
fn pages_table_for_a_disk() {
    let dir = TempDir::new().unwrap();
    fixture(dir.path(), "d.txt", &["disk", "1", "1", "1"]);
    let o = stdout(&sseq(&["pages", "d.txt", "--page", "1"], dir.path()));
    assert_eq!(o, "page 1\n q\\p   0   1\n   1   1   1\n");
}
