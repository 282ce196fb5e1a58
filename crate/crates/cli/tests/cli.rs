use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn lexc<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_lexc")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

#[test]
fn run_rainy_sky() {
    let c = corpus();
    let out = lexc([
        "run".as_ref(),
        c.join("rainy-sky/contract.lexc").as_os_str(),
        "--scenario".as_ref(),
        c.join("rainy-sky/1.scn").as_os_str(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("PAY Bank Buyer GBP 28499690.96\n"));
    assert_eq!(stdout(&out), fs::read_to_string(c.join("rainy-sky/expected/1.ledger")).unwrap());
}

#[test]
fn lint_epcr_reports_findings() {
    let out = lexc(["lint".as_ref(), corpus().join("epcr/contract.lexc").as_os_str()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("LEX001"));
}

#[test]
fn fm_classify_and_filter() {
    let catalog = corpus().join("paper_fm_catalog.tsv");
    let cat = catalog.to_str().unwrap();
    let out = lexc(["fm", "classify", "--catalog", cat, "--event", "Tsunami"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "included\n");

    let out = lexc(["fm", "filter", "--catalog", cat, "--impact-threshold", "off"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 8);
    assert!(stdout(&out).lines().any(|l| l == "Nuclear Accident"));

    let out = lexc(["fm", "classify", "--catalog", cat, "--event", "Meteor Strike"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("lexc: "));

    let out = lexc(["fm", "classify", "--catalog", cat, "--event", "Tsunami", "--impact-threshold", "high"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn exit_codes_for_failures() {
    let dir = tempfile::tempdir().unwrap();
    let c = corpus();

    let out = lexc(["lint", "--no-such-flag"]);
    assert_eq!(code(&out), 2);

    let broken = dir.path().join("broken.lexc");
    fs::write(&broken, "contract \"Broken\" {\n  input x: ;\n}\n").unwrap();
    let out = lexc(["parse".as_ref(), broken.as_os_str()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("broken.lexc:2:"), "{}", stderr(&out));

    let out = lexc([
        "run".as_ref(),
        c.join("privacy-international/contract.lexc").as_os_str(),
        "--scenario".as_ref(),
        c.join("privacy-international/3.scn").as_os_str(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("ERROR UnboundInput secretary_of_state_order"));

    let out = lexc(["parse".as_ref(), dir.path().join("missing.lexc").as_os_str()]);
    assert_eq!(code(&out), 4);
}

#[test]
fn json_output() {
    let c = corpus();
    let out = lexc([
        "--format".as_ref(),
        "json".as_ref(),
        "run".as_ref(),
        c.join("rainy-sky/contract.lexc").as_os_str(),
        "--scenario".as_ref(),
        c.join("rainy-sky/1.scn").as_os_str(),
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["ok"], true);

    let out = lexc(["lint".as_ref(), c.join("epcr/contract.lexc").as_os_str(), "--format".as_ref(), "json".as_ref()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["findings"].as_array().unwrap().iter().any(|f| f["code"] == "LEX001"));
}

#[test]
fn output_is_deterministic() {
    let c = corpus();
    let args: [std::ffi::OsString; 4] = [
        "run".into(),
        c.join("arnold-v-britton/contract.lexc").into(),
        "--scenario".into(),
        c.join("arnold-v-britton/10.scn").into(),
    ];
    let first = lexc(&args);
    for _ in 0..3 {
        assert_eq!(lexc(&args).stdout, first.stdout);
    }
    let report = |_| stdout(&lexc(["corpus".as_ref(), "run".as_ref(), c.as_os_str()]));
    assert_eq!(report(0), report(1));
}

/// Every contract lints to 0 or 1 per its expected findings; every scenario
/// runs to 0 or 3 per its golden ledger.
#[test]
fn exit_code_sweep() {
    let c = corpus();
    let mut runs = 0;
    for entry in fs::read_dir(&c).unwrap() {
        let dir = entry.unwrap().path();
        if !dir.is_dir() {
            continue;
        }
        let contract = dir.join("contract.lexc");
        let meta = fs::read_to_string(dir.join("meta.tsv")).unwrap();
        let expects_lint = meta.lines().any(|l| l.starts_with("lint\t"));
        let out = lexc(["lint".as_ref(), contract.as_os_str()]);
        assert_eq!(code(&out), if expects_lint { 1 } else { 0 }, "{}", dir.display());

        for file in fs::read_dir(&dir).unwrap() {
            let scn = file.unwrap().path();
            if scn.extension().is_some_and(|e| e == "scn") {
                let stem = scn.file_stem().unwrap().to_str().unwrap().to_string();
                let expected = fs::read_to_string(dir.join(format!("expected/{stem}.ledger"))).unwrap();
                let out = lexc(["run".as_ref(), contract.as_os_str(), "--scenario".as_ref(), scn.as_os_str()]);
                if expected.starts_with("ERROR ") {
                    assert_eq!(code(&out), 3, "{}", scn.display());
                    assert!(stderr(&out).contains(expected.trim_end()), "{}", scn.display());
                } else {
                    assert_eq!(code(&out), 0, "{}", scn.display());
                    assert_eq!(stdout(&out), expected, "{}", scn.display());
                }
                runs += 1;
            }
        }
    }
    assert!(runs > 20);
}

#[test]
fn corpus_run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let out = lexc(["corpus".as_ref(), "run".as_ref(), corpus().as_os_str(), "--report".as_ref(), report.as_os_str()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let written = fs::read_to_string(&report).unwrap();
    assert_eq!(written, stdout(&out));
    assert!(written.contains("FLAG"));
}

#[test]
fn tampered_corpus_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("corpus");
    copy_dir(&corpus(), &copy);
    let ledger = copy.join("rainy-sky/expected/1.ledger");
    let text = fs::read_to_string(&ledger).unwrap().replace("28499690.96", "28499690.97");
    fs::write(&ledger, text).unwrap();

    let out = lexc(["corpus".as_ref(), "run".as_ref(), copy.as_os_str()]);
    assert!(matches!(code(&out), 1 | 2), "{}", code(&out));
    assert!(stderr(&out).contains("rainy-sky") || stderr(&out).contains("manifest"));

    // after regenerating the manifest the edit is caught as a ledger mismatch
    assert_eq!(code(&lexc(["corpus".as_ref(), "manifest".as_ref(), copy.as_os_str()])), 0);
    let out = lexc(["corpus".as_ref(), "run".as_ref(), copy.as_os_str()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("rainy-sky"));

    // blessing restores the golden ledger
    assert_eq!(code(&lexc(["corpus".as_ref(), "bless".as_ref(), copy.as_os_str()])), 0);
    assert_eq!(code(&lexc(["corpus".as_ref(), "run".as_ref(), copy.as_os_str()])), 0);
}
