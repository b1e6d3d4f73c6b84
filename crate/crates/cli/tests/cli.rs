use std::process::{Command, Output};

fn gbd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbd")).args(args).output().expect("run gbd")
}

fn payload(o: &Output) -> String {
    let s = String::from_utf8(o.stdout.clone()).unwrap();
    s.lines().filter(|l| !l.starts_with("# wall time")).collect::<Vec<_>>().join("\n")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn verdicts_map_to_exit_codes() {
    let yes = gbd(&["probe", "irreducible", "5", "2", "--family", "renewal_shift"]);
    assert_eq!(code(&yes), 0);
    assert!(payload(&yes).contains("recheck: ok"));
    let no = gbd(&["probe", "irreducible", "3", "1", "--family", "shifted_Bsecond"]);
    assert_eq!(code(&no), 1);
    assert!(payload(&no).contains("TriangularSupport"));
    assert!(payload(&no).contains("recheck: ok"));
    let unknown = gbd(&["iso", "search", "--other-family", "parity_1", "--levels", "2", "--budget", "10"]);
    assert_eq!(code(&unknown), 3, "{}", payload(&unknown));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&gbd(&["report", "bogus"])), 2);
    assert_eq!(code(&gbd(&["probe", "nope"])), 2);
    assert_eq!(code(&gbd(&["probe", "connected", "--window", "3:1"])), 2);
    assert_eq!(code(&gbd(&["probe", "connected", "--family", "no_such_family"])), 2);
}

#[test]
fn reports_are_deterministic() {
    for args in [
        &["orbit", "minimal", "--family", "renewal_shift", "--window", "1:8"][..],
        &["construct", "toeplitz", "--generator", "vertical:0", "--generator", "leftmost:0", "--horizon", "500"],
        &["iso", "check", "--bijection", "interleave", "--other-family", "interleaved_Bprime"],
        &["export", "dot", "--family", "b_infinity", "--levels", "1", "--window", "1:5"],
    ] {
        let a = gbd(args);
        let b = gbd(args);
        assert_eq!(code(&a), 0, "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(payload(&a), payload(&b));
    }
}

#[test]
fn dot_export_has_one_edge_per_multiplicity() {
    let o = gbd(&["export", "dot", "--levels", "1", "--window", "0:0"]);
    let s = String::from_utf8(o.stdout).unwrap();
    assert_eq!(s.matches("\"0:0\" -> \"1:0\"").count(), 2);
}

#[test]
fn quick_report_passes_and_writes_out_file() {
    let out = std::env::temp_dir().join(format!("gbd-quick-{}.txt", std::process::id()));
    let o = gbd(&["report", "quick", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", payload(&o));
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written.matches("PASS").count(), 5);
    let _ = std::fs::remove_file(out);
}

#[test]
fn orbit_no_names_the_orbit_not_the_diagram() {
    let o = gbd(&["orbit", "transitive", "--family", "star_odometer", "--generator", "vertical:4", "--window", "1:5"]);
    assert_eq!(code(&o), 1, "{}", payload(&o));
    assert!(payload(&o).contains("this orbit is not dense"));
}
