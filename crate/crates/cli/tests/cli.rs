use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn tdpmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdpmc"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn running_example_with_imported_decomposition() {
    let o = tdpmc(&[
        path(&fixture("running.cnf")),
        "--td",
        path(&fixture("running_nice.td")),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "c o width 2");
    assert_eq!(lines[1], "c o nodes 12");
    assert_eq!(lines[2], "c o heuristic td-import");
    assert!(lines[3].starts_with("c o time-sat "));
    assert!(lines[4].starts_with("c o time-proj "));
    assert_eq!(lines[5], "s pmc 4");
    assert_eq!(lines.len(), 6);
}

#[test]
fn projection_override() {
    let o = tdpmc(&[path(&fixture("running.cnf")), "--projection", "1,2,3,4"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("s pmc 6\n"));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.txt");
    fs::write(&p, "4 0\n").unwrap();
    let o = tdpmc(&[
        path(&fixture("running.cnf")),
        "--projection-file",
        p.to_str().unwrap(),
    ]);
    assert!(stdout(&o).ends_with("s pmc 2\n"));
}

#[test]
fn unsatisfiable_and_sat_mode() {
    let unsat = fixture("unsat.cnf");
    let o = tdpmc(&[path(&unsat), "--check-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("s pmc 0\n"));
    let o = tdpmc(&[path(&unsat), "--mode", "sat"]);
    assert!(stdout(&o).ends_with("s UNSATISFIABLE\n"));
    let o = tdpmc(&[
        path(&fixture("running.cnf")),
        "--mode",
        "sat",
        "--check-oracle",
    ]);
    assert!(stdout(&o).ends_with("s SATISFIABLE\n"));
}

#[test]
fn stats_only_prints_decomposition() {
    let o = tdpmc(&[
        path(&fixture("running.cnf")),
        "--mode",
        "stats-only",
        "--heuristic",
        "min-degree",
    ]);
    assert_eq!(
        stdout(&o),
        "c o width 2\nc o nodes 9\nc o heuristic min-degree\n"
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cnf");
    fs::write(&bad, "p cnf 2 1\n1 x 0\n").unwrap();
    assert_eq!(tdpmc(&[bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(tdpmc(&["/nonexistent.cnf"]).status.code(), Some(1));
    assert_eq!(tdpmc(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(tdpmc(&["--help"]).status.code(), Some(0));

    let ex = fixture("running.cnf");
    let o = tdpmc(&[path(&ex), "--max-width", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert_eq!(
        tdpmc(&[path(&ex), "--max-width", "1", "--force"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        tdpmc(&[path(&ex), "--table-cap", "1"]).status.code(),
        Some(2)
    );

    let td = dir.path().join("bad.td");
    fs::write(&td, "s td 1 1 4\nb 1 1\n").unwrap();
    assert_eq!(
        tdpmc(&[path(&ex), "--td", td.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn output_is_deterministic() {
    let mask = |o: &Output| -> String {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("c o time-"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let ex = fixture("running.cnf");
    for extra in [
        &[][..],
        &["--seed", "9"][..],
        &["--heuristic", "min-degree", "--seed", "2"][..],
    ] {
        let mut args = vec![path(&ex)];
        args.extend_from_slice(extra);
        let a = tdpmc(&args);
        let b = tdpmc(&args);
        assert_eq!(mask(&a), mask(&b));
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn dump_goes_to_stderr() {
    let o = tdpmc(&[
        path(&fixture("running.cnf")),
        "--td",
        path(&fixture("running_nice.td")),
        "--dump-tables",
        "--proj-strategy",
        "recurrence",
    ]);
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert!(err.contains("t5 rem 3"));
    assert!(err.contains("{{1},{1,2}}  1"));
    assert!(stdout(&o).ends_with("s pmc 4\n"));
}
