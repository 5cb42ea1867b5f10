use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sdterms::maltsev::Witness;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sdterms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdterms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_then_verify_round_trip() {
    let algebra = data("meet-semilattice.json");
    let out = run(&[
        "solve",
        "--algebra",
        &algebra,
        "--schema",
        "m1m2",
        "--params",
        "3,3",
    ]);
    assert_eq!(code(&out), 0);
    let witness: Witness = stdout(&out).parse().unwrap();
    for symbol in ["f", "g1", "g2"] {
        assert!(witness.get(symbol).is_some(), "{symbol}");
    }
    let path = scratch("m1m2.txt");
    std::fs::write(&path, stdout(&out)).unwrap();
    let path = path.to_string_lossy();
    let out = run(&[
        "verify",
        "--algebra",
        &algebra,
        "--schema",
        "m1m2",
        "--params",
        "3,3",
        "--witness",
        &path,
    ]);
    assert_eq!(code(&out), 0);
    // The same terms do not give (2+3)-terms.
    let out = run(&[
        "verify",
        "--algebra",
        &algebra,
        "--schema",
        "m1m2",
        "--params",
        "2,3",
        "--witness",
        &path,
    ]);
    assert_ne!(code(&out), 0);
}

#[test]
fn affine_algebra_is_unsat() {
    let out = run(&[
        "solve",
        "--algebra",
        &data("z2-affine.json"),
        "--schema",
        "m1m2",
        "--params",
        "2,2",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn tiny_budgets_are_exhausted_not_unsat() {
    let out = run(&[
        "solve",
        "--algebra",
        &data("meet-semilattice.json"),
        "--schema",
        "m1m2",
        "--params",
        "3,3",
        "--budget-tuples",
        "2",
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "semiring-search",
        "--grid",
        "2,1",
        "--left",
        "1",
        "--right",
        "1 + 1",
        "--budget-summands",
        "100",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn derive_then_check() {
    let cert = scratch("cert.txt");
    let cert_path = cert.to_string_lossy();
    let out = run(&[
        "semiring-derive",
        "--n",
        "2",
        "--m",
        "1",
        "--output",
        &cert_path,
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "semiring-check",
        "--certificate",
        &cert_path,
        "--grid",
        "2,1",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    // Dropping the last step leaves the replays apart.
    let text = std::fs::read_to_string(&cert).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    let bad = scratch("bad.txt");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let out = run(&[
        "semiring-check",
        "--certificate",
        &bad.to_string_lossy(),
        "--grid",
        "2,1",
    ]);
    assert_eq!(code(&out), 1);

    let out = run(&[
        "semiring-check",
        "--certificate",
        &cert_path,
        "--grid",
        "3,1",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn search_output_is_a_checkable_certificate() {
    let eqs = scratch("eqs.txt");
    std::fs::write(&eqs, "alphabet a b c d\ne a + b\ne c + d\n").unwrap();
    let eqs = eqs.to_string_lossy();
    let cert = scratch("found.txt");
    let cert = cert.to_string_lossy();
    let out = run(&[
        "semiring-search",
        "--equations",
        &eqs,
        "--left",
        "a + b",
        "--right",
        "c + d",
        "--output",
        &cert,
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "semiring-check",
        "--certificate",
        &cert,
        "--equations",
        &eqs,
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn bracket_terms_give_grid_terms() {
    let algebra = data("lattice2.json");
    let out = run(&[
        "solve",
        "--algebra",
        &algebra,
        "--schema",
        "bracket",
        "--params",
        "2,1,4,3",
    ]);
    assert_eq!(code(&out), 0);
    let bracket = scratch("bracket.txt");
    std::fs::write(&bracket, stdout(&out)).unwrap();
    let grid = scratch("grid.txt");
    let out = run(&[
        "grid-from-bracket",
        "--algebra",
        &algebra,
        "--witness",
        &bracket.to_string_lossy(),
        "--phi",
        "2,1,4,3",
        "--output",
        &grid.to_string_lossy(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "verify",
        "--algebra",
        &algebra,
        "--schema",
        "grid",
        "--params",
        "2,3",
        "--witness",
        &grid.to_string_lossy(),
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn counterexample_report() {
    let out = run(&[
        "counterexamples",
        "--seed",
        "3",
        "--samples",
        "20",
        "--dense-samples",
        "20",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text
        .lines()
        .all(|l| l.starts_with("claim ") || l.starts_with("probe ")));
    assert!(text.contains("claim nu_tB6 samples=20 failures=0 counterexample=none"));
    // Same seed, same report.
    let again = run(&[
        "counterexamples",
        "--seed",
        "3",
        "--samples",
        "20",
        "--dense-samples",
        "20",
    ]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn input_errors_exit_with_three() {
    assert_eq!(code(&run(&["counterexamples"])), 3);
    assert_eq!(code(&run(&["no-such-command"])), 3);
    let out = run(&[
        "solve",
        "--algebra",
        "missing.json",
        "--schema",
        "wnu",
        "--params",
        "3",
    ]);
    assert_eq!(code(&out), 3);
    let out = run(&[
        "solve",
        "--algebra",
        &data("meet-semilattice.json"),
        "--schema",
        "bogus",
    ]);
    assert_eq!(code(&out), 3);
    let out = run(&[
        "solve",
        "--algebra",
        &data("meet-semilattice.json"),
        "--schema",
        "m1m2",
        "--params",
        "x",
    ]);
    assert_eq!(code(&out), 3);
}
