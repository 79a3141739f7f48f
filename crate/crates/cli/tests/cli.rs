//! End-to-end runs of the `pareto-tame` binary: every bundled fixture
//! through every command, the documented example invocations with their
//! expected output, and the exit-code contract (0 result, 2 unusable
//! input, 3 uncertifiable numerics at a directly requested point).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pareto-tame")
}

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples")
}

fn fixture(name: &str) -> String {
    examples_dir()
        .join(format!("{name}.prob"))
        .to_string_lossy()
        .into_owned()
}

const FIXTURE_NAMES: [&str; 9] = [
    "ex_5_2",
    "ex_5_3",
    "ex_5_8",
    "ex_5_9",
    "toy_quadrant",
    "coercive_pair",
    "compact_box",
    "single_valley",
    "tradeoff_segment",
];

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should spawn")
}

/// Runs the binary, asserts the exit code, and returns stdout.
fn expect_exit(args: &[&str], code: i32) -> String {
    let out = run(args);
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(
        out.status.code(),
        Some(code),
        "`pareto-tame {}` exited {:?}, expected {code}\n--- stdout ---\n{stdout}\n--- stderr ---\n{stderr}",
        args.join(" "),
        out.status.code(),
    );
    stdout
}

#[test]
fn every_fixture_runs_every_command() {
    let plain = [
        "rabier",
        "tangency",
        "sections",
        "index-set",
        "descent-chain",
        "front",
        "limit-sets",
        "equivalence",
        "report",
    ];
    let theorems = ["4.4", "5.1", "5.4", "5.3c"];
    for name in FIXTURE_NAMES {
        let file = fixture(name);
        for cmd in plain {
            expect_exit(&[cmd, &file], 0);
        }
        for t in theorems {
            expect_exit(&["check", "--theorem", t, &file], 0);
        }
    }
}

#[test]
fn rabier_at_the_origin_reports_zero() {
    let out = expect_exit(&["rabier", "--at", "0,0", &fixture("ex_5_8")], 0);
    assert!(out.contains("nu = 0"), "missing `nu = 0` in:\n{out}");
    assert!(out.contains("exact = true"), "missing exact flag in:\n{out}");
}

#[test]
fn check_5_1_concludes_weak_solutions_exist() {
    let out = expect_exit(
        &["check", "--theorem", "5.1", &fixture("ex_5_8")],
        0,
    );
    assert!(
        out.contains("weak-solution-exists"),
        "missing conclusion in:\n{out}"
    );
}

#[test]
fn front_window_isolates_the_strong_origin() {
    let out = expect_exit(
        &[
            "front",
            "--window",
            "-2,2,-2,2",
            "--res",
            "81",
            &fixture("toy_quadrant"),
        ],
        0,
    );
    assert!(out.contains("grid_members = 1681"), "in:\n{out}");
    assert!(out.contains("weak_optima = 81"), "in:\n{out}");
    assert!(out.contains("strong_optima = 1"), "in:\n{out}");
    assert!(out.contains("strong = (0, 0) value (0, 0)"), "in:\n{out}");
}

#[test]
fn flag_overrides_are_accepted() {
    expect_exit(&["limit-sets", "--restricted", &fixture("ex_5_9")], 0);
    expect_exit(
        &["check", "--theorem", "5.4", "--index-set", "1", &fixture("ex_5_8")],
        0,
    );
    expect_exit(
        &["limit-sets", "--probe", "diagonal", &fixture("ex_5_9")],
        0,
    );
    expect_exit(&["rabier", "--tol", "1e-9", &fixture("compact_box")], 0);
}

#[test]
fn unusable_input_exits_two() {
    expect_exit(&["report", "/nonexistent/missing.prob"], 2);

    let dir = tempfile::tempdir().expect("tempdir");
    let bad = dir.path().join("bad.prob");
    std::fs::write(&bad, "[problem]\ndimension = 2\n").expect("write");
    expect_exit(&["report", bad.to_str().unwrap()], 2);

    let file = fixture("ex_5_8");
    // Wrong dimension for --at.
    expect_exit(&["rabier", "--at", "1,2,3", &file], 2);
    // Unparseable point.
    expect_exit(&["rabier", "--at", "zero,zero", &file], 2);
    // Point outside the region.
    expect_exit(&["rabier", "--at", "-1,-1", &fixture("toy_quadrant")], 2);
    // Unknown theorem id.
    expect_exit(&["check", "--theorem", "9.9", &file], 2);
    // Out-of-range component selection.
    expect_exit(&["check", "--theorem", "5.4", "--index-set", "7", &file], 2);
    // Unknown probe label.
    expect_exit(&["limit-sets", "--probe", "nonesuch", &file], 2);
}

#[test]
fn degenerate_corner_exits_three() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("degen.prob");
    std::fs::write(
        &path,
        "[problem]\n\
         dimension = 2\n\
         name = degen\n\n\
         [objectives]\n\
         f1 = x1 + x2\n\n\
         [cells]\n\
         cell = x1 >= 0, x2 >= 0, x1 + x2 >= 0\n\n\
         [anchor]\n\
         x0 = 1, 1\n",
    )
    .expect("write");
    let file = path.to_str().unwrap();
    // Three active normals of rank two: the cone is not certifiable, and
    // the point was directly requested.
    expect_exit(&["rabier", "--at", "0,0", file], 3);
    expect_exit(&["tangency", "--at", "0,0", file], 3);
    // Away from the corner the same problem answers fine.
    expect_exit(&["rabier", "--at", "1,1", file], 0);
}

#[test]
fn fixtures_list_and_roundtrip() {
    let listing = expect_exit(&["fixtures"], 0);
    for name in FIXTURE_NAMES {
        assert!(listing.contains(name), "{name} missing from:\n{listing}");
    }

    let dir = tempfile::tempdir().expect("tempdir");
    expect_exit(&["fixtures", "--write", dir.path().to_str().unwrap()], 0);
    for name in FIXTURE_NAMES {
        let written = dir.path().join(format!("{name}.prob"));
        let emitted = std::fs::read_to_string(&written)
            .unwrap_or_else(|e| panic!("{} not written: {e}", written.display()));
        let bundled = std::fs::read_to_string(examples_dir().join(format!("{name}.prob")))
            .expect("bundled fixture");
        assert_eq!(emitted, bundled, "{name} drifted from the bundled copy");
        // The emitted copy parses and runs.
        expect_exit(&["sections", written.to_str().unwrap()], 0);
    }
}

#[test]
fn out_flag_writes_csv() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("csv");
    expect_exit(
        &[
            "front",
            "--out",
            out.to_str().unwrap(),
            &fixture("toy_quadrant"),
        ],
        0,
    );
    let csv = out.join("front.csv");
    let text = std::fs::read_to_string(&csv).expect("front.csv written");
    assert!(text.lines().count() > 1, "front.csv has no data rows");
}

#[test]
fn thread_count_does_not_change_output() {
    let file = fixture("compact_box");
    let one = Command::new(bin())
        .args(["report", &file])
        .env("PARETO_TAME_THREADS", "1")
        .output()
        .expect("binary should spawn");
    let two = Command::new(bin())
        .args(["report", &file])
        .env("PARETO_TAME_THREADS", "2")
        .output()
        .expect("binary should spawn");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(two.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout, "report differs across thread counts");
}
