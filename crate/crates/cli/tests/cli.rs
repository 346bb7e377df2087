use std::fs;
use std::process::{Command, Output};

use takagi_lab::Rational;

fn takagi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_takagi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

#[test]
fn eval_encloses_two_thirds() {
    let o = takagi(&[
        "eval",
        "--radix",
        "2",
        "--weights",
        "const 1",
        "--x",
        "1/3",
        "--eps",
        "1/1000000",
    ]);
    assert!(o.status.success());
    let line = stdout(&o);
    let inner = line.split('[').nth(1).unwrap().split(']').next().unwrap();
    let (lo, hi) = inner.split_once(", ").unwrap();
    assert!(q(lo) <= q("2/3") && q("2/3") <= q(hi), "{line}");
    assert!(q(hi) - q(lo) <= q("2/1000000"));
}

#[test]
fn unknown_flags_and_bad_numbers_exit_2() {
    assert_eq!(
        takagi(&["eval", "--radix", "2", "--x", "1/3", "--bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(takagi(&["eval", "--radix", "2", "--x", "0.3.3"]).status.code(), Some(2));
    assert_eq!(
        takagi(&["dini", "--radix", "2", "--x", "1/3", "--horizon", "1/2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(takagi(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(takagi(&["eval", "--radix", "2", "--x", "3/2"]).status.code(), Some(2));
}

#[test]
fn decimal_points_parse_exactly() {
    let a = stdout(&takagi(&["eval", "--radix", "10", "--depth", "4", "--x", "0.25"]));
    let b = stdout(&takagi(&["eval", "--radix", "10", "--depth", "4", "--x", "1/4"]));
    assert_eq!(a, b);
}

#[test]
fn build_then_validate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let builds: [&[&str]; 6] = [
        &["--radix", "3", "--depth", "6"],
        &["--chain", "1,2,6,12,24", "--depth", "4"],
        &["--counterexample", "--depth", "7"],
        &["--counterexample", "--with-zero", "--depth", "7"],
        &["--skewed", "--depth", "5"],
        &["--triples", "--depth", "9"],
    ];
    for (i, flags) in builds.iter().enumerate() {
        for explicit in [false, true] {
            let path = dir.path().join(format!("d{i}{explicit}.txt"));
            let mut args = vec!["build"];
            args.extend_from_slice(flags);
            if explicit {
                args.push("--explicit");
            }
            args.extend_from_slice(&["--out", path.to_str().unwrap()]);
            assert!(takagi(&args).status.success(), "{args:?}");
            let v = takagi(&["validate", path.to_str().unwrap()]);
            assert!(v.status.success(), "{flags:?}: {}", String::from_utf8_lossy(&v.stderr));
            assert!(stdout(&v).contains("axioms hold"));
        }
    }
}

#[test]
fn validate_rejects_broken_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "interval 0 1\nlevel 0 : 0 1\nlevel 1 : 0 1/2\n").unwrap();
    assert_ne!(takagi(&["validate", path.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn midpoint_trace_alternates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let o = takagi(&[
        "trace",
        "--radix",
        "3",
        "--weights",
        "alt 1",
        "--x",
        "1/2",
        "--depth",
        "12",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    for (n, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1], "midpoint");
        // -Σ_{k=0}^{n} (-1)^k
        let expected = if n % 2 == 0 { "-1" } else { "0" };
        assert_eq!(cols[3], expected, "{row}");
        assert_eq!(cols[3], cols[8]);
    }
}

#[test]
fn verify_filter_and_exit_codes() {
    let o = takagi(&["verify", "--filter", "parity-chords:radix3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
    let none = takagi(&["verify", "--filter", "nothing-matches"]);
    assert_eq!(none.status.code(), Some(1));
    assert!(stdout(&none).contains("warning"));
}

#[test]
fn verify_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    let o = takagi(&[
        "verify",
        "--filter",
        "adjacent-sums:radix2",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("id,instance,depth,status"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn plot_takagi_range_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("takagi");
    let args = [
        "plot",
        "--radix",
        "2",
        "--depth",
        "12",
        "--resolution",
        "1025",
        "--out",
        prefix.to_str().unwrap(),
    ];
    assert!(takagi(&args).status.success());
    let csv = fs::read_to_string(dir.path().join("takagi.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1025);
    for row in &rows {
        let cols: Vec<Rational> = row.split(',').map(q).collect();
        assert!(cols[1] <= cols[2]);
        assert!(cols[2] >= q("0") && cols[1] <= q("2/3"), "{row}");
        assert!(cols[1] >= -q("1/4096") && cols[2] <= q("2/3") + q("1/4096"), "{row}");
    }
    let svg = fs::read(dir.path().join("takagi.svg")).unwrap();
    assert!(takagi(&args).status.success());
    assert_eq!(fs::read(dir.path().join("takagi.svg")).unwrap(), svg);
}

#[test]
fn plot_zero_weights_is_flat_and_counterexample_spans_carrier() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat");
    let o = takagi(&[
        "plot",
        "--radix",
        "2",
        "--depth",
        "6",
        "--weights",
        "const 0",
        "--resolution",
        "9",
        "--out",
        flat.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let svg = fs::read_to_string(dir.path().join("flat.svg")).unwrap();
    let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    assert!(points.split(' ').all(|p| p.ends_with(",200")), "{points}");

    let ce = dir.path().join("ce");
    let o = takagi(&[
        "plot",
        "--counterexample",
        "--depth",
        "9",
        "--weights",
        "alt 1",
        "--resolution",
        "5",
        "--out",
        ce.to_str().unwrap(),
        "--x",
        "0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("ce.csv")).unwrap();
    let xs: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(xs, ["-1", "-1/2", "0", "1/2", "1"]);
    assert!(dir.path().join("ce-quotients.svg").exists());
}

#[test]
fn resolution_below_two_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x");
    assert_eq!(
        takagi(&[
            "plot",
            "--radix",
            "2",
            "--resolution",
            "1",
            "--out",
            p.to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn subdiff_reports_empty_at_one_third() {
    let o = takagi(&[
        "subdiff",
        "--radix",
        "2",
        "--depth",
        "28",
        "--x",
        "1/3",
        "--horizon",
        "20",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("verdict: empty-certified"));
    let o = takagi(&[
        "subdiff",
        "--radix",
        "2",
        "--depth",
        "24",
        "--x",
        "1/2",
        "--horizon",
        "12",
        "--zetas",
        "0,5,-5",
    ]);
    assert!(stdout(&o).contains("all-R-evidence"), "{}", stdout(&o));
}
