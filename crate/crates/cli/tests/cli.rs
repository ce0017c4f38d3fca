use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn uilayout(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uilayout")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const THREE_BUTTONS: &str = "\
# three buttons in a 300px row
vars 3
c H x0*1 x1*1 x2*1 EQ 300
c S:1 x0*1 EQ 120
c S:1 x1*1 EQ 120
c S:1 x2*1 EQ 120
";

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_three_buttons_with_quadratic_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "three_button.spec", THREE_BUTTONS);
    for s in ["ip", "as"] {
        let o = uilayout(&["solve", "--strategy", s, "--tol", "1e-3", &spec]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for v in ["x0", "x1", "x2"] {
            assert!(text.contains(&format!("{v} = 100.000000")), "{text}");
        }
        assert!(text.contains("suboptimal: 3"), "{text}");
        assert!(text.contains("status: optimal"));
    }
}

#[test]
fn solve_three_buttons_with_simplex() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "three_button.spec", THREE_BUTTONS);
    let o = uilayout(&["solve", "--strategy", "simplex", &spec]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("objective: 60.000000"));
}

#[test]
fn barrier_parameters_are_accepted_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "b.spec", "vars 1\nc S:1 x0*1 EQ 120\nc H x0*1 LE 100\n");
    let o = uilayout(&["solve", "--strategy", "ip", "--mu", "4", "--eps", "1e-8", &spec]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("x0 = 100.000000"));
    let o = uilayout(&["solve", "--strategy", "ip", "--mu", "0.5", &spec]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infeasible_layout_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.spec", "vars 1\nc H x0*1 LE 1\nc H x0*1 GE 2\n");
    for s in ["ip", "as", "simplex"] {
        let o = uilayout(&["solve", "--strategy", s, &spec]);
        assert_eq!(o.status.code(), Some(1), "{s}");
        assert!(stdout(&o).contains("status: infeasible"));
    }
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "f.spec", THREE_BUTTONS);
    let o = uilayout(&["solve", "--strategy", "bogus", &spec]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn malformed_spec_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "m.spec", "vars 1\nc H x3*1 EQ 1\n");
    let o = uilayout(&["solve", &spec]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = uilayout(&[
            "generate", "--min", "4", "--max", "40", "--step", "4", "--per-size", "2", "--seed", "5",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 20);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap());
    }
}

#[test]
fn bench_from_specs_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let specs = dir.path().join("specs");
    let gen = uilayout(&[
        "generate", "--min", "8", "--max", "48", "--step", "8", "--per-size", "1", "--out",
        specs.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let csv = dir.path().join("bench.csv");
    let csv = csv.to_str().unwrap();
    let run = |out: &str| {
        let o = uilayout(&[
            "bench", "--strategies", "ip,simplex", "--repeats", "1", "--specs", specs.to_str().unwrap(), "--out", out,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out).unwrap()
    };
    let first = run(csv);
    let again = run(dir.path().join("again.csv").to_str().unwrap());
    let strip = |t: &str| -> Vec<String> {
        t.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(3);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(strip(&first), strip(&again));
    assert_eq!(first.lines().next().unwrap(), "strategy,constraints,run,time_ms,suboptimal,iterations,status");
    assert_eq!(first.lines().count(), 1 + 2 * 6);

    let fit = uilayout(&["fit", csv]);
    assert_eq!(fit.status.code(), Some(0));
    let table = stdout(&fit);
    assert!(table.lines().any(|l| l.starts_with("ip")));
    assert!(table.lines().any(|l| l.starts_with("simplex")));
}

#[test]
fn specs_conflict_with_generator_flags() {
    let o = uilayout(&["bench", "--specs", ".", "--min", "8", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_recovers_exact_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("strategy,constraints,run,time_ms,suboptimal,iterations,status\n");
    for c in (4..=200).step_by(4) {
        let x = c as f64;
        let t = 1.0 + 2.0 * x + 3.0 * x * x + 4.0 * x * x * x;
        text.push_str(&format!("simplex,{c},0,{t},0,1,optimal\n"));
    }
    let csv = write(dir.path(), "results.csv", &text);
    let o = uilayout(&["fit", &csv, "--strategy", "simplex"]);
    assert_eq!(o.status.code(), Some(0));
    let table = stdout(&o);
    let row: Vec<f64> = table
        .lines()
        .find(|l| l.starts_with("simplex"))
        .unwrap()
        .split_whitespace()
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    for (got, want) in row.iter().zip([1.0, 2.0, 3.0, 4.0, 1.0]) {
        assert!((got - want).abs() < 1e-6, "{table}");
    }
}
