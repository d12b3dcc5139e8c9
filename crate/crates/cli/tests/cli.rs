use std::path::Path;
use std::process::{Command, Output};

fn neadmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neadmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], i: usize) -> Vec<f64> {
    table[1..].iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn example1_trace_reaches_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = neadmm(&[
        "example1",
        "--rho0",
        "1",
        "--rho-schedule",
        "constant",
        "--max-iter",
        "30",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&out);
    assert_eq!(table[0].join(","), "iter,objective,primal_residual,dual_residual,rho");
    assert!((2..=31).contains(&table.len()));
    let obj = column(&table, 1);
    assert!((obj.last().unwrap() - 0.5).abs() <= 1e-3);
    assert!(!std::fs::read_to_string(&out).unwrap().contains('\r'));
}

#[test]
fn example2_with_increment_schedule_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = neadmm(&[
        "example2",
        "--rho-schedule",
        "increment:0.01",
        "--diagnose",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table = rows(&out);
    assert_eq!(
        table[0].join(","),
        "iter,objective,primal_residual,dual_residual,rho,bound,gap,lyapunov,vi_norm"
    );
    let obj = column(&table, 1);
    assert!((obj.last().unwrap() + std::f64::consts::SQRT_2).abs() <= 1e-3);
    let rho = column(&table, 4);
    assert_eq!(rho[0], 1.0);
    assert!(rho.windows(2).all(|w| w[1] > w[0]));
    let (bound, gap) = (column(&table, 5), column(&table, 6));
    assert!(bound.iter().zip(&gap).all(|(b, g)| g <= &(b + 1e-8)));
}

#[test]
fn iteration_limit_exits_two() {
    let o = neadmm(&["example1", "--max-iter", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn diagnose_report() {
    let o = neadmm(&["diagnose", "--example", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,bound,gap,V,vi_norm,flags"));
    for line in lines {
        assert!(line.ends_with(','), "unexpected flag in {line}");
    }
}

#[test]
fn onebit_run_stays_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cs.csv");
    let o = neadmm(&[
        "onebit-cs",
        "--n",
        "128",
        "--m",
        "64",
        "--k",
        "16",
        "--lambda",
        "10",
        "--rho0",
        "1000",
        "--seed",
        "7",
        "--max-iter",
        "200",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0 | 2)));
    let table = rows(&out);
    let obj = column(&table, 1);
    let r = column(&table, 2);
    assert!(obj.last().unwrap() < &obj[0]);
    // the stacked residual includes the sphere violation
    assert!(*r.last().unwrap() <= 1e-3);
}

#[test]
fn generated_bags_feed_multi_instance() {
    let dir = tempfile::tempdir().unwrap();
    let bags = dir.path().join("bags.csv");
    let o = neadmm(&[
        "generate-bags",
        "--bags",
        "20",
        "--instances",
        "5",
        "--features",
        "4",
        "--seed",
        "1",
        "--output",
        bags.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read(&bags).unwrap();
    assert_eq!(first.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count(), 101);
    let again = dir.path().join("again.csv");
    neadmm(&[
        "generate-bags",
        "--bags",
        "20",
        "--instances",
        "5",
        "--features",
        "4",
        "--seed",
        "1",
        "--output",
        again.to_str().unwrap(),
    ]);
    assert_eq!(first, std::fs::read(&again).unwrap());

    let trace = dir.path().join("mi.csv");
    let o = neadmm(&[
        "multi-instance",
        "--input",
        bags.to_str().unwrap(),
        "--lambda",
        "1",
        "--rho0",
        "0.1",
        "--max-iter",
        "1000",
        "--output",
        trace.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0 | 2)));
    let n = rows(&trace).len() - 1;
    assert!((1..=1000).contains(&n));
}

#[test]
fn runs_are_deterministic() {
    let a = neadmm(&[
        "onebit-cs",
        "--n",
        "32",
        "--m",
        "16",
        "--k",
        "4",
        "--seed",
        "3",
        "--max-iter",
        "20",
    ]);
    let b = neadmm(&[
        "onebit-cs",
        "--n",
        "32",
        "--m",
        "16",
        "--k",
        "4",
        "--seed",
        "3",
        "--max-iter",
        "20",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &[][..],
        &["bogus"],
        &["example1", "--rho0=-1"],
        &["example1", "--rho-schedule", "linear"],
        &["example1", "--max-iter", "0"],
        &["onebit-cs", "--k", "200"],
        &["onebit-cs", "--diagnose"],
    ] {
        let o = neadmm(args);
        assert_eq!(o.status.code(), Some(64), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(neadmm(&["--help"]).status.code(), Some(0));
    assert_eq!(neadmm(&["--version"]).status.code(), Some(0));
    assert_eq!(neadmm(&["onebit-cs", "--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_one() {
    let o = neadmm(&["multi-instance", "--input", "/nonexistent/bags.csv"]);
    assert_eq!(o.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "bag_id,label,f1\na,1,2\na,0,3\n").unwrap();
    let o = neadmm(&["multi-instance", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    let o = neadmm(&[
        "example1",
        "--output",
        dir.path().join("missing/dir/t.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
