use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arclosure"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn limit_op_at_grushin_point() {
    let o = bin(&["limit-op", "--f", "x", "--h", "1", "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("group: Affine"), "{out}");
    assert!(out.contains("limit operator: Z1^2 + Z2^2 - 2"), "{out}");
}

#[test]
fn decide_critical_interval_operator() {
    let o = bin(&["decide", "--abelian", "D2 + 2*D - a", "--param", "a=0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("status: NotLeftInvertible"), "{out}");
    assert!(out.contains("\"type\": \"witness\""), "{out}");
    assert!(out.contains("\"0\""), "{out}");
}

#[test]
fn decide_from_chart() {
    let o = bin(&["decide", "--f", "y - x^2", "--h", "1", "--point", "0,0"]);
    assert!(stdout(&o).contains("status: LeftInvertible"));
    let o = bin(&["decide", "--f", "x", "--h", "h0", "--param", "h0=-2", "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn classify_and_laplacian() {
    let o = bin(&["classify", "--f", "y - x^2", "--point", "0,0"]);
    assert_eq!(stdout(&o).trim(), "Tangency");
    let o = bin(&["laplacian", "--f", "x"]);
    assert!(stdout(&o).contains("Laplace-Beltrami: Dx^2 + x^2*Dy^2 - (1/x)*Dx"));
    let o = bin(&["conjugate", "--s", "x*(1 - x)", "--potential", "3/4"]);
    assert!(stdout(&o).contains("frame: X^2 + (-4*x + 2)*X"));
}

#[test]
fn closure_reports_and_csv() {
    let dir = std::env::temp_dir().join(format!("arclosure-cli-{}", std::process::id()));
    let o = bin(&[
        "closure",
        "--config",
        &config("grushin.toml"),
        "--emit-csv",
        &dir.display().to_string(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("\"schema\": \"closure-report/1\""));
    assert!(out.contains("D(closure) = s H^2_V(M) (chart-local)"));
    assert!(dir.join("point_000_bessel.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
    let o = bin(&["closure", "--config", &config("interval.toml")]);
    assert!(stdout(&o).contains("D(closure) = s^(3/2) H^2_V(0, 1)"));
}

#[test]
fn sandwich_subcommand() {
    let o = bin(&[
        "sandwich",
        "--config",
        &config("interval_critical.toml"),
        "--eps",
        "1/10,0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Z^2 + 11/5*Z + 21/100"));
    assert!(out.contains("NotLeftInvertible"));
}

#[test]
fn exit_codes() {
    assert_eq!(
        bin(&["closure", "--config", "/nonexistent.toml"]).status.code(),
        Some(2)
    );
    assert_eq!(bin(&["limit-op", "--f", "x", "--point", "1,0"]).status.code(), Some(2));
    assert_eq!(
        bin(&["limit-op", "--f", "x^2", "--point", "0,0"]).status.code(),
        Some(3)
    );
    assert_eq!(bin(&["decide", "--abelian", "exp(D)"]).status.code(), Some(2));
    assert_eq!(
        bin(&["closure", "--config", &config("tangency.toml")]).status.code(),
        Some(3)
    );
}

#[test]
fn selftest_single_criterion() {
    let o = bin(&["selftest", "--only", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("[PASS] 1."));
}
