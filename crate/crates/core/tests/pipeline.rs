use arclosure::invert::{Evidence, Status};
use arclosure::pipeline::{run_closure, run_epsilon_sandwich, ClosureConfig, ConclusionKind};

fn interval(alpha: &str) -> ClosureConfig {
    ClosureConfig::from_toml(&format!(
        r#"
[chart]
dim = 1
s = "x*(1 - x)"
potential = "3/4 + a"
window = ["0", "1"]
params = {{ a = "{alpha}" }}
"#
    ))
    .unwrap()
}

fn planar(f: &str, h: &str, samples: usize) -> ClosureConfig {
    ClosureConfig::from_toml(&format!(
        r#"
[chart]
dim = 2
f = "{f}"
h = "{h}"
window = ["-1", "1", "-1", "1"]

[solver]
samples = {samples}
"#
    ))
    .unwrap()
}

#[test]
fn interval_alpha_one_full_domain() {
    let r = run_closure(&interval("1")).unwrap();
    assert_eq!(r.points.len(), 2);
    assert!(r.points.iter().all(|p| p.verdict.status == Status::LeftInvertible));
    assert_eq!(r.conclusion.kind, ConclusionKind::Full);
    assert_eq!(r.conclusion.statement, "D(closure) = s^(3/2) H^2_V(0, 1)");
    assert_eq!(r.points[0].limit_operator.as_deref(), Some("Z^2 + 2*Z - 1"));
    assert!(r.points.iter().all(|p| p.numeric.all_passed()));
    assert!(r.is_sound());
}

#[test]
fn interval_alpha_zero_withheld() {
    let r = run_closure(&interval("0")).unwrap();
    assert_eq!(r.conclusion.kind, ConclusionKind::Withheld);
    assert!(r.points.iter().all(|p| p.verdict.status == Status::NotLeftInvertible));
    assert!(r.points.iter().all(|p| p.numeric.witness_rechecked == Some(true)));
    assert!(r.is_sound());
}

#[test]
fn grushin_line_all_left_invertible() {
    let r = run_closure(&planar("x", "1", 5)).unwrap();
    assert_eq!(r.points.len(), 5);
    for p in &r.points {
        assert_eq!(p.verdict.status, Status::LeftInvertible, "{:?}", p.point);
        assert_eq!(p.limit_operator_normalized.as_deref(), Some("Z1^2 + Z2^2 - 2"));
        assert_eq!(p.numeric.bessel_probes_agree, Some(true));
    }
    assert_eq!(r.conclusion.kind, ConclusionKind::Full);
    assert_eq!(r.conclusion.statement, "D(closure) = s H^2_V(M) (chart-local)");
    assert!(r.is_sound());
}

#[test]
fn tangency_with_negative_h_is_withheld() {
    let r = run_closure(&planar("y - x^2", "-1", 3)).unwrap();
    let t = r
        .points
        .iter()
        .find(|p| p.class == arclosure::frames::PointClass::Tangency)
        .expect("tangency point sampled");
    assert_eq!(t.verdict.status, Status::NotLeftInvertible);
    assert!(matches!(t.verdict.evidence, Evidence::Witness { .. }));
    assert_eq!(t.numeric.witness_rechecked, Some(true));
    assert_eq!(r.conclusion.kind, ConclusionKind::Withheld);
    assert!(r.conclusion.statement.contains("witness"));
    assert!(r.is_sound());
}

#[test]
fn reports_are_deterministic() {
    let cfg = planar("x", "1", 4);
    assert_eq!(
        run_closure(&cfg).unwrap().to_json(),
        run_closure(&cfg).unwrap().to_json()
    );
    let cfg = interval("1/2");
    assert_eq!(
        run_closure(&cfg).unwrap().to_json(),
        run_closure(&cfg).unwrap().to_json()
    );
}

#[test]
fn csv_sidecars_are_written() {
    let dir = std::env::temp_dir().join(format!("arclosure-csv-{}", std::process::id()));
    let mut cfg = planar("x", "1", 1);
    cfg.output.csv_dir = Some(dir.display().to_string());
    let r = run_closure(&cfg).unwrap();
    let bessel = std::fs::read_to_string(dir.join("point_000_bessel.csv")).unwrap();
    assert!(bessel.starts_with("x,i_nu,k_nu,shell_sum_i,shell_sum_k"));
    assert!(bessel.lines().count() > 10);
    assert_eq!(r.points[0].numeric.csv.len(), 1);
    let mut cfg = interval("1");
    cfg.output.csv_dir = Some(dir.display().to_string());
    run_closure(&cfg).unwrap();
    let sym = std::fs::read_to_string(dir.join("point_001_symbol.csv")).unwrap();
    assert_eq!(sym.lines().count(), 202);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn sandwich_rows() {
    let mut cfg = interval("0");
    cfg.solver.epsilons = vec!["1/10".into(), "0".into(), "1".into()];
    let r = run_epsilon_sandwich(&cfg).unwrap();
    assert_eq!(r.rows[0].limit_operator, "Z^2 + 11/5*Z + 21/100");
    assert!(r.rows.iter().all(|row| row.matches_expected));
    assert_eq!(r.rows[0].verdict.status, Status::LeftInvertible);
    assert_eq!(r.rows[1].verdict.status, Status::NotLeftInvertible);
    match &r.rows[2].verdict.evidence {
        Evidence::SymbolInfimum { infimum, minimizer, .. } => {
            assert!((infimum - 9.0).abs() < 1e-12);
            assert_eq!(minimizer, &vec![0.0]);
        }
        e => panic!("{e:?}"),
    }
    assert!(r.statement.contains("s^(3/2+eps)"));
    assert!(run_epsilon_sandwich(&interval("1")).is_err());
}
