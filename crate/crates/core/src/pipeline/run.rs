//! `run_closure`: operator, weighted conjugate, frame certification, scan,
//! freezing and decisions, assembled into a report.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::ClosureConfig;
use super::report::*;
use super::{sidecar, PipelineError};
use crate::frames::{self, ARChart, PointClass, SingularSample};
use crate::invert::{
    affine_reduce, decide_abelian, decide_affine, fourier_symbol, reduced_boundary_ops, upoly::simplest_between,
    Evidence, Status, SymbolPoly, Verdict,
};
use crate::limits::{self, GroupTag, LimitOperator};
use crate::numverify::{semibound_estimate, GaussianFamily};
use crate::opalgebra::DiffOp;
use crate::symexpr::poly::{fmt_rational, from_f64};
use crate::symexpr::{Expr, Rational};

/// Snaps sampled coordinates to the simplest rational within `1e-9`.
pub fn snap_point(q: &[f64]) -> Result<Vec<Rational>, PipelineError> {
    let tol = Rational::new(1.into(), 1_000_000_000.into());
    q.iter()
        .map(|&v| {
            let r = from_f64(v).ok_or_else(|| PipelineError::Internal(format!("non-finite coordinate {v}")))?;
            Ok(simplest_between(&(&r - &tol), &(&r + &tol)))
        })
        .collect()
}

pub fn provenance(cfg: &ClosureConfig) -> Provenance {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    let timestamp = cfg.output.timestamp.then(|| {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("unix:{now}")
    });
    Provenance {
        config_sha256: hex::encode(digest),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
    }
}

pub fn chart_summary(chart: &ARChart, gamma: &Expr) -> ChartSummary {
    let (x0, x1) = (&chart.window.x.0, &chart.window.x.1);
    let mut window = vec![fmt_rational(x0), fmt_rational(x1)];
    if chart.dim == 2 {
        window.push(fmt_rational(&chart.window.y.0));
        window.push(fmt_rational(&chart.window.y.1));
    }
    ChartSummary {
        dim: chart.dim,
        f: chart.f.to_string(),
        s: chart.s.to_string(),
        h: chart.h.to_string(),
        potential: chart.potential.to_string(),
        window,
        gamma: gamma.to_string(),
    }
}

/// Evenly spaced Grushin samples plus every tangency and non-generic point.
fn select_points(samples: &[SingularSample], n: usize) -> Vec<SingularSample> {
    let mut regular: Vec<&SingularSample> = samples
        .iter()
        .filter(|s| matches!(s.class, PointClass::Grushin | PointClass::Boundary))
        .collect();
    regular.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<SingularSample> = if regular.len() <= n || n == 0 {
        regular.into_iter().cloned().collect()
    } else if n == 1 {
        vec![regular[regular.len() / 2].clone()]
    } else {
        let m = regular.len() - 1;
        let mut idx: Vec<usize> = (0..n).map(|k| (k * m + (n - 1) / 2) / (n - 1)).collect();
        idx.dedup();
        idx.into_iter().map(|i| regular[i].clone()).collect()
    };
    out.extend(
        samples
            .iter()
            .filter(|s| matches!(s.class, PointClass::Tangency | PointClass::NonGeneric(_)))
            .cloned(),
    );
    // a point found by several scan lines is analysed once
    let mut unique: Vec<SingularSample> = Vec::with_capacity(out.len());
    for s in out {
        let seen = unique
            .iter()
            .any(|u| u.point.iter().zip(&s.point).all(|(a, b)| (a - b).abs() < 1e-9));
        if !seen {
            unique.push(s);
        }
    }
    unique
}

fn semibound_family(sym: &SymbolPoly, minimizer: &[f64]) -> GaussianFamily {
    let mut centres = vec![0.0, 1.0, -1.0, 3.0];
    let m = minimizer.first().copied().unwrap_or(0.0);
    if !centres.contains(&m) {
        centres.push(m);
    }
    let widths = if sym.dim() == 1 {
        vec![3.0, 30.0, 300.0]
    } else {
        vec![3.0, 30.0]
    };
    GaussianFamily::grid(&centres, &widths)
}

/// Re-checks the numerical content of an abelian verdict.
fn confirm_abelian(op: &LimitOperator, verdict: &Verdict, cfg: &ClosureConfig, checks: &mut NumericChecks) {
    let Ok(sym) = fourier_symbol(op) else { return };
    match &verdict.evidence {
        Evidence::SymbolInfimum {
            minimizer, constant, ..
        } => {
            if let Ok(est) = semibound_estimate(op, &semibound_family(&sym, minimizer)) {
                checks.semibound_consistent = Some(est.c_est >= constant - cfg.solver.semibound_tol);
                checks.semibound = Some(est);
            }
        }
        Evidence::Witness { xi, .. } => {
            checks.witness_rechecked = Some(sym.modulus_at(xi) <= cfg.solver.witness_tol);
        }
        _ => {}
    }
}

struct PointJob<'a> {
    index: usize,
    sample: &'a SingularSample,
    chart: &'a ARChart,
    frame_op: &'a DiffOp,
    cfg: &'a ClosureConfig,
    csv_dir: Option<&'a Path>,
}

fn analyze(job: PointJob<'_>) -> Result<PointRecord, PipelineError> {
    let PointJob {
        index,
        sample,
        chart,
        frame_op,
        cfg,
        csv_dir,
    } = job;
    let exact = snap_point(&sample.point)?;
    let mut rec = PointRecord {
        point: sample.point.clone(),
        point_exact: exact.iter().map(fmt_rational).collect(),
        class: sample.class.clone(),
        group: None,
        bracket: None,
        limit_operator: None,
        limit_operator_normalized: None,
        verdict: Verdict::inconclusive("not analysed"),
        numeric: NumericChecks::default(),
    };
    if let PointClass::NonGeneric(reason) = &sample.class {
        rec.verdict = Verdict::inconclusive(format!("non-generic point: {reason}"));
        return Ok(rec);
    }
    let lim = match limits::limit_at(chart, frame_op, &exact) {
        Ok(l) => l,
        Err(e) => {
            rec.verdict = Verdict::inconclusive(format!("no limit operator: {e}"));
            return Ok(rec);
        }
    };
    rec.group = Some(lim.group);
    rec.bracket = lim.bracket.as_ref().map(Expr::to_string);
    rec.limit_operator = Some(lim.to_string());
    match lim.group {
        GroupTag::Abelian(_) => {
            rec.verdict = match fourier_symbol(&lim) {
                Ok(sym) => {
                    if let Some(dir) = csv_dir {
                        let [lo, hi] = cfg.output.symbol_range;
                        let path = dir.join(format!("point_{index:03}_symbol.csv"));
                        sidecar::write_symbol(&path, &sym.samples(lo, hi, cfg.output.symbol_points))?;
                        rec.numeric.csv.push(path.display().to_string());
                    }
                    decide_abelian(&sym)
                }
                Err(e) => Verdict::inconclusive(e.to_string()),
            };
            let mut checks = std::mem::take(&mut rec.numeric);
            confirm_abelian(&lim, &rec.verdict, cfg, &mut checks);
            rec.numeric = checks;
        }
        GroupTag::Affine => {
            match lim.normalized() {
                Ok(n) => rec.limit_operator_normalized = Some(n.to_string()),
                Err(e) => {
                    rec.verdict = Verdict::inconclusive(e.to_string());
                    return Ok(rec);
                }
            }
            let rop = match affine_reduce(&lim) {
                Ok(r) => r,
                Err(e) => {
                    rec.verdict = Verdict::inconclusive(e.to_string());
                    return Ok(rec);
                }
            };
            rec.verdict = decide_affine(&rop);
            if let Evidence::Affine(ev) = &rec.verdict.evidence {
                rec.numeric.bessel_probes_agree = ev.probes_agree;
                if let (Some(dir), Some(table)) = (csv_dir, &ev.bessel) {
                    let path = dir.join(format!("point_{index:03}_bessel.csv"));
                    sidecar::write_bessel(&path, table.nu, &ev.probes)?;
                    rec.numeric.csv.push(path.display().to_string());
                }
                if let Ok((t0, tinf)) = reduced_boundary_ops(&rop) {
                    let mut checks = std::mem::take(&mut rec.numeric);
                    for (op, v) in [(&t0, &ev.t0_verdict), (&tinf, &ev.tinf_verdict)] {
                        let mut sub = NumericChecks::default();
                        confirm_abelian(op, v, cfg, &mut sub);
                        let merge = |a: Option<bool>, b: Option<bool>| match (a, b) {
                            (Some(x), Some(y)) => Some(x && y),
                            (x, y) => x.or(y),
                        };
                        checks.semibound_consistent = merge(checks.semibound_consistent, sub.semibound_consistent);
                        checks.witness_rechecked = merge(checks.witness_rechecked, sub.witness_rechecked);
                    }
                    rec.numeric = checks;
                }
            }
        }
    }
    Ok(rec)
}

fn domain_statement(chart: &ARChart, gamma: &Expr) -> String {
    let weight = if gamma.is_one() {
        "s".to_string()
    } else {
        format!("s^({gamma})")
    };
    if chart.dim == 1 {
        format!(
            "D(closure) = {weight} H^2_V({}, {})",
            fmt_rational(&chart.window.x.0),
            fmt_rational(&chart.window.x.1)
        )
    } else {
        format!("D(closure) = {weight} H^2_V(M) (chart-local)")
    }
}

fn describe(rec: &PointRecord) -> String {
    let at = format!("({})", rec.point_exact.join(", "));
    match &rec.verdict.evidence {
        Evidence::Witness { xi, .. } => format!("{:?} at {at}, witness xi = {xi:?}", rec.verdict.status),
        Evidence::Affine(ev) => {
            let sub = [("T0", &ev.t0_verdict), ("Tinf", &ev.tinf_verdict)]
                .iter()
                .find(|(_, v)| v.status == Status::NotLeftInvertible)
                .map(|(n, v)| match &v.evidence {
                    Evidence::Witness { xi, .. } => format!("; {n} symbol vanishes at xi = {xi:?}"),
                    _ => format!("; {n} not left invertible"),
                })
                .unwrap_or_default();
            format!("{:?} at {at}{sub}", rec.verdict.status)
        }
        Evidence::Reason { reason } => format!("{:?} at {at}: {reason}", rec.verdict.status),
        _ => format!("{:?} at {at}", rec.verdict.status),
    }
}

fn hypotheses(chart: &ARChart, points: &[PointRecord]) -> Vec<String> {
    let mut out = Vec::new();
    if chart.dim == 1 {
        out.push(format!("one-dimensional chart with potential V = {}", chart.potential));
        return out;
    }
    let h = chart.h.compile(&[frames::X, frames::Y]).ok();
    let values: Vec<f64> = points
        .iter()
        .filter(|p| !matches!(p.class, PointClass::NonGeneric(_)))
        .filter_map(|p| h.as_ref().map(|h| h.eval(&p.point)))
        .collect();
    if points.iter().any(|p| p.class == PointClass::Tangency) {
        out.push("tangency points present: h > 0 is required at each of them".into());
    }
    if points.iter().any(|p| p.class == PointClass::Grushin) {
        out.push("Grushin points: h != 0 is required at each of them".into());
    }
    if values.iter().any(|v| *v > 0.0) && values.iter().any(|v| *v < 0.0) {
        out.push("h changes sign along the singular set; read the per-point verdicts".into());
    }
    out
}

pub fn run_closure(cfg: &ClosureConfig) -> Result<ClosureReport, PipelineError> {
    let chart = cfg.build_chart()?;
    let gamma = cfg.gamma()?;
    let operator = frames::perturbed_laplacian(&chart)?;
    let frame_op = limits::frame_operator(&chart, &gamma)?;
    let scan = frames::genericity_scan(&chart, cfg.solver.scan_resolution)?;
    let selected = select_points(&scan.singular, cfg.solver.samples);
    let csv_dir: Option<PathBuf> = cfg.output.csv_dir.as_ref().map(PathBuf::from);
    if let Some(d) = &csv_dir {
        std::fs::create_dir_all(d).map_err(|e| PipelineError::Io(format!("{}: {e}", d.display())))?;
    }
    let points: Vec<PointRecord> = selected
        .par_iter()
        .enumerate()
        .map(|(index, sample)| {
            analyze(PointJob {
                index,
                sample,
                chart: &chart,
                frame_op: &frame_op,
                cfg,
                csv_dir: csv_dir.as_deref(),
            })
        })
        .collect::<Result<_, _>>()?;

    let nongeneric: Vec<Vec<f64>> = scan.nongeneric.iter().map(|s| s.point.clone()).collect();
    let all_left = !points.is_empty() && points.iter().all(|p| p.verdict.status == Status::LeftInvertible);
    let blocked = points.iter().find(|p| p.verdict.status == Status::NotLeftInvertible);
    let conclusion = if all_left && nongeneric.is_empty() {
        Conclusion {
            kind: ConclusionKind::Full,
            statement: domain_statement(&chart, &gamma),
            justification: vec![
                "the weighted operator has smooth coefficients in the Lie frame".into(),
                format!("all {} sampled limit operators are left invertible", points.len()),
                "hence the weighted operator is left semi-Fredholm and the graph norm is equivalent to the weighted Sobolev norm".into(),
            ],
        }
    } else if let Some(b) = blocked {
        Conclusion {
            kind: ConclusionKind::Withheld,
            statement: format!("conclusion withheld: {}", describe(b)),
            justification: vec![format!(
                "{} of {} limit operators are not left invertible",
                points
                    .iter()
                    .filter(|p| p.verdict.status == Status::NotLeftInvertible)
                    .count(),
                points.len()
            )],
        }
    } else {
        let inconclusive: Vec<String> = points
            .iter()
            .filter(|p| p.verdict.status == Status::Inconclusive)
            .map(describe)
            .collect();
        let statement = if points.is_empty() {
            "partial: no singular points found in the window".to_string()
        } else {
            format!(
                "partial: {} inconclusive verdict(s), {} non-generic point(s); no domain is claimed",
                inconclusive.len(),
                nongeneric.len()
            )
        };
        Conclusion {
            kind: ConclusionKind::Partial,
            statement,
            justification: inconclusive,
        }
    };
    let scan_summary = ScanSummary {
        resolution: scan.resolution,
        singular_found: scan.singular.len(),
        sampled: points.len(),
        tangency_points: scan.tangency.clone(),
        nongeneric_points: nongeneric,
        note: "verdicts are computed at sampled singular points plus every tangency point; this is a sampling check, not a proof over the whole singular set".into(),
    };
    Ok(ClosureReport {
        schema: SCHEMA,
        provenance: provenance(cfg),
        chart: chart_summary(&chart, &gamma),
        operator: operator.to_string(),
        frame_operator: frame_op.to_string(),
        scan: scan_summary,
        hypotheses: hypotheses(&chart, &points),
        points,
        conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping() {
        let q = snap_point(&[0.25000000000001, -1e-17, 0.1]).unwrap();
        assert_eq!(q.iter().map(fmt_rational).collect::<Vec<_>>(), ["1/4", "0", "1/10"]);
    }

    #[test]
    fn sampling() {
        let samples: Vec<SingularSample> = (0..100)
            .map(|i| SingularSample {
                point: vec![0.0, i as f64],
                class: PointClass::Grushin,
            })
            .collect();
        let s = select_points(&samples, 33);
        assert_eq!(s.len(), 33);
        assert_eq!(s[0].point[1], 0.0);
        assert_eq!(s[32].point[1], 99.0);
    }
}
