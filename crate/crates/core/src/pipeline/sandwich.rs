//! The epsilon sandwich in the critical one-dimensional case: domains for
//! weights `3/2 + eps` and `3/2 - eps` bracket the closure domain.

use super::config::ClosureConfig;
use super::report::{SandwichReport, SandwichRow, SCHEMA};
use super::run::{chart_summary, provenance, snap_point};
use super::PipelineError;
use crate::frames::{self, PointClass};
use crate::invert::{decide_abelian, fourier_symbol, Verdict};
use crate::limits::{self, LimitOperator};
use crate::symexpr::poly::fmt_rational;
use crate::symexpr::{Expr, Rational};

fn three_halves() -> Rational {
    Rational::new(3.into(), 2.into())
}

/// `Z^2 + 2(1 + eps) Z + eps(2 + eps)`.
pub fn expected_upper(eps: &Rational) -> LimitOperator {
    let one = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());
    LimitOperator::abelian(
        1,
        [
            (vec![2], Expr::one()),
            (vec![1], Expr::constant(&two * (&one + eps))),
            (vec![0], Expr::constant(eps * (&two + eps))),
        ],
    )
}

pub fn run_epsilon_sandwich(cfg: &ClosureConfig) -> Result<SandwichReport, PipelineError> {
    let chart = cfg.build_chart()?;
    if chart.dim != 1 {
        return Err(PipelineError::Config(
            "the sandwich needs a one-dimensional chart".into(),
        ));
    }
    let scan = frames::genericity_scan(&chart, cfg.solver.scan_resolution)?;
    let mut boundary: Vec<&frames::SingularSample> = scan
        .singular
        .iter()
        .filter(|s| s.class == PointClass::Boundary)
        .collect();
    boundary.sort_by(|a, b| a.point[0].total_cmp(&b.point[0]));
    let first = boundary
        .first()
        .ok_or_else(|| PipelineError::Config("the defining function has no zero in the window".into()))?;
    let q = snap_point(&first.point)?;
    let limit_for = |gamma: &Rational| -> Result<LimitOperator, PipelineError> {
        let p = limits::frame_operator(&chart, &Expr::constant(gamma.clone()))?;
        Ok(limits::limit_at(&chart, &p, &q)?)
    };
    let critical = limit_for(&three_halves())?;
    if !critical.constant().is_zero() {
        return Err(PipelineError::Config(format!(
            "not the critical case: the limit operator at weight 3/2 is {critical}, with nonzero constant"
        )));
    }
    let mut rows = Vec::new();
    for eps in cfg.epsilons()? {
        let up_gamma = &three_halves() + &eps;
        let lo_gamma = &three_halves() - &eps;
        let upper = limit_for(&up_gamma)?;
        let lower = limit_for(&lo_gamma)?;
        let expected = expected_upper(&eps);
        let verdict = match fourier_symbol(&upper) {
            Ok(sym) => decide_abelian(&sym),
            Err(e) => Verdict::inconclusive(e.to_string()),
        };
        rows.push(SandwichRow {
            epsilon: fmt_rational(&eps),
            gamma_upper: fmt_rational(&up_gamma),
            limit_operator: upper.to_string(),
            expected: expected.to_string(),
            matches_expected: upper.terms == expected.terms,
            verdict,
            gamma_lower: fmt_rational(&lo_gamma),
            lower_limit_operator: lower.to_string(),
        });
    }
    let (a, b) = (fmt_rational(&chart.window.x.0), fmt_rational(&chart.window.x.1));
    let statement = format!(
        "union over eps > 0 of s^(3/2+eps) H^2_V({a}, {b}) is contained in D(closure), which is contained in the intersection over eps > 0 of s^(3/2-eps) H^2_V({a}, {b})"
    );
    Ok(SandwichReport {
        schema: SCHEMA,
        provenance: provenance(cfg),
        chart: chart_summary(&chart, &Expr::constant(three_halves())),
        rows,
        statement,
    })
}
