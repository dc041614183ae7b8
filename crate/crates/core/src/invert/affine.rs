use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::Serialize;

use rayon::prelude::*;

use super::symbol::{decide_abelian, fourier_symbol};
use super::{Evidence, InvertError, Status, Verdict};
use crate::limits::{freeze, line_frame, GroupTag, LimitOperator};
use crate::numverify::{integrability_probe, BesselKind, Endpoint, IntegrabilityProbe};
use crate::opalgebra::{change_variable, conjugate_by_weight, to_frame, DiffOp, Frame, VectorField, Word};
use crate::symexpr::poly::{exact_nth_root, fmt_rational, to_f64};
use crate::symexpr::{Expr, Rational};

const XI: &str = "xi";

/// Half-line operator `(x Dx)^2 - x^4 + c0` obtained from `Z1^2 + Z2^2 + c0`
/// on the affine group by a partial Fourier transform and rescaling.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedOp {
    /// Written in the single generator `x*Dx`.
    pub op: DiffOp,
    pub c0: Expr,
    pub h0: Expr,
    /// `sqrt(1 + h0)/2`, present only when `1 + h0 > 0` is a number.
    pub nu: Option<Rational>,
    pub nu_irrational: Option<f64>,
    pub measure: &'static str,
    pub weights: &'static str,
}

impl ReducedOp {
    pub fn nu_f64(&self) -> Option<f64> {
        self.nu.as_ref().map(to_f64).or(self.nu_irrational)
    }
}

impl fmt::Display for ReducedOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.op)
    }
}

fn group_frame() -> Result<Arc<Frame>, InvertError> {
    let a = Expr::sym("a");
    Ok(Arc::new(Frame::new(
        &["Z1", "Z2"],
        vec![
            VectorField::new(&["a", "b"], vec![a.clone(), Expr::zero()]),
            VectorField::new(&["a", "b"], vec![Expr::zero(), &a * &a]),
        ],
    )?))
}

/// Reduces `Z1^2 + Z2^2 + c0` (after bracket normalization to 2).
pub fn affine_reduce(op: &LimitOperator) -> Result<ReducedOp, InvertError> {
    if op.group != GroupTag::Affine {
        return Err(InvertError::NotAffine);
    }
    let op = op.normalized()?;
    let allowed = [Word(vec![0, 0]), Word(vec![1, 1]), Word::empty()];
    let names = op.names();
    for (w, c) in &op.terms {
        if !allowed.contains(w) {
            return Err(InvertError::UnsupportedShape(format!(
                "word {} is not allowed",
                w.render(&names)
            )));
        }
        if !w.is_empty() && !c.is_one() {
            return Err(InvertError::UnsupportedShape(format!(
                "{} has coefficient {c}, expected 1",
                w.render(&names)
            )));
        }
    }
    for w in &allowed[..2] {
        if !op.terms.contains_key(w) {
            return Err(InvertError::UnsupportedShape(format!("missing {}", w.render(&names))));
        }
    }
    let c0 = op.constant();

    // realize Z1 = a Da, Z2 = a^2 Db
    let gf = group_frame()?;
    let on_group = DiffOp::from_terms(&gf, op.terms.iter().map(|(w, c)| (w.clone(), c.clone())));
    let coords = on_group.to_coordinates();

    // Fourier in b: Db -> i xi
    let af = Arc::new(Frame::coordinates(&["a"]));
    let mut ode = DiffOp::zero(&af);
    for (w, c) in coords.terms() {
        let mi = w.multi_index(2);
        if mi[1] % 2 == 1 {
            return Err(InvertError::UnsupportedShape("odd power of Db".into()));
        }
        let sign = if mi[1] % 4 == 2 { -1 } else { 1 };
        let k = c * &Expr::sym(XI).powi(mi[1] as i64)? * Expr::int(sign);
        ode = ode.add(&DiffOp::term(&af, Word(vec![0; mi[0] as usize]), k))?;
    }

    // a = x xi^(-1/2)
    let phi = &Expr::sym("x") * &Expr::sym(XI).pow_rational(&Rational::new((-1).into(), 2.into()))?;
    let scaled = change_variable(&ode, "x", &phi)?;
    if scaled.terms().any(|(_, c)| c.depends_on(XI)) {
        return Err(InvertError::UnsupportedShape("frequency does not scale out".into()));
    }
    let xf = line_frame("x", "(x*Dx)", Expr::sym("x"))?;
    let reduced = to_frame(&scaled, &xf, &Expr::sym("x"))?;

    let h0 = Expr::int(-1) - c0.clone();
    let (nu, nu_irrational) = match (-&c0).as_constant() {
        Some(d) if d.is_positive() => {
            let exact = exact_nth_root(d.numer(), 2)
                .zip(exact_nth_root(d.denom(), 2))
                .map(|(n, m)| Rational::new(n, m * 2));
            let approx = exact.is_none().then(|| to_f64(&d).sqrt() / 2.0);
            (exact, approx)
        }
        _ => (None, None),
    };
    Ok(ReducedOp {
        op: reduced,
        c0,
        h0,
        nu,
        nu_irrational,
        measure: "dx/x^3",
        weights: "r = x near 0; y = 1/x with generator y^3*Dy near infinity",
    })
}

/// Limit operators of the reduced operator at `x = 0` and `x = infinity`.
pub fn reduced_boundary_ops(rop: &ReducedOp) -> Result<(LimitOperator, LimitOperator), InvertError> {
    let x = Expr::sym("x");
    let y = Expr::sym("y");
    let zero = [Rational::zero()];

    let near0 = conjugate_by_weight(&rop.op, &x, &Expr::int(-1), &Expr::int(1))?;
    let near0 = to_frame(&near0, &line_frame("x", "X", x.clone())?, &x)?;
    let mut t0 = freeze(&near0, &zero, GroupTag::Abelian(1), None)?;
    t0.provenance = format!("x -> 0 of {rop}");

    let inv = change_variable(&rop.op, "y", &Expr::one().div(&y)?)?;
    let nearinf = conjugate_by_weight(&inv, &y, &Expr::int(2), &Expr::int(2))?;
    let nearinf = to_frame(&nearinf, &line_frame("y", "W", y.powi(3)?)?, &y)?;
    let mut tinf = freeze(&nearinf, &zero, GroupTag::Abelian(1), None)?;
    tinf.provenance = format!("x -> infinity of {rop}");
    Ok((t0, tinf))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesselBranch {
    /// `I` or `K`, evaluated at `x^2/2`.
    pub solution: &'static str,
    pub endpoint: &'static str,
    /// Power of `x` in `|u|^2/x^3` near 0; `None` at infinity.
    pub exponent: Option<f64>,
    pub exponent_exact: Option<String>,
    pub behaviour: String,
    pub integrable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesselTable {
    pub nu: f64,
    pub nu_exact: Option<String>,
    pub branches: Vec<BesselBranch>,
    /// True when no nonzero combination of the two solutions is square
    /// integrable against `dx/x^3`.
    pub injective: bool,
}

impl BesselTable {
    fn branch(&self, solution: &str, endpoint: &str) -> bool {
        self.branches
            .iter()
            .find(|b| b.solution == solution && b.endpoint == endpoint)
            .is_some_and(|b| b.integrable)
    }
}

/// Endpoint integrability of `I_nu(x^2/2)` and `K_nu(x^2/2)` in
/// `L^2(dx/x^3)` from their leading asymptotics.
pub fn bessel_injectivity(rop: &ReducedOp) -> Result<BesselTable, InvertError> {
    let nu = match (rop.nu.as_ref(), rop.nu_irrational) {
        (Some(n), _) => Some((to_f64(n), Some(n.clone()))),
        (None, Some(v)) => Some((v, None)),
        _ => None,
    };
    let Some((nu, exact)) = nu else {
        return Err(match (-&rop.c0).as_constant() {
            Some(_) => InvertError::ImaginaryOrder(rop.h0.to_string()),
            None => InvertError::SymbolicOrder(rop.h0.to_string()),
        });
    };
    let four = Rational::from_integer(4.into());
    let three = Rational::from_integer(3.into());
    let half = Rational::new(1.into(), 2.into());
    let (i_exp, k_exp) = (4.0 * nu - 3.0, -4.0 * nu - 3.0);
    let i_exact = exact.as_ref().map(|n| &four * n - &three);
    let k_exact = exact.as_ref().map(|n| -(&four * n) - &three);
    let i0 = match &exact {
        Some(n) => *n > half,
        None => nu > 0.5,
    };
    let branches = vec![
        BesselBranch {
            solution: "I",
            endpoint: "0",
            exponent: Some(i_exp),
            exponent_exact: i_exact.as_ref().map(fmt_rational),
            behaviour: format!(
                "|u|^2/x^3 ~ x^({})",
                i_exact.as_ref().map_or(format!("{i_exp}"), fmt_rational)
            ),
            integrable: i0,
        },
        BesselBranch {
            solution: "I",
            endpoint: "infinity",
            exponent: None,
            exponent_exact: None,
            behaviour: "|u|^2/x^3 ~ exp(x^2)/x^5, grows".into(),
            integrable: false,
        },
        BesselBranch {
            solution: "K",
            endpoint: "0",
            exponent: Some(k_exp),
            exponent_exact: k_exact.as_ref().map(fmt_rational),
            behaviour: format!(
                "|u|^2/x^3 ~ x^({})",
                k_exact.as_ref().map_or(format!("{k_exp}"), fmt_rational)
            ),
            integrable: false,
        },
        BesselBranch {
            solution: "K",
            endpoint: "infinity",
            exponent: None,
            exponent_exact: None,
            behaviour: "|u|^2/x^3 ~ exp(-x^2)/x^5, decays".into(),
            integrable: true,
        },
    ];
    let mut table = BesselTable {
        nu,
        nu_exact: exact.as_ref().map(fmt_rational),
        branches,
        injective: false,
    };
    // a mixed combination behaves like K at 0 and like I at infinity
    let only_i = table.branch("I", "0") && table.branch("I", "infinity");
    let only_k = table.branch("K", "0") && table.branch("K", "infinity");
    let mixed = table.branch("K", "0") && table.branch("I", "infinity");
    table.injective = !(only_i || only_k || mixed);
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineEvidence {
    pub reduced: String,
    pub bessel: Option<BesselTable>,
    pub injectivity_note: Option<String>,
    /// Quadrature probes of the four endpoint behaviours.
    pub probes: Vec<IntegrabilityProbe>,
    /// Every probe agrees with the table.
    pub probes_agree: Option<bool>,
    pub t0: String,
    pub t0_verdict: Verdict,
    pub tinf: String,
    pub tinf_verdict: Verdict,
}

fn decide_boundary(op: &LimitOperator) -> Verdict {
    match fourier_symbol(op) {
        Ok(s) => decide_abelian(&s),
        Err(e) => Verdict::inconclusive(e.to_string()),
    }
}

/// Combines injectivity of the reduced operator with the verdicts for its
/// two boundary limit operators.
pub fn decide_affine(rop: &ReducedOp) -> Verdict {
    let (bessel, bounds) = rayon::join(
        || bessel_injectivity(rop),
        || -> Result<_, InvertError> {
            let (t0, tinf) = reduced_boundary_ops(rop)?;
            let (v0, vinf) = rayon::join(|| decide_boundary(&t0), || decide_boundary(&tinf));
            Ok((t0, v0, tinf, vinf))
        },
    );
    let (t0, v0, tinf, vinf) = match bounds {
        Ok(b) => b,
        Err(e) => return Verdict::inconclusive(format!("boundary operators of {rop}: {e}")),
    };
    let (inj_status, bessel, note) = match bessel {
        Ok(t) if t.injective => (Status::LeftInvertible, Some(t), None),
        Ok(t) => (
            Status::NotLeftInvertible,
            Some(t),
            Some("a square-integrable solution exists".to_string()),
        ),
        Err(e) => (Status::Inconclusive, None, Some(e.to_string())),
    };
    let probes: Vec<IntegrabilityProbe> = match &bessel {
        Some(t) => [
            (BesselKind::I, Endpoint::Zero),
            (BesselKind::I, Endpoint::Infinity),
            (BesselKind::K, Endpoint::Zero),
            (BesselKind::K, Endpoint::Infinity),
        ]
        .par_iter()
        .filter_map(|&(k, e)| integrability_probe(k, t.nu, e).ok())
        .collect(),
        None => Vec::new(),
    };
    let probes_agree = bessel.as_ref().filter(|_| probes.len() == 4).map(|t| {
        t.branches
            .iter()
            .zip(&probes)
            .all(|(b, p)| b.integrable == p.convergent)
    });
    let statuses = [inj_status, v0.status, vinf.status];
    let status = if statuses.contains(&Status::NotLeftInvertible) {
        Status::NotLeftInvertible
    } else if statuses.contains(&Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::LeftInvertible
    };
    Verdict {
        status,
        evidence: Evidence::Affine(Box::new(AffineEvidence {
            reduced: rop.to_string(),
            bessel,
            injectivity_note: note,
            probes,
            probes_agree,
            t0: t0.to_string(),
            t0_verdict: v0,
            tinf: tinf.to_string(),
            tinf_verdict: vinf,
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{equals, parse};

    fn grushin_limit(h0: &str) -> LimitOperator {
        let mut op = LimitOperator::abelian(
            2,
            [
                (vec![2, 0], Expr::one()),
                (vec![0, 2], Expr::one()),
                (vec![0, 0], parse(&format!("-({h0}) - 1")).unwrap()),
            ],
        );
        op.group = GroupTag::Affine;
        op.bracket = Some(Expr::int(2));
        op
    }

    #[test]
    fn reduction_of_the_symbolic_operator() {
        let r = affine_reduce(&grushin_limit("h0")).unwrap();
        assert_eq!(r.to_string(), "(x*Dx)^2 - x^4 - h0 - 1");
        assert!(r.nu.is_none() && r.nu_irrational.is_none());
        let (t0, tinf) = reduced_boundary_ops(&r).unwrap();
        assert!(equals(&t0.coefficient(&[0, 0]), &Expr::one()).holds());
        assert!(equals(&t0.coefficient(&[0]), &Expr::int(2)).holds());
        assert!(equals(&t0.constant(), &parse("-h0").unwrap()).holds());
        assert_eq!(tinf.to_string(), "Z^2 - 1");
    }

    #[test]
    fn orders_and_shapes() {
        assert_eq!(
            affine_reduce(&grushin_limit("3")).unwrap().nu,
            Some(Rational::from_integer(1.into()))
        );
        let r = affine_reduce(&grushin_limit("-1/2")).unwrap();
        assert!(r.nu.is_none());
        assert!((r.nu_irrational.unwrap() - 0.5f64.sqrt() / 2.0).abs() < 1e-15);
        let mut bad = LimitOperator::abelian(2, [(vec![2, 0], Expr::one()), (vec![0, 0], Expr::int(-1))]);
        bad.group = GroupTag::Affine;
        bad.bracket = Some(Expr::int(2));
        assert!(matches!(affine_reduce(&bad), Err(InvertError::UnsupportedShape(_))));
        let abelian = LimitOperator::abelian(1, [(vec![2], Expr::one())]);
        assert_eq!(affine_reduce(&abelian), Err(InvertError::NotAffine));
    }

    #[test]
    fn bessel_tables() {
        let t = bessel_injectivity(&affine_reduce(&grushin_limit("3")).unwrap()).unwrap();
        assert!(t.injective);
        assert_eq!(t.branches[0].exponent, Some(1.0));
        assert!(t.branches[0].integrable);
        assert_eq!(t.branches[2].exponent, Some(-7.0));
        let q = bessel_injectivity(&affine_reduce(&grushin_limit("-3/4")).unwrap()).unwrap();
        assert_eq!(q.nu, 0.25);
        assert_eq!(q.branches[0].exponent, Some(-2.0));
        assert!(!q.branches[0].integrable && q.injective);
        let e = bessel_injectivity(&affine_reduce(&grushin_limit("-1")).unwrap());
        assert!(matches!(e, Err(InvertError::ImaginaryOrder(_))));
    }

    #[test]
    fn verdicts() {
        let v = |h0: &str| decide_affine(&affine_reduce(&grushin_limit(h0)).unwrap());
        assert_eq!(v("3").status, Status::LeftInvertible);
        assert_eq!(v("-1/2").status, Status::LeftInvertible);
        let zero = v("0");
        assert_eq!(zero.status, Status::NotLeftInvertible);
        let Evidence::Affine(ev) = &zero.evidence else { panic!() };
        assert_eq!(ev.t0_verdict.status, Status::NotLeftInvertible);
        assert_eq!(ev.probes_agree, Some(true));
        let Evidence::Affine(ev) = &v("3").evidence else {
            panic!()
        };
        assert_eq!(ev.probes.len(), 4);
        assert_eq!(ev.probes_agree, Some(true));
        assert_eq!(v("-2").status, Status::Inconclusive);
        assert_eq!(v("h0").status, Status::Inconclusive);
    }
}
