//! Weighted measures, test functions and weighted Sobolev norms on an
//! interval.

use std::sync::Arc;

use serde::Serialize;

use super::quad::{integrate, shell_sum, Integral, Toward};
use super::NumError;
use crate::frames::{ARChart, X};
use crate::opalgebra::VectorField;
use crate::symexpr::{Compiled, Expr};

/// `density(x) dx` on `(lo, hi)`; `hi` may be infinite.
#[derive(Clone, Debug)]
pub struct WeightedMeasure {
    pub density: Expr,
    pub var: String,
    pub lo: f64,
    pub hi: f64,
    pub singular_lo: bool,
    pub singular_hi: bool,
    compiled: Arc<Compiled>,
}

impl WeightedMeasure {
    /// Endpoints where the density is not finite, and infinite endpoints,
    /// are treated as singular.
    pub fn new(density: Expr, var: &str, lo: f64, hi: f64) -> Result<WeightedMeasure, NumError> {
        if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) || !lo.is_finite() {
            return Err(NumError::Domain(format!("bad interval ({lo}, {hi})")));
        }
        let compiled = Arc::new(density.compile(&[var])?);
        let at = |t: f64| compiled.eval(&[t]);
        let span = if hi.is_finite() { hi - lo } else { 1.0 };
        for k in 1..16 {
            let t = lo + span * k as f64 / 16.0;
            let v = at(t);
            if !(v > 0.0 && v.is_finite()) {
                return Err(NumError::Domain(format!("density {density} is not positive at {t}")));
            }
        }
        let singular_lo = !at(lo).is_finite();
        let singular_hi = !hi.is_finite() || !at(hi).is_finite();
        Ok(WeightedMeasure {
            density,
            var: var.to_string(),
            lo,
            hi,
            singular_lo,
            singular_hi,
            compiled,
        })
    }

    pub fn with_singular(mut self, lo: bool, hi: bool) -> Self {
        self.singular_lo |= lo;
        self.singular_hi |= hi;
        self
    }

    pub fn density_at(&self, t: f64) -> f64 {
        self.compiled.eval(&[t])
    }
}

/// A function of one variable: symbolic, with exact derivatives, or a
/// native closure differentiated by fourth-order stencils.
#[derive(Clone)]
pub enum TestFunction {
    Symbolic(Expr),
    Native(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Symbolic(e) => write!(f, "Symbolic({e})"),
            TestFunction::Native(_) => write!(f, "Native"),
        }
    }
}

impl TestFunction {
    pub fn native<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        TestFunction::Native(Arc::new(f))
    }

    /// Applies `field` (a one-dimensional vector field over `var`).
    pub fn apply(&self, field: &VectorField, var: &str) -> Result<TestFunction, NumError> {
        match self {
            TestFunction::Symbolic(e) => Ok(TestFunction::Symbolic(field.apply(e))),
            TestFunction::Native(f) => {
                let a = field.coeffs[0].compile(&[var])?;
                let f = f.clone();
                Ok(TestFunction::native(move |t| a.eval(&[t]) * derivative(&*f, t)))
            }
        }
    }

    pub fn evaluator(&self, var: &str) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>, NumError> {
        match self {
            TestFunction::Symbolic(e) => {
                let c = e.compile(&[var])?;
                Ok(Arc::new(move |t| c.eval(&[t])))
            }
            TestFunction::Native(f) => Ok(f.clone()),
        }
    }
}

/// Fourth-order central difference with a relative step.
pub fn derivative(f: &dyn Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-3 * t.abs().max(1e-3);
    (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
}

/// `int |u|^2 density` over the measure's interval.
pub fn quad_weighted(u: &TestFunction, m: &WeightedMeasure, tol: f64) -> Result<Integral, NumError> {
    let ev = u.evaluator(&m.var)?;
    let g = |t: f64| {
        let v = ev(t);
        v * v * m.density_at(t)
    };
    Ok(integrate_profile(&g, m, tol).0)
}

/// Integrates a non-negative profile, splitting off shells at singular
/// endpoints. Returns the shell sums used.
pub fn integrate_profile<F: Fn(f64) -> f64>(g: &F, m: &WeightedMeasure, tol: f64) -> (Integral, Vec<f64>) {
    let (mut a, mut b) = (m.lo, m.hi);
    let mut out = Integral::Finite { value: 0.0, error: 0.0 };
    let mut shells = Vec::new();
    if !m.hi.is_finite() {
        let start = (m.lo.abs() + 1.0).max(2.0 * m.lo);
        let (v, s) = shell_sum(g, Toward::Infinity { m: start }, tol);
        out = out.add(&v);
        shells.extend(s);
        b = start;
    }
    let mid = 0.5 * (a + b);
    if m.singular_lo {
        let (v, s) = shell_sum(g, Toward::Lower { a, d: mid - a }, tol);
        out = out.add(&v);
        shells.extend(s);
        a = mid;
    }
    if m.singular_hi && m.hi.is_finite() {
        let (v, s) = shell_sum(g, Toward::Upper { b, d: b - mid }, tol);
        out = out.add(&v);
        shells.extend(s);
        b = mid;
    }
    if b > a {
        let (v, e) = integrate(g, a, b, tol * 1e-3);
        let part = if v.is_finite() {
            Integral::Finite { value: v, error: e }
        } else {
            Integral::Divergent { shells: vec![v] }
        };
        out = out.add(&part);
    }
    (out, shells)
}

fn words(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..n {
                let mut v: Vec<usize> = w.clone();
                v.push(i);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `sum_{|w| <= k} int |X_w u|^2 dm`.
pub fn sobolev_norm(
    u: &TestFunction,
    fields: &[VectorField],
    m: &WeightedMeasure,
    k: usize,
) -> Result<Integral, NumError> {
    if k > 2 {
        return Err(NumError::Domain(format!("Sobolev order {k} not in 0..=2")));
    }
    let mut total = Integral::Finite { value: 0.0, error: 0.0 };
    for w in words(fields.len(), k) {
        let mut v = u.clone();
        for &i in w.iter().rev() {
            v = v.apply(&fields[i], &m.var)?;
        }
        total = total.add(&quad_weighted(&v, m, 1e-10)?);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Membership {
    Member { integrals: Vec<f64> },
    Excluded { which: usize, integral: String },
}

/// Near a boundary zero `x = 0` of `s`, checks finiteness of
/// `int |(x Dx)^j (u x^(-3/2))|^2 dx/x` on `(0, eps)` for `j = 0, 1, 2`.
pub fn domain_membership_probe(u: &Expr, chart: &ARChart, eps: f64) -> Result<Membership, NumError> {
    if chart.dim != 1 {
        return Err(NumError::Domain(
            "membership probe needs a one-dimensional chart".into(),
        ));
    }
    let x = Expr::sym(X);
    let s0 = chart.s.substitute(X, &Expr::zero())?;
    let s1 = chart.s.diff(X).substitute(X, &Expr::zero())?;
    if !s0.is_zero() || s1.is_zero() {
        return Err(NumError::Domain(format!(
            "s = {} is not comparable to x near 0",
            chart.s
        )));
    }
    let m = WeightedMeasure::new(x.recip()?, X, 0.0, eps)?;
    let euler = VectorField::new(&[X], vec![x.clone()]);
    let mut v = u * &x.pow_rational(&crate::symexpr::poly::rat(-3, 2))?;
    let names = ["|u x^(-3/2)|^2", "|x Dx (u x^(-3/2))|^2", "|(x Dx)^2 (u x^(-3/2))|^2"];
    let mut values = Vec::new();
    for (j, name) in names.iter().enumerate() {
        if j > 0 {
            v = euler.apply(&v);
        }
        match quad_weighted(&TestFunction::Symbolic(v.clone()), &m, 1e-10)? {
            Integral::Finite { value, .. } => values.push(value),
            Integral::Divergent { .. } => {
                return Ok(Membership::Excluded {
                    which: j,
                    integral: format!("int {name} dx/x"),
                })
            }
        }
    }
    Ok(Membership::Member { integrals: values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Window;
    use crate::symexpr::{parse, poly::int};

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn weighted_integrals() {
        let m = WeightedMeasure::new(e("1/x^3"), "x", 0.0, 1.0).unwrap();
        let v = quad_weighted(&TestFunction::Symbolic(e("x^3")), &m, 1e-12).unwrap();
        assert!((v.value().unwrap() - 0.25).abs() < 1e-10);
        // x^a against dx/x^3 diverges exactly when 2a - 3 <= -1
        for (a, div) in [
            ("1", true),
            ("x^(1/2)", true),
            ("x", true),
            ("x^(3/2)", false),
            ("x^2", false),
        ] {
            let v = quad_weighted(&TestFunction::Symbolic(e(a)), &m, 1e-10).unwrap();
            assert_eq!(v.is_divergent(), div, "{a}");
        }
        let m = WeightedMeasure::new(e("1/x"), "x", 0.0, 1.0).unwrap();
        assert!(quad_weighted(&TestFunction::Symbolic(e("x^(3/2)*x^(-3/2)")), &m, 1e-10)
            .unwrap()
            .is_divergent());
        assert!(WeightedMeasure::new(e("x - 1/2"), "x", 0.0, 1.0).is_err());
    }

    fn bump(t: f64) -> f64 {
        let q = 4.0 * t * (1.0 - t);
        if q <= 0.0 {
            0.0
        } else {
            (-1.0 / q).exp()
        }
    }

    #[test]
    fn sobolev_norms() {
        let m = WeightedMeasure::new(e("1/(x*(1-x))"), "x", 0.0, 1.0).unwrap();
        let field = VectorField::new(&["x"], vec![e("x*(1-x)")]);
        let fields = std::slice::from_ref(&field);
        let mut v = e("x^2*(1-x)^2");
        let mut exact = 0.0;
        for _ in 0..3 {
            // v^2/s is a polynomial here
            let g = (&v * &v).div(&e("x*(1-x)")).unwrap();
            let c = g.compile(&["x"]).unwrap();
            exact += crate::numverify::quad::composite_gk15(&|t| c.eval(&[t]), 0.0, 1.0, 1);
            v = field.apply(&v);
        }
        let n = sobolev_norm(&TestFunction::Symbolic(e("x^2*(1-x)^2")), fields, &m, 2).unwrap();
        assert!((n.value().unwrap() - exact).abs() < 1e-10 * exact);
        assert!(sobolev_norm(&TestFunction::Symbolic(Expr::one()), fields, &m, 0)
            .unwrap()
            .is_divergent());
        let u = |t: f64| (t * (1.0 - t)).powf(1.5) * bump(t);
        let reduced = TestFunction::native(move |t: f64| {
            let s = t * (1.0 - t);
            if s <= 0.0 {
                0.0
            } else {
                u(t) / s.powf(1.5)
            }
        });
        let n = sobolev_norm(&reduced, fields, &m, 2).unwrap();
        assert!(n.value().is_some_and(|v| v.is_finite() && v > 0.0));
    }

    #[test]
    fn membership() {
        let chart = ARChart::interval(e("x*(1-x)"), e("alpha"), Window::interval(int(0), int(1))).unwrap();
        assert!(matches!(
            domain_membership_probe(&e("x^2"), &chart, 0.25).unwrap(),
            Membership::Member { .. }
        ));
        assert_eq!(
            domain_membership_probe(&e("x^(3/2)"), &chart, 0.25).unwrap(),
            Membership::Excluded {
                which: 0,
                integral: "int |u x^(-3/2)|^2 dx/x".into()
            }
        );
        assert!(parse("x^(3/2)/log(1/x)").is_err());
    }
}
