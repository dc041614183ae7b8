//! Almost-Riemannian charts: the frame `X1 = Dx, X2 = f Dy` on a
//! rectangle (or a weighted interval in one dimension), point
//! classification, singular-set scanning and the Laplace-Beltrami operator.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::opalgebra::{DiffOp, Frame, OpError, VectorField, Word};
use crate::symexpr::{poly::to_f64, Compiled, Expr, ExprError, Rational};

pub const X: &str = "x";
pub const Y: &str = "y";

/// Values below this are treated as zero when classifying.
pub const VALUE_TOL: f64 = 1e-10;
/// Derivatives below this are treated as zero when classifying.
pub const DERIV_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("chart window is empty")]
    EmptyWindow,
    #[error("frame function vanishes identically on the window")]
    ZeroFrameFunction,
    #[error("defining function is negative on the window (at x = {0})")]
    NegativeDefiningFunction(f64),
    #[error("operation needs a {0}-dimensional chart")]
    WrongDimension(usize),
    #[error("normal form constraint violated: {0}")]
    Constraint(String),
    #[error("expression uses symbols outside the chart coordinates: {0}")]
    FreeSymbols(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Op(#[from] OpError),
}

/// Rectangle `[x0, x1] x [y0, y1]`; one-dimensional charts ignore `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub x: (Rational, Rational),
    pub y: (Rational, Rational),
}

impl Window {
    pub fn new(x0: Rational, x1: Rational, y0: Rational, y1: Rational) -> Self {
        Window {
            x: (x0, x1),
            y: (y0, y1),
        }
    }

    pub fn square(a: i64) -> Self {
        let r = |v: i64| Rational::from_integer(v.into());
        Window::new(r(-a), r(a), r(-a), r(a))
    }

    pub fn interval(a: Rational, b: Rational) -> Self {
        Window::new(a, b, Rational::from_integer(0.into()), Rational::from_integer(0.into()))
    }

    pub fn xs(&self) -> (f64, f64) {
        (to_f64(&self.x.0), to_f64(&self.x.1))
    }

    pub fn ys(&self) -> (f64, f64) {
        (to_f64(&self.y.0), to_f64(&self.y.1))
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        let (x0, x1) = self.xs();
        let (y0, y1) = self.ys();
        let eps = 1e-12;
        q[0] >= x0 - eps && q[0] <= x1 + eps && (q.len() < 2 || (q[1] >= y0 - eps && q[1] <= y1 + eps))
    }
}

/// A local almost-Riemannian chart.
///
/// In two dimensions the frame is `X1 = Dx, X2 = f Dy`; `s` is the
/// defining function (default `f`) and `h` the zero-order perturbation
/// entering `Delta - h/s^2`. In one dimension the chart is an interval
/// with defining function `s`, generator `X = s Dx` and operator
/// `Dx^2 - V/s^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ARChart {
    pub dim: usize,
    pub f: Expr,
    pub s: Expr,
    pub h: Expr,
    pub potential: Expr,
    pub window: Window,
}

fn check_symbols(e: &Expr, allowed: &[&str], params: &[String]) -> Result<(), ChartError> {
    let bad: Vec<String> = e
        .symbols()
        .into_iter()
        .filter(|s| !allowed.contains(&s.as_str()) && !params.contains(s))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(ChartError::FreeSymbols(bad.join(", ")))
    }
}

impl ARChart {
    /// Two-dimensional chart with `s = f` and `h = 0`.
    pub fn planar(f: Expr, window: Window) -> Result<ARChart, ChartError> {
        if window.x.0 >= window.x.1 || window.y.0 >= window.y.1 {
            return Err(ChartError::EmptyWindow);
        }
        if f.is_zero() {
            return Err(ChartError::ZeroFrameFunction);
        }
        Ok(ARChart {
            dim: 2,
            s: f.clone(),
            f,
            h: Expr::zero(),
            potential: Expr::zero(),
            window,
        })
    }

    /// One-dimensional chart on an interval.
    pub fn interval(s: Expr, potential: Expr, window: Window) -> Result<ARChart, ChartError> {
        if window.x.0 >= window.x.1 {
            return Err(ChartError::EmptyWindow);
        }
        let chart = ARChart {
            dim: 1,
            f: Expr::one(),
            s,
            h: Expr::zero(),
            potential,
            window,
        };
        if chart.s.symbols().iter().all(|v| v == X) {
            let c = chart.s.compile(&[X])?;
            let (a, b) = chart.window.xs();
            for k in 0..=200 {
                let x = a + (b - a) * k as f64 / 200.0;
                let v = c.eval(&[x]);
                if v < -1e-12 {
                    return Err(ChartError::NegativeDefiningFunction(x));
                }
            }
        }
        Ok(chart)
    }

    pub fn with_h(mut self, h: Expr) -> Self {
        self.h = h;
        self
    }

    pub fn with_s(mut self, s: Expr) -> Self {
        self.s = s;
        self
    }

    /// Rejects symbols other than the coordinates and the listed parameters.
    pub fn validate(&self, params: &[String]) -> Result<(), ChartError> {
        let coords: &[&str] = if self.dim == 2 { &[X, Y] } else { &[X] };
        for e in [&self.f, &self.s, &self.h, &self.potential] {
            check_symbols(e, coords, params)?;
        }
        Ok(())
    }

    pub fn coords(&self) -> Vec<&'static str> {
        if self.dim == 2 {
            vec![X, Y]
        } else {
            vec![X]
        }
    }

    fn need(&self, d: usize) -> Result<(), ChartError> {
        if self.dim == d {
            Ok(())
        } else {
            Err(ChartError::WrongDimension(d))
        }
    }

    /// `X1 = Dx, X2 = f Dy` (or `X = Dx` in one dimension).
    pub fn base_fields(&self) -> Vec<VectorField> {
        if self.dim == 1 {
            return vec![VectorField::new(&[X], vec![Expr::one()])];
        }
        vec![
            VectorField::new(&[X, Y], vec![Expr::one(), Expr::zero()]),
            VectorField::new(&[X, Y], vec![Expr::zero(), self.f.clone()]),
        ]
    }

    /// The Lie-manifold frame `Y_i = s X_i` (one dimension: `X = s Dx`).
    pub fn lie_frame(&self) -> Result<Arc<Frame>, ChartError> {
        let fields: Vec<VectorField> = self.base_fields().iter().map(|v| v.scale(&self.s)).collect();
        let names: &[&str] = if self.dim == 2 { &["Y1", "Y2"] } else { &["X"] };
        Ok(Arc::new(Frame::new(names, fields)?))
    }

    pub fn coordinate_frame(&self) -> Arc<Frame> {
        Arc::new(Frame::coordinates(&self.coords()))
    }
}

/// Classification of a chart point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason")]
pub enum PointClass {
    Riemannian,
    Grushin,
    Tangency,
    /// Zero of the defining function of a one-dimensional chart.
    Boundary,
    NonGeneric(String),
}

impl PointClass {
    pub fn is_singular(&self) -> bool {
        !matches!(self, PointClass::Riemannian)
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointClass::Riemannian => write!(f, "Riemannian"),
            PointClass::Grushin => write!(f, "Grushin"),
            PointClass::Tangency => write!(f, "Tangency"),
            PointClass::Boundary => write!(f, "Boundary"),
            PointClass::NonGeneric(r) => write!(f, "NonGeneric({r})"),
        }
    }
}

/// `f` and the derivatives used by classification, compiled for speed.
struct Jet {
    f: Compiled,
    fx: Compiled,
    fy: Compiled,
    fxx: Compiled,
    fxy: Compiled,
}

impl Jet {
    fn new(f: &Expr) -> Result<Jet, ChartError> {
        let c = |e: &Expr| e.compile(&[X, Y]).map_err(ChartError::from);
        let fx = f.diff(X);
        Ok(Jet {
            f: c(f)?,
            fy: c(&f.diff(Y))?,
            fxx: c(&fx.diff(X))?,
            fxy: c(&fx.diff(Y))?,
            fx: c(&fx)?,
        })
    }

    fn classify(&self, q: &[f64]) -> PointClass {
        if self.f.eval(q).abs() > VALUE_TOL {
            return PointClass::Riemannian;
        }
        if self.fx.eval(q).abs() > DERIV_TOL {
            return PointClass::Grushin;
        }
        if self.fy.eval(q).abs() <= DERIV_TOL {
            return PointClass::NonGeneric("gradient of f vanishes on the singular set".into());
        }
        if self.fxx.eval(q).abs() <= DERIV_TOL {
            return PointClass::NonGeneric("Dx^2 f vanishes at a tangency point".into());
        }
        PointClass::Tangency
    }
}

fn one_dim_class(chart: &ARChart, q: f64) -> Result<PointClass, ChartError> {
    let s = chart.s.compile(&[X])?;
    let ds = chart.s.diff(X).compile(&[X])?;
    if s.eval(&[q]).abs() > VALUE_TOL {
        return Ok(PointClass::Riemannian);
    }
    if ds.eval(&[q]).abs() > DERIV_TOL {
        Ok(PointClass::Boundary)
    } else {
        Ok(PointClass::NonGeneric("defining function has a degenerate zero".into()))
    }
}

pub fn classify_point(chart: &ARChart, q: &[f64]) -> Result<PointClass, ChartError> {
    if chart.dim == 1 {
        return one_dim_class(chart, q[0]);
    }
    Ok(Jet::new(&chart.f)?.classify(q))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSample {
    pub point: Vec<f64>,
    pub class: PointClass,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub resolution: usize,
    pub singular: Vec<SingularSample>,
    pub tangency: Vec<Vec<f64>>,
    pub nongeneric: Vec<SingularSample>,
}

impl ScanReport {
    pub fn is_generic(&self) -> bool {
        self.nongeneric.is_empty()
    }
}

fn bisect<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm.abs() < 1e-12 && (b - a) < 1e-10 {
            return m;
        }
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Damped Gauss-Newton on `(f, Dx f) = 0`, used to isolate tangency
/// candidates.
fn tangency_newton(j: &Jet, start: [f64; 2]) -> Option<[f64; 2]> {
    let mut p = start;
    for _ in 0..200 {
        let q = [p[0], p[1]];
        let r = [j.f.eval(&q), j.fx.eval(&q)];
        if r[0].abs() < 1e-13 && r[1].abs() < 1e-13 {
            return Some(p);
        }
        let a = [[j.fx.eval(&q), j.fy.eval(&q)], [j.fxx.eval(&q), j.fxy.eval(&q)]];
        // (J^T J + lambda I) d = -J^T r
        let jtj = [
            [
                a[0][0] * a[0][0] + a[1][0] * a[1][0],
                a[0][0] * a[0][1] + a[1][0] * a[1][1],
            ],
            [
                a[0][1] * a[0][0] + a[1][1] * a[1][0],
                a[0][1] * a[0][1] + a[1][1] * a[1][1],
            ],
        ];
        let g = [a[0][0] * r[0] + a[1][0] * r[1], a[0][1] * r[0] + a[1][1] * r[1]];
        let lambda = 1e-14 * (jtj[0][0] + jtj[1][1]).max(1e-300);
        let m = [[jtj[0][0] + lambda, jtj[0][1]], [jtj[1][0], jtj[1][1] + lambda]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let d = [
            -(m[1][1] * g[0] - m[0][1] * g[1]) / det,
            -(-m[1][0] * g[0] + m[0][0] * g[1]) / det,
        ];
        p = [p[0] + d[0], p[1] + d[1]];
        if !p[0].is_finite() || !p[1].is_finite() {
            return None;
        }
    }
    let q = [p[0], p[1]];
    (j.f.eval(&q).abs() < 1e-10 && j.fx.eval(&q).abs() < 1e-7).then_some(p)
}

fn dedupe(points: &mut Vec<Vec<f64>>, tol: f64) {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points.drain(..) {
        if !out.iter().any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() < tol)) {
            out.push(p);
        }
    }
    *points = out;
}

/// Locates the singular set on a `resolution x resolution` grid.
pub fn genericity_scan(chart: &ARChart, resolution: usize) -> Result<ScanReport, ChartError> {
    let n = resolution.max(1);
    if chart.dim == 1 {
        return scan_interval(chart, n);
    }
    let jet = Jet::new(&chart.f)?;
    let (x0, x1) = chart.window.xs();
    let (y0, y1) = chart.window.ys();
    let xs: Vec<f64> = (0..=n).map(|i| x0 + (x1 - x0) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = (0..=n).map(|j| y0 + (y1 - y0) * j as f64 / n as f64).collect();
    let vals: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ys.iter().map(|&y| jet.f.eval(&[x, y])).collect())
        .collect();
    let f = &jet.f;
    let mut roots: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::new();
            for j in 0..=n {
                let v = vals[i][j];
                if v == 0.0 {
                    local.push(vec![xs[i], ys[j]]);
                    continue;
                }
                if i < n && vals[i + 1][j] != 0.0 && (vals[i + 1][j] < 0.0) != (v < 0.0) {
                    let y = ys[j];
                    local.push(vec![bisect(|x| f.eval(&[x, y]), xs[i], xs[i + 1]), y]);
                }
                if j < n && vals[i][j + 1] != 0.0 && (vals[i][j + 1] < 0.0) != (v < 0.0) {
                    let x = xs[i];
                    local.push(vec![x, bisect(|y| f.eval(&[x, y]), ys[j], ys[j + 1])]);
                }
            }
            local
        })
        .collect();
    dedupe(&mut roots, 1e-9);

    // tangency and degenerate candidates: cells crossed by the zero set
    let hx = (x1 - x0) / n as f64;
    let hy = (y1 - y0) / n as f64;
    let mut candidates: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::new();
            for j in 0..n {
                let c = [vals[i][j], vals[i + 1][j], vals[i][j + 1], vals[i + 1][j + 1]];
                let crosses = c.contains(&0.0) || c.iter().any(|v| *v < 0.0) && c.iter().any(|v| *v > 0.0);
                if !crosses {
                    continue;
                }
                let start = [xs[i] + 0.5 * hx, ys[j] + 0.5 * hy];
                if let Some(p) = tangency_newton(&jet, start) {
                    let inside =
                        p[0] >= xs[i] - hx && p[0] <= xs[i + 1] + hx && p[1] >= ys[j] - hy && p[1] <= ys[j + 1] + hy;
                    if inside && chart.window.contains(&p) {
                        local.push(vec![p[0], p[1]]);
                    }
                }
            }
            local
        })
        .collect();
    dedupe(&mut candidates, 1e-8);

    let mut report = ScanReport {
        resolution: n,
        ..ScanReport::default()
    };
    for p in roots {
        let class = jet.classify(&p);
        if let PointClass::NonGeneric(_) = class {
            report.nongeneric.push(SingularSample {
                point: p.clone(),
                class: class.clone(),
            });
        }
        report.singular.push(SingularSample { point: p, class });
    }
    for p in candidates {
        let class = jet.classify(&p);
        match class {
            PointClass::Tangency if !report.tangency.iter().any(|t| close(t, &p, 1e-8)) => {
                report.tangency.push(p.clone());
                report.singular.push(SingularSample { point: p, class });
            }
            PointClass::NonGeneric(_) if !report.nongeneric.iter().any(|s| close(&s.point, &p, 1e-8)) => {
                report.nongeneric.push(SingularSample {
                    point: p.clone(),
                    class: class.clone(),
                });
                report.singular.push(SingularSample { point: p, class });
            }
            _ => {}
        }
    }
    Ok(report)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() < tol)
}

fn scan_interval(chart: &ARChart, n: usize) -> Result<ScanReport, ChartError> {
    let s = chart.s.compile(&[X])?;
    let (a, b) = chart.window.xs();
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| s.eval(&[x])).collect();
    let mut roots = Vec::new();
    for i in 0..=n {
        if vals[i] == 0.0 {
            roots.push(vec![xs[i]]);
        } else if i < n && vals[i + 1] != 0.0 && (vals[i + 1] < 0.0) != (vals[i] < 0.0) {
            roots.push(vec![bisect(|x| s.eval(&[x]), xs[i], xs[i + 1])]);
        }
    }
    dedupe(&mut roots, 1e-9);
    let mut report = ScanReport {
        resolution: n,
        ..ScanReport::default()
    };
    for p in roots {
        let class = one_dim_class(chart, p[0])?;
        if let PointClass::NonGeneric(_) = class {
            report.nongeneric.push(SingularSample {
                point: p.clone(),
                class: class.clone(),
            });
        }
        report.singular.push(SingularSample { point: p, class });
    }
    Ok(report)
}

/// Riemannian divergence of `X1` (`which = 0`) or `X2` (`which = 1`) with
/// respect to the volume `dx dy / |f|`.
pub fn divergence(chart: &ARChart, which: usize) -> Result<Expr, ChartError> {
    chart.need(2)?;
    match which {
        0 => Ok(-(chart.f.diff(X).div(&chart.f)?)),
        1 => Ok(Expr::zero()),
        _ => Err(ChartError::Constraint(format!("no field X{}", which + 1))),
    }
}

/// `sum_i X_i^2 + div(X_i) X_i` in coordinate partials. One-dimensional
/// charts give `Dx^2 - V/s^2`.
pub fn laplace_beltrami(chart: &ARChart) -> Result<DiffOp, ChartError> {
    let cf = chart.coordinate_frame();
    if chart.dim == 1 {
        let v = chart.potential.div(&chart.s.powi(2)?)?;
        return Ok(DiffOp::from_terms(
            &cf,
            [(Word(vec![0, 0]), Expr::one()), (Word::empty(), -v)],
        ));
    }
    let mut out = DiffOp::zero(&cf);
    for (i, field) in chart.base_fields().iter().enumerate() {
        let op = DiffOp::from_terms(
            &cf,
            field
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| (Word(vec![j as u8]), a.clone())),
        );
        out = out.add(&op.compose(&op)?)?;
        let div = divergence(chart, i)?;
        out = out.add(&op.mul_left(&div))?;
    }
    Ok(out)
}

/// `Delta - h/s^2`.
pub fn perturbed_laplacian(chart: &ARChart) -> Result<DiffOp, ChartError> {
    let lap = laplace_beltrami(chart)?;
    if chart.h.is_zero() {
        return Ok(lap);
    }
    let v = chart.h.div(&chart.s.powi(2)?)?;
    Ok(lap.add(&DiffOp::multiplication(lap.frame(), -v))?)
}

/// Metric `diag(1, 1/f^2)` and density `1/|f|` of the volume form.
pub fn metric_and_volume(chart: &ARChart) -> Result<([[Expr; 2]; 2], Expr), ChartError> {
    chart.need(2)?;
    let inv_sq = Expr::one().div(&chart.f.powi(2)?)?;
    let density = Expr::one().div(&chart.f.abs()?)?;
    Ok(([[Expr::one(), Expr::zero()], [Expr::zero(), inv_sq]], density))
}

/// Data for the normal-form constructors; absent functions default to 0
/// (`psi` defaults to 1).
#[derive(Clone, Debug, Default)]
pub struct NormalFormData {
    pub phi: Option<Expr>,
    pub psi: Option<Expr>,
    pub big_psi: Option<Expr>,
}

/// Builds the chart `X2 = e^phi Dy`, `x e^phi Dy` or `(y - x^2 psi) e^Psi Dy`.
pub fn normal_form(kind: &PointClass, data: &NormalFormData, window: Window) -> Result<ARChart, ChartError> {
    let x = Expr::sym(X);
    let y = Expr::sym(Y);
    let f = match kind {
        PointClass::Riemannian => data.phi.clone().unwrap_or_default().exp()?,
        PointClass::Grushin => x * data.phi.clone().unwrap_or_default().exp()?,
        PointClass::Tangency => {
            let psi = data.psi.clone().unwrap_or_else(Expr::one);
            let big = data.big_psi.clone().unwrap_or_default();
            if psi.depends_on(Y) {
                return Err(ChartError::Constraint("psi must depend on x only".into()));
            }
            let psi0 = psi.substitute(X, &Expr::zero())?;
            if psi0.is_zero() {
                return Err(ChartError::Constraint("psi(0) must be non-zero".into()));
            }
            let on_axis = big.substitute(X, &Expr::zero())?;
            let c = on_axis.compile(&[Y])?;
            for k in -4..=4 {
                let v = c.eval(&[k as f64 / 4.0]);
                if v.abs() > VALUE_TOL {
                    return Err(ChartError::Constraint(format!(
                        "Psi(0, y) must vanish; Psi(0, {}) = {v}",
                        k as f64 / 4.0
                    )));
                }
            }
            (y - x.powi(2)? * psi) * big.exp()?
        }
        PointClass::Boundary | PointClass::NonGeneric(_) => {
            return Err(ChartError::Constraint(format!("no normal form for {kind}")))
        }
    };
    ARChart::planar(f, window)
}

/// Substitutes parameter values into every chart expression.
pub fn bind_parameters(chart: &ARChart, values: &BTreeMap<String, Expr>) -> Result<ARChart, ChartError> {
    let b = |e: &Expr| e.substitute_all(values).map_err(ChartError::from);
    Ok(ARChart {
        dim: chart.dim,
        f: b(&chart.f)?,
        s: b(&chart.s)?,
        h: b(&chart.h)?,
        potential: b(&chart.potential)?,
        window: chart.window.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{equals, parse, Equality};

    fn chart(f: &str) -> ARChart {
        ARChart::planar(parse(f).unwrap(), Window::square(1)).unwrap()
    }

    #[test]
    fn classification_examples() {
        let c = chart("y - x^2");
        assert_eq!(classify_point(&c, &[0.0, 0.0]).unwrap(), PointClass::Tangency);
        assert_eq!(classify_point(&c, &[1.0, 1.0]).unwrap(), PointClass::Grushin);
        assert_eq!(classify_point(&c, &[0.0, 1.0]).unwrap(), PointClass::Riemannian);
        let cubic = chart("y - x^3");
        assert!(matches!(
            classify_point(&cubic, &[0.0, 0.0]).unwrap(),
            PointClass::NonGeneric(_)
        ));
    }

    #[test]
    fn scans() {
        let g = genericity_scan(&chart("x"), 16).unwrap();
        assert!(!g.singular.is_empty());
        assert!(g
            .singular
            .iter()
            .all(|s| s.class == PointClass::Grushin && s.point[0].abs() < 1e-10));
        assert!(genericity_scan(&chart("1"), 16).unwrap().singular.is_empty());
        let t = genericity_scan(&chart("y - x^2"), 32).unwrap();
        assert_eq!(t.tangency.len(), 1);
        assert!(t.tangency[0].iter().all(|v| v.abs() < 1e-7));
        assert!(t.is_generic());
        let cubic = genericity_scan(&chart("y - x^3"), 32).unwrap();
        assert!(!cubic.is_generic());
    }

    #[test]
    fn laplacians() {
        let p = |s: &str| parse(s).unwrap();
        assert_eq!(
            laplace_beltrami(&chart("x")).unwrap().to_string(),
            "Dx^2 + x^2*Dy^2 - (1/x)*Dx"
        );
        assert_eq!(laplace_beltrami(&chart("1")).unwrap().to_string(), "Dx^2 + Dy^2");
        let t = laplace_beltrami(&chart("y - x^2")).unwrap();
        let dx = t.coefficient(&Word(vec![0]));
        assert!(equals(&dx, &p("2*x/(y - x^2)")).holds());
        assert_eq!(t.coefficient(&Word(vec![1])), p("y - x^2"));
        assert_eq!(t.coefficient(&Word(vec![1, 1])), p("(y - x^2)^2"));
    }

    #[test]
    fn metric_density_and_normal_forms() {
        let (g, w) = metric_and_volume(&chart("x")).unwrap();
        assert_eq!(g[1][1], parse("1/x^2").unwrap());
        assert_eq!(w, parse("1/abs(x)").unwrap());
        let data = NormalFormData::default();
        assert_eq!(
            normal_form(&PointClass::Grushin, &data, Window::square(1)).unwrap().f,
            parse("x").unwrap()
        );
        assert_eq!(
            normal_form(&PointClass::Tangency, &data, Window::square(1)).unwrap().f,
            parse("y - x^2").unwrap()
        );
        assert_eq!(
            normal_form(&PointClass::Riemannian, &data, Window::square(1))
                .unwrap()
                .f,
            Expr::one()
        );
        let bad = NormalFormData {
            big_psi: Some(parse("y").unwrap()),
            ..NormalFormData::default()
        };
        assert!(matches!(
            normal_form(&PointClass::Tangency, &bad, Window::square(1)),
            Err(ChartError::Constraint(_))
        ));
    }

    #[test]
    fn first_order_part_is_the_divergence() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            equals(&divergence(&chart("x"), 0).unwrap(), &parse("-1/x").unwrap()),
            Equality::Equal
        );
        assert!(divergence(&chart("x"), 1).unwrap().is_zero());
        let mut checked = 0;
        while checked < 20 {
            let f = crate::selftest::random_poly(&mut rng, 3, true);
            let Ok(c) = ARChart::planar(f.clone(), Window::square(1)) else {
                continue;
            };
            let lb = laplace_beltrami(&c).unwrap();
            let dx = lb.coefficient(&Word(vec![0]));
            let dy = lb.coefficient(&Word(vec![1]));
            assert!((&dx - divergence(&c, 0).unwrap()).is_zero(), "f = {f}");
            assert!((&dy - &f * f.diff(Y)).is_zero(), "f = {f}");
            checked += 1;
        }
    }
}
