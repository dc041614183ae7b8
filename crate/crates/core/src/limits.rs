//! Limit operators: frame operators frozen at singular points, with the
//! isotropy group read off from the frame brackets.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{self, ARChart, ChartError, PointClass, X, Y};
use crate::opalgebra::{self, render_terms, DiffOp, Frame, OpError, Word};
use crate::symexpr::{poly::from_f64, poly::to_f64, Expr, ExprError, Rational};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LimitError {
    #[error("point is not singular")]
    NotSingular,
    #[error("non-generic point: {0}")]
    NonGeneric(String),
    #[error("bracket [Y1,Y2] at the point has a Y1 component ({0}); isotropy is neither abelian nor affine")]
    UnsupportedIsotropy(String),
    #[error("coefficient of {word} has a pole at the point")]
    Pole { word: String },
    #[error("point coordinates must be finite")]
    BadPoint,
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupTag {
    Abelian(u8),
    Affine,
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupTag::Abelian(n) => write!(f, "Abelian({n})"),
            GroupTag::Affine => write!(f, "Affine"),
        }
    }
}

/// Constant-coefficient operator in the generators `Z` (or `Z1, Z2`) of
/// an isotropy group. For the affine group the relation is
/// `[Z1, Z2] = bracket * Z2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitOperator {
    pub group: GroupTag,
    pub terms: BTreeMap<Word, Expr>,
    pub bracket: Option<Expr>,
    pub point: Vec<Rational>,
    pub provenance: String,
}

pub fn generator_names(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["Z".into()]
    } else {
        (1..=n).map(|i| format!("Z{i}")).collect()
    }
}

impl LimitOperator {
    pub fn dim(&self) -> usize {
        match self.group {
            GroupTag::Abelian(n) => n as usize,
            GroupTag::Affine => 2,
        }
    }

    /// Builds an abelian operator from `(multi-index, coefficient)` pairs.
    pub fn abelian(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, Expr)>) -> LimitOperator {
        let mut map: BTreeMap<Word, Expr> = BTreeMap::new();
        for (mi, c) in terms {
            let mut w = Vec::new();
            for (g, &k) in mi.iter().enumerate() {
                w.extend(std::iter::repeat_n(g as u8, k as usize));
            }
            let slot = map.entry(Word(w)).or_default();
            *slot = &*slot + c;
        }
        map.retain(|_, c| !c.is_zero());
        LimitOperator {
            group: GroupTag::Abelian(n as u8),
            terms: map,
            bracket: None,
            point: Vec::new(),
            provenance: String::new(),
        }
    }

    pub fn coefficient(&self, w: &[u8]) -> Expr {
        self.terms.get(&Word(w.to_vec())).cloned().unwrap_or_default()
    }

    pub fn constant(&self) -> Expr {
        self.coefficient(&[])
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = self.terms.values().flat_map(|c| c.symbols()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn map_coefficients<F>(&self, mut f: F) -> Result<LimitOperator, ExprError>
    where
        F: FnMut(&Expr) -> Result<Expr, ExprError>,
    {
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            let v = f(c)?;
            if !v.is_zero() {
                terms.insert(w.clone(), v);
            }
        }
        let bracket = self.bracket.as_ref().map(&mut f).transpose()?;
        Ok(LimitOperator {
            terms,
            bracket,
            ..self.clone()
        })
    }

    /// Substitutes parameter values.
    pub fn bind(&self, values: &BTreeMap<String, Expr>) -> Result<LimitOperator, ExprError> {
        self.map_coefficients(|c| c.substitute_all(values))
    }

    /// Coefficient-wise sum (the groups must agree).
    pub fn add(&self, other: &LimitOperator) -> Option<LimitOperator> {
        if self.group != other.group {
            return None;
        }
        let mut terms = self.terms.clone();
        for (w, c) in &other.terms {
            let slot = terms.entry(w.clone()).or_default();
            *slot = &*slot + c;
        }
        terms.retain(|_, c| !c.is_zero());
        Some(LimitOperator { terms, ..self.clone() })
    }

    /// Drops constant coefficients smaller than `tol` in magnitude.
    pub fn chop(&self, tol: f64) -> LimitOperator {
        let mut out = self.clone();
        out.terms
            .retain(|_, c| c.as_constant().is_none_or(|v| to_f64(&v).abs() >= tol));
        out
    }

    /// Affine operators rescaled so that `[Z1, Z2] = 2 Z2`: with
    /// `k = bracket/2`, `Z_i = k W_i` and the result divided by `k^order`.
    pub fn normalized(&self) -> Result<LimitOperator, ExprError> {
        let (GroupTag::Affine, Some(b)) = (self.group, &self.bracket) else {
            return Ok(self.clone());
        };
        let k = b.scale(&Rational::new(1.into(), 2.into()));
        let order = self.order() as i64;
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            let v = (c * k.powi(w.len() as i64)?).div(&k.powi(order)?)?;
            if !v.is_zero() {
                terms.insert(w.clone(), v);
            }
        }
        Ok(LimitOperator {
            terms,
            bracket: Some(Expr::int(2)),
            provenance: format!("{} (normalized by k = {k})", self.provenance),
            ..self.clone()
        })
    }

    pub fn names(&self) -> Vec<String> {
        generator_names(self.dim())
    }
}

impl fmt::Display for LimitOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_terms(self.terms.iter(), &self.names(), f)
    }
}

/// Exact rational point from floating coordinates.
pub fn exact_point(q: &[f64]) -> Result<Vec<Rational>, LimitError> {
    q.iter().map(|v| from_f64(*v).ok_or(LimitError::BadPoint)).collect()
}

fn point_values(coords: &[String], q: &[Rational]) -> BTreeMap<String, Expr> {
    coords
        .iter()
        .zip(q)
        .map(|(c, v)| (c.clone(), Expr::constant(v.clone())))
        .collect()
}

/// Isotropy group at a singular point, with the affine bracket factor.
pub fn isotropy_type(chart: &ARChart, q: &[Rational]) -> Result<(GroupTag, Option<Expr>), LimitError> {
    if chart.dim == 1 {
        return Ok((GroupTag::Abelian(1), None));
    }
    let qf: Vec<f64> = q.iter().map(to_f64).collect();
    match frames::classify_point(chart, &qf)? {
        PointClass::Riemannian => return Err(LimitError::NotSingular),
        PointClass::NonGeneric(r) => return Err(LimitError::NonGeneric(r)),
        _ => {}
    }
    let frame = chart.lie_frame()?;
    bracket_type(&frame, q)
}

fn bracket_type(frame: &Frame, q: &[Rational]) -> Result<(GroupTag, Option<Expr>), LimitError> {
    let vals = point_values(frame.coords(), q);
    let c1 = frame.structure_constant(0, 1, 0).substitute_all(&vals)?;
    let c2 = frame.structure_constant(0, 1, 1).substitute_all(&vals)?;
    if !c1.is_zero() {
        return Err(LimitError::UnsupportedIsotropy(c1.to_string()));
    }
    if c2.is_zero() {
        Ok((GroupTag::Abelian(2), None))
    } else {
        Ok((GroupTag::Affine, Some(c2)))
    }
}

/// Evaluates the coefficients of a frame operator at `q` and maps `Y_i`
/// to the group generators `Z_i`.
pub fn freeze(p: &DiffOp, q: &[Rational], group: GroupTag, bracket: Option<Expr>) -> Result<LimitOperator, LimitError> {
    let frame = p.frame();
    let vals = point_values(frame.coords(), q);
    let mut terms = BTreeMap::new();
    for (w, c) in p.terms() {
        let v = c.substitute_all(&vals).map_err(|e| match e {
            ExprError::Pole { .. } | ExprError::DivisionByZero => LimitError::Pole {
                word: w.render(frame.names()),
            },
            other => other.into(),
        })?;
        if !v.is_zero() {
            terms.insert(w.clone(), v);
        }
    }
    Ok(LimitOperator {
        group,
        terms,
        bracket,
        point: q.to_vec(),
        provenance: format!("frozen from {p}"),
    })
}

/// `-(Dx f(q))^2 - h(q)`, the zero-order coefficient of the frozen
/// `s (Delta - h/s^2) s` with `s = f`.
pub fn general_freeze_constant(chart: &ARChart, q: &[Rational]) -> Result<Expr, LimitError> {
    let vals = point_values(&[X.to_string(), Y.to_string()], q);
    let fx = chart.f.diff(X).substitute_all(&vals)?;
    let h = chart.h.substitute_all(&vals)?;
    Ok(-(fx.powi(2)?) - h)
}

/// `s^(2-gamma) (Delta - h/s^2) s^gamma` written in the Lie frame and
/// certified smooth.
pub fn frame_operator(chart: &ARChart, gamma: &Expr) -> Result<DiffOp, LimitError> {
    let lap = frames::perturbed_laplacian(chart)?;
    let left = Expr::int(2) - gamma;
    let conj = opalgebra::conjugate_by_weight(&lap, &chart.s, &left, gamma)?;
    let frame = chart.lie_frame()?;
    Ok(opalgebra::to_frame(&conj, &frame, &chart.s)?)
}

/// Freezes the frame operator of `chart` at `q`, reading the group from
/// the frame brackets.
pub fn limit_at(chart: &ARChart, p: &DiffOp, q: &[Rational]) -> Result<LimitOperator, LimitError> {
    let (group, bracket) = isotropy_type(chart, q)?;
    freeze(p, q, group, bracket)
}

/// Frame of a single generator over one coordinate.
pub fn line_frame(coord: &str, name: &str, coeff: Expr) -> Result<Arc<Frame>, OpError> {
    Ok(Arc::new(Frame::new(
        &[name],
        vec![opalgebra::VectorField::new(&[coord], vec![coeff])],
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Window;
    use crate::symexpr::{parse, poly::int};

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn origin() -> Vec<Rational> {
        vec![int(0), int(0)]
    }

    #[test]
    fn isotropy_examples() {
        let g = ARChart::planar(e("x"), Window::square(1)).unwrap();
        let (t, b) = isotropy_type(&g, &origin()).unwrap();
        assert_eq!(t, GroupTag::Affine);
        assert_eq!(b, Some(Expr::int(2)));
        let tg = ARChart::planar(e("y - x^2"), Window::square(1)).unwrap();
        assert_eq!(isotropy_type(&tg, &origin()).unwrap().0, GroupTag::Abelian(2));
        let one = ARChart::interval(e("x*(1-x)"), e("3/4 + alpha"), Window::interval(int(0), int(1))).unwrap();
        assert_eq!(isotropy_type(&one, &[int(0)]).unwrap().0, GroupTag::Abelian(1));
        assert!(matches!(
            isotropy_type(&tg, &[int(0), int(1)]),
            Err(LimitError::NotSingular)
        ));
    }

    #[test]
    fn two_dimensional_freezes() {
        let g = ARChart::planar(e("x"), Window::square(1)).unwrap().with_h(e("h0"));
        let p = frame_operator(&g, &Expr::one()).unwrap();
        let l = limit_at(&g, &p, &origin()).unwrap();
        assert_eq!(l.to_string(), "Z1^2 + Z2^2 - h0 - 1");
        assert_eq!(l.group, GroupTag::Affine);
        let t = ARChart::planar(e("y - x^2"), Window::square(1))
            .unwrap()
            .with_h(e("h0"));
        let pt = frame_operator(&t, &Expr::one()).unwrap();
        let lt = limit_at(&t, &pt, &origin()).unwrap();
        assert_eq!(lt.to_string(), "Z1^2 + Z2^2 - h0");
        assert_eq!(lt.group, GroupTag::Abelian(2));
    }

    #[test]
    fn freeze_constant_and_normalization() {
        let c = |f: &str, h: &str| {
            let ch = ARChart::planar(e(f), Window::square(1)).unwrap().with_h(e(h));
            general_freeze_constant(&ch, &origin()).unwrap()
        };
        assert_eq!(c("x", "3"), Expr::int(-4));
        assert_eq!(c("2*x", "0"), Expr::int(-4));
        assert_eq!(c("y - x^2", "5"), Expr::int(-5));
        let ch = ARChart::planar(e("2*x"), Window::square(1)).unwrap();
        let p = frame_operator(&ch, &Expr::one()).unwrap();
        let raw = limit_at(&ch, &p, &origin()).unwrap();
        assert_eq!(raw.bracket, Some(Expr::int(4)));
        assert_eq!(raw.constant(), Expr::int(-4));
        let n = raw.normalized().unwrap();
        assert_eq!(n.to_string(), "Z1^2 + Z2^2 - 1");
    }

    #[test]
    fn one_dimensional_family() {
        let ch = ARChart::interval(e("x*(1-x)"), e("3/4 + alpha"), Window::interval(int(0), int(1))).unwrap();
        let p = frame_operator(&ch, &e("3/2")).unwrap();
        let l0 = limit_at(&ch, &p, &[int(0)]).unwrap();
        assert_eq!(l0.to_string(), "Z^2 + 2*Z - alpha");
        let l1 = limit_at(&ch, &p, &[int(1)]).unwrap();
        assert_eq!(l1.to_string(), "Z^2 - 2*Z - alpha");
    }
}
