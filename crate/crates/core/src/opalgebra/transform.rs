use std::sync::Arc;

use super::diffop::{DiffOp, Word};
use super::frame::Frame;
use super::OpError;
use crate::symexpr::{Expr, SymPoly};

/// Polynomial factors whose negative powers count as singular: the
/// symbol factors of the monomial part and the primitive cofactor of each
/// polynomial part of `s`. Transcendental factors are treated as units.
fn singular_factors(s: &Expr) -> Vec<SymPoly> {
    let mut out = Vec::new();
    for (_, p) in s.numerator_parts() {
        let mono = p.monomial_gcd();
        for (v, _) in mono.iter() {
            out.push(SymPoly::var(v));
        }
        let rest = p.div_mono(&mono);
        if rest.as_constant().is_none() {
            let c = rest.content();
            out.push(rest.scale(&c.recip()));
        }
    }
    for (a, _) in s.denominator_atoms() {
        out.push(a.clone());
    }
    out.sort();
    out.dedup();
    out
}

/// True when the normal form of `c` has no denominator factor sharing a
/// polynomial factor with `s`.
pub fn smoothness_check(c: &Expr, s: &Expr) -> bool {
    let factors = singular_factors(s);
    c.denominator_atoms().all(|(a, _)| {
        factors
            .iter()
            .all(|fct| a.exact_div(fct).is_none() && fct.exact_div(a).is_none())
    })
}

/// `s^left * p * s^right`. The exponents may be symbolic as long as their
/// sum is a rational constant.
pub fn conjugate_by_weight(p: &DiffOp, s: &Expr, left: &Expr, right: &Expr) -> Result<DiffOp, OpError> {
    if s.is_zero() {
        return Err(OpError::Unsupported("weight function is identically zero".into()));
    }
    let total = left + right;
    let Some(total) = total.as_constant() else {
        return Err(OpError::Unsupported(format!(
            "weight exponents must sum to a rational constant, got {}",
            left + right
        )));
    };
    let frame = p.frame();
    let n = frame.dim();
    // s^-r Z_i s^r = Z_i + r Z_i(s)/s
    let shifted: Vec<DiffOp> = (0..n)
        .map(|i| -> Result<DiffOp, OpError> {
            let g = DiffOp::generator(frame, i);
            if right.is_zero() {
                return Ok(g);
            }
            let log_der = frame.apply(i, s).div(s)?;
            g.add(&DiffOp::multiplication(frame, right * log_der))
        })
        .collect::<Result<_, _>>()?;
    let mut out = DiffOp::zero(frame);
    for (w, a) in p.terms() {
        let mut acc = DiffOp::identity(frame);
        for &g in w.0.iter().rev() {
            acc = shifted[g as usize].compose(&acc)?;
        }
        out = out.add(&acc.mul_left(a))?;
    }
    if num_traits::Zero::is_zero(&total) {
        return Ok(out);
    }
    let factor = s.pow_rational(&total)?;
    Ok(out.mul_left(&factor))
}

/// Rewrites `p` in `frame` and certifies that every coefficient is smooth
/// across the zero set of `s`.
pub fn to_frame(p: &DiffOp, frame: &Arc<Frame>, s: &Expr) -> Result<DiffOp, OpError> {
    let out = p.express_in(frame)?;
    for (w, c) in out.terms() {
        if !smoothness_check(c, s) {
            return Err(OpError::NotInFrameAlgebra {
                word: w.render(frame.names()),
                coefficient: c.to_string(),
            });
        }
    }
    Ok(out)
}

/// One-dimensional change of variable `x = phi(y)`: coefficients are
/// substituted and `Dx = (1/phi'(y)) Dy`.
pub fn change_variable(p: &DiffOp, new_coord: &str, phi: &Expr) -> Result<DiffOp, OpError> {
    let p = p.to_coordinates();
    let frame = p.frame();
    if frame.dim() != 1 {
        return Err(OpError::Unsupported("change of variable is one-dimensional".into()));
    }
    let old = frame.coords()[0].clone();
    let nf = Arc::new(Frame::coordinates(&[new_coord]));
    let inv = Expr::one().div(&phi.diff(new_coord))?;
    let d = DiffOp::term(&nf, Word(vec![0]), inv);
    let mut out = DiffOp::zero(&nf);
    for (w, a) in p.terms() {
        let mut acc = DiffOp::identity(&nf);
        for _ in 0..w.len() {
            acc = d.compose(&acc)?;
        }
        out = out.add(&acc.mul_left(&a.substitute(&old, phi)?))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalgebra::VectorField;
    use crate::symexpr::parse;

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn smoothness_examples() {
        assert!(smoothness_check(&e("x^2/x"), &e("x")));
        assert!(!smoothness_check(&e("1/x"), &e("x")));
        assert!(smoothness_check(&e("(y-x^2)^2/(y-x^2)"), &e("y-x^2")));
        assert!(smoothness_check(&e("1/(1+x^2)"), &e("x")));
        assert!(!smoothness_check(&e("1/(x^2-1)"), &e("x-1")));
    }

    fn grushin_laplacian(cf: &Arc<Frame>) -> DiffOp {
        DiffOp::from_terms(
            cf,
            [
                (Word(vec![0, 0]), Expr::one()),
                (Word(vec![1, 1]), e("x^2")),
                (Word(vec![0]), e("-1/x")),
            ],
        )
    }

    #[test]
    fn grushin_in_lie_frame() {
        let cf = Arc::new(Frame::coordinates(&["x", "y"]));
        let lap = grushin_laplacian(&cf);
        let fr = Arc::new(
            Frame::new(
                &["Y1", "Y2"],
                vec![
                    VectorField::new(&["x", "y"], vec![e("x"), Expr::zero()]),
                    VectorField::new(&["x", "y"], vec![Expr::zero(), e("x^2")]),
                ],
            )
            .unwrap(),
        );
        let s = e("x");
        let weighted = lap.mul_left(&e("x^2"));
        let r = to_frame(&weighted, &fr, &s).unwrap();
        assert_eq!(r.to_string(), "Y1^2 + Y2^2 - 2*Y1");
        assert!(matches!(
            to_frame(&lap, &fr, &s),
            Err(OpError::NotInFrameAlgebra { .. })
        ));
        let u = e("x^3*y^2 + x^2 - y");
        assert_eq!(r.apply(&u), weighted.apply(&u));
    }

    #[test]
    fn conjugation_round_trip() {
        let cf = Arc::new(Frame::coordinates(&["x"]));
        let t = DiffOp::from_terms(
            &cf,
            [
                (Word(vec![0, 0]), e("x^2")),
                (Word(vec![0]), e("x")),
                (Word::empty(), e("-x^4 - 1 - h")),
            ],
        );
        let c = conjugate_by_weight(&t, &e("x"), &Expr::int(-1), &Expr::int(1)).unwrap();
        let xf = Arc::new(Frame::new(&["X"], vec![VectorField::new(&["x"], vec![e("x")])]).unwrap());
        let r = to_frame(&c, &xf, &e("x")).unwrap();
        assert_eq!(r.to_string(), "X^2 + 2*X - x^4 - h");
        let back = conjugate_by_weight(&c, &e("x"), &Expr::int(1), &Expr::int(-1)).unwrap();
        assert_eq!(back, t);
        assert_eq!(
            conjugate_by_weight(&t, &e("x"), &Expr::zero(), &Expr::zero()).unwrap(),
            t
        );
    }

    #[test]
    fn inversion_of_the_half_line() {
        let cf = Arc::new(Frame::coordinates(&["x"]));
        let xdx2 = DiffOp::from_terms(&cf, [(Word(vec![0, 0]), e("x^2")), (Word(vec![0]), e("x"))]);
        let r = change_variable(&xdx2, "y", &e("1/y")).unwrap();
        assert_eq!(r.to_string(), "y^2*Dy^2 + y*Dy");
    }
}
