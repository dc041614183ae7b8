use std::collections::BTreeMap;

use super::expr::Expr;
use super::poly::{int, Rational, SymPoly};
use super::ExprError;

impl Expr {
    /// Exact partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        // logarithmic derivative of the denominator, -sum k A'/A
        let mut dlog_den = Expr::zero();
        for (a, k) in self.denominator_atoms() {
            let da = a.derivative(var);
            if !da.is_zero() {
                let t = Expr::poly_ratio(da, a).expect("atoms are non-zero");
                dlog_den = dlog_den - t.scale(&int(k as i64));
            }
        }
        let den_inv = self.den_only();
        let mut total = Expr::zero();
        for (e, p) in self.numerator_parts() {
            let mut dlog = dlog_den.clone();
            if let Some(a) = e.exp_arg() {
                dlog = dlog + Expr::from_poly(a.derivative(var));
            }
            for (b, r) in e.roots() {
                let db = b.derivative(var);
                if !db.is_zero() {
                    let t = Expr::poly_ratio(db, b).expect("root bases are non-zero");
                    dlog = dlog + t.scale(r);
                }
            }
            for c in e.abs_bases() {
                let dc = c.derivative(var);
                if !dc.is_zero() {
                    dlog = dlog + Expr::poly_ratio(dc, c).expect("abs bases are non-zero");
                }
            }
            let dp = Expr::from_poly(p.derivative(var));
            let inner = dp + Expr::from_poly(p.clone()) * dlog;
            total = total + inner * Expr::from_extra(e.clone()) * &den_inv;
        }
        total
    }

    /// `1 / prod A^k` of this expression.
    fn den_only(&self) -> Expr {
        let mut out = Expr::one();
        for (a, k) in self.denominator_atoms() {
            out = Expr::poly_ratio(SymPoly::one(), &a.pow(k)).expect("atoms are non-zero") * out;
        }
        out
    }

    /// Replaces symbol `var` by `by`. A denominator that becomes zero is
    /// reported as a pole.
    pub fn substitute(&self, var: &str, by: &Expr) -> Result<Expr, ExprError> {
        if !self.depends_on(var) {
            return Ok(self.clone());
        }
        let by_poly = by.as_poly();
        let sub_poly = |p: &SymPoly| -> Expr {
            if let Some(bp) = &by_poly {
                return Expr::from_poly(p.substitute(var, bp));
            }
            let coeffs = p.coefficients_in(var);
            let mut acc = Expr::zero();
            for c in coeffs.iter().rev() {
                acc = acc * by + Expr::from_poly(c.clone());
            }
            acc
        };
        let mut out = Expr::zero();
        for (e, p) in self.numerator_parts() {
            let mut t = sub_poly(p);
            if let Some(a) = &e.exp {
                t = t * sub_poly(a).exp()?;
            }
            for (b, r) in &e.roots {
                t = t * sub_poly(b).pow_rational(r)?;
            }
            for c in &e.abs {
                t = t * sub_poly(c).abs()?;
            }
            out = out + t;
        }
        for (a, k) in self.denominator_atoms() {
            let d = sub_poly(a);
            if d.is_zero() {
                return Err(ExprError::Pole { factor: a.to_string() });
            }
            out = out.div(&d.powi(k as i64)?)?;
        }
        Ok(out)
    }

    pub fn substitute_all(&self, values: &BTreeMap<String, Expr>) -> Result<Expr, ExprError> {
        let mut out = self.clone();
        for (k, v) in values {
            out = out.substitute(k, v)?;
        }
        Ok(out)
    }

    /// Exact value at a rational point (all symbols must be bound).
    pub fn eval_exact(&self, values: &BTreeMap<String, Rational>) -> Result<Rational, ExprError> {
        let subs: BTreeMap<String, Expr> = values
            .iter()
            .map(|(k, v)| (k.clone(), Expr::constant(v.clone())))
            .collect();
        let v = self.substitute_all(&subs)?;
        if let Some(c) = v.as_constant() {
            return Ok(c);
        }
        if let Some(s) = v.symbols().into_iter().next() {
            return Err(ExprError::Unbound(s));
        }
        Err(ExprError::Unsupported(format!("value {v} is irrational")))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn polynomial_rules() {
        assert_eq!(p("x*(1-x)").diff("x"), p("1 - 2*x"));
        assert_eq!(p("y - x^2").diff("x"), p("-2*x"));
        assert_eq!(p("y - x^2").diff("y"), Expr::one());
    }

    #[test]
    fn quotient_and_transcendental_rules() {
        assert_eq!(p("1/x").diff("x"), p("-1/x^2"));
        assert_eq!(p("x*exp(x^2)").diff("x"), p("exp(x^2) + 2*x^2*exp(x^2)"));
        assert_eq!(p("x^(1/2)").diff("x"), p("1/2*x^(-1/2)"));
        assert_eq!(p("abs(x)").diff("x"), p("abs(x)/x"));
    }

    #[test]
    fn substitution_detects_poles() {
        let e = p("1/(y - x^2)");
        assert!(matches!(
            e.substitute("y", &Expr::zero()).unwrap().substitute("x", &Expr::zero()),
            Err(ExprError::Pole { .. })
        ));
        assert_eq!(p("x^2 + y").substitute("x", &p("1/y")).unwrap(), p("1/y^2 + y"));
    }
}
