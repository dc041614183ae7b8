use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expr::Expr;
use super::poly::{to_f64, SymPoly};
use super::ExprError;

/// Numeric bindings for symbols.
pub type Env = BTreeMap<String, f64>;

pub fn env(pairs: &[(&str, f64)]) -> Env {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl Expr {
    pub fn eval(&self, env: &Env) -> Result<f64, ExprError> {
        let lookup = |k: &str| env.get(k).copied();
        let ev = |p: &SymPoly| p.eval_f64(&lookup).map_err(ExprError::Unbound);
        let mut den = 1.0;
        for (a, k) in self.denominator_atoms() {
            let v = ev(a)?;
            if v == 0.0 {
                return Err(ExprError::Pole { factor: a.to_string() });
            }
            den *= v.powi(k as i32);
        }
        let mut acc = 0.0;
        for (e, p) in self.numerator_parts() {
            let mut t = ev(p)?;
            if let Some(a) = e.exp_arg() {
                t *= ev(a)?.exp();
            }
            for (b, r) in e.roots() {
                let bv = ev(b)?;
                if bv < 0.0 {
                    return Err(ExprError::Domain(format!(
                        "fractional power of negative value ({b} = {bv})"
                    )));
                }
                t *= bv.powf(to_f64(r));
            }
            for c in e.abs_bases() {
                t *= ev(c)?.abs();
            }
            acc += t;
        }
        Ok(acc / den)
    }

    /// Compiles to a fast evaluator over the given ordered symbol list.
    pub fn compile(&self, vars: &[&str]) -> Result<Compiled, ExprError> {
        let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let cp = |p: &SymPoly| -> Result<CPoly, ExprError> {
            let mut terms = Vec::with_capacity(p.len());
            for (m, c) in p.terms() {
                let mut powers = Vec::new();
                for (k, e) in m.iter() {
                    let i = *index.get(k.as_str()).ok_or_else(|| ExprError::Unbound(k.clone()))?;
                    powers.push((i, *e as i32));
                }
                terms.push((to_f64(c), powers));
            }
            Ok(CPoly { terms })
        };
        let mut num = Vec::new();
        for (e, p) in self.numerator_parts() {
            let exp = e.exp_arg().map(cp).transpose()?;
            let roots = e
                .roots()
                .map(|(b, r)| Ok((cp(b)?, to_f64(r))))
                .collect::<Result<Vec<_>, ExprError>>()?;
            let abs = e.abs_bases().map(cp).collect::<Result<Vec<_>, _>>()?;
            num.push(CTerm {
                poly: cp(p)?,
                exp,
                roots,
                abs,
            });
        }
        let den = self
            .denominator_atoms()
            .map(|(a, k)| Ok((cp(a)?, k as i32)))
            .collect::<Result<Vec<_>, ExprError>>()?;
        Ok(Compiled { num, den })
    }
}

#[derive(Clone, Debug)]
struct CPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CPoly {
    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, pw)| pw.iter().fold(*c, |acc, (i, e)| acc * x[*i].powi(*e)))
            .sum()
    }
}

#[derive(Clone, Debug)]
struct CTerm {
    poly: CPoly,
    exp: Option<CPoly>,
    roots: Vec<(CPoly, f64)>,
    abs: Vec<CPoly>,
}

/// Floating-point evaluator produced by [`Expr::compile`]. Poles and
/// domain violations evaluate to non-finite values.
#[derive(Clone, Debug)]
pub struct Compiled {
    num: Vec<CTerm>,
    den: Vec<(CPoly, i32)>,
}

impl Compiled {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.num {
            let mut v = t.poly.eval(x);
            if let Some(a) = &t.exp {
                v *= a.eval(x).exp();
            }
            for (b, r) in &t.roots {
                let bv = b.eval(x);
                if bv < 0.0 {
                    return f64::NAN;
                }
                v *= bv.powf(*r);
            }
            for c in &t.abs {
                v *= c.eval(x).abs();
            }
            acc += v;
        }
        let den: f64 = self.den.iter().map(|(a, k)| a.eval(x).powi(*k)).product();
        acc / den
    }
}

/// Outcome of [`equals`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equality {
    /// Identical normal forms.
    Equal,
    /// Normal forms differ but values agree on at least 32 random points.
    ProbablyEqual,
    NotEqual,
}

impl Equality {
    pub fn holds(self) -> bool {
        !matches!(self, Equality::NotEqual)
    }
}

const SAMPLE_POINTS: usize = 32;
const SAMPLE_RTOL: f64 = 1e-10;

pub fn equals(a: &Expr, b: &Expr) -> Equality {
    if a == b || (a - b).is_zero() {
        return Equality::Equal;
    }
    let names: BTreeSet<String> = a.symbols().union(&b.symbols()).cloned().collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let (Ok(ca), Ok(cb)) = (a.compile(&names), b.compile(&names)) else {
        return Equality::NotEqual;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e9a1);
    let mut agreed = 0;
    let mut point = vec![0.0; names.len()];
    for _ in 0..SAMPLE_POINTS * 8 {
        for v in point.iter_mut() {
            *v = rng.random_range(0.1..1.9);
        }
        let (va, vb) = (ca.eval(&point), cb.eval(&point));
        if !va.is_finite() || !vb.is_finite() {
            continue;
        }
        let scale = 1f64.max(va.abs()).max(vb.abs());
        if (va - vb).abs() > SAMPLE_RTOL * scale {
            return Equality::NotEqual;
        }
        agreed += 1;
        if agreed >= SAMPLE_POINTS {
            return Equality::ProbablyEqual;
        }
    }
    Equality::NotEqual
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn evaluation_and_poles() {
        let e = parse("x*(1-x)").unwrap();
        assert_eq!(e.eval(&env(&[("x", 0.0)])).unwrap(), 0.0);
        let inv = parse("1/(y - x^2)").unwrap();
        assert!(matches!(
            inv.eval(&env(&[("x", 0.0), ("y", 0.0)])),
            Err(ExprError::Pole { .. })
        ));
        let sym = parse("(xi^2 + a)^2 + 4*xi^2").unwrap();
        assert_eq!(sym.eval(&env(&[("xi", 1.0), ("a", -3.0)])).unwrap(), 8.0);
        assert!(matches!(e.eval(&Env::new()), Err(ExprError::Unbound(_))));
    }

    #[test]
    fn equality_levels() {
        let p = |s| parse(s).unwrap();
        assert_eq!(equals(&p("x+x"), &p("2*x")), Equality::Equal);
        assert_eq!(equals(&p("(1-2*x)^2"), &p("1-4*x+4*x^2")), Equality::Equal);
        assert_eq!(equals(&p("x"), &p("y")), Equality::NotEqual);
        // (x^2 - 1)/(x^2 - 2x + 1) does not cancel structurally against (x+1)/(x-1)
        // because the denominator atom is the unfactored square
        let a = p("(x^2 - 1)/(x^2 - 2*x + 1)");
        let b = p("(x + 1)/(x - 1)");
        assert!(equals(&a, &b).holds());
    }

    #[test]
    fn compiled_matches_interpreted() {
        let e = parse("x^(1/2)*exp(y) + abs(x - y)/(1 + x^2)").unwrap();
        let c = e.compile(&["x", "y"]).unwrap();
        let v = e.eval(&env(&[("x", 0.7), ("y", -0.3)])).unwrap();
        assert!((c.eval(&[0.7, -0.3]) - v).abs() < 1e-14);
    }
}
