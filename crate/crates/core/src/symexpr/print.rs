use std::fmt;

use num_traits::Signed;

use super::expr::{Expr, Extra};
use super::poly::{fmt_rational, write_term, SymPoly};

fn base_factor(b: &SymPoly) -> String {
    let s = b.to_string();
    let single = b.symbols().len() == 1 && *b == SymPoly::var(&s);
    if single {
        s
    } else {
        format!("({s})")
    }
}

fn extra_factors(e: &Extra) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(a) = e.exp_arg() {
        out.push(format!("exp({a})"));
    }
    for (b, r) in e.roots() {
        let base = match b.as_constant() {
            Some(c) if c.is_integer() && c.is_positive() => fmt_rational(&c),
            _ => base_factor(b),
        };
        out.push(format!("{base}^({})", fmt_rational(r)));
    }
    for b in e.abs_bases() {
        out.push(format!("abs({b})"));
    }
    out
}

struct Num<'a>(&'a Expr);

impl fmt::Display for Num<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, p) in self.0.numerator_parts() {
            let extra = extra_factors(e);
            let mut terms: Vec<_> = p.terms().collect();
            terms.sort_by(|a, b| a.0.print_cmp(b.0));
            for (m, c) in terms {
                if first {
                    if c.is_negative() {
                        write!(f, "-")?;
                    }
                    first = false;
                } else if c.is_negative() {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
                write_term(f, &c.abs(), m, &extra)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den: Vec<String> = self
            .denominator_atoms()
            .map(|(a, k)| {
                let b = base_factor(a);
                if k == 1 {
                    b
                } else {
                    format!("{b}^{k}")
                }
            })
            .collect();
        if den.is_empty() {
            return Num(self).fmt(f);
        }
        let n_terms: usize = self.numerator_parts().map(|(_, p)| p.len()).sum();
        if n_terms > 1 {
            write!(f, "({})", Num(self))?;
        } else {
            write!(f, "{}", Num(self))?;
        }
        // one division per atom, so parsing rebuilds the same atoms
        for d in &den {
            write!(f, "/{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    #[test]
    fn canonical_strings() {
        let s = |t: &str| parse(t).unwrap().to_string();
        assert_eq!(s("x*x - 2*x + 1"), "x^2 - 2*x + 1");
        assert_eq!(s("1/x^2"), "1/x^2");
        assert_eq!(s("(1 - x)/(y - x^2)"), "(x - 1)/(x^2 - y)");
        assert_eq!(s("sqrt(2)*x"), "x*2^(1/2)");
        assert_eq!(s("x^(3/2)"), "x*x^(1/2)");
        assert_eq!(s("exp(2*y)*x"), "x*exp(2*y)");
        assert_eq!(s("abs(x - y)"), "abs(x - y)");
    }

    #[test]
    fn round_trip() {
        for t in [
            "x^2*(1 - x)^(1/2) + 3/4",
            "(x + y)/(x*(y - x^2)^2)",
            "exp(x^2 - y)*abs(y) - 7",
            "-1/2*xi^4 + a*xi^2 - 1e-3",
        ] {
            let e = parse(t).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{t} -> {e}");
        }
    }
}
