use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;

use super::expr::Expr;
use super::poly::Rational;
use super::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(text: &str) -> Result<Lexer, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut mantissa = String::new();
            let mut frac_digits = 0u32;
            let mut seen_dot = false;
            while i < chars.len() && (chars[i].is_ascii_digit() || (chars[i] == '.' && !seen_dot)) {
                if chars[i] == '.' {
                    seen_dot = true;
                } else {
                    mantissa.push(chars[i]);
                    if seen_dot {
                        frac_digits += 1;
                    }
                }
                i += 1;
            }
            let mut exp10: i64 = 0;
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                let mut sign = 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    if chars[j] == '-' {
                        sign = -1;
                    }
                    j += 1;
                }
                let digits_start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j > digits_start {
                    let s: String = chars[digits_start..j].iter().collect();
                    exp10 = sign
                        * s.parse::<i64>().map_err(|_| ExprError::Syntax {
                            pos: start,
                            msg: "exponent too large".into(),
                        })?;
                    i = j;
                }
            }
            let m: BigInt = mantissa.parse().map_err(|_| ExprError::Syntax {
                pos: start,
                msg: "malformed number".into(),
            })?;
            let shift = exp10 - frac_digits as i64;
            if shift.abs() > 400 {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: "number exponent out of range".into(),
                });
            }
            let ten = BigInt::from(10);
            let p = num_traits::pow(ten, shift.unsigned_abs() as usize);
            let v = if shift >= 0 {
                Rational::from_integer(m * p)
            } else {
                Rational::new(m, p)
            };
            toks.push((Tok::Num(v), start));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        if c == '*' && chars.get(i + 1) == Some(&'*') {
            toks.push((Tok::Op('^'), start));
            i += 2;
            continue;
        }
        if "+-*/^(),".contains(c) {
            toks.push((Tok::Op(c), start));
            i += 1;
            continue;
        }
        return Err(ExprError::Syntax {
            pos: start,
            msg: format!("unexpected character '{c}'"),
        });
    }
    toks.push((Tok::End, chars.len()));
    Ok(Lexer { toks })
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    allowed: Option<&'a BTreeSet<String>>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!("expected '{op}'")))
        }
    }

    fn syntax(&self, msg: String) -> ExprError {
        ExprError::Syntax { pos: self.pos(), msg }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = acc.div(&rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let e = self.unary()?;
        let Some(r) = e.as_constant() else {
            return Err(ExprError::Syntax {
                pos,
                msg: "exponent must be a rational constant".into(),
            });
        };
        base.pow_rational(&r)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::constant(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Op(',') {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    return self.call(&name, args, pos);
                }
                if matches!(name.as_str(), "exp" | "abs" | "sqrt") {
                    return Err(ExprError::Syntax {
                        pos,
                        msg: format!("'{name}' must be called with parentheses"),
                    });
                }
                if let Some(allowed) = self.allowed {
                    if !allowed.contains(&name) {
                        return Err(ExprError::UnknownIdentifier { name, pos });
                    }
                }
                Ok(Expr::sym(&name))
            }
            Tok::End => Err(ExprError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            Tok::Op(c) => Err(ExprError::Syntax {
                pos,
                msg: format!("unexpected '{c}'"),
            }),
        }
    }

    fn call(&mut self, name: &str, args: Vec<Expr>, pos: usize) -> Result<Expr, ExprError> {
        let one_arg = |args: Vec<Expr>| -> Result<Expr, ExprError> {
            let n = args.len();
            let mut it = args.into_iter();
            match (it.next(), n) {
                (Some(a), 1) => Ok(a),
                _ => Err(ExprError::Syntax {
                    pos,
                    msg: format!("{name} takes one argument, got {n}"),
                }),
            }
        };
        match name {
            "exp" => one_arg(args)?.exp(),
            "abs" => one_arg(args)?.abs(),
            "sqrt" => one_arg(args)?.pow_rational(&Rational::new(BigInt::one(), BigInt::from(2))),
            _ => Err(ExprError::UnknownFunction {
                name: name.to_string(),
                pos,
            }),
        }
    }
}

fn run(text: &str, allowed: Option<&BTreeSet<String>>) -> Result<Expr, ExprError> {
    let lexer = lex(text)?;
    let mut p = Parser {
        toks: lexer.toks,
        at: 0,
        allowed,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.syntax("trailing input".into()));
    }
    Ok(e)
}

/// Parses an expression; every identifier is treated as a symbol.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    run(text, None)
}

/// Parses an expression whose identifiers must come from `names`.
pub fn parse_with(text: &str, names: &[&str]) -> Result<Expr, ExprError> {
    let allowed: BTreeSet<String> = names.iter().map(|s| s.to_string()).collect();
    run(text, Some(&allowed))
}

/// Parses a rational literal such as `3`, `-1/2`, `0.25` or `1e-3`.
pub fn parse_rational(text: &str) -> Result<Rational, ExprError> {
    let e = parse_with(text, &[])?;
    e.as_constant().ok_or_else(|| ExprError::Syntax {
        pos: 0,
        msg: format!("'{text}' is not a rational constant"),
    })
}

#[cfg(test)]
mod tests {
    use super::super::poly::{int, rat};
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("2.5E1").unwrap(), int(25));
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("-x^2").unwrap(), -Expr::sym("x").powi(2).unwrap());
        assert_eq!(parse("2^-1").unwrap(), Expr::rational(1, 2));
        assert_eq!(parse("1/2*x").unwrap(), Expr::sym("x").scale(&rat(1, 2)));
        assert_eq!(parse("x**3").unwrap(), parse("x^3").unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        match parse("x + phi(x, y)") {
            Err(ExprError::UnknownFunction { name, pos }) => {
                assert_eq!(name, "phi");
                assert_eq!(pos, 4);
            }
            other => panic!("{other:?}"),
        }
        match parse_with("x + z", &["x", "y"]) {
            Err(ExprError::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "z");
                assert_eq!(pos, 4);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x^y"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("(x"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x $ 1"), Err(ExprError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("1/(x - x)"), Err(ExprError::DivisionByZero)));
    }

    #[test]
    fn unicode_identifiers() {
        let e = parse("ξ^2 + α").unwrap();
        assert!(e.depends_on("ξ") && e.depends_on("α"));
    }
}
