use std::fmt;

use num_traits::{One, Signed, Zero};

use super::upoly::{Root, RootCounter, UPoly};
use super::{Evidence, InvertError, Status, Verdict};
use crate::limits::{GroupTag, LimitOperator};
use crate::symexpr::poly::{fmt_rational, to_f64};
use crate::symexpr::{Rational, SymMono, SymPoly};

/// Fourier symbol `p(i xi)` of an abelian limit operator, split into real
/// and imaginary parts, with the expanded squared modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolPoly {
    pub vars: Vec<String>,
    pub re: SymPoly,
    pub im: SymPoly,
    pub modulus_sq: SymPoly,
}

pub fn symbol_vars(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["xi".into()]
    } else {
        (1..=n).map(|i| format!("xi{i}")).collect()
    }
}

/// Substitutes `Z_j -> i xi_j`.
pub fn fourier_symbol(op: &LimitOperator) -> Result<SymbolPoly, InvertError> {
    let GroupTag::Abelian(n) = op.group else {
        return Err(InvertError::NotAbelian);
    };
    let vars = symbol_vars(n as usize);
    let mut re = SymPoly::zero();
    let mut im = SymPoly::zero();
    for (w, c) in &op.terms {
        let c = c
            .as_poly()
            .ok_or_else(|| InvertError::NonPolynomialCoefficient(c.to_string()))?;
        let mut mono = SymMono::one();
        for (j, &k) in w.multi_index(n as usize).iter().enumerate() {
            if k > 0 {
                mono = mono.mul(&SymMono::var(&vars[j], k));
            }
        }
        let t = c.mul_mono(&mono, &Rational::one());
        match w.len() % 4 {
            0 => re = re.add(&t),
            1 => im = im.add(&t),
            2 => re = re.sub(&t),
            _ => im = im.sub(&t),
        }
    }
    let modulus_sq = re.mul(&re).add(&im.mul(&im));
    Ok(SymbolPoly {
        vars,
        re,
        im,
        modulus_sq,
    })
}

impl SymbolPoly {
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// `|p(i xi)|` at a point.
    pub fn modulus_at(&self, xi: &[f64]) -> f64 {
        let look = |name: &str| self.vars.iter().position(|v| v == name).map(|i| xi[i]);
        let re = self.re.eval_f64(&look).unwrap_or(f64::NAN);
        let im = self.im.eval_f64(&look).unwrap_or(f64::NAN);
        re.hypot(im)
    }

    /// `(xi, |p(i xi)|^2)` samples along the first axis.
    pub fn samples(&self, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(2);
        (0..n)
            .map(|k| {
                let t = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                let mut xi = vec![0.0; self.dim()];
                xi[0] = t;
                (t, self.modulus_at(&xi).powi(2))
            })
            .collect()
    }

    /// `G` with `|p|^2 = G(xi1^2 + xi2^2)`, verified by exact expansion.
    pub fn radial_profile(&self) -> Option<UPoly> {
        if self.dim() != 2 {
            return None;
        }
        let (a, b) = (&self.vars[0], &self.vars[1]);
        let on_axis = self.modulus_sq.substitute(b, &SymPoly::zero());
        let mut coeffs = Vec::new();
        for (m, c) in on_axis.terms() {
            if m.iter().any(|(v, _)| v != a) {
                return None;
            }
            let e = m.exponent(a);
            if e % 2 == 1 {
                return None;
            }
            let k = (e / 2) as usize;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, Rational::zero());
            }
            coeffs[k] = c.clone();
        }
        let g = UPoly::new(coeffs);
        let t = SymPoly::var(a).pow(2).add(&SymPoly::var(b).pow(2));
        let mut rebuilt = SymPoly::zero();
        for c in g.coeffs().iter().rev() {
            rebuilt = rebuilt.mul(&t).add(&SymPoly::constant(c.clone()));
        }
        (rebuilt == self.modulus_sq).then_some(g)
    }
}

impl fmt::Display for SymbolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.modulus_sq)
    }
}

/// Minimum of a polynomial that is non-negative on the search domain.
#[derive(Clone, Debug)]
pub struct PolyMin {
    pub value: f64,
    pub exact: Option<Rational>,
    pub at: f64,
    pub at_exact: Option<Rational>,
    pub vanishes: bool,
}

fn fine() -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(10u32).pow(40))
}

fn evaluate_candidate(q: &UPoly, rc: &RootCounter, r: &Root) -> (Rational, Option<Rational>, Rational) {
    let r = rc.refine(r, &fine());
    match &r {
        Root::Exact(x) => {
            let v = q.eval(x);
            (v.clone(), Some(v), x.clone())
        }
        Root::Interval(..) => {
            let x = r.midpoint();
            (q.eval(&x), None, x)
        }
    }
}

/// Minimizes `q` over the reals, or over `[0, inf)` when `half_line`.
/// `q` must be bounded below there (even degree, positive leading
/// coefficient, or constant).
pub fn minimize(q: &UPoly, half_line: bool) -> Result<PolyMin, InvertError> {
    if q.degree() == 0 {
        let c = q.coeffs().first().cloned().unwrap_or_else(Rational::zero);
        return Ok(PolyMin {
            value: to_f64(&c),
            vanishes: c.is_zero(),
            exact: Some(c),
            at: 0.0,
            at_exact: Some(Rational::zero()),
        });
    }
    if !q.leading().is_positive() || (!half_line && q.degree() % 2 == 1) {
        return Err(InvertError::Unbounded);
    }
    let zero = Rational::zero();
    let rc = RootCounter::new(q);
    let roots: Vec<Root> = if half_line {
        let b = q.root_bound();
        let mut v = Vec::new();
        if q.eval(&zero).is_zero() {
            v.push(Root::Exact(zero.clone()));
        }
        v.extend(rc.isolate_in(&zero, &b));
        v
    } else {
        rc.isolate_all()
    };
    if let Some(r) = roots.first() {
        let r = rc.refine(r, &fine());
        let (at, at_exact) = match &r {
            Root::Exact(x) => (to_f64(x), Some(x.clone())),
            Root::Interval(..) => (r.approx(), None),
        };
        return Ok(PolyMin {
            value: 0.0,
            exact: Some(zero),
            at,
            at_exact,
            vanishes: true,
        });
    }
    let dq = q.derivative();
    let drc = RootCounter::new(&dq);
    let mut candidates: Vec<Root> = if half_line {
        let b = dq.root_bound().max(Rational::one());
        let mut v = vec![Root::Exact(zero.clone())];
        v.extend(drc.isolate_in(&zero, &b));
        v
    } else {
        drc.isolate_all()
    };
    if candidates.is_empty() {
        candidates.push(Root::Exact(zero));
    }
    let mut best: Option<(Rational, Option<Rational>, Rational)> = None;
    for c in &candidates {
        let cand = evaluate_candidate(q, &drc, c);
        if best.as_ref().is_none_or(|b| cand.0 < b.0) {
            best = Some(cand);
        }
    }
    let (v, exact, x) = best.expect("at least one candidate");
    Ok(PolyMin {
        value: to_f64(&v),
        at: to_f64(&x),
        at_exact: exact.as_ref().map(|_| x.clone()),
        exact,
        vanishes: false,
    })
}

/// Decides left-invertibility from the symbol infimum.
pub fn decide_abelian(sym: &SymbolPoly) -> Verdict {
    let extra: Vec<String> = sym
        .modulus_sq
        .symbols()
        .into_iter()
        .filter(|s| !sym.vars.contains(s))
        .collect();
    if !extra.is_empty() {
        return Verdict::inconclusive(format!("symbol depends on unbound parameters: {}", extra.join(", ")));
    }
    let (min, radial) = match sym.dim() {
        1 => {
            let q = UPoly::from_sympoly(&sym.modulus_sq, &sym.vars[0]).expect("checked symbols");
            (minimize(&q, false), false)
        }
        2 => match sym.radial_profile() {
            Some(g) => (minimize(&g, true), true),
            None => {
                return Verdict::inconclusive(
                    "two-dimensional symbol is not radial; certified bivariate minimization is not supported",
                )
            }
        },
        n => return Verdict::inconclusive(format!("symbols in {n} variables are not supported")),
    };
    let min = match min {
        Ok(m) => m,
        Err(e) => return Verdict::inconclusive(e.to_string()),
    };
    let point = |t: f64| -> Vec<f64> {
        if radial {
            vec![t.max(0.0).sqrt(), 0.0]
        } else {
            vec![t]
        }
    };
    let exact_point = |t: &Option<Rational>| -> Option<Vec<String>> {
        let t = t.as_ref()?;
        if radial {
            if t.is_zero() {
                return Some(vec!["0".into(), "0".into()]);
            }
            let n = crate::symexpr::poly::exact_nth_root(t.numer(), 2)?;
            let d = crate::symexpr::poly::exact_nth_root(t.denom(), 2)?;
            Some(vec![fmt_rational(&Rational::new(n, d)), "0".into()])
        } else {
            Some(vec![fmt_rational(t)])
        }
    };
    let xi = point(min.at);
    if min.vanishes {
        let modulus = sym.modulus_at(&xi);
        Verdict {
            status: Status::NotLeftInvertible,
            evidence: Evidence::Witness {
                xi_exact: exact_point(&min.at_exact),
                symbol_modulus: modulus,
                xi,
            },
        }
    } else {
        Verdict {
            status: Status::LeftInvertible,
            evidence: Evidence::SymbolInfimum {
                infimum: min.value,
                infimum_exact: min.exact.as_ref().map(fmt_rational),
                minimizer_exact: exact_point(&min.at_exact),
                minimizer: xi,
                constant: min.value.sqrt(),
            },
        }
    }
}

/// Tangency limit operators `Z1^2 + Z2^2 - h0` on the abelian group.
pub fn decide_tangency(op: &LimitOperator) -> Result<Verdict, InvertError> {
    if op.group != GroupTag::Abelian(2) {
        return Err(InvertError::NotAbelian);
    }
    Ok(decide_abelian(&fourier_symbol(op)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{parse, poly::int, Expr};

    fn one_dim(alpha: &str) -> LimitOperator {
        LimitOperator::abelian(
            1,
            [
                (vec![2], Expr::one()),
                (vec![1], Expr::int(2)),
                (vec![0], -parse(alpha).unwrap()),
            ],
        )
    }

    #[test]
    fn symbol_of_the_one_dimensional_family() {
        let s = fourier_symbol(&one_dim("alpha")).unwrap();
        let expect = parse("(xi^2 + alpha)^2 + 4*xi^2").unwrap().as_poly().unwrap();
        assert_eq!(s.modulus_sq, expect);
        let t = LimitOperator::abelian(1, [(vec![2], Expr::one()), (vec![0], Expr::int(-1))]);
        assert_eq!(
            fourier_symbol(&t).unwrap().modulus_sq,
            parse("(xi^2+1)^2").unwrap().as_poly().unwrap()
        );
    }

    #[test]
    fn infima() {
        for (alpha, inf, at) in [("1", 1.0, 0.0), ("1/2", 0.25, 0.0), ("-3", 8.0, 1.0)] {
            let v = decide_abelian(&fourier_symbol(&one_dim(alpha)).unwrap());
            assert_eq!(v.status, Status::LeftInvertible);
            let Evidence::SymbolInfimum {
                infimum,
                minimizer,
                infimum_exact,
                ..
            } = &v.evidence
            else {
                panic!("{v:?}")
            };
            assert_eq!(*infimum, inf);
            assert!(infimum_exact.is_some());
            assert!((minimizer[0].abs() - at).abs() < 1e-12);
        }
        let v = decide_abelian(&fourier_symbol(&one_dim("0")).unwrap());
        assert_eq!(v.status, Status::NotLeftInvertible);
        let Evidence::Witness { xi, symbol_modulus, .. } = &v.evidence else {
            panic!()
        };
        assert_eq!(xi[0], 0.0);
        assert!(*symbol_modulus <= 1e-10);
        let sym = decide_abelian(&fourier_symbol(&one_dim("alpha")).unwrap());
        assert_eq!(sym.status, Status::Inconclusive);
    }

    #[test]
    fn irrational_witness() {
        // Z^2 + 2: p(i xi) = 2 - xi^2 vanishes at sqrt 2
        let op = LimitOperator::abelian(1, [(vec![2], Expr::one()), (vec![0], Expr::int(2))]);
        let v = decide_abelian(&fourier_symbol(&op).unwrap());
        let Evidence::Witness {
            xi,
            symbol_modulus,
            xi_exact,
        } = &v.evidence
        else {
            panic!()
        };
        assert!((xi[0].abs() - 2f64.sqrt()).abs() < 1e-14);
        assert!(*symbol_modulus < 1e-10);
        assert!(xi_exact.is_none());
    }

    #[test]
    fn tangency() {
        let op = |h0: i64| {
            LimitOperator::abelian(
                2,
                [
                    (vec![2, 0], Expr::one()),
                    (vec![0, 2], Expr::one()),
                    (vec![0, 0], Expr::int(-h0)),
                ],
            )
        };
        let v = decide_tangency(&op(1)).unwrap();
        assert_eq!(v.status, Status::LeftInvertible);
        let v0 = decide_tangency(&op(0)).unwrap();
        assert_eq!(v0.status, Status::NotLeftInvertible);
        let vm = decide_tangency(&op(-1)).unwrap();
        let Evidence::Witness { xi, .. } = &vm.evidence else {
            panic!()
        };
        assert!((xi[0].hypot(xi[1]) - 1.0).abs() < 1e-12);
        let mixed = LimitOperator::abelian(2, [(vec![2, 0], Expr::one()), (vec![0, 2], Expr::int(2))]);
        assert_eq!(decide_tangency(&mixed).unwrap().status, Status::Inconclusive);
        assert_eq!(
            minimize(&UPoly::new(vec![int(1), int(-2), int(1)]), true).unwrap().at,
            1.0
        );
    }
}
