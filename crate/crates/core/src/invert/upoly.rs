//! Univariate polynomials over the rationals with Sturm-sequence root
//! counting and isolation.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::symexpr::{poly::to_f64, Rational, SymPoly};

/// Coefficients from the constant term upwards; never has a zero leading
/// coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly(Vec<Rational>);

/// A real root: exact when rational, otherwise an isolating interval
/// `(lo, hi)` containing exactly one root of the square-free part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Root {
    Exact(Rational),
    Interval(Rational, Rational),
}

impl Root {
    pub fn approx(&self) -> f64 {
        match self {
            Root::Exact(r) => to_f64(r),
            Root::Interval(a, b) => to_f64(&((a + b) / Rational::from_integer(2.into()))),
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Root::Exact(r) => Some(r),
            Root::Interval(..) => None,
        }
    }

    /// A rational inside the isolating interval (or the root itself).
    pub fn midpoint(&self) -> Rational {
        match self {
            Root::Exact(r) => r.clone(),
            Root::Interval(a, b) => (a + b) / Rational::from_integer(2.into()),
        }
    }
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

impl UPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn zero() -> Self {
        UPoly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        UPoly::new(vec![c])
    }

    /// Converts a polynomial in at most the one symbol `var`.
    pub fn from_sympoly(p: &SymPoly, var: &str) -> Option<UPoly> {
        if p.symbols().iter().any(|s| s != var) {
            return None;
        }
        let mut c = vec![Rational::zero(); p.degree_in(var) as usize + 1];
        for (m, v) in p.terms() {
            c[m.exponent(var) as usize] += v;
        }
        Some(UPoly::new(c))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn scale(&self, k: &Rational) -> UPoly {
        UPoly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        let n = self.0.len().max(other.0.len());
        let z = Rational::zero();
        UPoly::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) - other.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![Rational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UPoly::new(c)
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut r = self.0.clone();
        let dl = d.leading();
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &dl;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`.
    pub fn squarefree(&self) -> UPoly {
        if self.degree() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone()];
        if self.degree() == 0 {
            return seq;
        }
        seq.push(self.derivative());
        loop {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-Rational::one()));
        }
        seq
    }

    fn sign_at_infinity(&self, positive: bool) -> i32 {
        let l = self.leading();
        let s = if l.is_positive() {
            1
        } else if l.is_negative() {
            -1
        } else {
            0
        };
        if positive || self.degree().is_multiple_of(2) {
            s
        } else {
            -s
        }
    }

    /// Upper bound on the magnitude of every real root.
    pub fn root_bound(&self) -> Rational {
        let l = self.leading().abs();
        let m = self
            .0
            .iter()
            .take(self.0.len().saturating_sub(1))
            .map(|c| c.abs() / &l)
            .fold(Rational::zero(), |a, b| if b > a { b } else { a });
        m + Rational::one()
    }
}

fn variations(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut count = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn sign(q: &Rational) -> i32 {
    match q.cmp(&Rational::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

/// Sturm chain of the square-free part, used for counting and isolation.
pub struct RootCounter {
    sqf: UPoly,
    seq: Vec<UPoly>,
}

impl RootCounter {
    pub fn new(p: &UPoly) -> Self {
        let sqf = p.squarefree();
        let seq = sqf.sturm_sequence();
        RootCounter { sqf, seq }
    }

    fn var_at(&self, x: &Rational) -> usize {
        variations(self.seq.iter().map(|p| sign(&p.eval(x))))
    }

    fn var_inf(&self, positive: bool) -> usize {
        variations(self.seq.iter().map(|p| p.sign_at_infinity(positive)))
    }

    /// Number of distinct real roots.
    pub fn count_all(&self) -> usize {
        if self.sqf.degree() == 0 {
            return 0;
        }
        self.var_inf(false) - self.var_inf(true)
    }

    /// Number of distinct roots in `(a, b]`.
    pub fn count_in(&self, a: &Rational, b: &Rational) -> usize {
        if self.sqf.degree() == 0 || a >= b {
            return 0;
        }
        self.var_at(a).saturating_sub(self.var_at(b))
    }

    /// Isolates every real root in `(a, b]`, sorted.
    pub fn isolate_in(&self, a: &Rational, b: &Rational) -> Vec<Root> {
        let mut out = Vec::new();
        self.isolate_rec(a.clone(), b.clone(), &mut out, 0);
        out.sort_by_key(|x| x.midpoint());
        out
    }

    pub fn isolate_all(&self) -> Vec<Root> {
        if self.sqf.degree() == 0 {
            return Vec::new();
        }
        let b = self.sqf.root_bound();
        self.isolate_in(&-b.clone(), &b)
    }

    fn isolate_rec(&self, a: Rational, b: Rational, out: &mut Vec<Root>, depth: usize) {
        let n = self.count_in(&a, &b);
        if n == 0 {
            return;
        }
        if n == 1 {
            if self.sqf.eval(&b).is_zero() {
                out.push(Root::Exact(b));
            } else {
                out.push(self.tighten(a, b));
            }
            return;
        }
        if depth > 400 {
            return;
        }
        let m = (&a + &b) * half();
        self.isolate_rec(a, m.clone(), out, depth + 1);
        self.isolate_rec(m, b, out, depth + 1);
    }

    /// Detects a rational root inside a one-root interval.
    fn tighten(&self, a: Rational, b: Rational) -> Root {
        let mut a = a;
        let mut b = b;
        let width = Rational::new(BigInt::one(), BigInt::from(10u64).pow(12));
        while &b - &a > width {
            let m = (&a + &b) * half();
            if self.sqf.eval(&m).is_zero() {
                return Root::Exact(m);
            }
            if self.count_in(&a, &m) == 1 {
                b = m;
            } else {
                a = m;
            }
        }
        let cand = simplest_between(&a, &b);
        if self.sqf.eval(&cand).is_zero() {
            return Root::Exact(cand);
        }
        Root::Interval(a, b)
    }

    /// Shrinks an isolating interval to the requested width.
    pub fn refine(&self, root: &Root, width: &Rational) -> Root {
        let Root::Interval(a, b) = root else {
            return root.clone();
        };
        let (mut a, mut b) = (a.clone(), b.clone());
        while &b - &a > *width {
            let m = (&a + &b) * half();
            if self.sqf.eval(&m).is_zero() {
                return Root::Exact(m);
            }
            if self.count_in(&a, &m) >= 1 {
                b = m;
            } else {
                a = m;
            }
        }
        Root::Interval(a, b)
    }
}

/// Rational with the smallest denominator in `[lo, hi]`.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    let zero = Rational::zero();
    if *lo <= zero && zero <= *hi {
        return zero;
    }
    if *hi < zero {
        return -simplest_between(&-hi.clone(), &-lo.clone());
    }
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    let next = &fl + Rational::one();
    if next <= *hi {
        return next;
    }
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::poly::{int, rat};

    fn up(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|v| int(*v)).collect())
    }

    #[test]
    fn counting_and_isolation() {
        // (x - 1)(x + 2)(x^2 - 2)
        let p = up(&[-1, 1]).mul(&up(&[2, 1])).mul(&up(&[-2, 0, 1]));
        let rc = RootCounter::new(&p);
        assert_eq!(rc.count_all(), 4);
        let roots = rc.isolate_all();
        assert_eq!(roots.len(), 4);
        assert_eq!(roots[0], Root::Exact(int(-2)));
        assert!(roots.contains(&Root::Exact(int(1))));
        let irr: Vec<f64> = roots.iter().filter(|r| r.exact().is_none()).map(Root::approx).collect();
        assert_eq!(irr.len(), 2);
        assert!(irr.iter().any(|v| (v - 2f64.sqrt()).abs() < 1e-11));
        assert_eq!(RootCounter::new(&up(&[9, 0, -2, 0, 1]).derivative()).count_all(), 3);
        assert_eq!(RootCounter::new(&up(&[1, 0, 1])).count_all(), 0);
    }

    #[test]
    fn repeated_roots_count_once() {
        let p = up(&[0, 0, 1]); // x^2
        let rc = RootCounter::new(&p);
        assert_eq!(rc.count_all(), 1);
        assert_eq!(rc.isolate_all(), vec![Root::Exact(int(0))]);
    }

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_between(&rat(1, 3), &rat(1, 2)), rat(1, 2));
        assert_eq!(simplest_between(&rat(31, 100), &rat(34, 100)), rat(1, 3));
        assert_eq!(simplest_between(&rat(-7, 2), &rat(-3, 1)), int(-3));
    }

    #[test]
    fn division_identity() {
        let a = up(&[3, -2, 0, 5, 1]);
        let b = up(&[1, 2]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).sub(&a.sub(&r)), UPoly::zero());
        assert!(r.degree() < b.degree() || r.is_zero());
    }
}
