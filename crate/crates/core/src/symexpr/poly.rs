//! Multivariate polynomials with exact rational coefficients.
//!
//! Symbols (coordinates and parameters alike) are ordered by name; the
//! lexicographic monomial order used for exact division makes the
//! alphabetically first symbol the most significant.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    match q.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            // very large numerators/denominators: go through logarithms of the parts
            let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        }
    }
}

/// Exact rational from a finite double (binary expansion, no rounding).
pub fn from_f64(v: f64) -> Option<Rational> {
    BigRational::from_float(v)
}

/// Power product of named symbols with positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymMono(BTreeMap<String, u32>);

impl SymMono {
    pub fn one() -> Self {
        SymMono(BTreeMap::new())
    }

    pub fn var(name: &str, e: u32) -> Self {
        let mut m = BTreeMap::new();
        if e > 0 {
            m.insert(name.to_string(), e);
        }
        SymMono(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn exponent(&self, name: &str) -> u32 {
        self.0.get(name).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &u32)> {
        self.0.iter()
    }

    pub fn mul(&self, other: &SymMono) -> SymMono {
        let mut out = self.0.clone();
        for (k, e) in &other.0 {
            *out.entry(k.clone()).or_insert(0) += e;
        }
        SymMono(out)
    }

    pub fn divides(&self, other: &SymMono) -> bool {
        self.0.iter().all(|(k, e)| other.exponent(k) >= *e)
    }

    /// `self / other`; caller guarantees divisibility.
    pub fn div(&self, other: &SymMono) -> SymMono {
        let mut out = self.0.clone();
        for (k, e) in &other.0 {
            let slot = out.get_mut(k).expect("monomial divisibility");
            *slot -= e;
            if *slot == 0 {
                out.remove(k);
            }
        }
        SymMono(out)
    }

    pub fn gcd(&self, other: &SymMono) -> SymMono {
        let mut out = BTreeMap::new();
        for (k, e) in &self.0 {
            let m = (*e).min(other.exponent(k));
            if m > 0 {
                out.insert(k.clone(), m);
            }
        }
        SymMono(out)
    }

    pub fn lex_cmp(&self, other: &SymMono) -> Ordering {
        let keys: BTreeSet<&String> = self.0.keys().chain(other.0.keys()).collect();
        for k in keys {
            let c = self.exponent(k).cmp(&other.exponent(k));
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    }

    /// Graded order used for printing: higher degree first, then lex.
    pub fn print_cmp(&self, other: &SymMono) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| other.lex_cmp(self))
    }

    pub fn without(&self, name: &str) -> SymMono {
        let mut m = self.0.clone();
        m.remove(name);
        SymMono(m)
    }
}

/// Polynomial in named symbols with rational coefficients; never stores zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymPoly(BTreeMap<SymMono, Rational>);

impl SymPoly {
    pub fn zero() -> Self {
        SymPoly(BTreeMap::new())
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(SymMono::one(), c);
        }
        SymPoly(m)
    }

    pub fn var(name: &str) -> Self {
        Self::term(SymMono::var(name, 1), Rational::one())
    }

    pub fn term(m: SymMono, c: Rational) -> Self {
        let mut map = BTreeMap::new();
        if !c.is_zero() {
            map.insert(m, c);
        }
        SymPoly(map)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymMono, &Rational)> {
        self.0.iter()
    }

    /// Returns the constant value when the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.0.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.0.len() == 1
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        self.0.keys().flat_map(|m| m.0.keys().cloned()).collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.keys().map(SymMono::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        self.0.keys().map(|m| m.exponent(name)).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: SymMono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.0.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &SymPoly) -> SymPoly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SymPoly) -> SymPoly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> SymPoly {
        SymPoly(self.0.iter().map(|(m, c)| (m.clone(), -c.clone())).collect())
    }

    pub fn scale(&self, k: &Rational) -> SymPoly {
        if k.is_zero() {
            return SymPoly::zero();
        }
        SymPoly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul_mono(&self, mono: &SymMono, k: &Rational) -> SymPoly {
        if k.is_zero() {
            return SymPoly::zero();
        }
        SymPoly(self.0.iter().map(|(m, c)| (m.mul(mono), c * k)).collect())
    }

    pub fn mul(&self, other: &SymPoly) -> SymPoly {
        let mut out = SymPoly::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> SymPoly {
        let mut result = SymPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Leading term under the lexicographic order.
    pub fn leading(&self) -> Option<(&SymMono, &Rational)> {
        self.0.iter().max_by(|a, b| a.0.lex_cmp(b.0))
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &SymPoly) -> Option<SymPoly> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = SymPoly::zero();
        while !rem.is_zero() {
            let (rm, rc) = {
                let (m, c) = rem.leading().unwrap();
                (m.clone(), c.clone())
            };
            if !dm.divides(&rm) {
                return None;
            }
            let qm = rm.div(&dm);
            let qc = rc / &dc;
            rem = rem.sub(&d.mul_mono(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    pub fn derivative(&self, name: &str) -> SymPoly {
        let mut out = SymPoly::zero();
        for (m, c) in &self.0 {
            let e = m.exponent(name);
            if e == 0 {
                continue;
            }
            let mut nm = m.0.clone();
            if e == 1 {
                nm.remove(name);
            } else {
                nm.insert(name.to_string(), e - 1);
            }
            out.add_term(SymMono(nm), c * int(e as i64));
        }
        out
    }

    /// Positive rational `c` such that `self / c` has coprime integer coefficients.
    pub fn content(&self) -> Rational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.0.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Rational::one();
        }
        BigRational::new(num, den)
    }

    pub fn monomial_gcd(&self) -> SymMono {
        let mut it = self.0.keys();
        let Some(first) = it.next() else {
            return SymMono::one();
        };
        it.fold(first.clone(), |acc, m| acc.gcd(m))
    }

    pub fn div_mono(&self, mono: &SymMono) -> SymPoly {
        SymPoly(self.0.iter().map(|(m, c)| (m.div(mono), c.clone())).collect())
    }

    /// Exact real `k`-th root, or `None` when `self` is not a `k`-th power.
    pub fn nth_root(&self, k: u32) -> Option<SymPoly> {
        if k == 1 {
            return Some(self.clone());
        }
        let (m, c) = self.leading()?;
        if c.is_negative() {
            return if k % 2 == 1 {
                self.neg().nth_root(k).map(|q| q.neg())
            } else {
                None
            };
        }
        if m.0.values().any(|e| e % k != 0) {
            return None;
        }
        let lm = SymMono(m.0.iter().map(|(v, e)| (v.clone(), e / k)).collect());
        let lc = BigRational::new(exact_nth_root(c.numer(), k)?, exact_nth_root(c.denom(), k)?);
        let max_degree = self.total_degree() / k;
        let lead_pow = SymMono(lm.0.iter().map(|(v, e)| (v.clone(), e * (k - 1))).collect());
        let lead_coef = num_traits::pow(lc.clone(), (k - 1) as usize) * int(k as i64);
        let mut root = SymPoly::term(lm.clone(), lc);
        loop {
            let rem = self.sub(&root.pow(k));
            let Some((rm, rc)) = rem.leading() else {
                return Some(root);
            };
            if !lead_pow.divides(rm) {
                return None;
            }
            let t = rm.div(&lead_pow);
            if t.lex_cmp(&lm) != Ordering::Less || t.degree() > max_degree {
                return None;
            }
            root.add_term(t, rc / &lead_coef);
        }
    }

    /// Largest `k` with `self = q^k`, together with `q`.
    pub fn perfect_power(&self) -> (SymPoly, u32) {
        for k in (2..=self.total_degree()).rev() {
            if let Some(q) = self.nth_root(k) {
                return (q, k);
            }
        }
        (self.clone(), 1)
    }

    /// Sign making the lex-leading coefficient positive.
    pub fn leading_sign(&self) -> i32 {
        match self.leading() {
            Some((_, c)) if c.is_negative() => -1,
            _ => 1,
        }
    }

    pub fn eval_f64<F: Fn(&str) -> Option<f64>>(&self, lookup: &F) -> Result<f64, String> {
        let mut acc = 0.0;
        for (m, c) in &self.0 {
            let mut t = to_f64(c);
            for (k, e) in &m.0 {
                let v = lookup(k).ok_or_else(|| k.clone())?;
                t *= v.powi(*e as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_exact(&self, values: &BTreeMap<String, Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.0 {
            let mut t = c.clone();
            for (k, e) in &m.0 {
                let v = values.get(k)?;
                t *= num_traits::pow(v.clone(), *e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Replaces symbol `name` by the polynomial `by`.
    pub fn substitute(&self, name: &str, by: &SymPoly) -> SymPoly {
        let mut out = SymPoly::zero();
        for (m, c) in &self.0 {
            let e = m.exponent(name);
            let rest = SymPoly::term(m.without(name), c.clone());
            out = out.add(&rest.mul(&by.pow(e)));
        }
        out
    }

    /// Coefficients of `self` viewed as a univariate polynomial in `name`,
    /// each coefficient a polynomial in the remaining symbols.
    pub fn coefficients_in(&self, name: &str) -> Vec<SymPoly> {
        let deg = self.degree_in(name) as usize;
        let mut out = vec![SymPoly::zero(); deg + 1];
        for (m, c) in &self.0 {
            let e = m.exponent(name) as usize;
            out[e].add_term(m.without(name), c.clone());
        }
        out
    }

    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.0.iter().collect();
        terms.sort_by(|a, b| a.0.print_cmp(b.0));
        for (i, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write_term(f, &c.abs(), m, &[])?;
        }
        Ok(())
    }
}

/// Writes `c*m*extra...` with `c >= 0`, omitting a unit coefficient.
pub(crate) fn write_term(f: &mut fmt::Formatter<'_>, c: &Rational, m: &SymMono, extra: &[String]) -> fmt::Result {
    let mut factors: Vec<String> = Vec::new();
    for (k, e) in &m.0 {
        if *e == 1 {
            factors.push(k.clone());
        } else {
            factors.push(format!("{k}^{e}"));
        }
    }
    factors.extend(extra.iter().cloned());
    if factors.is_empty() {
        return write!(f, "{}", fmt_rational(c));
    }
    if !c.is_one() {
        write!(f, "{}*", fmt_rational(c))?;
    }
    write!(f, "{}", factors.join("*"))
}

pub fn fmt_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f)
    }
}

/// Integer `n`-th root of a non-negative big integer when it is exact.
pub fn exact_nth_root(v: &BigInt, n: u32) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.nth_root(n);
    (num_traits::pow(r.clone(), n as usize) == *v).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> SymPoly {
        SymPoly::var("x")
    }
    fn y() -> SymPoly {
        SymPoly::var("y")
    }

    #[test]
    fn perfect_powers_are_recovered() {
        let f = y().sub(&x().pow(2)).add(&SymPoly::constant(rat(1, 2)));
        for k in 1..=4 {
            let (q, e) = f.pow(k).perfect_power();
            assert_eq!((q.pow(e), e), (f.pow(k), k));
        }
        let g = x().mul(&y()).add(&SymPoly::one());
        assert_eq!(f.mul(&g).perfect_power().1, 1);
        assert_eq!(f.pow(2).mul(&g.pow(2)).perfect_power().1, 2);
    }

    #[test]
    fn exact_division_detects_factors() {
        let f = y().sub(&x().pow(2));
        let p = f.mul(&f).mul(&x());
        let q = p.exact_div(&f).unwrap();
        assert_eq!(q, f.mul(&x()));
        assert!(x().add(&SymPoly::one()).exact_div(&f).is_none());
    }

    #[test]
    fn content_and_substitution() {
        let p = x().scale(&rat(3, 4)).add(&y().scale(&rat(1, 2)));
        assert_eq!(p.content(), rat(1, 4));
        let s = p.substitute("y", &x());
        assert_eq!(s, x().scale(&rat(5, 4)));
    }

    #[test]
    fn derivative_of_product() {
        let p = x().mul(&SymPoly::one().sub(&x()));
        assert_eq!(p.derivative("x"), SymPoly::one().sub(&x().scale(&int(2))));
    }
}
