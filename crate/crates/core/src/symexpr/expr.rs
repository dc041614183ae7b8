use std::collections::{BTreeMap, BTreeSet};
use std::ops;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{exact_nth_root, int, Rational, SymPoly};
use super::ExprError;

/// Transcendental part of a term: one collected exponential, fractional
/// powers of polynomial bases (exponent in (0,1)) and absolute values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Extra {
    pub(crate) exp: Option<SymPoly>,
    pub(crate) roots: BTreeMap<SymPoly, Rational>,
    pub(crate) abs: BTreeSet<SymPoly>,
}

impl Extra {
    pub fn is_one(&self) -> bool {
        self.exp.is_none() && self.roots.is_empty() && self.abs.is_empty()
    }

    /// Product of two extras as `(extra, polynomial cofactor)`.
    fn mul(&self, other: &Extra) -> (Extra, SymPoly) {
        let mut factor = SymPoly::one();
        let exp = match (&self.exp, &other.exp) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => {
                let s = a.add(b);
                (!s.is_zero()).then_some(s)
            }
        };
        let mut roots = self.roots.clone();
        for (base, r) in &other.roots {
            let mut total = roots.remove(base).unwrap_or_else(Rational::zero) + r;
            if total >= Rational::one() {
                factor = factor.mul(base);
                total -= Rational::one();
            }
            if !total.is_zero() {
                roots.insert(base.clone(), total);
            }
        }
        let mut abs = self.abs.clone();
        for base in &other.abs {
            if !abs.remove(base) {
                abs.insert(base.clone());
            } else {
                factor = factor.mul(&base.mul(base));
            }
        }
        (Extra { exp, roots, abs }, factor)
    }

    /// `self^-1 = extra / prod(polys)`.
    fn inverse(&self) -> (Extra, Vec<SymPoly>) {
        let mut polys = Vec::new();
        let exp = self.exp.as_ref().map(SymPoly::neg);
        let mut roots = BTreeMap::new();
        for (base, r) in &self.roots {
            roots.insert(base.clone(), Rational::one() - r);
            polys.push(base.clone());
        }
        for base in &self.abs {
            polys.push(base.mul(base));
        }
        (
            Extra {
                exp,
                roots,
                abs: self.abs.clone(),
            },
            polys,
        )
    }

    pub fn exp_arg(&self) -> Option<&SymPoly> {
        self.exp.as_ref()
    }

    pub fn roots(&self) -> impl Iterator<Item = (&SymPoly, &Rational)> {
        self.roots.iter()
    }

    pub fn abs_bases(&self) -> impl Iterator<Item = &SymPoly> {
        self.abs.iter()
    }
}

/// Immutable symbolic expression in canonical form.
///
/// The value is `sum_E P_E * E / prod_A A^k` where each `P_E` is a
/// polynomial, each `E` a distinct [`Extra`], and each denominator atom `A`
/// a primitive polynomial with positive leading coefficient that does not
/// divide every numerator polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr {
    pub(crate) num: BTreeMap<Extra, SymPoly>,
    pub(crate) den: BTreeMap<SymPoly, u32>,
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr {
            num: BTreeMap::new(),
            den: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(SymPoly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        Self::constant(int(n))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Self::constant(super::poly::rat(n, d))
    }

    pub fn sym(name: &str) -> Self {
        Self::from_poly(SymPoly::var(name))
    }

    pub fn from_poly(p: SymPoly) -> Self {
        let mut num = BTreeMap::new();
        if !p.is_zero() {
            num.insert(Extra::default(), p);
        }
        Expr {
            num,
            den: BTreeMap::new(),
        }
    }

    pub(crate) fn from_extra(e: Extra) -> Self {
        let mut num = BTreeMap::new();
        num.insert(e, SymPoly::one());
        Expr {
            num,
            den: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// Exact value when the expression contains no symbols and no
    /// irrational factors.
    pub fn as_constant(&self) -> Option<Rational> {
        if !self.den.is_empty() {
            return None;
        }
        self.as_poly()?.as_constant()
    }

    /// The polynomial when the expression is one.
    pub fn as_poly(&self) -> Option<SymPoly> {
        if !self.den.is_empty() {
            return None;
        }
        match self.num.len() {
            0 => Some(SymPoly::zero()),
            1 => {
                let (e, p) = self.num.iter().next().unwrap();
                e.is_one().then(|| p.clone())
            }
            _ => None,
        }
    }

    pub fn numerator_parts(&self) -> impl Iterator<Item = (&Extra, &SymPoly)> {
        self.num.iter()
    }

    pub fn denominator_atoms(&self) -> impl Iterator<Item = (&SymPoly, u32)> {
        self.den.iter().map(|(a, k)| (a, *k))
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (e, p) in &self.num {
            out.extend(p.symbols());
            if let Some(a) = &e.exp {
                out.extend(a.symbols());
            }
            for b in e.roots.keys().chain(e.abs.iter()) {
                out.extend(b.symbols());
            }
        }
        for a in self.den.keys() {
            out.extend(a.symbols());
        }
        out
    }

    pub fn depends_on(&self, name: &str) -> bool {
        self.symbols().contains(name)
    }

    /// Idempotent canonicalization; every constructor already returns
    /// canonical values, so this only re-runs cancellation.
    pub fn normalize(&self) -> Expr {
        self.clone().reduce()
    }

    fn reduce(mut self) -> Expr {
        self.num.retain(|_, p| !p.is_zero());
        if self.num.is_empty() {
            self.den.clear();
            return self;
        }
        let atoms: Vec<SymPoly> = self.den.keys().cloned().collect();
        for atom in atoms {
            while let Some(&k) = self.den.get(&atom) {
                let mut divided = BTreeMap::new();
                let mut all = true;
                for (e, p) in &self.num {
                    match p.exact_div(&atom) {
                        Some(q) => {
                            divided.insert(e.clone(), q);
                        }
                        None => {
                            all = false;
                            break;
                        }
                    }
                }
                if !all {
                    break;
                }
                self.num = divided;
                if k == 1 {
                    self.den.remove(&atom);
                } else {
                    self.den.insert(atom.clone(), k - 1);
                }
            }
        }
        self
    }

    fn den_poly(&self) -> SymPoly {
        self.den.iter().fold(SymPoly::one(), |acc, (a, k)| acc.mul(&a.pow(*k)))
    }

    fn scale_num(num: &BTreeMap<Extra, SymPoly>, p: &SymPoly) -> BTreeMap<Extra, SymPoly> {
        num.iter()
            .map(|(e, q)| (e.clone(), q.mul(p)))
            .filter(|(_, q)| !q.is_zero())
            .collect()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (na, nb, den) = if self.den == other.den {
            (self.num.clone(), other.num.clone(), self.den.clone())
        } else {
            let mut den = self.den.clone();
            for (a, k) in &other.den {
                let slot = den.entry(a.clone()).or_insert(0);
                *slot = (*slot).max(*k);
            }
            let lift = |e: &Expr| {
                let mut f = SymPoly::one();
                for (a, k) in &den {
                    let have = e.den.get(a).copied().unwrap_or(0);
                    if *k > have {
                        f = f.mul(&a.pow(k - have));
                    }
                }
                Self::scale_num(&e.num, &f)
            };
            (lift(self), lift(other), den)
        };
        let mut num = na;
        for (e, p) in nb {
            let entry = num.entry(e).or_insert_with(SymPoly::zero);
            *entry = entry.add(&p);
        }
        Expr { num, den }.reduce()
    }

    pub fn neg(&self) -> Expr {
        Expr {
            num: self.num.iter().map(|(e, p)| (e.clone(), p.neg())).collect(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> Expr {
        if k.is_zero() {
            return Expr::zero();
        }
        Expr {
            num: self.num.iter().map(|(e, p)| (e.clone(), p.scale(k))).collect(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        let mut num: BTreeMap<Extra, SymPoly> = BTreeMap::new();
        for (ea, pa) in &self.num {
            for (eb, pb) in &other.num {
                let (e, f) = ea.mul(eb);
                let t = pa.mul(pb).mul(&f);
                let entry = num.entry(e).or_insert_with(SymPoly::zero);
                *entry = entry.add(&t);
            }
        }
        let mut den = self.den.clone();
        for (a, k) in &other.den {
            *den.entry(a.clone()).or_insert(0) += k;
        }
        Expr { num, den }.reduce()
    }

    /// Divides by a non-zero polynomial, factoring it into denominator atoms.
    fn div_poly(self, p: &SymPoly) -> Result<Expr, ExprError> {
        if p.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let content = p.content();
        let mono = p.monomial_gcd();
        let rest = p.div_mono(&mono).scale(&content.recip());
        let sign = rest.leading_sign();
        let rest = if sign < 0 { rest.neg() } else { rest };
        let factor = (content * int(sign as i64)).recip();
        let mut out = self.scale(&factor);
        for (v, e) in mono.iter() {
            *out.den.entry(SymPoly::var(v)).or_insert(0) += e;
        }
        if rest.as_constant().is_none() {
            let (base, k) = rest.perfect_power();
            *out.den.entry(base).or_insert(0) += k;
        }
        Ok(out.reduce())
    }

    /// `p / q` for polynomials.
    pub fn poly_ratio(p: SymPoly, q: &SymPoly) -> Result<Expr, ExprError> {
        Expr::from_poly(p).div_poly(q)
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if self.num.len() != 1 {
            return Err(ExprError::Unsupported(
                "division by a sum of terms with different transcendental factors".into(),
            ));
        }
        let (e, p) = self.num.iter().next().unwrap();
        let (inv, polys) = e.inverse();
        let mut num = BTreeMap::new();
        num.insert(inv, self.den_poly());
        let mut out = Expr {
            num,
            den: BTreeMap::new(),
        }
        .div_poly(p)?;
        for q in polys {
            out = out.div_poly(&q)?;
        }
        Ok(out)
    }

    pub fn div(&self, other: &Expr) -> Result<Expr, ExprError> {
        if let Some(p) = other.as_poly() {
            return self.clone().div_poly(&p);
        }
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, n: i64) -> Result<Expr, ExprError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    /// Rational power. Fractional powers assume each polynomial factor of
    /// the base is non-negative where the result is evaluated.
    pub fn pow_rational(&self, r: &Rational) -> Result<Expr, ExprError> {
        if r.is_integer() {
            let n = r
                .to_integer()
                .to_i64()
                .ok_or_else(|| ExprError::Unsupported("exponent too large".into()))?;
            return self.powi(n);
        }
        if self.is_zero() {
            return if r.is_positive() {
                Ok(Expr::zero())
            } else {
                Err(ExprError::DivisionByZero)
            };
        }
        if self.num.len() != 1 {
            return Err(ExprError::Unsupported(
                "fractional power of a sum with transcendental factors".into(),
            ));
        }
        let (e, p) = self.num.iter().next().unwrap();
        let mut out = poly_pow(p, r)?;
        if let Some(a) = &e.exp {
            out = out.mul(&Expr::from_poly(a.scale(r)).exp()?);
        }
        for (base, s) in &e.roots {
            out = out.mul(&atom_pow(base, &(s * r))?);
        }
        if !e.abs.is_empty() {
            return Err(ExprError::Unsupported("fractional power of an absolute value".into()));
        }
        for (a, k) in &self.den {
            out = out.mul(&atom_pow(a, &(-(r * int(*k as i64))))?);
        }
        Ok(out)
    }

    pub fn exp(&self) -> Result<Expr, ExprError> {
        let Some(p) = self.as_poly() else {
            return Err(ExprError::Unsupported(
                "exp is only supported for polynomial arguments".into(),
            ));
        };
        if p.is_zero() {
            return Ok(Expr::one());
        }
        Ok(Expr::from_extra(Extra {
            exp: Some(p),
            ..Extra::default()
        }))
    }

    pub fn abs(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        if self.num.len() != 1 {
            return Err(ExprError::Unsupported(
                "abs of a sum with transcendental factors".into(),
            ));
        }
        let (e, p) = self.num.iter().next().unwrap();
        let content = p.content();
        let mono = p.monomial_gcd();
        let rest = p.div_mono(&mono).scale(&content.recip());
        let mut out = Expr::constant(content);
        for (v, k) in mono.iter() {
            let var = SymPoly::var(v);
            out = out.mul(&Expr::from_poly(var.pow(k - k % 2)));
            if k % 2 == 1 {
                out = out.mul(&abs_atom(var));
            }
        }
        if rest.as_constant().is_none() {
            let rest = if rest.leading_sign() < 0 { rest.neg() } else { rest };
            out = out.mul(&abs_atom(rest));
        }
        out = out.mul(&Expr::from_extra(e.clone()));
        for (a, k) in &self.den {
            if k % 2 == 0 {
                out = out.div_poly(&a.pow(*k))?;
            } else {
                out = out.mul(&abs_atom(a.clone())).div_poly(&a.pow(k + 1))?;
            }
        }
        Ok(out)
    }
}

fn abs_atom(base: SymPoly) -> Expr {
    let mut abs = BTreeSet::new();
    abs.insert(base);
    Expr::from_extra(Extra {
        abs,
        ..Extra::default()
    })
}

/// `base^t` for an atomic base (a single symbol, a primitive polynomial,
/// or a positive constant), split into integer and fractional parts.
fn atom_pow(base: &SymPoly, t: &Rational) -> Result<Expr, ExprError> {
    let fl = t.floor();
    let fr = t - &fl;
    let n = fl
        .to_integer()
        .to_i64()
        .ok_or_else(|| ExprError::Unsupported("exponent too large".into()))?;
    let mut out = Expr::from_poly(base.clone()).powi(n)?;
    if !fr.is_zero() {
        let mut roots = BTreeMap::new();
        roots.insert(base.clone(), fr);
        out = out.mul(&Expr::from_extra(Extra {
            roots,
            ..Extra::default()
        }));
    }
    Ok(out)
}

fn const_pow(c: &Rational, r: &Rational) -> Result<Expr, ExprError> {
    let q = r
        .denom()
        .to_u32()
        .ok_or_else(|| ExprError::Unsupported("root index too large".into()))?;
    let p = r.numer();
    let mut sign = Rational::one();
    let mut c = c.clone();
    if c.is_negative() {
        if q % 2 == 0 {
            return Err(ExprError::Domain(format!(
                "even root of negative constant {}",
                super::poly::fmt_rational(&c)
            )));
        }
        if p.is_odd() {
            sign = -sign;
        }
        c = -c;
    }
    if let (Some(n), Some(d)) = (exact_nth_root(c.numer(), q), exact_nth_root(c.denom(), q)) {
        let root = BigRational::new(n, d);
        let v = Expr::constant(root).powi(p.to_i64().unwrap_or(0))?;
        return Ok(v.scale(&sign));
    }
    Ok(atom_pow(&SymPoly::constant(c), r)?.scale(&sign))
}

fn poly_pow(p: &SymPoly, r: &Rational) -> Result<Expr, ExprError> {
    let content = p.content();
    let mono = p.monomial_gcd();
    let rest = p.div_mono(&mono).scale(&content.recip());
    let mut out = const_pow(&content, r)?;
    match rest.as_constant() {
        Some(c) if c.is_one() => {
            for (v, e) in mono.iter() {
                out = out.mul(&atom_pow(&SymPoly::var(v), &(r * int(*e as i64)))?);
            }
        }
        Some(_) => {
            // negative monomial: keep it as one base
            let base = SymPoly::term(mono.clone(), -Rational::one());
            out = out.mul(&atom_pow(&base, r)?);
        }
        None => {
            for (v, e) in mono.iter() {
                out = out.mul(&atom_pow(&SymPoly::var(v), &(r * int(*e as i64)))?);
            }
            let (base, k) = rest.perfect_power();
            out = out.mul(&atom_pow(&base, &(r * int(k as i64)))?);
        }
    }
    Ok(out)
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Self {
        Expr::constant(q)
    }
}

impl From<BigInt> for Expr {
    fn from(n: BigInt) -> Self {
        Expr::constant(BigRational::from_integer(n))
    }
}

macro_rules! bin_op {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$inner(self, rhs)
            }
        }
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inner(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$inner(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inner(self, &rhs)
            }
        }
    };
}

bin_op!(Add, add, add);
bin_op!(Sub, sub, sub);
bin_op!(Mul, mul, mul);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}
