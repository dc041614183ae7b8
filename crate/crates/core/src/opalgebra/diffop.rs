use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::frame::Frame;
use super::OpError;
use crate::symexpr::{Expr, SymPoly};

/// A word of frame generators in non-decreasing (PBW) order. Words sort
/// by length first, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Exponent of each generator (words are sorted).
    pub fn multi_index(&self, n: usize) -> Vec<u32> {
        let mut out = vec![0; n];
        for &g in &self.0 {
            out[g as usize] += 1;
        }
        out
    }

    pub fn render(&self, names: &[String]) -> String {
        let mi = self.multi_index(names.len());
        let mut parts = Vec::new();
        for (i, &k) in mi.iter().enumerate() {
            match k {
                0 => {}
                1 => parts.push(names[i].clone()),
                _ => parts.push(format!("{}^{k}", names[i])),
            }
        }
        parts.join("*")
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Differential operator `sum_w a_w Z_w` (coefficient on the left) over a
/// declared frame, in canonical PBW form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    frame: Arc<Frame>,
    terms: BTreeMap<Word, Expr>,
}

impl DiffOp {
    pub fn zero(frame: &Arc<Frame>) -> Self {
        DiffOp {
            frame: frame.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(frame: &Arc<Frame>) -> Self {
        Self::multiplication(frame, Expr::one())
    }

    /// Multiplication by a function.
    pub fn multiplication(frame: &Arc<Frame>, a: Expr) -> Self {
        Self::term(frame, Word::empty(), a)
    }

    pub fn generator(frame: &Arc<Frame>, i: usize) -> Self {
        Self::term(frame, Word(vec![i as u8]), Expr::one())
    }

    /// `a * Z_w`; the word is sorted into PBW order by composition.
    pub fn term(frame: &Arc<Frame>, word: Word, a: Expr) -> Self {
        let sorted = word.0.windows(2).all(|p| p[0] <= p[1]);
        if sorted {
            let mut terms = BTreeMap::new();
            if !a.is_zero() {
                terms.insert(word, a);
            }
            return DiffOp {
                frame: frame.clone(),
                terms,
            };
        }
        let mut out = DiffOp::identity(frame);
        for &g in word.0.iter().rev() {
            out = out.left_generator(g as usize);
        }
        out.mul_left(&a)
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Expr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> Expr {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    fn check_frame(&self, other: &DiffOp) -> Result<(), OpError> {
        if Arc::ptr_eq(&self.frame, &other.frame) || self.frame == other.frame {
            Ok(())
        } else {
            Err(OpError::FrameMismatch)
        }
    }

    fn add_term(&mut self, w: Word, a: Expr) {
        if a.is_zero() {
            return;
        }
        match self.terms.remove(&w) {
            Some(b) => {
                let s = b + a;
                if !s.is_zero() {
                    self.terms.insert(w, s);
                }
            }
            None => {
                self.terms.insert(w, a);
            }
        }
    }

    fn add_assign(&mut self, other: DiffOp) {
        for (w, a) in other.terms {
            self.add_term(w, a);
        }
    }

    pub fn add(&self, other: &DiffOp) -> Result<DiffOp, OpError> {
        self.check_frame(other)?;
        let mut out = self.clone();
        out.add_assign(other.clone());
        Ok(out)
    }

    pub fn sub(&self, other: &DiffOp) -> Result<DiffOp, OpError> {
        self.add(&other.mul_left(&Expr::int(-1)))
    }

    /// `a * self` for a function `a`.
    pub fn mul_left(&self, a: &Expr) -> DiffOp {
        let mut out = DiffOp::zero(&self.frame);
        for (w, b) in &self.terms {
            out.add_term(w.clone(), a * b);
        }
        out
    }

    /// `Z_i o self`.
    fn left_generator(&self, i: usize) -> DiffOp {
        let mut out = DiffOp::zero(&self.frame);
        for (w, b) in &self.terms {
            out.add_term(w.clone(), self.frame.apply(i, b));
            out.add_assign(self.word_left(i, &w.0).mul_left(b));
        }
        out
    }

    /// `Z_i Z_w` rewritten in PBW order.
    fn word_left(&self, i: usize, w: &[u8]) -> DiffOp {
        let frame = &self.frame;
        match w.first() {
            Some(&g) if (g as usize) < i => {
                let rest = &w[1..];
                let inner = self.word_left(i, rest);
                let mut out = inner.left_generator(g as usize);
                for k in 0..frame.dim() {
                    let c = frame.structure_constant(i, g as usize, k);
                    if !c.is_zero() {
                        out.add_assign(self.word_left(k, rest).mul_left(c));
                    }
                }
                out
            }
            _ => {
                let mut v = Vec::with_capacity(w.len() + 1);
                v.push(i as u8);
                v.extend_from_slice(w);
                DiffOp::term(frame, Word(v), Expr::one())
            }
        }
    }

    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp, OpError> {
        self.check_frame(other)?;
        let mut out = DiffOp::zero(&self.frame);
        for (w, a) in &self.terms {
            let mut acc = other.clone();
            for &g in w.0.iter().rev() {
                acc = acc.left_generator(g as usize);
            }
            out.add_assign(acc.mul_left(a));
        }
        Ok(out)
    }

    /// Applies the operator to a function.
    pub fn apply(&self, u: &Expr) -> Expr {
        let mut total = Expr::zero();
        for (w, a) in &self.terms {
            let mut v = u.clone();
            for &g in w.0.iter().rev() {
                v = self.frame.apply(g as usize, &v);
            }
            total = total + a * v;
        }
        total
    }

    pub fn map_coefficients<F>(&self, mut f: F) -> Result<DiffOp, OpError>
    where
        F: FnMut(&Expr) -> Result<Expr, OpError>,
    {
        let mut out = DiffOp::zero(&self.frame);
        for (w, a) in &self.terms {
            out.add_term(w.clone(), f(a)?);
        }
        Ok(out)
    }

    /// Builds an operator from `(word, coefficient)` pairs.
    pub fn from_terms<I>(frame: &Arc<Frame>, terms: I) -> DiffOp
    where
        I: IntoIterator<Item = (Word, Expr)>,
    {
        let mut out = DiffOp::zero(frame);
        for (w, a) in terms {
            out.add_assign(DiffOp::term(frame, w, a));
        }
        out
    }

    /// Same operator in the coordinate frame.
    pub fn to_coordinates(&self) -> DiffOp {
        if self.frame.is_coordinate() {
            return self.clone();
        }
        let coords: Vec<&str> = self.frame.coords().iter().map(String::as_str).collect();
        let cf = Arc::new(Frame::coordinates(&coords));
        let fields: Vec<DiffOp> = self
            .frame
            .fields()
            .iter()
            .map(|v| {
                let mut op = DiffOp::zero(&cf);
                for (j, a) in v.coeffs.iter().enumerate() {
                    op.add_term(Word(vec![j as u8]), a.clone());
                }
                op
            })
            .collect();
        let mut out = DiffOp::zero(&cf);
        for (w, a) in &self.terms {
            let mut acc = DiffOp::identity(&cf);
            for &g in w.0.iter().rev() {
                acc = fields[g as usize].compose(&acc).expect("same frame");
            }
            out.add_assign(acc.mul_left(a));
        }
        out
    }

    /// Rewrites a coordinate-frame operator in `target` without any
    /// smoothness check.
    pub fn express_in(&self, target: &Arc<Frame>) -> Result<DiffOp, OpError> {
        let p = self.to_coordinates();
        if p.frame.coords() != target.coords() {
            return Err(OpError::FrameMismatch);
        }
        let n = target.dim();
        let partials: Vec<DiffOp> = (0..n)
            .map(|j| {
                let mut op = DiffOp::zero(target);
                for k in 0..n {
                    op.add_term(Word(vec![k as u8]), target.inverse_entry(j, k).clone());
                }
                op
            })
            .collect();
        let mut out = DiffOp::zero(target);
        for (w, a) in &p.terms {
            let mut acc = DiffOp::identity(target);
            for &g in w.0.iter().rev() {
                acc = partials[g as usize].compose(&acc)?;
            }
            out.add_assign(acc.mul_left(a));
        }
        Ok(out)
    }
}

/// Renders `coefficient*word` sums, highest order first.
pub(crate) fn render_terms<'a, I>(terms: I, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result
where
    I: Iterator<Item = (&'a Word, &'a Expr)>,
{
    let mut first = true;
    let mut push = |f: &mut fmt::Formatter<'_>, text: String| -> fmt::Result {
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest.to_string()),
            None => (false, text),
        };
        match (first, neg) {
            (true, true) => write!(f, "-{body}")?,
            (true, false) => write!(f, "{body}")?,
            (false, true) => write!(f, " - {body}")?,
            (false, false) => write!(f, " + {body}")?,
        }
        first = false;
        Ok(())
    };
    let mut terms: Vec<_> = terms.collect();
    terms.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0 .0.cmp(&b.0 .0)));
    for (w, a) in terms {
        let wn = w.render(names);
        let single = a.numerator_parts().map(|(_, p)| p.len()).sum::<usize>() == 1;
        if w.is_empty() {
            if let Some(p) = a.as_poly() {
                let mut pieces: Vec<_> = p.terms().collect();
                pieces.sort_by(|x, y| x.0.print_cmp(y.0));
                for (m, c) in pieces {
                    push(f, SymPoly::term(m.clone(), c.clone()).to_string())?;
                }
            } else {
                push(f, a.to_string())?;
            }
            continue;
        }
        let neg = single && a.to_string().starts_with('-');
        let b = if neg { -a } else { a.clone() };
        let body = if b.is_one() {
            wn
        } else if single && b.denominator_atoms().next().is_none() {
            format!("{b}*{wn}")
        } else {
            format!("({b})*{wn}")
        };
        push(f, if neg { format!("-{body}") } else { body })?;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_terms(self.terms.iter(), self.frame.names(), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalgebra::VectorField;
    use crate::symexpr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn leibniz_in_coordinates() {
        let cf = Arc::new(Frame::coordinates(&["x"]));
        let dx = DiffOp::generator(&cf, 0);
        let x = DiffOp::multiplication(&cf, p("x"));
        let r = dx.compose(&x).unwrap();
        assert_eq!(r.to_string(), "x*Dx + 1");
        let xdx = x.compose(&dx).unwrap();
        let sq = xdx.compose(&xdx).unwrap();
        assert_eq!(sq.to_string(), "x^2*Dx^2 + x*Dx");
        // applied to x^3 gives 9 x^3
        assert_eq!(sq.apply(&p("x^3")), p("9*x^3"));
        assert_eq!(sq.compose(&DiffOp::identity(&cf)).unwrap(), sq);
    }

    #[test]
    fn pbw_reordering_uses_structure_constants() {
        let y1 = VectorField::new(&["x", "y"], vec![p("x"), Expr::zero()]);
        let y2 = VectorField::new(&["x", "y"], vec![Expr::zero(), p("x^2")]);
        let fr = Arc::new(Frame::new(&["Y1", "Y2"], vec![y1, y2]).unwrap());
        let a = DiffOp::generator(&fr, 1).compose(&DiffOp::generator(&fr, 0)).unwrap();
        // Y2 Y1 = Y1 Y2 - 2 Y2
        assert_eq!(a.to_string(), "Y1*Y2 - 2*Y2");
        let u = p("x^3*y^2 + x*y");
        let direct = fr.apply(1, &fr.apply(0, &u));
        assert_eq!(a.apply(&u), direct);
    }
}
