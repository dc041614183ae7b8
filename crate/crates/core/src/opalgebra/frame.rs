use std::fmt;

use super::field::{commutator, VectorField};
use super::OpError;
use crate::symexpr::Expr;

/// Ordered generators `Z_i = sum_j A_ij d_j` with their structure
/// constants `[Z_i, Z_j] = sum_k c_ijk Z_k` and the inverse matrix
/// expressing coordinate partials in the frame.
#[derive(Clone, Debug)]
pub struct Frame {
    coords: Vec<String>,
    names: Vec<String>,
    fields: Vec<VectorField>,
    inverse: Vec<Vec<Expr>>,
    structure: Vec<Vec<Vec<Expr>>>,
    coordinate: bool,
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords && self.names == other.names && self.fields == other.fields
    }
}

impl Eq for Frame {}

impl Frame {
    /// The coordinate frame `Dx, Dy, ...`.
    pub fn coordinates(coords: &[&str]) -> Frame {
        let n = coords.len();
        let fields: Vec<VectorField> = (0..n).map(|i| VectorField::partial(coords, i)).collect();
        let identity = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                    .collect()
            })
            .collect();
        Frame {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            names: coords.iter().map(|c| format!("D{c}")).collect(),
            fields,
            inverse: identity,
            structure: vec![vec![vec![Expr::zero(); n]; n]; n],
            coordinate: true,
        }
    }

    /// A frame of `n` fields over `n` coordinates (n = 1 or 2).
    pub fn new(names: &[&str], fields: Vec<VectorField>) -> Result<Frame, OpError> {
        let n = fields.len();
        if n == 0 || n > 2 || names.len() != n {
            return Err(OpError::Unsupported(format!(
                "frames must have 1 or 2 named fields, got {n}"
            )));
        }
        let coords = fields[0].coords.clone();
        if coords.len() != n || fields.iter().any(|f| f.coords != coords) {
            return Err(OpError::Unsupported(
                "frame fields must share one coordinate list of matching length".into(),
            ));
        }
        let a = |i: usize, j: usize| &fields[i].coeffs[j];
        let inverse = if n == 1 {
            vec![vec![Expr::one().div(a(0, 0)).map_err(|_| OpError::DegenerateFrame)?]]
        } else {
            let det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
            if det.is_zero() {
                return Err(OpError::DegenerateFrame);
            }
            let d = |e: Expr| e.div(&det).map_err(OpError::from);
            vec![
                vec![d(a(1, 1).clone())?, d(-a(0, 1))?],
                vec![d(-a(1, 0))?, d(a(0, 0).clone())?],
            ]
        };
        let mut structure = vec![vec![vec![Expr::zero(); n]; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = commutator(&fields[i], &fields[j]);
                for k in 0..n {
                    let c: Expr = (0..n).map(|l| &v.coeffs[l] * &inverse[l][k]).sum();
                    structure[j][i][k] = -&c;
                    structure[i][j][k] = c;
                }
            }
        }
        let coordinate = fields
            .iter()
            .enumerate()
            .all(|(i, f)| *f == VectorField::partial(&coords.iter().map(String::as_str).collect::<Vec<_>>(), i));
        Ok(Frame {
            coords,
            names: names.iter().map(|s| s.to_string()).collect(),
            fields,
            inverse,
            structure,
            coordinate,
        })
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn field(&self, i: usize) -> &VectorField {
        &self.fields[i]
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn is_coordinate(&self) -> bool {
        self.coordinate
    }

    /// `c_ijk` in `[Z_i, Z_j] = sum_k c_ijk Z_k`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Expr {
        &self.structure[i][j][k]
    }

    /// `B_jk` in `d_j = sum_k B_jk Z_k`.
    pub fn inverse_entry(&self, j: usize, k: usize) -> &Expr {
        &self.inverse[j][k]
    }

    pub fn apply(&self, i: usize, u: &Expr) -> Expr {
        self.fields[i].apply(u)
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .names
            .iter()
            .zip(&self.fields)
            .map(|(n, v)| format!("{n} = {v}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    #[test]
    fn grushin_structure_constants() {
        let y1 = VectorField::new(&["x", "y"], vec![parse("x").unwrap(), Expr::zero()]);
        let y2 = VectorField::new(&["x", "y"], vec![Expr::zero(), parse("x^2").unwrap()]);
        let fr = Frame::new(&["Y1", "Y2"], vec![y1, y2]).unwrap();
        assert!(fr.structure_constant(0, 1, 0).is_zero());
        assert_eq!(*fr.structure_constant(0, 1, 1), Expr::int(2));
        assert_eq!(*fr.structure_constant(1, 0, 1), Expr::int(-2));
        assert_eq!(*fr.inverse_entry(1, 1), parse("1/x^2").unwrap());
    }
}
