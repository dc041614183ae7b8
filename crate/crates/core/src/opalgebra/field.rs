use std::fmt;

use crate::symexpr::Expr;

/// First-order operator `sum_j a_j d/dx_j` over named coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    pub coords: Vec<String>,
    pub coeffs: Vec<Expr>,
}

impl VectorField {
    pub fn new(coords: &[&str], coeffs: Vec<Expr>) -> Self {
        assert_eq!(coords.len(), coeffs.len(), "one coefficient per coordinate");
        VectorField {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            coeffs,
        }
    }

    /// The coordinate field `d/d coords[i]`.
    pub fn partial(coords: &[&str], i: usize) -> Self {
        let coeffs = (0..coords.len())
            .map(|j| if i == j { Expr::one() } else { Expr::zero() })
            .collect();
        Self::new(coords, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }

    /// Derivative of a function along the field.
    pub fn apply(&self, u: &Expr) -> Expr {
        self.coords
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, a)| !a.is_zero())
            .map(|(x, a)| a * u.diff(x))
            .sum()
    }

    pub fn scale(&self, g: &Expr) -> VectorField {
        VectorField {
            coords: self.coords.clone(),
            coeffs: self.coeffs.iter().map(|a| g * a).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.coords, other.coords);
        VectorField {
            coords: self.coords.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.add(&other.scale(&Expr::int(-1)))
    }
}

/// Lie bracket `[u, v] = u(v_j) - v(u_j)` componentwise.
pub fn commutator(u: &VectorField, v: &VectorField) -> VectorField {
    assert_eq!(u.coords, v.coords, "fields over different coordinates");
    let coeffs = v
        .coeffs
        .iter()
        .zip(&u.coeffs)
        .map(|(vj, uj)| u.apply(vj) - v.apply(uj))
        .collect();
    VectorField {
        coords: u.coords.clone(),
        coeffs,
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (x, a) in self.coords.iter().zip(&self.coeffs) {
            if a.is_zero() {
                continue;
            }
            if a.is_one() {
                parts.push(format!("D{x}"));
            } else {
                parts.push(format!("({a})*D{x}"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    fn vf(a: &str, b: &str) -> VectorField {
        VectorField::new(&["x", "y"], vec![parse(a).unwrap(), parse(b).unwrap()])
    }

    #[test]
    fn brackets() {
        assert_eq!(commutator(&vf("x", "0"), &vf("0", "x^2")), vf("0", "2*x^2"));
        assert!(commutator(&vf("1", "0"), &vf("0", "1")).is_zero());
        assert_eq!(commutator(&vf("1", "0"), &vf("0", "y - x^2")), vf("0", "-2*x"));
    }
}
