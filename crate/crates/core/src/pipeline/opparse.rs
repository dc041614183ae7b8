//! Text form of constant-coefficient limit operators, e.g.
//! `D2 + 2*D - a` or `Z1^2 + Z2^2 - 2`.

use std::collections::BTreeMap;

use super::PipelineError;
use crate::limits::LimitOperator;
use crate::symexpr::{parse, Expr, SymPoly};

/// Generator symbols and the exponent each contributes, per dimension.
fn generators(dim: usize) -> Vec<(&'static str, usize, u32)> {
    match dim {
        1 => vec![("D", 0, 1), ("Z", 0, 1), ("D2", 0, 2)],
        _ => vec![("Z1", 0, 1), ("Z2", 1, 1)],
    }
}

/// Parses an abelian operator in `dim` generators, substituting `params`
/// first. In one dimension `D`, `Z` denote the generator and `D2` its
/// square; in two dimensions the generators are `Z1`, `Z2`.
pub fn parse_abelian(text: &str, dim: usize, params: &BTreeMap<String, Expr>) -> Result<LimitOperator, PipelineError> {
    if !(1..=2).contains(&dim) {
        return Err(PipelineError::Config(format!(
            "operator dimension must be 1 or 2, got {dim}"
        )));
    }
    let e = parse(text)
        .map_err(|e| PipelineError::Config(format!("operator: {e}")))?
        .substitute_all(params)?;
    let poly = e
        .as_poly()
        .ok_or_else(|| PipelineError::Config(format!("operator {text} is not polynomial in its generators")))?;
    let gens = generators(dim);
    let mut terms = Vec::new();
    for (mono, c) in poly.terms() {
        let mut mi = vec![0u32; dim];
        let mut rest = SymPoly::constant(c.clone());
        for (name, &k) in mono.iter() {
            match gens.iter().find(|g| g.0 == name) {
                Some(&(_, slot, mult)) => mi[slot] += k * mult,
                None => rest = rest.mul(&SymPoly::var(name).pow(k)),
            }
        }
        terms.push((mi, Expr::from_poly(rest)));
    }
    Ok(LimitOperator::abelian(dim, terms))
}

/// `name=value` pairs.
pub fn parse_params<'a>(pairs: impl IntoIterator<Item = &'a str>) -> Result<BTreeMap<String, Expr>, PipelineError> {
    pairs
        .into_iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("parameter {p} is not of the form name=value")))?;
            let v = parse(v.trim()).map_err(|e| PipelineError::Config(format!("parameter {k}: {e}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional() {
        let p = parse_params(["a=0"]).unwrap();
        let op = parse_abelian("D2 + 2*D - a", 1, &p).unwrap();
        assert_eq!(op.to_string(), "Z^2 + 2*Z");
        let op = parse_abelian("Z^2 + 2*Z - a", 1, &BTreeMap::new()).unwrap();
        assert_eq!(op.constant().to_string(), "-a");
    }

    #[test]
    fn two_dimensional() {
        let op = parse_abelian("Z1^2 + Z2^2 - 2", 2, &BTreeMap::new()).unwrap();
        assert_eq!(op.to_string(), "Z1^2 + Z2^2 - 2");
        assert!(parse_abelian("exp(Z1)", 2, &BTreeMap::new()).is_err());
        assert!(parse_params(["a"]).is_err());
    }
}
