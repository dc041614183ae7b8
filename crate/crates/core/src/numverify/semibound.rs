//! Empirical `||P u|| / ||u||` over modulated Gaussians, computed on the
//! Fourier side from the exact symbol.

use rayon::prelude::*;
use serde::Serialize;

use super::quad::integrate;
use super::NumError;
use crate::invert::{fourier_symbol, SymbolPoly};
use crate::limits::LimitOperator;

/// Members `exp(i xi0 z) exp(-(z/L)^2)`, with `xi0` along the first axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianFamily {
    pub xi0: Vec<f64>,
    pub widths: Vec<f64>,
}

impl GaussianFamily {
    pub fn grid(xi0: &[f64], widths: &[f64]) -> Self {
        GaussianFamily {
            xi0: xi0.to_vec(),
            widths: widths.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemiboundEstimate {
    pub c_est: f64,
    pub argmin: (f64, f64),
    /// `(xi0, L, ratio)` for every member.
    pub ratios: Vec<(f64, f64, f64)>,
}

/// `||P u||/||u||` for one member: `|u^|^2` is a Gaussian of standard
/// deviation `1/L` centred at `xi0`.
pub fn gaussian_ratio(sym: &SymbolPoly, xi0: f64, width: f64) -> f64 {
    let sigma = 1.0 / width;
    let weight = |t: f64| (-0.5 * (t / sigma).powi(2)).exp();
    let span = 12.0 * sigma;
    match sym.dim() {
        1 => {
            let num = integrate(&|t| sym.modulus_at(&[xi0 + t]).powi(2) * weight(t), -span, span, 0.0).0;
            let den = integrate(&weight, -span, span, 0.0).0;
            (num / den).sqrt()
        }
        _ => {
            let inner = |t: f64| {
                integrate(&|r| sym.modulus_at(&[xi0 + t, r]).powi(2) * weight(r), -span, span, 0.0).0 * weight(t)
            };
            let num = integrate(&inner, -span, span, 0.0).0;
            let den = integrate(&weight, -span, span, 0.0).0.powi(2);
            (num / den).sqrt()
        }
    }
}

pub fn semibound_estimate(op: &LimitOperator, family: &GaussianFamily) -> Result<SemiboundEstimate, NumError> {
    let sym = fourier_symbol(op)?;
    if !sym.modulus_sq.symbols().iter().all(|s| sym.vars.contains(s)) {
        return Err(NumError::Domain(format!("symbol {sym} has unbound parameters")));
    }
    let members: Vec<(f64, f64)> = family
        .xi0
        .iter()
        .flat_map(|&x| family.widths.iter().map(move |&l| (x, l)))
        .collect();
    if members.is_empty() {
        return Err(NumError::Domain("empty family".into()));
    }
    let ratios: Vec<(f64, f64, f64)> = members
        .par_iter()
        .map(|&(x, l)| (x, l, gaussian_ratio(&sym, x, l)))
        .collect();
    let best = ratios
        .iter()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .copied()
        .expect("non-empty");
    Ok(SemiboundEstimate {
        c_est: best.2,
        argmin: (best.0, best.1),
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::Expr;

    fn family(alpha: i64) -> LimitOperator {
        LimitOperator::abelian(
            1,
            [
                (vec![2], Expr::one()),
                (vec![1], Expr::int(2)),
                (vec![0], Expr::int(-alpha)),
            ],
        )
    }

    #[test]
    fn estimates() {
        let fam = GaussianFamily::grid(&[-2.0, -0.5, 0.0, 0.5, 2.0], &[1.0, 10.0, 100.0]);
        let t = LimitOperator::abelian(1, [(vec![2], Expr::one()), (vec![0], Expr::int(-1))]);
        assert!(semibound_estimate(&t, &fam).unwrap().c_est >= 1.0);
        let e = semibound_estimate(&family(1), &fam).unwrap();
        assert!(e.c_est >= 1.0 && e.c_est <= 1.05, "{e:?}");
        assert_eq!(e.argmin, (0.0, 100.0));
        let sym = fourier_symbol(&family(0)).unwrap();
        let seq: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&l| gaussian_ratio(&sym, 0.0, l)).collect();
        assert!(seq[0] > seq[1] && seq[1] > seq[2] && seq[2] < 1e-3, "{seq:?}");
    }

    #[test]
    fn two_dimensional_members() {
        let op = LimitOperator::abelian(
            2,
            [
                (vec![2, 0], Expr::one()),
                (vec![0, 2], Expr::one()),
                (vec![0, 0], Expr::int(-1)),
            ],
        );
        let sym = fourier_symbol(&op).unwrap();
        let r = gaussian_ratio(&sym, 0.0, 50.0);
        assert!((r - 1.0).abs() < 1e-2);
    }
}
