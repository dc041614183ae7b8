//! Endpoint integrability of `|B_nu(x^2/2)|^2 / x^3` from Bessel values.

use serde::Serialize;

use super::quad::{integrate, DECAY_RATIO, DIVERGENCE_SHELLS};
use super::NumError;
use crate::specfun::{bessel_i, bessel_k, X_MAX};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BesselKind {
    I,
    K,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Zero,
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrabilityProbe {
    pub kind: BesselKind,
    pub nu: f64,
    pub endpoint: Endpoint,
    pub convergent: bool,
    /// Least-squares power of `x` fitted to the shells near 0.
    pub fitted_exponent: Option<f64>,
    /// `4 nu - 3` or `-4 nu - 3`.
    pub exact_exponent: Option<f64>,
    /// `(left end, right end, integral)` per window.
    pub shells: Vec<(f64, f64, f64)>,
}

const ZERO_SHELLS: i32 = 14;

/// Least-squares slope.
pub(crate) fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

pub fn integrability_probe(kind: BesselKind, nu: f64, endpoint: Endpoint) -> Result<IntegrabilityProbe, NumError> {
    if !(nu > 0.0 && nu <= 10.0) {
        return Err(NumError::Domain(format!("order {nu} outside (0, 10]")));
    }
    let b = |z: f64| match kind {
        BesselKind::I => bessel_i(nu, z).map(|e| e.value),
        BesselKind::K => bessel_k(nu, z).map(|e| e.value),
    };
    // validate the range once so the integrand can be infallible
    b(0.5)?;
    let g = |x: f64| {
        let v = b(0.5 * x * x).unwrap_or(f64::NAN);
        v * v / (x * x * x)
    };
    let windows: Vec<(f64, f64)> = match endpoint {
        Endpoint::Zero => (0..ZERO_SHELLS).map(|k| (2f64.powi(-k - 1), 2f64.powi(-k))).collect(),
        Endpoint::Infinity => {
            let top = (2.0 * X_MAX).sqrt();
            let factor = 2f64.powf(0.25);
            let mut w = Vec::new();
            let mut lo = 1.0;
            while lo * factor <= top {
                w.push((lo, lo * factor));
                lo *= factor;
            }
            w
        }
    };
    let mut shells = Vec::with_capacity(windows.len());
    for &(lo, hi) in &windows {
        let (v, _) = integrate(&g, lo, hi, 0.0);
        if v.is_nan() {
            return Err(NumError::Domain(format!("Bessel value unavailable on [{lo}, {hi}]")));
        }
        shells.push((lo, hi, v));
    }
    let vals: Vec<f64> = shells.iter().map(|s| s.2).collect();
    let (convergent, fitted, exact) = match endpoint {
        Endpoint::Zero => {
            let tail = &vals[vals.len() - DIVERGENCE_SHELLS - 1..];
            let stalled = tail.windows(2).all(|w| w[1] >= DECAY_RATIO * w[0]);
            // shell k scales like 2^(-k (p + 1))
            let pts: Vec<(f64, f64)> = vals
                .iter()
                .enumerate()
                .skip(vals.len() / 2)
                .map(|(k, v)| (k as f64, v.log2()))
                .collect();
            let p = -slope(&pts) - 1.0;
            let exact = match kind {
                BesselKind::I => 4.0 * nu - 3.0,
                BesselKind::K => -4.0 * nu - 3.0,
            };
            (!stalled, Some(p), Some(exact))
        }
        Endpoint::Infinity => {
            let growing = vals.windows(2).skip(vals.len() / 2).all(|w| w[1] >= DECAY_RATIO * w[0]);
            (!growing, None, None)
        }
    };
    Ok(IntegrabilityProbe {
        kind,
        nu,
        endpoint,
        convergent,
        fitted_exponent: fitted,
        exact_exponent: exact,
        shells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one() {
        let i0 = integrability_probe(BesselKind::I, 1.0, Endpoint::Zero).unwrap();
        assert!(i0.convergent);
        assert!((i0.fitted_exponent.unwrap() - 1.0).abs() < 0.05);
        let k0 = integrability_probe(BesselKind::K, 1.0, Endpoint::Zero).unwrap();
        assert!(!k0.convergent);
        assert!((k0.fitted_exponent.unwrap() + 7.0).abs() < 0.05);
        assert!(
            !integrability_probe(BesselKind::I, 1.0, Endpoint::Infinity)
                .unwrap()
                .convergent
        );
        assert!(
            integrability_probe(BesselKind::K, 1.0, Endpoint::Infinity)
                .unwrap()
                .convergent
        );
    }

    #[test]
    fn quarter_order() {
        let i0 = integrability_probe(BesselKind::I, 0.25, Endpoint::Zero).unwrap();
        assert!(!i0.convergent);
        assert!((i0.fitted_exponent.unwrap() + 2.0).abs() < 0.05);
        assert!(integrability_probe(BesselKind::K, 0.0, Endpoint::Zero).is_err());
    }
}
