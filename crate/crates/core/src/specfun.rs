//! Modified Bessel functions `I_nu`, `K_nu` and the Gamma function on the
//! ranges the Bessel injectivity probes need.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

pub const NU_MAX: f64 = 10.0;
pub const X_MAX: f64 = 30.0;
/// Relative accuracy every returned value is certified to.
pub const REL_TOL: f64 = 1e-10;
const SERIES_CUTOFF: f64 = 15.0;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("{what} = {value} outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("no method reaches the required accuracy at nu = {nu}, x = {x}")]
    Precision { nu: f64, x: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    Asymptotic,
    Integral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BesselEval {
    pub nu: f64,
    pub x: f64,
    pub value: f64,
    pub method: Method,
    /// Estimated relative error.
    pub error: f64,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos approximation (g = 7, nine terms) with reflection below 1/2.
pub fn gamma(z: f64) -> f64 {
    if z < 0.5 {
        return PI / ((PI * z).sin() * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut a = LANCZOS[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
}

fn check(nu: f64, x: f64, nu_open: bool) -> Result<(), SpecError> {
    let nu_ok = if nu_open { nu > 0.0 } else { nu >= 0.0 } && nu <= NU_MAX;
    if !nu_ok || nu.is_nan() {
        return Err(SpecError::OutOfRange {
            what: "nu",
            value: nu,
            range: if nu_open { "(0, 10]" } else { "[0, 10]" },
        });
    }
    if !(x > 0.0 && x <= X_MAX) {
        return Err(SpecError::OutOfRange {
            what: "x",
            value: x,
            range: "(0, 30]",
        });
    }
    Ok(())
}

/// Power series; all terms positive so the sum is well conditioned.
fn i_series(nu: f64, x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        // remaining terms are bounded by a geometric tail once the ratio < 1
        let ratio = q / ((k + 1.0) * (k + 1.0 + nu));
        if ratio < 0.5 && term <= f64::EPSILON * sum {
            let tail = term * ratio / (1.0 - ratio);
            return (sum, tail / sum + 4.0 * k * f64::EPSILON);
        }
    }
}

/// Hankel expansion `e^x/sqrt(2 pi x) sum (-1)^k a_k(nu)/x^k`, truncated at
/// the smallest term.
fn i_hankel(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
    }
    let err = term.abs() / sum.abs() + 1e-15;
    (x.exp() / (2.0 * PI * x).sqrt() * sum, err)
}

fn i_asymptotic(nu: f64, x: f64) -> Option<(f64, f64)> {
    let (v, err) = i_hankel(nu, x);
    (err <= 1e-12).then_some((v, err))
}

/// `I_nu(x)`: series up to `x = 15`, the large-argument expansion beyond
/// when it is accurate, else the series.
pub fn bessel_i(nu: f64, x: f64) -> Result<BesselEval, SpecError> {
    check(nu, x, false)?;
    if x > SERIES_CUTOFF {
        if let Some((value, error)) = i_asymptotic(nu, x) {
            return Ok(BesselEval {
                nu,
                x,
                value,
                method: Method::Asymptotic,
                error,
            });
        }
    }
    let (value, error) = i_series(nu, x);
    if error > REL_TOL {
        return Err(SpecError::Precision { nu, x });
    }
    Ok(BesselEval {
        nu,
        x,
        value,
        method: Method::Series,
        error,
    })
}

fn k_integrand(nu: f64, x: f64, t: f64) -> f64 {
    (-x * t.cosh()).exp() * (nu * t).cosh()
}

/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt` by the trapezoid rule
/// with step halving; the integrand is entire and decays doubly
/// exponentially, so the rule converges geometrically.
pub fn bessel_k(nu: f64, x: f64) -> Result<BesselEval, SpecError> {
    check(nu, x, true)?;
    // cut where the integrand is negligible against its peak
    let peak_t = (nu / x).asinh();
    let peak = k_integrand(nu, x, peak_t);
    let mut upper = peak_t.max(1.0);
    while k_integrand(nu, x, upper) > 1e-20 * peak {
        upper += 0.5;
    }
    let mut n = 64usize;
    let mut h = upper / n as f64;
    let mut sum = 0.5 * (k_integrand(nu, x, 0.0) + k_integrand(nu, x, upper))
        + (1..n).map(|i| k_integrand(nu, x, i as f64 * h)).sum::<f64>();
    let mut prev = sum * h;
    for _ in 0..14 {
        sum += (0..n).map(|i| k_integrand(nu, x, (i as f64 + 0.5) * h)).sum::<f64>();
        n *= 2;
        h *= 0.5;
        let cur = sum * h;
        let change = ((cur - prev) / cur).abs();
        prev = cur;
        if change < 1e-14 {
            return Ok(BesselEval {
                nu,
                x,
                value: cur,
                method: Method::Integral,
                error: change.max(1e-15),
            });
        }
    }
    Err(SpecError::Precision { nu, x })
}

fn stencil<F: Fn(f64) -> Result<f64, SpecError>>(f: F, x: f64, h: f64) -> Result<f64, SpecError> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

/// `|I K' - I' K + 1/x|` with five-point derivatives.
pub fn wronskian_check(nu: f64, x: f64) -> Result<f64, SpecError> {
    let h = (1e-3 * x).min(1e-2);
    let i = |t: f64| bessel_i(nu, t).map(|b| b.value);
    let k = |t: f64| bessel_k(nu, t).map(|b| b.value);
    let (iv, kv) = (i(x)?, k(x)?);
    let (di, dk) = (stencil(i, x, h)?, stencil(k, x, h)?);
    Ok((iv * dk - di * kv + 1.0 / x).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_values() {
        let mut fact = 1.0;
        for n in 1..20 {
            assert!(rel(gamma(n as f64), fact) < 1e-13, "{n}");
            fact *= n as f64;
        }
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(1.5), PI.sqrt() / 2.0) < 1e-14);
        assert!(rel(gamma(0.25), 3.625_609_908_221_908) < 1e-13);
    }

    #[test]
    fn half_integer_closed_forms() {
        for x in [0.1, 1.0, 2.5, 7.0, 14.0, 20.0, 29.0] {
            let i = bessel_i(0.5, x).unwrap().value;
            let k = bessel_k(0.5, x).unwrap().value;
            assert!(rel(i, (2.0 / (PI * x)).sqrt() * x.sinh()) < 1e-10, "I {x}");
            assert!(rel(k, (PI / (2.0 * x)).sqrt() * (-x).exp()) < 1e-10, "K {x}");
            let k32 = bessel_k(1.5, x).unwrap().value;
            assert!(rel(k32, (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x)) < 1e-10);
        }
    }

    #[test]
    fn small_and_large_argument() {
        assert!((bessel_i(1.0, 1e-4).unwrap().value / 0.5e-4 - 1.0).abs() < 1e-6);
        assert!((bessel_i(0.0, 1e-12).unwrap().value - 1.0).abs() < 1e-15);
        assert!((1e-3 * bessel_k(1.0, 1e-3).unwrap().value - 1.0).abs() < 1e-3);
        let k = bessel_k(2.0, 20.0).unwrap().value;
        assert!(rel(k, (PI / 40.0).sqrt() * (-20f64).exp()) < 0.1);
        assert!(rel(k, (PI / 40.0).sqrt() * (-20f64).exp() * (1.0 + 15.0 / 160.0)) < 0.01);
        assert!(bessel_i(11.0, 1.0).is_err());
        assert!(bessel_k(0.0, 1.0).is_err());
        assert!(bessel_k(1.0, 31.0).is_err());
    }

    #[test]
    fn wronskian() {
        assert!(wronskian_check(0.5, 2.0).unwrap() < 1e-8);
        assert!(wronskian_check(1.0, 5.0).unwrap() < 1e-7);
        assert!(wronskian_check(0.25, 0.5).unwrap() < 1e-7);
    }

    #[test]
    fn recurrence_and_monotonicity() {
        for nu in [1.0, 1.5, 2.25, 5.0, 9.0] {
            let mut last_i = 0.0;
            let mut last_k = f64::INFINITY;
            for x in [0.2, 0.7, 1.5, 3.0, 8.0, 14.0, 16.0, 25.0] {
                let lo = bessel_i(nu - 1.0, x).unwrap().value;
                let hi = bessel_i(nu + 1.0, x).unwrap().value;
                let mid = bessel_i(nu, x).unwrap().value;
                assert!(rel(lo - hi, 2.0 * nu / x * mid) < 1e-8, "{nu} {x}");
                let k = bessel_k(nu, x).unwrap().value;
                assert!(mid > last_i && k < last_k);
                last_i = mid;
                last_k = k;
            }
        }
    }

    #[test]
    fn methods_agree_on_overlap() {
        for nu in [0.0, 0.5, 1.0, 2.0, 3.5] {
            for x in [12.0, 13.0, 14.0, 15.0] {
                let (s, _) = i_series(nu, x);
                let (a, _) = i_hankel(nu, x);
                assert!(rel(s, a) < 1e-7, "{nu} {x}");
            }
        }
    }
}
