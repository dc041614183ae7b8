//! Spot-check of `||u||_{H^2(x Dx)} <= c ||v||_{H^2(X)}` for `u = r r~^2 v`
//! over bumps sliding toward the origin.

use rayon::prelude::*;
use serde::Serialize;

use super::norms::derivative;
use super::probes::slope;
use super::quad::integrate;
use super::NumError;

/// Largest tolerated growth of `ln ratio` per sweep step.
pub const TREND_TOL: f64 = 0.05;

/// Join point of the cutoffs: `r = x` below `eps`, `1` above `2 eps`.
pub const CUTOFF_EPS: f64 = 0.25;

/// `6t^5 - 15t^4 + 10t^3` clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// `x` near 0, `1` away from 0.
pub fn r(x: f64) -> f64 {
    let w = smoothstep((x - CUTOFF_EPS) / CUTOFF_EPS);
    (1.0 - w) * x + w
}

/// `1/x` near infinity, `1` near 0 (the cutoff of `y = 1/x`).
pub fn r_tilde(x: f64) -> f64 {
    r(1.0 / x)
}

/// `X = x/(1 + x^2) Dx`: `x Dx` near 0 and `y^3 Dy` (up to sign) near
/// infinity.
pub fn frame_coefficient(x: f64) -> f64 {
    x / (1.0 + x * x)
}

/// Bump `phi(log2(x/centre))` with `phi(t) = S(1 - |t|)`, supported in
/// `[centre/2, 2 centre]`.
pub fn log_bump(centre: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    move |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let t = (x / centre).log2();
        smoothstep(1.0 - t.abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingRow {
    pub centre: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub rows: Vec<EmbeddingRow>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Least-squares slope of `ln ratio` against the sweep index over its
    /// second half.
    pub trend: f64,
    /// All ratios finite and `trend <= TREND_TOL`.
    pub pass: bool,
}

/// `sum_{j <= 2} int |(a Dx)^j f|^2 density` over `[lo, hi]`.
fn norm2<F, A, D>(f: &F, a: A, density: D, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let d1 = |x: f64| a(x) * derivative(f, x);
    let d2 = |x: f64| a(x) * derivative(&d1, x);
    [&f as &dyn Fn(f64) -> f64, &d1, &d2]
        .iter()
        .map(|g| integrate(&|x| g(x).powi(2) * density(x), lo, hi, 1e-12).0)
        .sum()
}

/// Norms of `u = r r~^2 v`: the left side in `L^2(dx/x^3)` with `x Dx`,
/// the right side of `v` with `X` and `r^2 dx/(x^3 r~^4)`.
pub fn embedding_row(centre: f64, scale: f64) -> Result<EmbeddingRow, NumError> {
    if !(centre > 0.0 && centre.is_finite()) {
        return Err(NumError::Domain(format!("bump centre {centre} must be positive")));
    }
    let bump = log_bump(centre);
    let v = move |x: f64| scale * bump(x);
    let u = |x: f64| r(x) * r_tilde(x).powi(2) * v(x);
    let (lo, hi) = (centre / 2.0, centre * 2.0);
    let lhs = norm2(&u, |x| x, |x| x.powi(-3), lo, hi);
    let rhs = norm2(
        &v,
        frame_coefficient,
        |x| r(x).powi(2) / (x.powi(3) * r_tilde(x).powi(4)),
        lo,
        hi,
    );
    let ratio = (rhs > 0.0).then(|| lhs / rhs);
    Ok(EmbeddingRow {
        centre,
        lhs,
        rhs,
        ratio,
    })
}

/// Sweeps bumps at `centres` (zero `scale` gives the trivial member).
pub fn embedding_spotcheck(centres: &[f64], scale: f64) -> Result<EmbeddingReport, NumError> {
    let rows: Result<Vec<EmbeddingRow>, NumError> = centres.par_iter().map(|&c| embedding_row(c, scale)).collect();
    let rows = rows?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(f64::NAN, f64::max);
    let min_ratio = ratios.iter().copied().fold(f64::NAN, f64::min);
    let tail: Vec<(f64, f64)> = ratios
        .iter()
        .enumerate()
        .skip(ratios.len() / 2)
        .map(|(k, r)| (k as f64, r.ln()))
        .collect();
    let trend = if tail.len() >= 2 { slope(&tail) } else { 0.0 };
    let pass = ratios.is_empty() || (max_ratio.is_finite() && trend <= TREND_TOL);
    Ok(EmbeddingReport {
        rows,
        max_ratio,
        min_ratio,
        trend,
        pass,
    })
}

/// Centres `2^0, 2^-1, ..., 2^-(n-1)`.
pub fn dyadic_centres(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2f64.powi(-(k as i32))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoffs() {
        assert_eq!(r(0.1), 0.1);
        assert_eq!(r(0.6), 1.0);
        assert_eq!(r_tilde(10.0), 0.1);
        assert_eq!(r_tilde(1.0), 1.0);
        assert_eq!(smoothstep(0.5), 0.5);
    }

    #[test]
    fn sweep_is_bounded() {
        let rep = embedding_spotcheck(&dyadic_centres(6), 1.0).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.trend < 0.0);
        assert!(rep.rows.iter().all(|r| r.ratio.is_some_and(f64::is_finite)));
        let one = embedding_row(1.0, 1.0).unwrap();
        assert!(one.lhs > 0.0 && one.rhs > 0.0);
        let zero = embedding_spotcheck(&[1.0], 0.0).unwrap();
        assert!(zero.rows[0].ratio.is_none() && zero.pass);
    }
}
