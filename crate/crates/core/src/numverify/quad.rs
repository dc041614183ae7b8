//! Gauss-Kronrod quadrature and dyadic-shell integration toward singular
//! endpoints.

use serde::Serialize;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Shells whose ratio stays at or above this are not decaying.
pub const DECAY_RATIO: f64 = 0.999;
/// Consecutive non-decaying shells that declare divergence.
pub const DIVERGENCE_SHELLS: usize = 8;
const MAX_SHELLS: usize = 200;

/// One G7-K15 panel: Kronrod value and the Gauss-Kronrod difference.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let d = h * XGK[j];
        let s = f(c - d) + f(c + d);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Fixed composite rule on `n` equal panels.
pub fn composite_gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| gk15(f, a + i as f64 * h, a + (i + 1) as f64 * h).0)
        .sum()
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Panels split before giving up on the tolerance.
const MAX_PANELS: usize = 2000;

/// Globally adaptive G7-K15: always bisects the panel with the largest
/// error estimate, until the summed estimate is below `tol` (absolute, or
/// `1e-14` relative) or the panel budget is spent.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (value, error) = gk15(f, a, b);
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let (mut total, mut err) = (value, error);
    while heap.len() < MAX_PANELS && total.is_finite() {
        if err <= tol.max(1e-14 * total.abs()) {
            break;
        }
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (lv, le) = gk15(f, p.a, m);
        let (rv, re) = gk15(f, m, p.b);
        total += lv + rv - p.value;
        err += le + re - p.error;
        heap.push(Panel {
            a: p.a,
            b: m,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: m,
            b: p.b,
            value: rv,
            error: re,
        });
    }
    // re-sum to shed accumulated cancellation
    let total: f64 = heap.iter().map(|p| p.value).sum();
    let err: f64 = heap.iter().map(|p| p.error).sum();
    (total, err)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integral {
    Finite { value: f64, error: f64 },
    Divergent { shells: Vec<f64> },
}

impl Integral {
    pub fn value(&self) -> Option<f64> {
        match self {
            Integral::Finite { value, .. } => Some(*value),
            Integral::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Integral::Divergent { .. })
    }

    pub fn add(&self, other: &Integral) -> Integral {
        match (self, other) {
            (Integral::Finite { value: a, error: e }, Integral::Finite { value: b, error: f }) => Integral::Finite {
                value: a + b,
                error: e + f,
            },
            (Integral::Divergent { shells }, _) | (_, Integral::Divergent { shells }) => {
                Integral::Divergent { shells: shells.clone() }
            }
        }
    }
}

/// Where the dyadic shells accumulate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Toward {
    /// `[a + d 2^-(k+1), a + d 2^-k]`
    Lower { a: f64, d: f64 },
    /// `[b - d 2^-k, b - d 2^-(k+1)]`
    Upper { b: f64, d: f64 },
    /// `[m 2^k, m 2^(k+1)]`
    Infinity { m: f64 },
}

impl Toward {
    fn shell(&self, k: i32) -> Option<(f64, f64)> {
        let p = 2f64.powi(-k);
        match *self {
            Toward::Lower { a, d } => {
                let (lo, hi) = (a + 0.5 * d * p, a + d * p);
                (lo > a && lo < hi).then_some((lo, hi))
            }
            Toward::Upper { b, d } => {
                let (lo, hi) = (b - d * p, b - 0.5 * d * p);
                (hi < b && lo < hi).then_some((lo, hi))
            }
            Toward::Infinity { m } => {
                let lo = m / p;
                (2.0 * lo).is_finite().then_some((lo, 2.0 * lo))
            }
        }
    }
}

/// Sums `f` over dyadic shells, declaring divergence when
/// [`DIVERGENCE_SHELLS`] consecutive shell ratios stay at or above
/// [`DECAY_RATIO`].
pub fn shell_sum<F: Fn(f64) -> f64>(f: &F, toward: Toward, rtol: f64) -> (Integral, Vec<f64>) {
    let mut shells: Vec<f64> = Vec::new();
    let mut total: f64 = 0.0;
    let mut err = 0.0;
    let mut stalled = 0usize;
    for k in 0..MAX_SHELLS as i32 {
        let Some((lo, hi)) = toward.shell(k) else { break };
        let (v, e) = integrate(f, lo, hi, rtol * 1e-3 * total.abs().max(f64::MIN_POSITIVE));
        if !v.is_finite() {
            return (Integral::Divergent { shells: shells.clone() }, shells);
        }
        let v = v.abs();
        if let Some(&prev) = shells.last() {
            if prev > 0.0 && v >= DECAY_RATIO * prev {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        shells.push(v);
        total += v;
        err += e;
        if stalled >= DIVERGENCE_SHELLS {
            return (Integral::Divergent { shells: shells.clone() }, shells);
        }
        let n = shells.len();
        if n > DIVERGENCE_SHELLS {
            let tail = &shells[n - 3..];
            if tail.iter().all(|&s| s == 0.0) {
                break;
            }
            let r = tail
                .windows(2)
                .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
                .fold(0.0, f64::max);
            if r < 1.0 && v * r / (1.0 - r) <= rtol * total {
                break;
            }
        }
    }
    let n = shells.len();
    let tail = match n {
        0 | 1 => 0.0,
        _ => {
            let r = shells[n - 1] / shells[n - 2].max(f64::MIN_POSITIVE);
            if r < 1.0 {
                shells[n - 1] * r / (1.0 - r)
            } else {
                shells[n - 1]
            }
        }
    };
    (
        Integral::Finite {
            value: total,
            error: err + tail,
        },
        shells,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panels_are_exact_on_polynomials() {
        let (v, e) = gk15(&|x: f64| x.powi(20), 0.0, 1.0);
        assert!((v - 1.0 / 21.0).abs() < 1e-15 && e < 1e-3);
        let (v, _) = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn order_on_smooth_integrands() {
        let f = |x: f64| (3.0 * x).cos() * (x * x).exp();
        let exact = integrate(&f, 0.0, 2.0, 1e-15).0;
        let e1 = (composite_gk15(&f, 0.0, 2.0, 1) - exact).abs();
        let e2 = (composite_gk15(&f, 0.0, 2.0, 2) - exact).abs();
        assert!((e1 / e2).log2() >= 3.0, "{e1} {e2}");
    }

    #[test]
    fn shells() {
        let (v, _) = shell_sum(&|x: f64| x.powf(-0.5), Toward::Lower { a: 0.0, d: 1.0 }, 1e-10);
        assert!((v.value().unwrap() - 2.0).abs() < 1e-8, "{v:?}");
        let (v, _) = shell_sum(&|x: f64| 1.0 / x, Toward::Lower { a: 0.0, d: 1.0 }, 1e-10);
        assert!(v.is_divergent());
        let (v, _) = shell_sum(&|x: f64| 1.0 / (x * x), Toward::Infinity { m: 1.0 }, 1e-10);
        assert!((v.value().unwrap() - 1.0).abs() < 1e-8);
        let (v, _) = shell_sum(&|x: f64| (1.0 - x).powf(-0.5), Toward::Upper { b: 1.0, d: 1.0 }, 1e-9);
        assert!((v.value().unwrap() - 2.0).abs() < 1e-6, "{v:?}");
    }
}
