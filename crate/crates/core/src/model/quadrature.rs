//! Globally adaptive Gauss–Kronrod (7/15 point) quadrature in one dimension.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::ModelError;

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Piece { a, b, value: k * h, error: ((k - g) * h).abs() }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral, ModelError> {
    if !(tol > 0.0) {
        return Err(ModelError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let first = kronrod(&f, a, b);
    let mut err = first.error;
    let mut heap = BinaryHeap::from([first]);
    while !(err <= tol) {
        if heap.len() >= MAX_INTERVALS || !err.is_finite() {
            return Err(ModelError::Tolerance { tol, estimate: err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(ModelError::Tolerance { tol, estimate: err });
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally so the running error does not drift.
        if heap.len() % 64 == 0 {
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Integral { value, error })
}

/// Integrates `f` over `[a, inf)` via `u = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<Integral, ModelError> {
    integrate(
        |t| {
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        },
        0.0,
        1.0,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory() {
        let r = integrate(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-10).unwrap();
        assert!((r.value - 0.0).abs() < 1e-10, "{r:?}");
        let r = integrate(f64::cos, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn half_line() {
        let r = integrate_to_infinity(|u| (-u).exp(), 0.0, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_to_infinity(|u| (-2.0 * u).exp(), 3.0, 1e-12).unwrap();
        assert!((r.value - (-6f64).exp() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn divergent_reports_tolerance() {
        let r = integrate_to_infinity(|u| 1.0 / (1.0 + u), 0.0, 1e-8);
        assert!(matches!(r, Err(ModelError::Tolerance { .. })), "{r:?}");
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
    }
}
