//! Globally adaptive Gauss-Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub est_error: f64,
    pub intervals: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over the partition `breaks` (sorted, at least two points),
/// bisecting the worst interval until the summed error estimate drops below
/// `rel_tol * |value|` (or `abs_tol`).
pub fn integrate_partition<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Ok(QuadResult {
            value: 0.0,
            est_error: 0.0,
            intervals: 0,
        });
    }
    let mut parts: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                est_error: err,
                intervals: parts.len(),
            });
        }
        if parts.len() >= max_intervals {
            return Err(Error::QuadratureFailure {
                partial: value,
                est_error: err,
            });
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty partition");
        let (a, b, _, _) = parts[worst];
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            // Interval exhausted at machine resolution; accept what we have.
            return Ok(QuadResult {
                value,
                est_error: err,
                intervals: parts.len(),
            });
        }
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        parts[worst] = (a, mid, v1, e1);
        parts.push((mid, b, v2, e2));
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult> {
    integrate_partition(f, &[a, b], rel_tol, 0.0, 10_000)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_converges() {
        // ∫_0^1 1/(1e-3 + x) dx = ln(1001)
        let r = integrate(|x| 1.0 / (1e-3 + x), 0.0, 1.0, 1e-11).unwrap();
        assert!((r.value - 1001f64.ln()).abs() < 1e-10 * 1001f64.ln());
        assert!(r.intervals > 1);
    }

    #[test]
    fn partition_matches_single_interval() {
        let a = integrate_partition(|x| x.sin(), &[0.0, 0.5, 2.0, 3.0], 1e-12, 0.0, 1000).unwrap();
        assert!((a.value - (1.0 - 3f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_reports_partial_value() {
        let err = integrate_partition(|x| x.abs().sqrt().recip(), &[-1.0, 1.0], 1e-14, 0.0, 4)
            .unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }
}
