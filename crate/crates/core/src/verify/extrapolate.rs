//! Tail extrapolation of sequences sampled along a grid.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extrapolation {
    pub limit: f64,
    /// Magnitude of the fitted transient at the last grid point.
    pub error_bar: f64,
    /// Fitted decay rate; 0 for a constant tail.
    pub rate: f64,
    pub indeterminate: bool,
    pub reason: Option<String>,
}

const TAIL: usize = 4;
/// Increments below this relative size count as a constant tail.
const CONSTANT_TOL: f64 = 1e-12;

fn indeterminate(last: f64, reason: &str) -> Extrapolation {
    Extrapolation {
        limit: last,
        error_bar: f64::INFINITY,
        rate: f64::NAN,
        indeterminate: true,
        reason: Some(reason.into()),
    }
}

/// Ratio of successive increments of `e^{κx}` on three points.
fn increment_ratio(kappa: f64, x: [f64; 3]) -> f64 {
    (kappa * (x[2] - x[1])).exp_m1() / -(kappa * (x[0] - x[1])).exp_m1()
}

fn solve_rate(x: [f64; 3], target: f64) -> Option<f64> {
    let h = (x[0] - x[1]).min(x[1] - x[2]);
    let mut lo = 1e-12 / h;
    let mut hi = 700.0 / (x[0] - x[2]).abs().max(h);
    let f = |k: f64| increment_ratio(k, x) - target;
    if f(lo) * f(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Fits `y ≈ L + A e^{κx}` with `κ > 0` on the last four points of a
/// sequence sampled along a strictly descending grid `x → −∞`.
pub fn extrapolate_exponential(points: &[(f64, f64)]) -> Result<Extrapolation> {
    if points.len() < TAIL {
        return Err(Error::Config(format!("extrapolation needs at least {TAIL} points")));
    }
    if points.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::Config("extrapolation grid must be strictly descending".into()));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Config("extrapolation points must be finite".into()));
    }
    let tail = &points[points.len() - TAIL..];
    let last = tail[TAIL - 1].1;
    let scale = tail.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let d: Vec<f64> = tail.windows(2).map(|w| w[1].1 - w[0].1).collect();
    if d.iter().all(|v| v.abs() <= CONSTANT_TOL * scale.max(f64::MIN_POSITIVE)) {
        return Ok(Extrapolation {
            limit: last,
            error_bar: d.iter().map(|v| v.abs()).fold(0.0, f64::max),
            rate: 0.0,
            indeterminate: false,
            reason: None,
        });
    }
    if !(d.iter().all(|v| *v > 0.0) || d.iter().all(|v| *v < 0.0)) {
        return Ok(indeterminate(last, "tail is not monotone"));
    }
    let mut rates = Vec::new();
    for i in 0..2 {
        let x = [tail[i].0, tail[i + 1].0, tail[i + 2].0];
        match solve_rate(x, d[i + 1] / d[i]) {
            Some(k) => rates.push(k),
            None => return Ok(indeterminate(last, "increments do not shrink geometrically")),
        }
    }
    let kappa = 0.5 * (rates[0] + rates[1]);
    if (rates[0] - rates[1]).abs() > 0.5 * kappa {
        return Ok(indeterminate(last, "fitted rates disagree"));
    }
    // Least squares for L, A with basis {1, e^{κx}}.
    let (mut s11, mut s1e, mut see, mut sy, mut sey) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in tail {
        let e = (kappa * x).exp();
        s11 += 1.0;
        s1e += e;
        see += e * e;
        sy += y;
        sey += e * y;
    }
    let det = s11 * see - s1e * s1e;
    if det.abs() <= f64::MIN_POSITIVE {
        return Ok(indeterminate(last, "degenerate fit"));
    }
    let limit = (see * sy - s1e * sey) / det;
    let amp = (s11 * sey - s1e * sy) / det;
    let residual = tail
        .iter()
        .map(|&(x, y)| (y - limit - amp * (kappa * x).exp()).abs())
        .fold(0.0, f64::max);
    Ok(Extrapolation {
        limit,
        error_bar: (amp * (kappa * tail[TAIL - 1].0).exp()).abs() + residual,
        rate: kappa,
        indeterminate: false,
        reason: None,
    })
}

/// Fits `y ≈ L + a/x + b/x²` through the last three points of an increasing grid.
pub fn extrapolate_inverse_power(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Config("inverse-power extrapolation needs 3 points".into()));
    }
    let tail = &points[points.len() - 3..];
    let mut m = [[0.0; 4]; 3];
    for (row, &(x, y)) in m.iter_mut().zip(tail) {
        if x == 0.0 {
            return Err(Error::Config("inverse-power grid may not contain 0".into()));
        }
        *row = [1.0, 1.0 / x, 1.0 / (x * x), y];
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        m.swap(col, piv);
        if m[col][col].abs() < 1e-300 {
            return Err(Error::Config("inverse-power fit is singular".into()));
        }
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Ok(m[0][3] / m[0][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn recovers_exponential_tail() {
        let pts: Vec<(f64, f64)> = (0..7)
            .map(|i| -(i as f64))
            .map(|s| (s, PI + 2.0 * (0.7 * s).exp()))
            .collect();
        let e = extrapolate_exponential(&pts).unwrap();
        assert!(!e.indeterminate);
        assert!((e.limit - PI).abs() < 1e-10, "{e:?}");
        assert!((e.rate - 0.7).abs() < 1e-8);
    }

    #[test]
    fn synthetic_unit_rate_series() {
        let pts: Vec<(f64, f64)> = [-4.0, -5.0, -6.0, -7.0]
            .iter()
            .map(|&x: &f64| (x, PI + x.exp()))
            .collect();
        let e = extrapolate_exponential(&pts).unwrap();
        assert!((e.limit - PI).abs() < 1e-3, "{e:?}");
    }

    #[test]
    fn saturating_bound_series() {
        let pts: Vec<(f64, f64)> = (1..=8)
            .map(|i| -(i as f64))
            .map(|s: f64| (s, PI * (-s).exp() * -(-(s.exp())).exp_m1()))
            .collect();
        let e = extrapolate_exponential(&pts).unwrap();
        assert!(!e.indeterminate, "{e:?}");
        assert!((e.limit - PI).abs() < 1e-4, "{e:?}");
    }

    #[test]
    fn constant_tail() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (-(i as f64), 1.5)).collect();
        let e = extrapolate_exponential(&pts).unwrap();
        assert_eq!(e.limit, 1.5);
        assert_eq!(e.rate, 0.0);
    }

    #[test]
    fn oscillating_tail_is_indeterminate() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (-(i as f64), 1.0 + (-1f64).powi(i) * 0.1)).collect();
        assert!(extrapolate_exponential(&pts).unwrap().indeterminate);
    }

    #[test]
    fn rejects_short_or_unsorted_grids() {
        assert!(extrapolate_exponential(&[(0.0, 1.0), (-1.0, 1.0)]).is_err());
        assert!(extrapolate_exponential(&[(0.0, 1.0), (1.0, 1.0), (-1.0, 1.0), (-2.0, 1.0)]).is_err());
    }

    #[test]
    fn inverse_power_is_exact_on_its_model() {
        let f = |x: f64| 2.0 + 3.0 / x - 1.0 / (x * x);
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0].iter().map(|&x| (x, f(x))).collect();
        assert!((extrapolate_inverse_power(&pts).unwrap() - 2.0).abs() < 1e-12);
    }
}
