//! Special functions used by the estimators.

use crate::knn::Norm;
use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Digamma function `ψ(x)` for `x > 0`.
///
/// Shifts the argument above 10 with `ψ(x) = ψ(x + 1) - 1/x` and then sums
/// the asymptotic expansion in Bernoulli numbers. Absolute error is below
/// `1e-13` for `x >= 1`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("digamma requires a positive finite argument, got {x}")));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // B2/2, B4/4, B6/6, ... for the series -Σ B_{2n} / (2n x^{2n})
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    shift + x.ln() - 0.5 * inv - series
}

/// `ψ(n)` for positive integers, via harmonic numbers for small `n`.
pub(crate) fn digamma_int(n: usize) -> f64 {
    debug_assert!(n > 0);
    if n <= 64 {
        (1..n).map(|j| 1.0 / j as f64).sum::<f64>() - EULER_GAMMA
    } else {
        digamma_unchecked(n as f64)
    }
}

/// Lookup table of `ψ(1..=n)`, used when the same integer arguments are
/// evaluated thousands of times.
#[derive(Debug, Clone)]
pub(crate) struct DigammaTable(Vec<f64>);

impl DigammaTable {
    pub(crate) fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(f64::NAN);
        for n in 1..=max {
            table.push(digamma_int(n));
        }
        DigammaTable(table)
    }

    #[inline]
    pub(crate) fn get(&self, n: usize) -> f64 {
        match self.0.get(n) {
            Some(v) if n > 0 => *v,
            _ => digamma_int(n),
        }
    }
}

/// `ln Γ(1 + h/2)` for a non-negative integer `h`, by the recurrence
/// `Γ(t + 1) = t Γ(t)` down to `Γ(1) = 1` or `Γ(1/2) = √π`.
fn ln_gamma_one_plus_half(h: usize) -> f64 {
    let mut acc = if h % 2 == 1 { 0.5 * std::f64::consts::PI.ln() } else { 0.0 };
    let mut t = h as f64 / 2.0;
    while t > 0.0 {
        acc += t.ln();
        t -= 1.0;
    }
    acc
}

/// Volume of the unit ball in `d` dimensions under `norm`:
/// `c(d, p) = 2^d Γ(1 + 1/p)^d / Γ(1 + d/p)`, and `2^d` for the max norm.
pub fn unit_ball_volume(d: usize, norm: Norm) -> f64 {
    ln_unit_ball_volume(d, norm).exp()
}

/// `log c(d, p)`; avoids overflow for large `d`.
pub fn ln_unit_ball_volume(d: usize, norm: Norm) -> f64 {
    let d = d as f64;
    match norm {
        Norm::Max => d * std::f64::consts::LN_2,
        // Γ(1 + 1/2) = √π / 2, so c(d, 2) = π^{d/2} / Γ(1 + d/2)
        Norm::Euclidean => 0.5 * d * std::f64::consts::PI.ln() - ln_gamma_one_plus_half(d as usize),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: ψ(x) = -γ + Σ_{n≥0} (1/(n+1) - 1/(n+x)), summed
    /// with a tail correction from the asymptotic remainder.
    fn digamma_series(x: f64) -> f64 {
        let terms = 2_000_000usize;
        let mut s = 0.0;
        for n in (0..terms).rev() {
            let n = n as f64;
            s += 1.0 / (n + 1.0) - 1.0 / (n + x);
        }
        // tail Σ_{n≥T} (x-1)/((n+1)(n+x)) ≈ (x-1)/T
        -EULER_GAMMA + s + (x - 1.0) / terms as f64
    }

    #[test]
    fn digamma_known_values() {
        assert!((digamma(1.0).unwrap() + 0.577_215_664_9).abs() < 1e-10);
        assert!((digamma(2.0).unwrap() - 0.422_784_335_1).abs() < 1e-10);
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(0.5).unwrap() - (-EULER_GAMMA - 2.0 * std::f64::consts::LN_2)).abs() < 1e-13);
    }

    #[test]
    fn digamma_matches_series_oracle() {
        for &x in &[1.0, 1.5, 2.0, 3.25, 7.0, 8.0, 9.0, 12.5, 40.0] {
            let oracle = digamma_series(x);
            assert!((digamma(x).unwrap() - oracle).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn digamma_recurrence_and_asymptote() {
        for i in 1..200 {
            let x = 0.37 * i as f64;
            let lhs = digamma(x + 1.0).unwrap();
            let rhs = digamma(x).unwrap() + 1.0 / x;
            assert!((lhs - rhs).abs() < 1e-12, "x={x}");
        }
        assert!((digamma(1000.0).unwrap() - 1000f64.ln()).abs() < 6e-4);
    }

    #[test]
    fn digamma_int_agrees_with_real() {
        for n in 1..300 {
            assert!((digamma_int(n) - digamma_unchecked(n as f64)).abs() < 1e-12, "n={n}");
        }
        let table = DigammaTable::new(50);
        assert_eq!(table.get(8), digamma_int(8));
        assert_eq!(table.get(500), digamma_int(500));
    }

    #[test]
    fn digamma_rejects_non_positive() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.0).is_err());
        assert!(digamma(f64::NAN).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1, Norm::Euclidean) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2, Norm::Euclidean) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3, Norm::Euclidean) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3, Norm::Max) - 8.0).abs() < 1e-12);
        for d in 1..12 {
            assert!((unit_ball_volume(d, Norm::Max) - 2f64.powi(d as i32)).abs() < 1e-12);
        }
        // c(4, 2) = π²/2
        let c4 = std::f64::consts::PI.powi(2) / 2.0;
        assert!((unit_ball_volume(4, Norm::Euclidean) - c4).abs() < 1e-12);
    }
}
