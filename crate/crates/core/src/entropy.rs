//! k-NN differential entropy estimators.

use crate::knn::{jitter, knn_distance, Norm, PointSet};
use crate::special::{digamma_int, ln_unit_ball_volume};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    /// Nats.
    pub value: f64,
    pub n_samples: usize,
    pub k: usize,
    pub norm: Norm,
}

/// Mean of `log ρ_k` over all points, jittering once if any radius is zero.
fn mean_log_radius(set: &PointSet, k: usize, norm: Norm) -> Result<f64> {
    let mut rho = knn_distance(set, k, norm)?;
    if rho.iter().any(|&r| r <= 0.0) {
        rho = knn_distance(&jitter(set), k, norm)?;
        if rho.iter().any(|&r| r <= 0.0) {
            return Err(Error::Numerical("zero k-NN distance persists after jitter".into()));
        }
    }
    // summed in sorted order so the result does not depend on sample order
    rho.sort_unstable_by(f64::total_cmp);
    Ok(rho.iter().map(|r| r.ln()).sum::<f64>() / rho.len() as f64)
}

fn estimate(set: &PointSet, k: usize, norm: Norm, correction: f64) -> Result<EntropyEstimate> {
    let n = set.len();
    let d = set.dim() as f64;
    let mean_log = mean_log_radius(set, k, norm)?;
    let value = (n as f64).ln() - correction + ln_unit_ball_volume(set.dim(), norm) + d * mean_log;
    Ok(EntropyEstimate { value, n_samples: n, k, norm })
}

/// Plug-in estimate `(1/N) Σ log(N c ρ^d / k)` from the local uniform
/// density approximation. Biased for fixed `k`.
pub fn entropy_naive(set: &PointSet, k: usize, norm: Norm) -> Result<EntropyEstimate> {
    estimate(set, k, norm, (k as f64).ln())
}

/// Kozachenko-Leonenko estimate `log N - ψ(k) + log c + (d/N) Σ log ρ`.
pub fn entropy_kl(set: &PointSet, k: usize, norm: Norm) -> Result<EntropyEstimate> {
    estimate(set, k, norm, digamma_int(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn gaussian_set(seed: u64, n: usize, dim: usize) -> PointSet {
        let mut s = Stream::new(seed);
        PointSet::from_flat(s.gaussians(n * dim), dim).unwrap()
    }

    #[test]
    fn naive_and_kl_differ_by_bias_term() {
        let set = gaussian_set(1, 400, 2);
        for k in [1, 3, 8] {
            for norm in [Norm::Max, Norm::Euclidean] {
                let naive = entropy_naive(&set, k, norm).unwrap().value;
                let kl = entropy_kl(&set, k, norm).unwrap().value;
                let expect = digamma_int(k) - (k as f64).ln();
                assert!((naive - kl - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_invariant() {
        let set = gaussian_set(2, 500, 3);
        let shifted = set.map(|c, v| v + [1.0, 2.0, 3.0][c]).unwrap();
        // shifting by exact powers of two keeps every coordinate difference exact
        let pow2 = set.map(|_, v| v + 1024.0).unwrap();
        let a = entropy_kl(&set, 5, Norm::Euclidean).unwrap().value;
        let b = entropy_kl(&shifted, 5, Norm::Euclidean).unwrap().value;
        let c = entropy_kl(&pow2, 5, Norm::Euclidean).unwrap().value;
        assert!((a - b).abs() < 1e-10);
        assert!((a - c).abs() < 1e-10);
    }

    #[test]
    fn scaling_law() {
        let set = gaussian_set(3, 2000, 2);
        let scaled = set.map(|_, v| 3.0 * v).unwrap();
        let a = entropy_kl(&set, 8, Norm::Max).unwrap().value;
        let b = entropy_kl(&scaled, 8, Norm::Max).unwrap().value;
        assert!((b - a - 2.0 * 3f64.ln()).abs() < 1e-9);
        let na = entropy_naive(&set, 8, Norm::Max).unwrap().value;
        let nb = entropy_naive(&scaled, 8, Norm::Max).unwrap().value;
        assert!((nb - na - 2.0 * 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn permutation_invariant() {
        let set = gaussian_set(4, 300, 2);
        let rows: Vec<Vec<f64>> = set.rows().rev().map(|r| r.to_vec()).collect();
        let rev = PointSet::from_rows(&rows).unwrap();
        assert_eq!(
            entropy_kl(&set, 4, Norm::Euclidean).unwrap().value,
            entropy_kl(&rev, 4, Norm::Euclidean).unwrap().value
        );
    }

    #[test]
    fn duplicates_stay_finite() {
        let mut values: Vec<f64> = (0..50).map(|i| (i / 3) as f64).collect();
        values.push(0.0);
        let set = PointSet::from_scalars(&values).unwrap();
        let h = entropy_kl(&set, 2, Norm::Max).unwrap();
        assert!(h.value.is_finite());
    }

    #[test]
    fn insufficient_samples() {
        let set = PointSet::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        assert!(entropy_kl(&set, 3, Norm::Max).is_err());
    }
}
