//! Markov-order selection by nearest-neighbor prediction of the next sample.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::di::standardized;
use crate::embed::{EmbeddedDataset, SeriesPair};
use crate::knn::{KdTree, Neighbor, Norm, PointSet};
use crate::{Error, Result, DEFAULT_K};

/// Candidate orders tried when none are given.
pub const DEFAULT_CANDIDATES: [usize; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderMethod {
    /// Predict from the pasts of both series.
    Joint,
    /// Predict from the target's own past only.
    Ragwitz,
    /// Order supplied by the caller.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSelection {
    pub m_hat: usize,
    /// Mean squared prediction error per candidate order.
    pub losses: BTreeMap<usize, f64>,
    pub method: OrderMethod,
}

impl OrderSelection {
    pub fn fixed(m: usize) -> Self {
        OrderSelection { m_hat: m, losses: BTreeMap::new(), method: OrderMethod::Fixed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderOptions {
    pub k: usize,
    /// Weight neighbor responses by inverse distance instead of averaging.
    pub weighted: bool,
    /// Rescale each series to zero mean and unit variance first.
    pub standardize: bool,
}

impl Default for OrderOptions {
    fn default() -> Self {
        OrderOptions { k: DEFAULT_K, weighted: false, standardize: true }
    }
}

/// Predictor tuples with their responses, indexed by the time of the response.
struct Predictor {
    points: PointSet,
    responses: Vec<f64>,
    times: Vec<usize>,
    m: usize,
    tree: KdTree,
}

impl Predictor {
    /// Rows for response times `first..n`, with predictor `(X⁻, Y⁻)` or `Y⁻`.
    fn build(pair: &SeriesPair, m: usize, first: usize, use_source: bool) -> Result<Self> {
        let n = pair.len();
        debug_assert!(first >= m);
        let dim = if use_source { 2 * m } else { m };
        let mut data = Vec::with_capacity((n - first) * dim);
        for t in first..n {
            if use_source {
                data.extend_from_slice(&pair.x[t - m..t]);
            }
            data.extend_from_slice(&pair.y[t - m..t]);
        }
        let points = PointSet::from_flat(data, dim)?;
        let tree = KdTree::new(&points, Norm::Max);
        Ok(Predictor {
            points,
            responses: pair.y[first..].to_vec(),
            times: (first..n).collect(),
            m,
            tree,
        })
    }

    fn len(&self) -> usize {
        self.responses.len()
    }

    /// Neighbors of `row` whose windows `[s - m, s]` share no time index
    /// with the query window.
    fn neighbors(&self, row: usize, k: usize) -> Result<Vec<Neighbor>> {
        let t = self.times[row];
        let m = self.m;
        let overlapping = (t.saturating_sub(m)..=t + m)
            .filter(|s| *s >= self.times[0] && *s <= *self.times.last().unwrap())
            .count();
        if self.len() - overlapping < k {
            return Err(Error::InsufficientData { needed: k + overlapping, got: self.len() });
        }
        Ok(self.tree.nearest(self.points.row(row), k, |i| self.times[i].abs_diff(t) <= m))
    }

    fn predict(&self, row: usize, k: usize, weighted: bool) -> Result<f64> {
        let neighbors = self.neighbors(row, k)?;
        Ok(aggregate(&neighbors, &self.responses, weighted))
    }
}

fn aggregate(neighbors: &[Neighbor], responses: &[f64], weighted: bool) -> f64 {
    let exact: Vec<&Neighbor> = neighbors.iter().filter(|nb| nb.distance == 0.0).collect();
    if !weighted || !exact.is_empty() {
        let pool: Vec<&Neighbor> = if weighted { exact } else { neighbors.iter().collect() };
        return pool.iter().map(|nb| responses[nb.index]).sum::<f64>() / pool.len() as f64;
    }
    let (num, den) = neighbors.iter().fold((0.0, 0.0), |(num, den), nb| {
        let w = 1.0 / nb.distance;
        (num + w * responses[nb.index], den + w)
    });
    num / den
}

/// Predicts the response of `row` as the mean response of its `k` nearest
/// (max-norm) non-overlapping rows in the `(X⁻, Y⁻)` predictor space.
pub fn knn_predict_next(ds: &EmbeddedDataset, row: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if row >= ds.n_effective() {
        return Err(Error::invalid(format!("row {row} out of range")));
    }
    let m = ds.m;
    let coords: Vec<usize> = (0..2 * m).collect();
    let points = ds.joint.project(&coords)?;
    let responses: Vec<f64> = (0..ds.n_effective()).map(|i| ds.response(i)).collect();
    let tree = KdTree::new(&points, Norm::Max);
    let p = Predictor { points, responses, times: ds.index_map.clone(), m, tree };
    p.predict(row, k, false)
}

/// Selects the order minimizing the mean squared k-NN prediction error of
/// `Y`. All candidates are scored on the same response times, those at or
/// beyond the largest candidate. Ties go to the smallest order.
pub fn estimate_order(
    pair: &SeriesPair,
    candidates: &[usize],
    method: OrderMethod,
    options: OrderOptions,
) -> Result<OrderSelection> {
    let use_source = match method {
        OrderMethod::Joint => true,
        OrderMethod::Ragwitz => false,
        OrderMethod::Fixed => {
            return Err(Error::invalid("fixed order needs no estimation"));
        }
    };
    let mut candidates = candidates.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    let (Some(&lowest), Some(&highest)) = (candidates.first(), candidates.last()) else {
        return Err(Error::invalid("no candidate orders"));
    };
    if lowest == 0 {
        return Err(Error::invalid("candidate orders must be positive"));
    }
    if options.k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let needed = highest + options.k + 2;
    if pair.len() < needed {
        return Err(Error::InsufficientData { needed, got: pair.len() });
    }

    let scaled;
    let pair = if options.standardize {
        scaled = standardized(pair);
        &scaled
    } else {
        pair
    };

    let losses: Vec<(usize, f64)> = candidates
        .par_iter()
        .map(|&m| {
            let p = Predictor::build(pair, m, highest, use_source)?;
            let mut total = 0.0;
            for row in 0..p.len() {
                let e = p.responses[row] - p.predict(row, options.k, options.weighted)?;
                total += e * e;
            }
            Ok((m, total / p.len() as f64))
        })
        .collect::<Result<_>>()?;

    let mut m_hat = lowest;
    let mut best = f64::INFINITY;
    for &(m, loss) in &losses {
        if loss < best {
            best = loss;
            m_hat = m;
        }
    }
    Ok(OrderSelection { m_hat, losses: losses.into_iter().collect(), method })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::embed;
    use crate::rng::Stream;

    fn noise_pair(n: usize, seed: u64) -> SeriesPair {
        let mut s = Stream::new(seed);
        SeriesPair::new(s.gaussians(n), s.gaussians(n)).unwrap()
    }

    #[test]
    fn constant_target_predicted_exactly() {
        let mut s = Stream::new(3);
        let pair = SeriesPair::new(s.gaussians(200), vec![2.5; 200]).unwrap();
        let ds = embed(&pair, 2, 4).unwrap();
        for row in [0, 50, 197] {
            assert_eq!(knn_predict_next(&ds, row, 4).unwrap(), 2.5);
        }
    }

    #[test]
    fn three_neighbor_mean() {
        let responses = [0.0, 1.0, 2.0, 4.0, 8.0];
        let nb = |index, distance| Neighbor { distance, index };
        let picked = [nb(1, 0.5), nb(2, 0.7), nb(4, 0.9)];
        assert_eq!(aggregate(&picked, &responses, false), (1.0 + 2.0 + 8.0) / 3.0);
    }

    #[test]
    fn weighted_mean_favors_closer_rows() {
        let responses = [0.0, 10.0];
        let nb = |index, distance| Neighbor { distance, index };
        let w = aggregate(&[nb(0, 1.0), nb(1, 3.0)], &responses, true);
        assert!((w - 2.5).abs() < 1e-12);
        assert_eq!(aggregate(&[nb(0, 0.0), nb(1, 3.0)], &responses, true), 0.0);
    }

    #[test]
    fn neighbors_never_overlap_query_window() {
        let pair = noise_pair(300, 11);
        for m in [1, 3] {
            let p = Predictor::build(&pair, m, 3, true).unwrap();
            for row in 0..p.len() {
                let t = p.times[row];
                for nb in p.neighbors(row, 5).unwrap() {
                    let s = p.times[nb.index];
                    assert!(s.abs_diff(t) > m, "row {t} took overlapping row {s}");
                }
            }
        }
    }

    #[test]
    fn recovers_deterministic_lag_one_map() {
        let mut s = Stream::new(5);
        let x: Vec<f64> = (0..500).map(|_| s.uniform()).collect();
        let mut y = vec![0.0; 500];
        y[1..].copy_from_slice(&x[..499]);
        let pair = SeriesPair::new(x, y).unwrap();
        let ds = embed(&pair, 1, 8).unwrap();
        let mse = (0..ds.n_effective())
            .map(|r| (ds.response(r) - knn_predict_next(&ds, r, 8).unwrap()).powi(2))
            .sum::<f64>()
            / ds.n_effective() as f64;
        assert!(mse < 1e-3, "mse {mse}");
    }

    #[test]
    fn selection_is_the_argmin() {
        let pair = noise_pair(600, 8);
        let sel =
            estimate_order(&pair, &[3, 1, 2], OrderMethod::Joint, OrderOptions::default()).unwrap();
        assert_eq!(sel.losses.len(), 3);
        let min = sel.losses.values().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(sel.losses[&sel.m_hat], min);
        assert!(sel.losses.values().all(|l| *l >= 0.0));
    }

    #[test]
    fn constant_target_ties_to_smallest() {
        let mut s = Stream::new(1);
        let pair = SeriesPair::new(s.gaussians(300), vec![1.0; 300]).unwrap();
        let sel = estimate_order(&pair, &[4, 2, 3], OrderMethod::Ragwitz, OrderOptions::default())
            .unwrap();
        assert_eq!(sel.m_hat, 2);
        assert!(sel.losses.values().all(|l| *l == 0.0));
    }

    #[test]
    fn rejects_bad_requests() {
        let pair = noise_pair(20, 2);
        let o = OrderOptions::default();
        assert!(matches!(
            estimate_order(&pair, &[1, 15], OrderMethod::Joint, o),
            Err(Error::InsufficientData { .. })
        ));
        assert!(estimate_order(&pair, &[], OrderMethod::Joint, o).is_err());
        assert!(estimate_order(&pair, &[0, 1], OrderMethod::Joint, o).is_err());
        assert!(estimate_order(&pair, &[1], OrderMethod::Fixed, o).is_err());
    }
}
