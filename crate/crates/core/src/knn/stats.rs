use std::collections::HashMap;

use super::{KdTree, Norm, PointSet, Strictness};
use crate::rng::Stream;
use crate::{Error, Result};

/// Relative magnitude of the tie-breaking jitter, per coordinate standard
/// deviation.
pub const JITTER_SCALE: f64 = 1e-10;

const JITTER_SEED: u64 = 0x6A17_7E55_D1C0_FFEE;

/// Joint k-NN radii plus, for each requested coordinate subspace, how many
/// other rows fall inside that radius under the projected metric.
#[derive(Debug, Clone)]
pub struct NeighborStats {
    /// Distance from each row to its k-th nearest neighbor in the full space.
    pub rho: Vec<f64>,
    /// Row index of that k-th neighbor.
    pub kth: Vec<usize>,
    /// `counts[s][i]`: rows `j != i` within `rho[i]` of row `i` in subspace `s`.
    pub counts: Vec<Vec<usize>>,
    /// Whether duplicate rows forced a jittered copy of the data.
    pub jittered: bool,
}

/// Add seeded Gaussian noise of size `JITTER_SCALE` times each coordinate's
/// standard deviation (or absolute `JITTER_SCALE` for constant coordinates).
///
/// A row's noise is drawn from a stream keyed by its coordinates and by how
/// many identical rows precede it, so permuting the input permutes the
/// output.
pub fn jitter(points: &PointSet) -> PointSet {
    let n = points.len() as f64;
    let dim = points.dim();
    let scale: Vec<f64> = (0..dim)
        .map(|c| {
            let mut column: Vec<f64> = points.rows().map(|r| r[c]).collect();
            column.sort_by(f64::total_cmp);
            let mean = column.iter().sum::<f64>() / n;
            let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if var > 0.0 { JITTER_SCALE * var.sqrt() } else { JITTER_SCALE }
        })
        .collect();
    let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut data = Vec::with_capacity(points.len() * dim);
    for row in points.rows() {
        let mut labels: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        let occurrence = seen.entry(labels.clone()).or_insert(0);
        labels.push(*occurrence);
        *occurrence += 1;
        let mut stream = Stream::derived(JITTER_SEED, &labels);
        data.extend(row.iter().zip(&scale).map(|(v, s)| v + s * stream.gaussian()));
    }
    PointSet::from_flat(data, dim).expect("jitter keeps coordinates finite")
}

/// Compute [`NeighborStats`] for `points`.
///
/// Each entry of `subspaces` lists coordinate indices of `points`. If any
/// joint radius is zero (duplicate rows), the data is jittered once with
/// [`jitter`] and everything is recomputed on the jittered copy.
pub fn neighbor_stats(
    points: &PointSet,
    k: usize,
    norm: Norm,
    subspaces: &[Vec<usize>],
    strictness: Strictness,
) -> Result<NeighborStats> {
    let n = points.len();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if n <= k {
        return Err(Error::InsufficientData { needed: k, got: n });
    }

    let (rho, kth) = kth_neighbors(points, k, norm);
    if rho.iter().all(|&r| r > 0.0) {
        return finish(points, rho, kth, k, norm, subspaces, strictness, false);
    }
    let jittered = jitter(points);
    let (rho, kth) = kth_neighbors(&jittered, k, norm);
    if rho.iter().any(|&r| r <= 0.0) {
        return Err(Error::Numerical("zero k-NN distance persists after jitter".into()));
    }
    finish(&jittered, rho, kth, k, norm, subspaces, strictness, true)
}

fn kth_neighbors(points: &PointSet, k: usize, norm: Norm) -> (Vec<f64>, Vec<usize>) {
    let tree = KdTree::new(points, norm);
    (0..points.len())
        .map(|i| {
            let nb = tree.kth_neighbor(points.row(i), k, |j| j == i);
            (nb.distance, nb.index)
        })
        .unzip()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    points: &PointSet,
    rho: Vec<f64>,
    kth: Vec<usize>,
    k: usize,
    norm: Norm,
    subspaces: &[Vec<usize>],
    strictness: Strictness,
    jittered: bool,
) -> Result<NeighborStats> {
    let mut counts = Vec::with_capacity(subspaces.len());
    for coords in subspaces {
        let projected = points.project(coords)?;
        let tree = KdTree::new(&projected, norm);
        let c: Vec<usize> = (0..projected.len())
            .map(|i| {
                // rho > 0, so the row itself is always inside its own ball
                tree.count_within(projected.row(i), rho[i], strictness) - 1
            })
            .collect();
        if coords.len() == points.dim() && strictness == Strictness::Inclusive {
            debug_assert!(c.iter().all(|&v| v >= k));
        }
        counts.push(c);
    }
    Ok(NeighborStats { rho, kth, counts, jittered })
}
