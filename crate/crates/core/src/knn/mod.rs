//! Metric geometry shared by every estimator: ℓ2/ℓ∞ distances, point sets,
//! a static k-d tree, k-th neighbor distances and radius range counts.

mod kdtree;
mod stats;

pub use kdtree::{KdTree, Neighbor, BRUTE_FORCE_BELOW};
pub use stats::{jitter, neighbor_stats, NeighborStats, JITTER_SCALE};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The two norms supported by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    /// ℓ2
    Euclidean,
    /// ℓ∞
    Max,
}

/// Whether a radius query counts points exactly on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    /// `d <= r`
    #[default]
    Inclusive,
    /// `d < r`
    Exclusive,
}

impl Strictness {
    #[inline]
    pub fn admits(self, distance: f64, radius: f64) -> bool {
        match self {
            Strictness::Inclusive => distance <= radius,
            Strictness::Exclusive => distance < radius,
        }
    }
}

#[inline]
pub(crate) fn distance(norm: Norm, a: &[f64], b: &[f64]) -> f64 {
    match norm {
        Norm::Max => a.iter().zip(b).fold(0.0, |acc, (x, y)| f64::max(acc, (x - y).abs())),
        Norm::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
    }
}

/// `‖a - b‖_p` for `p ∈ {2, ∞}`.
pub fn lp_distance(a: &[f64], b: &[f64], norm: Norm) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(distance(norm, a, b))
}

/// A set of points of common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    dim: usize,
}

impl PointSet {
    /// Build from row-major storage. `data.len()` must be a multiple of `dim`.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be positive"));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch { expected: dim, got: data.len() % dim });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(PointSet { data, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        PointSet::from_flat(data, dim)
    }

    /// One-dimensional points.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        PointSet::from_flat(values.to_vec(), 1)
    }

    /// Concatenate the coordinates of two sets row by row.
    pub fn concat(a: &PointSet, b: &PointSet) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { x: a.len(), y: b.len() });
        }
        let mut data = Vec::with_capacity(a.len() * (a.dim + b.dim));
        for i in 0..a.len() {
            data.extend_from_slice(a.row(i));
            data.extend_from_slice(b.row(i));
        }
        Ok(PointSet { data, dim: a.dim + b.dim })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Keep only the listed coordinates, in the listed order.
    pub fn project(&self, coords: &[usize]) -> Result<PointSet> {
        if coords.is_empty() {
            return Err(Error::invalid("projection onto zero coordinates"));
        }
        if let Some(&c) = coords.iter().find(|&&c| c >= self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, got: c + 1 });
        }
        let mut data = Vec::with_capacity(self.len() * coords.len());
        for row in self.rows() {
            data.extend(coords.iter().map(|&c| row[c]));
        }
        Ok(PointSet { data, dim: coords.len() })
    }

    /// Apply `f` to every coordinate.
    pub fn map(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<PointSet> {
        let dim = self.dim;
        let data = self.data.iter().enumerate().map(|(i, &v)| f(i % dim, v)).collect();
        PointSet::from_flat(data, dim)
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::InsufficientData { needed: k, got: n });
    }
    Ok(())
}

/// Distance from each point to its k-th nearest other point.
pub fn knn_distance(set: &PointSet, k: usize, norm: Norm) -> Result<Vec<f64>> {
    check_k(k, set.len())?;
    let tree = KdTree::new(set, norm);
    Ok((0..set.len())
        .map(|i| tree.kth_neighbor(set.row(i), k, |j| j == i).distance)
        .collect())
}

/// Number of points `j != center` within `radius` of point `center`.
pub fn range_count(
    set: &PointSet,
    center: usize,
    radius: f64,
    norm: Norm,
    strictness: Strictness,
) -> Result<usize> {
    if center >= set.len() {
        return Err(Error::invalid(format!("center {center} out of range for {} points", set.len())));
    }
    if !(radius >= 0.0) {
        return Err(Error::invalid(format!("radius must be non-negative, got {radius}")));
    }
    let tree = KdTree::new(set, norm);
    let all = tree.count_within(set.row(center), radius, strictness);
    Ok(all - usize::from(strictness.admits(0.0, radius)))
}
