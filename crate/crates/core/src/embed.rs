//! Paired series and their delay embedding.

use serde::{Deserialize, Serialize};

use crate::knn::PointSet;
use crate::{Error, Result};

/// Two aligned real-valued sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Seed that generated the pair, if synthetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SeriesPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { x: x.len(), y: y.len() });
        }
        if let Some(v) = x.iter().chain(&y).find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample {v}")));
        }
        Ok(SeriesPair { x, y, seed: None })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The same pair with the roles of X and Y exchanged.
    pub fn swapped(&self) -> SeriesPair {
        SeriesPair { x: self.y.clone(), y: self.x.clone(), seed: self.seed }
    }
}

/// Coordinate subspaces of an embedded row `[X⁻, Y⁻, Y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subspace {
    /// `Y⁻`, dimension m
    TargetPast,
    /// `(Y⁻, Y)`, dimension m + 1
    TargetPastAndPresent,
    /// `(Y⁻, X⁻)`, dimension 2m
    BothPasts,
    /// `(X⁻, Y⁻, Y)`, dimension 2m + 1
    Joint,
}

impl Subspace {
    pub const ALL: [Subspace; 4] =
        [Subspace::TargetPast, Subspace::TargetPastAndPresent, Subspace::BothPasts, Subspace::Joint];

    /// Coordinate indices within a joint row for order `m`.
    pub fn coords(self, m: usize) -> Vec<usize> {
        match self {
            Subspace::TargetPast => (m..2 * m).collect(),
            Subspace::TargetPastAndPresent => (m..2 * m + 1).collect(),
            Subspace::BothPasts => (0..2 * m).collect(),
            Subspace::Joint => (0..2 * m + 1).collect(),
        }
    }

    pub fn dim(self, m: usize) -> usize {
        match self {
            Subspace::TargetPast => m,
            Subspace::TargetPastAndPresent => m + 1,
            Subspace::BothPasts => 2 * m,
            Subspace::Joint => 2 * m + 1,
        }
    }
}

/// Rows `(X_{t-m..t-1}, Y_{t-m..t-1}, Y_t)` for every `t >= m`.
#[derive(Debug, Clone)]
pub struct EmbeddedDataset {
    pub joint: PointSet,
    pub m: usize,
    /// `index_map[row]` is the time index `t` of the row's present sample.
    pub index_map: Vec<usize>,
}

impl EmbeddedDataset {
    pub fn n_effective(&self) -> usize {
        self.index_map.len()
    }

    pub fn project(&self, subspace: Subspace) -> PointSet {
        self.joint
            .project(&subspace.coords(self.m))
            .expect("subspace coordinates lie inside the joint row")
    }

    /// `X⁻` block of a row.
    pub fn source_past(&self, row: usize) -> &[f64] {
        &self.joint.row(row)[..self.m]
    }

    /// `Y⁻` block of a row.
    pub fn target_past(&self, row: usize) -> &[f64] {
        &self.joint.row(row)[self.m..2 * self.m]
    }

    /// `Y_t` of a row.
    pub fn response(&self, row: usize) -> f64 {
        self.joint.row(row)[2 * self.m]
    }
}

/// Delay-embed `pair` with order `m`; requires `N > m + k`.
pub fn embed(pair: &SeriesPair, m: usize, k: usize) -> Result<EmbeddedDataset> {
    if pair.x.len() != pair.y.len() {
        return Err(Error::LengthMismatch { x: pair.x.len(), y: pair.y.len() });
    }
    if m == 0 {
        return Err(Error::invalid("Markov order must be at least 1"));
    }
    let n = pair.len();
    if n <= m + k {
        return Err(Error::InsufficientData { needed: m + k, got: n });
    }
    let dim = 2 * m + 1;
    let mut data = Vec::with_capacity((n - m) * dim);
    for t in m..n {
        data.extend_from_slice(&pair.x[t - m..t]);
        data.extend_from_slice(&pair.y[t - m..t]);
        data.push(pair.y[t]);
    }
    Ok(EmbeddedDataset { joint: PointSet::from_flat(data, dim)?, m, index_map: (m..n).collect() })
}
