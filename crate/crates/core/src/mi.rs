//! Mutual information estimators for paired samples.

use serde::{Deserialize, Serialize};

use crate::entropy::entropy_kl;
use crate::knn::{neighbor_stats, Norm, PointSet, Strictness};
use crate::special::{digamma_int, ln_unit_ball_volume, DigammaTable};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MiMethod {
    /// Sum of three independent Kozachenko-Leonenko entropies.
    ThreeKl,
    /// Kraskov-Stögbauer-Grassberger, max-norm balls.
    Ksg,
    /// Gao-Oh-Viswanath, Euclidean balls.
    Gov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Nats. Negative values are possible and are not clamped.
    pub value: f64,
    pub method: MiMethod,
    pub k: usize,
    pub n_samples: usize,
}

fn check_pair(x: &PointSet, y: &PointSet) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { x: x.len(), y: y.len() });
    }
    Ok(())
}

/// `ĥ(X) + ĥ(Y) - ĥ(X, Y)`, each term a separate max-norm KL estimate.
pub fn mi_3kl(x: &PointSet, y: &PointSet, k: usize) -> Result<MiEstimate> {
    check_pair(x, y)?;
    let joint = PointSet::concat(x, y)?;
    let hx = entropy_kl(x, k, Norm::Max)?.value;
    let hy = entropy_kl(y, k, Norm::Max)?.value;
    let hxy = entropy_kl(&joint, k, Norm::Max)?.value;
    Ok(MiEstimate { value: hx + hy - hxy, method: MiMethod::ThreeKl, k, n_samples: x.len() })
}

/// KSG estimate with inclusive marginal counts.
pub fn mi_ksg(x: &PointSet, y: &PointSet, k: usize) -> Result<MiEstimate> {
    mi_ksg_with(x, y, k, Strictness::Inclusive)
}

/// `ψ(k) + log N - <ψ(n_x + 1) + ψ(n_y + 1)>` with marginal counts taken
/// inside the joint max-norm k-NN radius.
pub fn mi_ksg_with(x: &PointSet, y: &PointSet, k: usize, strictness: Strictness) -> Result<MiEstimate> {
    check_pair(x, y)?;
    let n = x.len();
    let (cx, cy) = marginal_counts(x, y, k, Norm::Max, strictness)?;
    let psi = DigammaTable::new(n + 1);
    let mean = cx.iter().zip(&cy).map(|(&a, &b)| psi.get(a + 1) + psi.get(b + 1)).sum::<f64>() / n as f64;
    let value = digamma_int(k) + (n as f64).ln() - mean;
    Ok(MiEstimate { value, method: MiMethod::Ksg, k, n_samples: n })
}

/// GOV estimate with inclusive marginal counts.
pub fn mi_gov(x: &PointSet, y: &PointSet, k: usize) -> Result<MiEstimate> {
    mi_gov_with(x, y, k, Strictness::Inclusive)
}

/// `log N + ψ(k) + log(c_dx c_dy / c_{dx+dy}) - <log n_x + log n_y>` with
/// Euclidean balls. Zero counts (possible only with exclusive counting) are
/// raised to one.
pub fn mi_gov_with(x: &PointSet, y: &PointSet, k: usize, strictness: Strictness) -> Result<MiEstimate> {
    check_pair(x, y)?;
    let n = x.len();
    let (cx, cy) = marginal_counts(x, y, k, Norm::Euclidean, strictness)?;
    let mean = cx
        .iter()
        .zip(&cy)
        .map(|(&a, &b)| (a.max(1) as f64).ln() + (b.max(1) as f64).ln())
        .sum::<f64>()
        / n as f64;
    let value = (n as f64).ln() + digamma_int(k) + gov_correction(x.dim(), y.dim()) - mean;
    Ok(MiEstimate { value, method: MiMethod::Gov, k, n_samples: n })
}

/// `log(c_{dx,2} c_{dy,2} / c_{dx+dy,2})`.
pub fn gov_correction(dx: usize, dy: usize) -> f64 {
    ln_unit_ball_volume(dx, Norm::Euclidean) + ln_unit_ball_volume(dy, Norm::Euclidean)
        - ln_unit_ball_volume(dx + dy, Norm::Euclidean)
}

fn marginal_counts(
    x: &PointSet,
    y: &PointSet,
    k: usize,
    norm: Norm,
    strictness: Strictness,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let joint = PointSet::concat(x, y)?;
    let dx = x.dim();
    let subspaces = [(0..dx).collect(), (dx..dx + y.dim()).collect()];
    let mut stats = neighbor_stats(&joint, k, norm, &subspaces, strictness)?;
    let cy = stats.counts.pop().expect("two subspaces");
    let cx = stats.counts.pop().expect("two subspaces");
    Ok((cx, cy))
}
