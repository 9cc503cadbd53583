use std::cmp::Ordering;

use super::{Norm, PointSet, Strictness};
#[cfg(test)]
use super::distance;

/// Sets smaller than this are searched with a single linear scan.
pub const BRUTE_FORCE_BELOW: usize = 256;

const LEAF_SIZE: usize = 12;
const NO_CHILD: u32 = u32::MAX;

/// A neighbor found by a query: its distance and original row index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub distance: f64,
    pub index: usize,
}

impl Neighbor {
    /// Distance first, then row index: ties at equal distance resolve to the
    /// lower row.
    #[inline]
    fn precedes(&self, other: &Neighbor) -> bool {
        match self.distance.partial_cmp(&other.distance) {
            Some(Ordering::Less) => true,
            Some(Ordering::Equal) => self.index < other.index,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

/// Static k-d tree over a [`PointSet`] for one norm.
///
/// Points are copied into tree order so that leaves are contiguous. Every
/// node keeps its bounding box; searches prune with the box-to-query
/// distance and range counts add whole subtrees whose box lies inside the
/// query ball.
#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    norm: Norm,
    points: Vec<f64>,
    ids: Vec<u32>,
    nodes: Vec<Node>,
    bounds: Vec<f64>,
}

impl KdTree {
    pub fn new(set: &PointSet, norm: Norm) -> Self {
        let n = set.len();
        let dim = set.dim();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut tree = KdTree {
            dim,
            norm,
            points: Vec::with_capacity(n * dim),
            ids: Vec::with_capacity(n),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            bounds: Vec::new(),
        };
        if n > 0 {
            let leaf = if n < BRUTE_FORCE_BELOW { n } else { LEAF_SIZE };
            tree.build(set, &mut order, 0, leaf);
        }
        for &id in &order {
            tree.points.extend_from_slice(set.row(id as usize));
        }
        tree.ids = order;
        tree
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    fn build(&mut self, set: &PointSet, order: &mut [u32], offset: usize, leaf: usize) -> u32 {
        let dim = self.dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &id in order.iter() {
            for (c, &v) in set.row(id as usize).iter().enumerate() {
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
        let node_id = self.nodes.len() as u32;
        self.nodes.push(Node {
            start: offset as u32,
            end: (offset + order.len()) as u32,
            left: NO_CHILD,
            right: NO_CHILD,
        });
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);

        if order.len() <= leaf {
            return node_id;
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[axis] <= lo[axis] {
            // all points coincide
            return node_id;
        }
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            set.row(a as usize)[axis]
                .total_cmp(&set.row(b as usize)[axis])
                .then(a.cmp(&b))
        });
        let (left, right) = order.split_at_mut(mid);
        let l = self.build(set, left, offset, leaf);
        let r = self.build(set, right, offset + mid, leaf);
        self.nodes[node_id as usize].left = l;
        self.nodes[node_id as usize].right = r;
        node_id
    }

    #[inline]
    fn point(&self, slot: usize) -> &[f64] {
        &self.points[slot * self.dim..(slot + 1) * self.dim]
    }

    /// The `k` nearest points to `query` not rejected by `exclude`, sorted by
    /// (distance, row index). Returns fewer than `k` when not enough points
    /// pass the filter.
    pub fn nearest(&self, query: &[f64], k: usize, exclude: impl Fn(usize) -> bool) -> Vec<Neighbor> {
        debug_assert_eq!(query.len(), self.dim);
        let mut best = Vec::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            match self.norm {
                Norm::Max => self.search::<MaxMetric>(0, query, k, &exclude, &mut best),
                Norm::Euclidean => self.search::<EuclideanMetric>(0, query, k, &exclude, &mut best),
            }
        }
        best
    }

    /// The k-th entry of [`KdTree::nearest`].
    ///
    /// # Panics
    /// If fewer than `k` points pass `exclude`.
    pub fn kth_neighbor(&self, query: &[f64], k: usize, exclude: impl Fn(usize) -> bool) -> Neighbor {
        let best = self.nearest(query, k, exclude);
        assert!(best.len() == k, "fewer than k={k} candidate neighbors");
        best[k - 1]
    }

    fn search<M: Metric>(
        &self,
        node: usize,
        q: &[f64],
        k: usize,
        exclude: &impl Fn(usize) -> bool,
        best: &mut Vec<Neighbor>,
    ) {
        let Node { start, end, left, right } = self.nodes[node];
        if left == NO_CHILD {
            for slot in start as usize..end as usize {
                let index = self.ids[slot] as usize;
                let p = self.point(slot);
                let cand = if best.len() < k {
                    Neighbor { distance: M::distance(q, p), index }
                } else {
                    let worst = best[k - 1];
                    let d = M::distance(q, p);
                    if d > worst.distance || (d == worst.distance && index > worst.index) {
                        continue;
                    }
                    Neighbor { distance: d, index }
                };
                if exclude(index) {
                    continue;
                }
                let pos = best.iter().position(|b| cand.precedes(b)).unwrap_or(best.len());
                best.insert(pos, cand);
                if best.len() > k {
                    best.pop();
                }
            }
            return;
        }
        let dl = self.bounds_to::<M>(left as usize, q).0;
        let dr = self.bounds_to::<M>(right as usize, q).0;
        let (first, d_first, second, d_second) =
            if dl <= dr { (left, dl, right, dr) } else { (right, dr, left, dl) };
        // `<=` keeps equal-distance candidates reachable for the index tie-break.
        if best.len() < k || d_first <= best[k - 1].distance {
            self.search::<M>(first as usize, q, k, exclude, best);
        }
        if best.len() < k || d_second <= best[k - 1].distance {
            self.search::<M>(second as usize, q, k, exclude, best);
        }
    }

    /// Lower and upper bounds on the distance from `q` to any point in the
    /// node's bounding box.
    ///
    /// Both bounds are computed with the same per-coordinate rounding as the
    /// point distances, so a point's computed distance never falls outside
    /// them.
    #[inline]
    fn bounds_to<M: Metric>(&self, node: usize, q: &[f64]) -> (f64, f64) {
        let base = node * 2 * self.dim;
        let lo = &self.bounds[base..base + self.dim];
        let hi = &self.bounds[base + self.dim..base + 2 * self.dim];
        let mut near = M::ZERO;
        let mut far = M::ZERO;
        for c in 0..self.dim {
            let x = q[c];
            let below = x - lo[c];
            let above = hi[c] - x;
            let gap = if below < 0.0 {
                -below
            } else if above < 0.0 {
                -above
            } else {
                0.0
            };
            near = M::accumulate(near, gap);
            far = M::accumulate(far, f64::max(below.abs(), above.abs()));
        }
        (M::finish(near), M::finish(far))
    }

    /// Number of points (including any copy of `query` itself) whose
    /// distance to `query` is admitted by `strictness` against `radius`.
    pub fn count_within(&self, query: &[f64], radius: f64, strictness: Strictness) -> usize {
        debug_assert_eq!(query.len(), self.dim);
        if self.nodes.is_empty() {
            return 0;
        }
        match self.norm {
            Norm::Max => self.count::<MaxMetric>(0, query, radius, strictness),
            Norm::Euclidean => self.count::<EuclideanMetric>(0, query, radius, strictness),
        }
    }

    fn count<M: Metric>(&self, node: usize, q: &[f64], radius: f64, strictness: Strictness) -> usize {
        let (near, far) = self.bounds_to::<M>(node, q);
        if !strictness.admits(near, radius) {
            return 0;
        }
        let Node { start, end, left, right } = self.nodes[node];
        if strictness.admits(far, radius) {
            return (end - start) as usize;
        }
        if left == NO_CHILD {
            return (start as usize..end as usize)
                .filter(|&slot| strictness.admits(M::distance(q, self.point(slot)), radius))
                .count();
        }
        self.count::<M>(left as usize, q, radius, strictness)
            + self.count::<M>(right as usize, q, radius, strictness)
    }
}

/// Norm-specific arithmetic, monomorphized into the search loops. The
/// accumulate/finish pair must reproduce [`distance`] bit for bit.
trait Metric {
    const ZERO: f64 = 0.0;
    fn accumulate(acc: f64, diff_abs: f64) -> f64;
    fn finish(acc: f64) -> f64;

    #[inline]
    fn distance(a: &[f64], b: &[f64]) -> f64 {
        let mut acc = Self::ZERO;
        for (x, y) in a.iter().zip(b) {
            acc = Self::accumulate(acc, (x - y).abs());
        }
        Self::finish(acc)
    }
}

struct MaxMetric;
struct EuclideanMetric;

impl Metric for MaxMetric {
    #[inline(always)]
    fn accumulate(acc: f64, diff_abs: f64) -> f64 {
        f64::max(acc, diff_abs)
    }
    #[inline(always)]
    fn finish(acc: f64) -> f64 {
        acc
    }
}

impl Metric for EuclideanMetric {
    #[inline(always)]
    fn accumulate(acc: f64, diff_abs: f64) -> f64 {
        acc + diff_abs * diff_abs
    }
    #[inline(always)]
    fn finish(acc: f64) -> f64 {
        acc.sqrt()
    }
}
