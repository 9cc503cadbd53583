//! Exhaustive-search oracles and algebraic invariants checked on random inputs.

use diknn_core::di::{estimate_di, DiOptions};
use diknn_core::embed::{embed, Subspace};
use diknn_core::knn::{neighbor_stats, KdTree};
use diknn_core::significance::{p_value, shuffle_surrogate};
use diknn_core::rng::Stream;
use diknn_core::*;
use proptest::prelude::*;

fn brute_distance(a: &[f64], b: &[f64], norm: Norm) -> f64 {
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    match norm {
        Norm::Max => diffs.fold(0.0, f64::max),
        Norm::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
    }
}

fn brute_kth(set: &PointSet, i: usize, k: usize, norm: Norm) -> f64 {
    let mut d: Vec<f64> =
        (0..set.len()).filter(|&j| j != i).map(|j| brute_distance(set.row(i), set.row(j), norm)).collect();
    d.sort_by(f64::total_cmp);
    d[k - 1]
}

fn brute_count(set: &PointSet, i: usize, radius: f64, norm: Norm, strictness: Strictness) -> usize {
    (0..set.len())
        .filter(|&j| j != i)
        .filter(|&j| {
            let d = brute_distance(set.row(i), set.row(j), norm);
            match strictness {
                Strictness::Inclusive => d <= radius,
                Strictness::Exclusive => d < radius,
            }
        })
        .count()
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Random point sets, half of them on a coarse lattice so that distance
/// ties and duplicate points are common.
fn point_set(max_n: usize) -> impl Strategy<Value = PointSet> {
    (2..=max_n, 1usize..=4, any::<bool>()).prop_flat_map(|(n, dim, lattice)| {
        let coord = if lattice {
            (0i32..12).prop_map(|v| v as f64 * 0.25).boxed()
        } else {
            (-10.0f64..10.0).boxed()
        };
        proptest::collection::vec(coord, n * dim).prop_map(move |data| PointSet::from_flat(data, dim).unwrap())
    })
}

fn norm() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::Max), Just(Norm::Euclidean)]
}

fn strictness() -> impl Strategy<Value = Strictness> {
    prop_oneof![Just(Strictness::Inclusive), Just(Strictness::Exclusive)]
}

fn series(n: usize, seed: u64) -> SeriesPair {
    let mut s = Stream::new(seed);
    let x = s.gaussians(n);
    let y = s.gaussians(n).iter().zip(&x).map(|(z, x)| 0.6 * x + z).collect();
    SeriesPair::new(x, y).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn knn_distances_match_exhaustive_search(set in point_set(500), norm in norm(), k in 1usize..=8) {
        prop_assume!(k < set.len());
        let rho = knn_distance(&set, k, norm).unwrap();
        for (i, &r) in rho.iter().enumerate() {
            let expected = brute_kth(&set, i, k, norm);
            prop_assert!(close(r, expected), "row {i}: {r} vs {expected}");
        }
    }

    #[test]
    fn range_counts_match_linear_scan(
        set in point_set(500),
        norm in norm(),
        strictness in strictness(),
        center in any::<prop::sample::Index>(),
        other in any::<prop::sample::Index>(),
        scale in 0.0f64..1.5,
    ) {
        let i = center.index(set.len());
        // Radii equal to an actual pairwise distance exercise the boundary.
        let on_point = brute_distance(set.row(i), set.row(other.index(set.len())), norm);
        for radius in [on_point, on_point * scale, 0.0] {
            let got = range_count(&set, i, radius, norm, strictness).unwrap();
            prop_assert_eq!(got, brute_count(&set, i, radius, norm, strictness));
        }
    }

    #[test]
    fn max_norm_radius_is_max_over_partition(set in point_set(300), k in 1usize..=5, split in 0usize..4) {
        prop_assume!(k < set.len() && set.dim() >= 2);
        let split = 1 + split % (set.dim() - 1);
        let tree = KdTree::new(&set, Norm::Max);
        for i in 0..set.len() {
            let nb = tree.kth_neighbor(set.row(i), k, |j| j == i);
            let (a, b) = (set.row(i), set.row(nb.index));
            let left = brute_distance(&a[..split], &b[..split], Norm::Max);
            let right = brute_distance(&a[split..], &b[split..], Norm::Max);
            prop_assert_eq!(nb.distance, left.max(right));
        }
    }

    #[test]
    fn lattice_translation_changes_nothing(set in point_set(200), k in 1usize..=4, shift in -64i32..64) {
        prop_assume!(k < set.len());
        // Quarter-lattice points shifted by integers stay exact in binary.
        let lattice = set.map(|_, v| (v * 4.0).round() / 4.0).unwrap();
        let shifted = lattice.map(|c, v| v + (shift + c as i32) as f64).unwrap();
        for norm in [Norm::Max, Norm::Euclidean] {
            prop_assert_eq!(knn_distance(&lattice, k, norm).unwrap(), knn_distance(&shifted, k, norm).unwrap());
            let rho = knn_distance(&lattice, k, norm).unwrap();
            for i in 0..lattice.len() {
                prop_assert_eq!(
                    range_count(&lattice, i, rho[i], norm, Strictness::Inclusive).unwrap(),
                    range_count(&shifted, i, rho[i], norm, Strictness::Inclusive).unwrap()
                );
            }
        }
    }

    #[test]
    fn embedding_projections_reassemble_rows(n in 8usize..60, m in 1usize..=4, seed in any::<u64>()) {
        prop_assume!(n > m + 2);
        let pair = series(n, seed);
        let ds = embed(&pair, m, 1).unwrap();
        prop_assert_eq!(ds.n_effective(), n - m);
        let source: Vec<usize> = (0..m).collect();
        let source = ds.joint.project(&source).unwrap();
        let target = ds.project(Subspace::TargetPastAndPresent);
        let rebuilt = PointSet::concat(&source, &target).unwrap();
        prop_assert_eq!(rebuilt.as_flat(), ds.joint.as_flat());
        for (row, &t) in ds.index_map.iter().enumerate() {
            prop_assert_eq!(ds.source_past(row), &pair.x[t - m..t]);
            prop_assert_eq!(ds.target_past(row), &pair.y[t - m..t]);
            prop_assert_eq!(ds.response(row), pair.y[t]);
        }
    }

    #[test]
    fn subspace_counts_match_linear_scan(seed in any::<u64>(), m in 1usize..=3, k in 1usize..=6, norm in norm()) {
        let pair = series(101, seed);
        let ds = embed(&pair, m, k).unwrap();
        let subspaces = [
            Subspace::TargetPast.coords(m),
            Subspace::TargetPastAndPresent.coords(m),
            Subspace::BothPasts.coords(m),
            Subspace::Joint.coords(m),
        ];
        let stats = neighbor_stats(&ds.joint, k, norm, &subspaces, Strictness::Inclusive).unwrap();
        for (s, coords) in subspaces.iter().enumerate() {
            let proj = ds.joint.project(coords).unwrap();
            for i in 0..proj.len() {
                prop_assert_eq!(stats.counts[s][i], brute_count(&proj, i, stats.rho[i], norm, Strictness::Inclusive));
            }
        }
        prop_assert!(stats.counts[3].iter().all(|&c| c >= k));
    }

    #[test]
    fn di_value_equals_four_term_sum(seed in any::<u64>(), m in 1usize..=3, k in 1usize..=8) {
        let pair = series(300, seed);
        for method in [DiMethod::Ksg, DiMethod::Gov] {
            for direction in Direction::BOTH {
                let e = estimate_di(&pair, direction, method, m, DiOptions::with_k(k)).unwrap();
                prop_assert!((e.value - e.terms.combine()).abs() < 1e-10);
                prop_assert!((e.value - e.closed_form).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn entropy_is_order_free(set in point_set(200), k in 1usize..=4, seed in any::<u64>()) {
        prop_assume!(k < set.len());
        let mut rows: Vec<Vec<f64>> = set.rows().map(<[f64]>::to_vec).collect();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let shuffled = shuffle_surrogate(&order.iter().map(|&i| i as f64).collect::<Vec<_>>(), &mut Stream::new(seed));
        order = shuffled.iter().map(|&v| v as usize).collect();
        rows = order.iter().map(|&i| rows[i].clone()).collect();
        let permuted = PointSet::from_rows(&rows).unwrap();
        for norm in [Norm::Max, Norm::Euclidean] {
            let a = entropy_kl(&set, k, norm).unwrap();
            let b = entropy_kl(&permuted, k, norm).unwrap();
            prop_assert_eq!(a.value, b.value);
            let naive = entropy_naive(&set, k, norm).unwrap();
            let gap = digamma(k as f64).unwrap() - (k as f64).ln();
            prop_assert!((naive.value - a.value - gap).abs() < 1e-12);
            prop_assert!(a.value.is_finite());
        }
    }

    #[test]
    fn three_kl_is_sum_of_entropies(seed in any::<u64>(), k in 1usize..=6) {
        let pair = series(150, seed);
        let x = PointSet::from_scalars(&pair.x).unwrap();
        let y = PointSet::from_scalars(&pair.y).unwrap();
        let joint = PointSet::concat(&x, &y).unwrap();
        let mi = mi_3kl(&x, &y, k).unwrap();
        let h = |s: &PointSet| entropy_kl(s, k, Norm::Max).unwrap().value;
        prop_assert_eq!(mi.value, h(&x) + h(&y) - h(&joint));
    }

    #[test]
    fn p_value_bounds_and_monotonicity(
        surrogates in proptest::collection::vec(-1.0f64..1.0, 1..60),
        a in -1.5f64..1.5,
        b in -1.5f64..1.5,
    ) {
        let l = surrogates.len() as f64;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (p_lo, p_hi) = (p_value(lo, &surrogates), p_value(hi, &surrogates));
        prop_assert!(p_hi <= p_lo);
        for p in [p_lo, p_hi] {
            prop_assert!(p >= 1.0 / (l + 1.0) && p <= 1.0);
        }
    }

    #[test]
    fn shuffles_are_permutations(values in proptest::collection::vec(-5.0f64..5.0, 2..200), seed in any::<u64>()) {
        let mut out = shuffle_surrogate(&values, &mut Stream::new(seed));
        prop_assert_eq!(&out, &shuffle_surrogate(&values, &mut Stream::new(seed)));
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        out.sort_by(f64::total_cmp);
        prop_assert_eq!(out, sorted);
    }
}

#[test]
fn small_line_examples() {
    let set = PointSet::from_scalars(&[0.0, 1.0, 3.0]).unwrap();
    assert_eq!(knn_distance(&set, 1, Norm::Euclidean).unwrap(), vec![1.0, 1.0, 2.0]);
    assert_eq!(knn_distance(&set, 2, Norm::Euclidean).unwrap(), vec![3.0, 2.0, 3.0]);
    assert_eq!(range_count(&set, 0, 1.0, Norm::Euclidean, Strictness::Inclusive).unwrap(), 1);
    assert_eq!(range_count(&set, 0, 0.5, Norm::Euclidean, Strictness::Inclusive).unwrap(), 0);
    assert_eq!(range_count(&set, 0, 1.0, Norm::Euclidean, Strictness::Exclusive).unwrap(), 0);
    assert!(knn_distance(&set, 3, Norm::Max).is_err());
}

#[test]
fn fifty_point_three_d_example() {
    let mut s = Stream::new(50);
    let set = PointSet::from_flat(s.gaussians(150), 3).unwrap();
    let rho = knn_distance(&set, 5, Norm::Euclidean).unwrap();
    for (i, r) in rho.iter().enumerate() {
        assert_eq!(*r, brute_kth(&set, i, 5, Norm::Euclidean));
    }
}

#[test]
fn separated_clusters_count_within_cluster() {
    // Two tight clusters of 20 points each, 1000 apart.
    let mut s = Stream::new(2);
    let mut data = Vec::new();
    for offset in [0.0, 1000.0] {
        for _ in 0..20 {
            data.push(offset + s.uniform());
            data.push(offset + s.uniform());
        }
    }
    let set = PointSet::from_flat(data, 2).unwrap();
    let stats = neighbor_stats(&set, 5, Norm::Max, &[vec![0], vec![0, 1]], Strictness::Inclusive).unwrap();
    for counts in &stats.counts {
        assert!(counts.iter().all(|&c| c <= 19));
    }
    assert!(stats.counts[1].iter().all(|&c| c >= 5));
}
