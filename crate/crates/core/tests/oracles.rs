//! Cross-checks against independent, deliberately naive implementations.

use std::collections::BTreeSet;

use rand::Rng;

use clustax::counterexamples::{two_halves_instance, two_halves_minimal_n, TWO_HALVES_PINNED_N};
use clustax::partition::MAX_ENUMERATION_N;
use clustax::sampling::{random_distinct_instance, random_tied_instance, rng_for};
use clustax::{
    enumerate_partitions, kruskal_mst, min_sum_exact, min_sum_objective, path_distance,
    single_linkage, DistanceFunction, Partitioning, Weight,
};

fn stirling2(n: usize, k: usize) -> u64 {
    let mut s = vec![vec![0u64; k + 1]; n + 1];
    s[0][0] = 1;
    for i in 1..=n {
        for j in 1..=k.min(i) {
            s[i][j] = j as u64 * s[i - 1][j] + s[i - 1][j - 1];
        }
    }
    s[n][k]
}

#[test]
fn partition_counts_follow_the_stirling_recurrence() {
    for n in 1..=10 {
        for k in 1..=n {
            let count = enumerate_partitions(n, k).unwrap().count() as u64;
            assert_eq!(count, stirling2(n, k), "S({n}, {k})");
        }
    }
    assert_eq!(stirling2(12, 6), 1_323_652);
    assert!(enumerate_partitions(MAX_ENUMERATION_N + 1, 2).is_err());
}

#[test]
fn enumeration_matches_all_label_vectors() {
    for n in 1..=6 {
        for k in 1..=n {
            let mut brute = BTreeSet::new();
            let mut labels = vec![0u32; n];
            loop {
                let used: BTreeSet<u32> = labels.iter().copied().collect();
                if used.len() == k {
                    brute.insert(Partitioning::from_labels(&labels).unwrap());
                }
                let mut pos = 0;
                while pos < n && labels[pos] + 1 == k as u32 {
                    labels[pos] = 0;
                    pos += 1;
                }
                if pos == n {
                    break;
                }
                labels[pos] += 1;
            }
            let listed: Vec<Partitioning> = enumerate_partitions(n, k).unwrap().collect();
            let mut sorted = listed.clone();
            sorted.sort();
            assert_eq!(listed, sorted, "enumeration order for n = {n}, k = {k}");
            assert_eq!(listed.into_iter().collect::<BTreeSet<_>>(), brute);
        }
    }
}

/// Minimum spanning weight over every acyclic `(n - 1)`-subset of edges.
fn brute_mst_weight(d: &DistanceFunction) -> Weight {
    let edges = d.edges();
    let n = d.n();
    let mut best: Option<Weight> = None;
    for mask in 0u32..(1 << edges.len()) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut comp: Vec<usize> = (0..=n).collect();
        let mut acyclic = true;
        let mut total = Weight::zero();
        for (idx, e) in edges.iter().enumerate() {
            if mask & (1 << idx) == 0 {
                continue;
            }
            let (a, b) = (comp[e.i], comp[e.j]);
            if a == b {
                acyclic = false;
                break;
            }
            for c in comp.iter_mut() {
                if *c == b {
                    *c = a;
                }
            }
            total = total + e.weight;
        }
        if acyclic && best.is_none_or(|b| total < b) {
            best = Some(total);
        }
    }
    best.unwrap()
}

#[test]
fn kruskal_matches_exhaustive_spanning_trees() {
    for trial in 0..300u64 {
        let mut rng = rng_for(21, trial);
        let n = rng.gen_range(2..=5);
        let d = if trial % 2 == 0 {
            random_distinct_instance(n, &mut rng)
        } else {
            random_tied_instance(n, &mut rng)
        };
        assert_eq!(
            kruskal_mst(&d).total_weight(),
            brute_mst_weight(&d),
            "{d:?}"
        );
    }
}

/// Repeated relaxation `P[i][j] = min(P[i][j], max(P[i][m], P[m][j]))`.
fn minimax_closure(d: &DistanceFunction) -> Vec<Vec<Weight>> {
    let n = d.n();
    let mut p = d.to_matrix();
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let via = p[i][m].max(p[m][j]);
                    if via < p[i][j] {
                        p[i][j] = via;
                    }
                }
            }
        }
    }
    p
}

#[test]
fn path_distance_matches_minimax_closure() {
    for trial in 0..300u64 {
        let mut rng = rng_for(22, trial);
        let n = rng.gen_range(2..=10);
        let d = if trial % 2 == 0 {
            random_distinct_instance(n, &mut rng)
        } else {
            random_tied_instance(n, &mut rng)
        };
        let p = path_distance(&d);
        let oracle = minimax_closure(&d);
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    assert_eq!(p.get(i, j), oracle[i - 1][j - 1], "({i}, {j}) in {d:?}");
                }
            }
        }
    }
}

/// Merge the two clusters at minimum single-link distance until `k` remain.
fn naive_single_linkage(d: &DistanceFunction, k: usize) -> Partitioning {
    let mut clusters: Vec<Vec<usize>> = (1..=d.n()).map(|x| vec![x]).collect();
    while clusters.len() > k {
        let mut best: Option<(Weight, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let link = clusters[a]
                    .iter()
                    .flat_map(|&x| clusters[b].iter().map(move |&y| (x, y)))
                    .map(|(x, y)| d.get(x, y))
                    .min()
                    .unwrap();
                if best.is_none_or(|(w, _, _)| link < w) {
                    best = Some((link, a, b));
                }
            }
        }
        let (_, a, b) = best.unwrap();
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
    }
    Partitioning::from_blocks(d.n(), &clusters).unwrap()
}

#[test]
fn single_linkage_matches_naive_agglomeration() {
    for trial in 0..500u64 {
        let mut rng = rng_for(23, trial);
        let n = rng.gen_range(2..=9);
        let d = random_distinct_instance(n, &mut rng);
        for k in 1..=n {
            assert_eq!(
                single_linkage(&d, k).unwrap(),
                naive_single_linkage(&d, k),
                "k = {k}, {d:?}"
            );
        }
    }
}

#[test]
fn min_sum_matches_label_brute_force() {
    for trial in 0..120u64 {
        let mut rng = rng_for(24, trial);
        let n = rng.gen_range(2..=7);
        let k = rng.gen_range(1..=n);
        let d = if trial % 3 == 0 {
            random_tied_instance(n, &mut rng)
        } else {
            random_distinct_instance(n, &mut rng)
        };
        let mut best: Option<Weight> = None;
        let mut labels = vec![0u32; n];
        loop {
            if labels.iter().copied().collect::<BTreeSet<_>>().len() == k {
                let p = Partitioning::from_labels(&labels).unwrap();
                let obj = min_sum_objective(&d, &p).unwrap();
                best = Some(best.map_or(obj, |b| b.min(obj)));
            }
            let mut pos = 0;
            while pos < n && labels[pos] + 1 == k as u32 {
                labels[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
            labels[pos] += 1;
        }
        let got = min_sum_exact(&d, k).unwrap();
        assert_eq!(got.k(), k);
        assert_eq!(min_sum_objective(&d, &got).unwrap(), best.unwrap(), "{d:?}");
    }
}

#[test]
fn min_sum_breaks_ties_by_first_partition() {
    // the three even splits of four equidistant points tie at cost 2; the
    // canonically first one wins
    let d = DistanceFunction::from_fn(4, |_, _| Weight::one()).unwrap();
    let got = min_sum_exact(&d, 2).unwrap();
    let first_optimal = enumerate_partitions(4, 2)
        .unwrap()
        .find(|p| min_sum_objective(&d, p).unwrap() == min_sum_objective(&d, &got).unwrap())
        .unwrap();
    assert_eq!(got, first_optimal);
    assert_eq!(
        got,
        Partitioning::from_blocks(4, &[vec![1, 2], vec![3, 4]]).unwrap()
    );
}

#[test]
fn smallest_working_size_is_rederived() {
    let half = Weight::new(1, 2).unwrap();
    assert_eq!(two_halves_minimal_n(half).unwrap(), TWO_HALVES_PINNED_N);

    // at n = 4: {A, B} costs 3 + 1/2, the two cross splits cost 2 + 2
    let inst = two_halves_instance(4, half).unwrap();
    let halves = inst.halves();
    assert_eq!(
        min_sum_objective(&inst.d, &halves).unwrap(),
        Weight::new(7, 2).unwrap()
    );
    let cross = Partitioning::from_blocks(4, &[vec![1, 3], vec![2, 4]]).unwrap();
    assert_eq!(min_sum_objective(&inst.d, &cross).unwrap(), Weight::from(4));

    // 3 + eps < 4 for every eps in (0, 1), so the threshold never moves;
    // above it the halves stay the unique optimum
    for eps in [
        Weight::new(1, 100).unwrap(),
        half,
        Weight::new(99, 100).unwrap(),
    ] {
        assert_eq!(two_halves_minimal_n(eps).unwrap(), 4);
        for n in (4..=MAX_ENUMERATION_N).step_by(2) {
            let inst = two_halves_instance(n, eps).unwrap();
            let halves = inst.halves();
            let best = min_sum_objective(&inst.d, &halves).unwrap();
            for p in enumerate_partitions(n, 2).unwrap().filter(|p| *p != halves) {
                assert!(
                    min_sum_objective(&inst.d, &p).unwrap() > best,
                    "n = {n}, {p}"
                );
            }
        }
    }
}
