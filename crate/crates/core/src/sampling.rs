//! Seeded randomness and random instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::{pair_count, DistanceFunction};
use crate::partition::Partitioning;
use crate::weight::Weight;

pub type TrialRng = ChaCha8Rng;

/// Independent generator for trial `stream` under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Distinct integer weights drawn from `1..=5m`, randomly placed.
pub fn random_distinct_instance<R: Rng>(n: usize, rng: &mut R) -> DistanceFunction {
    let m = pair_count(n);
    let pool: Vec<i64> = (1..=(5 * m as i64).max(2)).collect();
    let picked: Vec<i64> = pool.choose_multiple(rng, m).copied().collect();
    let mut it = picked.into_iter();
    DistanceFunction::from_fn(n, |_, _| Weight::from(it.next().unwrap())).expect("positive weights")
}

/// Integer weights from a small range, so ties are common.
pub fn random_tied_instance<R: Rng>(n: usize, rng: &mut R) -> DistanceFunction {
    DistanceFunction::from_fn(n, |_, _| Weight::from(rng.gen_range(1..=3i64)))
        .expect("positive weights")
}

/// How ranks are spread over the tree edges of a guided instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeRanks {
    Random,
    /// The `k - 1` bridges take the lowest ranks.
    BridgesLight,
    /// The `k - 1` bridges take the highest ranks.
    BridgesHeavy,
}

/// Instance steered towards producing `target`: a random spanning tree made
/// of one subtree per block plus `k - 1` bridges, tree edges carrying a
/// random permutation of the ranks `1..n-1`, every other edge heavier.
pub fn guided_tree_instance<R: Rng>(target: &Partitioning, rng: &mut R) -> DistanceFunction {
    guided_tree_instance_with(target, TreeRanks::Random, rng)
}

pub fn guided_tree_instance_with<R: Rng>(
    target: &Partitioning,
    mode: TreeRanks,
    rng: &mut R,
) -> DistanceFunction {
    let n = target.n();
    let blocks = target.blocks();
    let mut tree: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
    for block in &blocks {
        let mut order = block.clone();
        order.shuffle(rng);
        for idx in 1..order.len() {
            let parent = order[rng.gen_range(0..idx)];
            tree.push((parent, order[idx]));
        }
    }
    let mut block_order: Vec<usize> = (0..blocks.len()).collect();
    block_order.shuffle(rng);
    for idx in 1..block_order.len() {
        let a = &blocks[block_order[rng.gen_range(0..idx)]];
        let b = &blocks[block_order[idx]];
        tree.push((*a.choose(rng).unwrap(), *b.choose(rng).unwrap()));
    }
    // tree holds the inner edges first, then the bridges
    let inner = n - blocks.len();
    let mut ranks: Vec<i64> = (1..=(n as i64 - 1)).collect();
    match mode {
        TreeRanks::Random => ranks.shuffle(rng),
        TreeRanks::BridgesLight => {
            ranks.rotate_left(n - 1 - inner);
            ranks[..inner].shuffle(rng);
            ranks[inner..].shuffle(rng);
        }
        TreeRanks::BridgesHeavy => {
            ranks[..inner].shuffle(rng);
            ranks[inner..].shuffle(rng);
        }
    }
    let m = pair_count(n) as i64;
    let mut heavy: Vec<i64> = (n as i64..n as i64 + m).collect();
    heavy.shuffle(rng);
    let mut heavy = heavy.into_iter();
    DistanceFunction::from_fn(n, |i, j| {
        match tree
            .iter()
            .position(|&(a, b)| (a.min(b), a.max(b)) == (i, j))
        {
            Some(pos) => Weight::from(ranks[pos]),
            None => Weight::from(heavy.next().unwrap()),
        }
    })
    .expect("positive weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::kruskal_mst;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = random_distinct_instance(6, &mut rng_for(7, 3));
        let b = random_distinct_instance(6, &mut rng_for(7, 3));
        let c = random_distinct_instance(6, &mut rng_for(7, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.has_distinct_weights());
    }

    #[test]
    fn guided_instance_tree_is_the_mst() {
        let target = Partitioning::from_blocks(6, &[vec![1, 4], vec![2, 3, 6], vec![5]]).unwrap();
        for s in 0..50 {
            let d = guided_tree_instance(&target, &mut rng_for(1, s));
            assert!(d.has_distinct_weights());
            let tree = kruskal_mst(&d);
            assert!(tree.edges().iter().all(|e| e.weight <= Weight::from(5)));
            let bridges = tree
                .edges()
                .iter()
                .filter(|e| !target.same_block(e.i, e.j))
                .count();
            assert_eq!(bridges, 2);
        }
    }

    #[test]
    fn rank_modes_place_the_bridges() {
        let target = Partitioning::from_blocks(6, &[vec![1, 4], vec![2, 3, 6], vec![5]]).unwrap();
        for s in 0..20 {
            for (mode, lo) in [
                (TreeRanks::BridgesLight, true),
                (TreeRanks::BridgesHeavy, false),
            ] {
                let d = guided_tree_instance_with(&target, mode, &mut rng_for(2, s));
                let tree = kruskal_mst(&d);
                let bridge_ranks: Vec<usize> = tree
                    .edges()
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| !target.same_block(e.i, e.j))
                    .map(|(r, _)| r)
                    .collect();
                assert_eq!(bridge_ranks, if lo { vec![0, 1] } else { vec![3, 4] });
            }
        }
    }
}
