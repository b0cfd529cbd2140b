//! k-partitionings of the point set `{1..n}` in canonical form.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`].
pub const MAX_ENUMERATION_N: usize = 12;

/// A partition of `{1..n}` into non-empty disjoint blocks.
///
/// Stored as a restricted growth string: `labels[p]` is the block index of
/// point `p + 1`, and blocks are numbered in order of their smallest
/// element. This is the canonical encoding; derived `Eq` and `Ord` compare
/// it directly, so block order and element order never matter.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partitioning {
    labels: Vec<u32>,
    k: usize,
}

impl Partitioning {
    /// Canonicalizes an arbitrary labelling (any label values) of `{1..n}`.
    pub fn from_labels<T: Copy + Eq>(raw: &[T]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidPartition("empty point set".into()));
        }
        let mut seen: Vec<T> = Vec::new();
        let labels = raw
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(idx) => idx as u32,
                None => {
                    seen.push(*l);
                    (seen.len() - 1) as u32
                }
            })
            .collect();
        Ok(Partitioning {
            labels,
            k: seen.len(),
        })
    }

    /// Builds a partitioning from blocks of 1-based point ids.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &p in block {
                if p == 0 || p > n {
                    return Err(Error::InvalidPartition(format!(
                        "point {p} outside 1..={n}"
                    )));
                }
                if raw[p - 1] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "point {p} appears in more than one block"
                    )));
                }
                raw[p - 1] = b;
            }
        }
        if let Some(p) = raw.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "point {} is missing",
                p + 1
            )));
        }
        Partitioning::from_labels(&raw)
    }

    pub fn singletons(n: usize) -> Self {
        Partitioning {
            labels: (0..n as u32).collect(),
            k: n,
        }
    }

    pub fn whole(n: usize) -> Self {
        Partitioning {
            labels: vec![0; n],
            k: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The canonical encoding.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Block index of a 1-based point.
    pub fn block_of(&self, point: usize) -> usize {
        self.labels[point - 1] as usize
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i - 1] == self.labels[j - 1]
    }

    /// Blocks sorted by minimum element, elements ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (p, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(p + 1);
        }
        blocks
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks().iter().any(|b| b.len() == 1)
    }
}

impl fmt::Display for Partitioning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (bi, block) in self.blocks().iter().enumerate() {
            if bi > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{{")?;
            for (pi, p) in block.iter().enumerate() {
                if pi > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Partitioning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Partitioning {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Partitioning {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let blocks = Vec::<Vec<usize>>::deserialize(deserializer)?;
        let n = blocks.iter().map(Vec::len).sum();
        Partitioning::from_blocks(n, &blocks).map_err(serde::de::Error::custom)
    }
}

/// Equality of two partitionings of the same ground set.
pub fn partitions_equal(a: &Partitioning, b: &Partitioning) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::MismatchedGroundSet {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(a == b)
}

/// Streams every k-partition of `{1..n}` once, in canonical-encoding order.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<PartitionIter> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::BudgetExceeded(format!(
            "partition enumeration is capped at n = {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidK { n, k });
    }
    Ok(PartitionIter {
        n,
        k,
        current: None,
        done: false,
    })
}

/// Iterator behind [`enumerate_partitions`].
///
/// Walks restricted growth strings in lexicographic order, only visiting
/// those that use exactly `k` labels.
#[derive(Debug, Clone)]
pub struct PartitionIter {
    n: usize,
    k: usize,
    current: Option<Vec<u32>>,
    done: bool,
}

impl PartitionIter {
    /// Smallest completion of `prefix` (with `used` labels) to exactly k labels.
    fn complete(&self, rgs: &mut Vec<u32>, mut used: usize) {
        while rgs.len() < self.n {
            let remaining = self.n - rgs.len();
            if remaining > self.k - used {
                rgs.push(0);
            } else {
                rgs.push(used as u32);
                used += 1;
            }
        }
    }

    fn advance(&self, rgs: &[u32]) -> Option<Vec<u32>> {
        // prefix_used[i] = number of labels used by rgs[..i]
        let mut prefix_used = Vec::with_capacity(self.n + 1);
        prefix_used.push(0usize);
        for &l in rgs {
            let last = *prefix_used.last().unwrap();
            prefix_used.push(last.max(l as usize + 1));
        }
        for pos in (1..self.n).rev() {
            let used_before = prefix_used[pos];
            let cap = used_before.min(self.k - 1) as u32;
            let mut label = rgs[pos] + 1;
            while label <= cap {
                let used = used_before.max(label as usize + 1);
                if self.k - used < self.n - pos {
                    let mut next = rgs[..pos].to_vec();
                    next.push(label);
                    self.complete(&mut next, used);
                    return Some(next);
                }
                label += 1;
            }
        }
        None
    }
}

impl Iterator for PartitionIter {
    type Item = Partitioning;

    fn next(&mut self) -> Option<Partitioning> {
        if self.done {
            return None;
        }
        let next = match &self.current {
            None => {
                let mut first = vec![0u32];
                self.complete(&mut first, 1);
                Some(first)
            }
            Some(rgs) => self.advance(rgs),
        };
        match next {
            Some(rgs) => {
                self.current = Some(rgs.clone());
                Some(Partitioning {
                    labels: rgs,
                    k: self.k,
                })
            }
            None => {
                self.done = true;
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, blocks: &[&[usize]]) -> Partitioning {
        let blocks: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
        Partitioning::from_blocks(n, &blocks).unwrap()
    }

    #[test]
    fn equality_ignores_block_order() {
        assert!(partitions_equal(&p(3, &[&[1, 2], &[3]]), &p(3, &[&[3], &[2, 1]])).unwrap());
        assert!(!partitions_equal(&p(3, &[&[1, 2], &[3]]), &p(3, &[&[1, 3], &[2]])).unwrap());
        assert!(
            partitions_equal(&Partitioning::singletons(3), &p(3, &[&[1], &[2], &[3]])).unwrap()
        );
    }

    #[test]
    fn mismatched_ground_sets() {
        assert_eq!(
            partitions_equal(&Partitioning::whole(3), &Partitioning::whole(4)),
            Err(Error::MismatchedGroundSet { left: 3, right: 4 })
        );
    }

    #[test]
    fn invalid_blocks_rejected() {
        assert!(Partitioning::from_blocks(3, &[vec![1, 2], vec![2, 3]]).is_err());
        assert!(Partitioning::from_blocks(3, &[vec![1, 2]]).is_err());
        assert!(Partitioning::from_blocks(3, &[vec![0, 1], vec![2, 3]]).is_err());
        assert!(Partitioning::from_blocks(3, &[vec![1, 2, 3], vec![]]).is_err());
    }

    #[test]
    fn n3_k2_in_canonical_order() {
        let all: Vec<_> = enumerate_partitions(3, 2).unwrap().collect();
        assert_eq!(
            all,
            vec![
                p(3, &[&[1, 2], &[3]]),
                p(3, &[&[1, 3], &[2]]),
                p(3, &[&[1], &[2, 3]])
            ]
        );
    }

    #[test]
    fn k1_and_kn() {
        let all: Vec<_> = enumerate_partitions(5, 1).unwrap().collect();
        assert_eq!(all, vec![Partitioning::whole(5)]);
        let all: Vec<_> = enumerate_partitions(5, 5).unwrap().collect();
        assert_eq!(all, vec![Partitioning::singletons(5)]);
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(
            enumerate_partitions(13, 2),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            enumerate_partitions(4, 0),
            Err(Error::InvalidK { .. })
        ));
        assert!(matches!(
            enumerate_partitions(4, 5),
            Err(Error::InvalidK { .. })
        ));
    }

    #[test]
    fn display_and_serde() {
        let x = p(4, &[&[4, 2], &[3, 1]]);
        assert_eq!(x.to_string(), "{{1,3}, {2,4}}");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "[[1,3],[2,4]]");
        let back: Partitioning = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }
}
