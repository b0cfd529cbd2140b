//! Distance functions over `{1..n}` and their edge orderings.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::partition::Partitioning;
use crate::weight::Weight;

/// An edge `{i, j}` with `i < j` (1-based) and its weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "w")]
    pub weight: Weight,
}

impl Edge {
    /// Endpoints as an ordered pair.
    pub fn key(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    /// Sort key of the universal edge order.
    pub fn order_key(&self) -> (Weight, usize, usize) {
        (self.weight, self.i, self.j)
    }
}

/// Symmetric distance table with strictly positive off-diagonal entries.
///
/// Only the upper triangle is stored, so symmetry holds by construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DistanceFunction {
    n: usize,
    upper: Vec<Weight>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j {
        (i - 1, j - 1)
    } else {
        (j - 1, i - 1)
    };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

impl DistanceFunction {
    /// Validates a full square table: zero diagonal, symmetric, positive elsewhere.
    pub fn from_matrix(raw: &[Vec<Weight>]) -> Result<Self> {
        let n = raw.len();
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        if raw.iter().any(|row| row.len() != n) {
            return Err(Error::NotSquare { n });
        }
        for (i, row) in raw.iter().enumerate() {
            if !row[i].is_zero() {
                return Err(Error::NonZeroDiagonal { i: i + 1 });
            }
        }
        for (i, row) in raw.iter().enumerate() {
            for (j, w) in row.iter().enumerate().skip(i + 1) {
                if *w != raw[j][i] {
                    return Err(Error::AsymmetricInput { i: i + 1, j: j + 1 });
                }
            }
        }
        DistanceFunction::from_fn(n, |i, j| raw[i - 1][j - 1])
    }

    /// Builds from a closure over 1-based pairs `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Weight) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        let mut upper = Vec::with_capacity(pair_count(n));
        for i in 1..=n {
            for j in (i + 1)..=n {
                let w = f(i, j);
                if !w.is_positive() {
                    return Err(Error::NonPositiveOffDiagonal { i, j });
                }
                upper.push(w);
            }
        }
        Ok(DistanceFunction { n, upper })
    }

    /// Builds from an edge list that must name every unordered pair exactly once.
    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        let mut slots: Vec<Option<Weight>> = vec![None; pair_count(n)];
        for e in edges {
            let (i, j) = (e.i.min(e.j), e.i.max(e.j));
            if i == 0 || j > n {
                return Err(Error::Parse(format!(
                    "edge ({}, {}) outside 1..={n}",
                    e.i, e.j
                )));
            }
            if i == j {
                if e.weight.is_zero() {
                    continue;
                }
                return Err(Error::NonZeroDiagonal { i });
            }
            if !e.weight.is_positive() {
                return Err(Error::NonPositiveOffDiagonal { i, j });
            }
            let slot = &mut slots[pair_index(n, i, j)];
            match slot {
                Some(w) if *w != e.weight => return Err(Error::AsymmetricInput { i, j }),
                Some(_) => {}
                None => *slot = Some(e.weight),
            }
        }
        let mut upper = Vec::with_capacity(slots.len());
        for i in 1..=n {
            for j in (i + 1)..=n {
                match slots[pair_index(n, i, j)] {
                    Some(w) => upper.push(w),
                    None => return Err(Error::Parse(format!("edge ({i}, {j}) is missing"))),
                }
            }
        }
        Ok(DistanceFunction { n, upper })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Weight {
        if i == j {
            Weight::zero()
        } else {
            self.upper[pair_index(self.n, i, j)]
        }
    }

    /// Copy with one off-diagonal distance replaced.
    pub fn with_weight(&self, i: usize, j: usize, w: Weight) -> Result<Self> {
        if i == j || i == 0 || j == 0 || i > self.n || j > self.n {
            return Err(Error::Parse(format!(
                "({i}, {j}) is not an edge of {} points",
                self.n
            )));
        }
        if !w.is_positive() {
            return Err(Error::NonPositiveOffDiagonal {
                i: i.min(j),
                j: i.max(j),
            });
        }
        let mut out = self.clone();
        out.upper[pair_index(self.n, i, j)] = w;
        Ok(out)
    }

    /// Copy with every weight mapped through `f`, revalidated.
    pub fn map_edges(&self, mut f: impl FnMut(&Edge) -> Weight) -> Result<Self> {
        let edges = self.edges();
        let mut it = edges.iter();
        DistanceFunction::from_fn(self.n, |_, _| f(it.next().unwrap()))
    }

    /// All edges in `(i, j)` lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.upper.len());
        let mut idx = 0;
        for i in 1..=self.n {
            for j in (i + 1)..=self.n {
                out.push(Edge {
                    i,
                    j,
                    weight: self.upper[idx],
                });
                idx += 1;
            }
        }
        out
    }

    pub fn max_weight(&self) -> Weight {
        *self.upper.iter().max().unwrap()
    }

    /// True when no two edges share a weight.
    pub fn has_distinct_weights(&self) -> bool {
        let set: BTreeSet<Weight> = self.upper.iter().copied().collect();
        set.len() == self.upper.len()
    }

    /// Square matrix form, diagonal zero.
    pub fn to_matrix(&self) -> Vec<Vec<Weight>> {
        (1..=self.n)
            .map(|i| (1..=self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

impl std::fmt::Debug for DistanceFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d[n={}](", self.n)?;
        for (idx, e) in self.edges().iter().enumerate() {
            if idx > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}-{}:{}", e.i, e.j, e.weight)?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeListForm {
    n: usize,
    edges: Vec<Edge>,
}

impl Serialize for DistanceFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        EdgeListForm {
            n: self.n,
            edges: self.edges(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DistanceFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let form = EdgeListForm::deserialize(deserializer)?;
        DistanceFunction::from_edges(form.n, &form.edges).map_err(serde::de::Error::custom)
    }
}

/// `validate_distance`: square table to distance function.
pub fn validate_distance(raw: &[Vec<Weight>], n: usize) -> Result<DistanceFunction> {
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if raw.len() != n {
        return Err(Error::NotSquare { n });
    }
    DistanceFunction::from_matrix(raw)
}

/// All edges sorted ascending by `(weight, i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeOrder(Vec<Edge>);

impl EdgeOrder {
    pub fn edges(&self) -> &[Edge] {
        &self.0
    }

    /// Endpoint sequence, ignoring weights.
    pub fn sequence(&self) -> Vec<(usize, usize)> {
        self.0.iter().map(Edge::key).collect()
    }

    /// 0-based position of the edge `{i, j}`.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.0.iter().position(|e| e.key() == key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn edge_order(d: &DistanceFunction) -> EdgeOrder {
    let mut edges = d.edges();
    edges.sort_by_key(Edge::order_key);
    EdgeOrder(edges)
}

/// In-block distances 1, cross-block distances 2.
pub fn canonical_richness_witness(gamma: &Partitioning) -> DistanceFunction {
    separated_witness(gamma, Weight::from(2))
}

/// In-block distances 1, cross-block distances `outer`.
pub fn separated_witness(gamma: &Partitioning, outer: Weight) -> DistanceFunction {
    DistanceFunction::from_fn(gamma.n(), |i, j| {
        if gamma.same_block(i, j) {
            Weight::one()
        } else {
            outer
        }
    })
    .expect("witness weights are positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: i64) -> Weight {
        Weight::from(v)
    }

    fn table(rows: &[&[i64]]) -> Vec<Vec<Weight>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| w(v)).collect())
            .collect()
    }

    #[test]
    fn validates_triangle() {
        let d = validate_distance(&table(&[&[0, 1, 2], &[1, 0, 3], &[2, 3, 0]]), 3).unwrap();
        assert_eq!(d.get(1, 2), w(1));
        assert_eq!(d.get(1, 3), w(2));
        assert_eq!(d.get(3, 2), w(3));
        assert_eq!(d.get(2, 2), w(0));
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(
            validate_distance(&table(&[&[0, 1], &[2, 0]]), 2),
            Err(Error::AsymmetricInput { i: 1, j: 2 })
        );
        assert_eq!(
            validate_distance(&table(&[&[0, 0], &[0, 0]]), 2),
            Err(Error::NonPositiveOffDiagonal { i: 1, j: 2 })
        );
        assert_eq!(
            validate_distance(&table(&[&[1, 1], &[1, 0]]), 2),
            Err(Error::NonZeroDiagonal { i: 1 })
        );
        assert_eq!(
            validate_distance(&table(&[&[0]]), 1),
            Err(Error::TooFewPoints(1))
        );
        assert_eq!(
            validate_distance(&table(&[&[0, 1, 1], &[1, 0, 1]]), 2),
            Err(Error::NotSquare { n: 2 })
        );
    }

    #[test]
    fn edge_order_breaks_ties_lexicographically() {
        let d = DistanceFunction::from_fn(3, |_, _| w(1)).unwrap();
        assert_eq!(edge_order(&d).sequence(), vec![(1, 2), (1, 3), (2, 3)]);
        let d =
            DistanceFunction::from_fn(3, |i, j| w((i + j) as i64 * if i == 1 { 1 } else { 10 }))
                .unwrap();
        assert_eq!(edge_order(&d).sequence(), vec![(1, 2), (1, 3), (2, 3)]);
        let d = DistanceFunction::from_fn(3, |i, _| w(4 - i as i64)).unwrap();
        assert_eq!(edge_order(&d).sequence(), vec![(2, 3), (1, 2), (1, 3)]);
    }

    #[test]
    fn witness_weights() {
        let gamma = Partitioning::from_blocks(3, &[vec![1, 2], vec![3]]).unwrap();
        let d = canonical_richness_witness(&gamma);
        assert_eq!((d.get(1, 2), d.get(1, 3), d.get(2, 3)), (w(1), w(2), w(2)));
        let d = canonical_richness_witness(&Partitioning::singletons(3));
        assert!(d.edges().iter().all(|e| e.weight == w(2)));
    }

    #[test]
    fn edge_list_serde_round_trip() {
        let d =
            DistanceFunction::from_fn(4, |i, j| Weight::new((i * j) as i128, 3).unwrap()).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.starts_with("{\"n\":4,\"edges\":[{\"i\":1,\"j\":2,\"w\":\"2/3\"}"));
        let back: DistanceFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn from_edges_requires_every_pair() {
        let edges = vec![
            Edge {
                i: 1,
                j: 2,
                weight: w(1),
            },
            Edge {
                i: 1,
                j: 3,
                weight: w(1),
            },
        ];
        assert!(matches!(
            DistanceFunction::from_edges(3, &edges),
            Err(Error::Parse(_))
        ));
    }
}
