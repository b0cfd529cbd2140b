//! Minimum spanning trees, redundant edges and the minimax path distance.

use serde::{Deserialize, Serialize};

use crate::distance::{edge_order, DistanceFunction, Edge};
use crate::error::{Error, Result};
use crate::weight::Weight;

/// Largest `n` accepted by [`path_distance_bruteforce`].
pub const MAX_BRUTEFORCE_N: usize = 8;

/// Disjoint-set forest over 1-based points.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..=n).collect(),
            rank: vec![0; n + 1],
            sets: n,
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// A spanning tree with weighted edges.
///
/// Edges are kept in ascending universal order, so derived equality means
/// identical edge sets with identical weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningTree {
    n: usize,
    edges: Vec<Edge>,
}

impl SpanningTree {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Tree edges, ascending by `(weight, i, j)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.edges.iter().any(|e| e.key() == key)
    }

    fn adjacency(&self) -> Vec<Vec<(usize, Weight)>> {
        let mut adj = vec![Vec::new(); self.n + 1];
        for e in &self.edges {
            adj[e.i].push((e.j, e.weight));
            adj[e.j].push((e.i, e.weight));
        }
        adj
    }

    /// Points grouped into connected components after dropping the given
    /// tree edges (indices into [`SpanningTree::edges`]). Returns a label per point.
    pub fn components_without(&self, removed: &[usize]) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n);
        for (idx, e) in self.edges.iter().enumerate() {
            if !removed.contains(&idx) {
                uf.union(e.i, e.j);
            }
        }
        (1..=self.n).map(|p| uf.find(p)).collect()
    }
}

/// Kruskal's algorithm over the universal edge order.
pub fn kruskal_mst(d: &DistanceFunction) -> SpanningTree {
    let n = d.n();
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for e in edge_order(d).edges() {
        if uf.union(e.i, e.j) {
            edges.push(*e);
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    SpanningTree { n, edges }
}

pub fn mst_equal(a: &SpanningTree, b: &SpanningTree) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::MismatchedGroundSet {
            left: a.n,
            right: b.n,
        });
    }
    Ok(a == b)
}

/// Edges whose endpoints are joined by a path of strictly lighter edges.
pub fn redundant_edges(d: &DistanceFunction) -> Vec<Edge> {
    let order = edge_order(d);
    let edges = order.edges();
    let mut uf = UnionFind::new(d.n());
    let mut out = Vec::new();
    let mut start = 0;
    // Process weight classes: each edge is tested against the forest of
    // strictly lighter edges, then the whole class is merged in.
    while start < edges.len() {
        let w = edges[start].weight;
        let end = edges[start..]
            .iter()
            .position(|e| e.weight != w)
            .map_or(edges.len(), |off| start + off);
        for e in &edges[start..end] {
            if uf.find(e.i) == uf.find(e.j) {
                out.push(*e);
            }
        }
        for e in &edges[start..end] {
            uf.union(e.i, e.j);
        }
        start = end;
    }
    out.sort_by_key(Edge::key);
    out
}

/// `P_d(x, y)` for every pair; zero on the diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDistanceMatrix {
    n: usize,
    table: Vec<Vec<Weight>>,
}

impl PathDistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> Weight {
        self.table[x - 1][y - 1]
    }

    pub fn rows(&self) -> &[Vec<Weight>] {
        &self.table
    }
}

/// Minimax path distance, read off maxima along MST paths.
pub fn path_distance(d: &DistanceFunction) -> PathDistanceMatrix {
    path_distance_from_tree(&kruskal_mst(d))
}

pub fn path_distance_from_tree(tree: &SpanningTree) -> PathDistanceMatrix {
    let n = tree.n();
    let adj = tree.adjacency();
    let mut table = vec![vec![Weight::zero(); n]; n];
    for src in 1..=n {
        // walk the tree from src carrying the heaviest edge seen so far
        let mut stack = vec![(src, 0usize, Weight::zero())];
        while let Some((v, parent, bottleneck)) = stack.pop() {
            table[src - 1][v - 1] = bottleneck;
            for &(u, w) in &adj[v] {
                if u != parent {
                    stack.push((u, v, bottleneck.max(w)));
                }
            }
        }
    }
    PathDistanceMatrix { n, table }
}

/// Minimax path distance by enumerating every simple path.
pub fn path_distance_bruteforce(d: &DistanceFunction) -> Result<PathDistanceMatrix> {
    let n = d.n();
    if n > MAX_BRUTEFORCE_N {
        return Err(Error::BudgetExceeded(format!(
            "brute-force path distance is capped at n = {MAX_BRUTEFORCE_N}, got {n}"
        )));
    }
    let mut table = vec![vec![Weight::zero(); n]; n];
    for x in 1..=n {
        for y in (x + 1)..=n {
            let mut best: Option<Weight> = None;
            let mut visited = vec![false; n + 1];
            visited[x] = true;
            explore(d, x, y, None, &mut visited, &mut best);
            let v = best.expect("complete graph has a path");
            table[x - 1][y - 1] = v;
            table[y - 1][x - 1] = v;
        }
    }
    Ok(PathDistanceMatrix { n, table })
}

fn explore(
    d: &DistanceFunction,
    at: usize,
    target: usize,
    bottleneck: Option<Weight>,
    visited: &mut [bool],
    best: &mut Option<Weight>,
) {
    if at == target {
        let b = bottleneck.unwrap_or_else(Weight::zero);
        if best.is_none_or(|cur| b < cur) {
            *best = Some(b);
        }
        return;
    }
    for next in 1..=d.n() {
        if visited[next] {
            continue;
        }
        let w = d.get(at, next);
        let b = bottleneck.map_or(w, |cur| cur.max(w));
        visited[next] = true;
        explore(d, next, target, Some(b), visited, best);
        visited[next] = false;
    }
}
