//! Chain certificates: an explicit sequence of output-preserving
//! transformations that carries the in=1/out=2 witness of `Γ = SL(d, k)`
//! to `d` itself.
//!
//! The seven stages are
//!
//! 1. the richness witness for `Γ`;
//! 2. inner edges shrunk below 1, prefix edges first (Consistency);
//! 3. inner edges put into their relative order in `d` by adjacent swaps
//!    of inner edges (same-type swap);
//! 4. outer edges given distinct weights, all above every inner edge
//!    (Consistency);
//! 5. outer edges put into their relative order in `d` by adjacent swaps;
//! 6. redundant inner edges raised one at a time into their positions
//!    among the outer edges, the MST re-verified after each raise
//!    (MST-Coherence);
//! 7. the weights of `d` written onto the now identical edge order
//!    (Order-Consistency).
//!
//! Every stage is checked to keep Single-Linkage at `Γ`, and
//! [`verify_chain`] re-checks all of it from the recorded moves.

use serde::{Deserialize, Serialize};

use crate::clusterers::{check_k, single_linkage};
use crate::distance::{canonical_richness_witness, edge_order, pair_count, DistanceFunction, Edge};
use crate::error::{Error, Result};
use crate::graph::{kruskal_mst, mst_equal, UnionFind};
use crate::partition::Partitioning;
use crate::transforms::swap_adjacent;
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeClass {
    Outer,
    InnerNonRedundant,
    InnerRedundant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedEdge {
    pub edge: Edge,
    pub class: EdgeClass,
}

/// The edges Algorithm 1 scans before reaching `k` clusters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerPrefix {
    pub edges: Vec<Edge>,
    pub len: usize,
}

pub fn inner_prefix(d: &DistanceFunction, k: usize) -> Result<InnerPrefix> {
    let n = d.n();
    check_k(n, k)?;
    let order = edge_order(d);
    let mut uf = UnionFind::new(n);
    let mut len = 0;
    for e in order.edges() {
        if uf.sets() <= k {
            break;
        }
        uf.union(e.i, e.j);
        len += 1;
    }
    Ok(InnerPrefix {
        edges: order.edges()[..len].to_vec(),
        len,
    })
}

/// Labels every edge relative to `SL(d, k)`, in universal edge order.
///
/// An inner edge is redundant when it comes after some outer edge in the
/// universal order.
pub fn classify_edges(d: &DistanceFunction, k: usize) -> Result<Vec<ClassifiedEdge>> {
    let gamma = single_linkage(d, k)?;
    let mut seen_outer = false;
    Ok(edge_order(d)
        .edges()
        .iter()
        .map(|e| {
            let class = if !gamma.same_block(e.i, e.j) {
                seen_outer = true;
                EdgeClass::Outer
            } else if seen_outer {
                EdgeClass::InnerRedundant
            } else {
                EdgeClass::InnerNonRedundant
            };
            ClassifiedEdge { edge: *e, class }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    RichnessWitness,
    ShrinkInnerPrefix,
    ReorderInner,
    ExpandOuter,
    ReorderOuter,
    ExpandRedundantInner,
    OrderReweight,
}

impl StepKind {
    pub const SEQUENCE: [StepKind; 7] = [
        StepKind::RichnessWitness,
        StepKind::ShrinkInnerPrefix,
        StepKind::ReorderInner,
        StepKind::ExpandOuter,
        StepKind::ReorderOuter,
        StepKind::ExpandRedundantInner,
        StepKind::OrderReweight,
    ];

    pub fn justification(&self) -> Justification {
        match self {
            StepKind::RichnessWitness => Justification::KRichness,
            StepKind::ShrinkInnerPrefix | StepKind::ExpandOuter => Justification::Consistency,
            StepKind::ReorderInner | StepKind::ReorderOuter => Justification::SameTypeSwap,
            StepKind::ExpandRedundantInner => Justification::MstCoherence,
            StepKind::OrderReweight => Justification::OrderConsistency,
        }
    }
}

/// Property licensing a step. `SameTypeSwap` licenses exchanging adjacent edges of one type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Justification {
    KRichness,
    Consistency,
    SameTypeSwap,
    MstCoherence,
    OrderConsistency,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "kebab-case")]
pub enum Move {
    /// Swap the weights at 1-based positions `p` and `p + 1` of the edge order.
    Swap { p: usize },
    Reweight {
        i: usize,
        j: usize,
        from: Weight,
        to: Weight,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub kind: StepKind,
    pub justification: Justification,
    pub moves: Vec<Move>,
    pub d: DistanceFunction,
    /// `SL(d_i, k)`.
    pub output: Partitioning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCertificate {
    pub target: DistanceFunction,
    pub k: usize,
    pub gamma: Partitioning,
    pub prefix: InnerPrefix,
    pub steps: Vec<ChainStep>,
}

/// Outcome of [`verify_chain`]; steps are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainVerification {
    pub valid: bool,
    pub failing_step: Option<usize>,
    pub reason: Option<String>,
}

impl ChainVerification {
    fn ok() -> Self {
        ChainVerification {
            valid: true,
            failing_step: None,
            reason: None,
        }
    }

    fn fail(step: usize, reason: impl Into<String>) -> Self {
        ChainVerification {
            valid: false,
            failing_step: Some(step),
            reason: Some(reason.into()),
        }
    }
}

fn reweights(before: &DistanceFunction, after: &DistanceFunction) -> Vec<Move> {
    before
        .edges()
        .iter()
        .filter(|e| after.get(e.i, e.j) != e.weight)
        .map(|e| Move::Reweight {
            i: e.i,
            j: e.j,
            from: e.weight,
            to: after.get(e.i, e.j),
        })
        .collect()
}

/// Bubble-sorts the edges at 1-based positions `lo..=hi` of the edge order
/// by `rank`, one adjacent swap at a time.
fn bubble_sort_range(
    d: &DistanceFunction,
    lo: usize,
    hi: usize,
    rank: impl Fn((usize, usize)) -> usize,
) -> Result<(DistanceFunction, Vec<Move>)> {
    let mut cur = d.clone();
    let mut moves = Vec::new();
    if hi <= lo {
        return Ok((cur, moves));
    }
    loop {
        let mut swapped = false;
        for p in lo..hi {
            let seq = edge_order(&cur).sequence();
            if rank(seq[p - 1]) > rank(seq[p]) {
                cur = swap_adjacent(&cur, p, p + 1)?;
                moves.push(Move::Swap { p });
                swapped = true;
            }
        }
        if !swapped {
            return Ok((cur, moves));
        }
    }
}

fn violated(step: usize, reason: impl Into<String>) -> Error {
    Error::ChainInvariantViolated {
        step,
        reason: reason.into(),
    }
}

/// Builds the seven-stage chain for `d` (distinct weights) and `k`.
pub fn build_chain(d: &DistanceFunction, k: usize) -> Result<ChainCertificate> {
    let n = d.n();
    check_k(n, k)?;
    if !d.has_distinct_weights() {
        return Err(Error::TiedWeights);
    }
    let gamma = single_linkage(d, k)?;
    let prefix = inner_prefix(d, k)?;
    let target_order = edge_order(d);
    let target_seq = target_order.sequence();
    let rank_in_d = |key: (usize, usize)| target_seq.iter().position(|&s| s == key).unwrap();
    let classes = classify_edges(d, k)?;
    let m = pair_count(n);
    let inner_count = classes
        .iter()
        .filter(|c| c.class != EdgeClass::Outer)
        .count();

    let mut steps: Vec<ChainStep> = Vec::with_capacity(7);
    let mut push =
        |kind: StepKind, moves: Vec<Move>, di: DistanceFunction| -> Result<DistanceFunction> {
            let output = single_linkage(&di, k)?;
            if output != gamma {
                return Err(violated(
                    steps.len() + 1,
                    format!("SL output {output} differs from {gamma}"),
                ));
            }
            steps.push(ChainStep {
                kind,
                justification: kind.justification(),
                moves,
                d: di.clone(),
                output,
            });
            Ok(di)
        };

    // 1
    let d1 = push(
        StepKind::RichnessWitness,
        Vec::new(),
        canonical_richness_witness(&gamma),
    )?;

    // 2: prefix edges take ranks 1..t, other inner edges follow, all below 1
    let in_prefix = |e: &Edge| prefix.edges.iter().any(|p| p.key() == e.key());
    let mut inner: Vec<Edge> = d1
        .edges()
        .into_iter()
        .filter(|e| gamma.same_block(e.i, e.j))
        .collect();
    inner.sort_by_key(|e| (!in_prefix(e), e.key()));
    let denom = m as i128 + 1;
    let mut d2 = d1.clone();
    for (r, e) in inner.iter().enumerate() {
        d2 = d2.with_weight(e.i, e.j, Weight::new(r as i128 + 1, denom)?)?;
    }
    let d2 = push(StepKind::ShrinkInnerPrefix, reweights(&d1, &d2), d2)?;

    // 3
    let (d3, moves) = bubble_sort_range(&d2, 1, inner_count, rank_in_d)?;
    let d3 = push(StepKind::ReorderInner, moves, d3)?;

    // 4: outer edges spread over [2, 3) in their current order
    let mut d4 = d3.clone();
    let outers: Vec<Edge> = edge_order(&d3).edges()[inner_count..].to_vec();
    for (r, e) in outers.iter().enumerate() {
        let w = Weight::from(2) + Weight::new(r as i128, m as i128)?;
        if w < e.weight {
            return Err(violated(4, "outer edge would shrink"));
        }
        d4 = d4.with_weight(e.i, e.j, w)?;
    }
    let d4 = push(StepKind::ExpandOuter, reweights(&d3, &d4), d4)?;

    // 5
    let (d5, moves) = bubble_sort_range(&d4, inner_count + 1, m, rank_in_d)?;
    let d5 = push(StepKind::ReorderOuter, moves, d5)?;

    // 6: heaviest redundant inner edge first, each between its settled
    // neighbours in d's order
    let redundant: Vec<usize> = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.class == EdgeClass::InnerRedundant)
        .map(|(pos, _)| pos)
        .rev()
        .collect();
    let mut d6 = d5.clone();
    let mut moves = Vec::new();
    let tree = kruskal_mst(&d5);
    for &pos in &redundant {
        let e = target_order.edges()[pos];
        let lower = (0..pos)
            .rev()
            .find(|&q| classes[q].class != EdgeClass::InnerRedundant)
            .map(|q| {
                let s = target_order.edges()[q];
                d6.get(s.i, s.j)
            })
            .ok_or_else(|| violated(6, "redundant inner edge without a lighter outer edge"))?;
        let to = match target_order.edges().get(pos + 1) {
            Some(s) => Weight::midpoint(lower, d6.get(s.i, s.j)),
            None => lower + Weight::one(),
        };
        let from = d6.get(e.i, e.j);
        if to <= from {
            return Err(violated(6, "redundant inner edge would not grow"));
        }
        d6 = d6.with_weight(e.i, e.j, to)?;
        if !mst_equal(&tree, &kruskal_mst(&d6))? {
            return Err(violated(
                6,
                format!("raising ({}, {}) changed the MST", e.i, e.j),
            ));
        }
        moves.push(Move::Reweight {
            i: e.i,
            j: e.j,
            from,
            to,
        });
    }
    if edge_order(&d6).sequence() != target_seq {
        return Err(violated(6, "edge order does not match the target"));
    }
    let d6 = push(StepKind::ExpandRedundantInner, moves, d6)?;

    // 7
    let d7 = d.clone();
    push(StepKind::OrderReweight, reweights(&d6, &d7), d7)?;

    let cert = ChainCertificate {
        target: d.clone(),
        k,
        gamma,
        prefix,
        steps,
    };
    let check = verify_chain(&cert);
    if !check.valid {
        return Err(violated(
            check.failing_step.unwrap_or(0),
            check.reason.unwrap_or_default(),
        ));
    }
    Ok(cert)
}

fn replay_swaps(
    start: &DistanceFunction,
    moves: &[Move],
    gamma: &Partitioning,
) -> std::result::Result<DistanceFunction, String> {
    let mut cur = start.clone();
    for mv in moves {
        let Move::Swap { p } = mv else {
            return Err("reorder step contains a non-swap move".into());
        };
        let order = edge_order(&cur);
        let (a, b) = match (order.edges().get(p.wrapping_sub(1)), order.edges().get(*p)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(format!("swap position {p} out of range")),
        };
        if gamma.same_block(a.i, a.j) != gamma.same_block(b.i, b.j) {
            return Err(format!("swap at {p} mixes an inner and an outer edge"));
        }
        cur = swap_adjacent(&cur, *p, p + 1).map_err(|e| e.to_string())?;
    }
    Ok(cur)
}

fn relative_order(d: &DistanceFunction, keep: impl Fn(&Edge) -> bool) -> Vec<(usize, usize)> {
    edge_order(d)
        .edges()
        .iter()
        .filter(|e| keep(e))
        .map(Edge::key)
        .collect()
}

/// Independently re-checks every step of a certificate.
pub fn verify_chain(c: &ChainCertificate) -> ChainVerification {
    if c.steps.len() != StepKind::SEQUENCE.len() {
        return ChainVerification::fail(
            c.steps.len().clamp(1, 7),
            "certificate must have seven steps",
        );
    }
    let gamma = &c.gamma;
    match single_linkage(&c.target, c.k) {
        Ok(g) if &g == gamma => {}
        _ => return ChainVerification::fail(1, "recorded partition is not SL of the target"),
    }
    let inner = |e: &Edge| gamma.same_block(e.i, e.j);
    let outer = |e: &Edge| !gamma.same_block(e.i, e.j);

    for (idx, step) in c.steps.iter().enumerate() {
        let num = idx + 1;
        if step.kind != StepKind::SEQUENCE[idx] || step.justification != step.kind.justification() {
            return ChainVerification::fail(num, "unexpected step kind or justification");
        }
        if step.d.n() != c.target.n() {
            return ChainVerification::fail(num, "wrong number of points");
        }
        if step.d.edges().iter().any(|e| !e.weight.is_positive()) {
            return ChainVerification::fail(num, "non-positive distance");
        }
        match single_linkage(&step.d, c.k) {
            Ok(out) if &out == gamma && &step.output == gamma => {}
            _ => return ChainVerification::fail(num, "SL output is not preserved"),
        }
        if idx == 0 {
            if step.d != canonical_richness_witness(gamma) || !step.moves.is_empty() {
                return ChainVerification::fail(num, "first stage is not the richness witness");
            }
            continue;
        }
        let prev = &c.steps[idx - 1].d;
        let d = &step.d;
        let reason: Option<String> = match step.kind {
            StepKind::RichnessWitness => Some("witness in the middle of the chain".into()),
            StepKind::ShrinkInnerPrefix | StepKind::ExpandOuter => {
                let shrink = step.kind == StepKind::ShrinkInnerPrefix;
                let bad = prev.edges().into_iter().find(|e| {
                    let after = d.get(e.i, e.j);
                    after != e.weight && (inner(e) != shrink || (after < e.weight) != shrink)
                });
                if step.moves != reweights(prev, d) {
                    Some("moves do not match the weight changes".into())
                } else if let Some(e) = bad {
                    Some(format!("illegal change of ({}, {})", e.i, e.j))
                } else if shrink {
                    let t = c.prefix.len;
                    let mut head = edge_order(d).sequence()[..t].to_vec();
                    let mut want: Vec<_> = c.prefix.edges.iter().map(Edge::key).collect();
                    head.sort_unstable();
                    want.sort_unstable();
                    (head != want).then(|| "prefix edges do not occupy the first ranks".into())
                } else {
                    let max_inner = d.edges().into_iter().filter(inner).map(|e| e.weight).max();
                    let min_outer = d.edges().into_iter().filter(outer).map(|e| e.weight).min();
                    match (max_inner, min_outer) {
                        (Some(a), Some(b)) if a >= b => {
                            Some("outer edges are not above all inner edges".into())
                        }
                        _ => None,
                    }
                }
            }
            StepKind::ReorderInner | StepKind::ReorderOuter => {
                match replay_swaps(prev, &step.moves, gamma) {
                    Err(e) => Some(e),
                    Ok(cur) if &cur != d => {
                        Some("swaps do not reproduce the recorded stage".into())
                    }
                    Ok(_) => {
                        let keep: &dyn Fn(&Edge) -> bool = if step.kind == StepKind::ReorderInner {
                            &inner
                        } else {
                            &outer
                        };
                        (relative_order(d, keep) != relative_order(&c.target, keep))
                            .then(|| "relative order differs from the target".into())
                    }
                }
            }
            StepKind::ExpandRedundantInner => {
                let mut cur = prev.clone();
                let mut err = None;
                for mv in &step.moves {
                    let Move::Reweight { i, j, from, to } = mv else {
                        err = Some("swap inside an expansion step".to_string());
                        break;
                    };
                    if !gamma.same_block(*i, *j) || cur.get(*i, *j) != *from || to <= from {
                        err = Some(format!("illegal raise of ({i}, {j})"));
                        break;
                    }
                    let next = match cur.with_weight(*i, *j, *to) {
                        Ok(x) => x,
                        Err(e) => {
                            err = Some(e.to_string());
                            break;
                        }
                    };
                    if kruskal_mst(&cur) != kruskal_mst(&next) {
                        err = Some(format!("raising ({i}, {j}) changed the MST"));
                        break;
                    }
                    cur = next;
                }
                err.or_else(|| {
                    (&cur != d).then(|| "raises do not reproduce the recorded stage".into())
                })
            }
            StepKind::OrderReweight => {
                if step.moves != reweights(prev, d) {
                    Some("moves do not match the weight changes".into())
                } else {
                    (edge_order(prev).sequence() != edge_order(d).sequence())
                        .then(|| "edge order changed".into())
                }
            }
        };
        if let Some(r) = reason {
            return ChainVerification::fail(num, r);
        }
    }
    if c.steps.last().map(|s| &s.d) != Some(&c.target) {
        return ChainVerification::fail(7, "final stage differs from the target");
    }
    ChainVerification::ok()
}
