//! Instance transformations quantified over by the clustering properties.
//!
//! Every randomized transformation is a pure function of its input and a
//! seed, and is described by a [`TransformSpec`] so that counterexamples can
//! be regenerated from a report.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distance::{edge_order, DistanceFunction};
use crate::error::{Error, Result};
use crate::graph::{kruskal_mst, mst_equal};
use crate::partition::Partitioning;
use crate::sampling::rng_for;
use crate::weight::Weight;

const MST_RESAMPLE_LIMIT: u64 = 32;

/// Menu of multiplicative factors used by the randomized transformations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorMenu {
    /// shrink from {1/4, 1/3, 1/2, 2/3, 1}, expand from {1, 3/2, 2, 3, 4}
    #[default]
    Default,
    /// adds 1/100 and 1/10 to shrinks, 10 and 100 to expands
    Wide,
}

impl FactorMenu {
    pub fn shrink_factors(&self) -> Vec<Weight> {
        let mut v: Vec<Weight> = [(1, 4), (1, 3), (1, 2), (2, 3), (1, 1)]
            .iter()
            .map(|&(p, q)| Weight::new(p, q).unwrap())
            .collect();
        if *self == FactorMenu::Wide {
            v.push(Weight::new(1, 100).unwrap());
            v.push(Weight::new(1, 10).unwrap());
        }
        v
    }

    pub fn expand_factors(&self) -> Vec<Weight> {
        let mut v: Vec<Weight> = [(1, 1), (3, 2), (2, 1), (3, 1), (4, 1)]
            .iter()
            .map(|&(p, q)| Weight::new(p, q).unwrap())
            .collect();
        if *self == FactorMenu::Wide {
            v.push(Weight::from(10));
            v.push(Weight::from(100));
        }
        v
    }
}

/// A replayable description of how `d'` was produced from `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransformSpec {
    Scale {
        alpha: Weight,
    },
    Gamma {
        partition: Partitioning,
        seed: u64,
        menu: FactorMenu,
    },
    OrderPreserving {
        seed: u64,
    },
    MstPreserving {
        seed: u64,
        menu: FactorMenu,
    },
    AdjacentSwap {
        p: usize,
        q: usize,
    },
    /// Set one edge to an explicit weight (deterministic fixtures).
    SetEdge {
        i: usize,
        j: usize,
        weight: Weight,
    },
}

impl TransformSpec {
    pub fn apply(&self, d: &DistanceFunction) -> Result<DistanceFunction> {
        match self {
            TransformSpec::Scale { alpha } => scale(d, *alpha),
            TransformSpec::Gamma {
                partition,
                seed,
                menu,
            } => gamma_transform_with(d, partition, *seed, *menu),
            TransformSpec::OrderPreserving { seed } => order_preserving_reweight(d, *seed),
            TransformSpec::MstPreserving { seed, menu } => {
                mst_preserving_perturb_with(d, *seed, *menu)
            }
            TransformSpec::AdjacentSwap { p, q } => swap_adjacent(d, *p, *q),
            TransformSpec::SetEdge { i, j, weight } => d.with_weight(*i, *j, *weight),
        }
    }
}

/// Every distance multiplied by `alpha > 0`.
pub fn scale(d: &DistanceFunction, alpha: Weight) -> Result<DistanceFunction> {
    if !alpha.is_positive() {
        return Err(Error::NonPositiveScalar);
    }
    d.map_edges(|e| e.weight * alpha)
}

/// A random legal Γ-transformation drawn from the default factor menu.
pub fn gamma_transform(
    d: &DistanceFunction,
    gamma: &Partitioning,
    seed: u64,
) -> Result<DistanceFunction> {
    gamma_transform_with(d, gamma, seed, FactorMenu::Default)
}

pub fn gamma_transform_with(
    d: &DistanceFunction,
    gamma: &Partitioning,
    seed: u64,
    menu: FactorMenu,
) -> Result<DistanceFunction> {
    if gamma.n() != d.n() {
        return Err(Error::MismatchedGroundSet {
            left: d.n(),
            right: gamma.n(),
        });
    }
    let mut rng = rng_for(seed, 0);
    let shrink = menu.shrink_factors();
    let expand = menu.expand_factors();
    d.map_edges(|e| {
        let factors = if gamma.same_block(e.i, e.j) {
            &shrink
        } else {
            &expand
        };
        e.weight * *factors.choose(&mut rng).unwrap()
    })
}

/// In-block distances never grow, cross-block distances never shrink.
pub fn is_gamma_transform(
    d: &DistanceFunction,
    d2: &DistanceFunction,
    gamma: &Partitioning,
) -> Result<bool> {
    if d.n() != d2.n() {
        return Err(Error::MismatchedGroundSet {
            left: d.n(),
            right: d2.n(),
        });
    }
    if gamma.n() != d.n() {
        return Err(Error::MismatchedGroundSet {
            left: d.n(),
            right: gamma.n(),
        });
    }
    Ok(d.edges().iter().all(|e| {
        let after = d2.get(e.i, e.j);
        if gamma.same_block(e.i, e.j) {
            after <= e.weight
        } else {
            after >= e.weight
        }
    }))
}

/// Fresh strictly increasing weights along `edge_order(d)`.
pub fn order_preserving_reweight(d: &DistanceFunction, seed: u64) -> Result<DistanceFunction> {
    if !d.has_distinct_weights() {
        return Err(Error::TiedWeights);
    }
    let order = edge_order(d);
    let m = order.len();
    let mut rng = rng_for(seed, 0);
    let mut fresh = std::collections::BTreeSet::new();
    while fresh.len() < m {
        let numer = rng.gen_range(1..=(20 * m as i128));
        let denom = rng.gen_range(1..=4i128);
        fresh.insert(Weight::new(numer, denom)?);
    }
    let fresh: Vec<Weight> = fresh.into_iter().collect();
    reweight_along_order(d, &fresh)
}

/// Assigns `weights` (ascending) to the edges of `d` in universal order.
pub fn reweight_along_order(d: &DistanceFunction, weights: &[Weight]) -> Result<DistanceFunction> {
    let order = edge_order(d);
    let mut out = d.clone();
    for (e, w) in order.edges().iter().zip(weights) {
        out = out.with_weight(e.i, e.j, *w)?;
    }
    Ok(out)
}

/// Raises non-MST edges by factors >= 1; the MST is re-verified.
pub fn mst_preserving_perturb(d: &DistanceFunction, seed: u64) -> Result<DistanceFunction> {
    mst_preserving_perturb_with(d, seed, FactorMenu::Default)
}

pub fn mst_preserving_perturb_with(
    d: &DistanceFunction,
    seed: u64,
    menu: FactorMenu,
) -> Result<DistanceFunction> {
    let tree = kruskal_mst(d);
    let expand = menu.expand_factors();
    for attempt in 0..MST_RESAMPLE_LIMIT {
        let mut rng = rng_for(seed, attempt);
        let out = d.map_edges(|e| {
            if tree.contains(e.i, e.j) {
                e.weight
            } else {
                e.weight * *expand.choose(&mut rng).unwrap()
            }
        })?;
        if mst_equal(&tree, &kruskal_mst(&out))? {
            return Ok(out);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no MST-preserving sample verified in {MST_RESAMPLE_LIMIT} attempts"
    )))
}

/// Exchanges the weights of the edges at 1-based positions `p` and `q = p + 1`
/// of `edge_order(d)`.
pub fn swap_adjacent(d: &DistanceFunction, p: usize, q: usize) -> Result<DistanceFunction> {
    let order = edge_order(d);
    if p == 0 || q != p + 1 || q > order.len() {
        return Err(Error::NonAdjacentPositions { p, q });
    }
    let a = order.edges()[p - 1];
    let b = order.edges()[q - 1];
    if a.weight == b.weight {
        return Err(Error::TiedWeights);
    }
    d.with_weight(a.i, a.j, b.weight)?
        .with_weight(b.i, b.j, a.weight)
}
