//! Partitioning functions: Single-Linkage (two routes), the MST-cuts family,
//! exact Min-Sum and the constant partitioning.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::distance::{edge_order, DistanceFunction};
use crate::error::{Error, Result};
use crate::graph::{kruskal_mst, UnionFind};
use crate::partition::{enumerate_partitions, Partitioning, MAX_ENUMERATION_N};
use crate::weight::Weight;

/// A deterministic map `(d, k) -> k-partitioning`.
pub trait ClusteringFunction: Send + Sync {
    fn name(&self) -> String;

    fn cluster(&self, d: &DistanceFunction, k: usize) -> Result<Partitioning>;

    /// Whether repeated evaluation is known to give identical output.
    /// Only deterministic functions may receive `Proven` verdicts.
    fn is_deterministic(&self) -> bool {
        true
    }
}

pub type ClusteringFunctionHandle = Arc<dyn ClusteringFunction>;

pub(crate) fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidK { n, k })
    } else {
        Ok(())
    }
}

/// Algorithm 1: merge along ascending edges until `k` clusters remain.
pub fn single_linkage(d: &DistanceFunction, k: usize) -> Result<Partitioning> {
    let n = d.n();
    check_k(n, k)?;
    let mut uf = UnionFind::new(n);
    for e in edge_order(d).edges() {
        if uf.sets() <= k {
            break;
        }
        uf.union(e.i, e.j);
    }
    let labels: Vec<usize> = (1..=n).map(|p| uf.find(p)).collect();
    Partitioning::from_labels(&labels)
}

/// Single-Linkage as "drop the k-1 heaviest MST edges".
pub fn single_linkage_via_mst(d: &DistanceFunction, k: usize) -> Result<Partitioning> {
    let n = d.n();
    check_k(n, k)?;
    let tree = kruskal_mst(d);
    let removed: Vec<usize> = ((n - k)..(n - 1)).collect();
    Partitioning::from_labels(&tree.components_without(&removed))
}

/// Which MST ranks a member of the MST-cuts family removes.
///
/// Ranks are 1-based positions among the `n - 1` MST edges in ascending
/// universal order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum MstcConfig {
    /// `C_k = {1, ..., k-1}`: cut the lightest tree edges.
    Lowest,
    /// `C_k = {n-1, ..., n-k+1}`: cut the heaviest tree edges (Single-Linkage).
    Highest,
    /// Explicit rank sets per `(n, k)`.
    Explicit { cuts: Vec<ExplicitCut> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitCut {
    pub n: usize,
    pub k: usize,
    pub ranks: Vec<usize>,
}

impl MstcConfig {
    /// The validated rank set `C_k` for `n` points.
    pub fn ranks(&self, n: usize, k: usize) -> Result<Vec<usize>> {
        check_k(n, k)?;
        let ranks: Vec<usize> = match self {
            MstcConfig::Lowest => (1..k).collect(),
            MstcConfig::Highest => ((n - k + 1)..n).rev().collect(),
            MstcConfig::Explicit { cuts } => cuts
                .iter()
                .find(|c| c.n == n && c.k == k)
                .map(|c| c.ranks.clone())
                .ok_or_else(|| Error::InvalidConfig(format!("no cut set for n = {n}, k = {k}")))?,
        };
        if ranks.len() != k - 1 {
            return Err(Error::InvalidConfig(format!(
                "expected {} ranks for k = {k}, got {}",
                k - 1,
                ranks.len()
            )));
        }
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ranks.len() {
            return Err(Error::InvalidConfig("ranks must be distinct".into()));
        }
        if sorted.iter().any(|&r| r == 0 || r > n - 1) {
            return Err(Error::InvalidConfig(format!(
                "ranks must lie in 1..={}",
                n - 1
            )));
        }
        Ok(ranks)
    }

    pub fn label(&self) -> &'static str {
        match self {
            MstcConfig::Lowest => "lowest",
            MstcConfig::Highest => "highest",
            MstcConfig::Explicit { .. } => "explicit",
        }
    }
}

/// Member of the MST-cuts family selected by `cfg`.
pub fn mstc(cfg: &MstcConfig, d: &DistanceFunction, k: usize) -> Result<Partitioning> {
    let ranks = cfg.ranks(d.n(), k)?;
    let tree = kruskal_mst(d);
    let removed: Vec<usize> = ranks.iter().map(|r| r - 1).collect();
    Partitioning::from_labels(&tree.components_without(&removed))
}

/// Sum over blocks of the in-block pairwise distances.
pub fn min_sum_objective(d: &DistanceFunction, gamma: &Partitioning) -> Result<Weight> {
    if gamma.n() != d.n() {
        return Err(Error::MismatchedGroundSet {
            left: d.n(),
            right: gamma.n(),
        });
    }
    Ok(d.edges()
        .iter()
        .filter(|e| gamma.same_block(e.i, e.j))
        .map(|e| e.weight)
        .sum())
}

/// Distances rescaled to integers by the common denominator; same argmin.
fn integer_weights(d: &DistanceFunction) -> Vec<Vec<i128>> {
    let lcm = d
        .edges()
        .iter()
        .fold(1i128, |acc, e| acc.lcm(&e.weight.denom()));
    let n = d.n();
    let mut table = vec![vec![0i128; n]; n];
    for e in d.edges() {
        let v = e.weight.numer() * (lcm / e.weight.denom());
        table[e.i - 1][e.j - 1] = v;
        table[e.j - 1][e.i - 1] = v;
    }
    table
}

/// Exact Min-Sum minimizer by exhaustive search; ties go to the
/// canonically smallest partition.
pub fn min_sum_exact(d: &DistanceFunction, k: usize) -> Result<Partitioning> {
    let n = d.n();
    check_k(n, k)?;
    if n > MAX_ENUMERATION_N {
        return Err(Error::BudgetExceeded(format!(
            "exact Min-Sum is capped at n = {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let table = integer_weights(d);
    let mut best: Option<(i128, Partitioning)> = None;
    // enumeration is in canonical order, so keeping the first strict
    // improvement implements the tie-break
    for gamma in enumerate_partitions(n, k)? {
        let labels = gamma.labels();
        let mut cost = 0i128;
        for i in 0..n {
            for j in (i + 1)..n {
                if labels[i] == labels[j] {
                    cost += table[i][j];
                }
            }
        }
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, gamma));
        }
    }
    Ok(best.expect("at least one partition").1)
}

/// `{1..n-k+1}` followed by the singletons `{n-k+2}, ..., {n}`; ignores `d`.
pub fn constant_partition(d: &DistanceFunction, k: usize) -> Result<Partitioning> {
    let n = d.n();
    check_k(n, k)?;
    let labels: Vec<usize> = (1..=n).map(|p| p.saturating_sub(n - k + 1)).collect();
    Partitioning::from_labels(&labels)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SingleLinkage;

#[derive(Debug, Clone, Copy, Default)]
pub struct SingleLinkageViaMst;

#[derive(Debug, Clone)]
pub struct Mstc(pub MstcConfig);

#[derive(Debug, Clone, Copy, Default)]
pub struct MinSum;

#[derive(Debug, Clone, Copy, Default)]
pub struct Constant;

impl ClusteringFunction for SingleLinkage {
    fn name(&self) -> String {
        "single-linkage".into()
    }
    fn cluster(&self, d: &DistanceFunction, k: usize) -> Result<Partitioning> {
        single_linkage(d, k)
    }
}

impl ClusteringFunction for SingleLinkageViaMst {
    fn name(&self) -> String {
        "single-linkage-mst".into()
    }
    fn cluster(&self, d: &DistanceFunction, k: usize) -> Result<Partitioning> {
        single_linkage_via_mst(d, k)
    }
}

impl ClusteringFunction for Mstc {
    fn name(&self) -> String {
        FunctionSpec::Mstc(self.0.clone()).to_string()
    }
    fn cluster(&self, d: &DistanceFunction, k: usize) -> Result<Partitioning> {
        mstc(&self.0, d, k)
    }
}

impl ClusteringFunction for MinSum {
    fn name(&self) -> String {
        "min-sum".into()
    }
    fn cluster(&self, d: &DistanceFunction, k: usize) -> Result<Partitioning> {
        min_sum_exact(d, k)
    }
}

impl ClusteringFunction for Constant {
    fn name(&self) -> String {
        "constant".into()
    }
    fn cluster(&self, d: &DistanceFunction, k: usize) -> Result<Partitioning> {
        constant_partition(d, k)
    }
}

/// Serializable name of a clustering function, used in reports and on the
/// command line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FunctionSpec {
    SingleLinkage,
    SingleLinkageViaMst,
    Mstc(MstcConfig),
    MinSum,
    Constant,
    /// `plugin:<command line>`
    Plugin(String),
}

impl FunctionSpec {
    /// The four functions of the taxonomy table, in row order.
    pub fn table_rows() -> Vec<FunctionSpec> {
        vec![
            FunctionSpec::SingleLinkage,
            FunctionSpec::Mstc(MstcConfig::Lowest),
            FunctionSpec::MinSum,
            FunctionSpec::Constant,
        ]
    }

    pub fn handle(&self) -> Result<ClusteringFunctionHandle> {
        Ok(match self {
            FunctionSpec::SingleLinkage => Arc::new(SingleLinkage),
            FunctionSpec::SingleLinkageViaMst => Arc::new(SingleLinkageViaMst),
            FunctionSpec::Mstc(cfg) => Arc::new(Mstc(cfg.clone())),
            FunctionSpec::MinSum => Arc::new(MinSum),
            FunctionSpec::Constant => Arc::new(Constant),
            FunctionSpec::Plugin(cmd) => {
                let ep = crate::plugin::PluginEndpoint::from_command_line(cmd)?;
                Arc::new(crate::plugin::PluginHandle::connect(ep)?)
            }
        })
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::SingleLinkage => write!(f, "single-linkage"),
            FunctionSpec::SingleLinkageViaMst => write!(f, "single-linkage-mst"),
            FunctionSpec::Mstc(MstcConfig::Explicit { cuts }) => {
                write!(
                    f,
                    "mstc-explicit:{}",
                    serde_json::to_string(cuts).unwrap_or_default()
                )
            }
            FunctionSpec::Mstc(cfg) => write!(f, "mstc-{}", cfg.label()),
            FunctionSpec::MinSum => write!(f, "min-sum"),
            FunctionSpec::Constant => write!(f, "constant"),
            FunctionSpec::Plugin(cmd) => write!(f, "plugin:{cmd}"),
        }
    }
}

impl std::str::FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(cmd) = s.strip_prefix("plugin:") {
            if cmd.trim().is_empty() {
                return Err(Error::UnknownFunction(s.into()));
            }
            return Ok(FunctionSpec::Plugin(cmd.trim().to_string()));
        }
        if let Some(json) = s.strip_prefix("mstc-explicit:") {
            let cuts = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
            return Ok(FunctionSpec::Mstc(MstcConfig::Explicit { cuts }));
        }
        Ok(match s {
            "single-linkage" | "sl" => FunctionSpec::SingleLinkage,
            "single-linkage-mst" | "sl-mst" => FunctionSpec::SingleLinkageViaMst,
            "mstc-lowest" | "mstc" => FunctionSpec::Mstc(MstcConfig::Lowest),
            "mstc-highest" => FunctionSpec::Mstc(MstcConfig::Highest),
            "min-sum" => FunctionSpec::MinSum,
            "constant" => FunctionSpec::Constant,
            other => return Err(Error::UnknownFunction(other.into())),
        })
    }
}

impl From<FunctionSpec> for String {
    fn from(spec: FunctionSpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for FunctionSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::canonical_richness_witness;

    fn triangle() -> DistanceFunction {
        DistanceFunction::from_fn(3, |i, j| Weight::from((i + j - 2) as i64)).unwrap()
    }

    fn p(n: usize, blocks: &[&[usize]]) -> Partitioning {
        let blocks: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
        Partitioning::from_blocks(n, &blocks).unwrap()
    }

    #[test]
    fn single_linkage_triangle() {
        let d = triangle();
        assert_eq!(single_linkage(&d, 2).unwrap(), p(3, &[&[1, 2], &[3]]));
        assert_eq!(single_linkage(&d, 3).unwrap(), Partitioning::singletons(3));
        assert_eq!(single_linkage(&d, 1).unwrap(), Partitioning::whole(3));
        assert_eq!(
            single_linkage_via_mst(&d, 2).unwrap(),
            p(3, &[&[1, 2], &[3]])
        );
        assert_eq!(
            single_linkage_via_mst(&d, 1).unwrap(),
            Partitioning::whole(3)
        );
        assert!(matches!(single_linkage(&d, 0), Err(Error::InvalidK { .. })));
        assert!(matches!(
            single_linkage_via_mst(&d, 4),
            Err(Error::InvalidK { .. })
        ));
    }

    #[test]
    fn single_linkage_recovers_witness() {
        let gamma = p(5, &[&[1, 4], &[2, 3, 5]]);
        assert_eq!(
            single_linkage(&canonical_richness_witness(&gamma), 2).unwrap(),
            gamma
        );
    }

    #[test]
    fn mstc_rules() {
        let d = triangle();
        assert_eq!(
            mstc(&MstcConfig::Lowest, &d, 2).unwrap(),
            p(3, &[&[1, 3], &[2]])
        );
        assert_eq!(
            mstc(&MstcConfig::Highest, &d, 2).unwrap(),
            single_linkage(&d, 2).unwrap()
        );
        assert_eq!(
            mstc(&MstcConfig::Lowest, &d, 1).unwrap(),
            Partitioning::whole(3)
        );
        assert_eq!(MstcConfig::Highest.ranks(6, 3).unwrap(), vec![5, 4]);
    }

    #[test]
    fn mstc_config_validation() {
        let bad = |ranks: Vec<usize>| MstcConfig::Explicit {
            cuts: vec![ExplicitCut { n: 4, k: 3, ranks }],
        };
        assert!(bad(vec![1, 2]).ranks(4, 3).is_ok());
        assert!(matches!(
            bad(vec![1]).ranks(4, 3),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            bad(vec![2, 2]).ranks(4, 3),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            bad(vec![0, 2]).ranks(4, 3),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            bad(vec![1, 4]).ranks(4, 3),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            bad(vec![1, 2]).ranks(5, 3),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn objective_values() {
        let d = triangle();
        assert_eq!(
            min_sum_objective(&d, &p(3, &[&[1, 2], &[3]])).unwrap(),
            Weight::from(1)
        );
        assert_eq!(
            min_sum_objective(&d, &Partitioning::singletons(3)).unwrap(),
            Weight::zero()
        );
        assert_eq!(
            min_sum_objective(&d, &Partitioning::whole(3)).unwrap(),
            Weight::from(6)
        );
        assert!(min_sum_objective(&d, &Partitioning::whole(4)).is_err());
    }

    #[test]
    fn min_sum_basics() {
        let d = triangle();
        assert_eq!(min_sum_exact(&d, 3).unwrap(), Partitioning::singletons(3));
        assert_eq!(min_sum_exact(&d, 2).unwrap(), p(3, &[&[1, 2], &[3]]));
        let big = DistanceFunction::from_fn(13, |_, _| Weight::one()).unwrap();
        assert!(matches!(
            min_sum_exact(&big, 2),
            Err(Error::BudgetExceeded(_))
        ));
        // every split of a flat triangle ties; canonical smallest wins
        let flat = DistanceFunction::from_fn(3, |_, _| Weight::one()).unwrap();
        assert_eq!(min_sum_exact(&flat, 2).unwrap(), p(3, &[&[1, 2], &[3]]));
    }

    #[test]
    fn min_sum_handles_fractional_weights() {
        let d =
            DistanceFunction::from_fn(4, |i, j| Weight::new(1, (i * j) as i128).unwrap()).unwrap();
        let best = min_sum_exact(&d, 2).unwrap();
        let best_cost = min_sum_objective(&d, &best).unwrap();
        for gamma in enumerate_partitions(4, 2).unwrap() {
            assert!(best_cost <= min_sum_objective(&d, &gamma).unwrap());
        }
    }

    #[test]
    fn constant_shape() {
        let d = DistanceFunction::from_fn(4, |_, _| Weight::one()).unwrap();
        assert_eq!(
            constant_partition(&d, 2).unwrap(),
            p(4, &[&[1, 2, 3], &[4]])
        );
        assert_eq!(
            constant_partition(&d, 4).unwrap(),
            Partitioning::singletons(4)
        );
        assert_eq!(constant_partition(&d, 1).unwrap(), Partitioning::whole(4));
    }

    #[test]
    fn spec_names_round_trip() {
        for name in [
            "single-linkage",
            "single-linkage-mst",
            "mstc-lowest",
            "mstc-highest",
            "min-sum",
            "constant",
            "plugin:python3 x.py",
        ] {
            let spec: FunctionSpec = name.parse().unwrap();
            assert_eq!(spec.to_string(), name);
        }
        assert!("k-means".parse::<FunctionSpec>().is_err());
        let explicit = FunctionSpec::Mstc(MstcConfig::Explicit {
            cuts: vec![ExplicitCut {
                n: 4,
                k: 2,
                ranks: vec![2],
            }],
        });
        assert_eq!(
            explicit.to_string().parse::<FunctionSpec>().unwrap(),
            explicit
        );
    }
}
