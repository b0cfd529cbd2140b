//! Executable versions of the clustering properties.
//!
//! Each checker returns a [`Verdict`]. Only constructive or exhaustive
//! arguments produce [`Status::Proven`]; randomized search that finds
//! nothing yields [`Status::Undetermined`]. Every [`Status::Falsified`]
//! verdict carries self-contained evidence that [`replay`] re-executes.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clusterers::{check_k, ClusteringFunction, ClusteringFunctionHandle};
use crate::counterexamples::two_halves_fixture;
use crate::distance::{
    canonical_richness_witness, edge_order, pair_count, separated_witness, DistanceFunction,
};
use crate::error::{Error, Result};
use crate::graph::{kruskal_mst, mst_equal, path_distance};
use crate::partition::{enumerate_partitions, Partitioning};
use crate::sampling::{
    guided_tree_instance_with, random_distinct_instance, rng_for, TreeRanks, TrialRng,
};
use crate::transforms::{
    gamma_transform_with, is_gamma_transform, mst_preserving_perturb_with,
    order_preserving_reweight, scale, FactorMenu, TransformSpec,
};
use crate::weight::Weight;

/// Largest `n` for the exhaustive k-Richness sweep.
pub const MAX_RICHNESS_N: usize = 9;

/// Default number of trials per (property, function).
pub const DEFAULT_TRIALS: usize = 2000;

pub const DEFAULT_SEED: u64 = 1;

/// Number of random instances used to decide that a function ignores `d`.
const INDEPENDENCE_PROBES: usize = 16;

const CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    ScaleInvariance,
    Consistency,
    KRichness,
    MstCoherence,
    OrderConsistency,
    PathDistanceCoherence,
}

impl Property {
    /// Column order of the taxonomy table.
    pub const TABLE: [Property; 5] = [
        Property::ScaleInvariance,
        Property::Consistency,
        Property::KRichness,
        Property::MstCoherence,
        Property::OrderConsistency,
    ];

    pub fn title(&self) -> &'static str {
        match self {
            Property::ScaleInvariance => "Scale-Invariance",
            Property::Consistency => "Consistency",
            Property::KRichness => "k-Richness",
            Property::MstCoherence => "MST-Coherence",
            Property::OrderConsistency => "Order-Consistency",
            Property::PathDistanceCoherence => "Path-Distance-Coherence",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        write!(f, "{}", s.as_str().unwrap())
    }
}

impl std::str::FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
            .map_err(|_| Error::Parse(format!("unknown property {s:?}")))
    }
}

/// Trial budget for the randomized checkers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckBudget {
    pub trials: usize,
    pub sizes: Vec<(usize, usize)>,
    pub seed: u64,
    /// Seed the Order-Consistency, MST-Coherence and path-coherence pools
    /// with the deterministic Min-Sum fixture.
    #[serde(default = "default_true")]
    pub fixtures: bool,
    #[serde(default)]
    pub menu: FactorMenu,
}

fn default_true() -> bool {
    true
}

impl CheckBudget {
    pub fn new(trials: usize, sizes: Vec<(usize, usize)>, seed: u64) -> Result<Self> {
        let b = CheckBudget {
            trials,
            sizes,
            seed,
            fixtures: true,
            menu: FactorMenu::Default,
        };
        b.validate()?;
        Ok(b)
    }

    /// Every `(n, k)` with `n` in `ns` and `2 <= k <= n - 1`.
    pub fn sizes_for(ns: impl IntoIterator<Item = usize>) -> Vec<(usize, usize)> {
        ns.into_iter()
            .flat_map(|n| (2..n).map(move |k| (n, k)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one (n, k) size is required".into(),
            ));
        }
        for &(n, k) in &self.sizes {
            if k < 2 || k > n {
                return Err(Error::InvalidConfig(format!(
                    "size ({n}, {k}) needs 2 <= k <= n"
                )));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl Default for CheckBudget {
    fn default() -> Self {
        CheckBudget {
            trials: DEFAULT_TRIALS,
            sizes: CheckBudget::sizes_for(4..=8),
            seed: DEFAULT_SEED,
            fixtures: true,
            menu: FactorMenu::Default,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Proven,
    Falsified,
    Undetermined,
}

/// Witness coverage of one `(n, k)` in a proven k-Richness verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRange {
    pub n: usize,
    pub k: usize,
    pub partitions: usize,
    pub via_canonical_witness: usize,
    pub via_search: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Evidence {
    None,
    /// Every k-partition was produced by some explicit instance.
    Witnesses {
        ranges: Vec<WitnessRange>,
    },
    /// Two instances related by a legal transformation with different outputs.
    Counterexample {
        n: usize,
        k: usize,
        /// Trial index, or `None` for a deterministic fixture.
        trial: Option<usize>,
        d: DistanceFunction,
        d_prime: DistanceFunction,
        transform: TransformSpec,
        output: Partitioning,
        output_prime: Partitioning,
    },
    /// The function ignored `d` on every probe, so `target` is out of range.
    Unattainable {
        n: usize,
        k: usize,
        target: Partitioning,
        output: Partitioning,
        probes: Vec<DistanceFunction>,
    },
    /// Partitions no search produced.
    Missing {
        n: usize,
        k: usize,
        missing: Vec<Partitioning>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: Property,
    pub function: String,
    pub status: Status,
    pub evidence: Evidence,
    pub trials: usize,
    pub errored_trials: usize,
    pub seed: u64,
    pub note: String,
}

impl Verdict {
    pub fn is_falsified(&self) -> bool {
        self.status == Status::Falsified
    }

    /// Human cell: proven and not-falsified both render as a check mark.
    pub fn symbol(&self) -> &'static str {
        match self.status {
            Status::Falsified => "×",
            _ => "✓",
        }
    }

    /// Machine-readable cell label.
    pub fn cell_label(&self) -> String {
        match self.status {
            Status::Proven => "✓ (proven)".into(),
            Status::Falsified => "× (falsified)".into(),
            Status::Undetermined => {
                format!(
                    "✓ (not falsified, budget {}, seed {})",
                    self.trials, self.seed
                )
            }
        }
    }
}

enum TrialOutcome {
    Pass,
    Fail(Box<Evidence>),
    Errored(Error),
}

struct Candidate {
    n: usize,
    k: usize,
    d: DistanceFunction,
    d_prime: DistanceFunction,
    transform: TransformSpec,
    output: Option<Partitioning>,
}

fn evaluate(
    f: &dyn ClusteringFunction,
    c: Candidate,
    trial: Option<usize>,
) -> Result<Option<Evidence>> {
    let output = match c.output {
        Some(o) => o,
        None => f.cluster(&c.d, c.k)?,
    };
    let output_prime = f.cluster(&c.d_prime, c.k)?;
    if output == output_prime {
        return Ok(None);
    }
    Ok(Some(Evidence::Counterexample {
        n: c.n,
        k: c.k,
        trial,
        d: c.d,
        d_prime: c.d_prime,
        transform: c.transform,
        output,
        output_prime,
    }))
}

/// Shared driver: fixtures first, then `b.trials` seeded trials in order.
/// The first counterexample in trial order is reported.
fn run_trials<G>(
    f: &dyn ClusteringFunction,
    property: Property,
    b: &CheckBudget,
    fixtures: Vec<Candidate>,
    generate: G,
) -> Result<Verdict>
where
    G: Fn(&dyn ClusteringFunction, &mut TrialRng, usize, usize) -> Result<Candidate> + Sync,
{
    b.validate()?;
    let mut verdict = Verdict {
        property,
        function: f.name(),
        status: Status::Undetermined,
        evidence: Evidence::None,
        trials: 0,
        errored_trials: 0,
        seed: b.seed,
        note: String::new(),
    };
    let mut first_error: Option<Error> = None;
    let mut record = |verdict: &mut Verdict, outcome: TrialOutcome| -> bool {
        verdict.trials += 1;
        match outcome {
            TrialOutcome::Pass => false,
            TrialOutcome::Fail(ev) => {
                verdict.status = Status::Falsified;
                verdict.evidence = *ev;
                true
            }
            TrialOutcome::Errored(e) => {
                verdict.errored_trials += 1;
                first_error.get_or_insert(e);
                false
            }
        }
    };
    let to_outcome = |r: Result<Option<Evidence>>| match r {
        Ok(None) => TrialOutcome::Pass,
        Ok(Some(ev)) => TrialOutcome::Fail(Box::new(ev)),
        Err(e) => TrialOutcome::Errored(e),
    };

    for c in fixtures {
        if record(&mut verdict, to_outcome(evaluate(f, c, None))) {
            verdict.note = "falsified by deterministic fixture".into();
            return Ok(verdict);
        }
    }
    let mut start = 0;
    while start < b.trials {
        let end = (start + CHUNK).min(b.trials);
        let outcomes: Vec<TrialOutcome> = (start..end)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_for(b.seed, t as u64);
                let (n, k) = b.sizes[t % b.sizes.len()];
                to_outcome(generate(f, &mut rng, n, k).and_then(|c| evaluate(f, c, Some(t))))
            })
            .collect();
        for outcome in outcomes {
            if record(&mut verdict, outcome) {
                verdict.note = format!("falsified at trial {}", verdict.trials - 1);
                return Ok(verdict);
            }
        }
        start = end;
    }
    if let Some(e) = first_error {
        if verdict.errored_trials == verdict.trials && e.is_plugin_failure() {
            return Err(e);
        }
        verdict.note = format!(
            "{} errored trials; first error: {e}; ",
            verdict.errored_trials
        );
    }
    verdict.note.push_str("not falsified in budget");
    Ok(verdict)
}

const SCALARS: [(i128, i128); 8] = [
    (1, 1000),
    (1, 10),
    (1, 3),
    (1, 2),
    (2, 1),
    (3, 1),
    (7, 1),
    (1000, 1),
];

pub fn check_scale_invariance(f: &dyn ClusteringFunction, b: &CheckBudget) -> Result<Verdict> {
    run_trials(
        f,
        Property::ScaleInvariance,
        b,
        Vec::new(),
        |_, rng, n, k| {
            let d = random_distinct_instance(n, rng);
            let (p, q) = SCALARS[rng.gen_range(0..SCALARS.len())];
            let alpha = Weight::new(p, q)?;
            let d_prime = scale(&d, alpha)?;
            Ok(Candidate {
                n,
                k,
                d,
                d_prime,
                transform: TransformSpec::Scale { alpha },
                output: None,
            })
        },
    )
}

fn fixture_pool(b: &CheckBudget) -> Vec<Candidate> {
    if !b.fixtures {
        return Vec::new();
    }
    let (inst, raised, transform) = two_halves_fixture();
    vec![Candidate {
        n: inst.n,
        k: 2,
        d: inst.d,
        d_prime: raised,
        transform,
        output: None,
    }]
}

pub fn check_order_consistency(f: &dyn ClusteringFunction, b: &CheckBudget) -> Result<Verdict> {
    run_trials(
        f,
        Property::OrderConsistency,
        b,
        fixture_pool(b),
        |_, rng, n, k| {
            let d = random_distinct_instance(n, rng);
            let seed: u64 = rng.gen();
            let d_prime = order_preserving_reweight(&d, seed)?;
            Ok(Candidate {
                n,
                k,
                d,
                d_prime,
                transform: TransformSpec::OrderPreserving { seed },
                output: None,
            })
        },
    )
}

pub fn check_consistency(f: &dyn ClusteringFunction, b: &CheckBudget) -> Result<Verdict> {
    let menu = b.menu;
    run_trials(
        f,
        Property::Consistency,
        b,
        Vec::new(),
        move |f, rng, n, k| {
            let d = random_distinct_instance(n, rng);
            let gamma = f.cluster(&d, k)?;
            let seed: u64 = rng.gen();
            let d_prime = gamma_transform_with(&d, &gamma, seed, menu)?;
            Ok(Candidate {
                n,
                k,
                d,
                d_prime,
                transform: TransformSpec::Gamma {
                    partition: gamma.clone(),
                    seed,
                    menu,
                },
                output: Some(gamma),
            })
        },
    )
}

pub fn check_mst_coherence(f: &dyn ClusteringFunction, b: &CheckBudget) -> Result<Verdict> {
    let menu = b.menu;
    run_trials(
        f,
        Property::MstCoherence,
        b,
        fixture_pool(b),
        move |_, rng, n, k| {
            let d = random_distinct_instance(n, rng);
            let seed: u64 = rng.gen();
            let d_prime = mst_preserving_perturb_with(&d, seed, menu)?;
            Ok(Candidate {
                n,
                k,
                d,
                d_prime,
                transform: TransformSpec::MstPreserving { seed, menu },
                output: None,
            })
        },
    )
}

pub fn check_path_distance_coherence(
    f: &dyn ClusteringFunction,
    b: &CheckBudget,
) -> Result<Verdict> {
    let menu = b.menu;
    let fixtures = fixture_pool(b);
    for c in &fixtures {
        if path_distance(&c.d) != path_distance(&c.d_prime) {
            return Err(Error::PreconditionNotMet(
                "fixture changes the path distance".into(),
            ));
        }
    }
    run_trials(
        f,
        Property::PathDistanceCoherence,
        b,
        fixtures,
        move |_, rng, n, k| {
            let d = random_distinct_instance(n, rng);
            let seed: u64 = rng.gen();
            let d_prime = mst_preserving_perturb_with(&d, seed, menu)?;
            if path_distance(&d) != path_distance(&d_prime) {
                return Err(Error::PreconditionNotMet(
                    "same-MST perturbation changed the path distance".into(),
                ));
            }
            Ok(Candidate {
                n,
                k,
                d,
                d_prime,
                transform: TransformSpec::MstPreserving { seed, menu },
                output: None,
            })
        },
    )
}

/// Exhaustive k-Richness sweep for one `(n, k)`.
///
/// Every k-partition is first attacked with its in=1/out=2 witness, then by
/// a seeded search (a widely separated witness, then guided-tree and uniform
/// random instances, `b.trials` attempts per partition). A function whose
/// output never depends on `d` is falsified without searching.
pub fn check_k_richness(
    f: &dyn ClusteringFunction,
    n: usize,
    k: usize,
    b: &CheckBudget,
) -> Result<Verdict> {
    if n > MAX_RICHNESS_N {
        return Err(Error::BudgetExceeded(format!(
            "k-Richness sweep is capped at n = {MAX_RICHNESS_N}, got {n}"
        )));
    }
    check_k(n, k)?;
    b.validate()?;
    let targets: Vec<Partitioning> = enumerate_partitions(n, k)?.collect();
    let mut verdict = Verdict {
        property: Property::KRichness,
        function: f.name(),
        status: Status::Undetermined,
        evidence: Evidence::None,
        trials: 0,
        errored_trials: 0,
        seed: b.seed,
        note: String::new(),
    };

    let canonical: Vec<Result<Partitioning>> = targets
        .par_iter()
        .map(|g| f.cluster(&canonical_richness_witness(g), k))
        .collect();
    verdict.trials += targets.len();
    let mut attained: HashSet<Partitioning> = HashSet::new();
    for r in &canonical {
        match r {
            Ok(p) => {
                attained.insert(p.clone());
            }
            Err(e) if e.is_plugin_failure() => verdict.errored_trials += 1,
            Err(e) => return Err(e.clone()),
        }
    }
    let via_canonical = targets.iter().filter(|g| attained.contains(*g)).count();
    let missing: Vec<&Partitioning> = targets.iter().filter(|g| !attained.contains(*g)).collect();

    if missing.is_empty() {
        return Ok(finish_proven(
            f,
            verdict,
            n,
            k,
            targets.len(),
            via_canonical,
            0,
        ));
    }

    // does F look at d at all?
    let probes: Vec<DistanceFunction> = (0..INDEPENDENCE_PROBES)
        .map(|s| random_distinct_instance(n, &mut rng_for(b.seed ^ 0x5eed_0000, s as u64)))
        .collect();
    let probe_outputs: Vec<Partitioning> = probes
        .iter()
        .map(|d| f.cluster(d, k))
        .collect::<Result<_>>()?;
    verdict.trials += probes.len();
    let independent = probe_outputs.iter().all(|p| *p == probe_outputs[0])
        && canonical
            .iter()
            .all(|r| matches!(r, Ok(p) if *p == probe_outputs[0]));
    if independent {
        let target = missing
            .iter()
            .find(|g| !g.has_singleton())
            .unwrap_or(&missing[0])
            .to_owned()
            .clone();
        verdict.status = Status::Falsified;
        verdict.note = format!(
            "output never depends on d; {} of {} k-partitions unattainable",
            missing.len(),
            targets.len()
        );
        verdict.evidence = Evidence::Unattainable {
            n,
            k,
            target,
            output: probe_outputs[0].clone(),
            probes,
        };
        return Ok(verdict);
    }

    let found: Vec<(bool, usize)> = missing
        .par_iter()
        .enumerate()
        .map(|(idx, target)| search_target(f, target, k, b, idx as u64))
        .collect();
    verdict.trials += found.iter().map(|(_, used)| used).sum::<usize>();
    let still_missing: Vec<Partitioning> = missing
        .iter()
        .zip(&found)
        .filter(|(_, (hit, _))| !hit)
        .map(|(g, _)| (*g).clone())
        .collect();
    if still_missing.is_empty() {
        let via_search = missing.len();
        return Ok(finish_proven(
            f,
            verdict,
            n,
            k,
            targets.len(),
            via_canonical,
            via_search,
        ));
    }
    verdict.note = format!(
        "{} of {} k-partitions not produced within {} attempts each",
        still_missing.len(),
        targets.len(),
        b.trials
    );
    verdict.evidence = Evidence::Missing {
        n,
        k,
        missing: still_missing,
    };
    Ok(verdict)
}

fn finish_proven(
    f: &dyn ClusteringFunction,
    mut verdict: Verdict,
    n: usize,
    k: usize,
    partitions: usize,
    via_canonical: usize,
    via_search: usize,
) -> Verdict {
    verdict.evidence = Evidence::Witnesses {
        ranges: vec![WitnessRange {
            n,
            k,
            partitions,
            via_canonical_witness: via_canonical,
            via_search,
        }],
    };
    if f.is_deterministic() && verdict.errored_trials == 0 {
        verdict.status = Status::Proven;
        verdict.note = format!(
            "all {partitions} k-partitions of n = {n}, k = {k} attained by explicit instances"
        );
    } else {
        verdict.note =
            "every k-partition attained, but the function is not known to be deterministic".into();
    }
    verdict
}

fn search_target(
    f: &dyn ClusteringFunction,
    target: &Partitioning,
    k: usize,
    b: &CheckBudget,
    stream: u64,
) -> (bool, usize) {
    let n = target.n();
    let mut rng = rng_for(b.seed ^ 0x0005_ea4c_0000, stream);
    for attempt in 0..b.trials {
        let d = match attempt {
            0 => separated_witness(target, Weight::from(pair_count(n) as i64 + 1)),
            a if a % 2 == 1 => {
                let mode = [
                    TreeRanks::Random,
                    TreeRanks::BridgesLight,
                    TreeRanks::BridgesHeavy,
                ][(a / 2) % 3];
                guided_tree_instance_with(target, mode, &mut rng)
            }
            _ => random_distinct_instance(n, &mut rng),
        };
        if matches!(f.cluster(&d, k), Ok(ref p) if p == target) {
            return (true, attempt + 1);
        }
    }
    (false, b.trials)
}

/// k-Richness over every size in the budget, folded into one verdict.
pub fn check_k_richness_budget(f: &dyn ClusteringFunction, b: &CheckBudget) -> Result<Verdict> {
    b.validate()?;
    let mut ranges = Vec::new();
    let mut trials = 0;
    let mut errored = 0;
    let mut undetermined: Option<Verdict> = None;
    for &(n, k) in &b.sizes {
        let mut v = check_k_richness(f, n, k, b)?;
        trials += v.trials;
        errored += v.errored_trials;
        match v.status {
            Status::Falsified => {
                v.trials = trials;
                v.errored_trials = errored;
                return Ok(v);
            }
            Status::Proven => {
                if let Evidence::Witnesses { ranges: r } = v.evidence {
                    ranges.extend(r);
                }
            }
            Status::Undetermined => {
                if undetermined.is_none() {
                    undetermined = Some(v);
                }
            }
        }
    }
    if let Some(mut v) = undetermined {
        v.trials = trials;
        v.errored_trials = errored;
        return Ok(v);
    }
    Ok(Verdict {
        property: Property::KRichness,
        function: f.name(),
        status: Status::Proven,
        evidence: Evidence::Witnesses { ranges },
        trials,
        errored_trials: errored,
        seed: b.seed,
        note: format!("every k-partition attained for all {} sizes", b.sizes.len()),
    })
}

/// Dispatch by property.
pub fn check_property(
    f: &dyn ClusteringFunction,
    property: Property,
    b: &CheckBudget,
) -> Result<Verdict> {
    match property {
        Property::ScaleInvariance => check_scale_invariance(f, b),
        Property::Consistency => check_consistency(f, b),
        Property::KRichness => check_k_richness_budget(f, b),
        Property::MstCoherence => check_mst_coherence(f, b),
        Property::OrderConsistency => check_order_consistency(f, b),
        Property::PathDistanceCoherence => check_path_distance_coherence(f, b),
    }
}

/// Re-executes the evidence of a verdict against `f`.
///
/// Succeeds when the recorded outputs are reproduced, the transformation is
/// legal for the property, and (for falsified verdicts) the two outputs
/// differ.
pub fn replay(verdict: &Verdict, f: &dyn ClusteringFunction) -> std::result::Result<(), String> {
    let fail = |m: String| Err(m);
    match &verdict.evidence {
        Evidence::Counterexample {
            k,
            d,
            d_prime,
            transform,
            output,
            output_prime,
            ..
        } => {
            let got = f.cluster(d, *k).map_err(|e| e.to_string())?;
            let got_prime = f.cluster(d_prime, *k).map_err(|e| e.to_string())?;
            if &got != output {
                return fail(format!("F(d) = {got}, report says {output}"));
            }
            if &got_prime != output_prime {
                return fail(format!("F(d') = {got_prime}, report says {output_prime}"));
            }
            if got == got_prime {
                return fail("outputs no longer differ".into());
            }
            let legal = match verdict.property {
                Property::ScaleInvariance => match transform {
                    TransformSpec::Scale { alpha } => {
                        scale(d, *alpha).ok().as_ref() == Some(d_prime)
                    }
                    _ => false,
                },
                Property::OrderConsistency => {
                    edge_order(d).sequence() == edge_order(d_prime).sequence()
                }
                Property::Consistency => is_gamma_transform(d, d_prime, &got).unwrap_or(false),
                Property::MstCoherence => {
                    mst_equal(&kruskal_mst(d), &kruskal_mst(d_prime)).unwrap_or(false)
                }
                Property::PathDistanceCoherence => path_distance(d) == path_distance(d_prime),
                Property::KRichness => false,
            };
            if !legal {
                return fail(format!(
                    "d -> d' is not a legal {} transformation",
                    verdict.property
                ));
            }
            Ok(())
        }
        Evidence::Unattainable {
            k,
            target,
            output,
            probes,
            ..
        } => {
            for d in probes {
                let got = f.cluster(d, *k).map_err(|e| e.to_string())?;
                if &got != output {
                    return fail(format!("probe output {got} differs from recorded {output}"));
                }
            }
            let witness = f
                .cluster(&canonical_richness_witness(target), *k)
                .map_err(|e| e.to_string())?;
            if &witness == target || output == target {
                return fail(format!("target {target} is attained"));
            }
            Ok(())
        }
        Evidence::Witnesses { .. } | Evidence::Missing { .. } | Evidence::None => {
            if verdict.status == Status::Falsified {
                fail("falsified verdict without replayable evidence".into())
            } else {
                Ok(())
            }
        }
    }
}

/// One cell of the taxonomy table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Cell {
    Verdict(Box<Verdict>),
    Error {
        property: Property,
        function: String,
        message: String,
    },
}

impl Cell {
    pub fn symbol(&self) -> &'static str {
        match self {
            Cell::Verdict(v) => v.symbol(),
            Cell::Error { .. } => "!",
        }
    }

    pub fn satisfied(&self) -> Option<bool> {
        match self {
            Cell::Verdict(v) => Some(!v.is_falsified()),
            Cell::Error { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Cell::Verdict(v) => v.cell_label(),
            Cell::Error { message, .. } => format!("! (error: {message})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyRow {
    pub function: String,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyReport {
    pub properties: Vec<Property>,
    pub rows: Vec<TaxonomyRow>,
}

/// Expected ✓/× pattern: SL, MSTC with `C_k = {1..k-1}`, Min-Sum, Constant.
pub const EXPECTED_TABLE: [(&str, [bool; 5]); 4] = [
    ("single-linkage", [true, true, true, true, true]),
    ("mstc-lowest", [true, false, true, true, true]),
    ("min-sum", [true, true, true, false, false]),
    ("constant", [true, true, false, true, true]),
];

pub fn build_taxonomy_table(
    functions: &[ClusteringFunctionHandle],
    b: &CheckBudget,
) -> TaxonomyReport {
    let rows = functions
        .iter()
        .map(|f| TaxonomyRow {
            function: f.name(),
            cells: Property::TABLE
                .iter()
                .map(|&p| match check_property(f.as_ref(), p, b) {
                    Ok(v) => Cell::Verdict(Box::new(v)),
                    Err(e) => Cell::Error {
                        property: p,
                        function: f.name(),
                        message: e.to_string(),
                    },
                })
                .collect(),
        })
        .collect();
    TaxonomyReport {
        properties: Property::TABLE.to_vec(),
        rows,
    }
}

impl TaxonomyReport {
    /// Cells that differ from [`EXPECTED_TABLE`], as `(function, property)`.
    pub fn drift(&self) -> Vec<(String, Property)> {
        let mut out = Vec::new();
        for (name, expected) in EXPECTED_TABLE {
            match self.rows.iter().find(|r| r.function == name) {
                Some(row) => {
                    for ((cell, want), prop) in row.cells.iter().zip(expected).zip(Property::TABLE)
                    {
                        if cell.satisfied() != Some(want) {
                            out.push((name.to_string(), prop));
                        }
                    }
                }
                None => out.extend(Property::TABLE.iter().map(|p| (name.to_string(), *p))),
            }
        }
        out
    }

    /// Plain-text grid.
    pub fn render(&self) -> String {
        let name_w = self
            .rows
            .iter()
            .map(|r| r.function.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = format!("{:<name_w$}", "function");
        for p in &self.properties {
            out.push_str(&format!("  {:^18}", p.title()));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:<name_w$}", row.function));
            for cell in &row.cells {
                out.push_str(&format!("  {:^18}", cell.symbol()));
            }
            out.push('\n');
        }
        out
    }
}
