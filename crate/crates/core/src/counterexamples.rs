//! Deterministic counterexample constructions: the two-part Min-Sum
//! instance whose optimum flips when its heaviest edge grows, and the
//! Consistency search over the MST-cuts family.

use serde::{Deserialize, Serialize};

use crate::checkers::{check_consistency, CheckBudget, Verdict};
use crate::clusterers::{min_sum_exact, min_sum_objective, Mstc, MstcConfig};
use crate::distance::{edge_order, DistanceFunction};
use crate::error::{Error, Result};
use crate::graph::{kruskal_mst, mst_equal};
use crate::partition::{Partitioning, MAX_ENUMERATION_N};
use crate::transforms::TransformSpec;
use crate::weight::Weight;

/// Smallest even `n` for which the two-part instance with `epsilon = 1/2`
/// has `{A, B}` as its Min-Sum optimum. Re-derived by the test suite.
pub const TWO_HALVES_PINNED_N: usize = 4;

pub fn default_epsilon() -> Weight {
    Weight::new(1, 2).unwrap()
}

/// Points split into halves `A = {1..n/2}` and `B = {n/2+1..n}`.
///
/// Distances are `epsilon` inside each half, `2` across, except the single
/// pair `(x0, y0) = (1, 2)` inside `A`, which is `3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoHalvesInstance {
    pub n: usize,
    pub epsilon: Weight,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub x0: usize,
    pub y0: usize,
    pub d: DistanceFunction,
}

impl TwoHalvesInstance {
    /// `{A, B}`.
    pub fn halves(&self) -> Partitioning {
        Partitioning::from_blocks(self.n, &[self.a.clone(), self.b.clone()])
            .expect("halves partition the points")
    }
}

pub fn two_halves_instance(n: usize, epsilon: Weight) -> Result<TwoHalvesInstance> {
    if n % 2 == 1 {
        return Err(Error::OddN(n));
    }
    if n < 4 {
        return Err(Error::PreconditionNotMet(format!(
            "n must be at least 4, got {n}"
        )));
    }
    if !(epsilon.is_positive() && epsilon < Weight::one()) {
        return Err(Error::EpsilonOutOfRange);
    }
    let half = n / 2;
    let (x0, y0) = (1, 2);
    let d = DistanceFunction::from_fn(n, |i, j| {
        if (i, j) == (x0, y0) {
            Weight::from(3)
        } else if (i <= half) == (j <= half) {
            epsilon
        } else {
            Weight::from(2)
        }
    })?;
    Ok(TwoHalvesInstance {
        n,
        epsilon,
        a: (1..=half).collect(),
        b: (half + 1..=n).collect(),
        x0,
        y0,
        d,
    })
}

/// Smallest even `n <= 12` whose exact Min-Sum 2-clustering is `{A, B}`.
pub fn two_halves_minimal_n(epsilon: Weight) -> Result<usize> {
    for n in (4..=MAX_ENUMERATION_N).step_by(2) {
        let inst = two_halves_instance(n, epsilon)?;
        if min_sum_exact(&inst.d, 2)? == inst.halves() {
            return Ok(n);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no even n <= {MAX_ENUMERATION_N} makes {{A, B}} optimal"
    )))
}

/// Result of growing the `(x0, y0)` edge of the two-part instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub instance: TwoHalvesInstance,
    pub raised_weight: Weight,
    pub d_prime: DistanceFunction,
    pub gamma: Partitioning,
    pub gamma_objective: Weight,
    pub gamma_prime: Partitioning,
    pub gamma_prime_objective: Weight,
    /// `(x0, y0)` was already the strictly heaviest edge, so the edge
    /// sequence is unchanged.
    pub order_preserving: bool,
    pub mst_preserving: bool,
    pub x0_y0_separated: bool,
    pub violates_order_consistency: bool,
    pub violates_mst_coherence: bool,
}

/// Sets `w(x0, y0) = 3n + 1` and compares the two Min-Sum optima.
pub fn min_sum_violation(n: usize, epsilon: Weight) -> Result<ViolationReport> {
    let inst = two_halves_instance(n, epsilon)?;
    let n_star = two_halves_minimal_n(epsilon)?;
    if n < n_star {
        return Err(Error::PreconditionNotMet(format!(
            "n = {n} is below the smallest working size {n_star}"
        )));
    }
    let gamma = min_sum_exact(&inst.d, 2)?;
    if gamma != inst.halves() {
        return Err(Error::PreconditionNotMet(format!(
            "optimum at n = {n} is {gamma}, not {{A, B}}"
        )));
    }
    let raised_weight = Weight::from(3 * n as i64 + 1);
    let d_prime = inst.d.with_weight(inst.x0, inst.y0, raised_weight)?;
    let gamma_prime = min_sum_exact(&d_prime, 2)?;

    let heaviest = inst
        .d
        .edges()
        .iter()
        .filter(|e| e.key() != (inst.x0, inst.y0))
        .all(|e| e.weight < inst.d.get(inst.x0, inst.y0));
    let order_preserving =
        heaviest && edge_order(&inst.d).sequence() == edge_order(&d_prime).sequence();
    let mst_preserving = mst_equal(&kruskal_mst(&inst.d), &kruskal_mst(&d_prime))?;
    let x0_y0_separated = !gamma_prime.same_block(inst.x0, inst.y0);
    let differs = gamma != gamma_prime;
    Ok(ViolationReport {
        gamma_objective: min_sum_objective(&inst.d, &gamma)?,
        gamma_prime_objective: min_sum_objective(&d_prime, &gamma_prime)?,
        instance: inst,
        raised_weight,
        d_prime,
        gamma,
        gamma_prime,
        order_preserving,
        mst_preserving,
        x0_y0_separated,
        violates_order_consistency: order_preserving && differs,
        violates_mst_coherence: mst_preserving && differs,
    })
}

/// Re-derives a report from its parameters and compares every field.
pub fn verify_violation_report(report: &ViolationReport) -> std::result::Result<(), String> {
    let fresh =
        min_sum_violation(report.instance.n, report.instance.epsilon).map_err(|e| e.to_string())?;
    if &fresh != report {
        return Err("recorded report differs from a fresh run".into());
    }
    if !(fresh.violates_order_consistency && fresh.violates_mst_coherence) {
        return Err("report does not demonstrate both violations".into());
    }
    Ok(())
}

/// The pinned instance, its raised copy and the transformation between them.
pub fn two_halves_fixture() -> (TwoHalvesInstance, DistanceFunction, TransformSpec) {
    let inst = two_halves_instance(TWO_HALVES_PINNED_N, default_epsilon())
        .expect("pinned parameters are legal");
    let weight = Weight::from(3 * TWO_HALVES_PINNED_N as i64 + 1);
    let transform = TransformSpec::SetEdge {
        i: inst.x0,
        j: inst.y0,
        weight,
    };
    let raised = transform.apply(&inst.d).expect("raised weight is positive");
    (inst, raised, transform)
}

/// Consistency search against a member of the MST-cuts family.
pub fn mstc_consistency_counterexample(cfg: &MstcConfig, b: &CheckBudget) -> Result<Verdict> {
    check_consistency(&Mstc(cfg.clone()), b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_instance() {
        let inst = two_halves_instance(4, default_epsilon()).unwrap();
        assert_eq!(inst.d.get(1, 2), Weight::from(3));
        assert_eq!(inst.d.get(3, 4), default_epsilon());
        for (i, j) in [(1, 3), (1, 4), (2, 3), (2, 4)] {
            assert_eq!(inst.d.get(i, j), Weight::from(2));
        }
        let threes = inst
            .d
            .edges()
            .iter()
            .filter(|e| e.weight == Weight::from(3))
            .count();
        assert_eq!(threes, 1);
    }

    #[test]
    fn parameter_errors() {
        assert_eq!(
            two_halves_instance(5, default_epsilon()),
            Err(Error::OddN(5))
        );
        assert_eq!(
            two_halves_instance(6, Weight::one()),
            Err(Error::EpsilonOutOfRange)
        );
        assert_eq!(
            two_halves_instance(6, Weight::zero()),
            Err(Error::EpsilonOutOfRange)
        );
        assert!(matches!(
            two_halves_instance(2, default_epsilon()),
            Err(Error::PreconditionNotMet(_))
        ));
    }

    #[test]
    fn fixture_uses_pinned_size() {
        let (inst, raised, _) = two_halves_fixture();
        assert_eq!(inst.n, TWO_HALVES_PINNED_N);
        assert_eq!(raised.get(1, 2), Weight::from(13));
    }
}
