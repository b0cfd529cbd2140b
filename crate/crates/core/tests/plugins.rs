use std::path::PathBuf;

use clustax::checkers::{check_property, CheckBudget, Property};
use clustax::sampling::{random_distinct_instance, rng_for};
use clustax::{
    ClusteringFunction, DistanceFunction, Error, FunctionSpec, Partitioning, PluginEndpoint,
    PluginHandle, Weight,
};

fn script(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/plugins")
        .join(name)
        .display()
        .to_string()
}

fn endpoint(name: &str) -> PluginEndpoint {
    PluginEndpoint::new("python3", vec![script(name)])
}

fn triangle() -> DistanceFunction {
    DistanceFunction::from_fn(3, |i, j| Weight::from((i + j - 2) as i64)).unwrap()
}

#[test]
fn reference_plugin_answers_the_triangle() {
    let h = PluginHandle::connect(endpoint("single_linkage.py")).unwrap();
    assert!(h.is_deterministic());
    assert_eq!(
        h.cluster(&triangle(), 2).unwrap(),
        Partitioning::from_blocks(3, &[vec![1, 2], vec![3]]).unwrap()
    );
    assert_eq!(
        h.cluster(&triangle(), 3).unwrap(),
        Partitioning::singletons(3)
    );
    assert!(matches!(
        h.cluster(&triangle(), 4),
        Err(Error::InvalidK { .. })
    ));
    assert!(h.name().starts_with("plugin:python3 "));
}

#[test]
fn plugin_spec_round_trips_through_the_name() {
    let spec: FunctionSpec = format!("plugin:python3 {}", script("single_linkage.py"))
        .parse()
        .unwrap();
    let h = spec.handle().unwrap();
    let again: FunctionSpec = h.name().parse().unwrap();
    assert_eq!(again, spec);
}

#[test]
fn failure_classes_are_distinct() {
    assert!(matches!(
        PluginHandle::connect(PluginEndpoint::new(
            "/nonexistent/clustering-plugin",
            vec![]
        )),
        Err(Error::PluginLaunchFailure(_))
    ));
    assert!(matches!(
        PluginHandle::connect(endpoint("sleeper.py").with_timeout_ms(200).unwrap()),
        Err(Error::PluginTimeout(200))
    ));
    assert!(matches!(
        PluginHandle::connect(endpoint("garbage.py")),
        Err(Error::PluginProtocolError(_))
    ));
    assert!(matches!(
        PluginHandle::connect(endpoint("overlapping.py")),
        Err(Error::PluginInvalidPartition(_))
    ));
    assert!(matches!(
        PluginHandle::connect(endpoint("zero_based.py")),
        Err(Error::PluginInvalidPartition(_))
    ));
}

#[test]
fn flapping_plugin_is_not_deterministic() {
    let h = PluginHandle::connect(endpoint("coin_flip.py")).unwrap();
    assert!(!h.is_deterministic());
}

#[test]
fn timeouts_are_errored_trials_and_the_plugin_restarts() {
    let ep = endpoint("slow_on_three.py")
        .with_timeout_ms(200)
        .unwrap()
        .with_max_failures(100);
    let h = PluginHandle::connect(ep).unwrap();
    let d = random_distinct_instance(5, &mut rng_for(1, 0));
    assert!(matches!(h.cluster(&d, 3), Err(Error::PluginTimeout(200))));
    assert_eq!(h.cluster(&d, 2).unwrap().k(), 2);

    let b = CheckBudget::new(6, vec![(5, 2), (5, 3)], 1).unwrap();
    let v = check_property(&h, Property::ScaleInvariance, &b).unwrap();
    assert!(!v.is_falsified());
    assert_eq!(v.trials, 6);
    assert_eq!(v.errored_trials, 3);
}

#[test]
fn restart_limit_stops_relaunching() {
    let ep = endpoint("slow_on_three.py")
        .with_timeout_ms(100)
        .unwrap()
        .with_max_failures(2);
    let h = PluginHandle::connect(ep).unwrap();
    let d = random_distinct_instance(5, &mut rng_for(1, 0));
    assert!(matches!(h.cluster(&d, 3), Err(Error::PluginTimeout(_))));
    assert!(matches!(h.cluster(&d, 3), Err(Error::PluginTimeout(_))));
    assert!(matches!(
        h.cluster(&d, 2),
        Err(Error::PluginLaunchFailure(_))
    ));
}

#[test]
fn audited_plugin_is_not_falsified() {
    let h = PluginHandle::connect(endpoint("single_linkage.py")).unwrap();
    let b = CheckBudget::new(40, CheckBudget::sizes_for(4..=6), 5).unwrap();
    for p in Property::TABLE {
        let v = check_property(&h, p, &b).unwrap();
        assert!(!v.is_falsified(), "{p}: {v:?}");
    }
}
