"""Smoke test for the Python bindings.

Build and install first:

    pip install --no-build-isolation -e crates/python
"""
from fractions import Fraction

import clustax


def main():
    tri = clustax.DistanceFunction([[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    assert tri.n == 3
    assert tri.get(2, 3) == Fraction(3)
    assert clustax.single_linkage(tri, 2) == [[1, 2], [3]]
    assert clustax.single_linkage_via_mst(tri, 2) == [[1, 2], [3]]
    assert clustax.mstc(tri, 2) == [[1, 3], [2]]
    assert clustax.cluster(tri, 3, "min-sum") == [[1], [2], [3]]
    assert clustax.mst(tri) == [(1, 2, Fraction(1)), (1, 3, Fraction(2))]
    assert clustax.path_distance(tri)[1][2] == Fraction(2)

    same = clustax.DistanceFunction.parse(tri.to_dense())
    assert same == tri
    assert clustax.DistanceFunction.parse(tri.to_json()) == tri
    halves = clustax.DistanceFunction.from_edges(
        3, [(1, 2, "1/2"), (1, 3, Fraction(5, 2)), (2, 3, 2)]
    )
    assert halves.get(1, 2) == Fraction(1, 2)

    try:
        clustax.DistanceFunction([[0, 1.5], [1.5, 0]])
    except TypeError:
        pass
    else:
        raise AssertionError("float weights must be refused")
    try:
        clustax.single_linkage(tri, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("k > n must be refused")

    assert len(clustax.enumerate_partitions(4, 2)) == 7

    report = clustax.min_sum_violation_report()
    assert report["gamma"] == [[1, 2], [3, 4]]
    assert report["violates_order_consistency"] and report["violates_mst_coherence"]

    cert = clustax.build_chain(tri, 2)
    assert len(cert["steps"]) == 7
    assert clustax.verify_chain(cert) == (True, None, None)
    cert["steps"][3]["d"] = cert["steps"][2]["d"]
    valid, step, _ = clustax.verify_chain(cert)
    assert not valid and step == 4

    verdict = clustax.check("min-sum", "order-consistency", trials=10)
    assert verdict["status"] == "falsified"
    verdict = clustax.check("single-linkage", "consistency", trials=200, sizes=[(5, 2), (6, 3)])
    assert verdict["status"] != "falsified"

    table = clustax.taxonomy_table(trials=200)
    assert table["drift"] == [], table["table"]
    print(table["table"], end="")
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
