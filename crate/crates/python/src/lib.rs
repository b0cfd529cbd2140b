//! Python bindings.
//!
//! Weights cross the boundary as `fractions.Fraction` on the way out and as
//! `int`, `Fraction` or `"p/q"` strings on the way in; floats are refused.
//! Partitions are lists of 1-based point lists.

use pyo3::exceptions::{PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;

use clustax_core::certificate::{
    build_chain as core_build_chain, verify_chain as core_verify_chain, ChainCertificate,
};
use clustax_core::checkers::{build_taxonomy_table, check_property, CheckBudget, Property};
use clustax_core::clusterers::{self, FunctionSpec, MstcConfig};
use clustax_core::counterexamples::{default_epsilon, min_sum_violation, TWO_HALVES_PINNED_N};
use clustax_core::io::{parse_instance, serialize_instance, InstanceForm};
use clustax_core::{graph, Error, Partitioning, Weight};

fn err(e: Error) -> PyErr {
    if e.is_plugin_failure() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn weight_of(obj: &Bound<'_, PyAny>) -> PyResult<Weight> {
    if let Ok(s) = obj.cast::<PyString>() {
        return s.to_str()?.parse().map_err(err);
    }
    if obj.hasattr("numerator")? && obj.hasattr("denominator")? {
        let p: i128 = obj.getattr("numerator")?.extract()?;
        let q: i128 = obj.getattr("denominator")?.extract()?;
        return Weight::new(p, q).map_err(err);
    }
    Err(PyTypeError::new_err(
        "weights must be int, Fraction or a \"p/q\" string",
    ))
}

fn fraction<'py>(py: Python<'py>, w: Weight) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((w.numer(), w.denom()))
}

fn json_value<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn blocks(p: Partitioning) -> Vec<Vec<usize>> {
    p.blocks()
}

/// A symmetric, positive distance on points `1..n`.
#[pyclass(name = "DistanceFunction", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyDistance {
    inner: clustax_core::DistanceFunction,
}

#[pymethods]
impl PyDistance {
    /// Build from a square matrix with a zero diagonal.
    #[new]
    fn new(matrix: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Self> {
        let raw = matrix
            .iter()
            .map(|row| row.iter().map(weight_of).collect::<PyResult<Vec<_>>>())
            .collect::<PyResult<Vec<_>>>()?;
        let inner = clustax_core::distance::validate_distance(&raw, raw.len()).map_err(err)?;
        Ok(PyDistance { inner })
    }

    /// Build from `(i, j, w)` triples covering every pair.
    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let edges = edges
            .iter()
            .map(|(i, j, w)| {
                Ok(clustax_core::Edge {
                    i: *i,
                    j: *j,
                    weight: weight_of(w)?,
                })
            })
            .collect::<PyResult<Vec<_>>>()?;
        let inner = clustax_core::DistanceFunction::from_edges(n, &edges).map_err(err)?;
        Ok(PyDistance { inner })
    }

    /// Parse an instance file, dense or edge-list form.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyDistance {
            inner: parse_instance(text).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn get<'py>(&self, py: Python<'py>, i: usize, j: usize) -> PyResult<Bound<'py, PyAny>> {
        let n = self.inner.n();
        if i == 0 || j == 0 || i > n || j > n {
            return Err(PyValueError::new_err(format!("points are 1..={n}")));
        }
        fraction(py, self.inner.get(i, j))
    }

    fn edges<'py>(&self, py: Python<'py>) -> PyResult<Vec<(usize, usize, Bound<'py, PyAny>)>> {
        self.inner
            .edges()
            .into_iter()
            .map(|e| Ok((e.i, e.j, fraction(py, e.weight)?)))
            .collect()
    }

    fn has_distinct_weights(&self) -> bool {
        self.inner.has_distinct_weights()
    }

    fn to_dense(&self) -> String {
        serialize_instance(&self.inner, InstanceForm::Dense)
    }

    fn to_json(&self) -> String {
        serialize_instance(&self.inner, InstanceForm::EdgeList)
            .trim_end()
            .to_string()
    }

    fn __repr__(&self) -> String {
        format!("DistanceFunction({:?})", self.inner)
    }
}

#[pyfunction]
fn single_linkage(d: &PyDistance, k: usize) -> PyResult<Vec<Vec<usize>>> {
    clusterers::single_linkage(&d.inner, k)
        .map(blocks)
        .map_err(err)
}

#[pyfunction]
fn single_linkage_via_mst(d: &PyDistance, k: usize) -> PyResult<Vec<Vec<usize>>> {
    clusterers::single_linkage_via_mst(&d.inner, k)
        .map(blocks)
        .map_err(err)
}

/// `rule` is `"lowest"` (cut the lightest MST edges) or `"highest"`.
#[pyfunction]
#[pyo3(signature = (d, k, rule = "lowest"))]
fn mstc(d: &PyDistance, k: usize, rule: &str) -> PyResult<Vec<Vec<usize>>> {
    let cfg = match rule {
        "lowest" => MstcConfig::Lowest,
        "highest" => MstcConfig::Highest,
        other => return Err(PyValueError::new_err(format!("unknown rule {other:?}"))),
    };
    clusterers::mstc(&cfg, &d.inner, k).map(blocks).map_err(err)
}

#[pyfunction]
fn min_sum(d: &PyDistance, k: usize) -> PyResult<Vec<Vec<usize>>> {
    clusterers::min_sum_exact(&d.inner, k)
        .map(blocks)
        .map_err(err)
}

#[pyfunction]
fn min_sum_objective<'py>(
    py: Python<'py>,
    d: &PyDistance,
    clusters: Vec<Vec<usize>>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = Partitioning::from_blocks(d.inner.n(), &clusters).map_err(err)?;
    fraction(
        py,
        clusterers::min_sum_objective(&d.inner, &p).map_err(err)?,
    )
}

/// Any built-in by name, or `"plugin:<command line>"`.
#[pyfunction]
fn cluster(d: &PyDistance, k: usize, function: &str) -> PyResult<Vec<Vec<usize>>> {
    let f = function
        .parse::<FunctionSpec>()
        .and_then(|s| s.handle())
        .map_err(err)?;
    f.cluster(&d.inner, k).map(blocks).map_err(err)
}

/// MST edges `(i, j, w)` in ascending order.
#[pyfunction]
fn mst<'py>(py: Python<'py>, d: &PyDistance) -> PyResult<Vec<(usize, usize, Bound<'py, PyAny>)>> {
    graph::kruskal_mst(&d.inner)
        .edges()
        .iter()
        .map(|e| Ok((e.i, e.j, fraction(py, e.weight)?)))
        .collect()
}

/// Minimax path distance as a full matrix with a zero diagonal.
#[pyfunction]
fn path_distance<'py>(py: Python<'py>, d: &PyDistance) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
    let p = graph::path_distance(&d.inner);
    let n = d.inner.n();
    (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| fraction(py, if i == j { Weight::zero() } else { p.get(i, j) }))
                .collect()
        })
        .collect()
}

fn budget(trials: usize, sizes: Option<Vec<(usize, usize)>>, seed: u64) -> PyResult<CheckBudget> {
    let sizes = sizes.unwrap_or_else(|| CheckBudget::sizes_for(4..=8));
    CheckBudget::new(trials, sizes, seed).map_err(err)
}

/// Run one property checker; returns the verdict as a dict.
#[pyfunction]
#[pyo3(signature = (function, property, trials = 2000, sizes = None, seed = 1))]
fn check<'py>(
    py: Python<'py>,
    function: &str,
    property: &str,
    trials: usize,
    sizes: Option<Vec<(usize, usize)>>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let b = budget(trials, sizes, seed)?;
    let property: Property = property.parse().map_err(err)?;
    let f = function
        .parse::<FunctionSpec>()
        .and_then(|s| s.handle())
        .map_err(err)?;
    let v = check_property(f.as_ref(), property, &b).map_err(err)?;
    json_value(py, &v)
}

/// The four-function taxonomy table: `{"table", "drift", "report"}`.
#[pyfunction]
#[pyo3(signature = (trials = 2000, seed = 1))]
fn taxonomy_table<'py>(py: Python<'py>, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let b = budget(trials, None, seed)?;
    let handles = FunctionSpec::table_rows()
        .iter()
        .map(FunctionSpec::handle)
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let report = build_taxonomy_table(&handles, &b);
    let drift: Vec<String> = report
        .drift()
        .iter()
        .map(|(f, p)| format!("{f}/{p}"))
        .collect();
    let out = serde_json::json!({ "table": report.render(), "drift": drift, "report": report });
    json_value(py, &out)
}

#[pyfunction]
fn build_chain<'py>(py: Python<'py>, d: &PyDistance, k: usize) -> PyResult<Bound<'py, PyAny>> {
    json_value(py, &core_build_chain(&d.inner, k).map_err(err)?)
}

/// Returns `(valid, failing_step, reason)` for a certificate dict.
#[pyfunction]
fn verify_chain(
    py: Python<'_>,
    certificate: &Bound<'_, PyAny>,
) -> PyResult<(bool, Option<usize>, Option<String>)> {
    let text: String = py
        .import("json")?
        .call_method1("dumps", (certificate,))?
        .extract()?;
    let cert: ChainCertificate =
        serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let v = core_verify_chain(&cert);
    Ok((v.valid, v.failing_step, v.reason))
}

/// The Min-Sum violation on the two-part instance.
#[pyfunction]
#[pyo3(signature = (n = TWO_HALVES_PINNED_N, epsilon = None))]
fn min_sum_violation_report<'py>(
    py: Python<'py>,
    n: usize,
    epsilon: Option<Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let eps = match epsilon {
        Some(e) => weight_of(&e)?,
        None => default_epsilon(),
    };
    json_value(py, &min_sum_violation(n, eps).map_err(err)?)
}

#[pyfunction]
fn enumerate_partitions(n: usize, k: usize) -> PyResult<Vec<Vec<Vec<usize>>>> {
    Ok(clustax_core::enumerate_partitions(n, k)
        .map_err(err)?
        .map(blocks)
        .collect())
}

#[pymodule]
#[pyo3(name = "clustax")]
fn clustax_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistance>()?;
    m.add_function(wrap_pyfunction!(single_linkage, m)?)?;
    m.add_function(wrap_pyfunction!(single_linkage_via_mst, m)?)?;
    m.add_function(wrap_pyfunction!(mstc, m)?)?;
    m.add_function(wrap_pyfunction!(min_sum, m)?)?;
    m.add_function(wrap_pyfunction!(min_sum_objective, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(mst, m)?)?;
    m.add_function(wrap_pyfunction!(path_distance, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(taxonomy_table, m)?)?;
    m.add_function(wrap_pyfunction!(build_chain, m)?)?;
    m.add_function(wrap_pyfunction!(verify_chain, m)?)?;
    m.add_function(wrap_pyfunction!(min_sum_violation_report, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_partitions, m)?)?;
    Ok(())
}
