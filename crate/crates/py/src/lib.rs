//! Python bindings: groups, sequences, zero-sum counting and finding,
//! constructions, congruence checks and the extremal search.

use std::time::Duration;

use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use zerosum::congruence;
use zerosum::construct as build;
use zerosum::lifting;
use zerosum::search::{self, SearchConfig};
use zerosum::{Error, GroupSpec, LengthSet, ZeroSumDp};

create_exception!(pyzerosum, BudgetError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Budget { .. } => BudgetError::new_err(e.to_string()),
        Error::InvariantViolation(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for zerosum::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// JSON values become plain dicts, lists and scalars.
fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_bound_py_any(py)?,
            (None, Some(i)) => i.into_bound_py_any(py)?,
            _ => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn report<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// A finite abelian group `C_{n_1} ⊕ ⋯ ⊕ C_{n_r}`, written `"3^1^3"` or `"9,9,9"`.
#[pyclass(name = "Group", module = "pyzerosum", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyGroup {
    inner: GroupSpec,
}

#[pymethods]
impl PyGroup {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyGroup { inner: spec.parse().or_py()? })
    }

    #[getter]
    fn factors(&self) -> Vec<u32> {
        self.inner.factors().to_vec()
    }

    #[getter]
    fn order(&self) -> u64 {
        self.inner.order()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn exponent(&self) -> u32 {
        self.inner.exponent()
    }

    fn davenport_star(&self) -> u64 {
        self.inner.davenport_star()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Group('{}')", self.inner)
    }
}

fn group_arg(group: &Bound<'_, PyAny>) -> PyResult<GroupSpec> {
    if let Ok(g) = group.cast::<PyGroup>() {
        return Ok(g.get().inner.clone());
    }
    let spec: String = group.extract()?;
    spec.parse().or_py()
}

/// A sequence over a group, as a multiset of elements.
#[pyclass(name = "Sequence", module = "pyzerosum", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq)]
struct PySequence {
    inner: zerosum::Sequence,
}

fn wrap(inner: zerosum::Sequence) -> PySequence {
    PySequence { inner }
}

#[pymethods]
impl PySequence {
    /// `elements` lists residue tuples, repeated as often as they occur.
    #[new]
    fn new(group: &Bound<'_, PyAny>, elements: Vec<Vec<i64>>) -> PyResult<Self> {
        let g = group_arg(group)?;
        let items = elements.iter().map(|v| g.reduce(v)).collect::<zerosum::Result<Vec<_>>>().or_py()?;
        Ok(wrap(zerosum::Sequence::from_elements(&g, items).or_py()?))
    }

    /// From `(residues, multiplicity)` pairs.
    #[staticmethod]
    fn from_entries(group: &Bound<'_, PyAny>, entries: Vec<(Vec<i64>, u32)>) -> PyResult<Self> {
        let g = group_arg(group)?;
        let refs: Vec<(&[i64], u32)> = entries.iter().map(|(v, m)| (v.as_slice(), *m)).collect();
        Ok(wrap(zerosum::Sequence::from_coords(&g, &refs).or_py()?))
    }

    /// The text file format: a `group` line then one element per line.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(wrap(zerosum::Sequence::parse(text).or_py()?))
    }

    #[staticmethod]
    fn random(group: &Bound<'_, PyAny>, length: usize, seed: u64) -> PyResult<Self> {
        let g = group_arg(group)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(wrap(zerosum::Sequence::random(&g, length, &mut rng)))
    }

    #[getter]
    fn group(&self) -> PyGroup {
        PyGroup {
            inner: self.inner.group().clone(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.length() as usize
    }

    fn entries(&self) -> Vec<(Vec<u32>, u32)> {
        self.inner
            .entries()
            .iter()
            .map(|(g, m)| (g.residues().to_vec(), *m))
            .collect()
    }

    fn sigma(&self) -> Vec<u32> {
        self.inner.sigma().residues().to_vec()
    }

    fn is_zero_sum(&self) -> bool {
        self.inner.is_zero_sum()
    }

    fn remove(&self, other: PyRef<'_, PySequence>) -> PyResult<Self> {
        Ok(wrap(self.inner.remove(&other.inner).or_py()?))
    }

    fn concat(&self, other: PyRef<'_, PySequence>) -> PyResult<Self> {
        Ok(wrap(self.inner.concat(&other.inner).or_py()?))
    }

    fn canonical_form(&self) -> Self {
        wrap(self.inner.canonical_form())
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __str__(&self) -> String {
        self.inner.to_inline()
    }

    fn __repr__(&self) -> String {
        format!("Sequence('{}', '{}')", self.inner.group(), self.inner.to_inline())
    }
}

/// `[N^0(S), …, N^|S|(S)]` as exact integers.
#[pyfunction]
fn count_table(py: Python<'_>, seq: PyRef<'_, PySequence>) -> PyResult<Vec<BigUint>> {
    let s = seq.inner.clone();
    let table = py.detach(move || ZeroSumDp::default().count_table(&s)).or_py()?;
    Ok(table.counts().to_vec())
}

#[pyfunction]
fn count_mod_p(seq: PyRef<'_, PySequence>, p: u32) -> PyResult<Vec<u32>> {
    ZeroSumDp::default().count_mod_p(&seq.inner, p).or_py()
}

/// Lengths `k ≥ 1` of the zero-sum subsequences.
#[pyfunction]
fn zero_sum_spectrum(seq: PyRef<'_, PySequence>) -> PyResult<Vec<usize>> {
    ZeroSumDp::default().zero_sum_length_spectrum(&seq.inner).or_py()
}

/// A zero-sum subsequence of length `k`, or `None`.
#[pyfunction]
fn find_zero_sum(seq: PyRef<'_, PySequence>, k: u64) -> PyResult<Option<PySequence>> {
    let w = ZeroSumDp::default().find_zero_sum_of_length(&seq.inner, k).or_py()?;
    Ok(w.map(|w| wrap(w.sub)))
}

/// A zero-sum subsequence with length in `lengths` (e.g. `"1..4,9"`), or `None`.
#[pyfunction]
fn find_zero_sum_in(seq: PyRef<'_, PySequence>, lengths: &str) -> PyResult<Option<PySequence>> {
    let l: LengthSet = lengths.parse().or_py()?;
    let w = ZeroSumDp::default().find_zero_sum_length_in(&seq.inner, &l).or_py()?;
    Ok(w.map(|w| wrap(w.sub)))
}

fn lifted(l: lifting::Lifted) -> (PySequence, u32) {
    (wrap(l.witness.sub), l.recursion_depth)
}

/// Length `2·3^n` zero-sum over `C_{3^n}^3`; returns `(witness, recursion_depth)`.
#[pyfunction]
fn find_2x(seq: PyRef<'_, PySequence>) -> PyResult<(PySequence, u32)> {
    Ok(lifted(lifting::find_2x(&seq.inner).or_py()?))
}

#[pyfunction]
fn find_3x(seq: PyRef<'_, PySequence>) -> PyResult<(PySequence, u32)> {
    Ok(lifted(lifting::find_3x(&seq.inner).or_py()?))
}

#[pyfunction]
fn find_5x(seq: PyRef<'_, PySequence>) -> PyResult<(PySequence, u32)> {
    Ok(lifted(lifting::find_5x(&seq.inner).or_py()?))
}

/// An extremal sequence: `which` is one of thm2, thm3, thm6, cor5, egz.
/// Returns `(sequence, spectrum, claim)`.
#[pyfunction]
#[pyo3(signature = (which, p=None, n=1, r=None, k=None, group=None))]
fn construct(
    which: &str,
    p: Option<u32>,
    n: u32,
    r: Option<u32>,
    k: Option<u32>,
    group: Option<&Bound<'_, PyAny>>,
) -> PyResult<(PySequence, Vec<usize>, String)> {
    let need = |v: Option<u32>, name: &str| v.ok_or_else(|| PyValueError::new_err(format!("{which} needs {name}")));
    let c = match which {
        "thm2" => build::construct_thm2_lower(need(p, "p")?, need(r, "r")? as usize),
        "thm3" => build::construct_thm3_lower(need(p, "p")?, n, need(r, "r")?, need(k, "k")?),
        "thm6" => build::construct_thm6_lower(need(p, "p")?, n),
        "cor5" => build::construct_cor5_lower(need(p, "p")?, n),
        "egz" => {
            let g = group_arg(group.ok_or_else(|| PyValueError::new_err("egz needs group"))?)?;
            build::construct_egz_lower(&g, k.unwrap_or(1), &SearchConfig::default())
        }
        _ => return Err(PyValueError::new_err(format!("unknown construction {which:?}"))),
    }
    .or_py()?;
    Ok((wrap(c.sequence), c.spectrum, c.claim))
}

#[pyfunction]
fn olson_alternating<'py>(py: Python<'py>, seq: PyRef<'_, PySequence>, p: u32) -> PyResult<Bound<'py, PyAny>> {
    report(py, &congruence::olson_alternating(&seq.inner, p).or_py()?)
}

#[pyfunction]
fn corollary_pn<'py>(py: Python<'py>, seq: PyRef<'_, PySequence>, p: u32, q: u64) -> PyResult<Bound<'py, PyAny>> {
    report(py, &congruence::corollary_pn(&seq.inner, p, q).or_py()?)
}

#[pyfunction]
fn window_identity_check<'py>(
    py: Python<'py>,
    seq: PyRef<'_, PySequence>,
    j: u64,
    m: u64,
) -> PyResult<Bound<'py, PyAny>> {
    report(py, &congruence::window_identity_check(&seq.inner, j, m).or_py()?)
}

#[pyfunction]
fn lucas_binomial(a: u64, b: u64, p: u32) -> PyResult<u32> {
    congruence::lucas_binomial(a, b, p).or_py()
}

#[pyfunction]
fn lemma6_matrix_det<'py>(py: Python<'py>, a: u64, k: u64) -> PyResult<Bound<'py, PyAny>> {
    report(py, &congruence::lemma6_matrix_det(a, k).or_py()?)
}

#[pyfunction]
fn theorem3_rank_argument<'py>(py: Python<'py>, p: u32, n: u32, r: u32, k: u64) -> PyResult<Bound<'py, PyAny>> {
    report(py, &congruence::theorem3_rank_argument(p, n, r, k).or_py()?)
}

fn config(budget_nodes: Option<u64>, budget_seconds: Option<f64>, workers: usize) -> SearchConfig {
    let mut cfg = SearchConfig::default().with_workers(workers);
    cfg.budget_nodes = budget_nodes;
    cfg.budget_time = budget_seconds.map(Duration::from_secs_f64);
    cfg
}

/// `s_L(G)` by exhaustive search, as a dict with `value` (None when the
/// budget ran out), `lower_bound`, `exact` and the certificate.
#[pyfunction]
#[pyo3(signature = (group, avoid="all", budget_nodes=None, budget_seconds=None, workers=1))]
fn compute_s_l<'py>(
    py: Python<'py>,
    group: &Bound<'py, PyAny>,
    avoid: &str,
    budget_nodes: Option<u64>,
    budget_seconds: Option<f64>,
    workers: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let g = group_arg(group)?;
    let l = avoid.parse::<LengthSet>().or_py()?.normalized_for(&g);
    let cfg = config(budget_nodes, budget_seconds, workers);
    let v = py.detach(move || search::compute_s_l(&g, &l, &cfg)).or_py()?;
    report(py, &v)
}

/// Whether every sequence of length `length` has a zero-sum with length in `avoid`.
#[pyfunction]
#[pyo3(signature = (group, avoid, length, budget_nodes=None, budget_seconds=None, workers=1))]
fn verify_upper_bound<'py>(
    py: Python<'py>,
    group: &Bound<'py, PyAny>,
    avoid: &str,
    length: u64,
    budget_nodes: Option<u64>,
    budget_seconds: Option<f64>,
    workers: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let g = group_arg(group)?;
    let l = avoid.parse::<LengthSet>().or_py()?.normalized_for(&g);
    let cfg = config(budget_nodes, budget_seconds, workers);
    let c = py.detach(move || search::verify_upper_bound(&g, &l, length, &cfg)).or_py()?;
    report(py, &c)
}

#[pymodule]
fn pyzerosum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PySequence>()?;
    m.add("BudgetError", m.py().get_type::<BudgetError>())?;
    m.add_function(wrap_pyfunction!(count_table, m)?)?;
    m.add_function(wrap_pyfunction!(count_mod_p, m)?)?;
    m.add_function(wrap_pyfunction!(zero_sum_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(find_zero_sum, m)?)?;
    m.add_function(wrap_pyfunction!(find_zero_sum_in, m)?)?;
    m.add_function(wrap_pyfunction!(find_2x, m)?)?;
    m.add_function(wrap_pyfunction!(find_3x, m)?)?;
    m.add_function(wrap_pyfunction!(find_5x, m)?)?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(olson_alternating, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_pn, m)?)?;
    m.add_function(wrap_pyfunction!(window_identity_check, m)?)?;
    m.add_function(wrap_pyfunction!(lucas_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(lemma6_matrix_det, m)?)?;
    m.add_function(wrap_pyfunction!(theorem3_rank_argument, m)?)?;
    m.add_function(wrap_pyfunction!(compute_s_l, m)?)?;
    m.add_function(wrap_pyfunction!(verify_upper_bound, m)?)?;
    Ok(())
}
