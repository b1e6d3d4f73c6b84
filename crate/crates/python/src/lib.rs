//! Python bindings. Verdicts come back as `(label, detail)` tuples where
//! `label` is `"yes"`, `"no"` or `"unknown"`.

use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use gbd_kit::dynamics::{orbit_visits_cylinder, PathGenerator};
use gbd_kit::paths::{count_paths, FinitePath};
use gbd_kit::probes::{classify_irreducibility_type, irreducible_probe, period_of_index, Verdict};
use gbd_kit::relabel::relabel;
use gbd_kit::{acceptance, catalog, export, load_spec, model, DiagramHandle, GbdError, Interval};

fn err(e: GbdError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn verdict<Y: std::fmt::Display, N: std::fmt::Display>(v: Verdict<Y, N>) -> (String, String) {
    match v {
        Verdict::Yes(y) => ("yes".into(), y.to_string()),
        Verdict::No(n) => ("no".into(), n.to_string()),
        Verdict::Unknown(b) => ("unknown".into(), b.to_string()),
    }
}

#[pyclass(name = "Diagram", frozen)]
struct PyDiagram {
    inner: DiagramHandle,
}

#[pymethods]
impl PyDiagram {
    /// A catalog family by name, e.g. `"tridiag_B"`.
    #[staticmethod]
    fn family(name: &str) -> PyResult<Self> {
        Ok(Self { inner: catalog::by_name(name).map_err(err)? })
    }

    /// A diagram from JSON or TOML spec text.
    #[staticmethod]
    fn from_spec(text: &str) -> PyResult<Self> {
        Ok(Self { inner: load_spec(text).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn fingerprint(&self) -> String {
        self.inner.fingerprint().to_string()
    }

    fn in_edges(&self, n: usize, v: i64) -> PyResult<Vec<(i64, u64)>> {
        self.inner.in_edges(n, v).map_err(err)
    }

    /// Rows `v` of `F_n` in `rows`, columns `w` in `cols`; both inclusive `(lo, hi)`.
    fn incidence(&self, n: usize, rows: (i64, i64), cols: (i64, i64)) -> PyResult<Vec<Vec<u64>>> {
        self.inner
            .incidence_window(n, Interval::new(rows.0, rows.1), Interval::new(cols.0, cols.1))
            .map_err(err)
    }

    fn count_paths(&self, w: i64, n: usize, v: i64, m: usize) -> PyResult<BigUint> {
        count_paths(&self.inner, w, n, v, m).map_err(err)
    }

    #[pyo3(signature = (i, j, n0 = 0, depth = gbd_kit::DEFAULT_DEPTH))]
    fn irreducible(&self, i: i64, j: i64, n0: usize, depth: usize) -> PyResult<(String, String)> {
        Ok(verdict(irreducible_probe(&self.inner, i, j, n0, depth).map_err(err)?))
    }

    #[pyo3(signature = (i, horizon = 24))]
    fn period(&self, i: i64, horizon: usize) -> PyResult<Option<u64>> {
        Ok(period_of_index(&self.inner, i, horizon).map_err(err)?.gcd)
    }

    fn classify(&self, lo: i64, hi: i64) -> PyResult<(String, String)> {
        let c = classify_irreducibility_type(&self.inner, 64, Interval::new(lo, hi)).map_err(err)?;
        Ok((c.label().to_string(), c.evidence().to_string()))
    }

    /// Does the orbit of `generator` (e.g. `"vertical:0"`) meet the cylinder
    /// through `cylinder` (vertices at levels 0, 1, ...)?
    #[pyo3(signature = (generator, cylinder, depth = gbd_kit::DEFAULT_DEPTH))]
    fn orbit_visits(&self, generator: &str, cylinder: Vec<i64>, depth: usize) -> PyResult<(String, String)> {
        let x = PathGenerator::parse(generator).map_err(err)?;
        let c = FinitePath::through(0, &cylinder).map_err(err)?;
        let v = orbit_visits_cylinder(&self.inner, &x, &c, depth).map_err(err)?;
        Ok(match v {
            Verdict::Yes(hit) => ("yes".into(), format!("m = {}, path {}", hit.m, hit.path)),
            Verdict::No(cert) => ("no".into(), cert.to_string()),
            Verdict::Unknown(b) => ("unknown".into(), b.to_string()),
        })
    }

    /// Relabel by a bijection spec given as JSON or TOML text.
    fn relabel(&self, bijection: &str) -> PyResult<Self> {
        let g = model::parse_bijection_spec(&model::spec_value(bijection).map_err(err)?).map_err(err)?;
        Ok(Self { inner: relabel(&self.inner, &g).map_err(err)? })
    }

    fn to_dot(&self, depth: usize, lo: i64, hi: i64) -> PyResult<String> {
        export::render_dot(&self.inner, depth, Interval::new(lo, hi)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Diagram({:?})", self.inner.name())
    }
}

/// Family names available through `Diagram.family`.
#[pyfunction]
fn families() -> Vec<&'static str> {
    catalog::ENTRIES.iter().map(|e| e.name).filter(|n| *n != "banded").collect()
}

/// Runs the acceptance suite (`quick` stops after criterion 5) and returns
/// `(id, passed, line)` per criterion.
#[pyfunction]
#[pyo3(signature = (quick = true))]
fn acceptance_report(py: Python<'_>, quick: bool) -> Vec<(u32, bool, String)> {
    py.detach(|| acceptance::run(quick).into_iter().map(|r| (r.id as u32, r.passed, r.line())).collect())
}

#[pymodule]
fn gbdkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiagram>()?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance_report, m)?)?;
    Ok(())
}
