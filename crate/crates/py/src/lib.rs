//! Python bindings for `siplab`.
//!
//! Vectors cross the boundary as lists of floats; reports and certificates
//! as JSON strings, the same documents the command line writes.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use siplab::counterexample::{self as cx, Certificate, PipelineConfig, ReplayMode, SearchOptions};
use siplab::harness::{load_certificates, parse_norm};
use siplab::{ortho, quotient, sip, Error, QuotientElement, SubspaceBasis, Vector};

create_exception!(siplab, SiplabError, PyValueError);
create_exception!(siplab, NoNonlinearComplementError, SiplabError);

fn err(e: Error) -> PyErr {
    match e {
        Error::NoNonlinearComplement { .. } => NoNonlinearComplementError::new_err(e.to_string()),
        _ => SiplabError::new_err(e.to_string()),
    }
}

fn vector(c: Vec<f64>) -> PyResult<Vector> {
    Vector::new(c).map_err(err)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("values serialize")
}

/// A finite-dimensional norm, built from a spec such as `"lp:3:4"`,
/// `"mixed"`, `"mixed:4:1@2,2@2"` or a JSON norm config.
#[pyclass(name = "NormModel", module = "siplab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNormModel {
    inner: siplab::NormModel,
}

#[pymethods]
impl PyNormModel {
    #[new]
    #[pyo3(signature = (spec, dim=None))]
    fn new(spec: &str, dim: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: parse_norm(spec, dim).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn smooth(&self) -> bool {
        self.inner.is_smooth()
    }

    #[getter]
    fn strictly_convex(&self) -> bool {
        self.inner.is_strictly_convex()
    }

    /// `"closed_form"` or `"solver"`.
    #[getter]
    fn path(&self) -> String {
        self.inner.path().to_string()
    }

    fn norm(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.norm(&vector(x)?).map_err(err)
    }

    /// Unit supporting functional at a non-zero `y`.
    fn support(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.support(&vector(y)?).map_err(err)?.functional.into_inner())
    }

    /// `[x|y]`
    fn sip(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        sip::sip_eval(&vector(x)?, &vector(y)?, &self.inner).map_err(err)
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("NormModel({})", self.inner)
    }
}

fn subspace(m: &PyNormModel, basis: Vec<Vec<f64>>) -> PyResult<SubspaceBasis> {
    let basis = basis.into_iter().map(vector).collect::<PyResult<Vec<_>>>()?;
    SubspaceBasis::new(basis, m.inner.clone()).map_err(err)
}

#[pyfunction]
fn sip_eval(x: Vec<f64>, y: Vec<f64>, model: &PyNormModel) -> PyResult<f64> {
    model.sip(x, y)
}

/// Norm-only Birkhoff test of `x ⊥ y`.
#[pyfunction]
#[pyo3(signature = (x, y, model, tol=1e-7))]
fn birkhoff_check(x: Vec<f64>, y: Vec<f64>, model: &PyNormModel, tol: f64) -> PyResult<bool> {
    ortho::birkhoff_check(&vector(x)?, &vector(y)?, &model.inner, tol).map_err(err)
}

/// `[y|x] = 0` within `tol·‖x‖‖y‖`.
#[pyfunction]
#[pyo3(signature = (x, y, model, tol=1e-7))]
fn sip_orthogonal(x: Vec<f64>, y: Vec<f64>, model: &PyNormModel, tol: f64) -> PyResult<bool> {
    ortho::sip_orthogonal(&vector(x)?, &vector(y)?, &model.inner, tol).map_err(err)
}

/// Returns `(y, z, residual)` with `x = y + z`, `y` the best approximation
/// in `span(basis)` and `z ⊥ span(basis)`.
#[pyfunction]
#[pyo3(signature = (x, basis, model, tol=1e-9))]
fn best_approximation(
    x: Vec<f64>,
    basis: Vec<Vec<f64>>,
    model: &PyNormModel,
    tol: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let sub = subspace(model, basis)?;
    let d = ortho::orthogonal_decompose(&vector(x)?, &sub, tol).map_err(err)?;
    Ok((d.y.into_inner(), d.z.into_inner(), d.residual_orth))
}

/// `X/Y` for `Y = span(basis)`.
#[pyclass(name = "QuotientSpace", module = "siplab", frozen)]
struct PyQuotientSpace {
    inner: siplab::QuotientSpace,
}

const QUOTIENT_TOL: f64 = 1e-12;

#[pymethods]
impl PyQuotientSpace {
    #[new]
    fn new(model: &PyNormModel, basis: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: siplab::QuotientSpace::new(subspace(model, basis)?).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.quotient_dim()
    }

    /// `‖[x]‖ = dist(x, Y)`
    fn norm(&self, x: Vec<f64>) -> PyResult<f64> {
        quotient::quotient_norm(&QuotientElement::new(vector(x)?), &self.inner, QUOTIENT_TOL).map_err(err)
    }

    /// `[[u]|[w]]`
    fn sip(&self, u: Vec<f64>, w: Vec<f64>) -> PyResult<f64> {
        let (u, w) = (QuotientElement::new(vector(u)?), QuotientElement::new(vector(w)?));
        quotient::quotient_sip(&u, &w, &self.inner, QUOTIENT_TOL).map_err(err)
    }

    /// The representative of `[x]` lying in `Y^⊥`.
    fn section(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let s = quotient::section_map(&QuotientElement::new(vector(x)?), &self.inner, QUOTIENT_TOL).map_err(err)?;
        Ok(s.into_inner())
    }

    /// Slice coordinates of `[x]`.
    fn coords(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.coords_of(&vector(x)?).map_err(err)?.into_inner())
    }

    fn same_coset(&self, a: Vec<f64>, b: Vec<f64>) -> PyResult<bool> {
        let (a, b) = (QuotientElement::new(vector(a)?), QuotientElement::new(vector(b)?));
        self.inner.same_coset(&a, &b).map_err(err)
    }
}

/// Sampled axiom residuals as a JSON report.
#[pyfunction]
#[pyo3(signature = (model, n_samples=1000, seed=42, tol=1e-6))]
fn axioms_check(model: &PyNormModel, n_samples: usize, seed: u64, tol: f64) -> PyResult<String> {
    Ok(to_json(&sip::axioms_check(&model.inner, n_samples, seed, tol).map_err(err)?))
}

/// Runs search, construction and certification; returns the three
/// certificates as a JSON array. Raises `NoNonlinearComplementError` when the
/// search finds nothing above `threshold` (e.g. on a Hilbert space).
#[pyfunction]
#[pyo3(signature = (norm="default", p=3.0, seed=42, n_dirs=10_000, threshold=1e-2, n_pairs=1000, tol=1e-6))]
fn run_pipeline(
    py: Python<'_>,
    norm: &str,
    p: f64,
    seed: u64,
    n_dirs: usize,
    threshold: f64,
    n_pairs: usize,
    tol: f64,
) -> PyResult<String> {
    let mut cfg = PipelineConfig::new(parse_norm(norm, Some(3)).map_err(err)?, p, seed);
    cfg.search = SearchOptions::new(n_dirs, seed, threshold);
    cfg.n_pairs = n_pairs;
    cfg.tol = tol;
    let r = py.detach(|| cx::run_pipeline(&cfg)).map_err(err)?;
    Ok(to_json(&r.certificates()))
}

/// Re-verifies certificates (a report, an array or a single certificate);
/// returns one outcome document per certificate as a JSON array.
#[pyfunction]
#[pyo3(signature = (text, portable=false))]
fn replay(py: Python<'_>, text: &str, portable: bool) -> PyResult<String> {
    let certs: Vec<Certificate> = load_certificates(text).map_err(err)?;
    let mode = if portable { ReplayMode::Portable } else { ReplayMode::Exact };
    let outcomes = py
        .detach(|| certs.iter().map(|c| cx::replay(c, mode)).collect::<siplab::Result<Vec<_>>>())
        .map_err(err)?;
    let docs: Vec<_> = outcomes
        .iter()
        .map(|o| {
            let mut v = serde_json::to_value(o).expect("outcomes serialize");
            v["ok"] = o.ok().into();
            v
        })
        .collect();
    Ok(to_json(&docs))
}

#[pymodule]
#[pyo3(name = "siplab")]
pub fn siplab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNormModel>()?;
    m.add_class::<PyQuotientSpace>()?;
    m.add_function(wrap_pyfunction!(sip_eval, m)?)?;
    m.add_function(wrap_pyfunction!(birkhoff_check, m)?)?;
    m.add_function(wrap_pyfunction!(sip_orthogonal, m)?)?;
    m.add_function(wrap_pyfunction!(best_approximation, m)?)?;
    m.add_function(wrap_pyfunction!(axioms_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add("SiplabError", m.py().get_type::<SiplabError>())?;
    m.add("NoNonlinearComplementError", m.py().get_type::<NoNonlinearComplementError>())?;
    m.add("SCHEMA", siplab::SCHEMA)?;
    Ok(())
}
