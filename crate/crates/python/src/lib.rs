use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pathwit::bounds::{self, Bipartition, QubitConstraints};
use pathwit::experiments;
use pathwit::fock;
use pathwit::sdp::SolveOptions;
use pathwit::source;
use pathwit::witness::{self, Variant, WitnessSpec};
use pathwit::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NotConverged(_) => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn variant(name: &str) -> PyResult<Variant> {
    match name {
        "general" => Ok(Variant::GeneralN),
        "bipartite" => Ok(Variant::Bipartite),
        "tripartite" => Ok(Variant::Tripartite),
        _ => Err(PyValueError::new_err(format!("unknown variant {name:?}"))),
    }
}

/// Heralded-source parameters.
#[pyclass(name = "SourceParams", from_py_object)]
#[derive(Clone)]
struct PySourceParams {
    inner: source::SourceParams,
}

#[pymethods]
impl PySourceParams {
    #[new]
    #[pyo3(signature = (t_g=None, eta_h=0.9, eta_total=1.0, transmittivity=0.5, alpha=0.83, dark_count=0.0))]
    fn new(
        t_g: Option<f64>,
        eta_h: f64,
        eta_total: f64,
        transmittivity: f64,
        alpha: f64,
        dark_count: f64,
    ) -> PyResult<Self> {
        let inner = source::SourceParams {
            t_g: t_g.unwrap_or(source::SourceParams::default().t_g),
            eta_h,
            eta_total,
            transmittivity,
            alpha,
            dark_count,
        };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn t_g(&self) -> f64 {
        self.inner.t_g
    }
    #[getter]
    fn eta_h(&self) -> f64 {
        self.inner.eta_h
    }
    #[getter]
    fn eta_total(&self) -> f64 {
        self.inner.eta_total
    }
    #[getter]
    fn transmittivity(&self) -> f64 {
        self.inner.transmittivity
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn dark_count(&self) -> f64 {
        self.inner.dark_count
    }

    fn heralded_distribution(&self, dim: usize) -> PyResult<Vec<f64>> {
        source::heralded_photon_distribution(&self.inner, dim).map_err(py_err)
    }

    fn p00_alpha(&self, nbar: f64) -> PyResult<f64> {
        source::p00_alpha(&self.inner, nbar).map_err(py_err)
    }

    fn thermal_correlator(&self, nbar: f64) -> PyResult<f64> {
        source::thermal_correlator(&self.inner, nbar).map_err(py_err)
    }

    fn heralded_correlator(&self) -> PyResult<f64> {
        source::heralded_correlator(&self.inner).map_err(py_err)
    }

    fn model_witness_value(&self) -> PyResult<f64> {
        source::model_witness_value(&self.inner).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SourceParams(t_g={}, eta_h={}, eta_total={}, transmittivity={}, alpha={}, dark_count={})",
            p.t_g, p.eta_h, p.eta_total, p.transmittivity, p.alpha, p.dark_count
        )
    }
}

fn prediction_dict<'py>(py: Python<'py>, p: &source::Prediction) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("witness", p.witness)?;
    d.set_item("bound", p.bound.value)?;
    d.set_item("margin", p.margin)?;
    d.set_item("pc", p.stats.pc().to_vec())?;
    Ok(d)
}

/// Witness value, bound and margin predicted for two paths.
#[pyfunction]
#[pyo3(signature = (params, pc=None))]
fn bipartite_prediction<'py>(py: Python<'py>, params: &PySourceParams, pc: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let p = source::bipartite_prediction(&params.inner, pc.map(|x| [x, x])).map_err(py_err)?;
    prediction_dict(py, &p)
}

/// Witness value, genuine bound and margin predicted for three lossy paths.
#[pyfunction]
#[pyo3(signature = (params, fractions=vec![0.5, 0.15, 0.35], arm_transmission=0.19))]
fn tripartite_prediction<'py>(
    py: Python<'py>,
    params: &PySourceParams,
    fractions: Vec<f64>,
    arm_transmission: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = source::tripartite_prediction(&params.inner, &fractions, arm_transmission).map_err(py_err)?;
    prediction_dict(py, &p)
}

/// Witness expectation on the W state of `n` paths.
#[pyfunction]
fn z_w_analytic(n: usize, alpha: f64) -> f64 {
    witness::z_w_analytic(n, alpha)
}

#[pyfunction]
fn genuine_margin_w_analytic(n: usize, alpha: f64) -> PyResult<f64> {
    bounds::genuine_margin_w_analytic(n, alpha).map_err(py_err)
}

/// Witness operator as a nested list, per-mode truncation `dim`.
#[pyfunction]
#[pyo3(signature = (n, alpha, dim=2, variant="general"))]
fn witness_matrix(n: usize, alpha: f64, dim: usize, variant: &str) -> PyResult<Vec<Vec<Complex64>>> {
    let spec = WitnessSpec::new(n, alpha, self::variant(variant)?).map_err(py_err)?;
    let op = witness::build_witness(&spec, &vec![dim; n]).map_err(py_err)?;
    let m = op.matrix();
    Ok((0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect())
}

/// `Tr(Z ρ_W)` evaluated by Fock simulation.
#[pyfunction]
#[pyo3(signature = (n, alpha, dim=4))]
fn w_state_witness(n: usize, alpha: f64, dim: usize) -> PyResult<f64> {
    let spec = WitnessSpec::general(n, alpha).map_err(py_err)?;
    let dims = vec![dim; n];
    let z = witness::build_witness(&spec, &dims).map_err(py_err)?;
    let w = witness::w_state(n, &dims).map_err(py_err)?;
    fock::expectation(&z, &w).map_err(py_err)
}

/// Qubit PPT bound with W-statistics constraints; `subset=None` gives the genuine bound.
#[pyfunction]
#[pyo3(signature = (n, alpha, subset=None, tolerance=1e-7))]
fn qubit_ppt_bound(n: usize, alpha: f64, subset: Option<Vec<usize>>, tolerance: f64) -> PyResult<f64> {
    let bip = subset.map_or(Bipartition::Genuine, Bipartition::Subset);
    let opts = SolveOptions { tolerance, ..SolveOptions::default() };
    bounds::qubit_ppt_bound_sdp(n, alpha, &bip, QubitConstraints::WStatistics, &opts)
        .map(|b| b.value)
        .map_err(py_err)
}

/// Verdict for the text of a counts file.
#[pyfunction]
fn verdict<'py>(py: Python<'py>, counts: &str) -> PyResult<Bound<'py, PyDict>> {
    let r = experiments::run_verdict(counts).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("modes", r.n_modes)?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("witness", r.witness)?;
    d.set_item("bound", r.bound.value)?;
    d.set_item("margin", r.margin)?;
    d.set_item("verdict", r.verdict.to_string())?;
    Ok(d)
}

#[pymodule]
fn pathwit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySourceParams>()?;
    m.add_function(wrap_pyfunction!(bipartite_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(tripartite_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(z_w_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(genuine_margin_w_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(witness_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(w_state_witness, m)?)?;
    m.add_function(wrap_pyfunction!(qubit_ppt_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verdict, m)?)?;
    Ok(())
}
