//! Python bindings: parameters, presets, spectra, steady-state statistics and
//! loss sweeps.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

use kerrpair::analytic;
use kerrpair::config;
use kerrpair::experiments::{self, CriticalOptions, CriticalValue, DetuningProtocol, SweepOptions};
use kerrpair::liouvillian::{lep_locate as lep_locate_rs, LepOptions};
use kerrpair::observables::{self, Backend, Cutoff};
use kerrpair::spectral;
use kerrpair::{Error, SystemParams, UnitSystem};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::BasisMismatch { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn backend(name: &str) -> PyResult<Backend> {
    match name {
        "analytic" => Ok(Backend::Analytic),
        "lindblad" => Ok(Backend::Lindblad),
        _ => Err(PyValueError::new_err(format!("unknown backend '{name}' (analytic or lindblad)"))),
    }
}

/// Normalized system parameters (rates in units of your choice, usually γ₁′).
#[pyclass(name = "SystemParams", module = "kerrpair_py", from_py_object)]
#[derive(Clone)]
pub struct PySystemParams {
    pub inner: SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (chi, j, gamma_1, gamma_ex, gamma_2, omega_drive, gamma_tip = 0.0, delta = 0.0, omega_c = 0.0, drive_phase = 0.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        chi: f64,
        j: f64,
        gamma_1: f64,
        gamma_ex: f64,
        gamma_2: f64,
        omega_drive: f64,
        gamma_tip: f64,
        delta: f64,
        omega_c: f64,
        drive_phase: f64,
    ) -> PyResult<Self> {
        let inner = SystemParams {
            omega_c,
            delta,
            chi,
            j,
            gamma_1,
            gamma_ex,
            gamma_2,
            gamma_tip,
            omega_drive,
            drive_phase,
            unit_system: UnitSystem::Normalized,
        };
        inner.validate().map_err(to_py)?;
        Ok(PySystemParams { inner })
    }

    #[staticmethod]
    fn from_preset(name: &str) -> PyResult<Self> {
        Ok(PySystemParams {
            inner: config::load_preset(name).map_err(to_py)?.params,
        })
    }

    /// Copy with `key=value` overrides applied, e.g. `p.replace(gamma_tip=3.0)`.
    #[pyo3(signature = (**kwargs))]
    fn replace(&self, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = self.inner.clone();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                inner.set(&key, v.extract()?).map_err(to_py)?;
            }
        }
        inner.validate().map_err(to_py)?;
        Ok(PySystemParams { inner })
    }

    /// Copy with Δ set by the given detuning protocol.
    #[pyo3(signature = (protocol = "track_upper_branch"))]
    fn with_protocol(&self, protocol: &str) -> PyResult<Self> {
        let proto: DetuningProtocol = protocol.parse().map_err(to_py)?;
        let mut inner = self.inner.clone();
        inner.delta = experiments::resolve_delta(&inner, proto);
        Ok(PySystemParams { inner })
    }

    fn gamma1_prime(&self) -> f64 {
        self.inner.gamma1_prime()
    }

    fn gamma2_prime(&self) -> f64 {
        self.inner.gamma2_prime()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.inner.as_key_values() {
            match v.parse::<f64>() {
                Ok(x) => d.set_item(k, x)?,
                Err(_) => d.set_item(k, v)?,
            }
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let kv: Vec<String> = self.inner.as_key_values().into_iter().skip(1).map(|(k, v)| format!("{k}={v}")).collect();
        format!("SystemParams({})", kv.join(", "))
    }

    #[getter]
    fn chi(&self) -> f64 {
        self.inner.chi
    }
    #[getter]
    fn j(&self) -> f64 {
        self.inner.j
    }
    #[getter]
    fn gamma_1(&self) -> f64 {
        self.inner.gamma_1
    }
    #[getter]
    fn gamma_ex(&self) -> f64 {
        self.inner.gamma_ex
    }
    #[getter]
    fn gamma_2(&self) -> f64 {
        self.inner.gamma_2
    }
    #[getter]
    fn gamma_tip(&self) -> f64 {
        self.inner.gamma_tip
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }
    #[getter]
    fn omega_c(&self) -> f64 {
        self.inner.omega_c
    }
    #[getter]
    fn omega_drive(&self) -> f64 {
        self.inner.omega_drive
    }
    #[getter]
    fn drive_phase(&self) -> f64 {
        self.inner.drive_phase
    }
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    config::preset_names()
}

#[pyfunction]
fn hep_location(j: f64, gamma1_prime: f64, gamma_2: f64) -> f64 {
    spectral::hep_location(j, gamma1_prime, gamma_2)
}

/// Closed-form eigenvalues of the N-excitation block (N = 1 or 2).
#[pyfunction]
fn subspace_eigenvalues<'py>(py: Python<'py>, p: &PySystemParams, n: usize) -> PyResult<Vec<Bound<'py, PyComplex>>> {
    let e = match n {
        1 => spectral::one_photon_eigensystem_closed(&p.inner),
        2 => spectral::two_photon_eigensystem_closed(&p.inner).map_err(to_py)?,
        _ => spectral::subspace_eigensystem_numeric(&p.inner, n).map_err(to_py)?,
    };
    Ok(e.eigenvalues.iter().map(|z| PyComplex::from_doubles(py, z.re, z.im)).collect())
}

/// N₁, N₂, g⁽²⁾ (full, approximate, closed form), g⁽³⁾ and |C_mn|².
#[pyfunction]
fn analytic_observables<'py>(py: Python<'py>, p: &PySystemParams) -> PyResult<Bound<'py, PyDict>> {
    let o = analytic::evaluate(&p.inner).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("n1", o.n1)?;
    d.set_item("n2", o.n2)?;
    d.set_item("g2", o.g2)?;
    d.set_item("g2_approx", o.g2_approx)?;
    d.set_item("g2_closed", o.g2_closed)?;
    d.set_item("g3", o.g3)?;
    let pops = PyDict::new(py);
    for (m, n, v) in o.populations {
        pops.set_item((m, n), v)?;
    }
    d.set_item("populations", pops)?;
    Ok(d)
}

/// Lindblad steady-state photon statistics on a per-mode cutoff.
#[pyfunction]
#[pyo3(signature = (p, cutoff = 5))]
fn steady_state_statistics<'py>(py: Python<'py>, p: &PySystemParams, cutoff: usize) -> PyResult<Bound<'py, PyDict>> {
    let o = py
        .detach(|| observables::evaluate_point(&p.inner, Backend::Lindblad, Cutoff(cutoff, cutoff)))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("n1", o.n1)?;
    d.set_item("n2", o.n2)?;
    d.set_item("g2", o.g2)?;
    d.set_item("g3", o.g3)?;
    d.set_item("p_m", o.mode1_distribution())?;
    Ok(d)
}

fn cp_value(v: Option<CriticalValue>) -> Option<f64> {
    v.map(|c| c.gamma_tip)
}

/// Loss sweep with located critical points.
#[pyfunction]
#[pyo3(signature = (p, gamma_tips, protocol = "track_upper_branch", backend = "analytic", cutoff = 5))]
fn sweep_loss<'py>(
    py: Python<'py>,
    p: &PySystemParams,
    gamma_tips: Vec<f64>,
    protocol: &str,
    backend: &str,
    cutoff: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let b = self::backend(backend)?;
    let opts = SweepOptions {
        protocol: protocol.parse().map_err(to_py)?,
        backends: vec![b],
        cutoff: Cutoff(cutoff, cutoff),
    };
    let (table, cp) = py
        .detach(|| -> kerrpair::Result<_> {
            let table = experiments::sweep_loss(&p.inner, &gamma_tips, &opts)?;
            let cp = experiments::critical_points(&table, &CriticalOptions::default()).ok();
            Ok((table, cp))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    let col = |f: fn(&observables::PointObservables) -> f64| -> Vec<f64> {
        table.rows.iter().map(|r| r.get(b).map(f).unwrap_or(f64::NAN)).collect()
    };
    d.set_item("gamma_tip", table.gamma_tips())?;
    d.set_item("delta", table.rows.iter().map(|r| r.delta).collect::<Vec<_>>())?;
    d.set_item("n1", col(|o| o.n1))?;
    d.set_item("n2", col(|o| o.n2))?;
    d.set_item("g2", col(|o| o.g2))?;
    d.set_item("g3", col(|o| o.g3))?;
    let c = PyDict::new(py);
    if let Some(cp) = cp {
        c.set_item("cp_c", cp_value(cp.cp_c))?;
        c.set_item("cp_q_down", cp_value(cp.cp_q_down))?;
        c.set_item("cp_q_up", cp_value(cp.cp_q_up))?;
        c.set_item("ep", cp.ep)?;
    }
    d.set_item("critical_points", c)?;
    Ok(d)
}

/// Normalized excitation spectrum S₁(Δ) and its peak positions.
#[pyfunction]
#[pyo3(signature = (p, deltas, backend = "analytic", cutoff = 5))]
fn excitation_spectrum<'py>(
    py: Python<'py>,
    p: &PySystemParams,
    deltas: Vec<f64>,
    backend: &str,
    cutoff: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let b = self::backend(backend)?;
    let s = py
        .detach(|| observables::excitation_spectrum(&p.inner, &deltas, b, Cutoff(cutoff, cutoff)))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("delta", s.deltas)?;
    d.set_item("s1", s.s1)?;
    d.set_item("peaks", s.peaks)?;
    Ok(d)
}

/// Liouvillian exceptional point of the one-photon coherence pair.
#[pyfunction]
#[pyo3(signature = (p, lo, hi, points = 41))]
fn lep_locate<'py>(py: Python<'py>, p: &PySystemParams, lo: f64, hi: f64, points: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| lep_locate_rs(&p.inner, (lo, hi), points, &LepOptions::default()))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("gamma_tip", r.gamma_tip)?;
    d.set_item("gap", r.gap)?;
    d.set_item("overlap", r.overlap)?;
    Ok(d)
}

#[pymodule]
pub fn kerrpair_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(hep_location, m)?)?;
    m.add_function(wrap_pyfunction!(subspace_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_observables, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_loss, m)?)?;
    m.add_function(wrap_pyfunction!(excitation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(lep_locate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
