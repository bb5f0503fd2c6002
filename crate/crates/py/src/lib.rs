//! Python bindings. States cross the boundary as nested lists of complex
//! numbers, row index first.

use bipartite_core as core;
use bipartite_core::{BipartiteWave, Complex64, Levels};
use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::NoConvergence { .. } | core::Error::SvdNoConvergence => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Grid {
    inner: core::Grid,
}

#[pymethods]
impl Grid {
    #[new]
    fn new(x_min: f64, x_max: f64, n_points: usize) -> PyResult<Self> {
        Ok(Self {
            inner: core::make_grid(x_min, x_max, n_points).map_err(err)?,
        })
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    fn positions(&self) -> Vec<f64> {
        self.inner.positions()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid({}, {}, {})",
            self.inner.x_min(),
            self.inner.x_max(),
            self.inner.n_points()
        )
    }
}

fn potential(kind: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<core::Potential> {
    let get = |key: &str, default: f64| -> PyResult<f64> {
        match params.map(|p| p.get_item(key)).transpose()?.flatten() {
            Some(v) => v.extract(),
            None => Ok(default),
        }
    };
    Ok(match kind {
        "free" => core::Potential::Free,
        "box" => core::Potential::Box,
        "harmonic_oscillator" => core::Potential::HarmonicOscillator {
            omega: get("omega", 1.0)?,
        },
        "double_well" => core::Potential::DoubleWell {
            barrier_height: get("barrier_height", 1.0)?,
            well_separation: get("well_separation", 2.0)?,
        },
        "tabulated" => {
            let values = params
                .and_then(|p| p.get_item("values").ok().flatten())
                .ok_or_else(|| PyValueError::new_err("tabulated potential needs values"))?;
            core::Potential::Tabulated {
                values: values.extract()?,
            }
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown potential {other:?}"
            )))
        }
    })
}

#[pyclass(frozen)]
struct Hamiltonian {
    inner: core::HamiltonianOp,
}

#[pymethods]
impl Hamiltonian {
    #[new]
    #[pyo3(signature = (grid, kind="free", params=None, hbar=1.0, mass=1.0))]
    fn new(
        grid: Grid,
        kind: &str,
        params: Option<&Bound<'_, PyDict>>,
        hbar: f64,
        mass: f64,
    ) -> PyResult<Self> {
        let constants = core::PhysicalConstants::new(hbar, mass).map_err(err)?;
        let p = potential(kind, params)?;
        Ok(Self {
            inner: core::build_hamiltonian(grid.inner, &p, constants).map_err(err)?,
        })
    }

    /// Lowest `k` energies, or all of them.
    #[pyo3(signature = (k=None))]
    fn energies(&self, k: Option<usize>) -> PyResult<Vec<f64>> {
        let levels = k.map_or(Levels::All, Levels::Lowest);
        Ok(core::eigensolve(&self.inner, levels)
            .map_err(err)?
            .energies()
            .to_vec())
    }

    /// Sorted gaps `Eₙ − Eₘ` over all level pairs.
    fn gaps_pairwise(&self) -> PyResult<Vec<f64>> {
        let es = core::eigensolve(&self.inner, Levels::All).map_err(err)?;
        Ok(core::gap_spectrum_pairwise(&es, None).map_err(err)?.gaps)
    }

    /// Sorted eigenvalues of the dense gap operator.
    #[pyo3(signature = (cap=64))]
    fn gaps_direct(&self, cap: usize) -> PyResult<Vec<f64>> {
        let opts = core::DirectOptions {
            cap,
            cluster_tol: None,
        };
        Ok(core::gap_spectrum_direct(&self.inner, opts)
            .map_err(err)?
            .gaps)
    }

    /// `ψₙψₘ*` evolved with bipartite CN; returns the de-mapped gap
    /// extracted from the overlap phase.
    #[pyo3(signature = (n, m, dt, n_steps, record_every=1))]
    fn stationary_gap(
        &self,
        n: usize,
        m: usize,
        dt: f64,
        n_steps: usize,
        record_every: usize,
    ) -> PyResult<f64> {
        let es = core::eigensolve(&self.inner, Levels::Lowest(n.max(m) + 1)).map_err(err)?;
        let psi0 = core::stationary_bipartite(&es, n, m).map_err(err)?;
        let cfg = core::PropagationConfig::new(dt, n_steps, record_every).map_err(err)?;
        let hbar = self.inner.constants().hbar();
        core::check_phase_cadence(es.energies()[n] - es.energies()[m], &cfg, hbar).map_err(err)?;
        let traj = core::propagate_bipartite_direct(&self.inner, &psi0, &cfg).map_err(err)?;
        let rate = core::extract_gap_from_phase(&traj, &psi0, hbar).map_err(err)?;
        Ok(core::demap_gap(rate, es.energies()[m], dt, hbar))
    }
}

#[pyfunction]
#[pyo3(signature = (a, b, tol=1e-8))]
fn match_gaps(a: Vec<f64>, b: Vec<f64>, tol: f64) -> PyResult<(bool, f64)> {
    let spectrum = |gaps: Vec<f64>| core::GapSpectrum {
        gaps,
        clusters: Vec::new(),
        attributions: None,
        cluster_tol: 0.0,
    };
    let mut a = a;
    let mut b = b;
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let r = core::match_spectra(&spectrum(a), &spectrum(b), tol);
    Ok((r.matched, r.max_abs_deviation))
}

fn to_wave(grid: &Grid, rows: Vec<Vec<Complex64>>) -> PyResult<BipartiteWave> {
    let n = grid.inner.n_points();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err(format!(
            "amplitudes must be {n} x {n}"
        )));
    }
    BipartiteWave::new(grid.inner, DMatrix::from_fn(n, n, |i, j| rows[i][j])).map_err(err)
}

/// Schmidt coefficients of an amplitude matrix, descending.
#[pyfunction]
#[pyo3(signature = (grid, amplitudes, rank_tol=1e-12))]
fn schmidt_coefficients(
    grid: Grid,
    amplitudes: Vec<Vec<Complex64>>,
    rank_tol: f64,
) -> PyResult<Vec<f64>> {
    let psi = to_wave(&grid, amplitudes)?;
    Ok(core::schmidt_decompose(&psi, rank_tol)
        .map_err(err)?
        .coefficients)
}

#[pyfunction]
fn entanglement_entropy(grid: Grid, amplitudes: Vec<Vec<Complex64>>) -> PyResult<f64> {
    core::entanglement_entropy(&to_wave(&grid, amplitudes)?).map_err(err)
}

/// Double-slit state of `mode` ("wave" or "particle") under free evolution
/// to `time`: returns (density, visibility or None, entropy).
#[pyfunction]
#[pyo3(signature = (grid, slit1, slit2, mode, window, time=0.0, dt=1e-3))]
fn double_slit(
    grid: Grid,
    slit1: (f64, f64, f64),
    slit2: (f64, f64, f64),
    mode: &str,
    window: (f64, f64),
    time: f64,
    dt: f64,
) -> PyResult<(Vec<f64>, Option<f64>, f64)> {
    let mode = match mode {
        "wave" => core::SlitMode::Wave,
        "particle" => core::SlitMode::Particle,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let spec = |s: (f64, f64, f64)| core::SlitSpec::new(s.0, s.1, s.2);
    let terms =
        core::double_slit_terms(&grid.inner, &spec(slit1), &spec(slit2), mode, 1.0).map_err(err)?;
    let entropy =
        core::entropy_of_coefficients(&core::schmidt_coefficients_of_terms(&terms).map_err(err)?);
    let psi = if time > 0.0 {
        let h = core::build_hamiltonian(
            grid.inner,
            &core::Potential::Free,
            core::PhysicalConstants::default(),
        )
        .map_err(err)?;
        let n_steps = (time / dt).round() as usize;
        let cfg = core::PropagationConfig::new(dt, n_steps, n_steps).map_err(err)?;
        core::propagate_product_terms(&h, &terms, &cfg)
            .map_err(err)?
            .states
            .pop()
            .expect("final state")
    } else {
        BipartiteWave::from_terms(grid.inner, &terms).map_err(err)?
    };
    let density = core::position_density(&psi).map_err(err)?;
    let visibility = core::fringe_visibility(&grid.inner, &density, window).ok();
    Ok((density, visibility, entropy))
}

#[pymodule]
fn bipartite(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<Hamiltonian>()?;
    m.add_function(wrap_pyfunction!(match_gaps, m)?)?;
    m.add_function(wrap_pyfunction!(schmidt_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(double_slit, m)?)?;
    Ok(())
}
