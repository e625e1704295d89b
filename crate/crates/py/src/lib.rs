//! Python bindings. Exact series come back as `Series` objects holding
//! rational coefficients as "num/den" strings; everything else is floats.

use std::collections::BTreeMap;

use kitaev_potts::analysis::{self, approximant_orders, dlog_pade_gap_closure, merge_and_locate_crossing, Merge};
use kitaev_potts::ed::{self, Method};
use kitaev_potts::fixtures;
use kitaev_potts::lattice::{build_mapped_hamiltonian, Couplings, SiteGraph};
use kitaev_potts::meanfield;
use kitaev_potts::pcut::{self, Engine, Regime};
use kitaev_potts::series::{format_rational, parse_rational, RationalSeries, Variable};
use kitaev_potts::{gme, Error};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(kitaev_potts_py, NumericalError, PyRuntimeError, "No root, crossing or convergence.");

fn err(e: Error) -> PyErr {
    match e {
        Error::NoRoot(_)
        | Error::NoCrossing(..)
        | Error::NoJump
        | Error::GridTooCoarse { .. }
        | Error::NotConverged(_)
        | Error::DefectivePade { .. }
        | Error::DegenerateFit => NumericalError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn regime(name: &str) -> PyResult<Regime> {
    match name {
        "small" => Ok(Regime::Small),
        "large" => Ok(Regime::Large),
        _ => Err(PyValueError::new_err(format!("regime must be 'small' or 'large', got {name:?}"))),
    }
}

/// Power series with exact rational coefficients.
#[pyclass(frozen, module = "kitaev_potts_py")]
pub struct Series {
    inner: RationalSeries,
}

#[pymethods]
impl Series {
    #[new]
    fn new(variable: &str, coefficients: Vec<String>) -> PyResult<Self> {
        let variable = match variable {
            "x" => Variable::X,
            "h" => Variable::H,
            _ => return Err(PyValueError::new_err("variable must be 'x' or 'h'")),
        };
        let coeffs = coefficients
            .iter()
            .map(|c| parse_rational(c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(Series {
            inner: RationalSeries::new(variable, coeffs),
        })
    }

    #[getter]
    fn variable(&self) -> &'static str {
        match self.inner.variable {
            Variable::X => "x",
            Variable::H => "h",
        }
    }

    #[getter]
    fn coefficients(&self) -> Vec<String> {
        self.inner.coeffs.iter().map(format_rational).collect()
    }

    fn floats(&self) -> Vec<f64> {
        self.inner.to_f64()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn __len__(&self) -> usize {
        self.inner.coeffs.len()
    }

    fn __eq__(&self, other: &Series) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Series({})", self.inner)
    }
}

impl From<RationalSeries> for Series {
    fn from(inner: RationalSeries) -> Self {
        Series { inner }
    }
}

#[pyfunction]
#[pyo3(signature = (regime_name, order))]
fn ground_energy_series(regime_name: &str, order: usize) -> PyResult<Series> {
    Ok(pcut::ground_energy_series(regime(regime_name)?, order).map_err(err)?.into())
}

/// Gap series and hopping amplitudes keyed by displacement; (0, 0) is the
/// on-site correction.
#[pyfunction]
fn gap_series(order: usize) -> PyResult<(Series, BTreeMap<(i32, i32), Series>)> {
    let amps = Engine::new(Regime::Small, order)
        .and_then(|e| e.one_qp_amplitudes())
        .map_err(err)?;
    let hopping = amps.hopping.iter().map(|(d, s)| (*d, s.clone().into())).collect();
    Ok((pcut::gap_series(&amps).into(), hopping))
}

#[pyfunction]
fn dispersion(kx: f64, ky: f64, x: f64, order: usize) -> PyResult<f64> {
    let amps = pcut::one_qp_amplitudes(order).map_err(err)?;
    Ok(analysis::poly_eval(&pcut::dispersion((kx, ky), &amps), x))
}

/// The bundled reference series.
#[pyfunction]
fn reference_series() -> PyResult<BTreeMap<&'static str, Series>> {
    let p = fixtures::printed_series().map_err(err)?;
    Ok(BTreeMap::from([
        ("energy_small", p.energy_small.into()),
        ("gap_small", p.gap_small.into()),
        ("energy_large", p.energy_large.into()),
    ]))
}

#[pyclass(frozen, get_all, module = "kitaev_potts_py")]
pub struct MappingReport {
    full_energy: f64,
    mapped_energy: f64,
    sublattice_energies: (f64, f64),
    mismatch: f64,
    min_plaquette: f64,
    ground_multiplicity: usize,
    string_leakage: f64,
    passed: bool,
}

#[pyfunction]
#[pyo3(signature = (j, k, lam, l = 2, tolerance = 1e-9))]
fn verify_mapping(j: f64, k: f64, lam: f64, l: usize, tolerance: f64) -> PyResult<MappingReport> {
    let r = ed::verify_mapping(Couplings::new(j, k, lam), l, tolerance).map_err(err)?;
    Ok(MappingReport {
        full_energy: r.full_energy,
        mapped_energy: r.mapped_energy,
        sublattice_energies: (r.sublattice_energies[0], r.sublattice_energies[1]),
        mismatch: r.mismatch,
        min_plaquette: r.min_plaquette,
        ground_multiplicity: r.ground_multiplicity,
        string_leakage: r.string_leakage,
        passed: r.pass,
    })
}

/// Number of levels within `tolerance` of the ground energy, and the lowest
/// levels themselves.
#[pyfunction]
#[pyo3(signature = (l = 2, d = 3, lam = 0.0, tolerance = 1e-9))]
fn topological_degeneracy(l: usize, d: u32, lam: f64, tolerance: f64) -> PyResult<(usize, Vec<f64>)> {
    let r = ed::topological_degeneracy(l, d, lam, tolerance).map_err(err)?;
    Ok((r.count, r.lowest))
}

/// Ground energy of the transverse-field Potts model on an arbitrary graph.
#[pyfunction]
fn potts_ground_energy(num_sites: usize, bonds: Vec<(usize, usize)>, j: f64, lam: f64) -> PyResult<f64> {
    let h = build_mapped_hamiltonian(&SiteGraph::new(num_sites, bonds), j, lam).map_err(err)?;
    let dim = 3usize
        .checked_pow(num_sites as u32)
        .ok_or_else(|| PyValueError::new_err("too many sites"))?;
    Ok(ed::ground_state(&h, Method::auto(dim)).map_err(err)?.0)
}

#[pyclass(frozen, get_all, module = "kitaev_potts_py")]
pub struct MeanFieldState {
    energy: f64,
    amplitudes: Vec<Complex64>,
    branch: String,
}

#[pyfunction]
fn symmetric_energy(j: f64, lam: f64) -> f64 {
    meanfield::symmetric_energy(j, lam)
}

#[pyfunction]
#[pyo3(signature = (j, lam, restarts = meanfield::DEFAULT_RESTARTS, seed = meanfield::DEFAULT_SEED))]
fn meanfield_minimize(j: f64, lam: f64, restarts: usize, seed: u64) -> PyResult<MeanFieldState> {
    let s = meanfield::general_minimize(j, lam, restarts, seed).map_err(err)?;
    Ok(MeanFieldState {
        energy: s.energy,
        branch: s.branch().to_string(),
        amplitudes: s.amplitudes.to_vec(),
    })
}

/// Curve plus the location of its kink or convexity change.
#[pyclass(frozen, get_all, module = "kitaev_potts_py")]
pub struct Scan {
    x: Vec<f64>,
    value: Vec<f64>,
    transition: Option<f64>,
    jump: Option<f64>,
}

#[pyfunction]
#[pyo3(signature = (xs, restarts = meanfield::DEFAULT_RESTARTS, seed = meanfield::DEFAULT_SEED, threshold = 5.0))]
fn meanfield_scan(xs: Vec<f64>, restarts: usize, seed: u64, threshold: f64) -> PyResult<Scan> {
    let s = meanfield::scan_transition(&xs, restarts, seed, threshold).map_err(err)?;
    Ok(Scan {
        x: xs,
        value: s.points.iter().map(|p| p.energy).collect(),
        transition: Some(s.report.value),
        jump: Some(s.jump),
    })
}

#[pyfunction]
#[pyo3(signature = (x, n = 25, restarts = gme::DEFAULT_RESTARTS, seed = gme::DEFAULT_SEED))]
fn geometric_entanglement(x: f64, n: usize, restarts: usize, seed: u64) -> PyResult<f64> {
    let state = gme::build_perturbed_ground_state(x, n).map_err(err)?;
    Ok(gme::maximize_overlap(&state, restarts, seed).map_err(err)?.gme)
}

/// `transition` is the convexity change, `jump` the derivative-jump point.
#[pyfunction]
#[pyo3(signature = (xs, n = 25, restarts = gme::DEFAULT_RESTARTS, seed = gme::DEFAULT_SEED))]
fn gme_scan(xs: Vec<f64>, n: usize, restarts: usize, seed: u64) -> PyResult<Scan> {
    let s = gme::gme_scan(&xs, n, restarts, seed).map_err(err)?;
    Ok(Scan {
        x: xs,
        value: s.points.iter().map(|p| p.gme).collect(),
        transition: s.convexity_change,
        jump: s.derivative_jump,
    })
}

/// Median DlogPadé pole of a gap series with its spread (value, min, max).
#[pyfunction]
#[pyo3(signature = (coefficients, max_total = 7, window = (0.0, 0.5)))]
fn gap_closure(coefficients: Vec<f64>, max_total: usize, window: (f64, f64)) -> PyResult<(f64, f64, f64)> {
    let g = dlog_pade_gap_closure(&coefficients, &approximant_orders(max_total), window).map_err(err)?;
    Ok((g.report.value, g.min, g.max))
}

#[pyfunction]
#[pyo3(signature = (l, m, coefficients))]
fn pade_poles(l: usize, m: usize, coefficients: Vec<f64>) -> PyResult<Vec<Complex64>> {
    Ok(analysis::pade(&coefficients, l, m).map_err(err)?.poles())
}

/// Crossing angle of the two merged energy branches of the reference series
/// and the jumps of ∂_λE and ∂²_λE there.
#[pyfunction]
#[pyo3(signature = (thetas, pade = None))]
fn merge_crossing(thetas: Vec<f64>, pade: Option<(usize, usize)>) -> PyResult<(f64, f64, f64)> {
    let p = fixtures::printed_series().map_err(err)?;
    let mut merge = Merge::from_series(&p.energy_small, &p.energy_large);
    if let Some(lm) = pade {
        merge = merge.pade(lm, lm).map_err(err)?;
    }
    let r = merge_and_locate_crossing(&merge, "python", &thetas).map_err(err)?;
    Ok((r.report.value, r.first_jump, r.second_jump))
}

#[pymodule]
fn kitaev_potts_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<Series>()?;
    m.add_class::<MappingReport>()?;
    m.add_class::<MeanFieldState>()?;
    m.add_class::<Scan>()?;
    m.add_function(wrap_pyfunction!(ground_energy_series, m)?)?;
    m.add_function(wrap_pyfunction!(gap_series, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(reference_series, m)?)?;
    m.add_function(wrap_pyfunction!(verify_mapping, m)?)?;
    m.add_function(wrap_pyfunction!(topological_degeneracy, m)?)?;
    m.add_function(wrap_pyfunction!(potts_ground_energy, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_energy, m)?)?;
    m.add_function(wrap_pyfunction!(meanfield_minimize, m)?)?;
    m.add_function(wrap_pyfunction!(meanfield_scan, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_entanglement, m)?)?;
    m.add_function(wrap_pyfunction!(gme_scan, m)?)?;
    m.add_function(wrap_pyfunction!(gap_closure, m)?)?;
    m.add_function(wrap_pyfunction!(pade_poles, m)?)?;
    m.add_function(wrap_pyfunction!(merge_crossing, m)?)?;
    Ok(())
}
