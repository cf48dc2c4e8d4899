//! Python bindings for the `cohlim` crate.

use cohlim::charts::{convert as convert_point, metric_coefficient, Chart, ChartPoint};
use cohlim::coherent::{coherent_vector, diagonal_symbol_closed, symbol as matrix_symbol, CoherentSpec, QuadratureParams};
use cohlim::dynamics::{free_particle_analytic, uniform_grid, ClassicalState, Trajectory};
use cohlim::limits::{study_rep, SweepReport};
use cohlim::nbody::{build_invariants, build_mode_operators, l_spectrum_check};
use cohlim::{Generator, HamiltonianPolynomial, MultiOscRep, Operand, RepParams};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: cohlim::Error) -> PyErr {
    match e {
        cohlim::Error::TruncationGuard { .. } | cohlim::Error::HalfPlaneBarrier { .. } | cohlim::Error::Integrator(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = cohlim::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn report<'py>(py: Python<'py>, r: &SweepReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("study", &r.study)?;
    d.set_item("n", r.rows.iter().map(|x| x.n).collect::<Vec<_>>())?;
    d.set_item("value", r.rows.iter().map(|x| x.value).collect::<Vec<_>>())?;
    d.set_item("reference", r.rows.iter().map(|x| x.reference).collect::<Vec<_>>())?;
    d.set_item("slope", r.fit.map(|f| f.slope))?;
    d.set_item("intercept", r.fit.map(|f| f.intercept))?;
    d.set_item("residual", r.fit.map(|f| f.residual))?;
    d.set_item("pass", r.pass)?;
    d.set_item("detail", &r.detail)?;
    Ok(d)
}

fn trajectory<'py>(py: Python<'py>, tr: &Trajectory) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", tr.samples.iter().map(|s| s.t).collect::<Vec<_>>())?;
    d.set_item("A", tr.samples.iter().map(|s| s.a).collect::<Vec<_>>())?;
    d.set_item("B", tr.samples.iter().map(|s| s.b).collect::<Vec<_>>())?;
    d.set_item("C", tr.samples.iter().map(|s| s.c).collect::<Vec<_>>())?;
    d.set_item("diagnostic", tr.samples.iter().map(|s| s.diagnostic).collect::<Vec<_>>())?;
    Ok(d)
}

/// Truncated su(1,1) representation at particle number N and Bargmann index k.
#[pyclass(name = "RepParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyRepParams(RepParams);

#[pymethods]
impl PyRepParams {
    #[new]
    fn new(n_particles: u32, k: f64, cutoff: usize) -> PyResult<Self> {
        RepParams::new(n_particles, k, cutoff).map(Self).map_err(err)
    }

    #[getter]
    fn n_particles(&self) -> u32 {
        self.0.n_particles()
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k()
    }

    #[getter]
    fn j(&self) -> f64 {
        self.0.j()
    }

    #[getter]
    fn cutoff(&self) -> usize {
        self.0.cutoff()
    }

    /// Fock states n = 0..=cutoff.
    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.0.hbar()
    }

    /// Dense matrix of a generator (K0, K1, K2, A, B, C) as nested lists.
    fn generator(&self, name: &str) -> PyResult<Vec<Vec<Complex64>>> {
        let m = cohlim::build_generator(&self.0, parse::<Generator>(name)?);
        let e = m.entries();
        Ok((0..e.nrows()).map(|i| (0..e.ncols()).map(|j| e[(i, j)]).collect()).collect())
    }

    /// Coefficients of the coherent state at τ in the truncated Fock basis.
    fn coherent_state(&self, tau: Complex64) -> PyResult<Vec<Complex64>> {
        let v = coherent_vector(&CoherentSpec::new(self.0, tau).map_err(err)?).map_err(err)?;
        Ok(v.coefficients().iter().copied().collect())
    }

    /// Coherent-state expectation of an operand such as "K0", "A^2" or "C".
    fn symbol(&self, operand: &str, tau: Complex64) -> PyResult<Complex64> {
        let op: Operand = parse(operand)?;
        let spec = CoherentSpec::new(self.0, tau).map_err(err)?;
        matrix_symbol(&op.matrix(&self.0).map_err(err)?, &spec).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("RepParams(n_particles={}, k={}, cutoff={})", self.0.n_particles(), self.0.k(), self.0.cutoff())
    }
}

/// Polynomial in the invariants A, B, C, parsed from text like "C + 0.5*A^2".
#[pyclass(name = "Hamiltonian", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyHamiltonian(HamiltonianPolynomial);

#[pymethods]
impl PyHamiltonian {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse(text).map(Self)
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree()
    }

    /// Classical symbol on (v, w) as {(v_power, w_power): coefficient}.
    fn classical(&self, k: f64) -> Vec<((u32, i32), f64)> {
        cohlim::classical_hamiltonian(&self.0, k)
            .terms()
            .map(|(e, c)| (*e, *c))
            .collect()
    }

    /// Quantum and classical A, B, C along a trajectory from τ₀.
    #[pyo3(signature = (tau0, k, n_particles, tmax, steps))]
    fn evolve<'py>(
        &self,
        py: Python<'py>,
        tau0: Complex64,
        k: f64,
        n_particles: u32,
        tmax: f64,
        steps: usize,
    ) -> PyResult<(Bound<'py, PyDict>, Bound<'py, PyDict>)> {
        let grid = uniform_grid(tmax, steps).map_err(err)?;
        let classical = cohlim::dynamics::classical_from_tau(&self.0, tau0, k, &grid).map_err(err)?;
        let dense = uniform_grid(tmax, 256).map_err(err)?;
        let sizing = cohlim::dynamics::classical_from_tau(&self.0, tau0, k, &dense).map_err(err)?;
        let quantum = cohlim::dynamics::quantum_from_tau(
            &self.0,
            tau0,
            k,
            n_particles,
            &grid,
            &sizing,
            &Default::default(),
        )
        .map_err(err)?;
        Ok((trajectory(py, &quantum)?, trajectory(py, &classical)?))
    }

    fn __repr__(&self) -> String {
        format!("Hamiltonian('{}')", self.0)
    }
}

/// Converts a point between charts (tau, halfplane, xi, zeta, polar, canonical).
#[pyfunction]
#[pyo3(signature = (chart, coords, to, k = None))]
fn convert(chart: &str, coords: (f64, f64), to: &str, k: Option<f64>) -> PyResult<(f64, f64)> {
    let p = ChartPoint::new(parse::<Chart>(chart)?, [coords.0, coords.1]).map_err(err)?;
    let q = convert_point(&p, parse::<Chart>(to)?, k).map_err(err)?;
    let [x, y] = q.coords();
    Ok((x, y))
}

#[pyfunction]
fn metric(chart: &str, coords: (f64, f64), k: f64) -> PyResult<f64> {
    let p = ChartPoint::new(parse::<Chart>(chart)?, [coords.0, coords.1]).map_err(err)?;
    metric_coefficient(&p, k).map_err(err)
}

/// ⟨τ|τ'⟩ at total weight J.
#[pyfunction]
fn overlap(tau: Complex64, tau2: Complex64, j: f64) -> PyResult<Complex64> {
    cohlim::overlap_closed(tau, tau2, j).map_err(err)
}

/// Closed-form coherent-state symbol of K0, K1 or K2.
#[pyfunction]
fn diagonal_symbol(generator: &str, tau: Complex64, k: f64) -> PyResult<f64> {
    diagonal_symbol_closed(parse(generator)?, tau, k).map_err(err)
}

/// Symbol of an operand at N particles with an automatically sized cutoff.
#[pyfunction]
#[pyo3(signature = (operand, tau, k = 1.0, n_particles = 1))]
fn symbol(operand: &str, tau: Complex64, k: f64, n_particles: u32) -> PyResult<Complex64> {
    let op: Operand = parse(operand)?;
    let rep = study_rep(n_particles, k, tau, op.degree()).map_err(err)?;
    PyRepParams(rep).symbol(operand, tau)
}

#[pyfunction]
#[pyo3(signature = (j, max_n = 10, order = 64))]
fn identity_resolution(j: f64, max_n: usize, order: usize) -> PyResult<f64> {
    let rep = RepParams::new(1, j, max_n).map_err(err)?;
    cohlim::identity_resolution_check(&rep, max_n, QuadratureParams { order }).map_err(err)
}

#[pyfunction]
fn overlap_decay<'py>(py: Python<'py>, tau: Complex64, tau2: Complex64, k: f64, n: Vec<u32>) -> PyResult<Bound<'py, PyDict>> {
    report(py, &cohlim::overlap_decay_study(tau, tau2, k, &n).map_err(err)?)
}

#[pyfunction]
fn factorization_defect<'py>(
    py: Python<'py>,
    x: &str,
    y: &str,
    tau: Complex64,
    k: f64,
    n: Vec<u32>,
) -> PyResult<Bound<'py, PyDict>> {
    report(py, &cohlim::factorization_defect(&parse(x)?, &parse(y)?, tau, k, &n).map_err(err)?)
}

#[pyfunction]
fn bracket_correspondence<'py>(
    py: Python<'py>,
    x: &str,
    y: &str,
    tau: Complex64,
    k: f64,
    n: Vec<u32>,
) -> PyResult<Bound<'py, PyDict>> {
    report(py, &cohlim::commutator_correspondence(&parse(x)?, &parse(y)?, tau, k, &n).map_err(err)?)
}

#[pyfunction]
fn correspondence<'py>(
    py: Python<'py>,
    h: &str,
    tau0: Complex64,
    k: f64,
    n: Vec<u32>,
    tmax: f64,
    steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = uniform_grid(tmax, steps).map_err(err)?;
    report(py, &cohlim::correspondence_compare(&parse(h)?, tau0, k, &n, &grid).map_err(err)?)
}

/// Closed-form free-particle state (v, w) at time t.
#[pyfunction]
fn free_particle(v: f64, w: f64, k: f64, t: f64) -> PyResult<(f64, f64)> {
    let s = free_particle_analytic(ClassicalState::new(0.0, v, w).map_err(err)?, k, t).map_err(err)?;
    Ok((s.v, s.w))
}

/// Casimir residual and L² sectors of the N-particle oscillator space.
#[pyfunction]
#[pyo3(signature = (n_particles, per_mode_cutoff))]
fn casimir_check<'py>(py: Python<'py>, n_particles: u32, per_mode_cutoff: usize) -> PyResult<Bound<'py, PyDict>> {
    let rep = MultiOscRep::new(n_particles, per_mode_cutoff).map_err(err)?;
    let inv = build_invariants(&rep, &build_mode_operators(&rep));
    let casimir = cohlim::casimir_identity_check(&rep, &inv);
    let spectrum = l_spectrum_check(&rep, &inv);
    let d = PyDict::new(py);
    d.set_item("residual", casimir.residual)?;
    d.set_item("threshold", casimir.threshold)?;
    d.set_item(
        "sectors",
        spectrum.sectors.iter().map(|s| (s.level, s.l, s.k, s.multiplicity)).collect::<Vec<_>>(),
    )?;
    d.set_item("pass", casimir.pass && spectrum.pass)?;
    Ok(d)
}

#[pymodule]
fn pycohlim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRepParams>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_function(wrap_pyfunction!(convert, m)?)?;
    m.add_function(wrap_pyfunction!(metric, m)?)?;
    m.add_function(wrap_pyfunction!(overlap, m)?)?;
    m.add_function(wrap_pyfunction!(diagonal_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(symbol, m)?)?;
    m.add_function(wrap_pyfunction!(identity_resolution, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_decay, m)?)?;
    m.add_function(wrap_pyfunction!(factorization_defect, m)?)?;
    m.add_function(wrap_pyfunction!(bracket_correspondence, m)?)?;
    m.add_function(wrap_pyfunction!(correspondence, m)?)?;
    m.add_function(wrap_pyfunction!(free_particle, m)?)?;
    m.add_function(wrap_pyfunction!(casimir_check, m)?)?;
    Ok(())
}
