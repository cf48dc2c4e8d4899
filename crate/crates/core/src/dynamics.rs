//! Quantum evolution in the truncated invariant sector, classical Hamilton
//! flow on the (v, w) half-plane, and their comparison.
//!
//! Time convention: i dψ/dt = H_N ψ with H_N = N h(A, B, C). The Heisenberg
//! rates dX/dt = i[H_N, X] = iN[h, X] then match the Poisson flow
//! dx/dt = {h_cl, x}, i.e. v̇ = -∂h_cl/∂w and ẇ = ∂h_cl/∂v.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::charts::PhaseObservable;
use crate::coherent::{coherent_vector, cutoff_for, CoherentSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianPolynomial;
use crate::limits::{
    canonical_of, check_disk, check_n_values, classical_hamiltonian, judge_convergence,
    SweepReport, SweepRow, CORRESPONDENCE_SLOPE_BAND, STUDY_ORDERING, STUDY_TAIL_TOL,
};
use crate::ode::{Dopri5, OdeOptions};
use crate::rep::{build_generator, hamiltonian_matrix_with, FockVector, Generator, OperatorMatrix, RepParams};

/// Population allowed in the top levels of the truncated basis.
pub const GUARD_THRESHOLD: f64 = 1e-8;
/// Number of top levels watched by the truncation guard.
pub const GUARD_LEVELS: usize = 5;
/// Largest cutoff propagated by eigendecomposition; larger ones use the ODE.
pub const EIGEN_MAX_CUTOFF: usize = 512;
/// Accepted |‖ψ₀‖ - 1| for a start vector.
pub const START_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    pub v: f64,
    pub w: f64,
}

impl ClassicalState {
    pub fn new(t: f64, v: f64, w: f64) -> Result<Self> {
        if !(w > 0.0 && w.is_finite() && v.is_finite() && t.is_finite()) {
            return Err(Error::Domain(format!("start point must have w > 0, got w = {w}")));
        }
        Ok(Self { t, v, w })
    }

    /// (p, r) with w = r²/2 and v = p/r.
    pub fn radial(&self) -> (f64, f64) {
        let r = (2.0 * self.w).sqrt();
        (self.v * r, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Quantum,
    Classical,
}

/// Observables at one time. `diagnostic` is ‖ψ‖ for quantum runs and h_cl
/// for classical ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub diagnostic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub samples: Vec<Sample>,
    /// Phase-space points, classical runs only.
    pub states: Vec<ClassicalState>,
    pub metadata: String,
}

fn check_grid(t_grid: &[f64], t0: f64) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid[0] < t0 {
        return Err(Error::InvalidArgument(format!("time grid must be finite and start at t >= {t0}")));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// A uniform grid 0, tmax/steps, ..., tmax (just {0} when tmax = 0).
pub fn uniform_grid(tmax: f64, steps: usize) -> Result<Vec<f64>> {
    if !(tmax >= 0.0 && tmax.is_finite()) {
        return Err(Error::InvalidArgument(format!("tmax must be >= 0, got {tmax}")));
    }
    if tmax == 0.0 {
        return Ok(vec![0.0]);
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("at least one time step is required".into()));
    }
    Ok((0..=steps).map(|i| tmax * i as f64 / steps as f64).collect())
}

fn classical_sample(t: f64, v: f64, w: f64, k: f64, h_cl: &PhaseObservable) -> Sample {
    Sample {
        t,
        a: w,
        b: 2.0 * v * w,
        c: v * v * w + k * k / w,
        diagnostic: h_cl.evaluate_unchecked(v, w),
    }
}

/// Integrates Hamilton's equations for `h_cl` from `start`, sampling at each
/// time of `t_grid` (all >= start.t). `k` enters only the recorded C symbol.
pub fn classical_evolve(
    h_cl: &PhaseObservable,
    start: ClassicalState,
    k: f64,
    t_grid: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    ClassicalState::new(start.t, start.v, start.w)?;
    check_grid(t_grid, start.t)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be > 0".into()));
    }
    let dh_dv = h_cl.d_dv();
    let dh_dw = h_cl.d_dw();
    let mut rhs = |_: f64, y: &[f64], d: &mut [f64]| {
        d[0] = -dh_dw.evaluate_unchecked(y[0], y[1]);
        d[1] = dh_dv.evaluate_unchecked(y[0], y[1]);
    };
    // local error target tol/100
    let opts = OdeOptions {
        rtol: tol * 1e-2,
        atol: tol * 1e-2,
        ..OdeOptions::default()
    };
    let mut stepper = Dopri5::new(start.t, 2, opts);
    let mut y = [start.v, start.w];
    let mut samples = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if let Err(e) = stepper.advance(&mut rhs, &|s: &[f64]| s[1] > 0.0, t, &mut y) {
            if y[1] < 1e-3 * start.w {
                return Err(Error::HalfPlaneBarrier { t: stepper.t(), w: y[1] });
            }
            return Err(e);
        }
        samples.push(classical_sample(t, y[0], y[1], k, h_cl));
        states.push(ClassicalState { t, v: y[0], w: y[1] });
    }
    Ok(Trajectory {
        kind: TrajectoryKind::Classical,
        samples,
        states,
        metadata: format!("h_cl = {h_cl}"),
    })
}

/// Closed-form motion under h_cl = v²w + k²/w: ẅ = 2h_cl, so w is quadratic
/// in t and v = ẇ/(2w).
pub fn free_particle_analytic(start: ClassicalState, k: f64, t: f64) -> Result<ClassicalState> {
    ClassicalState::new(start.t, start.v, start.w)?;
    let h = start.v * start.v * start.w + k * k / start.w;
    let s = t - start.t;
    let w = start.w + 2.0 * start.v * start.w * s + h * s * s;
    let w_dot = 2.0 * start.v * start.w + 2.0 * h * s;
    Ok(ClassicalState {
        t,
        v: w_dot / (2.0 * w),
        w,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumOptions {
    pub guard_threshold: f64,
    /// Relative tolerance of the ODE route.
    pub tol: f64,
    pub eigen_max_cutoff: usize,
}

impl Default for QuantumOptions {
    fn default() -> Self {
        Self {
            guard_threshold: GUARD_THRESHOLD,
            tol: 1e-12,
            eigen_max_cutoff: EIGEN_MAX_CUTOFF,
        }
    }
}

struct Observables {
    a: OperatorMatrix,
    b: OperatorMatrix,
    c: OperatorMatrix,
}

impl Observables {
    fn new(rep: &RepParams) -> Self {
        Self {
            a: build_generator(rep, Generator::A),
            b: build_generator(rep, Generator::B),
            c: build_generator(rep, Generator::C),
        }
    }

    fn sample(&self, t: f64, psi: &FockVector) -> Result<Sample> {
        Ok(Sample {
            t,
            a: self.a.expectation(psi)?.re,
            b: self.b.expectation(psi)?.re,
            c: self.c.expectation(psi)?.re,
            diagnostic: psi.norm(),
        })
    }
}

/// Solves i dψ/dt = H ψ from ψ(0) = `start` and records ⟨A⟩, ⟨B⟩, ⟨C⟩ and
/// ‖ψ‖ at each time of `t_grid` (all >= 0). The norm is not renormalized.
pub fn quantum_evolve(
    h: &OperatorMatrix,
    start: &FockVector,
    t_grid: &[f64],
    opts: &QuantumOptions,
) -> Result<Trajectory> {
    h.rep().ensure_same(start.rep())?;
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.hermiticity_defect()));
    }
    if (start.norm() - 1.0).abs() > START_NORM_TOL {
        return Err(Error::InvalidArgument(format!(
            "start vector must be normalized, norm = {}",
            start.norm()
        )));
    }
    check_grid(t_grid, 0.0)?;
    let rep = *start.rep();
    let obs = Observables::new(&rep);
    let top = rep.dim().saturating_sub(GUARD_LEVELS);
    let mut samples = Vec::with_capacity(t_grid.len());
    let mut last_valid_t = 0.0;
    let mut record = |t: f64, psi: FockVector, samples: &mut Vec<Sample>| -> Result<()> {
        let population = psi.population_from(top);
        if !(population <= opts.guard_threshold) {
            return Err(Error::TruncationGuard {
                t,
                population,
                last_valid_t,
            });
        }
        last_valid_t = t;
        samples.push(obs.sample(t, &psi)?);
        Ok(())
    };
    let method;
    if rep.cutoff() <= opts.eigen_max_cutoff {
        method = "eigendecomposition";
        let eig = SymmetricEigen::new(h.entries().clone());
        let u = &eig.eigenvectors;
        let c0 = u.adjoint() * start.coefficients();
        for &t in t_grid {
            let phased = DVector::from_fn(c0.len(), |i, _| {
                c0[i] * Complex64::from_polar(1.0, -eig.eigenvalues[i] * t)
            });
            record(t, FockVector::new(u * phased, rep)?, &mut samples)?;
        }
    } else {
        method = "adaptive ODE";
        let hm: &DMatrix<Complex64> = h.entries();
        let dim = rep.dim();
        let mut y: Vec<f64> = start
            .coefficients()
            .iter()
            .flat_map(|z| [z.re, z.im])
            .collect();
        let mut rhs = |_: f64, y: &[f64], d: &mut [f64]| {
            // d/dt ψ = -i H ψ
            for r in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..dim {
                    let hz = hm[(r, c)];
                    if hz.re != 0.0 || hz.im != 0.0 {
                        acc += hz * Complex64::new(y[2 * c], y[2 * c + 1]);
                    }
                }
                d[2 * r] = acc.im;
                d[2 * r + 1] = -acc.re;
            }
        };
        let ode_opts = OdeOptions {
            rtol: opts.tol,
            atol: opts.tol * 1e-2,
            ..OdeOptions::default()
        };
        let mut stepper = Dopri5::new(0.0, 2 * dim, ode_opts);
        for &t in t_grid {
            stepper.advance(&mut rhs, &|_: &[f64]| true, t, &mut y)?;
            let psi = DVector::from_fn(dim, |i, _| Complex64::new(y[2 * i], y[2 * i + 1]));
            record(t, FockVector::new(psi, rep)?, &mut samples)?;
        }
    }
    Ok(Trajectory {
        kind: TrajectoryKind::Quantum,
        samples,
        states: Vec::new(),
        metadata: format!("{rep}, {method}"),
    })
}

/// Largest |Δ| of the A, B, C columns over matching samples.
pub fn max_deviation(quantum: &Trajectory, classical: &Trajectory) -> Result<f64> {
    if quantum.samples.len() != classical.samples.len() {
        return Err(Error::InvalidArgument("trajectories have different sample counts".into()));
    }
    let mut worst = 0.0f64;
    for (q, c) in quantum.samples.iter().zip(&classical.samples) {
        if q.t != c.t {
            return Err(Error::InvalidArgument("trajectories sampled at different times".into()));
        }
        worst = worst
            .max((q.a - c.a).abs())
            .max((q.b - c.b).abs())
            .max((q.c - c.c).abs());
    }
    Ok(worst)
}

/// Tolerance of the classical reference trajectories in comparisons.
pub const CLASSICAL_TOL: f64 = 1e-12;
const CUTOFF_RETRIES: usize = 3;

/// Classical reference for a start point τ₀ under h.
pub fn classical_from_tau(
    h: &HamiltonianPolynomial,
    tau0: Complex64,
    k: f64,
    t_grid: &[f64],
) -> Result<Trajectory> {
    let (v, w) = canonical_of(tau0, k)?;
    classical_evolve(&classical_hamiltonian(h, k), ClassicalState::new(0.0, v, w)?, k, t_grid, CLASSICAL_TOL)
}

/// Cutoff for a quantum run at particle number N: sized from the largest
/// classical K0 reached, i.e. the coherent state the packet is expected to
/// resemble, with headroom for its spreading.
pub fn auto_cutoff(n: u32, k: f64, degree: u32, classical: &Trajectory) -> Result<usize> {
    let k0_max = classical
        .samples
        .iter()
        .map(|s| 0.5 * (s.a + s.c))
        .fold(k, f64::max);
    let x = ((k0_max - k) / (k0_max + k)).clamp(0.0, 1.0 - 1e-15);
    let base = cutoff_for(x, 2.0 * n as f64 * k, STUDY_TAIL_TOL)?;
    Ok(base + base / 4 + 4 * degree as usize + 16)
}

fn dense_sizing_grid(t_grid: &[f64]) -> Vec<f64> {
    let t_max = *t_grid.last().unwrap();
    let mut grid: Vec<f64> = (0..=256).map(|i| t_max * i as f64 / 256.0).collect();
    grid.dedup();
    grid
}

/// Quantum run from the coherent state at τ₀ with automatic cutoff sizing;
/// the cutoff is doubled when the truncation guard trips.
pub fn quantum_from_tau(
    h: &HamiltonianPolynomial,
    tau0: Complex64,
    k: f64,
    n: u32,
    t_grid: &[f64],
    classical_sizing: &Trajectory,
    opts: &QuantumOptions,
) -> Result<Trajectory> {
    check_disk(tau0)?;
    let mut cutoff = auto_cutoff(n, k, h.degree(), classical_sizing)?;
    let mut attempt = 0;
    loop {
        let rep = RepParams::new(n, k, cutoff)?;
        let hm = hamiltonian_matrix_with(&rep, h, STUDY_ORDERING)?;
        let psi = coherent_vector(&CoherentSpec::new(rep, tau0)?)?;
        match quantum_evolve(&hm, &psi, t_grid, opts) {
            Err(Error::TruncationGuard { .. }) if attempt < CUTOFF_RETRIES => {
                attempt += 1;
                cutoff *= 2;
            }
            other => return other,
        }
    }
}

/// For each N, the largest quantum-classical deviation of the A, B, C
/// symbols over `t_grid`, with a log-log fit of its decay in N.
pub fn correspondence_compare(
    h: &HamiltonianPolynomial,
    tau0: Complex64,
    k: f64,
    n_values: &[u32],
    t_grid: &[f64],
) -> Result<SweepReport> {
    check_n_values(n_values)?;
    check_grid(t_grid, 0.0)?;
    let classical = classical_from_tau(h, tau0, k, t_grid)?;
    let sizing = classical_from_tau(h, tau0, k, &dense_sizing_grid(t_grid))?;
    let opts = QuantumOptions::default();
    let rows: Vec<SweepRow> = n_values
        .par_iter()
        .map(|&n| {
            let quantum = quantum_from_tau(h, tau0, k, n, t_grid, &sizing, &opts)?;
            Ok(SweepRow {
                n,
                value: max_deviation(&quantum, &classical)?,
                reference: 0.0,
            })
        })
        .collect::<Result<_>>()?;
    Ok(judge_convergence(
        &format!("correspondence {h}"),
        rows,
        CORRESPONDENCE_SLOPE_BAND,
    ))
}
