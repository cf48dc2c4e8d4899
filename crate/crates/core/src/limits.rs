//! Large-N studies: overlap decay, factorization of symbols, bracket
//! correspondence, symbol injectivity and the classical Hamiltonian.
//!
//! Every sweep runs one independent job per N (in parallel) and assembles
//! the rows in ascending N.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::charts::{basic_symbol, convert, poisson_bracket, Chart, ChartPoint, PhaseObservable};
use crate::coherent::{
    coherent_vector, cutoff_for, delta_exponent, overlap_closed, CoherentSpec,
};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianPolynomial;
use crate::rep::{
    build_generator, commutator, polynomial_operator, Generator, OperatorMatrix, OperatorOrdering,
    RepParams,
};

/// Values at or below this are treated as exact zeros / exact matches.
pub const EXACT_TOL: f64 = 1e-10;
/// Relative tolerance of the overlap-decay identity.
pub const OVERLAP_REL_TOL: f64 = 1e-10;
/// Allowed mismatch between the fitted semi-log slope and -Re Δ.
pub const OVERLAP_SLOPE_TOL: f64 = 1e-9;
/// Acceptance band for 1/N decay slopes.
pub const SLOPE_BAND: (f64, f64) = (-1.15, -0.85);
/// Acceptance band used for quantum-classical trajectory comparisons.
pub const CORRESPONDENCE_SLOPE_BAND: (f64, f64) = (-1.2, -0.8);
pub const MIN_FIT_POINTS: usize = 4;
/// Discarded coherent-state mass used to size cutoffs in sweeps.
pub const STUDY_TAIL_TOL: f64 = 1e-16;

/// Polynomial operands are symmetrized over letter orderings so that
/// Hermitian inputs give Hermitian matrices.
pub const STUDY_ORDERING: OperatorOrdering = OperatorOrdering::Symmetrized;

/// An operator argument of a study: a named generator or a polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Generator(Generator),
    Poly(HamiltonianPolynomial),
}

impl Operand {
    pub fn degree(&self) -> u32 {
        match self {
            Operand::Generator(Generator::Casimir) => 2,
            Operand::Generator(_) => 1,
            Operand::Poly(h) => h.degree(),
        }
    }

    pub fn matrix(&self, rep: &RepParams) -> Result<OperatorMatrix> {
        match self {
            Operand::Generator(g) => Ok(build_generator(rep, *g)),
            Operand::Poly(h) => polynomial_operator(rep, h, STUDY_ORDERING),
        }
    }

    /// Leading-order classical symbol on the canonical chart.
    pub fn classical(&self, k: f64) -> Result<PhaseObservable> {
        match self {
            Operand::Generator(g) => basic_symbol(*g, k),
            Operand::Poly(h) => Ok(classical_hamiltonian(h, k)),
        }
    }
}

impl From<Generator> for Operand {
    fn from(g: Generator) -> Self {
        Operand::Generator(g)
    }
}

impl From<HamiltonianPolynomial> for Operand {
    fn from(h: HamiltonianPolynomial) -> Self {
        Operand::Poly(h)
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Generator(g) => write!(f, "{g}"),
            Operand::Poly(h) => write!(f, "{h}"),
        }
    }
}

/// Generator names first, polynomials otherwise.
impl FromStr for Operand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().parse::<Generator>() {
            Ok(g) => Ok(Operand::Generator(g)),
            Err(_) => Ok(Operand::Poly(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: u32,
    pub value: f64,
    pub reference: f64,
}

impl SweepRow {
    pub fn abs_error(&self) -> f64 {
        (self.value - self.reference).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitScale {
    /// ln(error) against ln N.
    LogLog,
    /// ln(value) against N.
    SemiLog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub scale: FitScale,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub study: String,
    pub rows: Vec<SweepRow>,
    pub fit: Option<SlopeFit>,
    pub pass: bool,
    pub detail: String,
}

impl SweepReport {
    pub fn n_values(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn max_abs_error(&self) -> f64 {
        self.rows.iter().map(SweepRow::abs_error).fold(0.0, f64::max)
    }
}

/// Least-squares line through (x, y).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("degenerate abscissae in fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok((slope, intercept, (rss / nf).sqrt()))
}

/// Log-log fit of the absolute errors of the rows that are not exact zeros.
pub fn fit_loglog(rows: &[SweepRow]) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.abs_error() > EXACT_TOL)
        .map(|r| ((r.n as f64).ln(), r.abs_error().ln()))
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: xs.len(),
        });
    }
    let (slope, intercept, residual) = fit_line(&xs, &ys)?;
    Ok(SlopeFit {
        scale: FitScale::LogLog,
        slope,
        intercept,
        residual,
        points: xs.len(),
    })
}

/// Judges a sweep whose reference is the N → ∞ value: exact when every
/// error is below [`EXACT_TOL`], otherwise the log-log slope must lie in
/// `band`.
pub fn judge_convergence(study: &str, rows: Vec<SweepRow>, band: (f64, f64)) -> SweepReport {
    let worst = rows.iter().map(SweepRow::abs_error).fold(0.0, f64::max);
    if worst <= EXACT_TOL {
        return SweepReport {
            study: study.to_string(),
            rows,
            fit: None,
            pass: true,
            detail: format!("exact: max abs error {worst:.3e}"),
        };
    }
    match fit_loglog(&rows) {
        Ok(fit) => {
            let pass = fit.slope >= band.0 && fit.slope <= band.1;
            SweepReport {
                study: study.to_string(),
                rows,
                fit: Some(fit),
                pass,
                detail: format!(
                    "log-log slope {:.6} (band [{}, {}])",
                    fit.slope, band.0, band.1
                ),
            }
        }
        Err(e) => SweepReport {
            study: study.to_string(),
            rows,
            fit: None,
            pass: false,
            detail: format!("no slope fit: {e}"),
        },
    }
}

pub(crate) fn check_n_values(n_values: &[u32]) -> Result<()> {
    if n_values.is_empty() {
        return Err(Error::InvalidArgument("N list is empty".into()));
    }
    if n_values[0] == 0 {
        return Err(Error::InvalidRep("particle number N must be >= 1".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N values must be strictly increasing".into()));
    }
    Ok(())
}

pub(crate) fn check_disk(tau: Complex64) -> Result<()> {
    if !(tau.re.is_finite() && tau.im.is_finite()) || tau.norm() >= 1.0 {
        return Err(Error::Domain("tau modulus must be < 1".into()));
    }
    Ok(())
}

/// Representation whose cutoff certifies the coherent state at τ to
/// [`STUDY_TAIL_TOL`], padded for operators of the given degree.
pub fn study_rep(n: u32, k: f64, tau: Complex64, degree: u32) -> Result<RepParams> {
    check_disk(tau)?;
    let probe = RepParams::new(n, k, 0)?;
    let base = cutoff_for(tau.norm_sqr(), 2.0 * probe.j(), STUDY_TAIL_TOL)?;
    Ok(probe.with_cutoff(base + 4 * degree as usize + 8))
}

/// Canonical-chart coordinates (v, w) of τ.
pub fn canonical_of(tau: Complex64, k: f64) -> Result<(f64, f64)> {
    let p = convert(&ChartPoint::tau(tau)?, Chart::Canonical, Some(k))?;
    let [v, w] = p.coords();
    Ok((v, w))
}

fn parallel_rows<F>(n_values: &[u32], job: F) -> Result<Vec<SweepRow>>
where
    F: Fn(u32) -> Result<SweepRow> + Sync,
{
    check_n_values(n_values)?;
    n_values.par_iter().map(|&n| job(n)).collect()
}

/// Records |⟨τ|τ'⟩| at J = N k against exp(-N Re Δ) and checks that the
/// semi-log slope of the overlap equals -Re Δ.
pub fn overlap_decay_study(
    tau: Complex64,
    tau2: Complex64,
    k: f64,
    n_values: &[u32],
) -> Result<SweepReport> {
    RepParams::new(1, k, 0)?;
    let delta = delta_exponent(tau, tau2, k)?;
    let rows = parallel_rows(n_values, |n| {
        let overlap = overlap_closed(tau, tau2, n as f64 * k)?;
        Ok(SweepRow {
            n,
            value: overlap.norm(),
            reference: (-(n as f64) * delta.re).exp(),
        })
    })?;
    let worst_rel = rows
        .iter()
        .map(|r| {
            if r.reference == 0.0 {
                if r.value == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                r.abs_error() / r.reference
            }
        })
        .fold(0.0, f64::max);
    let identity_ok = worst_rel <= OVERLAP_REL_TOL;
    let trivial = tau == tau2;
    let sign_ok = trivial || delta.re > 0.0;
    let mut fit = None;
    let mut slope_ok = true;
    if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.value.ln()).collect();
        if ys.iter().all(|y| y.is_finite()) {
            let (slope, intercept, residual) = fit_line(&xs, &ys)?;
            slope_ok = (slope + delta.re).abs() <= OVERLAP_SLOPE_TOL * delta.re.abs().max(1.0);
            fit = Some(SlopeFit {
                scale: FitScale::SemiLog,
                slope,
                intercept,
                residual,
                points: xs.len(),
            });
        }
    }
    Ok(SweepReport {
        study: "overlap-decay".into(),
        rows,
        fit,
        pass: identity_ok && sign_ok && slope_ok,
        detail: format!(
            "Re Delta = {:.12}, max relative error {worst_rel:.3e}",
            delta.re
        ),
    })
}

/// |(XY)(τ) - X(τ) Y(τ)| for each N; decays like 1/N.
pub fn factorization_defect(
    x: &Operand,
    y: &Operand,
    tau: Complex64,
    k: f64,
    n_values: &[u32],
) -> Result<SweepReport> {
    let degree = x.degree() + y.degree();
    let rows = parallel_rows(n_values, |n| {
        let rep = study_rep(n, k, tau, degree)?;
        let spec = CoherentSpec::new(rep, tau)?;
        let psi = coherent_vector(&spec)?;
        let xm = x.matrix(&rep)?;
        let ym = y.matrix(&rep)?;
        let xy = xm.checked_mul(&ym)?;
        let defect = xy.expectation(&psi)? - xm.expectation(&psi)? * ym.expectation(&psi)?;
        Ok(SweepRow {
            n,
            value: defect.norm(),
            reference: 0.0,
        })
    })?;
    Ok(judge_convergence(
        &format!("factorization {x},{y}"),
        rows,
        SLOPE_BAND,
    ))
}

/// Compares the symbol of iN[X, Y] with the Poisson bracket of the classical
/// symbols at the canonical image of τ.
pub fn commutator_correspondence(
    x: &Operand,
    y: &Operand,
    tau: Complex64,
    k: f64,
    n_values: &[u32],
) -> Result<SweepReport> {
    let (v, w) = canonical_of(tau, k)?;
    let bracket = poisson_bracket(&x.classical(k)?, &y.classical(k)?).evaluate(v, w)?;
    let degree = x.degree() + y.degree();
    let rows = parallel_rows(n_values, |n| {
        let rep = study_rep(n, k, tau, degree)?;
        let psi = coherent_vector(&CoherentSpec::new(rep, tau)?)?;
        let c = commutator(&x.matrix(&rep)?, &y.matrix(&rep)?)?
            .scaled_complex(Complex64::new(0.0, n as f64));
        let s = c.expectation(&psi)?;
        Ok(SweepRow {
            n,
            value: s.re,
            reference: bracket,
        })
    })?;
    Ok(judge_convergence(
        &format!("bracket {x},{y}"),
        rows,
        SLOPE_BAND,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityReport {
    /// Numerical rank of the grid × {I, K0, K1, K2} symbol matrix.
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Index pairs of grid points with indistinguishable symbol triples.
    pub duplicates: Vec<(usize, usize)>,
    pub pass: bool,
}

/// Relative threshold for the rank decision and for equal symbol triples.
pub const INJECTIVITY_TOL: f64 = 1e-10;

/// Samples the symbols of I, K0, K1, K2 on `grid` and checks that they are
/// linearly independent and that the triples separate the grid points.
pub fn symbol_injectivity_check(grid: &[Complex64], rep: &RepParams) -> Result<InjectivityReport> {
    if grid.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: grid.len(),
        });
    }
    let ops = [Generator::K0, Generator::K1, Generator::K2].map(|g| build_generator(rep, g));
    let triples: Vec<[f64; 3]> = grid
        .par_iter()
        .map(|&tau| {
            let psi = coherent_vector(&CoherentSpec::new(*rep, tau)?)?;
            let mut t = [0.0; 3];
            for (slot, op) in t.iter_mut().zip(&ops) {
                *slot = op.expectation(&psi)?.re;
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(grid.len(), 4, |i, j| if j == 0 { 1.0 } else { triples[i][j - 1] });
    let mut singular_values: Vec<f64> = m.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let top = singular_values[0];
    let rank = singular_values
        .iter()
        .filter(|s| **s > INJECTIVITY_TOL * top)
        .count();
    let mut duplicates = Vec::new();
    for i in 0..triples.len() {
        for j in (i + 1)..triples.len() {
            let scale = triples[i]
                .iter()
                .chain(&triples[j])
                .fold(1.0f64, |m, x| m.max(x.abs()));
            let dist = triples[i]
                .iter()
                .zip(&triples[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dist <= INJECTIVITY_TOL * scale {
                duplicates.push((i, j));
            }
        }
    }
    Ok(InjectivityReport {
        rank,
        singular_values,
        pass: rank == 4 && duplicates.is_empty(),
        duplicates,
    })
}

/// True when every sampled symbol of `op` vanishes, i.e. `op` is
/// indistinguishable from the zero operator on the grid.
pub fn is_zero_on_grid(op: &OperatorMatrix, grid: &[Complex64]) -> Result<bool> {
    let scale = op.max_abs().max(1.0);
    for &tau in grid {
        let psi = coherent_vector(&CoherentSpec::new(*op.rep(), tau)?)?;
        if op.expectation(&psi)?.norm() > INJECTIVITY_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// h_cl(v, w) = h(w, 2vw, v²w + k²/w).
pub fn classical_hamiltonian(h: &HamiltonianPolynomial, k: f64) -> PhaseObservable {
    let a = PhaseObservable::w();
    let b = PhaseObservable::monomial(1, 1, 2.0);
    let c = PhaseObservable::from_terms([((2, 1), 1.0), ((0, -1), k * k)]);
    let mut out = PhaseObservable::zero();
    for (e, coef) in h.terms() {
        let term = &(&a.pow(e[0]) * &b.pow(e[1])) * &c.pow(e[2]);
        out = &out + &term.scaled(*coef);
    }
    out
}

/// (1/N)·symbol(H_N) at τ against h_cl at the canonical image of τ.
pub fn hamiltonian_limit_check(
    h: &HamiltonianPolynomial,
    tau: Complex64,
    k: f64,
    n_values: &[u32],
) -> Result<SweepReport> {
    RepParams::new(1, k, 0)?;
    let (v, w) = canonical_of(tau, k)?;
    let reference = classical_hamiltonian(h, k).evaluate(v, w)?;
    let rows = parallel_rows(n_values, |n| {
        let rep = study_rep(n, k, tau, h.degree())?;
        let psi = coherent_vector(&CoherentSpec::new(rep, tau)?)?;
        let op = polynomial_operator(&rep, h, STUDY_ORDERING)?;
        Ok(SweepRow {
            n,
            value: op.expectation(&psi)?.re,
            reference,
        })
    })?;
    Ok(judge_convergence(&format!("hamiltonian {h}"), rows, SLOPE_BAND))
}
