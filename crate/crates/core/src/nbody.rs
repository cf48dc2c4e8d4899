//! Brute-force oracle: N explicit oscillator modes, truncated to d levels
//! each, with the O(N) invariants built from first principles.
//!
//! Mode operators are scaled so that [a_i, a_j†] = δ_ij / N, with
//! q = (a† + a)/√2 and p = i(a† - a)/√2. Products of a few mode operators
//! are exact on the safe subspace of total excitation <= d - 4.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default bound on the product-space dimension d^N.
pub const DEFAULT_MEMORY_CEILING: usize = 20736;
pub const MAX_PARTICLES: u32 = 3;
/// Casimir identity threshold for N <= 2.
pub const CASIMIR_TOL: f64 = 1e-10;
/// Casimir identity threshold for N = 3.
pub const CASIMIR_TOL_N3: f64 = 1e-9;
/// Eigenvalue matching tolerance for the L² spectrum.
pub const L_SPECTRUM_TOL: f64 = 1e-8;
const SAFE_MARGIN: usize = 4;
const KERNEL_TOL: f64 = 1e-10;

pub type SparseOp = CsrMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiOscRep {
    n_particles: u32,
    per_mode_cutoff: usize,
}

impl MultiOscRep {
    pub fn new(n_particles: u32, per_mode_cutoff: usize) -> Result<Self> {
        Self::with_ceiling(n_particles, per_mode_cutoff, DEFAULT_MEMORY_CEILING)
    }

    pub fn with_ceiling(n_particles: u32, per_mode_cutoff: usize, ceiling: usize) -> Result<Self> {
        if n_particles == 0 || n_particles > MAX_PARTICLES {
            return Err(Error::InvalidArgument(format!(
                "N must be ≤ {MAX_PARTICLES} (and >= 1), got {n_particles}"
            )));
        }
        if per_mode_cutoff <= SAFE_MARGIN {
            return Err(Error::InvalidArgument(format!(
                "per-mode cutoff d must be > {SAFE_MARGIN}, got {per_mode_cutoff}"
            )));
        }
        let dim = (per_mode_cutoff as u128).pow(n_particles);
        if dim > ceiling as u128 {
            return Err(Error::MemoryCeiling {
                dim: usize::try_from(dim).unwrap_or(usize::MAX),
                ceiling,
            });
        }
        Ok(Self {
            n_particles,
            per_mode_cutoff,
        })
    }

    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }

    pub fn per_mode_cutoff(&self) -> usize {
        self.per_mode_cutoff
    }

    pub fn dim(&self) -> usize {
        self.per_mode_cutoff.pow(self.n_particles)
    }

    /// Largest total excitation of the safe subspace.
    pub fn safe_max_excitation(&self) -> usize {
        self.per_mode_cutoff - SAFE_MARGIN
    }

    /// Occupation numbers of a product-basis index.
    pub fn occupations(&self, index: usize) -> Vec<usize> {
        let d = self.per_mode_cutoff;
        (0..self.n_particles as usize)
            .map(|i| (index / d.pow(i as u32)) % d)
            .collect()
    }

    pub fn excitation(&self, index: usize) -> usize {
        self.occupations(index).iter().sum()
    }

    /// Product-basis indices with total excitation `level`, ascending.
    pub fn level_indices(&self, level: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.excitation(i) == level).collect()
    }

    /// Product-basis indices of the safe subspace, ascending.
    pub fn safe_indices(&self) -> Vec<usize> {
        let max = self.safe_max_excitation();
        (0..self.dim()).filter(|&i| self.excitation(i) <= max).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub a: Vec<SparseOp>,
    pub a_dag: Vec<SparseOp>,
    pub q: Vec<SparseOp>,
    pub p: Vec<SparseOp>,
}

/// Mode operators tensored into the d^N product space.
pub fn build_mode_operators(rep: &MultiOscRep) -> ModeOperators {
    let dim = rep.dim();
    let d = rep.per_mode_cutoff;
    let scale = 1.0 / (rep.n_particles as f64).sqrt();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = ModeOperators {
        a: Vec::new(),
        a_dag: Vec::new(),
        q: Vec::new(),
        p: Vec::new(),
    };
    for mode in 0..rep.n_particles as usize {
        let stride = d.pow(mode as u32);
        let mut coo = CooMatrix::new(dim, dim);
        for index in 0..dim {
            let n = (index / stride) % d;
            if n > 0 {
                coo.push(index - stride, index, Complex64::new(scale * (n as f64).sqrt(), 0.0));
            }
        }
        let a = CsrMatrix::from(&coo);
        let a_dag = adjoint(&a);
        let q = (&a_dag + &a) * Complex64::new(inv_sqrt2, 0.0);
        let p = (&a_dag - &a) * Complex64::new(0.0, inv_sqrt2);
        out.a.push(a);
        out.a_dag.push(a_dag);
        out.q.push(q);
        out.p.push(p);
    }
    out
}

pub fn adjoint(m: &SparseOp) -> SparseOp {
    let mut t = m.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

pub fn commutator(x: &SparseOp, y: &SparseOp) -> SparseOp {
    &(x * y) - &(y * x)
}

#[derive(Debug, Clone)]
pub struct Invariants {
    pub a: SparseOp,
    pub b: SparseOp,
    pub c: SparseOp,
    pub k0: SparseOp,
    pub k1: SparseOp,
    pub k2: SparseOp,
    pub k_minus: SparseOp,
    pub casimir: SparseOp,
    pub lsq: SparseOp,
    /// Σ a_i† a_i with the scaled modes, so K0 = (number + 1/2)/2.
    pub number: SparseOp,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A = Σq²/2, B = Σ(qp + pq)/2, C = Σp²/2, K0 = (A + C)/2, K1 = B/2,
/// K2 = (A - C)/2, Casimir K0² - K1² - K2², L² = Σ_{i<j} (q_i p_j - q_j p_i)².
pub fn build_invariants(rep: &MultiOscRep, modes: &ModeOperators) -> Invariants {
    let dim = rep.dim();
    let zero = || CsrMatrix::<Complex64>::zeros(dim, dim);
    let mut a = zero();
    let mut b = zero();
    let mut c = zero();
    let mut number = zero();
    let mut k_minus = zero();
    let n = rep.n_particles as usize;
    for i in 0..n {
        let (q, p) = (&modes.q[i], &modes.p[i]);
        a = &a + &((q * q) * real(0.5));
        c = &c + &((p * p) * real(0.5));
        b = &b + &((&(q * p) + &(p * q)) * real(0.5));
        number = &number + &(&modes.a_dag[i] * &modes.a[i]);
        k_minus = &k_minus + &(&modes.a[i] * &modes.a[i]);
    }
    let k0 = (&a + &c) * real(0.5);
    let k1 = &b * real(0.5);
    let k2 = (&a - &c) * real(0.5);
    // K- = K1 - i K2 = -(i/2) Σ a_i²
    let k_minus = k_minus * Complex64::new(0.0, -0.5);
    let casimir = &(&(&k0 * &k0) - &(&k1 * &k1)) - &(&k2 * &k2);
    let mut lsq = zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let l = &(&modes.q[i] * &modes.p[j]) - &(&modes.q[j] * &modes.p[i]);
            lsq = &lsq + &(&l * &l);
        }
    }
    Invariants {
        a,
        b,
        c,
        k0,
        k1,
        k2,
        k_minus,
        casimir,
        lsq,
        number,
    }
}

/// Dense block of `op` with the given row and column indices.
pub fn restrict(op: &SparseOp, rows: &[usize], cols: &[usize]) -> DMatrix<Complex64> {
    let mut col_pos = vec![usize::MAX; op.ncols()];
    for (j, &c) in cols.iter().enumerate() {
        col_pos[c] = j;
    }
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        let row = op.row(r);
        for (&c, v) in row.col_indices().iter().zip(row.values()) {
            let j = col_pos[c];
            if j != usize::MAX {
                out[(i, j)] += *v;
            }
        }
    }
    out
}

/// Max |entry| of `op` on the safe subspace.
pub fn safe_max_abs(rep: &MultiOscRep, op: &SparseOp) -> f64 {
    let safe = rep.safe_indices();
    restrict(op, &safe, &safe).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Upper bound on the operator norm of `op` restricted to the safe
/// subspace: largest spectral norm of the excitation-level blocks plus the
/// Frobenius norm of everything between levels.
pub fn safe_operator_norm(rep: &MultiOscRep, op: &SparseOp) -> f64 {
    let safe = rep.safe_indices();
    let mut off = 0.0f64;
    let mut levels: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &safe {
        levels.entry(rep.excitation(i)).or_default().push(i);
    }
    let mut is_safe = vec![false; rep.dim()];
    for &i in &safe {
        is_safe[i] = true;
    }
    for &r in &safe {
        let row = op.row(r);
        for (&c, v) in row.col_indices().iter().zip(row.values()) {
            if is_safe[c] && rep.excitation(c) != rep.excitation(r) {
                off += v.norm_sqr();
            }
        }
    }
    let block_max = levels
        .values()
        .map(|idx| spectral_norm(&restrict(op, idx, idx)))
        .fold(0.0, f64::max);
    block_max + off.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CasimirReport {
    pub n_particles: u32,
    pub per_mode_cutoff: usize,
    /// Operator-norm residual of K² - (L² + 1/4 - 1/N)/4 on the safe subspace.
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn casimir_threshold(n_particles: u32) -> f64 {
    if n_particles >= 3 {
        CASIMIR_TOL_N3
    } else {
        CASIMIR_TOL
    }
}

/// Checks K² = (1/4)(L² + 1/4 - 1/N) on the safe subspace.
pub fn casimir_identity_check(rep: &MultiOscRep, inv: &Invariants) -> CasimirReport {
    let n = rep.n_particles as f64;
    let constant = CsrMatrix::identity(rep.dim()) * real(0.25 - 1.0 / n);
    let rhs = (&inv.lsq + &constant) * real(0.25);
    let residual = safe_operator_norm(rep, &(&inv.casimir - &rhs));
    let threshold = casimir_threshold(rep.n_particles);
    CasimirReport {
        n_particles: rep.n_particles,
        per_mode_cutoff: rep.per_mode_cutoff,
        residual,
        threshold,
        pass: residual <= threshold,
    }
}

/// L² eigenvalues observed on one excitation level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSpectrum {
    pub level: usize,
    /// (l, eigenvalue, multiplicity) with l = l_std / N.
    pub matched: Vec<(f64, f64, usize)>,
    pub unmatched: Vec<f64>,
}

/// An su(1,1) lowest-weight sector found in the kernel of K-.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub level: usize,
    pub k: f64,
    pub l: f64,
    pub multiplicity: usize,
    /// Largest deviation of L² on the sector from l(l + 1 - 2/N).
    pub l_sq_error: f64,
    /// |k - (l + 1/2)/2|.
    pub k_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LSpectrumReport {
    pub n_particles: u32,
    pub levels: Vec<LevelSpectrum>,
    pub sectors: Vec<Sector>,
    /// True when some matched l is not an integer (l = l_std/N with
    /// l_std not divisible by N).
    pub fractional_l: bool,
    pub pass: bool,
}

/// l(l + 1 - 2/N), the L² eigenvalue for l = l_std / N.
pub fn l_squared(l: f64, n_particles: u32) -> f64 {
    l * (l + 1.0 - 2.0 / n_particles as f64)
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let sym = (m + m.adjoint()) * real(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Diagonalizes L² on every safe excitation level and matches each
/// eigenvalue to l(l + 1 - 2/N) with l = l_std/N, l_std = level, level - 2,
/// ...; then assigns k to the lowest-weight sectors (kernel of K-) and
/// checks k = (l + 1/2)/2.
pub fn l_spectrum_check(rep: &MultiOscRep, inv: &Invariants) -> LSpectrumReport {
    let n = rep.n_particles;
    let nf = n as f64;
    let mut levels = Vec::new();
    let mut sectors = Vec::new();
    let mut fractional_l = false;
    let mut pass = true;
    for level in 0..=rep.safe_max_excitation() {
        let idx = rep.level_indices(level);
        let eig = hermitian_eigenvalues(&restrict(&inv.lsq, &idx, &idx));
        let mut matched: Vec<(f64, f64, usize)> = Vec::new();
        let mut unmatched = Vec::new();
        for ev in eig {
            let best = (0..=level)
                .rev()
                .step_by(2)
                .map(|ls| (ls, (ev - l_squared(ls as f64 / nf, n)).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((ls, err)) if err <= L_SPECTRUM_TOL => {
                    let l = ls as f64 / nf;
                    if ls % n as usize != 0 {
                        fractional_l = true;
                    }
                    match matched.iter_mut().find(|m| m.0 == l) {
                        Some(m) => m.2 += 1,
                        None => matched.push((l, l_squared(l, n), 1)),
                    }
                }
                _ => unmatched.push(ev),
            }
        }
        if !unmatched.is_empty() {
            pass = false;
        }
        levels.push(LevelSpectrum {
            level,
            matched,
            unmatched,
        });

        let kernel = if level < 2 {
            DMatrix::identity(idx.len(), idx.len())
        } else {
            let lower = rep.level_indices(level - 2);
            let m = restrict(&inv.k_minus, &lower, &idx);
            let gram = m.adjoint() * &m;
            let sym = (&gram + gram.adjoint()) * real(0.5);
            let scale = gram.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let eig = SymmetricEigen::new(sym);
            let cols: Vec<usize> = (0..idx.len())
                .filter(|&i| eig.eigenvalues[i].abs() <= KERNEL_TOL * scale)
                .collect();
            DMatrix::from_fn(idx.len(), cols.len(), |r, c| eig.eigenvectors[(r, cols[c])])
        };
        if kernel.ncols() == 0 {
            continue;
        }
        let l = level as f64 / nf;
        let on_kernel = |op: &SparseOp| kernel.adjoint() * restrict(op, &idx, &idx) * &kernel;
        let l_sq_error = hermitian_eigenvalues(&on_kernel(&inv.lsq))
            .iter()
            .map(|ev| (ev - l_squared(l, n)).abs())
            .fold(0.0, f64::max);
        let k0 = on_kernel(&inv.k0);
        let k = k0.diagonal().iter().map(|z| z.re).sum::<f64>() / kernel.ncols() as f64;
        let k_error = (k - (l + 0.5) / 2.0).abs();
        if l_sq_error > L_SPECTRUM_TOL || k_error > L_SPECTRUM_TOL {
            pass = false;
        }
        sectors.push(Sector {
            level,
            k,
            l,
            multiplicity: kernel.ncols(),
            l_sq_error,
            k_error,
        });
    }
    LSpectrumReport {
        n_particles: n,
        levels,
        sectors,
        fractional_l,
        pass,
    }
}
