//! Truncated, N-rescaled unitary irreducible representation of su(1,1).
//!
//! Basis vectors |n⟩, n = 0..=cutoff, are the K0 eigenstates of the
//! representation with unscaled Bargmann index J = N·k. The rescaled
//! generators act as
//!
//! ```text
//! K0 |n⟩ = (k + n/N) |n⟩
//! K+ |n⟩ = (1/N) sqrt((n+1)(2J+n)) |n+1⟩
//! K- |n⟩ = (1/N) sqrt(n(2J+n-1))   |n-1⟩
//! ```
//!
//! so that [K-, K+] = (2/N) K0 and the Casimir K0² - K1² - K2² equals
//! k(k - 1/N). Everything is built exactly on the truncated space; only rows
//! and columns further than an operator's bandwidth from the cutoff agree
//! with the infinite representation.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianPolynomial;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepParams {
    n_particles: u32,
    k: f64,
    cutoff: usize,
}

impl RepParams {
    pub fn new(n_particles: u32, k: f64, cutoff: usize) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidRep("particle number N must be >= 1".into()));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidRep(format!("Bargmann index k must be > 0, got {k}")));
        }
        Ok(Self {
            n_particles,
            k,
            cutoff,
        })
    }

    /// Representation with k = (l + 1/2)/2, the values allowed when the
    /// invariant sector is read as an angular-momentum multiplet.
    pub fn from_angular_momentum(n_particles: u32, l: u32, cutoff: usize) -> Result<Self> {
        Self::new(n_particles, (l as f64 + 0.5) / 2.0, cutoff)
    }

    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    /// Unscaled Bargmann index J = N·k.
    pub fn j(&self) -> f64 {
        self.n_particles as f64 * self.k
    }

    /// The effective Planck constant 1/N.
    pub fn hbar(&self) -> f64 {
        1.0 / self.n_particles as f64
    }

    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        Self { cutoff, ..*self }
    }

    /// The identity resolution only converges for J > 1/2.
    pub fn require_normalizable(&self) -> Result<()> {
        if self.j() > 0.5 {
            Ok(())
        } else {
            Err(Error::NotNormalizable(self.j()))
        }
    }

    pub(crate) fn ensure_same(&self, other: &RepParams) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::RepMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for RepParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RepParams(N={}, k={}, cutoff={})",
            self.n_particles, self.k, self.cutoff
        )
    }
}

/// A state in the truncated |n⟩ basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    coefficients: DVector<Complex64>,
    rep: RepParams,
}

impl FockVector {
    pub fn new(coefficients: DVector<Complex64>, rep: RepParams) -> Result<Self> {
        if coefficients.len() != rep.dim() {
            return Err(Error::InvalidArgument(format!(
                "vector length {} does not match dimension {}",
                coefficients.len(),
                rep.dim()
            )));
        }
        Ok(Self { coefficients, rep })
    }

    pub fn basis(rep: RepParams, n: usize) -> Result<Self> {
        if n > rep.cutoff() {
            return Err(Error::InvalidArgument(format!(
                "basis index {n} beyond cutoff {}",
                rep.cutoff()
            )));
        }
        let mut c = DVector::zeros(rep.dim());
        c[n] = Complex64::new(1.0, 0.0);
        Ok(Self {
            coefficients: c,
            rep,
        })
    }

    pub fn coefficients(&self) -> &DVector<Complex64> {
        &self.coefficients
    }

    pub fn rep(&self) -> &RepParams {
        &self.rep
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        self.rep.ensure_same(&other.rep)?;
        Ok(self.coefficients.dotc(&other.coefficients))
    }

    /// Probability mass in levels n >= `from`.
    pub fn population_from(&self, from: usize) -> f64 {
        self.coefficients
            .iter()
            .skip(from)
            .map(|c| c.norm_sqr())
            .sum()
    }
}

/// Names of the operators the representation provides directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    K0,
    K1,
    K2,
    KPlus,
    KMinus,
    Casimir,
    A,
    B,
    C,
}

impl Generator {
    pub const ALL: [Generator; 9] = [
        Generator::K0,
        Generator::K1,
        Generator::K2,
        Generator::KPlus,
        Generator::KMinus,
        Generator::Casimir,
        Generator::A,
        Generator::B,
        Generator::C,
    ];

    /// Largest |row - column| of a nonzero entry.
    pub fn bandwidth(self) -> usize {
        match self {
            Generator::K0 => 0,
            Generator::Casimir => 2,
            _ => 1,
        }
    }

    pub fn is_hermitian(self) -> bool {
        !matches!(self, Generator::KPlus | Generator::KMinus)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Generator::K0 => "K0",
            Generator::K1 => "K1",
            Generator::K2 => "K2",
            Generator::KPlus => "Kplus",
            Generator::KMinus => "Kminus",
            Generator::Casimir => "Casimir",
            Generator::A => "A",
            Generator::B => "B",
            Generator::C => "C",
        };
        f.write_str(s)
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "K0" => Generator::K0,
            "K1" => Generator::K1,
            "K2" => Generator::K2,
            "Kplus" | "K+" => Generator::KPlus,
            "Kminus" | "K-" => Generator::KMinus,
            "Casimir" | "K2total" => Generator::Casimir,
            "A" => Generator::A,
            "B" => Generator::B,
            "C" => Generator::C,
            other => return Err(Error::UnknownGenerator(other.to_string())),
        })
    }
}

/// A dense complex matrix on the truncated basis of one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    rep: RepParams,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wraps raw entries; the hermitian flag is set from a numerical check.
    pub fn from_entries(entries: DMatrix<Complex64>, rep: RepParams) -> Result<Self> {
        if entries.nrows() != rep.dim() || entries.ncols() != rep.dim() {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, representation dimension is {}",
                entries.nrows(),
                entries.ncols(),
                rep.dim()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Overflow);
        }
        let mut op = Self {
            entries,
            rep,
            hermitian: false,
        };
        op.hermitian = op.hermiticity_defect() <= 1e-12 * (1.0 + op.max_abs());
        Ok(op)
    }

    pub fn zeros(rep: RepParams) -> Self {
        Self {
            entries: DMatrix::zeros(rep.dim(), rep.dim()),
            rep,
            hermitian: true,
        }
    }

    pub fn identity(rep: RepParams) -> Self {
        Self {
            entries: DMatrix::identity(rep.dim(), rep.dim()),
            rep,
            hermitian: true,
        }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn rep(&self) -> &RepParams {
        &self.rep
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |X - X†| entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            rep: self.rep,
            hermitian: self.hermitian,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            entries: &self.entries * Complex64::new(s, 0.0),
            rep: self.rep,
            hermitian: self.hermitian,
        }
    }

    pub fn scaled_complex(&self, s: Complex64) -> Self {
        Self {
            entries: &self.entries * s,
            rep: self.rep,
            hermitian: self.hermitian && s.im == 0.0,
        }
    }

    /// self + s·other.
    pub fn add_scaled(&self, other: &OperatorMatrix, s: f64) -> Result<Self> {
        self.rep.ensure_same(&other.rep)?;
        Ok(Self {
            entries: &self.entries + &other.entries * Complex64::new(s, 0.0),
            rep: self.rep,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn checked_add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.add_scaled(other, 1.0)
    }

    pub fn checked_sub(&self, other: &OperatorMatrix) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    /// Matrix product self·other; the hermitian flag is cleared.
    pub fn checked_mul(&self, other: &OperatorMatrix) -> Result<Self> {
        self.rep.ensure_same(&other.rep)?;
        Ok(Self {
            entries: matmul(&self.entries, &other.entries),
            rep: self.rep,
            hermitian: false,
        })
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        self.rep.ensure_same(v.rep())?;
        Ok(FockVector {
            coefficients: &self.entries * v.coefficients(),
            rep: self.rep,
        })
    }

    /// ⟨bra|X|ket⟩.
    pub fn matrix_element(&self, bra: &FockVector, ket: &FockVector) -> Result<Complex64> {
        self.rep.ensure_same(bra.rep())?;
        self.rep.ensure_same(ket.rep())?;
        Ok(bra.coefficients().dotc(&(&self.entries * ket.coefficients())))
    }

    /// ⟨v|X|v⟩.
    pub fn expectation(&self, v: &FockVector) -> Result<Complex64> {
        self.matrix_element(v, v)
    }

    /// Largest entrywise difference restricted to rows and columns whose
    /// index is at most `cutoff - margin`, i.e. away from the truncation edge.
    pub fn max_abs_diff_interior(&self, other: &OperatorMatrix, margin: usize) -> Result<f64> {
        self.rep.ensure_same(&other.rep)?;
        let last = interior_limit(self.rep.cutoff(), margin);
        let mut worst = 0.0f64;
        if let Some(last) = last {
            for i in 0..=last {
                for j in 0..=last {
                    worst = worst.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
                }
            }
        }
        Ok(worst)
    }
}

/// Index of the last row that is at least `margin` away from the cutoff.
pub fn interior_limit(cutoff: usize, margin: usize) -> Option<usize> {
    cutoff.checked_sub(margin)
}

/// Dense product that skips zero entries of the right operand. Generators
/// are banded, so building monomials left to right costs O(dim² · band).
pub(crate) fn matmul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut out = DMatrix::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        for l in 0..b.nrows() {
            let blj = b[(l, j)];
            if blj == zero {
                continue;
            }
            out.column_mut(j).axpy(blj, &a.column(l), one);
        }
    }
    out
}

fn raise_coefficient(two_j: f64, n: usize, inv_n: f64) -> f64 {
    let nf = n as f64;
    ((nf + 1.0) * (two_j + nf)).sqrt() * inv_n
}

fn ladder(rep: &RepParams, raising: bool) -> DMatrix<Complex64> {
    let dim = rep.dim();
    let two_j = 2.0 * rep.j();
    let inv_n = rep.hbar();
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..rep.cutoff() {
        let c = Complex64::new(raise_coefficient(two_j, n, inv_n), 0.0);
        if raising {
            m[(n + 1, n)] = c;
        } else {
            m[(n, n + 1)] = c;
        }
    }
    m
}

fn diagonal_k0(rep: &RepParams) -> DMatrix<Complex64> {
    let inv_n = rep.hbar();
    DMatrix::from_fn(rep.dim(), rep.dim(), |i, j| {
        if i == j {
            Complex64::new(rep.k() + i as f64 * inv_n, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Builds one of the named operators in the N-rescaled normalization.
///
/// K1 = (K+ + K-)/2, K2 = (K+ - K-)/(2i), A = K0 + K2, B = 2 K1,
/// C = K0 - K2 and Casimir = K0² - K1² - K2² (as truncated matrix products).
pub fn build_generator(rep: &RepParams, which: Generator) -> OperatorMatrix {
    let half = Complex64::new(0.5, 0.0);
    let entries = match which {
        Generator::K0 => diagonal_k0(rep),
        Generator::KPlus => ladder(rep, true),
        Generator::KMinus => ladder(rep, false),
        Generator::K1 => (ladder(rep, true) + ladder(rep, false)) * half,
        Generator::K2 => (ladder(rep, true) - ladder(rep, false)) * (half / I),
        Generator::A => diagonal_k0(rep) + (ladder(rep, true) - ladder(rep, false)) * (half / I),
        Generator::B => ladder(rep, true) + ladder(rep, false),
        Generator::C => diagonal_k0(rep) - (ladder(rep, true) - ladder(rep, false)) * (half / I),
        Generator::Casimir => {
            let k0 = diagonal_k0(rep);
            let k1 = (ladder(rep, true) + ladder(rep, false)) * half;
            let k2 = (ladder(rep, true) - ladder(rep, false)) * (half / I);
            matmul(&k0, &k0) - matmul(&k1, &k1) - matmul(&k2, &k2)
        }
    };
    OperatorMatrix {
        entries,
        rep: *rep,
        hermitian: which.is_hermitian(),
    }
}

/// XY - YX.
pub fn commutator(x: &OperatorMatrix, y: &OperatorMatrix) -> Result<OperatorMatrix> {
    x.rep.ensure_same(&y.rep)?;
    Ok(OperatorMatrix {
        entries: matmul(&x.entries, &y.entries) - matmul(&y.entries, &x.entries),
        rep: x.rep,
        hermitian: false,
    })
}

/// How a commutative monomial A^a B^b C^c is turned into an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OperatorOrdering {
    /// A…A B…B C…C, left to right.
    #[default]
    Literal,
    /// Average over all distinct orderings of the word.
    Symmetrized,
}

fn next_permutation(word: &mut [u8]) -> bool {
    if word.len() < 2 {
        return false;
    }
    let mut i = word.len() - 1;
    while i > 0 && word[i - 1] >= word[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = word.len() - 1;
    while word[j] <= word[i - 1] {
        j -= 1;
    }
    word.swap(i - 1, j);
    word[i..].reverse();
    true
}

fn word_product(word: &[u8], letters: &[DMatrix<Complex64>; 3], dim: usize) -> DMatrix<Complex64> {
    match word.split_first() {
        None => DMatrix::identity(dim, dim),
        Some((first, rest)) => {
            let mut acc = letters[*first as usize].clone();
            for l in rest {
                acc = matmul(&acc, &letters[*l as usize]);
            }
            acc
        }
    }
}

/// h(A, B, C) as a matrix, without the overall factor N.
pub fn polynomial_operator(
    rep: &RepParams,
    h: &HamiltonianPolynomial,
    ordering: OperatorOrdering,
) -> Result<OperatorMatrix> {
    let dim = rep.dim();
    let letters = [
        build_generator(rep, Generator::A).entries,
        build_generator(rep, Generator::B).entries,
        build_generator(rep, Generator::C).entries,
    ];
    let mut total = DMatrix::<Complex64>::zeros(dim, dim);
    for (exps, coef) in h.terms() {
        let mut word: Vec<u8> = Vec::new();
        for (letter, &p) in exps.iter().enumerate() {
            word.extend(std::iter::repeat_n(letter as u8, p as usize));
        }
        let term = match ordering {
            OperatorOrdering::Literal => word_product(&word, &letters, dim),
            OperatorOrdering::Symmetrized => {
                let mut acc = word_product(&word, &letters, dim);
                let mut count = 1.0;
                while next_permutation(&mut word) {
                    acc += word_product(&word, &letters, dim);
                    count += 1.0;
                }
                acc / Complex64::new(count, 0.0)
            }
        };
        total += term * Complex64::new(*coef, 0.0);
    }
    OperatorMatrix::from_entries(total, *rep)
}

/// The quantum Hamiltonian H_N = N · h(A, B, C), literal operator order.
pub fn hamiltonian_matrix(rep: &RepParams, h: &HamiltonianPolynomial) -> Result<OperatorMatrix> {
    hamiltonian_matrix_with(rep, h, OperatorOrdering::Literal)
}

pub fn hamiltonian_matrix_with(
    rep: &RepParams,
    h: &HamiltonianPolynomial,
    ordering: OperatorOrdering,
) -> Result<OperatorMatrix> {
    let op = polynomial_operator(rep, h, ordering)?;
    let hermitian = op.hermitian;
    let scaled = op.scaled(rep.n_particles() as f64);
    if scaled.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(OperatorMatrix { hermitian, ..scaled })
}
