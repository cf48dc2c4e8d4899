//! Pseudo-spin coherent states |τ⟩ = (1 - |τ|²)^J e^{τK+} |0⟩.
//!
//! In the |n⟩ basis the state has coefficients
//!
//! ```text
//! c_n = (1 - |τ|²)^J · sqrt(Γ(2J + n) / (n! Γ(2J))) · τ^n
//! ```
//!
//! so |c_n|² is a negative-binomial distribution in n with success
//! probability 1 - |τ|². The truncation point is certified with a geometric
//! bound on the discarded mass.

use num_complex::Complex64;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::rep::{FockVector, Generator, OperatorMatrix, RepParams};
use crate::special::{ln_one_minus, ln_weight};

/// Discarded probability mass allowed for a coherent vector.
pub const TAIL_TOLERANCE: f64 = 1e-12;

const MAX_AUTO_CUTOFF: usize = 1 << 20;

/// A coherent state request: representation plus disk coordinate τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSpec {
    rep: RepParams,
    tau: Complex64,
}

impl CoherentSpec {
    pub fn new(rep: RepParams, tau: Complex64) -> Result<Self> {
        check_disk(tau)?;
        Ok(Self { rep, tau })
    }

    /// Chooses the smallest cutoff whose tail bound is below `tail_tol`.
    pub fn with_auto_cutoff(n_particles: u32, k: f64, tau: Complex64, tail_tol: f64) -> Result<Self> {
        check_disk(tau)?;
        let probe = RepParams::new(n_particles, k, 0)?;
        let cutoff = cutoff_for(tau.norm_sqr(), 2.0 * probe.j(), tail_tol)?;
        Self::new(probe.with_cutoff(cutoff), tau)
    }

    pub fn rep(&self) -> &RepParams {
        &self.rep
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// Upper bound on the probability mass beyond the cutoff.
    pub fn tail_bound(&self) -> f64 {
        tail_bound(self.tau.norm_sqr(), 2.0 * self.rep.j(), self.rep.cutoff())
    }
}

fn check_disk(tau: Complex64) -> Result<()> {
    if !(tau.re.is_finite() && tau.im.is_finite()) || tau.norm() >= 1.0 {
        return Err(Error::Domain("tau modulus must be < 1".into()));
    }
    Ok(())
}

/// Bound on Σ_{n > cutoff} |c_n|² for |τ|² = x and 2J = `two_j`.
///
/// Consecutive ratios |c_{n+1}|²/|c_n|² = x(2J + n)/(n + 1) decrease towards
/// x when 2J >= 1 and increase towards x otherwise, so the tail is dominated
/// by a geometric series started at the first discarded level.
pub fn tail_bound(x: f64, two_j: f64, cutoff: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let m = cutoff + 1;
    let mf = m as f64;
    let ratio = if two_j >= 1.0 {
        x * (two_j + mf) / (mf + 1.0)
    } else {
        x
    };
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let ln_first = two_j * ln_one_minus(x) + ln_weight(two_j, m) + mf * x.ln();
    ln_first.exp() / (1.0 - ratio)
}

/// Smallest cutoff with `tail_bound <= tol`.
pub fn cutoff_for(x: f64, two_j: f64, tol: f64) -> Result<usize> {
    if x == 0.0 {
        return Ok(0);
    }
    if !(x < 1.0) {
        return Err(Error::Domain("tau modulus must be < 1".into()));
    }
    // skip the bulk of the distribution before scanning
    let mean = two_j * x / (1.0 - x);
    let mut m = mean.floor() as usize;
    while m < MAX_AUTO_CUTOFF {
        if tail_bound(x, two_j, m) <= tol {
            // walk back in case the start overshot
            while m > 0 && tail_bound(x, two_j, m - 1) <= tol {
                m -= 1;
            }
            return Ok(m);
        }
        m += 1 + m / 64;
    }
    Err(Error::TailBound {
        bound: tail_bound(x, two_j, MAX_AUTO_CUTOFF),
        tol,
        cutoff: MAX_AUTO_CUTOFF,
    })
}

/// The truncated coherent vector. Its norm falls short of 1 by at most the
/// certified tail bound; it is not renormalized.
pub fn coherent_vector(spec: &CoherentSpec) -> Result<FockVector> {
    let bound = spec.tail_bound();
    if bound > TAIL_TOLERANCE {
        return Err(Error::TailBound {
            bound,
            tol: TAIL_TOLERANCE,
            cutoff: spec.rep.cutoff(),
        });
    }
    let rep = spec.rep;
    let tau = spec.tau;
    let x = tau.norm_sqr();
    if x == 0.0 {
        return FockVector::basis(rep, 0);
    }
    let two_j = 2.0 * rep.j();
    let j = rep.j();
    let ln_r = tau.norm().ln();
    let arg = tau.arg();
    // log-magnitudes by recurrence
    let mut ln_mag = j * ln_one_minus(x);
    let mut coeffs = DVector::zeros(rep.dim());
    for n in 0..rep.dim() {
        if n > 0 {
            let nf = n as f64;
            ln_mag += 0.5 * ((two_j + nf - 1.0) / nf).ln() + ln_r;
        }
        coeffs[n] = Complex64::from_polar(ln_mag.exp(), n as f64 * arg);
    }
    FockVector::new(coeffs, rep)
}

/// ⟨τ|τ'⟩ = (1-|τ'|²)^J (1-|τ|²)^J / (1 - τ' τ*)^{2J}, evaluated in the
/// log domain with the principal branch (Re(1 - τ'τ*) > 0 on the disk).
pub fn overlap_closed(tau: Complex64, tau2: Complex64, j: f64) -> Result<Complex64> {
    check_disk(tau)?;
    check_disk(tau2)?;
    let log = j * ln_one_minus(tau2.norm_sqr()) + j * ln_one_minus(tau.norm_sqr());
    let cross = (Complex64::new(1.0, 0.0) - tau2 * tau.conj()).ln();
    Ok((Complex64::new(log, 0.0) - 2.0 * j * cross).exp())
}

/// Δ(τ, τ') = -k [ln(1-|τ'|²) + ln(1-|τ|²) - 2 ln(1 - τ'τ*)], so that
/// ⟨τ|τ'⟩ = exp(-N Δ) at J = N k.
pub fn delta_exponent(tau: Complex64, tau2: Complex64, k: f64) -> Result<Complex64> {
    check_disk(tau)?;
    check_disk(tau2)?;
    let cross = (Complex64::new(1.0, 0.0) - tau2 * tau.conj()).ln();
    Ok(-k * (Complex64::new(ln_one_minus(tau2.norm_sqr()) + ln_one_minus(tau.norm_sqr()), 0.0) - 2.0 * cross))
}

/// Coherent-state symbol ⟨τ|X|τ⟩ in the truncated basis.
pub fn symbol(x: &OperatorMatrix, spec: &CoherentSpec) -> Result<Complex64> {
    x.rep().ensure_same(spec.rep())?;
    let v = coherent_vector(spec)?;
    x.expectation(&v)
}

/// Closed-form ratio ⟨τ|X|τ'⟩ / ⟨τ|τ'⟩ for the linear generators, with
/// d = 1 - τ'τ*:
///
/// ```text
/// K0 → k (1 + τ'τ*)/d      K+ → 2k τ*/d      K- → 2k τ'/d
/// K1 → k (τ* + τ')/d       K2 → i k (τ' - τ*)/d
/// ```
///
/// and A = K0 + K2, B = 2 K1, C = K0 - K2.
pub fn matrix_element_closed(
    which: Generator,
    tau: Complex64,
    tau2: Complex64,
    k: f64,
) -> Result<Complex64> {
    check_disk(tau)?;
    check_disk(tau2)?;
    let i = Complex64::new(0.0, 1.0);
    let prod = tau2 * tau.conj();
    let d = Complex64::new(1.0, 0.0) - prod;
    let k0 = k * (1.0 + prod) / d;
    let k1 = k * (tau.conj() + tau2) / d;
    let k2 = i * k * (tau2 - tau.conj()) / d;
    Ok(match which {
        Generator::K0 => k0,
        Generator::K1 => k1,
        Generator::K2 => k2,
        Generator::KPlus => 2.0 * k * tau.conj() / d,
        Generator::KMinus => 2.0 * k * tau2 / d,
        Generator::A => k0 + k2,
        Generator::B => 2.0 * k1,
        Generator::C => k0 - k2,
        Generator::Casimir => {
            return Err(Error::InvalidArgument(
                "the Casimir ratio depends on N; use casimir_value".into(),
            ))
        }
    })
}

/// Diagonal symbol of a linear generator, e.g. K0(τ) = k(1+|τ|²)/(1-|τ|²).
pub fn diagonal_symbol_closed(which: Generator, tau: Complex64, k: f64) -> Result<f64> {
    Ok(matrix_element_closed(which, tau, tau, k)?.re)
}

/// The Casimir eigenvalue k(k - 1/N) of the finite-N representation.
pub fn casimir_value(rep: &RepParams) -> f64 {
    rep.k() * (rep.k() - rep.hbar())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureParams {
    pub order: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self { order: 64 }
    }
}

/// Maximum deviation of ∫dμ ⟨n|τ⟩⟨τ|n'⟩ from δ_{nn'} for n, n' <= `max_n`.
///
/// The angular integral is done analytically (off-diagonal entries vanish
/// identically), leaving for each n the radial integral in x = |τ|²
///
/// ```text
/// I_n = (2J - 1) Γ(2J+n)/(n! Γ(2J)) ∫_0^1 (1-x)^{2J-2} x^n dx
/// ```
///
/// which is evaluated with Gauss–Legendre nodes on [0, 1].
pub fn identity_resolution_check(
    rep: &RepParams,
    max_n: usize,
    quadrature: QuadratureParams,
) -> Result<f64> {
    rep.require_normalizable()?;
    if max_n > rep.cutoff() {
        return Err(Error::InvalidArgument(format!(
            "max_n {max_n} exceeds cutoff {}",
            rep.cutoff()
        )));
    }
    if quadrature.order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
    }
    let two_j = 2.0 * rep.j();
    let rule = GaussLegendre::new(quadrature.order);
    let ln_pref = (two_j - 1.0).ln();
    let mut worst = 0.0f64;
    for n in 0..=max_n {
        let ln_w = ln_weight(two_j, n);
        let integral = rule.integrate(0.0, 1.0, |x| {
            let ln_val = ln_pref + ln_w + (two_j - 2.0) * ln_one_minus(x) + n as f64 * x.ln();
            ln_val.exp()
        });
        worst = worst.max((integral - 1.0).abs());
    }
    Ok(worst)
}
