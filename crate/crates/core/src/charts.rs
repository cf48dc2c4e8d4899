//! Coordinate charts on the pseudosphere, its metric and measure, and an
//! exact Poisson algebra of Laurent polynomials in the canonical pair (v, w).
//!
//! Charts and conversion rules (noncompact branch):
//!
//! * `Xi`:        iξ = (ρ/2) e^{-iφ}
//! * `Polar`:     (ρ >= 0, φ in [0, 2π))
//! * `Zeta`:      ζ = sinh(ρ/2) e^{-iφ}
//! * `Tau`:       τ = tanh(ρ/2) e^{-iφ}, |τ| < 1
//! * `HalfPlane`: z = ϱ - iv = (i + τ)/(i - τ), ϱ > 0
//! * `Canonical`: (v, w) with w = k/ϱ > 0
//!
//! Conversions route through `Tau`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rep::Generator;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    Xi,
    Zeta,
    Tau,
    Polar,
    HalfPlane,
    Canonical,
}

impl Chart {
    pub const ALL: [Chart; 6] = [
        Chart::Xi,
        Chart::Zeta,
        Chart::Tau,
        Chart::Polar,
        Chart::HalfPlane,
        Chart::Canonical,
    ];

    pub fn needs_k(self) -> bool {
        self == Chart::Canonical
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Chart::Xi => "xi",
            Chart::Zeta => "zeta",
            Chart::Tau => "tau",
            Chart::Polar => "polar",
            Chart::HalfPlane => "halfplane",
            Chart::Canonical => "canonical",
        };
        f.write_str(s)
    }
}

impl FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "xi" => Chart::Xi,
            "zeta" => Chart::Zeta,
            "tau" => Chart::Tau,
            "polar" => Chart::Polar,
            "halfplane" | "half-plane" => Chart::HalfPlane,
            "canonical" | "vw" => Chart::Canonical,
            other => return Err(Error::Parse(format!("unknown chart `{other}`"))),
        })
    }
}

/// A point of the phase space expressed in one chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    chart: Chart,
    coords: [f64; 2],
}

fn check_finite(coords: [f64; 2]) -> Result<()> {
    if coords.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("coordinates must be finite".into()))
    }
}

impl ChartPoint {
    /// Validates the chart's domain. Polar angles are wrapped into [0, 2π).
    pub fn new(chart: Chart, coords: [f64; 2]) -> Result<Self> {
        check_finite(coords)?;
        let mut coords = coords;
        match chart {
            Chart::Tau => {
                if coords[0].hypot(coords[1]) >= 1.0 {
                    return Err(Error::Domain("tau modulus must be < 1".into()));
                }
            }
            Chart::HalfPlane => {
                if coords[0] <= 0.0 {
                    return Err(Error::Domain("half-plane coordinate rho must be > 0".into()));
                }
            }
            Chart::Canonical => {
                if coords[1] <= 0.0 {
                    return Err(Error::Domain("canonical coordinate w must be > 0".into()));
                }
            }
            Chart::Polar => {
                if coords[0] < 0.0 {
                    return Err(Error::Domain("polar radius must be >= 0".into()));
                }
                coords[1] = wrap_angle(coords[1]);
            }
            Chart::Xi | Chart::Zeta => {}
        }
        Ok(Self { chart, coords })
    }

    pub fn tau(tau: Complex64) -> Result<Self> {
        Self::new(Chart::Tau, [tau.re, tau.im])
    }

    pub fn canonical(v: f64, w: f64) -> Result<Self> {
        Self::new(Chart::Canonical, [v, w])
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn coords(&self) -> [f64; 2] {
        self.coords
    }

    fn as_complex(&self) -> Complex64 {
        Complex64::new(self.coords[0], self.coords[1])
    }
}

fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn polar_angle(z: Complex64) -> f64 {
    if z == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        wrap_angle(-z.arg())
    }
}

fn require_k(k: Option<f64>) -> Result<f64> {
    match k {
        Some(k) if k.is_finite() && k > 0.0 => Ok(k),
        Some(k) => Err(Error::Domain(format!("k must be > 0, got {k}"))),
        None => Err(Error::InvalidArgument(
            "k is required for the canonical chart".into(),
        )),
    }
}

fn to_tau(p: &ChartPoint, k: Option<f64>) -> Result<Complex64> {
    Ok(match p.chart {
        Chart::Tau => p.as_complex(),
        Chart::Xi => {
            let xi = p.as_complex();
            let rho = 2.0 * xi.norm();
            let phi = polar_angle(I * xi);
            Complex64::from_polar((rho / 2.0).tanh(), -phi)
        }
        Chart::Polar => Complex64::from_polar((p.coords[0] / 2.0).tanh(), -p.coords[1]),
        Chart::Zeta => {
            let zeta = p.as_complex();
            zeta / (1.0 + zeta.norm_sqr()).sqrt()
        }
        Chart::HalfPlane => {
            let z = Complex64::new(p.coords[0], -p.coords[1]);
            I * (z - 1.0) / (z + 1.0)
        }
        Chart::Canonical => {
            let k = require_k(k)?;
            let rho = k / p.coords[1];
            let z = Complex64::new(rho, -p.coords[0]);
            I * (z - 1.0) / (z + 1.0)
        }
    })
}

fn from_tau(tau: Complex64, target: Chart, k: Option<f64>) -> Result<ChartPoint> {
    let coords = match target {
        Chart::Tau => [tau.re, tau.im],
        Chart::Polar => [2.0 * tau.norm().atanh(), polar_angle(tau)],
        Chart::Zeta => {
            let zeta = tau / (1.0 - tau.norm_sqr()).sqrt();
            [zeta.re, zeta.im]
        }
        Chart::Xi => {
            // iξ = (ρ/2) e^{-iφ}  =>  ξ = -i (ρ/2) e^{-iφ}
            let half_rho = tau.norm().atanh();
            let xi = -I * Complex64::from_polar(half_rho, -polar_angle(tau));
            [xi.re, xi.im]
        }
        Chart::HalfPlane | Chart::Canonical => {
            let z = (I + tau) / (I - tau);
            let (rho, v) = (z.re, -z.im);
            if target == Chart::HalfPlane {
                [rho, v]
            } else {
                [v, require_k(k)? / rho]
            }
        }
    };
    ChartPoint::new(target, coords)
}

/// Expresses `p` in the `target` chart. `k` is needed only when the
/// canonical chart is the source or the target.
pub fn convert(p: &ChartPoint, target: Chart, k: Option<f64>) -> Result<ChartPoint> {
    if p.chart == target {
        if target.needs_k() {
            require_k(k)?;
        }
        return Ok(*p);
    }
    let tau = to_tau(p, k)?;
    if tau.norm() >= 1.0 {
        return Err(Error::Domain("tau modulus must be < 1".into()));
    }
    from_tau(tau, target, k)
}

/// Compact-branch coordinate formulas (sphere geometry). They are provided for
/// completeness only; no coherent-state semantics attach to them here.
pub mod compact {
    use num_complex::Complex64;

    /// ζ = ξ sin|ξ| / |ξ|.
    pub fn zeta_from_xi(xi: Complex64) -> Complex64 {
        let r = xi.norm();
        if r == 0.0 {
            xi
        } else {
            xi * (r.sin() / r)
        }
    }

    /// τ = ζ (1 - |ζ|²)^{-1/2}; requires |ζ| < 1.
    pub fn tau_from_zeta(zeta: Complex64) -> Option<Complex64> {
        let d = 1.0 - zeta.norm_sqr();
        (d > 0.0).then(|| zeta / d.sqrt())
    }
}

/// Coefficient g of the natural metric ds² = g dτ dτ* (Tau chart) or
/// ds² = g (dϱ² + dv²) (HalfPlane chart). `k` is the rescaled index.
pub fn metric_coefficient(p: &ChartPoint, k: f64) -> Result<f64> {
    let k = require_k(Some(k))?;
    match p.chart {
        Chart::Tau => {
            let d = 1.0 - p.as_complex().norm_sqr();
            Ok(2.0 * k / (d * d))
        }
        Chart::HalfPlane => {
            let rho = p.coords[0];
            Ok(k / 2.0 / (rho * rho))
        }
        other => Err(Error::InvalidArgument(format!(
            "metric coefficient is defined for the tau and halfplane charts, not {other}"
        ))),
    }
}

/// F(τ, τ*) = -2k ln(1 - |τ|²), the log-norm of the unnormalized state.
pub fn kahler_potential(tau: Complex64, k: f64) -> f64 {
    -2.0 * k * (-tau.norm_sqr()).ln_1p()
}

/// ∂²F/∂τ∂τ* = ΔF/4, evaluated with a five-point finite-difference
/// Laplacian of step `h`.
pub fn metric_from_potential(tau: Complex64, k: f64, h: f64) -> f64 {
    let f = |z: Complex64| kahler_potential(z, k);
    let lap = (f(tau + h) + f(tau - h) + f(tau + I * h) + f(tau - I * h) - 4.0 * f(tau)) / (h * h);
    lap / 4.0
}

/// Density of the invariant measure dμ with respect to d(Re τ) d(Im τ),
/// normalized so that dμ resolves the identity: (2J - 1) / (π (1 - |τ|²)²).
pub fn measure_density(tau: Complex64, j: f64) -> Result<f64> {
    if !(j > 0.5) {
        return Err(Error::NotNormalizable(j));
    }
    let x = tau.norm_sqr();
    if x >= 1.0 {
        return Err(Error::Domain("tau modulus must be < 1".into()));
    }
    Ok((2.0 * j - 1.0) / PI / ((1.0 - x) * (1.0 - x)))
}

/// Exponents (a on v, b on w) of the monomial v^a w^b.
pub type LaurentExponents = (u32, i32);

/// A Laurent polynomial in (v, w): polynomial in v, Laurent in w.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseObservable {
    terms: BTreeMap<LaurentExponents, f64>,
}

impl PhaseObservable {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(v_pow: u32, w_pow: i32, coef: f64) -> Self {
        let mut out = Self::zero();
        out.add_term((v_pow, w_pow), coef);
        out
    }

    pub fn v() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    pub fn w() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn from_terms<T: IntoIterator<Item = (LaurentExponents, f64)>>(terms: T) -> Self {
        let mut out = Self::zero();
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn add_term(&mut self, exps: LaurentExponents, coef: f64) {
        let e = self.terms.entry(exps).or_insert(0.0);
        *e += coef;
        if *e == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LaurentExponents, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, v_pow: u32, w_pow: i32) -> f64 {
        self.terms.get(&(v_pow, w_pow)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c * s)))
    }

    pub fn pow(&self, p: u32) -> Self {
        let mut acc = Self::constant(1.0);
        for _ in 0..p {
            acc = &acc * self;
        }
        acc
    }

    pub fn d_dv(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((a, _), _)| *a > 0)
                .map(|((a, b), c)| ((a - 1, *b), c * *a as f64)),
        )
    }

    pub fn d_dw(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((_, b), _)| *b != 0)
                .map(|((a, b), c)| ((*a, b - 1), c * *b as f64)),
        )
    }

    /// Numerical value at (v, w); w must be positive.
    pub fn evaluate(&self, v: f64, w: f64) -> Result<f64> {
        if !(w > 0.0) {
            return Err(Error::Domain(format!("w must be > 0, got {w}")));
        }
        Ok(self.evaluate_unchecked(v, w))
    }

    pub(crate) fn evaluate_unchecked(&self, v: f64, w: f64) -> f64 {
        self.terms
            .iter()
            .map(|((a, b), c)| c * v.powi(*a as i32) * w.powi(*b))
            .sum()
    }

    /// Rewrites the observable in the radial pair (p, r) with w = r²/2 and
    /// v = p/r. The result reuses this type with p in the first slot and r in
    /// the second: v^a w^b = 2^{-b} p^a r^{2b-a}.
    pub fn to_radial(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|((a, b), c)| ((*a, 2 * b - *a as i32), c * 2f64.powi(-b))),
        )
    }
}

impl Add for &PhaseObservable {
    type Output = PhaseObservable;
    fn add(self, rhs: &PhaseObservable) -> PhaseObservable {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Sub for &PhaseObservable {
    type Output = PhaseObservable;
    fn sub(self, rhs: &PhaseObservable) -> PhaseObservable {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -*c);
        }
        out
    }
}

impl Neg for &PhaseObservable {
    type Output = PhaseObservable;
    fn neg(self) -> PhaseObservable {
        self.scaled(-1.0)
    }
}

impl Mul for &PhaseObservable {
    type Output = PhaseObservable;
    fn mul(self, rhs: &PhaseObservable) -> PhaseObservable {
        let mut out = PhaseObservable::zero();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for PhaseObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, b), c)| format!("{c}*v^{a}*w^{b}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// {f, g} = ∂f/∂v ∂g/∂w - ∂g/∂v ∂f/∂w, computed exactly.
pub fn poisson_bracket(f: &PhaseObservable, g: &PhaseObservable) -> PhaseObservable {
    &(&f.d_dv() * &g.d_dw()) - &(&g.d_dv() * &f.d_dw())
}

/// Classical symbol of a named generator in the canonical chart:
/// A = w, B = 2vw, C = v²w + k²/w, K0 = (A + C)/2, K1 = B/2, K2 = (A - C)/2,
/// K± = K1 ± i K2 has no real symbol, and the Casimir is the constant k².
pub fn basic_symbol(which: Generator, k: f64) -> Result<PhaseObservable> {
    require_k(Some(k))?;
    let a = PhaseObservable::w();
    let b = PhaseObservable::monomial(1, 1, 2.0);
    let c = PhaseObservable::from_terms([((2, 1), 1.0), ((0, -1), k * k)]);
    Ok(match which {
        Generator::A => a,
        Generator::B => b,
        Generator::C => c,
        Generator::K0 => (&a + &c).scaled(0.5),
        Generator::K1 => b.scaled(0.5),
        Generator::K2 => (&a - &c).scaled(0.5),
        Generator::Casimir => PhaseObservable::constant(k * k),
        Generator::KPlus | Generator::KMinus => {
            return Err(Error::InvalidArgument(format!(
                "{which} is not hermitian and has no real classical symbol"
            )))
        }
    })
}
