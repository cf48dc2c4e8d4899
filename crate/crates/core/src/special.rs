//! Log-domain Gamma-function ratios.
//!
//! Γ(2J + n) overflows a double around 2J + n ≈ 171, long before the
//! normalized coherent-state coefficients do, so every ratio is assembled
//! from logarithms.

use statrs::function::gamma::ln_gamma;

/// ln Γ(x) for x > 0.
pub fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma(x)
}

/// ln [Γ(2J + n) / (n! Γ(2J))], the log of the negative-binomial weight that
/// appears squared in the coherent-state expansion.
pub fn ln_weight(two_j: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    ln_gamma_pos(two_j + nf) - ln_gamma_pos(nf + 1.0) - ln_gamma_pos(two_j)
}

/// `ln(1 - x)` for 0 <= x < 1 without cancellation near x = 0.
pub fn ln_one_minus(x: f64) -> f64 {
    (-x).ln_1p()
}
