use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GreenError, Result};

/// Series length used by the torus Green's function.
pub const DEFAULT_THETA_TERMS: usize = 32;

fn check(tau: Complex64, n_terms: usize) -> Result<()> {
    if !(tau.im > 0.0) {
        return Err(GreenError::BadTau(tau.re, tau.im));
    }
    if n_terms < 8 {
        return Err(GreenError::TooFewTerms(n_terms));
    }
    Ok(())
}

/// `q^{(n+1/2)²}` with `q = e^{iπτ}`.
fn nome_power(tau: Complex64, n: usize) -> Complex64 {
    let e = (n as f64 + 0.5).powi(2);
    (Complex64::i() * PI * tau * e).exp()
}

/// First Jacobi theta function
/// `ϑ₁(z|τ) = 2 Σ_{n≥0} (-1)ⁿ q^{(n+1/2)²} sin((2n+1)πz)`, truncated after
/// `n_terms` terms.
pub fn theta1(z: Complex64, tau: Complex64, n_terms: usize) -> Result<Complex64> {
    check(tau, n_terms)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..n_terms {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let odd = (2 * n + 1) as f64;
        acc += sign * nome_power(tau, n) * (odd * PI * z).sin();
    }
    Ok(2.0 * acc)
}

/// `∂ϑ₁/∂z`, same truncation as [`theta1`].
pub fn theta1_prime(z: Complex64, tau: Complex64, n_terms: usize) -> Result<Complex64> {
    check(tau, n_terms)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..n_terms {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let odd = (2 * n + 1) as f64;
        acc += sign * nome_power(tau, n) * odd * PI * (odd * PI * z).cos();
    }
    Ok(2.0 * acc)
}
