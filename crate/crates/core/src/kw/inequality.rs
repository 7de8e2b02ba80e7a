use serde::{Deserialize, Serialize};

use super::{KwError, Result};

/// Optimal constant and minimizer for `ξ^{-a} x + ξ^b y >= K x^{b/(a+b)} y^{a/(a+b)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungBound {
    pub k: f64,
    pub xi_star: f64,
    /// `K x^{b/(a+b)} y^{a/(a+b)}`, the minimum over `ξ > 0`.
    pub minimum: f64,
}

pub fn young_bound(a: f64, b: f64, x: f64, y: f64) -> Result<YoungBound> {
    if [a, b, x, y].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(KwError::NonPositiveInput);
    }
    let s = a + b;
    let k = (a / b).powf(b / s) + (b / a).powf(a / s);
    Ok(YoungBound {
        k,
        xi_star: (a * x / (b * y)).powf(1.0 / s),
        minimum: k * x.powf(b / s) * y.powf(a / s),
    })
}
