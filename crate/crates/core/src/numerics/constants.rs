use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::numerics::special::{abs_gamma_neg, gamma_positive};

/// Normalising constants of the first-passage kernels for a given (α, d).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StableConstants {
    /// Point of closest reach and overshoot: π^{-(d/2+1)} Γ(d/2) sin(απ/2).
    pub c: f64,
    /// Triple law: 2^α Γ(d/2)² Γ((d+α)/2) / (π^{3d/2} Γ(α/2)² |Γ(-α/2)|).
    pub a: f64,
    /// Undershoot–overshoot law: Γ((d+α)/2) Γ(d/2) / (π^d Γ(α/2)² |Γ(-α/2)|).
    pub b: f64,
    /// Half-space Green function: Γ(d/2) / (2^α π^{d/2} Γ(α/2)²).
    pub e: f64,
    /// Lévy jump density: 2^α Γ((d+α)/2) / (π^{d/2} |Γ(-α/2)|).
    pub k: f64,
}

pub fn stable_constants(alpha: f64, d: usize) -> Result<StableConstants> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (0,2), got {alpha}"));
    }
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    let df = d as f64;
    let g_half_d = gamma_positive(df / 2.0);
    let g_half_a = gamma_positive(alpha / 2.0);
    let g_mid = gamma_positive((df + alpha) / 2.0);
    let g_neg = abs_gamma_neg(alpha / 2.0)?;
    let two_a = 2f64.powf(alpha);
    let pi_half_d = PI.powf(df / 2.0);
    Ok(StableConstants {
        c: g_half_d * (alpha * PI / 2.0).sin() / PI.powf(df / 2.0 + 1.0),
        a: two_a * g_half_d * g_half_d * g_mid / (PI.powf(1.5 * df) * g_half_a * g_half_a * g_neg),
        b: g_mid * g_half_d / (PI.powf(df) * g_half_a * g_half_a * g_neg),
        e: g_half_d / (two_a * pi_half_d * g_half_a * g_half_a),
        k: two_a * g_mid / (pi_half_d * g_neg),
    })
}
