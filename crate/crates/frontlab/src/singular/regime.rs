//! Advection-strength regime classification.
//!
//! With r := δ²ν, the three slow/fast frameworks are
//! weak (ν ≤ 1/δ, separation parameter δ), intermediate (1/δ < ν < r0/δ²,
//! separation parameter r) and strong (ν ≥ r0/δ², separation parameter
//! ε = 1/ν). Ties go to the lower regime.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Weak,
    Intermediate,
    Strong,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RegimeParams {
    pub delta: f64,
    pub nu: f64,
    /// r = δ²ν, the advection-diffusion coefficient ratio.
    pub r: f64,
    /// ε = 1/ν (infinite at ν = 0).
    pub epsilon: f64,
    /// r̄ = r/δ = δν.
    pub r_bar: f64,
    /// δ̄ = δ/r = 1/(δν) (infinite at r = 0).
    pub delta_bar: f64,
    pub r0: f64,
    pub delta0: f64,
    pub r_bar0: f64,
    pub delta_bar0: f64,
    pub regime: Regime,
}

/// Default thresholds: r0 = 0.05, δ0 = 0.02, r̄0 = δ̄0 = 2. The asymptotic
/// windows overlap for these values over the δ-range used in practice.
pub const DEFAULT_R0: f64 = 0.05;
pub const DEFAULT_DELTA0: f64 = 0.02;
pub const DEFAULT_RBAR0: f64 = 2.0;

pub fn classify_regime(delta: f64, nu: f64, r0: f64) -> Result<RegimeParams> {
    if !(delta > 0.0) || !(nu >= 0.0) || !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::invalid(format!("classify_regime: delta={delta}, nu={nu}, r0={r0}")));
    }
    let r = delta * delta * nu;
    let regime = if nu <= 1.0 / delta {
        Regime::Weak
    } else if nu < r0 / (delta * delta) {
        Regime::Intermediate
    } else {
        Regime::Strong
    };
    Ok(RegimeParams {
        delta,
        nu,
        r,
        epsilon: if nu > 0.0 { 1.0 / nu } else { f64::INFINITY },
        r_bar: r / delta,
        delta_bar: if r > 0.0 { delta / r } else { f64::INFINITY },
        r0,
        delta0: DEFAULT_DELTA0,
        r_bar0: DEFAULT_RBAR0,
        delta_bar0: DEFAULT_RBAR0,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_advection_is_weak() {
        let p = classify_regime(0.001, 0.0, 0.05).unwrap();
        assert_eq!(p.regime, Regime::Weak);
        assert_eq!(p.r_bar, 0.0);
        assert!(p.epsilon.is_infinite());
        assert!(p.delta_bar.is_infinite());
    }

    #[test]
    fn intermediate_window() {
        let p = classify_regime(0.001, 1e4, 0.05).unwrap();
        assert_eq!(p.regime, Regime::Intermediate);
        assert!((p.r - 0.01).abs() < 1e-15);
        assert!((p.r_bar - 10.0).abs() < 1e-12);
        assert!((p.delta_bar - 0.1).abs() < 1e-12);
    }

    #[test]
    fn strong_at_large_nu() {
        let p = classify_regime(0.001, 1e8, 0.05).unwrap();
        assert_eq!(p.regime, Regime::Strong);
        assert!((p.r - 100.0).abs() < 1e-9);
    }

    #[test]
    fn boundaries_tie_to_lower_regime() {
        let p = classify_regime(0.001, 1000.0, 0.05).unwrap();
        assert_eq!(p.regime, Regime::Weak, "nu = 1/delta stays weak");
        let p = classify_regime(0.001, 5e4, 0.05).unwrap();
        assert_eq!(p.regime, Regime::Strong, "nu = r0/delta^2 is strong");
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(classify_regime(-1.0, 0.0, 0.05).is_err());
        assert!(classify_regime(0.001, -1.0, 0.05).is_err());
        assert!(classify_regime(0.001, 1.0, 1.5).is_err());
    }
}
