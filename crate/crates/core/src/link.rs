//! Receiver noise budget, SINR and achievable rate.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelGain;
use crate::error::{Error, Result};

/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseParams {
    pub rin_db_per_hz: f64,
    /// A/√Hz
    pub noise_current_density: f64,
    pub tia_noise_figure_db: f64,
    /// Hz
    pub bandwidth_b: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            rin_db_per_hz: -155.0,
            noise_current_density: 4.47e-12,
            tia_noise_figure_db: 5.0,
            bandwidth_b: 1.5e9,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.bandwidth_b > 0.0) || !self.bandwidth_b.is_finite() {
            return Err(Error::validation(
                format!("{path}.bandwidth_b"),
                "must be > 0",
            ));
        }
        if !(self.noise_current_density >= 0.0) || !self.noise_current_density.is_finite() {
            return Err(Error::validation(
                format!("{path}.noise_current_density"),
                "must be >= 0",
            ));
        }
        let rin = self.rin_linear();
        if !(rin > 0.0 && rin < 1.0) {
            return Err(Error::validation(
                format!("{path}.rin_db_per_hz"),
                "must be negative (linear RIN in (0, 1))",
            ));
        }
        if !self.tia_noise_figure_db.is_finite() {
            return Err(Error::validation(
                format!("{path}.tia_noise_figure_db"),
                "must be finite",
            ));
        }
        Ok(())
    }

    pub fn rin_linear(&self) -> f64 {
        10f64.powf(self.rin_db_per_hz / 10.0)
    }

    /// Received-power-independent floor: preamplifier thermal noise scaled by
    /// the TIA noise figure.
    pub fn thermal_variance(&self) -> f64 {
        self.noise_current_density.powi(2)
            * self.bandwidth_b
            * 10f64.powf(self.tia_noise_figure_db / 10.0)
    }
}

/// Noise variance split by source, A².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBreakdown {
    pub shot: f64,
    pub thermal: f64,
    pub rin: f64,
}

impl NoiseBreakdown {
    pub fn total(&self) -> f64 {
        self.shot + self.thermal + self.rin
    }
}

pub fn noise_breakdown(
    p: &NoiseParams,
    received_optical_power: f64,
    responsivity: f64,
) -> NoiseBreakdown {
    let photocurrent = responsivity * received_optical_power;
    NoiseBreakdown {
        shot: 2.0 * ELECTRON_CHARGE * photocurrent * p.bandwidth_b,
        thermal: p.thermal_variance(),
        rin: p.rin_linear() * photocurrent * photocurrent * p.bandwidth_b,
    }
}

pub fn noise_variance(p: &NoiseParams, received_optical_power: f64, responsivity: f64) -> f64 {
    noise_breakdown(p, received_optical_power, responsivity).total()
}

/// γ = (R·q·P_tot)² / σ².
pub fn sinr(q: &ChannelGain, transmit_power: f64, responsivity: f64, sigma2: f64) -> Result<f64> {
    sinr_from_gain(q.q, transmit_power, responsivity, sigma2)
}

pub fn sinr_from_gain(q: f64, transmit_power: f64, responsivity: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::NonPositiveNoise(sigma2));
    }
    let signal = responsivity * q * transmit_power;
    Ok(signal * signal / sigma2)
}

/// Lower bound on the capacity of the optical intensity channel:
/// B·log2(1 + e/(2π)·γ).
pub fn achievable_rate(gamma: f64, bandwidth: f64) -> f64 {
    bandwidth * (E / (2.0 * PI) * gamma).ln_1p() / std::f64::consts::LN_2
}

pub fn sum_rate(rates: &[f64]) -> f64 {
    rates.iter().sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    pub gain: ChannelGain,
    /// Gain that carries signal after the power split.
    pub effective_gain: f64,
    /// W
    pub received_optical_power: f64,
    /// A²
    pub noise_variance: f64,
    pub sinr: f64,
    /// bit/s
    pub rate: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn thermal_floor() {
        let p = NoiseParams::default();
        // (4.47e-12)² · 1.5e9 · 10^0.5
        let expected = 4.47e-12f64.powi(2) * 1.5e9 * 10f64.sqrt();
        assert_relative_eq!(noise_variance(&p, 0.0, 0.4), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 9.478e-14, max_relative = 1e-3);
    }

    #[test]
    fn thermal_dominated_budget() {
        let p = NoiseParams::default();
        let n = noise_breakdown(&p, 1.45e-6, 0.4);
        assert_relative_eq!(n.shot, 2.79e-16, max_relative = 2e-3);
        assert_relative_eq!(n.rin, 1.60e-19, max_relative = 3e-3);
        assert_relative_eq!(n.total(), 9.506e-14, max_relative = 1e-3);
    }

    #[test]
    fn bandwidth_scales_every_term() {
        let p = NoiseParams::default();
        let p2 = NoiseParams {
            bandwidth_b: 2.0 * p.bandwidth_b,
            ..p
        };
        let a = noise_breakdown(&p, 1e-3, 0.4);
        let b = noise_breakdown(&p2, 1e-3, 0.4);
        assert_relative_eq!(b.shot, 2.0 * a.shot, max_relative = 1e-15);
        assert_relative_eq!(b.thermal, 2.0 * a.thermal, max_relative = 1e-15);
        assert_relative_eq!(b.rin, 2.0 * a.rin, max_relative = 1e-15);
    }

    #[test]
    fn sinr_examples() {
        assert_eq!(sinr_from_gain(0.0, 0.01, 0.4, 1e-13).unwrap(), 0.0);
        // R·q·P = σ
        let sigma2: f64 = 4e-14;
        let q = sigma2.sqrt() / (0.4 * 0.01);
        assert_relative_eq!(
            sinr_from_gain(q, 0.01, 0.4, sigma2).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        let g = sinr_from_gain(1.4528e-4, 0.01, 0.4, 9.506e-14).unwrap();
        assert_relative_eq!(g, 3.553, max_relative = 1e-3);
        assert!(matches!(
            sinr_from_gain(1.0, 1.0, 1.0, 0.0),
            Err(Error::NonPositiveNoise(_))
        ));
    }

    #[test]
    fn rate_examples() {
        assert_eq!(achievable_rate(0.0, 1.5e9), 0.0);
        assert_relative_eq!(
            achievable_rate(2.0 * PI / E, 1.5e9),
            1.5e9,
            max_relative = 1e-15
        );
        // 1.5e9 · log2(1 + 0.432628 · 3.553) = 1.5e9 · log2(2.537127)
        assert_relative_eq!(
            achievable_rate(3.553, 1.5e9),
            2.014_79e9,
            max_relative = 1e-5
        );
        assert_relative_eq!(achievable_rate(3.553, 1.5e9), 2.005e9, max_relative = 5e-3);
    }

    #[test]
    fn sum_rate_examples() {
        assert_eq!(sum_rate(&[]), 0.0);
        assert_eq!(sum_rate(&[1e9, 2e9]), 3e9);
        assert_eq!(sum_rate(&[7e8; 4]), 4.0 * 7e8);
    }

    #[test]
    fn invalid_noise_params() {
        let ok = NoiseParams::default();
        assert!(ok.validate("noise").is_ok());
        let e = NoiseParams {
            bandwidth_b: -1.0,
            ..ok
        }
        .validate("noise")
        .unwrap_err();
        assert_eq!(e.to_string(), "noise.bandwidth_b: must be > 0");
        assert!(NoiseParams {
            rin_db_per_hz: 3.0,
            ..ok
        }
        .validate("noise")
        .is_err());
        assert!(NoiseParams {
            noise_current_density: -1.0,
            ..ok
        }
        .validate("noise")
        .is_err());
    }

    proptest! {
        #[test]
        fn rate_monotone_and_concave(g in 0.0f64..1e6, dg in 1e-3f64..10.0, b in 1e6f64..1e10) {
            let r0 = achievable_rate(g, b);
            let r1 = achievable_rate(g + dg, b);
            let r2 = achievable_rate(g + 2.0 * dg, b);
            prop_assert!(r1 > r0);
            prop_assert!(achievable_rate(g + dg, 1.5 * b) > r1);
            // second difference non-positive
            prop_assert!(r2 - 2.0 * r1 + r0 <= 1e-9 * r1.max(1.0));
            prop_assert!(r0 <= b * (1.0 + g).log2() * (1.0 + 1e-12));
        }

        #[test]
        fn sinr_scale_invariant(q in 1e-8f64..1.0, p in 1e-6f64..1.0, c in 1e-3f64..1e3) {
            let a = sinr_from_gain(q, p, 0.4, 1e-13).unwrap();
            let b = sinr_from_gain(q * c, p / c, 0.4, 1e-13).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn noise_floor_is_thermal(pr in 0.0f64..1.0) {
            let p = NoiseParams::default();
            let s = noise_variance(&p, pr, 0.4);
            prop_assert!(s >= p.thermal_variance());
            if pr > 1e-9 {
                prop_assert!(s > p.thermal_variance());
            }
        }
    }
}
