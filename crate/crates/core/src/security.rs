//! Directional-modulation signal model with artificial noise, and the
//! capacity expressions built on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{inner, SteeringVector};
use crate::error::{Error, Result};

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Transmit power, noise levels and power split. Linear ratios are derived
/// once here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub pt_dbm: f64,
    pub sigma_b2_dbm: f64,
    pub sigma_e2_dbm: f64,
    /// Fraction of power carrying the confidential symbol.
    pub delta: f64,
    mu: f64,
    eps: f64,
}

impl PowerConfig {
    pub fn new(pt_dbm: f64, sigma_b2_dbm: f64, sigma_e2_dbm: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::domain(format!(
                "power allocation factor must lie in [0, 1], got {delta}"
            )));
        }
        for v in [pt_dbm, sigma_b2_dbm, sigma_e2_dbm] {
            if !v.is_finite() {
                return Err(Error::domain(format!(
                    "power levels must be finite, got {v}"
                )));
            }
        }
        Ok(Self {
            pt_dbm,
            sigma_b2_dbm,
            sigma_e2_dbm,
            delta,
            mu: dbm_to_mw(pt_dbm - sigma_b2_dbm),
            eps: dbm_to_mw(sigma_e2_dbm - sigma_b2_dbm),
        })
    }

    /// `P_t / σ_B²`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `σ_E² / σ_B²`.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn pt_mw(&self) -> f64 {
        dbm_to_mw(self.pt_dbm)
    }

    pub fn sigma_b2_mw(&self) -> f64 {
        dbm_to_mw(self.sigma_b2_dbm)
    }

    pub fn sigma_e2_mw(&self) -> f64 {
        dbm_to_mw(self.sigma_e2_dbm)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.pt_dbm, self.sigma_b2_dbm, self.sigma_e2_dbm, delta)
    }

    pub fn with_pt_dbm(&self, pt_dbm: f64) -> Result<Self> {
        Self::new(pt_dbm, self.sigma_b2_dbm, self.sigma_e2_dbm, self.delta)
    }
}

/// Unit-norm artificial-noise direction `(I - h hᴴ) z / ‖(I - h hᴴ) z‖`,
/// orthogonal to `h_bob`.
pub fn an_vector(h_bob: &SteeringVector, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let h = h_bob.as_slice();
    if h.len() < 2 {
        return Err(Error::domain(
            "artificial noise needs at least two elements",
        ));
    }
    if z.len() != h.len() {
        return Err(Error::domain(format!(
            "noise draw has {} entries, expected {}",
            z.len(),
            h.len()
        )));
    }
    let proj = inner(h, z);
    let mut w: Vec<Complex64> = z.iter().zip(h).map(|(zi, hi)| zi - hi * proj).collect();
    let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-14 {
        return Err(Error::RetryRequired(
            "noise draw lies in the span of Bob's steering vector".into(),
        ));
    }
    w.iter_mut().for_each(|c| *c /= norm);
    Ok(w)
}

/// `√(δP_t) v s + √((1-δ)P_t) w`, with `P_t` in mW.
pub fn transmit_signal(
    v: &[Complex64],
    w: &[Complex64],
    s: Complex64,
    power: &PowerConfig,
) -> Result<Vec<Complex64>> {
    if !(0.0..=1.0).contains(&power.delta) {
        return Err(Error::domain(format!(
            "power allocation factor {} outside [0, 1]",
            power.delta
        )));
    }
    if v.len() != w.len() {
        return Err(Error::domain("signal and noise vectors differ in length"));
    }
    let pt = power.pt_mw();
    let a = (power.delta * pt).sqrt();
    let b = ((1.0 - power.delta) * pt).sqrt();
    Ok(v.iter()
        .zip(w)
        .map(|(vi, wi)| vi * s * a + wi * b)
        .collect())
}

/// `hᴴ x + noise`.
pub fn receive_signal(h: &SteeringVector, x: &[Complex64], noise: Complex64) -> Result<Complex64> {
    if h.len() != x.len() {
        return Err(Error::domain(
            "steering vector and transmit vector differ in length",
        ));
    }
    Ok(h.inner(x) + noise)
}

/// `δμ`.
pub fn snr_bob(power: &PowerConfig) -> f64 {
    power.delta * power.mu()
}

/// `δμ·corr2 / ((1-δ)μ·an2 + ε)` where `corr2 = |h_Eᴴ h_B|²` and
/// `an2 = |h_Eᴴ w|²`.
pub fn sinr_eve(power: &PowerConfig, corr2: f64, an2: f64) -> f64 {
    let (d, mu) = (power.delta, power.mu());
    d * mu * corr2 / ((1.0 - d) * mu * an2 + power.eps())
}

/// `1 / tr[(I - h hᴴ)²]` for a unit-norm `h`, i.e. `1/(M-1)`.
pub fn eta(elements: usize) -> Result<f64> {
    if elements < 2 {
        return Err(Error::domain("eta is undefined for a single element"));
    }
    Ok(1.0 / (elements - 1) as f64)
}

pub fn capacity_bob(power: &PowerConfig) -> f64 {
    (1.0 + snr_bob(power)).log2()
}

/// Eve's capacity for one realization of the channel correlation and AN leakage.
pub fn capacity_eve_an(power: &PowerConfig, corr2: f64, an2: f64) -> f64 {
    (1.0 + sinr_eve(power, corr2, an2)).log2()
}

pub fn secrecy_capacity(cb: f64, ce: f64) -> f64 {
    (cb - ce).max(0.0)
}

/// Lower bound on the AN-aided secrecy capacity given boundary correlation
/// `beta` and `eta`.
pub fn c_an_lb(power: &PowerConfig, beta: f64, eta: f64) -> f64 {
    let (d, mu, eps) = (power.delta, power.mu(), power.eps());
    let leak = d * mu * beta / ((1.0 - d) * mu * eta * (1.0 - beta) + eps);
    ((1.0 + d * mu) / (1.0 + leak)).log2()
}

/// Lower bound on the secrecy capacity without AN (all power on the symbol).
pub fn c_lb(power: &PowerConfig, beta: f64) -> f64 {
    let (mu, eps) = (power.mu(), power.eps());
    ((1.0 + mu) / (1.0 + mu * beta / eps)).log2()
}
