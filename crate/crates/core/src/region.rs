//! Secrecy-region geometry and the resources needed to enforce it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::array::{correlation2, ArrayConfig, FrequencyVector, Location};
use crate::error::{Error, Result};
use crate::security::{eta, PowerConfig};

/// Angular resolution constant of the second-order beampattern ellipse
/// (35.9 degrees), in radians.
pub const ANGLE_CONSTANT_RAD: f64 = 35.9 * PI / 180.0;

/// Iteration cap for the AN-scheme fixed point.
pub const FIXED_POINT_CAP: usize = 1000;

/// Half-widths of the protected box around Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecrecyRegion {
    pub delta_r_m: f64,
    pub delta_theta_rad: f64,
}

impl SecrecyRegion {
    pub fn new(delta_r_m: f64, delta_theta_rad: f64) -> Result<Self> {
        if !(delta_r_m > 0.0) || !(delta_theta_rad > 0.0) {
            return Err(Error::domain(format!(
                "region offsets must be positive (dr={delta_r_m}, dtheta={delta_theta_rad})"
            )));
        }
        Ok(Self {
            delta_r_m,
            delta_theta_rad,
        })
    }

    pub fn from_degrees(delta_r_m: f64, delta_theta_deg: f64) -> Result<Self> {
        Self::new(delta_r_m, delta_theta_deg.to_radians())
    }

    /// The four corners `(r_B ± Δr, θ_B ± Δθ)`.
    pub fn corners(&self, bob: &Location) -> Result<[Location; 4]> {
        let (r, t) = (bob.range_m, bob.theta_rad);
        let (dr, dt) = (self.delta_r_m, self.delta_theta_rad);
        let corner = |r: f64, t: f64| {
            Location::new(r, t).map_err(|_| {
                Error::domain(format!(
                    "secrecy region corner ({r} m, {} deg) falls outside the valid half-plane",
                    t.to_degrees()
                ))
            })
        };
        Ok([
            corner(r + dr, t + dt)?,
            corner(r + dr, t - dt)?,
            corner(r - dr, t + dt)?,
            corner(r - dr, t - dt)?,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    WithAn,
    WithoutAn,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::WithAn, SchemeKind::WithoutAn];

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::WithAn => "with_an",
            SchemeKind::WithoutAn => "without_an",
        }
    }
}

/// Largest squared correlation between Bob and the four region corners.
pub fn beta_boundary(
    cfg: &ArrayConfig,
    k: &FrequencyVector,
    bob: &Location,
    region: &SecrecyRegion,
) -> Result<f64> {
    let mut beta = 0.0_f64;
    for corner in region.corners(bob)? {
        beta = beta.max(correlation2(cfg, k, bob, &corner)?);
    }
    Ok(beta)
}

fn check_sin(theta_b: f64) -> Result<f64> {
    let s = theta_b.sin();
    if !(s > 0.0) {
        return Err(Error::domain(format!(
            "sin(theta_B) must be positive, got {s}"
        )));
    }
    Ok(s)
}

/// Semi-axes `(Δr†, Δθ†)` of the `β`-contour ellipse, in meters and radians.
pub fn ellipse_semi_axes(
    cfg: &ArrayConfig,
    elements: usize,
    k_energy: f64,
    beta: f64,
    theta_b: f64,
) -> Result<(f64, f64)> {
    let sin_b = check_sin(theta_b)?;
    if !(k_energy > 0.0) {
        return Err(Error::domain(format!("K must be positive, got {k_energy}")));
    }
    if elements == 0 {
        return Err(Error::domain("ellipse needs at least one element"));
    }
    if beta >= 1.0 {
        return Ok((0.0, 0.0));
    }
    let m = elements as f64;
    let slack = 1.0 - beta;
    let dr = cfg.c * (m * slack / k_energy).sqrt() / (2.0 * PI * cfg.delta_f_hz);
    let dtheta =
        ANGLE_CONSTANT_RAD * cfg.c * slack.sqrt() / (m * cfg.spacing_m * cfg.f0_hz * sin_b);
    Ok((dr, dtheta))
}

/// `(r - r_B)²/Δr†² + (θ - θ_B)²/Δθ†²`; equal to 1 on the ellipse.
pub fn ellipse_residual(bob: &Location, probe: &Location, axes: (f64, f64)) -> Result<f64> {
    let (ar, at) = axes;
    if !(ar > 0.0) || !(at > 0.0) {
        return Err(Error::domain("ellipse axes must be positive"));
    }
    let dr = (probe.range_m - bob.range_m) / ar;
    let dt = (probe.theta_rad - bob.theta_rad) / at;
    Ok(dr * dr + dt * dt)
}

/// Smallest (real-valued) element count whose ellipse fits inside `Δθ`.
/// Never below 1.
pub fn m_min(beta: f64, region: &SecrecyRegion, theta_b: f64, cfg: &ArrayConfig) -> Result<f64> {
    let sin_b = check_sin(theta_b)?;
    if beta >= 1.0 {
        return Ok(1.0);
    }
    let m = ANGLE_CONSTANT_RAD * cfg.c * (1.0 - beta).sqrt()
        / (region.delta_theta_rad * cfg.spacing_m * cfg.f0_hz * sin_b);
    Ok(m.max(1.0))
}

/// Smallest `K = kᵀk` whose ellipse fits inside `Δr` for an array of
/// `m_min_value` elements.
pub fn k_min(
    beta: f64,
    region: &SecrecyRegion,
    cfg: &ArrayConfig,
    m_min_value: f64,
) -> Result<f64> {
    if !(region.delta_r_m > 0.0) {
        return Err(Error::domain("range offset must be positive"));
    }
    if beta >= 1.0 {
        return Ok(0.0);
    }
    let scale = cfg.c / (2.0 * PI * cfg.delta_f_hz * region.delta_r_m);
    Ok(scale * scale * (1.0 - beta) * m_min_value)
}

fn check_rate(bob_snr: f64, rs: f64) -> Result<f64> {
    if !(rs >= 0.0) {
        return Err(Error::domain(format!(
            "secrecy rate must be >= 0, got {rs}"
        )));
    }
    let target = rs.exp2();
    if 1.0 + bob_snr <= target {
        return Err(Error::Infeasible(format!(
            "rate {rs} bits needs Bob's capacity above it, but log2(1 + SNR) = {:.4}",
            (1.0 + bob_snr).log2()
        )));
    }
    Ok(target)
}

/// Largest boundary correlation for which the AN lower bound still reaches `rs`.
pub fn beta_max_an(power: &PowerConfig, eta: f64, rs: f64) -> Result<f64> {
    let (d, mu, eps) = (power.delta, power.mu(), power.eps());
    let target = check_rate(d * mu, rs)?;
    let an = (1.0 - d) * mu * eta;
    let beta = (an + eps) / (an + d * mu * target / (1.0 + d * mu - target));
    Ok(beta.clamp(0.0, 1.0))
}

/// Largest boundary correlation for which the no-AN lower bound reaches `rs`.
pub fn beta_max_no_an(power: &PowerConfig, rs: f64) -> Result<f64> {
    let (mu, eps) = (power.mu(), power.eps());
    let target = check_rate(mu, rs)?;
    Ok(((1.0 + mu - target) * eps / (mu * target)).clamp(0.0, 1.0))
}

/// How the AN solver picks `η`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EtaMode {
    /// Iterate `η = 1/(M-1)` with the element count it implies.
    #[default]
    FixedPoint,
    Fixed(f64),
}

/// Smallest integer element count supporting secrecy rate `rs` over `region`.
pub fn solve_m_min(
    rs: f64,
    power: &PowerConfig,
    region: &SecrecyRegion,
    theta_b: f64,
    cfg: &ArrayConfig,
    scheme: SchemeKind,
) -> Result<usize> {
    solve_m_min_with(rs, power, region, theta_b, cfg, scheme, EtaMode::FixedPoint)
}

pub fn solve_m_min_with(
    rs: f64,
    power: &PowerConfig,
    region: &SecrecyRegion,
    theta_b: f64,
    cfg: &ArrayConfig,
    scheme: SchemeKind,
    eta_mode: EtaMode,
) -> Result<usize> {
    let ceil =
        |beta: f64| -> Result<usize> { Ok(m_min(beta, region, theta_b, cfg)?.ceil() as usize) };
    match scheme {
        SchemeKind::WithoutAn => ceil(beta_max_no_an(power, rs)?),
        SchemeKind::WithAn => {
            if let EtaMode::Fixed(eta) = eta_mode {
                let beta = beta_max_an(power, eta, rs)?;
                return Ok(ceil(beta)?.max(2));
            }
            let mut m = 2usize;
            let mut seen = vec![m];
            for _ in 0..FIXED_POINT_CAP {
                let beta = beta_max_an(power, eta(m)?, rs)?;
                let next = ceil(beta)?.max(2);
                if next == m {
                    return Ok(m);
                }
                if let Some(pos) = seen.iter().position(|&v| v == next) {
                    return Err(Error::Convergence(format!(
                        "M_min iteration cycles through {:?}",
                        &seen[pos..]
                    )));
                }
                seen.push(next);
                m = next;
            }
            let tail = &seen[seen.len().saturating_sub(2)..];
            Err(Error::Convergence(format!(
                "M_min iteration did not settle after {FIXED_POINT_CAP} steps; last values {tail:?}"
            )))
        }
    }
}
