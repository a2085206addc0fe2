//! RFDA geometry: per-element phase shifts, steering vectors, spatial
//! correlation between two locations, and the exact and second-order
//! beampatterns.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed used throughout, in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `c / (2 f0)`.
pub fn half_wavelength_spacing(f0_hz: f64, c: f64) -> Result<f64> {
    if !(f0_hz > 0.0) || !(c > 0.0) {
        return Err(Error::domain(format!(
            "half-wavelength spacing needs f0 > 0 and c > 0 (got f0={f0_hz}, c={c})"
        )));
    }
    Ok(c / (2.0 * f0_hz))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub elements: usize,
    pub f0_hz: f64,
    pub delta_f_hz: f64,
    pub spacing_m: f64,
    pub c: f64,
}

impl ArrayConfig {
    pub fn new(
        elements: usize,
        f0_hz: f64,
        delta_f_hz: f64,
        spacing_m: f64,
        c: f64,
    ) -> Result<Self> {
        if elements == 0 {
            return Err(Error::domain("array needs at least one element"));
        }
        for (name, v) in [
            ("f0", f0_hz),
            ("delta_f", delta_f_hz),
            ("spacing", spacing_m),
            ("c", c),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            elements,
            f0_hz,
            delta_f_hz,
            spacing_m,
            c,
        })
    }

    /// Array with `d = c / (2 f0)`.
    pub fn half_wavelength(elements: usize, f0_hz: f64, delta_f_hz: f64) -> Result<Self> {
        let d = half_wavelength_spacing(f0_hz, SPEED_OF_LIGHT)?;
        Self::new(elements, f0_hz, delta_f_hz, d, SPEED_OF_LIGHT)
    }

    /// Same physical array parameters, different element count.
    pub fn with_elements(&self, elements: usize) -> Result<Self> {
        Self::new(
            elements,
            self.f0_hz,
            self.delta_f_hz,
            self.spacing_m,
            self.c,
        )
    }
}

/// Dimensionless frequency increments `k_m`; element `m` radiates at
/// `f0 + k_m * delta_f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    k: Vec<f64>,
}

impl FrequencyVector {
    pub fn new(k: Vec<f64>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::domain("frequency vector must be non-empty"));
        }
        if let Some(bad) = k.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite frequency increment {bad}"
            )));
        }
        Ok(Self { k })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            k: vec![0.0; len.max(1)],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// `K = kᵀk`.
    pub fn energy(&self) -> f64 {
        self.k.iter().map(|v| v * v).sum()
    }

    pub fn sum(&self) -> f64 {
        self.k.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.k
    }

    fn check_len(&self, cfg: &ArrayConfig) -> Result<()> {
        if self.k.len() != cfg.elements {
            return Err(Error::domain(format!(
                "frequency vector has {} entries but the array has {} elements",
                self.k.len(),
                cfg.elements
            )));
        }
        Ok(())
    }
}

/// Polar position relative to the array: range in meters, angle from the
/// array axis in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub range_m: f64,
    pub theta_rad: f64,
}

impl Location {
    pub fn new(range_m: f64, theta_rad: f64) -> Result<Self> {
        if !(range_m >= 0.0) || !range_m.is_finite() {
            return Err(Error::domain(format!("range must be >= 0, got {range_m}")));
        }
        if !(theta_rad > 0.0 && theta_rad < PI) {
            return Err(Error::domain(format!(
                "angle must lie in (0, pi), got {theta_rad} rad"
            )));
        }
        Ok(Self { range_m, theta_rad })
    }

    pub fn from_degrees(range_m: f64, theta_deg: f64) -> Result<Self> {
        Self::new(range_m, theta_deg.to_radians())
    }
}

/// Unit-norm steering vector, entries `exp(j Ω_m) / √M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Vec<Complex64>);

impl SteeringVector {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `selfᴴ other`.
    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        inner(&self.0, other)
    }
}

/// `aᴴ b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Phase of element `m` (1-based) toward `loc`, using the usual far-field
/// approximation that drops the frequency/position cross term.
pub fn phase_shift(cfg: &ArrayConfig, k_m: f64, m: usize, loc: &Location) -> Result<f64> {
    if m == 0 || m > cfg.elements {
        return Err(Error::domain(format!(
            "element index {m} outside 1..={}",
            cfg.elements
        )));
    }
    Ok(phase_unchecked(cfg, k_m, m - 1, loc))
}

fn phase_unchecked(cfg: &ArrayConfig, k_m: f64, index0: usize, loc: &Location) -> f64 {
    let angular = index0 as f64 * cfg.f0_hz * cfg.spacing_m * loc.theta_rad.cos() / cfg.c;
    let ranging = k_m * cfg.delta_f_hz * loc.range_m / cfg.c;
    -2.0 * PI * (angular + ranging)
}

pub fn steering_vector(
    cfg: &ArrayConfig,
    k: &FrequencyVector,
    loc: &Location,
) -> Result<SteeringVector> {
    k.check_len(cfg)?;
    let scale = 1.0 / (cfg.elements as f64).sqrt();
    let entries = k
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &k_m)| Complex64::from_polar(scale, phase_unchecked(cfg, k_m, i, loc)))
        .collect();
    Ok(SteeringVector(entries))
}

/// Range and angle phase offsets `(p, q)` of `eve` relative to `bob`.
pub fn pq_offsets(cfg: &ArrayConfig, bob: &Location, eve: &Location) -> (f64, f64) {
    let p = 2.0 * PI * cfg.delta_f_hz * (eve.range_m - bob.range_m) / cfg.c;
    let q =
        2.0 * PI * cfg.f0_hz * cfg.spacing_m * (eve.theta_rad.cos() - bob.theta_rad.cos()) / cfg.c;
    (p, q)
}

/// Relative phases `z_m = p k_m + q (m - 1)`.
pub fn relative_phases(k: &FrequencyVector, p: f64, q: f64) -> Vec<f64> {
    k.as_slice()
        .iter()
        .enumerate()
        .map(|(i, &k_m)| p * k_m + q * i as f64)
        .collect()
}

fn array_factor_power(z: &[f64]) -> f64 {
    let (re, im) = z
        .iter()
        .fold((0.0, 0.0), |(re, im), &zm| (re + zm.cos(), im + zm.sin()));
    re * re + im * im
}

/// `|h(eve)ᴴ h(bob)|²`, in `[0, 1]`.
pub fn correlation2(
    cfg: &ArrayConfig,
    k: &FrequencyVector,
    bob: &Location,
    eve: &Location,
) -> Result<f64> {
    let m = cfg.elements as f64;
    Ok(beampattern_exact(cfg, k, bob, eve)? / (m * m))
}

/// `|Σ_m exp(j z_m)|²`, in `[0, M²]`.
pub fn beampattern_exact(
    cfg: &ArrayConfig,
    k: &FrequencyVector,
    bob: &Location,
    eve: &Location,
) -> Result<f64> {
    k.check_len(cfg)?;
    let (p, q) = pq_offsets(cfg, bob, eve);
    Ok(array_factor_power(&relative_phases(k, p, q)))
}

/// Second-order expansion `Σ_m Σ_n [1 - (z_m - z_n)² / 2]` of the beampattern.
pub fn beampattern_taylor(
    cfg: &ArrayConfig,
    k: &FrequencyVector,
    bob: &Location,
    eve: &Location,
) -> Result<f64> {
    k.check_len(cfg)?;
    let (p, q) = pq_offsets(cfg, bob, eve);
    Ok(taylor_from_phases(&relative_phases(k, p, q)))
}

pub(crate) fn taylor_from_phases(z: &[f64]) -> f64 {
    let mut spread = 0.0;
    for &zm in z {
        for &zn in z {
            let d = zm - zn;
            spread += d * d;
        }
    }
    let m = z.len() as f64;
    m * m - 0.5 * spread
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults(m: usize) -> ArrayConfig {
        ArrayConfig::half_wavelength(m, 1e9, 1e6).unwrap()
    }

    #[test]
    fn half_wavelength_values() {
        assert_relative_eq!(
            half_wavelength_spacing(1e9, SPEED_OF_LIGHT).unwrap(),
            0.149_896_229,
            epsilon = 1e-9
        );
        assert_eq!(half_wavelength_spacing(1e9, 3e8).unwrap(), 0.15);
        let a = half_wavelength_spacing(1e9, SPEED_OF_LIGHT).unwrap();
        let b = half_wavelength_spacing(2e9, SPEED_OF_LIGHT).unwrap();
        assert_relative_eq!(b, a / 2.0, max_relative = 1e-15);
        assert!(half_wavelength_spacing(0.0, 3e8).is_err());
        assert!(half_wavelength_spacing(1e9, -1.0).is_err());
    }

    #[test]
    fn half_wavelength_product() {
        let cfg = defaults(4);
        assert_eq!(cfg.spacing_m * cfg.f0_hz, cfg.c / 2.0);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(ArrayConfig::new(0, 1e9, 1e6, 0.15, 3e8).is_err());
        assert!(ArrayConfig::new(4, 1e9, 0.0, 0.15, 3e8).is_err());
        assert!(ArrayConfig::new(4, 1e9, 1e6, f64::NAN, 3e8).is_err());
        assert!(Location::new(-1.0, 1.0).is_err());
        assert!(Location::new(1.0, 0.0).is_err());
        assert!(Location::new(1.0, PI).is_err());
    }

    #[test]
    fn phase_shift_examples() {
        let cfg = defaults(4);
        let loc = Location::from_degrees(123.0, 33.0).unwrap();
        assert_eq!(phase_shift(&cfg, 0.0, 1, &loc).unwrap(), 0.0);

        let broadside = Location::new(100.0, PI / 2.0).unwrap();
        assert!(phase_shift(&cfg, 0.0, 2, &broadside).unwrap().abs() < 1e-15);

        let got = phase_shift(&cfg, 1.0, 2, &broadside).unwrap();
        let expected = -2.0 * PI * (1e6 * 100.0 / SPEED_OF_LIGHT);
        assert_relative_eq!(got, expected, epsilon = 1e-12);
        assert_relative_eq!(got, -2.0958, epsilon = 1e-4);

        assert!(phase_shift(&cfg, 0.0, 0, &loc).is_err());
        assert!(phase_shift(&cfg, 0.0, 5, &loc).is_err());
    }

    #[test]
    fn steering_vector_examples() {
        let one = defaults(1);
        let loc = Location::from_degrees(50.0, 70.0).unwrap();
        let h = steering_vector(&one, &FrequencyVector::zeros(1), &loc).unwrap();
        assert_relative_eq!(h.as_slice()[0].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(h.as_slice()[0].im, 0.0, epsilon = 1e-15);

        let two = defaults(2);
        let broadside = Location::new(77.0, PI / 2.0).unwrap();
        let h = steering_vector(&two, &FrequencyVector::zeros(2), &broadside).unwrap();
        for e in h.as_slice() {
            assert_relative_eq!(e.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
            assert!(e.im.abs() < 1e-15);
        }

        let k = FrequencyVector::new(vec![0.3, -1.2, 4.0]).unwrap();
        assert!(steering_vector(&two, &k, &loc).is_err());
    }

    #[test]
    fn pq_examples() {
        let cfg = defaults(8);
        let bob = Location::from_degrees(100.0, 90.0).unwrap();
        assert_eq!(pq_offsets(&cfg, &bob, &bob), (0.0, 0.0));

        let eve = Location::from_degrees(100.0, 60.0).unwrap();
        let (_, q) = pq_offsets(&cfg, &bob, &eve);
        assert_relative_eq!(q, PI / 2.0, epsilon = 1e-12);

        let eve = Location::new(175.0, PI / 2.0).unwrap();
        let (p, _) = pq_offsets(&cfg, &bob, &eve);
        assert_relative_eq!(p, 2.0 * PI * 75e6 / SPEED_OF_LIGHT, epsilon = 1e-15);
        assert_relative_eq!(p, 1.5719, epsilon = 1e-4);
    }

    #[test]
    fn correlation_examples() {
        let cfg = defaults(2);
        let bob = Location::new(100.0, PI / 2.0).unwrap();
        let k = FrequencyVector::new(vec![1.0, -1.0]).unwrap();
        assert_relative_eq!(
            correlation2(&cfg, &k, &bob, &bob).unwrap(),
            1.0,
            epsilon = 1e-15
        );

        // two elements, q = 0: (1/2)(e^{jp} + e^{-jp}) = cos p
        let eve = Location::new(175.0, PI / 2.0).unwrap();
        let p = 2.0 * PI * 75e6 / SPEED_OF_LIGHT;
        let expected = p.cos().powi(2);
        let got = correlation2(&cfg, &k, &bob, &eve).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-9);
        assert!((got - 1.18e-6).abs() < 0.01e-6, "{got}");

        let exact = beampattern_exact(&cfg, &k, &bob, &eve).unwrap();
        assert_relative_eq!(exact, 4.0 * expected, max_relative = 1e-9);

        // no frequency diversity: range-blind
        let cfg8 = defaults(8);
        let zeros = FrequencyVector::zeros(8);
        let far = Location::new(5000.0, PI / 2.0).unwrap();
        assert_relative_eq!(
            correlation2(&cfg8, &zeros, &bob, &far).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn correlation_matches_inner_product() {
        let cfg = defaults(6);
        let k = FrequencyVector::new(vec![3.1, -2.0, 0.7, 5.5, -4.1, 1.0]).unwrap();
        let bob = Location::from_degrees(100.0, 45.0).unwrap();
        let eve = Location::from_degrees(108.0, 40.0).unwrap();
        let hb = steering_vector(&cfg, &k, &bob).unwrap();
        let he = steering_vector(&cfg, &k, &eve).unwrap();
        let via_vectors = he.inner(hb.as_slice()).norm_sqr();
        assert_relative_eq!(
            correlation2(&cfg, &k, &bob, &eve).unwrap(),
            via_vectors,
            max_relative = 1e-12
        );
    }

    #[test]
    fn antipodal_pair_cancels() {
        // q = pi with half-wavelength spacing: cos(theta_E) - cos(theta_B) = 1
        let cfg = defaults(2);
        let bob = Location::from_degrees(10.0, 90.0).unwrap();
        let eve = Location::from_degrees(10.0, 1e-6).unwrap();
        let (_, q) = pq_offsets(&cfg, &bob, &eve);
        assert_relative_eq!(q, PI, epsilon = 1e-9);
        let g = beampattern_exact(&cfg, &FrequencyVector::zeros(2), &bob, &eve).unwrap();
        assert!(g < 1e-15);
    }

    #[test]
    fn taylor_examples() {
        let cfg = defaults(3);
        let bob = Location::from_degrees(100.0, 45.0).unwrap();
        let k = FrequencyVector::new(vec![1.0, -2.0, 1.0]).unwrap();
        assert_eq!(beampattern_taylor(&cfg, &k, &bob, &bob).unwrap(), 9.0);
        assert_eq!(beampattern_exact(&cfg, &k, &bob, &bob).unwrap(), 9.0);

        // p = 0.1, q = 0
        let z = relative_phases(&k, 0.1, 0.0);
        assert_relative_eq!(taylor_from_phases(&z), 8.82, epsilon = 1e-12);
    }
}
