//! Experiment scenarios and the JSON config file that describes them.

use serde::{Deserialize, Serialize};

use crate::array::{
    half_wavelength_spacing, ArrayConfig, FrequencyVector, Location, SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};
use crate::freq::{builtin_table, GenerationMethod, TableRow};
use crate::region::SecrecyRegion;
use crate::security::PowerConfig;

/// `kᵀk` per element of the K10405 reference row; generated vectors default
/// to the same per-element spread.
pub const DEFAULT_K_PER_ELEMENT: f64 = 10405.0 / 16.0;

/// Seeds averaged when estimating the boundary correlation of generated vectors.
pub const DEFAULT_BETA_SEEDS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    #[serde(rename = "lb")]
    AnalyticLb,
    #[serde(rename = "mc")]
    MonteCarlo,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::AnalyticLb => "lb",
            Mode::MonteCarlo => "mc",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lb" => Ok(Mode::AnalyticLb),
            "mc" => Ok(Mode::MonteCarlo),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected lb or mc)"
            ))),
        }
    }
}

/// Where a scenario's frequency increments come from.
#[derive(Debug, Clone, PartialEq)]
pub enum KSource {
    Generated {
        k_target: f64,
        method: GenerationMethod,
        seed: u64,
    },
    Fixed {
        label: String,
        k: FrequencyVector,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub bob: Location,
    pub eve: Location,
    pub region: SecrecyRegion,
    pub power: PowerConfig,
    pub rs_bits: f64,
    pub k_source: KSource,
    pub mode: Mode,
    /// Replaces the computed boundary correlation in lower-bound evaluations.
    pub beta_override: Option<f64>,
    /// Number of generated vectors averaged for the boundary correlation;
    /// 1 gives the per-seed value.
    pub beta_seeds: usize,
}

impl Scenario {
    /// Defaults with `elements` antennas.
    pub fn defaults(elements: usize) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        cfg.array.m = elements;
        cfg.resolve()
    }

    pub fn with_k(mut self, label: impl Into<String>, k: FrequencyVector) -> Result<Self> {
        if k.len() != self.array.elements {
            return Err(Error::Config(format!(
                "frequency vector has {} entries but the array has {}",
                k.len(),
                self.array.elements
            )));
        }
        self.k_source = KSource::Fixed {
            label: label.into(),
            k,
        };
        Ok(self)
    }

    pub fn with_fixture(self, row: &TableRow) -> Result<Self> {
        self.with_k(row.label.clone(), row.k.clone())
    }
}

// ---- config file ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    HalfWavelength,
    Meters(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    #[serde(rename = "M")]
    pub m: usize,
    pub f0_hz: f64,
    pub delta_f_hz: f64,
    pub spacing: Spacing,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            m: 16,
            f0_hz: 1e9,
            delta_f_hz: 1e6,
            spacing: Spacing::HalfWavelength,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSection {
    pub r_m: f64,
    pub theta_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSection {
    pub dr_m: f64,
    pub dtheta_deg: f64,
}

impl Default for RegionSection {
    fn default() -> Self {
        Self {
            dr_m: 8.0,
            dtheta_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub pt_dbm: f64,
    pub sigma_b2_dbm: f64,
    pub sigma_e2_dbm: f64,
    pub delta: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        Self {
            pt_dbm: 30.0,
            sigma_b2_dbm: 0.0,
            sigma_e2_dbm: 0.0,
            delta: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratedSpec {
    /// Defaults to `DEFAULT_K_PER_ELEMENT * M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_target: Option<f64>,
    #[serde(default)]
    pub method: GenerationMethod,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KSourceSpec {
    Generated(GeneratedSpec),
    /// Label of a row in the frequency table, e.g. `K10405`.
    Fixture(String),
}

impl Default for KSourceSpec {
    fn default() -> Self {
        KSourceSpec::Generated(GeneratedSpec {
            k_target: None,
            method: GenerationMethod::Projection,
            seed: 0,
        })
    }
}

/// On-disk scenario description. Missing sections take the defaults; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub array: ArraySection,
    pub bob: PointSection,
    pub eve: PointSection,
    pub region: RegionSection,
    pub power: PowerSection,
    pub rs_bits: f64,
    pub k_source: KSourceSpec,
    pub mode: Mode,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            array: ArraySection::default(),
            bob: PointSection {
                r_m: 100.0,
                theta_deg: 45.0,
            },
            eve: PointSection {
                r_m: 108.0,
                theta_deg: 40.0,
            },
            region: RegionSection::default(),
            power: PowerSection::default(),
            rs_bits: 1.0,
            k_source: KSourceSpec::default(),
            mode: Mode::AnalyticLb,
        }
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fills in the generated `k_target` default so the file fully describes
    /// the run.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        if let KSourceSpec::Generated(g) = &mut out.k_source {
            g.k_target
                .get_or_insert(DEFAULT_K_PER_ELEMENT * self.array.m as f64);
        }
        out
    }

    pub fn resolve(&self) -> Result<Scenario> {
        self.resolve_with_table(&builtin_table())
    }

    pub fn resolve_with_table(&self, table: &[TableRow]) -> Result<Scenario> {
        let cfg = |e: Error| Error::Config(e.to_string());
        let a = &self.array;
        let spacing = match a.spacing {
            Spacing::HalfWavelength => {
                half_wavelength_spacing(a.f0_hz, SPEED_OF_LIGHT).map_err(cfg)?
            }
            Spacing::Meters(d) => d,
        };
        let array =
            ArrayConfig::new(a.m, a.f0_hz, a.delta_f_hz, spacing, SPEED_OF_LIGHT).map_err(cfg)?;
        let bob = Location::from_degrees(self.bob.r_m, self.bob.theta_deg).map_err(cfg)?;
        let eve = Location::from_degrees(self.eve.r_m, self.eve.theta_deg).map_err(cfg)?;
        let region =
            SecrecyRegion::from_degrees(self.region.dr_m, self.region.dtheta_deg).map_err(cfg)?;
        region.corners(&bob).map_err(cfg)?;
        let p = &self.power;
        let power =
            PowerConfig::new(p.pt_dbm, p.sigma_b2_dbm, p.sigma_e2_dbm, p.delta).map_err(cfg)?;
        if !(self.rs_bits >= 0.0) {
            return Err(Error::Config(format!(
                "rs_bits must be >= 0, got {}",
                self.rs_bits
            )));
        }
        let k_source = match &self.k_source {
            KSourceSpec::Generated(g) => KSource::Generated {
                k_target: g.k_target.unwrap_or(DEFAULT_K_PER_ELEMENT * a.m as f64),
                method: g.method,
                seed: g.seed,
            },
            KSourceSpec::Fixture(label) => {
                let row = table
                    .iter()
                    .find(|r| &r.label == label)
                    .ok_or_else(|| Error::Config(format!("no fixture row labelled `{label}`")))?;
                if row.k.len() != a.m {
                    return Err(Error::Config(format!(
                        "fixture {label} has {} elements but M = {}",
                        row.k.len(),
                        a.m
                    )));
                }
                KSource::Fixed {
                    label: label.clone(),
                    k: row.k.clone(),
                }
            }
        };
        if let KSource::Generated { k_target, .. } = k_source {
            if !(k_target > 0.0) {
                return Err(Error::Config(format!(
                    "k_target must be positive, got {k_target}"
                )));
            }
        }
        Ok(Scenario {
            array,
            bob,
            eve,
            region,
            power,
            rs_bits: self.rs_bits,
            k_source,
            mode: self.mode,
            beta_override: None,
            beta_seeds: DEFAULT_BETA_SEEDS,
        })
    }
}
