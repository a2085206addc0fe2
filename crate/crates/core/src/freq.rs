//! Frequency-increment design.
//!
//! A vector `k` turns the near-Bob beampattern into an ellipse in
//! (range, angle) when `ρ₁(k) = 2MK` and `ρ₂(k) = 0`, which holds exactly when
//! `k` is orthogonal to both the all-ones vector and the element-index
//! vector. That subspace is also the top eigenspace of the design matrix
//! returned by [`build_design_matrix`].

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array::FrequencyVector;
use crate::eigen::{symmetric_eigen, SymmetricMatrix};
use crate::error::{Error, Result};
use crate::rng;

/// Tolerance used when decomposing the design matrix.
pub const EIGEN_TOL: f64 = 1e-10;

/// Table of frequency increments (MHz) for the three 16-element reference arrays.
pub const TABLE1_CSV: &str = include_str!("../fixtures/table1.csv");

/// `Σ_m Σ_n (k_m - k_n)²`.
pub fn rho1(k: &FrequencyVector) -> f64 {
    let k = k.as_slice();
    let mut s = 0.0;
    for a in k {
        for b in k {
            s += (a - b) * (a - b);
        }
    }
    s
}

/// `Σ_m Σ_n (k_m - k_n)(m - n)`.
pub fn rho2(k: &FrequencyVector) -> f64 {
    let k = k.as_slice();
    let mut s = 0.0;
    for (m, a) in k.iter().enumerate() {
        for (n, b) in k.iter().enumerate() {
            s += (a - b) * (m as f64 - n as f64);
        }
    }
    s
}

/// `Σ_m Σ_n (m - n)² = M²(M² - 1)/6`, the coefficient of `q²` in the
/// second-order beampattern.
pub fn taylor_gram_constant(m: usize) -> f64 {
    let m = m as f64;
    m * m * (m * m - 1.0) / 6.0
}

/// The `M×M` design matrix
/// `(1/3)M³(M²-1) I - (2/3)M²(2M²+3M+1) E - 4M² G + 2M²(M+1) P`
/// with `E` all-ones, `G[m][n] = m·n` and `P[m][n] = m + n` (1-based indices).
pub fn build_design_matrix(m: usize) -> Result<SymmetricMatrix> {
    if m < 2 {
        return Err(Error::domain(format!(
            "design matrix needs M >= 2, got {m}"
        )));
    }
    let mf = m as f64;
    let m2 = mf * mf;
    let diag = mf.powi(3) * (m2 - 1.0) / 3.0;
    let ones = 2.0 / 3.0 * m2 * (2.0 * m2 + 3.0 * mf + 1.0);
    let prod = 4.0 * m2;
    let sum = 2.0 * m2 * (mf + 1.0);
    Ok(SymmetricMatrix::from_fn(m, |i, j| {
        let (r, c) = ((i + 1) as f64, (j + 1) as f64);
        let id = if i == j { diag } else { 0.0 };
        id - ones - prod * r * c + sum * (r + c)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationMethod {
    /// Project a Gaussian draw onto the complement of span{1, index}.
    #[default]
    Projection,
    /// Random combination of the top eigenvectors of the design matrix.
    Eigen,
}

impl std::str::FromStr for GenerationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(Self::Projection),
            "eigen" => Ok(Self::Eigen),
            other => Err(Error::Config(format!(
                "unknown generation method `{other}`"
            ))),
        }
    }
}

/// Reusable generator of constrained frequency vectors for a fixed `M`.
///
/// The eigen route decomposes the design matrix once at construction.
#[derive(Debug, Clone)]
pub struct KGenerator {
    elements: usize,
    method: GenerationMethod,
    basis: Vec<Vec<f64>>,
}

impl KGenerator {
    pub fn new(elements: usize, method: GenerationMethod) -> Result<Self> {
        if elements < 3 {
            return Err(Error::Infeasible(format!(
                "no frequency vector with rho1 = 2MK and rho2 = 0 exists for M = {elements} (need M >= 3)"
            )));
        }
        let basis = match method {
            GenerationMethod::Projection => Vec::new(),
            GenerationMethod::Eigen => top_eigenspace(elements)?,
        };
        Ok(Self {
            elements,
            method,
            basis,
        })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn method(&self) -> GenerationMethod {
        self.method
    }

    /// Dimension of the eigen basis (0 for the projection route).
    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    pub fn generate<R: Rng + ?Sized>(&self, k_target: f64, rng: &mut R) -> Result<FrequencyVector> {
        if !(k_target > 0.0) || !k_target.is_finite() {
            return Err(Error::domain(format!(
                "K target must be positive, got {k_target}"
            )));
        }
        // a degenerate draw has probability zero; bound the retries anyway
        for _ in 0..16 {
            let raw = match self.method {
                GenerationMethod::Projection => {
                    let mut x: Vec<f64> = (0..self.elements)
                        .map(|_| rng.sample(StandardNormal))
                        .collect();
                    project_out_ones_and_index(&mut x);
                    x
                }
                GenerationMethod::Eigen => {
                    let mut x = vec![0.0; self.elements];
                    for v in &self.basis {
                        let a: f64 = rng.sample(StandardNormal);
                        for (xi, vi) in x.iter_mut().zip(v) {
                            *xi += a * vi;
                        }
                    }
                    x
                }
            };
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                let scale = k_target.sqrt() / norm;
                return FrequencyVector::new(raw.into_iter().map(|v| v * scale).collect());
            }
        }
        Err(Error::RetryRequired(
            "frequency vector draw collapsed to zero".into(),
        ))
    }
}

/// One-shot generation with a private generator seeded from `seed`.
pub fn generate_k(
    elements: usize,
    k_target: f64,
    method: GenerationMethod,
    seed: u64,
) -> Result<FrequencyVector> {
    let generator = KGenerator::new(elements, method)?;
    generator.generate(k_target, &mut rng::stream(seed, 0))
}

fn project_out_ones_and_index(x: &mut [f64]) {
    let m = x.len() as f64;
    let mean = x.iter().sum::<f64>() / m;
    x.iter_mut().for_each(|v| *v -= mean);
    let centre = (m + 1.0) / 2.0;
    let idx: Vec<f64> = (1..=x.len()).map(|i| i as f64 - centre).collect();
    let idx_sq: f64 = idx.iter().map(|v| v * v).sum();
    let coeff = x.iter().zip(&idx).map(|(a, b)| a * b).sum::<f64>() / idx_sq;
    x.iter_mut().zip(&idx).for_each(|(v, i)| *v -= coeff * i);
}

fn top_eigenspace(elements: usize) -> Result<Vec<Vec<f64>>> {
    let a = build_design_matrix(elements)?;
    let eig = symmetric_eigen(&a, EIGEN_TOL)?;
    let lambda_max = eig.values[0];
    if !(lambda_max > 0.0) {
        return Err(Error::Infeasible(format!(
            "design matrix for M = {elements} has no positive eigenvalue"
        )));
    }
    Ok(eig
        .values
        .iter()
        .zip(eig.vectors)
        .filter(|(l, _)| **l >= lambda_max - 1e-6 * lambda_max)
        .map(|(_, v)| v)
        .collect())
}

/// One row of a frequency table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub k: FrequencyVector,
    /// Raw increments as written, in MHz.
    pub increments_mhz: Vec<f64>,
}

impl TableRow {
    /// `max - min` of the increments, in MHz.
    pub fn span_mhz(&self) -> f64 {
        let max = self.increments_mhz.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.increments_mhz.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }

    /// The K value encoded in a label such as `K10405`.
    pub fn nominal_k(&self) -> Option<f64> {
        self.label.strip_prefix('K').and_then(|s| s.parse().ok())
    }
}

pub const TABLE_ELEMENTS: usize = 16;

/// Parses the fixture schema `label,m1,...,m16` (increments in MHz) and
/// converts each row to dimensionless `k` by dividing by `delta_f_hz`.
pub fn parse_frequency_table(text: &str, delta_f_hz: f64) -> Result<Vec<TableRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.len() != TABLE_ELEMENTS + 1 || headers.get(0) != Some("label") {
        return Err(Error::Parse {
            row: 1,
            message: format!("expected header `label,m1,...,m{TABLE_ELEMENTS}`"),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != TABLE_ELEMENTS + 1 {
            return Err(Error::Parse {
                row,
                message: format!(
                    "expected {} columns, found {}",
                    TABLE_ELEMENTS + 1,
                    record.len()
                ),
            });
        }
        let label = record[0].to_string();
        let increments_mhz = record
            .iter()
            .skip(1)
            .map(|field| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    message: format!("`{field}` is not a number (row {label})"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let k = FrequencyVector::new(
            increments_mhz
                .iter()
                .map(|v| v * 1e6 / delta_f_hz)
                .collect(),
        )
        .map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        rows.push(TableRow {
            label,
            k,
            increments_mhz,
        });
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            row: 1,
            message: "frequency table has no data rows".into(),
        });
    }
    Ok(rows)
}

/// Reads a fixture file with `Δf = 1 MHz`.
pub fn load_frequency_table(path: impl AsRef<Path>) -> Result<Vec<TableRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_frequency_table(&text, 1e6)
}

/// The built-in copy of the reference table.
pub fn builtin_table() -> Vec<TableRow> {
    parse_frequency_table(TABLE1_CSV, 1e6).expect("embedded table is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fv(v: &[f64]) -> FrequencyVector {
        FrequencyVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho1(&fv(&[1.0, -1.0])), 8.0);
        assert_eq!(rho1(&fv(&[1.0, -2.0, 1.0])), 36.0);
        assert_eq!(rho1(&fv(&[2.5; 5])), 0.0);
        assert_eq!(rho2(&fv(&[1.0, -2.0, 1.0])), 0.0);
        assert_eq!(rho2(&fv(&[1.0, -1.0])), -4.0);
        assert_eq!(rho2(&fv(&[-3.0; 4])), 0.0);
    }

    #[test]
    fn rho2_closed_form() {
        let k = fv(&[0.3, 1.7, -2.2, 4.0, 0.0, -0.9]);
        let m = k.len() as f64;
        let s_mk: f64 = k
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, v)| (i + 1) as f64 * v)
            .sum();
        let s_m = m * (m + 1.0) / 2.0;
        assert_relative_eq!(
            rho2(&k),
            2.0 * (m * s_mk - s_m * k.sum()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn gram_constant_examples() {
        assert_eq!(taylor_gram_constant(1), 0.0);
        assert_eq!(taylor_gram_constant(2), 2.0);
        assert_eq!(taylor_gram_constant(16), 10880.0);
    }

    #[test]
    fn design_matrix_small_cases() {
        let a2 = build_design_matrix(2).unwrap();
        assert!(a2.max_abs() < 1e-12);

        let a3 = build_design_matrix(3).unwrap();
        let u = [1.0, -2.0, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(a3.get(i, j), 12.0 * u[i] * u[j], epsilon = 1e-9);
            }
        }
        assert!(build_design_matrix(1).is_err());
    }

    #[test]
    fn design_matrix_top_eigenpair_m3() {
        let eig = symmetric_eigen(&build_design_matrix(3).unwrap(), EIGEN_TOL).unwrap();
        assert_relative_eq!(eig.values[0], 72.0, epsilon = 1e-9);
        let v = &eig.vectors[0];
        let sign = v[0].signum();
        let expected = [1.0, -2.0, 1.0].map(|x: f64| x / 6f64.sqrt());
        for (a, b) in v.iter().zip(expected) {
            assert_relative_eq!(sign * a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn generate_m3_is_unique_direction() {
        for method in [GenerationMethod::Projection, GenerationMethod::Eigen] {
            let k = generate_k(3, 6.0, method, 11).unwrap();
            let sign = k.as_slice()[0].signum();
            for (a, b) in k.as_slice().iter().zip([1.0, -2.0, 1.0]) {
                assert_relative_eq!(sign * a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn generate_rejects_small_arrays() {
        for method in [GenerationMethod::Projection, GenerationMethod::Eigen] {
            assert!(matches!(
                generate_k(2, 5.0, method, 0),
                Err(Error::Infeasible(_))
            ));
        }
        assert!(generate_k(5, 0.0, GenerationMethod::Projection, 0).is_err());
    }

    #[test]
    fn generate_m16_postconditions_and_determinism() {
        for method in [GenerationMethod::Projection, GenerationMethod::Eigen] {
            let k = generate_k(16, 10405.0, method, 42).unwrap();
            assert_relative_eq!(k.energy(), 10405.0, max_relative = 1e-9);
            let tol = 1e-9 * 10405f64.sqrt();
            assert!(k.sum().abs() < tol);
            let centred: f64 = k
                .as_slice()
                .iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0 - 8.5) * v)
                .sum();
            assert!(centred.abs() < tol);
            assert_eq!(k, generate_k(16, 10405.0, method, 42).unwrap());
            assert_ne!(k, generate_k(16, 10405.0, method, 43).unwrap());
        }
    }

    #[test]
    fn eigen_basis_dimension() {
        let g = KGenerator::new(10, GenerationMethod::Eigen).unwrap();
        assert_eq!(g.basis_len(), 8);
    }

    #[test]
    fn table_values() {
        let rows = builtin_table();
        assert_eq!(rows.len(), 3);
        let first = &rows[0];
        assert_eq!(first.label, "K10405");
        assert_eq!(first.nominal_k(), Some(10405.0));
        assert_eq!(first.k.len(), 16);
        assert!((first.k.energy() - 10405.0).abs() / 10405.0 < 0.005);
        assert_relative_eq!(first.k.energy(), 10401.8429, epsilon = 1e-6);
        assert_relative_eq!(first.k.sum(), 0.03, epsilon = 1e-9);
        assert_relative_eq!(first.span_mhz(), 90.0, epsilon = 1e-9);
    }

    #[test]
    fn table_scales_by_delta_f() {
        let rows = parse_frequency_table(TABLE1_CSV, 0.5e6).unwrap();
        assert_relative_eq!(rows[0].k.as_slice()[0], -30.4, epsilon = 1e-12);
    }

    #[test]
    fn table_errors() {
        assert!(matches!(
            parse_frequency_table("", 1e6),
            Err(Error::Parse { .. })
        ));
        let header = TABLE1_CSV.lines().next().unwrap();
        assert!(matches!(
            parse_frequency_table(header, 1e6),
            Err(Error::Parse { row: 1, .. })
        ));

        let short = format!("{header}\nK1,1,2,3\n");
        match parse_frequency_table(&short, 1e6) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
        let bad = format!(
            "{header}\n{}\nK2,{}x\n",
            TABLE1_CSV.lines().nth(1).unwrap(),
            "1,".repeat(15)
        );
        match parse_frequency_table(&bad, 1e6) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            load_frequency_table("/nonexistent/table.csv"),
            Err(Error::Io { .. })
        ));
    }
}
