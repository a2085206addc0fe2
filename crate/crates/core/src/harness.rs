//! Monte Carlo and closed-form capacity evaluation, and the parameter sweeps
//! built on them.

use std::path::Path;

use serde::Serialize;

use crate::array::{correlation2, steering_vector, FrequencyVector};
use crate::error::{Error, Result};
use crate::freq::{load_frequency_table, KGenerator, TableRow};
use crate::par::Exec;
use crate::region::{beta_boundary, solve_m_min, SchemeKind};
use crate::rng;
use crate::scenario::{KSource, Mode, Scenario};
use crate::security::{
    an_vector, c_an_lb, c_lb, capacity_bob, capacity_eve_an, eta, secrecy_capacity, PowerConfig,
};

/// Power configuration a scheme actually transmits with.
pub fn scheme_power(power: &PowerConfig, scheme: SchemeKind) -> Result<PowerConfig> {
    match scheme {
        SchemeKind::WithAn => Ok(*power),
        SchemeKind::WithoutAn => power.with_delta(1.0),
    }
}

/// Boundary correlation of the scenario: the override if set, the fixed
/// vector's value, or the mean over `beta_seeds` generated vectors.
pub fn scenario_beta(s: &Scenario, exec: Exec) -> Result<f64> {
    if let Some(beta) = s.beta_override {
        return Ok(beta);
    }
    match &s.k_source {
        KSource::Fixed { k, .. } => beta_boundary(&s.array, k, &s.bob, &s.region),
        KSource::Generated {
            k_target,
            method,
            seed,
        } => {
            let n = s.beta_seeds.max(1);
            let generator = KGenerator::new(s.array.elements, *method)?;
            let betas = exec.map(n, |i| {
                let k = generator.generate(*k_target, &mut rng::stream(*seed, i as u64))?;
                beta_boundary(&s.array, &k, &s.bob, &s.region)
            });
            let betas = betas.into_iter().collect::<Result<Vec<f64>>>()?;
            Ok(betas.iter().sum::<f64>() / n as f64)
        }
    }
}

/// Closed-form lower bound for a known boundary correlation.
pub fn lb_for_beta(
    power: &PowerConfig,
    elements: usize,
    beta: f64,
    scheme: SchemeKind,
) -> Result<f64> {
    match scheme {
        SchemeKind::WithAn => Ok(c_an_lb(power, beta, eta(elements)?)),
        SchemeKind::WithoutAn => Ok(c_lb(power, beta)),
    }
}

pub fn lb_capacity(s: &Scenario, scheme: SchemeKind) -> Result<f64> {
    let beta = scenario_beta(s, Exec::default())?;
    lb_for_beta(&s.power, s.array.elements, beta, scheme)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

pub fn mc_capacity(
    s: &Scenario,
    scheme: SchemeKind,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    mc_capacity_with(s, scheme, trials, seed, Exec::default())
}

/// Mean exact secrecy capacity over `trials` realizations of the frequency
/// vector (when generated) and the AN direction. Trial `t` draws from stream
/// `t` of `seed`, so the estimate does not depend on `exec`.
pub fn mc_capacity_with(
    s: &Scenario,
    scheme: SchemeKind,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::domain("Monte Carlo needs at least one trial"));
    }
    let power = scheme_power(&s.power, scheme)?;
    if scheme == SchemeKind::WithAn && s.array.elements < 2 {
        return Err(Error::domain(
            "artificial noise needs at least two elements",
        ));
    }
    let generator = match &s.k_source {
        KSource::Generated { method, .. } => Some(KGenerator::new(s.array.elements, *method)?),
        KSource::Fixed { .. } => None,
    };
    let cb = capacity_bob(&power);

    let samples = exec.map(trials, |t| -> Result<f64> {
        let mut rng = rng::stream(seed, t as u64);
        let drawn;
        let k: &FrequencyVector = match (&s.k_source, &generator) {
            (KSource::Fixed { k, .. }, _) => k,
            (KSource::Generated { k_target, .. }, Some(g)) => {
                drawn = g.generate(*k_target, &mut rng)?;
                &drawn
            }
            (KSource::Generated { .. }, None) => {
                unreachable!("generator built for generated source")
            }
        };
        let corr2 = correlation2(&s.array, k, &s.bob, &s.eve)?;
        let an2 = match scheme {
            SchemeKind::WithoutAn => 0.0,
            SchemeKind::WithAn => {
                let hb = steering_vector(&s.array, k, &s.bob)?;
                let he = steering_vector(&s.array, k, &s.eve)?;
                let w = loop {
                    let z = rng::complex_gaussian(&mut rng, s.array.elements);
                    match an_vector(&hb, &z) {
                        Err(Error::RetryRequired(_)) => continue,
                        other => break other?,
                    }
                };
                he.inner(&w).norm_sqr()
            }
        };
        Ok(secrecy_capacity(cb, capacity_eve_an(&power, corr2, an2)))
    });
    let samples = samples.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(summarize(&samples))
}

fn summarize(samples: &[f64]) -> McEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return McEstimate { mean, std_err: 0.0 };
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    McEstimate {
        mean,
        std_err: (var / n).sqrt(),
    }
}

// ---- sweeps ----

/// A named column of a sweep; `None` marks an infeasible point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMeta {
    pub sweep: String,
    pub mode: Mode,
    pub seed: u64,
    pub trials: usize,
    pub schemes: Vec<SchemeKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub series: Vec<Series>,
    pub meta: SweepMeta,
}

impl SweepResult {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// The capacity (or M_min) series of a scheme.
    pub fn scheme_values(&self, scheme: SchemeKind) -> Option<&[Option<f64>]> {
        self.series(scheme.label()).map(|s| s.values.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub schemes: Vec<SchemeKind>,
    pub trials: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            schemes: SchemeKind::ALL.to_vec(),
            trials: 10_000,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("sweep grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(
            "sweep grid must be finite and strictly increasing",
        ));
    }
    Ok(())
}

/// Inclusive arithmetic grid `start, start+step, ..., stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(Error::domain(format!("bad grid {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // round away accumulated error so axis values print cleanly
    Ok((0..n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Evaluates every scheme at each scenario, in the scenario's mode. Grid
/// points run sequentially; the parallel work sits inside each point.
fn capacity_series(scenarios: &[Scenario], opts: &SweepOptions, mode: Mode) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    for &scheme in &opts.schemes {
        let mut values = Vec::with_capacity(scenarios.len());
        let mut errs = Vec::with_capacity(scenarios.len());
        for s in scenarios {
            match mode {
                Mode::AnalyticLb => {
                    let beta = scenario_beta(s, opts.exec)?;
                    values.push(Some(lb_for_beta(&s.power, s.array.elements, beta, scheme)?));
                }
                Mode::MonteCarlo => {
                    let est = mc_capacity_with(s, scheme, opts.trials, opts.seed, opts.exec)?;
                    values.push(Some(est.mean));
                    errs.push(Some(est.std_err));
                }
            }
        }
        out.push(Series {
            name: scheme.label().to_string(),
            values,
        });
        if mode == Mode::MonteCarlo {
            out.push(Series {
                name: format!("{}_se", scheme.label()),
                values: errs,
            });
        }
    }
    Ok(out)
}

fn meta(sweep: &str, s: &Scenario, opts: &SweepOptions) -> SweepMeta {
    SweepMeta {
        sweep: sweep.to_string(),
        mode: s.mode,
        seed: opts.seed,
        trials: if s.mode == Mode::MonteCarlo {
            opts.trials
        } else {
            0
        },
        schemes: opts.schemes.clone(),
    }
}

/// When the boundary correlation does not depend on the swept parameter,
/// compute it once.
fn pin_beta(s: &Scenario, exec: Exec) -> Result<Scenario> {
    let mut pinned = s.clone();
    if s.mode == Mode::AnalyticLb {
        pinned.beta_override = Some(scenario_beta(s, exec)?);
    }
    Ok(pinned)
}

/// Capacity versus transmit power (dBm).
pub fn sweep_power(s: &Scenario, grid_dbm: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    check_grid(grid_dbm)?;
    let base = pin_beta(s, opts.exec)?;
    let scenarios = grid_dbm
        .iter()
        .map(|&pt| {
            let mut x = base.clone();
            x.power = s.power.with_pt_dbm(pt)?;
            Ok(x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis_name: "pt_dbm".into(),
        axis: grid_dbm.to_vec(),
        series: capacity_series(&scenarios, opts, s.mode)?,
        meta: meta("power", s, opts),
    })
}

/// Capacity versus the power allocation factor. The no-AN scheme ignores
/// the factor and gives a flat reference line.
pub fn sweep_delta(s: &Scenario, grid: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    check_grid(grid)?;
    let base = pin_beta(s, opts.exec)?;
    let scenarios = grid
        .iter()
        .map(|&d| {
            let mut x = base.clone();
            x.power = s.power.with_delta(d)?;
            Ok(x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis_name: "delta".into(),
        axis: grid.to_vec(),
        series: capacity_series(&scenarios, opts, s.mode)?,
        meta: meta("delta", s, opts),
    })
}

/// Capacity for each frequency-table row, keyed by the row's nominal K.
pub fn sweep_bandwidth(
    s: &Scenario,
    rows: &[TableRow],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let mut axis = Vec::with_capacity(rows.len());
    let mut scenarios = Vec::with_capacity(rows.len());
    for row in rows {
        axis.push(row.nominal_k().unwrap_or_else(|| row.k.energy()));
        scenarios.push(s.clone().with_fixture(row)?);
    }
    check_grid(&axis)?;
    Ok(SweepResult {
        axis_name: "k".into(),
        axis,
        series: capacity_series(&scenarios, opts, s.mode)?,
        meta: meta("bandwidth", s, opts),
    })
}

/// Minimum integer element count versus the target secrecy rate. Infeasible
/// rates become gaps; if no point is feasible at all the sweep fails.
pub fn sweep_rate(s: &Scenario, grid_bits: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    check_grid(grid_bits)?;
    let mut series = Vec::new();
    let mut last_infeasible = None;
    for &scheme in &opts.schemes {
        let power = scheme_power(&s.power, scheme)?;
        let points = opts.exec.map(grid_bits.len(), |i| {
            solve_m_min(
                grid_bits[i],
                &power,
                &s.region,
                s.bob.theta_rad,
                &s.array,
                scheme,
            )
        });
        let mut values = Vec::with_capacity(points.len());
        for p in points {
            match p {
                Ok(m) => values.push(Some(m as f64)),
                Err(e @ Error::Infeasible(_)) => {
                    last_infeasible = Some(e);
                    values.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        series.push(Series {
            name: scheme.label().to_string(),
            values,
        });
    }
    if series.iter().all(|s| s.values.iter().all(Option::is_none)) {
        return Err(last_infeasible.unwrap_or_else(|| Error::Infeasible("no feasible rate".into())));
    }
    let mut m = meta("rate", s, opts);
    m.mode = Mode::AnalyticLb;
    m.trials = 0;
    Ok(SweepResult {
        axis_name: "rs_bits".into(),
        axis: grid_bits.to_vec(),
        series,
        meta: m,
    })
}

// ---- fixture validation ----

/// Reference bandwidth (MHz) for each nominal K of the frequency table.
pub const FIXTURE_SPANS_MHZ: [(f64, f64); 3] =
    [(10405.0, 90.0), (12905.0, 100.0), (15405.0, 110.0)];
pub const FIXTURE_K_REL_TOL: f64 = 0.005;
pub const FIXTURE_SPAN_TOL_MHZ: f64 = 2.0;
pub const FIXTURE_SUM_TOL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureCheck {
    pub label: String,
    pub check: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureReport {
    pub checks: Vec<FixtureCheck>,
}

impl FixtureReport {
    pub fn all_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FixtureCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub fn validate_rows(rows: &[TableRow]) -> FixtureReport {
    let mut checks = Vec::new();
    for row in rows {
        let nominal = row.nominal_k().unwrap_or(f64::NAN);
        let span_target = FIXTURE_SPANS_MHZ
            .iter()
            .find(|(k, _)| *k == nominal)
            .map(|(_, s)| *s)
            .unwrap_or(f64::NAN);
        let energy = row.k.energy();
        let label = row.label.clone();
        checks.push(FixtureCheck {
            label: label.clone(),
            check: "k_energy",
            value: energy,
            expected: nominal,
            tolerance: FIXTURE_K_REL_TOL,
            pass: ((energy - nominal) / nominal).abs() <= FIXTURE_K_REL_TOL,
        });
        let span = row.span_mhz();
        checks.push(FixtureCheck {
            label: label.clone(),
            check: "span_mhz",
            value: span,
            expected: span_target,
            tolerance: FIXTURE_SPAN_TOL_MHZ,
            pass: (span - span_target).abs() <= FIXTURE_SPAN_TOL_MHZ,
        });
        let sum = row.k.sum();
        checks.push(FixtureCheck {
            label,
            check: "k_sum",
            value: sum,
            expected: 0.0,
            tolerance: FIXTURE_SUM_TOL,
            pass: sum.abs() <= FIXTURE_SUM_TOL,
        });
    }
    FixtureReport { checks }
}

pub fn validate_fixtures(path: impl AsRef<Path>) -> Result<FixtureReport> {
    Ok(validate_rows(&load_frequency_table(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::Location;
    use crate::freq::builtin_table;
    use crate::security::c_an_lb;
    use approx::assert_relative_eq;

    fn fixture_scenario(label: &str) -> Scenario {
        let row = builtin_table()
            .into_iter()
            .find(|r| r.label == label)
            .unwrap();
        Scenario::defaults(16).unwrap().with_fixture(&row).unwrap()
    }

    #[test]
    fn eve_at_bob_without_an_gives_zero() {
        let mut s = fixture_scenario("K10405");
        s.eve = s.bob;
        let est = mc_capacity(&s, SchemeKind::WithoutAn, 50, 1).unwrap();
        assert!(est.mean.abs() < 1e-12);
        assert_eq!(est.std_err, 0.0);

        let mut g = Scenario::defaults(16).unwrap();
        g.eve = g.bob;
        g.power = g.power.with_delta(1.0).unwrap();
        assert!(
            mc_capacity(&g, SchemeKind::WithAn, 50, 1)
                .unwrap()
                .mean
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn mc_is_reproducible() {
        let s = Scenario::defaults(16).unwrap();
        let a = mc_capacity(&s, SchemeKind::WithAn, 500, 9).unwrap();
        let b = mc_capacity(&s, SchemeKind::WithAn, 500, 9).unwrap();
        assert_eq!(a, b);
        let seq = mc_capacity_with(&s, SchemeKind::WithAn, 500, 9, Exec::Sequential).unwrap();
        assert_eq!(a.mean.to_bits(), seq.mean.to_bits());
        assert_eq!(a.std_err.to_bits(), seq.std_err.to_bits());
        let other = mc_capacity(&s, SchemeKind::WithAn, 500, 10).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn mc_rejects_zero_trials() {
        let s = Scenario::defaults(16).unwrap();
        assert!(matches!(
            mc_capacity(&s, SchemeKind::WithAn, 0, 0),
            Err(Error::Domain(_))
        ));
    }

    // Mean secrecy capacity, K10405 row, defaults at 20 dBm, 10^4 trials,
    // seed 2024. Frozen from the first run.
    const MC_K10405_20DBM: f64 = 4.753_933_463_992_773;

    #[test]
    fn mc_fixture_regression() {
        let mut s = fixture_scenario("K10405");
        s.power = s.power.with_pt_dbm(20.0).unwrap();
        let est = mc_capacity(&s, SchemeKind::WithAn, 10_000, 2024).unwrap();
        assert!(est.mean > 0.0);
        assert_relative_eq!(est.mean, MC_K10405_20DBM, max_relative = 1e-12);
    }

    #[test]
    fn lb_examples() {
        let mut s = Scenario::defaults(16).unwrap();
        s.beta_override = Some(0.0);
        assert_relative_eq!(
            lb_capacity(&s, SchemeKind::WithAn).unwrap(),
            capacity_bob(&s.power),
            max_relative = 1e-12
        );

        s.beta_override = Some(0.4);
        assert_relative_eq!(
            lb_capacity(&s, SchemeKind::WithAn).unwrap(),
            5.3131,
            epsilon = 1e-4
        );

        s.power = s.power.with_delta(1.0).unwrap();
        assert_relative_eq!(
            lb_capacity(&s, SchemeKind::WithAn).unwrap(),
            lb_capacity(&s, SchemeKind::WithoutAn).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn lb_fixture_uses_single_beta() {
        let s = fixture_scenario("K10405");
        let beta = beta_boundary(
            &s.array,
            match &s.k_source {
                KSource::Fixed { k, .. } => k,
                _ => unreachable!(),
            },
            &s.bob,
            &s.region,
        )
        .unwrap();
        assert_relative_eq!(
            lb_capacity(&s, SchemeKind::WithAn).unwrap(),
            c_an_lb(&s.power, beta, 1.0 / 15.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn seed_averaged_beta_is_exec_invariant() {
        let s = Scenario::defaults(24).unwrap();
        let a = scenario_beta(&s, Exec::Sequential).unwrap();
        let b = scenario_beta(&s, Exec::Parallel).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn grids() {
        assert_eq!(linear_grid(0.0, 30.0, 1.0).unwrap().len(), 31);
        let d = linear_grid(0.05, 0.95, 0.05).unwrap();
        assert_eq!(d.len(), 19);
        assert_eq!(d[18], 0.95);
        assert_eq!(linear_grid(0.5, 6.0, 0.5).unwrap()[11], 6.0);
        assert!(linear_grid(1.0, 0.0, 1.0).is_err());
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn sweep_shapes() {
        let s = Scenario::defaults(16).unwrap();
        let opts = SweepOptions::default();
        let r = sweep_power(&s, &linear_grid(0.0, 10.0, 5.0).unwrap(), &opts).unwrap();
        assert_eq!(r.axis.len(), 3);
        assert_eq!(r.series.len(), 2);
        assert!(r.series.iter().all(|x| x.values.len() == 3));

        let mut mc = s.clone();
        mc.mode = Mode::MonteCarlo;
        let opts = SweepOptions {
            trials: 50,
            ..Default::default()
        };
        let r = sweep_delta(&mc, &[0.2, 0.5], &opts).unwrap();
        assert_eq!(r.series.len(), 4);
        assert!(r.series("with_an_se").is_some());
        assert_eq!(r.meta.trials, 50);
    }

    #[test]
    fn sweep_rate_gaps_and_all_infeasible() {
        let s = Scenario::defaults(16).unwrap();
        let opts = SweepOptions::default();
        let r = sweep_rate(&s, &[1.0, 9.5, 10.5], &opts).unwrap();
        let an = r.scheme_values(SchemeKind::WithAn).unwrap();
        let no = r.scheme_values(SchemeKind::WithoutAn).unwrap();
        assert!(an[0].is_some() && an[1].is_none() && an[2].is_none());
        assert!(no[1].is_some() && no[2].is_none());

        let mut s = s;
        s.power = s.power.with_pt_dbm(40.0).unwrap();
        let opts = SweepOptions {
            schemes: vec![SchemeKind::WithoutAn],
            ..Default::default()
        };
        assert!(matches!(
            sweep_rate(&s, &[14.0, 15.0], &opts),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn bandwidth_requires_matching_array() {
        let s = Scenario::defaults(8).unwrap();
        assert!(sweep_bandwidth(&s, &builtin_table(), &SweepOptions::default()).is_err());
    }

    #[test]
    fn fixture_report() {
        let report = validate_rows(&builtin_table());
        assert_eq!(report.checks.len(), 9);
        assert!(
            report.all_pass(),
            "{:?}",
            report.failures().collect::<Vec<_>>()
        );

        let mut rows = builtin_table();
        rows[1].increments_mhz[3] = 80.0;
        let report = validate_rows(&rows);
        let failed: Vec<_> = report.failures().collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].label, "K12905");
        assert!(validate_fixtures("/does/not/exist.csv").is_err());
    }

    #[test]
    fn location_defaults() {
        let s = Scenario::defaults(16).unwrap();
        assert_eq!(s.eve, Location::from_degrees(108.0, 40.0).unwrap());
    }
}
