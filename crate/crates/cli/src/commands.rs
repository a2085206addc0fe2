use serde::Serialize;

use rfda_core::array::{beampattern_exact, beampattern_taylor, FrequencyVector, Location};
use rfda_core::freq::{builtin_table, generate_k, load_frequency_table, GenerationMethod};
use rfda_core::harness::{
    lb_capacity, linear_grid, mc_capacity, scenario_beta, sweep_bandwidth, sweep_delta,
    sweep_power, sweep_rate, validate_rows, SweepOptions, SweepResult,
};
use rfda_core::output::{config_hash, write_run};
use rfda_core::par::Exec;
use rfda_core::region::{ellipse_semi_axes, k_min, m_min, SchemeKind};
use rfda_core::scenario::{ConfigFile, KSource, KSourceSpec, Mode, Scenario};
use rfda_core::{Error, Result};

use crate::{Cli, Command, Global, Overrides, SweepCommon, SweepKind};

/// Everything that determines a sweep's output; hashed into the run id.
#[derive(Serialize)]
struct RunRecord {
    command: String,
    config: ConfigFile,
    grid: Vec<f64>,
    schemes: Vec<SchemeKind>,
    trials: Option<usize>,
    seed: u64,
}

fn base_config(g: &Global) -> Result<ConfigFile> {
    let mut cfg = match &g.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(m) = g.mode {
        cfg.mode = m.into();
    }
    if let (Some(seed), KSourceSpec::Generated(spec)) = (g.seed, &mut cfg.k_source) {
        spec.seed = seed;
    }
    Ok(cfg)
}

fn apply(cfg: &mut ConfigFile, over: &Overrides) {
    if let Some(m) = over.elements {
        cfg.array.m = m;
    }
    if let Some(p) = over.pt_dbm {
        cfg.power.pt_dbm = p;
    }
    if let Some(d) = over.delta {
        cfg.power.delta = d;
    }
    if let Some(label) = &over.fixture {
        cfg.k_source = KSourceSpec::Fixture(label.clone());
    }
}

fn k_energy(s: &Scenario) -> f64 {
    match &s.k_source {
        KSource::Generated { k_target, .. } => *k_target,
        KSource::Fixed { k, .. } => k.energy(),
    }
}

fn scenario_k(s: &Scenario) -> Result<FrequencyVector> {
    match &s.k_source {
        KSource::Generated {
            k_target,
            method,
            seed,
        } => generate_k(s.array.elements, *k_target, *method, *seed),
        KSource::Fixed { k, .. } => Ok(k.clone()),
    }
}

fn arg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    let mut cfg = base_config(g)?;
    match &cli.command {
        Command::Mmin {
            beta,
            dtheta_deg,
            theta_b_deg,
        } => {
            if let Some(d) = dtheta_deg {
                cfg.region.dtheta_deg = *d;
            }
            if let Some(t) = theta_b_deg {
                cfg.bob.theta_deg = *t;
            }
            let s = cfg.resolve()?;
            println!("{:.2}", m_min(*beta, &s.region, s.bob.theta_rad, &s.array)?);
        }
        Command::Kmin {
            beta,
            dr_m,
            elements,
            dtheta_deg,
            theta_b_deg,
        } => {
            if let Some(d) = dr_m {
                cfg.region.dr_m = *d;
            }
            if let Some(d) = dtheta_deg {
                cfg.region.dtheta_deg = *d;
            }
            if let Some(t) = theta_b_deg {
                cfg.bob.theta_deg = *t;
            }
            let s = cfg.resolve()?;
            let m = match elements {
                Some(m) => *m,
                None => m_min(*beta, &s.region, s.bob.theta_rad, &s.array)?,
            };
            println!("{:.2}", k_min(*beta, &s.region, &s.array, m)?);
        }
        Command::Region { beta, over } => {
            apply(&mut cfg, over);
            let s = cfg.resolve()?;
            let beta = match beta {
                Some(b) => *b,
                None => scenario_beta(&s, Exec::default())?,
            };
            let theta = s.bob.theta_rad;
            let (dr, dtheta) =
                ellipse_semi_axes(&s.array, s.array.elements, k_energy(&s), beta, theta)?;
            let m = m_min(beta, &s.region, theta, &s.array)?;
            println!("beta: {beta}");
            println!("delta_r_dagger_m: {dr}");
            println!("delta_theta_dagger_deg: {}", dtheta.to_degrees());
            println!("m_min: {m}");
            println!("k_min: {}", k_min(beta, &s.region, &s.array, m)?);
        }
        Command::GenK {
            elements,
            k_target,
            method,
        } => {
            if let Some(m) = elements {
                cfg.array.m = *m;
            }
            let cfg = cfg.normalized();
            let KSourceSpec::Generated(spec) = &cfg.k_source else {
                return Err(arg_err(
                    "gen-k needs a generated frequency source, not a fixture",
                ));
            };
            let target = k_target
                .or(spec.k_target)
                .expect("normalized config has a target");
            let method = method.map(GenerationMethod::from).unwrap_or(spec.method);
            let k = generate_k(cfg.array.m, target, method, spec.seed)?;
            println!("m,k");
            for (i, v) in k.as_slice().iter().enumerate() {
                println!("{},{v}", i + 1);
            }
        }
        Command::Beampattern {
            r_min,
            r_max,
            r_step,
            theta_min_deg,
            theta_max_deg,
            theta_step_deg,
            taylor,
            over,
        } => {
            apply(&mut cfg, over);
            let s = cfg.resolve()?;
            let k = scenario_k(&s)?;
            let (rb, tb) = (cfg.bob.r_m, cfg.bob.theta_deg);
            let ranges = linear_grid(
                r_min.unwrap_or((rb - 20.0).max(0.0)),
                r_max.unwrap_or(rb + 20.0),
                *r_step,
            )?;
            let thetas = linear_grid(
                theta_min_deg.unwrap_or((tb - 20.0).max(0.5)),
                theta_max_deg.unwrap_or((tb + 20.0).min(179.5)),
                *theta_step_deg,
            )?;
            let norm = (s.array.elements * s.array.elements) as f64;
            let mut out = String::from("range_m,theta_deg,power\n");
            for &r in &ranges {
                for &t in &thetas {
                    let probe = Location::from_degrees(r, t)?;
                    let g = if *taylor {
                        beampattern_taylor(&s.array, &k, &s.bob, &probe)?
                    } else {
                        beampattern_exact(&s.array, &k, &s.bob, &probe)?
                    };
                    out.push_str(&format!("{r},{t},{}\n", g / norm));
                }
            }
            print!("{out}");
        }
        Command::Capacity { scheme, over } => {
            apply(&mut cfg, over);
            let s = cfg.resolve()?;
            let seed = g.seed.unwrap_or(0);
            if s.mode == Mode::AnalyticLb {
                println!("beta: {}", scenario_beta(&s, Exec::default())?);
            }
            for sc in scheme.schemes() {
                match s.mode {
                    Mode::AnalyticLb => println!("{}: {}", sc.label(), lb_capacity(&s, sc)?),
                    Mode::MonteCarlo => {
                        let est = mc_capacity(&s, sc, g.trials, seed)?;
                        println!("{}: {} (se {})", sc.label(), est.mean, est.std_err);
                    }
                }
            }
        }
        Command::Sweep { kind } => return sweep(g, cfg, kind),
        Command::ValidateFixtures { fixture } => {
            let rows = match fixture {
                Some(p) => load_frequency_table(p)?,
                None => builtin_table(),
            };
            let report = validate_rows(&rows);
            for c in &report.checks {
                println!(
                    "[{}] {} {}: {} (expected {} ± {})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.label,
                    c.check,
                    c.value,
                    c.expected,
                    c.tolerance
                );
            }
            if !report.all_pass() {
                let labels: Vec<&str> = report.failures().map(|c| c.label.as_str()).collect();
                eprintln!("error: fixture checks failed for {labels:?}");
                return Ok(5);
            }
        }
    }
    Ok(0)
}

fn grid(c: &SweepCommon, default: (f64, f64, f64)) -> Result<Vec<f64>> {
    linear_grid(
        c.start.unwrap_or(default.0),
        c.stop.unwrap_or(default.1),
        c.step.unwrap_or(default.2),
    )
}

fn sweep(g: &Global, mut cfg: ConfigFile, kind: &SweepKind) -> Result<u8> {
    let common = match kind {
        SweepKind::Power(c) | SweepKind::Delta(c) | SweepKind::Bandwidth(c) => c,
        SweepKind::Rate { common, .. } => common,
    };
    apply(&mut cfg, &common.over);
    let cfg = cfg.normalized();
    let s = cfg.resolve()?;
    let opts = SweepOptions {
        schemes: common.scheme.schemes(),
        trials: g.trials,
        seed: g.seed.unwrap_or(0),
        ..Default::default()
    };
    let table = builtin_table();
    let (name, axis, result): (&str, Vec<f64>, Result<SweepResult>) = match kind {
        SweepKind::Power(c) => {
            let axis = grid(c, (0.0, 30.0, 1.0))?;
            ("power", axis.clone(), sweep_power(&s, &axis, &opts))
        }
        SweepKind::Delta(c) => {
            let axis = grid(c, (0.05, 0.95, 0.05))?;
            ("delta", axis.clone(), sweep_delta(&s, &axis, &opts))
        }
        SweepKind::Bandwidth(_) => {
            let axis = table.iter().filter_map(|r| r.nominal_k()).collect();
            ("bandwidth", axis, sweep_bandwidth(&s, &table, &opts))
        }
        SweepKind::Rate { common, rs } => {
            let axis = if rs.is_empty() {
                grid(common, (0.5, 6.0, 0.5))?
            } else {
                rs.clone()
            };
            ("rate", axis.clone(), sweep_rate(&s, &axis, &opts))
        }
    };
    let result = result?;
    let record = RunRecord {
        command: name.to_string(),
        config: cfg,
        grid: axis,
        schemes: opts.schemes.clone(),
        trials: (s.mode == Mode::MonteCarlo).then_some(opts.trials),
        seed: opts.seed,
    };
    let run_id = format!("{name}-{}", &config_hash(&record)[..12]);
    let dir = write_run(&g.out, &run_id, &record, &result, g.svg)?;
    println!("{}", dir.display());
    Ok(0)
}
