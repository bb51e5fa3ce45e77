//! Orchestration of the two-stage pipeline: size, robust frontier, price,
//! assess, plus the benchmark and sensitivity harnesses. Every emitted
//! report passes a self-validation pass (independent schedule audit, ledger
//! recomputation, price-invariance spot check) before it is written.

use crate::ammonia::{discretize_plan, fit_t_trans, QssPlan, TransitionFit, NM3_PER_KG_H2};
use crate::config::{ConfigError, ProfileSource, RunConfig};
use crate::economics::{self, Distribution, PriceSet};
use crate::pricing::{solve_pricing, PricingError, PricingOutcome};
use crate::profiles::{load_profiles, synthesize_profile, Profile, ProfileError, ProfileKind};
use crate::report::{
    bench_csv, bench_row_from, robust_csv, schedule_csv, sweep_csv, BenchRow, PriceJson,
    RunReport, SizesOut, SweepRow, TransitionReport, ValidationReport,
};
use crate::robust::{solve_robust, IgdtResult, RobustError};
use crate::sizing::{run_sizing, Overrides, Scenario, SizingError, SizingResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Sizing(#[from] SizingError),
    #[error(transparent)]
    Robust(#[from] RobustError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Econ(#[from] economics::EconError),
    #[error(transparent)]
    Ammonia(#[from] crate::ammonia::AmmoniaError),
    #[error("failed to write `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("self-validation failed before write: {0:?}")]
    Validation(Vec<String>),
    #[error("fit requires [fit] csv_path in the config")]
    FitUnconfigured,
}

impl PipelineError {
    /// Process exit code: 0 optimal, 2 infeasible, 3 solver limit,
    /// 4 config error, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Profile(_) | PipelineError::FitUnconfigured => 4,
            PipelineError::Sizing(SizingError::Infeasible { .. }) => 2,
            PipelineError::Pricing(PricingError::ErInfeasible { .. }) => 2,
            PipelineError::Sizing(SizingError::LimitNoIncumbent { .. }) => 3,
            _ => 1,
        }
    }
}

/// Loads profiles per the config: CSV file or the seeded synthesizer, with
/// FLH targets scaled from annual-equivalent values to the horizon.
pub fn profiles_from_config(cfg: &RunConfig) -> Result<(Profile, Profile), PipelineError> {
    let n = cfg.te.operation.n;
    let dt = cfg.te.operation.dt_h;
    match cfg.profiles.source {
        ProfileSource::Csv => {
            let path = cfg
                .profiles
                .csv_path
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid("profiles.csv_path missing".into()))?;
            Ok(load_profiles(path, n, dt)?)
        }
        ProfileSource::Synthetic => {
            let frac = cfg.te.horizon_frac();
            let wind = synthesize_profile(
                ProfileKind::Wind,
                cfg.profiles.wind_flh * frac,
                cfg.profiles.seed,
                n,
                dt,
            )?;
            let solar = synthesize_profile(
                ProfileKind::Solar,
                cfg.profiles.solar_flh * frac,
                cfg.profiles.seed,
                n,
                dt,
            )?;
            Ok((wind, solar))
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, PipelineError> {
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

/// Independent audit + ledger recomputation + price-invariance spot check.
fn self_validate(
    sizing: &SizingResult,
    wind: &Profile,
    solar: &Profile,
    cfg: &RunConfig,
    seed: u64,
) -> Result<ValidationReport, PipelineError> {
    let violations = crate::schedule::audit(
        &sizing.schedule,
        &sizing.capacities,
        &wind.values,
        &solar.values,
        &cfg.te,
        1e-6,
    );
    let dist = Distribution::greedy(&sizing.schedule);
    let probe = PriceSet::from_config(&cfg.te, 0.0, 0.0);
    let ledger = economics::ledger(&sizing.schedule, &sizing.capacities, &probe, &dist, &cfg.te)?;
    let dtr_tol = 1e-6 * sizing.dtr_rmb.abs().max(1.0);
    let ledger_consistent = (ledger.total - sizing.dtr_rmb).abs() <= dtr_tol;

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e1f);
    let samples: Vec<PriceSet> = (0..4)
        .map(|_| {
            PriceSet::from_config(
                &cfg.te,
                rng.gen_range(0.0..0.5),
                rng.gen_range(0.0..5.0),
            )
        })
        .collect();
    let spread = economics::proposition1_check(
        &sizing.schedule,
        &sizing.capacities,
        &dist,
        &cfg.te,
        &samples,
    )?;
    let prop1_rel_spread = spread / sizing.dtr_rmb.abs().max(1.0);

    let transition = transition_report(sizing, &cfg.te).ok();

    let mut all = violations;
    if !ledger_consistent {
        all.push(format!(
            "ledger total {} deviates from DTR {}",
            ledger.total, sizing.dtr_rmb
        ));
    }
    if prop1_rel_spread > 1e-6 {
        all.push(format!(
            "total revenue varies with inner prices (relative spread {prop1_rel_spread:.3e})"
        ));
    }
    if !all.is_empty() {
        return Err(PipelineError::Validation(all));
    }
    Ok(ValidationReport {
        schedule_violations: Vec::new(),
        ledger_consistent,
        prop1_rel_spread,
        transition,
    })
}

/// Expands the QSS plan through the first-order transition and reports how
/// the physical trajectory compares with the piecewise-constant schedule.
fn transition_report(
    sizing: &SizingResult,
    te: &crate::config::TechnoEconomicConfig,
) -> Result<TransitionReport, crate::ammonia::AmmoniaError> {
    let params = te.ammonia_params();
    let plan = QssPlan::new(sizing.schedule.setpoints.clone());
    let n = sizing.schedule.len();
    let dt = sizing.schedule.dt_h;
    let q_r = params.q_h2_rated.max(1e-12);
    let trajectory = discretize_plan(&plan, &params, n, dt)?;
    let mut max_step = 0.0_f64;
    for t in 1..n {
        max_step = max_step.max((trajectory[t] - trajectory[t - 1]).abs());
    }
    let max_dev = trajectory
        .iter()
        .zip(&sizing.schedule.q_out)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    Ok(TransitionReport {
        max_hourly_step_pu: max_step / q_r,
        max_dev_from_plan_pu: max_dev / q_r,
        ramp_ok: max_step <= params.r_plus.max(params.r_minus) * q_r * dt + 1e-9 * q_r,
    })
}

fn scenario_from_config(cfg: &RunConfig) -> Result<Scenario, PipelineError> {
    cfg.run
        .scenario
        .parse()
        .map_err(|e: String| PipelineError::Config(ConfigError::Invalid(e)))
}

/// Stage I only: size the system and emit the schedule.
pub fn cmd_size(cfg: &RunConfig, outdir: &Path) -> Result<BenchRow, PipelineError> {
    cfg.validate()?;
    let scenario = scenario_from_config(cfg)?;
    let (wind, solar) = profiles_from_config(cfg)?;
    let sizing = run_sizing(
        &cfg.te,
        &wind,
        &solar,
        &Overrides::for_scenario(scenario, &cfg.te),
        scenario,
        &cfg.solver.to_options(),
    )?;
    self_validate(&sizing, &wind, &solar, cfg, cfg.profiles.seed)?;
    let row = bench_row_from(&sizing, None);
    write_file(outdir, "size.json", &json_string(&row))?;
    write_file(outdir, "schedule.csv", &schedule_csv(&sizing.schedule))?;
    Ok(row)
}

/// The full pipeline: size, robust frontier per beta, price, assess.
pub fn cmd_run(cfg: &RunConfig, outdir: &Path) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    let start = Instant::now();
    let scenario = scenario_from_config(cfg)?;
    let (wind, solar) = profiles_from_config(cfg)?;
    let options = cfg.solver.to_options();
    let sizing = run_sizing(
        &cfg.te,
        &wind,
        &solar,
        &Overrides::for_scenario(scenario, &cfg.te),
        scenario,
        &options,
    )?;
    let validation = self_validate(&sizing, &wind, &solar, cfg, cfg.profiles.seed)?;

    let robust_rows: Vec<IgdtResult> = cfg
        .run
        .betas
        .par_iter()
        .map(|&beta| solve_robust(&sizing, beta, &cfg.te, &wind, &solar, &options, true))
        .collect::<Result<_, _>>()?;

    // prices are set on the deterministic schedule
    let pricing = match solve_pricing(&sizing, &cfg.te, &cfg.price_grid, &options) {
        Ok(outcome) => Some(outcome),
        Err(PricingError::ErInfeasible { relaxed, .. }) => {
            log::warn!("minimum earnings ratios unreachable; reporting the relaxed balance");
            Some(*relaxed)
        }
        Err(PricingError::ZeroInvestment { investor }) => {
            log::warn!("{investor} has zero investment; skipping the pricing stage");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let report = RunReport {
        scenario,
        sizes: SizesOut::from(&sizing.capacities),
        dtr_1e4_rmb: sizing.dtr_1e4_rmb(),
        rates: sizing.schedule.exchange_rates(),
        flh_ae_h: sizing.schedule.flh_ae(&sizing.capacities),
        m_nh3_t: sizing.schedule.m_nh3_t,
        prices: pricing
            .as_ref()
            .map(|p| PriceJson::from_outcome(p, sizing.schedule.dt_h)),
        ledger: pricing.as_ref().map(|p| p.ledger),
        er_system: pricing
            .as_ref()
            .map(|p| p.ledger.system_er())
            .unwrap_or_else(|| crate::report::system_er_without_prices(&sizing)),
        robust: robust_rows.clone(),
        solver: sizing.diag.clone(),
        validation,
        wall_s: start.elapsed().as_secs_f64(),
    };
    write_file(outdir, "run_report.json", &json_string(&report))?;
    write_file(outdir, "schedule.csv", &schedule_csv(&sizing.schedule))?;
    if !robust_rows.is_empty() {
        write_file(outdir, "robust.csv", &robust_csv(&robust_rows))?;
    }
    Ok(report)
}

/// Robust frontier only.
pub fn cmd_robust(cfg: &RunConfig, outdir: &Path) -> Result<Vec<IgdtResult>, PipelineError> {
    cfg.validate()?;
    let scenario = scenario_from_config(cfg)?;
    let (wind, solar) = profiles_from_config(cfg)?;
    let options = cfg.solver.to_options();
    let betas = if cfg.run.betas.is_empty() {
        vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    } else {
        cfg.run.betas.clone()
    };
    let sizing = run_sizing(
        &cfg.te,
        &wind,
        &solar,
        &Overrides::for_scenario(scenario, &cfg.te),
        scenario,
        &options,
    )?;
    self_validate(&sizing, &wind, &solar, cfg, cfg.profiles.seed)?;
    let rows: Vec<IgdtResult> = betas
        .par_iter()
        .map(|&beta| solve_robust(&sizing, beta, &cfg.te, &wind, &solar, &options, true))
        .collect::<Result<_, _>>()?;
    write_file(outdir, "robust.csv", &robust_csv(&rows))?;
    Ok(rows)
}

/// Pricing stage only (sizes first, then prices).
pub fn cmd_price(cfg: &RunConfig, outdir: &Path) -> Result<PriceJson, PipelineError> {
    cfg.validate()?;
    let scenario = scenario_from_config(cfg)?;
    let (wind, solar) = profiles_from_config(cfg)?;
    let options = cfg.solver.to_options();
    let sizing = run_sizing(
        &cfg.te,
        &wind,
        &solar,
        &Overrides::for_scenario(scenario, &cfg.te),
        scenario,
        &options,
    )?;
    self_validate(&sizing, &wind, &solar, cfg, cfg.profiles.seed)?;
    let outcome = solve_pricing(&sizing, &cfg.te, &cfg.price_grid, &options)?;
    let json = PriceJson::from_outcome(&outcome, sizing.schedule.dt_h);
    write_file(outdir, "price.json", &json_string(&json))?;
    Ok(json)
}

/// One benchmark scenario end to end: size, then price with relaxation
/// fallback so the comparison row always carries earnings ratios.
pub fn run_benchmark(
    scenario: Scenario,
    cfg: &RunConfig,
    wind: &Profile,
    solar: &Profile,
) -> Result<BenchRow, PipelineError> {
    let options = cfg.solver.to_options();
    let sizing = run_sizing(
        &cfg.te,
        wind,
        solar,
        &Overrides::for_scenario(scenario, &cfg.te),
        scenario,
        &options,
    )?;
    self_validate(&sizing, wind, solar, cfg, cfg.profiles.seed)?;
    let pricing: Option<PricingOutcome> =
        match solve_pricing(&sizing, &cfg.te, &cfg.price_grid, &options) {
            Ok(outcome) => Some(outcome),
            Err(PricingError::ErInfeasible { relaxed, .. }) => Some(*relaxed),
            Err(PricingError::ZeroInvestment { .. }) => None,
            Err(e) => return Err(e.into()),
        };
    Ok(bench_row_from(&sizing, pricing.as_ref()))
}

/// The scenario comparison table; scenarios solve concurrently but the
/// table order is fixed.
pub fn cmd_bench(cfg: &RunConfig, outdir: &Path) -> Result<Vec<BenchRow>, PipelineError> {
    cfg.validate()?;
    let (wind, solar) = profiles_from_config(cfg)?;
    let rows: Vec<BenchRow> = Scenario::ALL
        .par_iter()
        .map(|&s| run_benchmark(s, cfg, &wind, &solar))
        .collect::<Result<_, _>>()?;
    write_file(outdir, "bench.csv", &bench_csv(&rows))?;
    Ok(rows)
}

/// Sensitivity of the design to the ammonia scheduling period.
pub fn cmd_sweep(cfg: &RunConfig, outdir: &Path) -> Result<Vec<SweepRow>, PipelineError> {
    cfg.validate()?;
    let scenario = scenario_from_config(cfg)?;
    let (wind, solar) = profiles_from_config(cfg)?;
    let options = cfg.solver.to_options();
    let sweep = cfg.resolved_sweep();
    let rows: Vec<SweepRow> = sweep
        .par_iter()
        .map(|&dtas| -> Result<SweepRow, PipelineError> {
            let mut te = cfg.te.clone();
            te.operation.dtas_h = dtas;
            te.validate()?;
            let sizing = run_sizing(
                &te,
                &wind,
                &solar,
                &Overrides::for_scenario(scenario, &te),
                scenario,
                &options,
            )?;
            Ok(SweepRow {
                dtas_h: dtas,
                sizes: SizesOut::from(&sizing.capacities),
                rates: sizing.schedule.exchange_rates(),
                flh_ae_h: sizing.schedule.flh_ae(&sizing.capacities),
                dtr_1e4_rmb: sizing.dtr_1e4_rmb(),
            })
        })
        .collect::<Result<_, _>>()?;
    write_file(outdir, "sweep.csv", &sweep_csv(&rows))?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub t_trans_h: f64,
    pub rmse: f64,
    pub unit: String,
    pub samples: usize,
}

/// Identifies the transition time constant from the observed trajectory
/// referenced by the config.
pub fn cmd_fit(cfg: &RunConfig, outdir: &Path) -> Result<FitReport, PipelineError> {
    let fit_cfg = &cfg.fit;
    let path = fit_cfg
        .csv_path
        .as_ref()
        .ok_or(PipelineError::FitUnconfigured)?;
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut observed = Vec::new();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?
        .clone();
    let flow_col = headers
        .iter()
        .position(|h| h.trim() == "flow")
        .ok_or_else(|| ConfigError::Invalid("fit CSV needs a `flow` column".into()))?;
    for record in reader.records() {
        let record = record.map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let v: f64 = record
            .get(flow_col)
            .ok_or_else(|| ConfigError::Invalid("short fit row".into()))?
            .trim()
            .parse()
            .map_err(|e| ConfigError::Invalid(format!("fit CSV: {e}")))?;
        observed.push(v);
    }
    let to_nm3 = match fit_cfg.unit.as_str() {
        "kg_per_h" => NM3_PER_KG_H2,
        "nm3_per_h" => 1.0,
        other => {
            return Err(
                ConfigError::Invalid(format!("unknown fit unit `{other}`")).into(),
            )
        }
    };
    let canon: Vec<f64> = observed.iter().map(|v| v * to_nm3).collect();
    let TransitionFit { t_trans_h, rmse } = fit_t_trans(
        &canon,
        fit_cfg.q_start * to_nm3,
        fit_cfg.q_end * to_nm3,
    )?;
    let report = FitReport {
        t_trans_h,
        // back in the input's unit
        rmse: rmse / to_nm3,
        unit: fit_cfg.unit.clone(),
        samples: observed.len(),
    };
    write_file(outdir, "fit.json", &json_string(&report))?;
    Ok(report)
}
