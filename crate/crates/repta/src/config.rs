//! Run configuration: techno-economic parameters, profile sources, solver
//! options. Every field has a default, so an empty TOML file runs the
//! bundled synthetic case.

use crate::ammonia::AmmoniaParams;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Hours in the reference year used to annualize sub-year horizons.
pub const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Operation {
    /// Number of steps in the planning horizon.
    pub n: usize,
    /// Hours per step.
    pub dt_h: f64,
    /// Ammonia scheduling period (hours).
    pub dtas_h: f64,
    /// Time constant of the setpoint transition (hours).
    pub t_trans_h: f64,
    /// Electrolyzer conversion, kWh per Nm3 of hydrogen.
    pub kappa_h2_kwh_per_nm3: f64,
    pub eta_ae_min: f64,
    pub eta_ae_max: f64,
    /// Haber-Bosch synthesis power, MWh per tonne of ammonia.
    pub kappa_nh3_mwh_per_t: f64,
    /// Nitrogen supply power, MWh per tonne of nitrogen.
    pub kappa_n2_mwh_per_t: f64,
    pub eta_as_min: f64,
    pub eta_as_max: f64,
    /// Ammonia ramp limits, per-unit load per hour.
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub eta_hs_min: f64,
    pub eta_hs_max: f64,
    /// Single electrolyzer unit size (MW).
    pub c_ae_single_mw: f64,
    /// Hydrogen-to-ammonia conversion factor (t per Nm3).
    pub c_h2ma_t_per_nm3: f64,
}

impl Default for Operation {
    fn default() -> Self {
        Self {
            n: 8760,
            dt_h: 1.0,
            dtas_h: 24.0,
            t_trans_h: 2.0,
            kappa_h2_kwh_per_nm3: 5.0,
            eta_ae_min: 0.05,
            eta_ae_max: 1.20,
            kappa_nh3_mwh_per_t: 0.64,
            kappa_n2_mwh_per_t: 0.24,
            eta_as_min: 0.30,
            eta_as_max: 1.10,
            ramp_up: 0.20,
            ramp_down: 0.20,
            eta_hs_min: 0.10,
            eta_hs_max: 0.90,
            c_ae_single_mw: 5.0,
            c_h2ma_t_per_nm3: 5.060e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FacilityCost {
    /// Unit investment cost. RMB/kW for WT/PV/AE, RMB/Nm3 for HS,
    /// RMB per nominal block for AS.
    pub unit_cost: f64,
    /// O&M cost as a fraction of the initial investment.
    pub om_frac: f64,
    pub lifetime_y: u32,
}

impl Default for FacilityCost {
    fn default() -> Self {
        Self {
            unit_cost: 0.0,
            om_frac: 0.0,
            lifetime_y: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Investment {
    pub wt: FacilityCost,
    pub pv: FacilityCost,
    pub ae: FacilityCost,
    pub hs: FacilityCost,
    /// Ammonia synthesis: `unit_cost` is the cost of one 1e5 t/yr block.
    #[serde(rename = "as")]
    pub as_block: FacilityCost,
}

impl Default for Investment {
    fn default() -> Self {
        Self {
            wt: FacilityCost {
                unit_cost: 6000.0,
                om_frac: 0.02,
                lifetime_y: 20,
            },
            pv: FacilityCost {
                unit_cost: 4000.0,
                om_frac: 0.02,
                lifetime_y: 20,
            },
            ae: FacilityCost {
                unit_cost: 3000.0,
                om_frac: 0.03,
                lifetime_y: 15,
            },
            hs: FacilityCost {
                unit_cost: 250.0,
                om_frac: 0.02,
                lifetime_y: 15,
            },
            as_block: FacilityCost {
                unit_cost: 0.33e9,
                om_frac: 0.03,
                lifetime_y: 15,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prices {
    /// Feed-in tariff, RMB/kWh.
    pub p_fit: f64,
    /// Grid purchase price, RMB/kWh.
    pub p_purch: f64,
    /// Ammonia market price, RMB/t.
    pub p_nh3: f64,
}

impl Default for Prices {
    fn default() -> Self {
        Self {
            p_fit: 0.2829,
            p_purch: 0.4572,
            p_nh3: 3200.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Economics {
    pub interest_rate: f64,
    /// Cap on (energy sold - energy purchased) / renewable generation.
    pub r_net: f64,
    /// Nominal annual ammonia output for a full 8760 h year (t).
    pub m_nh3_annual_t: f64,
    pub er_min_rg: f64,
    pub er_min_aehs: f64,
    pub er_min_as: f64,
    /// Scales annualized investment; < 1 for sub-annual studies.
    pub invest_scale: f64,
}

impl Default for Economics {
    fn default() -> Self {
        Self {
            interest_rate: 0.08,
            r_net: 0.20,
            m_nh3_annual_t: 1.0e5,
            er_min_rg: 0.0,
            er_min_aehs: 0.0,
            er_min_as: 0.0,
            invest_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bounds {
    pub c_w_max_mw: f64,
    pub c_s_max_mw: f64,
    pub n_ae_max: u32,
    pub c_hs_max_nm3: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            c_w_max_mw: 2000.0,
            c_s_max_mw: 2000.0,
            n_ae_max: 100,
            c_hs_max_nm3: 5.0e6,
        }
    }
}

/// The full techno-economic parameter bundle.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TechnoEconomicConfig {
    pub operation: Operation,
    pub investment: Investment,
    pub prices: Prices,
    pub economics: Economics,
    pub bounds: Bounds,
}

impl TechnoEconomicConfig {
    pub fn horizon_hours(&self) -> f64 {
        self.operation.n as f64 * self.operation.dt_h
    }

    /// Fraction of a reference year covered by the horizon.
    pub fn horizon_frac(&self) -> f64 {
        self.horizon_hours() / HOURS_PER_YEAR
    }

    /// Ammonia output cap over the horizon (t).
    pub fn m_bar_horizon_t(&self) -> f64 {
        self.economics.m_nh3_annual_t * self.horizon_frac()
    }

    /// Rated hydrogen consumption of the synthesis train (Nm3/h), derived
    /// from the nominal annual output.
    pub fn q_h2_rated_nm3_per_h(&self) -> f64 {
        self.economics.m_nh3_annual_t / self.operation.c_h2ma_t_per_nm3 / HOURS_PER_YEAR
    }

    /// Electrolyzer conversion in MWh per Nm3.
    pub fn kappa_h2_mwh_per_nm3(&self) -> f64 {
        self.operation.kappa_h2_kwh_per_nm3 / 1000.0
    }

    pub fn ammonia_params(&self) -> AmmoniaParams {
        let op = &self.operation;
        AmmoniaParams {
            kappa_n2: op.kappa_n2_mwh_per_t,
            kappa_nh3: op.kappa_nh3_mwh_per_t,
            q_h2_rated: self.q_h2_rated_nm3_per_h(),
            eta_as_min: op.eta_as_min,
            eta_as_max: op.eta_as_max,
            r_plus: op.ramp_up,
            r_minus: op.ramp_down,
            dtas_h: op.dtas_h,
            t_trans_h: op.t_trans_h,
            c_h2ma: op.c_h2ma_t_per_nm3,
        }
    }

    /// Number of ammonia scheduling windows over the horizon.
    pub fn num_windows(&self) -> usize {
        (self.horizon_hours() / self.operation.dtas_h).round() as usize
    }

    /// Multiplies every unit investment cost by the horizon fraction so
    /// that short-horizon studies trade revenue against a commensurate
    /// investment share.
    pub fn scale_invest_to_horizon(&mut self) {
        self.economics.invest_scale = self.horizon_frac();
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let op = &self.operation;
        let err = |msg: String| Err(ConfigError::Invalid(msg));
        if op.n == 0 {
            return err("operation.n must be positive".into());
        }
        if op.dt_h <= 0.0 {
            return err("operation.dt_h must be positive".into());
        }
        if op.dtas_h <= 0.0 {
            return err("operation.dtas_h must be positive".into());
        }
        let steps_per_window = op.dtas_h / op.dt_h;
        if (steps_per_window - steps_per_window.round()).abs() > 1e-9
            || steps_per_window.round() < 1.0
        {
            return err(format!(
                "dtas_h {} is not a positive integer multiple of dt_h {}",
                op.dtas_h, op.dt_h
            ));
        }
        let windows = self.horizon_hours() / op.dtas_h;
        if (windows - windows.round()).abs() > 1e-9 || windows.round() < 1.0 {
            return err(format!(
                "dtas_h {} does not divide the {} h horizon into whole windows",
                op.dtas_h,
                self.horizon_hours()
            ));
        }
        if !(0.0 <= op.eta_ae_min && op.eta_ae_min < op.eta_ae_max) {
            return err("electrolyzer load band must satisfy 0 <= min < max".into());
        }
        if !(0.0 < op.eta_as_min && op.eta_as_min < op.eta_as_max) {
            return err("ammonia load band must satisfy 0 < min < max".into());
        }
        if !(0.0 <= op.eta_hs_min && op.eta_hs_min < op.eta_hs_max && op.eta_hs_max <= 1.0) {
            return err("storage band must satisfy 0 <= min < max <= 1".into());
        }
        if op.ramp_up <= 0.0 || op.ramp_down <= 0.0 {
            return err("ramp limits must be positive".into());
        }
        if self.economics.interest_rate <= 0.0 {
            return err("interest_rate must be positive".into());
        }
        if self.economics.m_nh3_annual_t < 0.0 {
            return err("m_nh3_annual_t must be non-negative".into());
        }
        if self.economics.invest_scale <= 0.0 {
            return err("invest_scale must be positive".into());
        }
        if op.c_ae_single_mw <= 0.0 {
            return err("c_ae_single_mw must be positive".into());
        }
        if op.c_h2ma_t_per_nm3 <= 0.0 {
            return err("c_h2ma_t_per_nm3 must be positive".into());
        }
        for (name, f) in [
            ("wt", &self.investment.wt),
            ("pv", &self.investment.pv),
            ("ae", &self.investment.ae),
            ("hs", &self.investment.hs),
            ("as", &self.investment.as_block),
        ] {
            if f.unit_cost < 0.0 || f.om_frac < 0.0 || f.lifetime_y == 0 {
                return err(format!("investment.{name} has invalid fields"));
            }
        }
        if self.prices.p_fit < 0.0 || self.prices.p_purch < 0.0 || self.prices.p_nh3 < 0.0 {
            return err("prices must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceGridSection {
    /// Inner electricity price grid bounds (RMB/kWh) and resolution.
    pub p_lo: f64,
    pub p_hi: f64,
    pub n_p: usize,
    /// Inner hydrogen price range (RMB/Nm3); continuous, no grid.
    pub p_h2_lo: f64,
    pub p_h2_hi: f64,
}

impl Default for PriceGridSection {
    fn default() -> Self {
        Self {
            p_lo: 0.0,
            p_hi: 0.5,
            n_p: 128,
            p_h2_lo: 0.0,
            p_h2_hi: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub gap: f64,
    pub time_limit_s: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            gap: 1e-4,
            time_limit_s: 600.0,
        }
    }
}

impl SolverSection {
    pub fn to_options(self) -> repta_milp::SolveOptions {
        repta_milp::SolveOptions {
            gap: self.gap,
            time_limit: if self.time_limit_s > 0.0 {
                Some(std::time::Duration::from_secs_f64(self.time_limit_s))
            } else {
                None
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileSource {
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilesSection {
    pub source: ProfileSource,
    pub csv_path: Option<PathBuf>,
    /// Annual-equivalent full-load hours targets for the synthesizer.
    pub wind_flh: f64,
    pub solar_flh: f64,
    pub seed: u64,
}

impl Default for ProfilesSection {
    fn default() -> Self {
        Self {
            source: ProfileSource::Synthetic,
            csv_path: None,
            wind_flh: 3500.0,
            solar_flh: 1800.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub scenario: String,
    pub betas: Vec<f64>,
    /// Explicit sweep periods; when absent, divisors of the horizon are
    /// picked from a standard ladder.
    pub dtas_sweep_h: Option<Vec<f64>>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            scenario: "proposed".into(),
            betas: vec![],
            dtas_sweep_h: None,
        }
    }
}

/// Observed-trajectory input for the transition-constant fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub csv_path: Option<PathBuf>,
    /// `nm3_per_h` or `kg_per_h` (converted at 11.126 Nm3/kg).
    pub unit: String,
    pub q_start: f64,
    pub q_end: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            csv_path: None,
            unit: "nm3_per_h".into(),
            q_start: 0.0,
            q_end: 0.0,
        }
    }
}

/// Top-level configuration file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub te: TechnoEconomicConfig,
    pub price_grid: PriceGridSection,
    pub solver: SolverSection,
    pub profiles: ProfilesSection,
    pub run: RunSection,
    pub fit: FitSection,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The sweep periods to run: the configured list, or divisors of the
    /// horizon picked from a standard ladder.
    pub fn resolved_sweep(&self) -> Vec<f64> {
        if let Some(sweep) = &self.run.dtas_sweep_h {
            return sweep.clone();
        }
        let horizon = self.te.horizon_hours();
        [4.0, 24.0, 120.0, 168.0]
            .into_iter()
            .filter(|d| {
                let w = horizon / d;
                (w - w.round()).abs() < 1e-9 && w >= 1.0
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.te.validate()?;
        if self.price_grid.p_hi < self.price_grid.p_lo {
            return Err(ConfigError::Invalid(
                "price_grid.p_hi must be >= p_lo".into(),
            ));
        }
        if self.price_grid.n_p < 2 {
            return Err(ConfigError::Invalid("price_grid.n_p must be >= 2".into()));
        }
        if self.profiles.source == ProfileSource::Csv {
            match &self.profiles.csv_path {
                None => {
                    return Err(ConfigError::Invalid(
                        "profiles.source = \"csv\" requires profiles.csv_path".into(),
                    ))
                }
                Some(p) if !p.exists() => {
                    return Err(ConfigError::Invalid(format!(
                        "profile file `{}` does not exist",
                        p.display()
                    )))
                }
                _ => {}
            }
        }
        for beta in &self.run.betas {
            if !(0.0..=1.0).contains(beta) {
                return Err(ConfigError::Invalid(format!(
                    "robust beta {beta} outside [0, 1]"
                )));
            }
        }
        if let Some(sweep) = &self.run.dtas_sweep_h {
            for dtas in sweep {
                let windows = self.te.horizon_hours() / dtas;
                if (windows - windows.round()).abs() > 1e-9 || *dtas <= 0.0 {
                    return Err(ConfigError::Invalid(format!(
                        "sweep dtas {dtas} h does not divide the horizon"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gets_table_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg.te.operation.n, 8760);
        assert_eq!(cfg.te.investment.wt.unit_cost, 6000.0);
        assert_eq!(cfg.te.investment.pv.unit_cost, 4000.0);
        assert_eq!(cfg.te.investment.ae.unit_cost, 3000.0);
        assert_eq!(cfg.te.investment.hs.unit_cost, 250.0);
        assert_eq!(cfg.te.investment.as_block.unit_cost, 0.33e9);
        assert_eq!(cfg.te.prices.p_fit, 0.2829);
        assert_eq!(cfg.te.prices.p_purch, 0.4572);
        assert_eq!(cfg.te.prices.p_nh3, 3200.0);
        assert_eq!(cfg.te.economics.interest_rate, 0.08);
        assert_eq!(cfg.te.economics.r_net, 0.20);
        assert_eq!(cfg.te.operation.c_ae_single_mw, 5.0);
    }

    #[test]
    fn rated_hydrogen_flow_from_nominal_output() {
        let cfg = TechnoEconomicConfig::default();
        let q_r = cfg.q_h2_rated_nm3_per_h();
        assert!((q_r - 22_560.0).abs() < 1.0, "q_r = {q_r}");
    }

    #[test]
    fn non_divisor_window_rejected() {
        let toml = "[operation]\nn = 8760\ndtas_h = 7.0\n";
        assert!(RunConfig::from_toml(toml).is_err());
    }

    #[test]
    fn section_overrides_apply() {
        let toml = r#"
[operation]
n = 336
dtas_h = 24.0

[investment.wt]
unit_cost = 100.0

[run]
scenario = "bs3"
"#;
        let cfg = RunConfig::from_toml(toml).unwrap();
        assert_eq!(cfg.te.operation.n, 336);
        assert_eq!(cfg.te.investment.wt.unit_cost, 100.0);
        // untouched sections keep defaults
        assert_eq!(cfg.te.investment.pv.unit_cost, 4000.0);
        assert_eq!(cfg.run.scenario, "bs3");
    }

    #[test]
    fn horizon_scaling_helpers() {
        let mut cfg = TechnoEconomicConfig::default();
        cfg.operation.n = 24;
        assert!((cfg.m_bar_horizon_t() - 1e5 * 24.0 / 8760.0).abs() < 1e-9);
        cfg.scale_invest_to_horizon();
        assert!((cfg.economics.invest_scale - 24.0 / 8760.0).abs() < 1e-12);
    }
}
