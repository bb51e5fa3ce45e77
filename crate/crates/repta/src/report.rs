//! Machine-readable outputs: JSON reports and plot-ready CSV tables.

use crate::economics::InvestorLedger;
use crate::pricing::PricingOutcome;
use crate::robust::IgdtResult;
use crate::schedule::{Capacities, ExchangeRates, Schedule};
use crate::sizing::{Scenario, SizingResult, SolveDiag};
use serde::Serialize;
use std::fmt::Write as _;

/// Sizes in the order the comparison table reports them.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SizesOut {
    pub c_w_mw: f64,
    pub c_s_mw: f64,
    pub c_ae_mw: f64,
    pub c_hs_nm3: f64,
}

impl From<&Capacities> for SizesOut {
    fn from(c: &Capacities) -> Self {
        Self {
            c_w_mw: c.c_w_mw,
            c_s_mw: c.c_s_mw,
            c_ae_mw: c.c_ae_mw(),
            c_hs_nm3: c.c_hs_nm3,
        }
    }
}

/// One row of the scenario comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub scenario: Scenario,
    pub sizes: SizesOut,
    pub p_inner: Option<f64>,
    pub p_h2_inner: Option<f64>,
    pub rates: ExchangeRates,
    pub flh_ae_h: f64,
    pub dtr_1e4_rmb: f64,
    /// Total net revenue over total annualized investment; price-free.
    pub er_system: Option<f64>,
    pub er_rg: Option<f64>,
    pub er_aehs: Option<f64>,
    pub er_as: Option<f64>,
    /// True when the minimum-ER constraints had to be dropped in stage II.
    pub er_relaxed: bool,
    pub wall_s: f64,
}

/// One row of the ammonia-flexibility sensitivity sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub dtas_h: f64,
    pub sizes: SizesOut,
    pub rates: ExchangeRates,
    pub flh_ae_h: f64,
    pub dtr_1e4_rmb: f64,
}

/// Pricing-stage JSON, field names fixed by the external interface.
#[derive(Debug, Clone, Serialize)]
pub struct PriceJson {
    #[serde(rename = "p_Inner")]
    pub p_inner: f64,
    #[serde(rename = "p_H2_Inner")]
    pub p_h2_inner: f64,
    #[serde(rename = "E_AE_Inner")]
    pub e_ae_inner_mwh: f64,
    #[serde(rename = "E_AS_Inner")]
    pub e_as_inner_mwh: f64,
    #[serde(rename = "ER_RG")]
    pub er_rg: f64,
    #[serde(rename = "ER_AEHS")]
    pub er_aehs: f64,
    #[serde(rename = "ER_AS")]
    pub er_as: f64,
    pub deviation_sum: f64,
    pub er_relaxed: bool,
}

impl PriceJson {
    pub fn from_outcome(outcome: &PricingOutcome, dt_h: f64) -> Self {
        let (e_ae, e_as) = outcome.distribution.inner_aggregates_mwh(dt_h);
        Self {
            p_inner: outcome.prices.p_inner,
            p_h2_inner: outcome.prices.p_h2_inner,
            e_ae_inner_mwh: e_ae,
            e_as_inner_mwh: e_as,
            er_rg: outcome.er.er_rg,
            er_aehs: outcome.er.er_aehs,
            er_as: outcome.er.er_as,
            deviation_sum: outcome.er.deviation_sum,
            er_relaxed: outcome.er_relaxed,
        }
    }
}

/// Post-hoc check of the physical setpoint transition against the
/// piecewise-constant plan the optimizer used.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionReport {
    /// Largest hourly step of the exponential trajectory, per unit of rated
    /// load.
    pub max_hourly_step_pu: f64,
    /// Largest gap between the trajectory and the plan, per unit.
    pub max_dev_from_plan_pu: f64,
    pub ramp_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub schedule_violations: Vec<String>,
    pub ledger_consistent: bool,
    /// Max relative spread of J over random price pairs.
    pub prop1_rel_spread: f64,
    pub transition: Option<TransitionReport>,
}

/// Everything `run` knows at the end of the pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub sizes: SizesOut,
    pub dtr_1e4_rmb: f64,
    pub rates: ExchangeRates,
    pub flh_ae_h: f64,
    pub m_nh3_t: f64,
    pub prices: Option<PriceJson>,
    pub ledger: Option<InvestorLedger>,
    pub er_system: Option<f64>,
    pub robust: Vec<IgdtResult>,
    pub solver: SolveDiag,
    pub validation: ValidationReport,
    pub wall_s: f64,
}

pub fn schedule_csv(schedule: &Schedule) -> String {
    let mut out = String::from(
        "hour,P_W,P_S,P_sell,P_purch,P_curt,P_AE,P_AS,q_in,q_out,n_sto\n",
    );
    for t in 0..schedule.len() {
        let _ = writeln!(
            out,
            "{t},{},{},{},{},{},{},{},{},{},{}",
            schedule.p_w[t],
            schedule.p_s[t],
            schedule.p_sell[t],
            schedule.p_purch[t],
            schedule.p_curt[t],
            schedule.p_ae[t],
            schedule.p_as[t],
            schedule.q_in[t],
            schedule.q_out[t],
            schedule.n_sto[t],
        );
    }
    out
}

pub fn robust_csv(rows: &[IgdtResult]) -> String {
    let mut out = String::from("beta,alpha_star,c_hs_nm3,r_as,rtr_1e4_rmb\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.beta,
            r.alpha_star,
            r.c_hs_robust_nm3,
            r.r_as,
            r.rtr_1e4_rmb()
        );
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "scenario,c_w_mw,c_s_mw,c_ae_mw,c_hs_nm3,p_inner,p_h2_inner,\
         rate_on_grid,rate_off_grid,rate_net_on_grid,rate_curtailment,\
         flh_ae_h,dtr_1e4_rmb,er_system,er_rg,er_aehs,er_as,er_relaxed,wall_s\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.sizes.c_w_mw,
            r.sizes.c_s_mw,
            r.sizes.c_ae_mw,
            r.sizes.c_hs_nm3,
            fmt_opt(r.p_inner),
            fmt_opt(r.p_h2_inner),
            r.rates.on_grid,
            r.rates.off_grid,
            r.rates.net_on_grid,
            r.rates.curtailment,
            r.flh_ae_h,
            r.dtr_1e4_rmb,
            fmt_opt(r.er_system),
            fmt_opt(r.er_rg),
            fmt_opt(r.er_aehs),
            fmt_opt(r.er_as),
            r.er_relaxed,
            r.wall_s,
        );
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "dtas_h,c_w_mw,c_s_mw,c_ae_mw,c_hs_nm3,rate_on_grid,rate_off_grid,\
         rate_net_on_grid,rate_curtailment,flh_ae_h,dtr_1e4_rmb\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.dtas_h,
            r.sizes.c_w_mw,
            r.sizes.c_s_mw,
            r.sizes.c_ae_mw,
            r.sizes.c_hs_nm3,
            r.rates.on_grid,
            r.rates.off_grid,
            r.rates.net_on_grid,
            r.rates.curtailment,
            r.flh_ae_h,
            r.dtr_1e4_rmb,
        );
    }
    out
}

/// Summary row shared by `size` and `run` pipelines.
pub fn bench_row_from(
    sizing: &SizingResult,
    pricing: Option<&PricingOutcome>,
) -> BenchRow {
    let er_system = pricing
        .map(|p| p.ledger.system_er())
        .unwrap_or_else(|| system_er_without_prices(sizing));
    BenchRow {
        scenario: sizing.scenario,
        sizes: SizesOut::from(&sizing.capacities),
        p_inner: pricing.map(|p| p.prices.p_inner),
        p_h2_inner: pricing.map(|p| p.prices.p_h2_inner),
        rates: sizing.schedule.exchange_rates(),
        flh_ae_h: sizing.schedule.flh_ae(&sizing.capacities),
        dtr_1e4_rmb: sizing.dtr_1e4_rmb(),
        er_system,
        er_rg: pricing.map(|p| p.er.er_rg),
        er_aehs: pricing.map(|p| p.er.er_aehs),
        er_as: pricing.map(|p| p.er.er_as),
        er_relaxed: pricing.map(|p| p.er_relaxed).unwrap_or(false),
        wall_s: sizing.diag.wall_s + pricing.map(|p| p.wall_s).unwrap_or(0.0),
    }
}

/// System-level earnings ratio straight from DTR and the investments;
/// usable even when stage II never ran.
pub fn system_er_without_prices(sizing: &SizingResult) -> Option<f64> {
    let invest = sizing.invests.total();
    if invest > 0.0 {
        Some(sizing.dtr_rmb / invest)
    } else {
        None
    }
}
