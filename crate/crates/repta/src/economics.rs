//! Investor-level accounting: capital recovery, the three revenue ledgers,
//! earnings ratios, and the price-invariance check of the total revenue.

use crate::config::TechnoEconomicConfig;
use crate::schedule::{Capacities, Schedule};
use serde::Serialize;
use thiserror::Error;

pub const KWH_PER_MWH: f64 = 1000.0;
/// Nominal ammonia block size that the AS investment cost is quoted for.
pub const AS_BLOCK_T_PER_YEAR: f64 = 1.0e5;

#[derive(Debug, Error)]
pub enum EconError {
    #[error("capital recovery factor undefined for r = {0}")]
    BadRate(f64),
    #[error("capital recovery factor needs a lifetime >= 1 year")]
    BadLifetime,
    #[error("schedule inconsistency: {0}")]
    Inconsistency(String),
    #[error("earnings ratio undefined for {0}: zero annualized investment")]
    UndefinedEarningsRatio(&'static str),
}

/// Capital recovery factor `r(1+r)^Y / ((1+r)^Y - 1)`.
pub fn crf(r: f64, years: u32) -> Result<f64, EconError> {
    if r <= 0.0 || !r.is_finite() {
        return Err(EconError::BadRate(r));
    }
    if years == 0 {
        return Err(EconError::BadLifetime);
    }
    let growth = (1.0 + r).powi(years as i32);
    Ok(r * growth / (growth - 1.0))
}

/// Inner and market prices used when evaluating a ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceSet {
    /// Inner electricity price, RMB/kWh.
    pub p_inner: f64,
    /// Inner hydrogen price, RMB/Nm3.
    pub p_h2_inner: f64,
    /// Feed-in tariff, RMB/kWh.
    pub p_fit: f64,
    /// Grid purchase price, RMB/kWh.
    pub p_purch: f64,
    /// Ammonia price, RMB/t.
    pub p_nh3: f64,
}

impl PriceSet {
    pub fn from_config(cfg: &TechnoEconomicConfig, p_inner: f64, p_h2_inner: f64) -> Self {
        Self {
            p_inner,
            p_h2_inner,
            p_fit: cfg.prices.p_fit,
            p_purch: cfg.prices.p_purch,
            p_nh3: cfg.prices.p_nh3,
        }
    }
}

/// Annualized investment rates per installed unit, shared by the model
/// objective and the ledger so the two can never drift apart.
#[derive(Debug, Clone, Copy)]
pub struct InvestRates {
    /// RMB per MW of wind.
    pub wt_per_mw: f64,
    pub pv_per_mw: f64,
    pub ae_per_mw: f64,
    /// RMB per Nm3 of storage.
    pub hs_per_nm3: f64,
    /// RMB for the synthesis train at the configured nominal output.
    pub as_block: f64,
}

pub fn invest_rates(cfg: &TechnoEconomicConfig) -> Result<InvestRates, EconError> {
    let inv = &cfg.investment;
    let r = cfg.economics.interest_rate;
    let scale = cfg.economics.invest_scale;
    let per_kw = |f: &crate::config::FacilityCost| -> Result<f64, EconError> {
        Ok(f.unit_cost * KWH_PER_MWH * (1.0 + f.om_frac) * crf(r, f.lifetime_y)? * scale)
    };
    Ok(InvestRates {
        wt_per_mw: per_kw(&inv.wt)?,
        pv_per_mw: per_kw(&inv.pv)?,
        ae_per_mw: per_kw(&inv.ae)?,
        hs_per_nm3: inv.hs.unit_cost
            * (1.0 + inv.hs.om_frac)
            * crf(r, inv.hs.lifetime_y)?
            * scale,
        as_block: inv.as_block.unit_cost
            * (1.0 + inv.as_block.om_frac)
            * crf(r, inv.as_block.lifetime_y)?
            * (cfg.economics.m_nh3_annual_t / AS_BLOCK_T_PER_YEAR)
            * scale,
    })
}

/// Per-facility annualized investments for a capacity choice (RMB/yr).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnnualizedInvestments {
    pub wt: f64,
    pub pv: f64,
    pub ae: f64,
    pub hs: f64,
    pub as_block: f64,
}

impl AnnualizedInvestments {
    pub fn rg(&self) -> f64 {
        self.wt + self.pv
    }

    pub fn aehs(&self) -> f64 {
        self.ae + self.hs
    }

    pub fn as_part(&self) -> f64 {
        self.as_block
    }

    pub fn total(&self) -> f64 {
        self.rg() + self.aehs() + self.as_part()
    }
}

pub fn annualized_investments(
    caps: &Capacities,
    cfg: &TechnoEconomicConfig,
) -> Result<AnnualizedInvestments, EconError> {
    let rates = invest_rates(cfg)?;
    Ok(AnnualizedInvestments {
        wt: rates.wt_per_mw * caps.c_w_mw,
        pv: rates.pv_per_mw * caps.c_s_mw,
        ae: rates.ae_per_mw * caps.c_ae_mw(),
        hs: rates.hs_per_nm3 * caps.c_hs_nm3,
        as_block: rates.as_block,
    })
}

/// Hourly split of each load's power between inner supply and grid purchase.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub p_ae_inner: Vec<f64>,
    pub p_ae_purch: Vec<f64>,
    pub p_as_inner: Vec<f64>,
    pub p_as_purch: Vec<f64>,
}

impl Distribution {
    /// Annual inner-energy aggregates (MWh): electrolyzer and synthesis.
    pub fn inner_aggregates_mwh(&self, dt_h: f64) -> (f64, f64) {
        (
            dt_h * self.p_ae_inner.iter().sum::<f64>(),
            dt_h * self.p_as_inner.iter().sum::<f64>(),
        )
    }

    /// A valid split built directly from a schedule: inner power feeds the
    /// electrolyzer first, the synthesis train takes the rest, purchases
    /// cover both remainders.
    pub fn greedy(schedule: &Schedule) -> Self {
        let n = schedule.len();
        let mut d = Distribution {
            p_ae_inner: Vec::with_capacity(n),
            p_ae_purch: Vec::with_capacity(n),
            p_as_inner: Vec::with_capacity(n),
            p_as_purch: Vec::with_capacity(n),
        };
        for t in 0..n {
            let inner = schedule.p_inner(t).max(0.0);
            let ae_inner = schedule.p_ae[t].min(inner);
            let as_inner = schedule.p_as[t].min(inner - ae_inner);
            d.p_ae_inner.push(ae_inner);
            d.p_as_inner.push(as_inner);
            d.p_ae_purch.push((schedule.p_ae[t] - ae_inner).max(0.0));
            d.p_as_purch.push((schedule.p_as[t] - as_inner).max(0.0));
        }
        d
    }

    /// Checks the four split identities against the schedule.
    pub fn validate(&self, schedule: &Schedule, tol: f64) -> Result<(), EconError> {
        let n = schedule.len();
        if self.p_ae_inner.len() != n
            || self.p_ae_purch.len() != n
            || self.p_as_inner.len() != n
            || self.p_as_purch.len() != n
        {
            return Err(EconError::Inconsistency(
                "distribution length mismatch".into(),
            ));
        }
        let scale = schedule
            .p_ae
            .iter()
            .zip(&schedule.p_as)
            .map(|(a, b)| a + b)
            .fold(1.0_f64, f64::max);
        let allow = tol * scale;
        for t in 0..n {
            let inner = schedule.p_inner(t);
            let checks = [
                (self.p_ae_inner[t] + self.p_as_inner[t] - inner, "inner"),
                (
                    self.p_ae_purch[t] + self.p_as_purch[t] - schedule.p_purch[t],
                    "purchase",
                ),
                (
                    self.p_ae_inner[t] + self.p_ae_purch[t] - schedule.p_ae[t],
                    "electrolyzer",
                ),
                (
                    self.p_as_inner[t] + self.p_as_purch[t] - schedule.p_as[t],
                    "synthesis",
                ),
            ];
            for (gap, which) in checks {
                if gap.abs() > allow {
                    return Err(EconError::Inconsistency(format!(
                        "{which} split identity violated at t={t} by {gap:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One investor's annual bottom line (RMB/yr).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvestorLine {
    pub profit: f64,
    pub invest: f64,
    pub net: f64,
    pub er: Option<f64>,
}

impl InvestorLine {
    fn new(profit: f64, invest: f64) -> Self {
        Self {
            profit,
            invest,
            net: profit - invest,
            er: if invest > 0.0 {
                Some((profit - invest) / invest)
            } else {
                None
            },
        }
    }
}

/// The three investors' ledgers plus the system total.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvestorLedger {
    pub rg: InvestorLine,
    pub aehs: InvestorLine,
    pub as_part: InvestorLine,
    pub total: f64,
}

impl InvestorLedger {
    /// System-level earnings ratio: total net revenue over total annualized
    /// investment. Price-independent by the invariance property.
    pub fn system_er(&self) -> Option<f64> {
        let invest = self.rg.invest + self.aehs.invest + self.as_part.invest;
        if invest > 0.0 {
            Some(self.total / invest)
        } else {
            None
        }
    }
}

/// Builds the full ledger for a schedule, capacity choice, price set, and
/// power split. The schedule must satisfy the power balance and the split
/// identities within 1e-6.
pub fn ledger(
    schedule: &Schedule,
    caps: &Capacities,
    prices: &PriceSet,
    dist: &Distribution,
    cfg: &TechnoEconomicConfig,
) -> Result<InvestorLedger, EconError> {
    let n = schedule.len();
    let dt = schedule.dt_h;
    let scale = (caps.c_w_mw + caps.c_s_mw + caps.c_ae_mw()).max(1.0);
    for t in 0..n {
        let gap = schedule.p_w[t] + schedule.p_s[t] + schedule.p_purch[t]
            - schedule.p_sell[t]
            - schedule.p_curt[t]
            - schedule.p_ae[t]
            - schedule.p_as[t];
        if gap.abs() > 1e-6 * scale {
            return Err(EconError::Inconsistency(format!(
                "power balance violated at t={t} by {gap:.3e}"
            )));
        }
    }
    dist.validate(schedule, 1e-6)?;

    let invests = annualized_investments(caps, cfg)?;
    let params = cfg.ammonia_params();

    let mut rg_income = 0.0;
    let mut aehs_income = 0.0;
    let mut as_income = 0.0;
    for t in 0..n {
        let inner = schedule.p_inner(t);
        rg_income += dt
            * KWH_PER_MWH
            * (prices.p_fit * schedule.p_sell[t] + prices.p_inner * inner);
        aehs_income += dt * prices.p_h2_inner * schedule.q_in[t]
            - dt * KWH_PER_MWH
                * (prices.p_inner * dist.p_ae_inner[t] + prices.p_purch * dist.p_ae_purch[t]);
        as_income += dt * prices.p_nh3 * params.c_h2ma * schedule.q_out[t]
            - dt * KWH_PER_MWH
                * (prices.p_inner * dist.p_as_inner[t] + prices.p_purch * dist.p_as_purch[t])
            - dt * prices.p_h2_inner * schedule.q_out[t];
    }

    let rg = InvestorLine::new(rg_income, invests.rg());
    let aehs = InvestorLine::new(aehs_income, invests.aehs());
    let as_part = InvestorLine::new(as_income, invests.as_part());
    let total = rg.net + aehs.net + as_part.net;
    Ok(InvestorLedger {
        rg,
        aehs,
        as_part,
        total,
    })
}

/// Maximum pairwise spread of total revenue J across a set of price
/// samples. For a schedule with a closed storage cycle and a valid split,
/// the contract is a spread within 1e-6 * |J|.
pub fn proposition1_check(
    schedule: &Schedule,
    caps: &Capacities,
    dist: &Distribution,
    cfg: &TechnoEconomicConfig,
    price_samples: &[PriceSet],
) -> Result<f64, EconError> {
    let n = schedule.len();
    let cycle_gap = schedule.n_sto[n] - schedule.n_sto[0];
    if cycle_gap.abs() > 1e-6 * caps.c_hs_nm3.max(1.0) {
        return Err(EconError::Inconsistency(format!(
            "storage cycle open by {cycle_gap:.3e} Nm3; the invariance requires n(0) = n(N)"
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for prices in price_samples {
        let j = ledger(schedule, caps, prices, dist, cfg)?.total;
        lo = lo.min(j);
        hi = hi.max(j);
    }
    if price_samples.is_empty() {
        return Ok(0.0);
    }
    Ok(hi - lo)
}
