//! Stage II: given the frozen Stage-I solution, choose the inner electricity
//! price (on a binary-encoded grid), the inner hydrogen price, and the hourly
//! power split so the three investors' earnings ratios are as close as
//! possible, subject to their minimum-return requirements.

use crate::config::{PriceGridSection, TechnoEconomicConfig};
use crate::economics::{self, Distribution, InvestorLedger, PriceSet, KWH_PER_MWH};
use crate::sizing::SizingResult;
use repta_milp::{
    big_m_product, solve, Cmp, Domain, LinExpr, Model, ModelHandle, Sense, SolveOptions,
    SolveStatus, VarRef,
};
use serde::Serialize;
use thiserror::Error;

/// Energy aggregates live in GWh inside the model so binary big-M rows stay
/// well scaled.
const GWH_PER_MWH: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum PricingError {
    #[error("price grid invalid: {0}")]
    BadGrid(String),
    #[error("{investor} has zero annualized investment; earnings ratio undefined")]
    ZeroInvestment { investor: &'static str },
    #[error(
        "no grid price satisfies the minimum earnings ratios; best attainable \
         (constraints relaxed): ER_RG {er_rg:.4}, ER_AEHS {er_aehs:.4}, ER_AS {er_as:.4}"
    )]
    ErInfeasible {
        er_rg: f64,
        er_aehs: f64,
        er_as: f64,
        relaxed: Box<PricingOutcome>,
    },
    #[error("stage II moved total revenue: ledger {ledger:.3} vs DTR {dtr:.3}")]
    RevenueDrift { ledger: f64, dtr: f64 },
    #[error("pricing model unexpectedly {0}")]
    BadStatus(String),
    #[error(transparent)]
    Econ(#[from] economics::EconError),
    #[error(transparent)]
    Model(#[from] repta_milp::ModelError),
    #[error(transparent)]
    Solve(#[from] repta_milp::SolveError),
}

/// Earnings-ratio triple with the pairwise deviations of the objective.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErReport {
    pub er_rg: f64,
    pub er_aehs: f64,
    pub er_as: f64,
    pub dev_rg_aehs: f64,
    pub dev_aehs_as: f64,
    pub deviation_sum: f64,
}

pub fn er_report(ledger: &InvestorLedger) -> Result<ErReport, PricingError> {
    let er = |line: &economics::InvestorLine, who: &'static str| {
        line.er.ok_or(PricingError::ZeroInvestment { investor: who })
    };
    let er_rg = er(&ledger.rg, "RG")?;
    let er_aehs = er(&ledger.aehs, "AEHS")?;
    let er_as = er(&ledger.as_part, "AS")?;
    let dev_rg_aehs = (er_rg - er_aehs).abs();
    let dev_aehs_as = (er_aehs - er_as).abs();
    Ok(ErReport {
        er_rg,
        er_aehs,
        er_as,
        dev_rg_aehs,
        dev_aehs_as,
        deviation_sum: dev_rg_aehs + dev_aehs_as,
    })
}

/// Frozen hourly constants taken from the Stage-I schedule, rectified so the
/// four split identities are exactly consistent.
struct FrozenSeries {
    inner: Vec<f64>,
    purch: Vec<f64>,
    ae: Vec<f64>,
    as_: Vec<f64>,
}

impl FrozenSeries {
    fn from_sizing(sizing: &SizingResult) -> Self {
        let s = &sizing.schedule;
        let n = s.len();
        let mut f = FrozenSeries {
            inner: Vec::with_capacity(n),
            purch: Vec::with_capacity(n),
            ae: Vec::with_capacity(n),
            as_: Vec::with_capacity(n),
        };
        for t in 0..n {
            let inner = s.p_inner(t).max(0.0);
            let purch = s.p_purch[t].max(0.0);
            let ae = s.p_ae[t].max(0.0).min(inner + purch);
            // close the identity exactly: inner + purch = ae + as
            let as_ = (inner + purch - ae).max(0.0);
            f.inner.push(inner);
            f.purch.push(purch);
            f.ae.push(ae);
            f.as_.push(as_);
        }
        f
    }
}

#[derive(Debug, Clone)]
pub struct PricingVars {
    pub b: Vec<VarRef>,
    pub z_ae: Vec<VarRef>,
    pub z_as: Vec<VarRef>,
    pub p_h2: VarRef,
    pub ae_inner: Vec<VarRef>,
    pub ae_purch: Vec<VarRef>,
    pub as_inner: Vec<VarRef>,
    pub as_purch: Vec<VarRef>,
    pub er_rg: VarRef,
    pub er_aehs: VarRef,
    pub er_as: VarRef,
    pub w1: VarRef,
    pub w2: VarRef,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PricingOutcome {
    pub prices: PriceSet,
    #[serde(skip)]
    pub distribution: Distribution,
    pub ledger: InvestorLedger,
    pub er: ErReport,
    /// Model objective w1 + w2.
    pub objective: f64,
    /// True when the minimum-ER constraints had to be dropped.
    pub er_relaxed: bool,
    pub wall_s: f64,
}

/// Builds the pricing MILP on a frozen Stage-I solution.
pub fn build_pricing_model(
    sizing: &SizingResult,
    cfg: &TechnoEconomicConfig,
    grid: &PriceGridSection,
    enforce_er_min: bool,
) -> Result<(ModelHandle, PricingVars), PricingError> {
    if grid.n_p < 2 {
        return Err(PricingError::BadGrid(format!(
            "n_p must be at least 2, got {}",
            grid.n_p
        )));
    }
    if grid.p_hi < grid.p_lo {
        return Err(PricingError::BadGrid(format!(
            "p_hi {} below p_lo {}",
            grid.p_hi, grid.p_lo
        )));
    }
    let i_rg = sizing.invests.rg();
    let i_aehs = sizing.invests.aehs();
    let i_as = sizing.invests.as_part();
    for (inv, who) in [(i_rg, "RG"), (i_aehs, "AEHS"), (i_as, "AS")] {
        if inv <= 0.0 {
            return Err(PricingError::ZeroInvestment { investor: who });
        }
    }

    let s = &sizing.schedule;
    let n = s.len();
    let dt = s.dt_h;
    let frozen = FrozenSeries::from_sizing(sizing);

    // a degenerate grid pins the price: one binary, zero step
    let n_p = if grid.p_hi == grid.p_lo { 1 } else { grid.n_p };
    let step = if n_p == 1 {
        0.0
    } else {
        (grid.p_hi - grid.p_lo) / n_p as f64
    };

    let mut m = Model::new("pricing", Sense::Minimize);

    let b: Vec<VarRef> = (0..n_p)
        .map(|j| Ok::<_, PricingError>(m.add_var(format!("b[{j}]"), Domain::Binary, 0.0, 1.0)?))
        .collect::<Result<_, _>>()?;
    // symmetry breaking: sorted binaries encode the level count
    for j in 1..n_p {
        let chain = LinExpr::sum([(b[j - 1], 1.0), (b[j], -1.0)]);
        m.add_constraint(format!("chain[{j}]"), chain, Cmp::Ge, 0.0)?;
    }

    let p_h2 = m.add_var("p_h2_inner", Domain::Continuous, grid.p_h2_lo, grid.p_h2_hi)?;

    let mut ae_inner = Vec::with_capacity(n);
    let mut ae_purch = Vec::with_capacity(n);
    let mut as_inner = Vec::with_capacity(n);
    let mut as_purch = Vec::with_capacity(n);
    for t in 0..n {
        ae_inner.push(m.add_var(
            format!("p_ae_inner[{t}]"),
            Domain::Continuous,
            0.0,
            frozen.ae[t].min(frozen.inner[t]),
        )?);
        ae_purch.push(m.add_var(
            format!("p_ae_purch[{t}]"),
            Domain::Continuous,
            0.0,
            frozen.ae[t].min(frozen.purch[t]),
        )?);
        as_inner.push(m.add_var(
            format!("p_as_inner[{t}]"),
            Domain::Continuous,
            0.0,
            frozen.as_[t].min(frozen.inner[t]),
        )?);
        as_purch.push(m.add_var(
            format!("p_as_purch[{t}]"),
            Domain::Continuous,
            0.0,
            frozen.as_[t].min(frozen.purch[t]),
        )?);
        m.add_constraint(
            format!("split_inner[{t}]"),
            LinExpr::sum([(ae_inner[t], 1.0), (as_inner[t], 1.0)]),
            Cmp::Eq,
            frozen.inner[t],
        )?;
        m.add_constraint(
            format!("split_purch[{t}]"),
            LinExpr::sum([(ae_purch[t], 1.0), (as_purch[t], 1.0)]),
            Cmp::Eq,
            frozen.purch[t],
        )?;
        m.add_constraint(
            format!("split_ae[{t}]"),
            LinExpr::sum([(ae_inner[t], 1.0), (ae_purch[t], 1.0)]),
            Cmp::Eq,
            frozen.ae[t],
        )?;
        m.add_constraint(
            format!("split_as[{t}]"),
            LinExpr::sum([(as_inner[t], 1.0), (as_purch[t], 1.0)]),
            Cmp::Eq,
            frozen.as_[t],
        )?;
    }

    // annual energy aggregates in GWh
    let e_inner_total: f64 = GWH_PER_MWH * dt * frozen.inner.iter().sum::<f64>();
    let e_ae_ub = GWH_PER_MWH
        * dt
        * frozen
            .ae
            .iter()
            .zip(&frozen.inner)
            .map(|(a, i)| a.min(*i))
            .sum::<f64>();
    let e_as_ub = GWH_PER_MWH
        * dt
        * frozen
            .as_
            .iter()
            .zip(&frozen.inner)
            .map(|(a, i)| a.min(*i))
            .sum::<f64>();
    let e_purch_total: f64 = GWH_PER_MWH * dt * frozen.purch.iter().sum::<f64>();
    let e_ae_inner = m.add_var("E_AE_inner", Domain::Continuous, 0.0, e_ae_ub)?;
    let e_as_inner = m.add_var("E_AS_inner", Domain::Continuous, 0.0, e_as_ub)?;
    let e_ae_purch = m.add_var("E_AE_purch", Domain::Continuous, 0.0, e_purch_total)?;
    let e_as_purch = m.add_var("E_AS_purch", Domain::Continuous, 0.0, e_purch_total)?;
    for (name, agg, series) in [
        ("agg_ae_inner", e_ae_inner, &ae_inner),
        ("agg_as_inner", e_as_inner, &as_inner),
        ("agg_ae_purch", e_ae_purch, &ae_purch),
        ("agg_as_purch", e_as_purch, &as_purch),
    ] {
        let mut expr = LinExpr::from(agg);
        for &v in series.iter() {
            expr.add_term(v, -GWH_PER_MWH * dt);
        }
        m.add_constraint(name, expr, Cmp::Eq, 0.0)?;
    }

    // linearized products b_j * E for the two inner-energy aggregates
    let mut z_ae = Vec::with_capacity(n_p);
    let mut z_as = Vec::with_capacity(n_p);
    for (j, &bj) in b.iter().enumerate() {
        z_ae.push(big_m_product(&mut m, bj, e_ae_inner, &format!("z_ae[{j}]"))?);
        z_as.push(big_m_product(&mut m, bj, e_as_inner, &format!("z_as[{j}]"))?);
    }

    // frozen cash constants (RMB)
    let sell_revenue: f64 =
        KWH_PER_MWH * cfg.prices.p_fit * dt * s.p_sell.iter().sum::<f64>();
    let q_in_total: f64 = dt * s.q_in.iter().sum::<f64>();
    let q_out_total: f64 = dt * s.q_out.iter().sum::<f64>();
    let nh3_revenue: f64 =
        cfg.prices.p_nh3 * cfg.operation.c_h2ma_t_per_nm3 * q_out_total;
    // RMB per (GWh * RMB/kWh)
    let cash_per_gwh = KWH_PER_MWH / GWH_PER_MWH;

    let er_bound = 1.0e3;
    let er_rg = m.add_var("er_rg", Domain::Continuous, -er_bound, er_bound)?;
    let er_aehs = m.add_var("er_aehs", Domain::Continuous, -er_bound, er_bound)?;
    let er_as = m.add_var("er_as", Domain::Continuous, -er_bound, er_bound)?;

    // ER_RG: profit is feed-in revenue plus p_inner * total inner energy
    let mut rg_def = LinExpr::term(er_rg, 1.0);
    for &bj in &b {
        rg_def.add_term(bj, -cash_per_gwh * e_inner_total * step / i_rg);
    }
    m.add_constraint(
        "er_rg_def",
        rg_def,
        Cmp::Eq,
        (sell_revenue + cash_per_gwh * grid.p_lo * e_inner_total) / i_rg - 1.0,
    )?;

    // ER_AEHS: hydrogen sales minus electricity purchases
    let mut aehs_def = LinExpr::term(er_aehs, 1.0);
    aehs_def.add_term(p_h2, -q_in_total / i_aehs);
    aehs_def.add_term(e_ae_inner, cash_per_gwh * grid.p_lo / i_aehs);
    for &zj in &z_ae {
        aehs_def.add_term(zj, cash_per_gwh * step / i_aehs);
    }
    aehs_def.add_term(e_ae_purch, cash_per_gwh * cfg.prices.p_purch / i_aehs);
    m.add_constraint("er_aehs_def", aehs_def, Cmp::Eq, -1.0)?;

    // ER_AS: ammonia sales minus electricity and hydrogen purchases
    let mut as_def = LinExpr::term(er_as, 1.0);
    as_def.add_term(p_h2, q_out_total / i_as);
    as_def.add_term(e_as_inner, cash_per_gwh * grid.p_lo / i_as);
    for &zj in &z_as {
        as_def.add_term(zj, cash_per_gwh * step / i_as);
    }
    as_def.add_term(e_as_purch, cash_per_gwh * cfg.prices.p_purch / i_as);
    m.add_constraint("er_as_def", as_def, Cmp::Eq, nh3_revenue / i_as - 1.0)?;

    if enforce_er_min {
        m.add_constraint(
            "er_min_rg",
            LinExpr::from(er_rg),
            Cmp::Ge,
            cfg.economics.er_min_rg,
        )?;
        m.add_constraint(
            "er_min_aehs",
            LinExpr::from(er_aehs),
            Cmp::Ge,
            cfg.economics.er_min_aehs,
        )?;
        m.add_constraint(
            "er_min_as",
            LinExpr::from(er_as),
            Cmp::Ge,
            cfg.economics.er_min_as,
        )?;
    }

    let w1 = m.add_var("w1", Domain::Continuous, 0.0, 2.0 * er_bound)?;
    let w2 = m.add_var("w2", Domain::Continuous, 0.0, 2.0 * er_bound)?;
    m.add_constraint(
        "dev1_pos",
        LinExpr::sum([(er_rg, 1.0), (er_aehs, -1.0), (w1, -1.0)]),
        Cmp::Le,
        0.0,
    )?;
    m.add_constraint(
        "dev1_neg",
        LinExpr::sum([(er_aehs, 1.0), (er_rg, -1.0), (w1, -1.0)]),
        Cmp::Le,
        0.0,
    )?;
    m.add_constraint(
        "dev2_pos",
        LinExpr::sum([(er_aehs, 1.0), (er_as, -1.0), (w2, -1.0)]),
        Cmp::Le,
        0.0,
    )?;
    m.add_constraint(
        "dev2_neg",
        LinExpr::sum([(er_as, 1.0), (er_aehs, -1.0), (w2, -1.0)]),
        Cmp::Le,
        0.0,
    )?;
    m.set_objective(LinExpr::sum([(w1, 1.0), (w2, 1.0)]))?;

    let vars = PricingVars {
        b,
        z_ae,
        z_as,
        p_h2,
        ae_inner,
        ae_purch,
        as_inner,
        as_purch,
        er_rg,
        er_aehs,
        er_as,
        w1,
        w2,
        step,
    };
    Ok((m.freeze(), vars))
}

/// Solves the pricing stage. On minimum-ER infeasibility the model is
/// re-solved with those constraints dropped and the best-attainable triple is
/// reported in the error.
pub fn solve_pricing(
    sizing: &SizingResult,
    cfg: &TechnoEconomicConfig,
    grid: &PriceGridSection,
    options: &SolveOptions,
) -> Result<PricingOutcome, PricingError> {
    match solve_pricing_inner(sizing, cfg, grid, options, true) {
        Ok(outcome) => Ok(outcome),
        Err(PricingError::BadStatus(status)) if status == "Infeasible" => {
            let mut relaxed = solve_pricing_inner(sizing, cfg, grid, options, false)?;
            relaxed.er_relaxed = true;
            Err(PricingError::ErInfeasible {
                er_rg: relaxed.er.er_rg,
                er_aehs: relaxed.er.er_aehs,
                er_as: relaxed.er.er_as,
                relaxed: Box::new(relaxed),
            })
        }
        Err(e) => Err(e),
    }
}

fn solve_pricing_inner(
    sizing: &SizingResult,
    cfg: &TechnoEconomicConfig,
    grid: &PriceGridSection,
    options: &SolveOptions,
    enforce_er_min: bool,
) -> Result<PricingOutcome, PricingError> {
    let (model, vars) = build_pricing_model(sizing, cfg, grid, enforce_er_min)?;
    let result = solve(&model, options)?;
    match result.status {
        SolveStatus::Optimal => {}
        SolveStatus::Limit if result.has_assignment() => {
            log::warn!(
                "pricing solve hit its limit; using incumbent with gap {:?}",
                result.gap
            );
        }
        other => return Err(PricingError::BadStatus(format!("{other:?}"))),
    }

    let levels: f64 = vars.b.iter().map(|&bj| result.value(bj).round()).sum();
    let p_inner = grid.p_lo + vars.step * levels;
    let prices = PriceSet::from_config(cfg, p_inner, result.value(vars.p_h2));
    let grab = |vs: &[VarRef]| -> Vec<f64> {
        vs.iter().map(|&v| result.value(v).max(0.0)).collect()
    };
    let distribution = Distribution {
        p_ae_inner: grab(&vars.ae_inner),
        p_ae_purch: grab(&vars.ae_purch),
        p_as_inner: grab(&vars.as_inner),
        p_as_purch: grab(&vars.as_purch),
    };
    let ledger = economics::ledger(
        &sizing.schedule,
        &sizing.capacities,
        &prices,
        &distribution,
        cfg,
    )?;
    // stage II must not move total revenue
    let tol = 1e-6 * sizing.dtr_rmb.abs().max(1.0);
    if (ledger.total - sizing.dtr_rmb).abs() > tol {
        return Err(PricingError::RevenueDrift {
            ledger: ledger.total,
            dtr: sizing.dtr_rmb,
        });
    }
    let er = er_report(&ledger)?;
    Ok(PricingOutcome {
        prices,
        distribution,
        ledger,
        er,
        objective: result.objective,
        er_relaxed: false,
        wall_s: result.wall.as_secs_f64(),
    })
}
