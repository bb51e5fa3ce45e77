//! Stage I: the deterministic sizing MILP. Chooses capacities and the full
//! hourly operation schedule maximizing total system revenue; inner-price
//! terms are omitted from the objective because the total is provably
//! independent of them once the storage cycle closes.

use crate::config::TechnoEconomicConfig;
use crate::economics::{self, AnnualizedInvestments, KWH_PER_MWH};
use crate::profiles::{Profile, ProfileKind};
use crate::schedule::{Capacities, Schedule};
use repta_milp::{
    solve, Cmp, Domain, LinExpr, Model, ModelHandle, Sense, SolveOptions, SolveResult,
    SolveStatus, VarRef,
};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Hydrogen variables live in kNm3 inside the model; raw Nm3 magnitudes
/// (up to 5e6) destabilize the LP factorization.
const H2_K: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SizingError {
    #[error("profile length {got} does not match horizon {want}")]
    ProfileLength { got: usize, want: usize },
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Econ(#[from] crate::economics::EconError),
    #[error(transparent)]
    Model(#[from] repta_milp::ModelError),
    #[error(transparent)]
    Solve(#[from] repta_milp::SolveError),
    #[error("sizing model infeasible; feasibility returns when relaxing: {suspects:?}")]
    Infeasible { suspects: Vec<String> },
    #[error("solver hit its limit with no usable incumbent (gap {gap:?})")]
    LimitNoIncumbent { gap: Option<f64> },
    #[error("extracted schedule failed verification: {0:?}")]
    Verification(Vec<String>),
    #[error("override conflicts with capacity box: {0}")]
    BadOverride(String),
}

/// Benchmark scenarios plus the unrestricted proposed design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    Proposed,
    Bs1,
    Bs2,
    Bs3,
    Bs4,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Bs1,
        Scenario::Bs2,
        Scenario::Bs3,
        Scenario::Bs4,
        Scenario::Proposed,
    ];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::Proposed => "proposed",
            Scenario::Bs1 => "bs1",
            Scenario::Bs2 => "bs2",
            Scenario::Bs3 => "bs3",
            Scenario::Bs4 => "bs4",
        };
        f.write_str(s)
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(Scenario::Proposed),
            "bs1" => Ok(Scenario::Bs1),
            "bs2" => Ok(Scenario::Bs2),
            "bs3" => Ok(Scenario::Bs3),
            "bs4" => Ok(Scenario::Bs4),
            other => Err(format!("unknown scenario `{other}`")),
        }
    }
}

/// Arithmetic grid `lo + i*step` for `i in 0..count`.
#[derive(Debug, Clone, Copy)]
pub struct AxisGrid {
    pub lo: f64,
    pub step: f64,
    pub count: usize,
}

impl AxisGrid {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.lo + self.step * i as f64)
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.step * (self.count.saturating_sub(1)) as f64
    }
}

/// Restricts the continuous capacities to a finite grid; used when the
/// decomposed pipeline must search exactly the set an enumeration oracle
/// searches.
#[derive(Debug, Clone, Copy)]
pub struct CapacityGrid {
    pub c_w: AxisGrid,
    pub c_s: AxisGrid,
    pub c_hs_nm3: AxisGrid,
    pub n_ae_max: u32,
}

/// Scenario pins and structural switches for the builder.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub pin_c_w: Option<f64>,
    pub pin_c_s: Option<f64>,
    pub pin_n_ae: Option<u32>,
    pub pin_c_hs: Option<f64>,
    /// Remove the buffer tank: no storage variables, hydrogen production
    /// tracks consumption hour by hour.
    pub no_tank: bool,
    pub grid: Option<CapacityGrid>,
}

impl Overrides {
    pub fn for_scenario(s: Scenario, cfg: &TechnoEconomicConfig) -> Self {
        match s {
            Scenario::Proposed => Self::default(),
            Scenario::Bs1 => Self {
                pin_c_s: Some(0.0),
                ..Self::default()
            },
            Scenario::Bs2 => Self {
                pin_c_w: Some(0.0),
                ..Self::default()
            },
            Scenario::Bs3 => Self {
                no_tank: true,
                pin_c_hs: Some(0.0),
                ..Self::default()
            },
            Scenario::Bs4 => Self {
                pin_c_w: Some(200.0),
                pin_c_s: Some(260.0),
                pin_n_ae: Some((125.0 / cfg.operation.c_ae_single_mw).round() as u32),
                ..Self::default()
            },
        }
    }

    /// A zero storage pin means no tank at all: the builder drops the
    /// storage structure instead of emitting degenerate rows.
    fn normalized(mut self) -> Self {
        if self.pin_c_hs == Some(0.0) {
            self.no_tank = true;
        }
        self
    }

    /// Pins every capacity: the operation-only model used by the robust
    /// stage and by schedule sampling.
    pub fn fixed(caps: &Capacities, free_storage: bool) -> Self {
        Self {
            pin_c_w: Some(caps.c_w_mw),
            pin_c_s: Some(caps.c_s_mw),
            pin_n_ae: Some(caps.n_ae),
            pin_c_hs: if free_storage {
                None
            } else {
                Some(caps.c_hs_nm3)
            },
            no_tank: false,
            grid: None,
        }
    }
}

/// Handles to every variable of the sizing model, for extraction and audits.
#[derive(Debug, Clone)]
pub struct SizingVars {
    pub c_w: VarRef,
    pub c_s: VarRef,
    pub n_ae: VarRef,
    /// kNm3 inside the model.
    pub c_hs: VarRef,
    pub p_w: Vec<VarRef>,
    pub p_s: Vec<VarRef>,
    pub sell: Vec<VarRef>,
    pub purch: Vec<VarRef>,
    pub curt: Vec<VarRef>,
    pub p_ae: Vec<VarRef>,
    pub p_as: Vec<VarRef>,
    pub q_in: Vec<VarRef>,
    pub q_out: Vec<VarRef>,
    /// Empty when the tank is removed.
    pub n_sto: Vec<VarRef>,
    pub b_grid: Vec<VarRef>,
    pub setpoints: Vec<VarRef>,
}

/// Builds the sizing MILP over the given profiles.
///
/// The objective keeps only the price terms that survive the inner-trade
/// cancellation: feed-in revenue, grid purchases, ammonia sales, and the
/// annualized investments.
pub fn build_sizing_model(
    cfg: &TechnoEconomicConfig,
    wind: &Profile,
    solar: &Profile,
    ovr: &Overrides,
) -> Result<(ModelHandle, SizingVars), SizingError> {
    cfg.validate()?;
    let ovr = &ovr.normalized();
    let op = &cfg.operation;
    let n = op.n;
    let dt = op.dt_h;
    for (p, kind) in [(wind, ProfileKind::Wind), (solar, ProfileKind::Solar)] {
        if p.len() != n {
            return Err(SizingError::ProfileLength {
                got: p.len(),
                want: n,
            });
        }
        debug_assert_eq!(p.kind, kind);
    }

    let params = cfg.ammonia_params();
    let q_r_k = params.q_h2_rated * H2_K;
    let kappa_h2_k = cfg.kappa_h2_mwh_per_nm3() / H2_K;
    let kappa_as_k = params.kappa_as() / H2_K;
    let c_h2ma_k = op.c_h2ma_t_per_nm3 / H2_K;
    let single = op.c_ae_single_mw;
    let rates = economics::invest_rates(cfg)?;

    // effective capacity ceilings, honoring pins and grids
    let bounds = &cfg.bounds;
    let check_pin = |name: &str, v: f64, hi: f64| -> Result<(), SizingError> {
        if v < 0.0 || v > hi {
            return Err(SizingError::BadOverride(format!(
                "{name} pinned to {v}, outside [0, {hi}]"
            )));
        }
        Ok(())
    };
    if let Some(v) = ovr.pin_c_w {
        check_pin("C_W", v, bounds.c_w_max_mw)?;
    }
    if let Some(v) = ovr.pin_c_s {
        check_pin("C_S", v, bounds.c_s_max_mw)?;
    }
    if let Some(v) = ovr.pin_n_ae {
        check_pin("N_AE", v as f64, bounds.n_ae_max as f64)?;
    }
    if let Some(v) = ovr.pin_c_hs {
        check_pin("C_HS", v, bounds.c_hs_max_nm3)?;
    }
    let c_w_ub = ovr.pin_c_w.unwrap_or(bounds.c_w_max_mw);
    let c_s_ub = ovr.pin_c_s.unwrap_or(bounds.c_s_max_mw);
    let n_ae_ub = ovr.pin_n_ae.unwrap_or(bounds.n_ae_max);
    let c_hs_ub = if ovr.no_tank {
        0.0
    } else {
        ovr.pin_c_hs.unwrap_or(bounds.c_hs_max_nm3)
    };
    // per-unit profiles may exceed 1.0; bounds must honor the actual peaks
    let w_peak = wind.values.iter().copied().fold(1.0_f64, f64::max);
    let s_peak = solar.values.iter().copied().fold(1.0_f64, f64::max);
    // exclusivity constant: generation plus both loads at their peaks
    let m1 = c_w_ub * w_peak
        + c_s_ub * s_peak
        + op.eta_ae_max * n_ae_ub as f64 * single
        + op.eta_as_max * params.kappa_as() * params.q_h2_rated;

    let mut m = Model::new("sizing", Sense::Maximize);

    let bound_pair = |pin: Option<f64>, hi: f64| pin.map(|v| (v, v)).unwrap_or((0.0, hi));
    let (w_lo, w_hi) = bound_pair(ovr.pin_c_w, c_w_ub);
    let c_w = m.add_var("C_W", Domain::Continuous, w_lo, w_hi)?;
    let (s_lo, s_hi) = bound_pair(ovr.pin_c_s, c_s_ub);
    let c_s = m.add_var("C_S", Domain::Continuous, s_lo, s_hi)?;
    let (ae_lo, ae_hi) = ovr
        .pin_n_ae
        .map(|v| (v as f64, v as f64))
        .unwrap_or((0.0, n_ae_ub as f64));
    let n_ae = m.add_var("N_AE", Domain::Integer, ae_lo, ae_hi)?;
    let (hs_lo, hs_hi) = bound_pair(ovr.pin_c_hs.map(|v| v * H2_K), c_hs_ub * H2_K);
    let c_hs = m.add_var("C_HS", Domain::Continuous, hs_lo, hs_hi)?;

    if let Some(grid) = &ovr.grid {
        if grid.c_w.count == 0 || grid.c_s.count == 0 || grid.c_hs_nm3.count == 0 {
            return Err(SizingError::BadOverride(
                "capacity grid axes need at least one value".into(),
            ));
        }
        for (name, var, axis) in [
            ("C_W", c_w, grid.c_w),
            ("C_S", c_s, grid.c_s),
            (
                "C_HS",
                c_hs,
                AxisGrid {
                    lo: grid.c_hs_nm3.lo * H2_K,
                    step: grid.c_hs_nm3.step * H2_K,
                    count: grid.c_hs_nm3.count,
                },
            ),
        ] {
            let k = m.add_var(
                format!("{name}_grid_idx"),
                Domain::Integer,
                0.0,
                (axis.count - 1) as f64,
            )?;
            let mut tie = LinExpr::from(var);
            tie.add_term(k, -axis.step);
            m.add_constraint(format!("{name}_grid_tie"), tie, Cmp::Eq, axis.lo)?;
            m.set_bounds(var, axis.lo.min(axis.hi()), axis.hi().max(axis.lo))?;
        }
        m.set_bounds(n_ae, 0.0, grid.n_ae_max as f64)?;
    }

    let series = |m: &mut Model, name: &str, hi: f64| -> Result<Vec<VarRef>, SizingError> {
        (0..n)
            .map(|t| Ok(m.add_var(format!("{name}[{t}]"), Domain::Continuous, 0.0, hi)?))
            .collect()
    };
    let p_w = series(&mut m, "P_W", c_w_ub * w_peak)?;
    let p_s = series(&mut m, "P_S", c_s_ub * s_peak)?;
    let sell = series(&mut m, "P_sell", m1)?;
    let purch = series(&mut m, "P_purch", m1)?;
    let curt = series(&mut m, "P_curt", c_w_ub * w_peak + c_s_ub * s_peak)?;
    let p_ae = series(&mut m, "P_AE", op.eta_ae_max * n_ae_ub as f64 * single)?;
    let p_as = series(
        &mut m,
        "P_AS",
        op.eta_as_max * params.kappa_as() * params.q_h2_rated,
    )?;
    let q_in = series(
        &mut m,
        "q_in",
        op.eta_ae_max * n_ae_ub as f64 * single / kappa_h2_k,
    )?;
    let q_out = series(&mut m, "q_out", op.eta_as_max * q_r_k)?;
    let n_sto: Vec<VarRef> = if ovr.no_tank {
        Vec::new()
    } else {
        (0..=n)
            .map(|t| {
                Ok::<_, SizingError>(m.add_var(
                    format!("n_sto[{t}]"),
                    Domain::Continuous,
                    0.0,
                    op.eta_hs_max * c_hs_ub * H2_K,
                )?)
            })
            .collect::<Result<_, _>>()?
    };
    let b_grid: Vec<VarRef> = (0..n)
        .map(|t| Ok::<_, SizingError>(m.add_var(format!("b_grid[{t}]"), Domain::Binary, 0.0, 1.0)?))
        .collect::<Result<_, _>>()?;
    let windows = cfg.num_windows();
    let steps_per_window = (op.dtas_h / dt).round() as usize;
    let setpoints: Vec<VarRef> = (0..windows)
        .map(|k| {
            Ok::<_, SizingError>(m.add_var(
                format!("q_qss[{k}]"),
                Domain::Continuous,
                op.eta_as_min * q_r_k,
                op.eta_as_max * q_r_k,
            )?)
        })
        .collect::<Result<_, _>>()?;

    for t in 0..n {
        let mut avail_w = LinExpr::from(p_w[t]);
        avail_w.add_term(c_w, -wind.values[t]);
        m.add_constraint(format!("wind_tie[{t}]"), avail_w, Cmp::Eq, 0.0)?;
        let mut avail_s = LinExpr::from(p_s[t]);
        avail_s.add_term(c_s, -solar.values[t]);
        m.add_constraint(format!("solar_tie[{t}]"), avail_s, Cmp::Eq, 0.0)?;

        let balance = LinExpr::sum([
            (p_w[t], 1.0),
            (p_s[t], 1.0),
            (purch[t], 1.0),
            (sell[t], -1.0),
            (curt[t], -1.0),
            (p_ae[t], -1.0),
            (p_as[t], -1.0),
        ]);
        m.add_constraint(format!("balance[{t}]"), balance, Cmp::Eq, 0.0)?;

        let ae_conv = LinExpr::sum([(p_ae[t], 1.0), (q_in[t], -kappa_h2_k)]);
        m.add_constraint(format!("ae_conv[{t}]"), ae_conv, Cmp::Eq, 0.0)?;
        let as_conv = LinExpr::sum([(p_as[t], 1.0), (q_out[t], -kappa_as_k)]);
        m.add_constraint(format!("as_conv[{t}]"), as_conv, Cmp::Eq, 0.0)?;

        let ae_floor = LinExpr::sum([(p_ae[t], 1.0), (n_ae, -op.eta_ae_min * single)]);
        m.add_constraint(format!("ae_floor[{t}]"), ae_floor, Cmp::Ge, 0.0)?;
        let ae_ceil = LinExpr::sum([(p_ae[t], 1.0), (n_ae, -op.eta_ae_max * single)]);
        m.add_constraint(format!("ae_ceil[{t}]"), ae_ceil, Cmp::Le, 0.0)?;

        let sell_excl = LinExpr::sum([(sell[t], 1.0), (b_grid[t], -m1)]);
        m.add_constraint(format!("sell_excl[{t}]"), sell_excl, Cmp::Le, 0.0)?;
        let purch_excl = LinExpr::sum([(purch[t], 1.0), (b_grid[t], m1)]);
        m.add_constraint(format!("purch_excl[{t}]"), purch_excl, Cmp::Le, m1)?;

        let tie = LinExpr::sum([(q_out[t], 1.0), (setpoints[t / steps_per_window], -1.0)]);
        m.add_constraint(format!("qss_tie[{t}]"), tie, Cmp::Eq, 0.0)?;

        if ovr.no_tank {
            let eq = LinExpr::sum([(q_in[t], 1.0), (q_out[t], -1.0)]);
            m.add_constraint(format!("no_tank_tie[{t}]"), eq, Cmp::Eq, 0.0)?;
        } else {
            let sto = LinExpr::sum([
                (n_sto[t + 1], 1.0),
                (n_sto[t], -1.0),
                (q_in[t], -dt),
                (q_out[t], dt),
            ]);
            m.add_constraint(format!("sto_rec[{t}]"), sto, Cmp::Eq, 0.0)?;
            let lo = LinExpr::sum([(n_sto[t], 1.0), (c_hs, -op.eta_hs_min)]);
            m.add_constraint(format!("sto_floor[{t}]"), lo, Cmp::Ge, 0.0)?;
            let hi = LinExpr::sum([(n_sto[t], 1.0), (c_hs, -op.eta_hs_max)]);
            m.add_constraint(format!("sto_ceil[{t}]"), hi, Cmp::Le, 0.0)?;
        }
    }

    if !ovr.no_tank {
        let start = LinExpr::sum([(n_sto[0], 1.0), (c_hs, -0.5)]);
        m.add_constraint("sto_start", start, Cmp::Eq, 0.0)?;
        let end = LinExpr::sum([(n_sto[n], 1.0), (c_hs, -0.5)]);
        m.add_constraint("sto_end", end, Cmp::Eq, 0.0)?;
    }

    for k in 1..windows {
        let up = LinExpr::sum([(setpoints[k], 1.0), (setpoints[k - 1], -1.0)]);
        m.add_constraint(
            format!("ramp_up[{k}]"),
            up,
            Cmp::Le,
            op.ramp_up * q_r_k * dt,
        )?;
        let dn = LinExpr::sum([(setpoints[k], 1.0), (setpoints[k - 1], -1.0)]);
        m.add_constraint(
            format!("ramp_dn[{k}]"),
            dn,
            Cmp::Ge,
            -op.ramp_down * q_r_k * dt,
        )?;
    }

    let mut net = LinExpr::new();
    for t in 0..n {
        net.add_term(sell[t], dt);
        net.add_term(purch[t], -dt);
        net.add_term(p_w[t], -cfg.economics.r_net * dt);
        net.add_term(p_s[t], -cfg.economics.r_net * dt);
    }
    m.add_constraint("net_on_grid", net, Cmp::Le, 0.0)?;

    let ammonia = LinExpr::sum(q_out.iter().map(|&v| (v, c_h2ma_k * dt)));
    m.add_constraint("ammonia_cap", ammonia, Cmp::Le, cfg.m_bar_horizon_t())?;

    let mut obj = LinExpr::new();
    for t in 0..n {
        obj.add_term(sell[t], dt * KWH_PER_MWH * cfg.prices.p_fit);
        obj.add_term(purch[t], -dt * KWH_PER_MWH * cfg.prices.p_purch);
        obj.add_term(q_out[t], dt * cfg.prices.p_nh3 * c_h2ma_k);
    }
    obj.add_term(c_w, -rates.wt_per_mw);
    obj.add_term(c_s, -rates.pv_per_mw);
    obj.add_term(n_ae, -rates.ae_per_mw * single);
    obj.add_term(c_hs, -rates.hs_per_nm3 / H2_K);
    obj.add_constant(-rates.as_block);
    m.set_objective(obj)?;

    let vars = SizingVars {
        c_w,
        c_s,
        n_ae,
        c_hs,
        p_w,
        p_s,
        sell,
        purch,
        curt,
        p_ae,
        p_as,
        q_in,
        q_out,
        n_sto,
        b_grid,
        setpoints,
    };
    Ok((m.freeze(), vars))
}

/// Solver diagnostics attached to a sizing result.
#[derive(Debug, Clone, Serialize)]
pub struct SolveDiag {
    pub status: String,
    pub gap: Option<f64>,
    pub wall_s: f64,
    pub num_vars: usize,
    pub num_constraints: usize,
}

#[derive(Debug, Clone)]
pub struct SizingResult {
    pub scenario: Scenario,
    pub capacities: Capacities,
    pub schedule: Schedule,
    /// Deterministic total revenue, RMB/yr.
    pub dtr_rmb: f64,
    pub invests: AnnualizedInvestments,
    pub diag: SolveDiag,
}

impl SizingResult {
    pub fn dtr_1e4_rmb(&self) -> f64 {
        self.dtr_rmb / 1.0e4
    }
}

/// Solves a frozen sizing model and reconstructs the schedule.
#[allow(clippy::too_many_arguments)]
pub fn solve_sizing(
    model: &ModelHandle,
    vars: &SizingVars,
    cfg: &TechnoEconomicConfig,
    wind: &Profile,
    solar: &Profile,
    ovr: &Overrides,
    scenario: Scenario,
    options: &SolveOptions,
) -> Result<SizingResult, SizingError> {
    let ovr = &ovr.normalized();
    let result = solve(model, options)?;
    match result.status {
        SolveStatus::Optimal => {}
        SolveStatus::Limit if result.has_assignment() => {
            log::warn!(
                "sizing solve hit its limit; using incumbent with gap {:?}",
                result.gap
            );
        }
        SolveStatus::Infeasible => {
            return Err(SizingError::Infeasible {
                suspects: diagnose_infeasibility(cfg, wind, solar, ovr, options),
            });
        }
        _ => {
            return Err(SizingError::LimitNoIncumbent { gap: result.gap });
        }
    }

    let caps = extract_capacities(&result, vars, cfg);
    let schedule = extract_schedule(&result, vars, cfg, ovr);

    // backend-independent re-check of the raw assignment
    let violations =
        repta_milp::verify_solution(model, result.assignment().unwrap(), Default::default())?;
    if !violations.is_empty() {
        return Err(SizingError::Verification(
            violations
                .iter()
                .map(|v| format!("{}: {:+.3e}", v.name, v.amount))
                .collect(),
        ));
    }

    for (name, value, cap) in [
        ("C_W", caps.c_w_mw, cfg.bounds.c_w_max_mw),
        ("C_S", caps.c_s_mw, cfg.bounds.c_s_max_mw),
        ("N_AE", caps.n_ae as f64, cfg.bounds.n_ae_max as f64),
        ("C_HS", caps.c_hs_nm3, cfg.bounds.c_hs_max_nm3),
    ] {
        if ovr.grid.is_none() && value > cap * (1.0 - 1e-6) && cap > 0.0 {
            log::warn!("{name} = {value} binds its search box {cap}; widen the bounds");
        }
    }

    let invests = economics::annualized_investments(&caps, cfg)?;
    Ok(SizingResult {
        scenario,
        capacities: caps,
        schedule,
        dtr_rmb: result.objective,
        invests,
        diag: SolveDiag {
            status: format!("{:?}", result.status),
            gap: result.gap,
            wall_s: result.wall.as_secs_f64(),
            num_vars: model.num_vars(),
            num_constraints: model.num_constraints(),
        },
    })
}

/// Convenience: build and solve in one call.
pub fn run_sizing(
    cfg: &TechnoEconomicConfig,
    wind: &Profile,
    solar: &Profile,
    ovr: &Overrides,
    scenario: Scenario,
    options: &SolveOptions,
) -> Result<SizingResult, SizingError> {
    let (model, vars) = build_sizing_model(cfg, wind, solar, ovr)?;
    solve_sizing(&model, &vars, cfg, wind, solar, ovr, scenario, options)
}

fn extract_capacities(result: &SolveResult, vars: &SizingVars, cfg: &TechnoEconomicConfig) -> Capacities {
    // solver roundoff can leave capacities a few ulps below zero
    Capacities {
        c_w_mw: result.value(vars.c_w).max(0.0),
        c_s_mw: result.value(vars.c_s).max(0.0),
        n_ae: result.value(vars.n_ae).round().max(0.0) as u32,
        c_ae_single_mw: cfg.operation.c_ae_single_mw,
        c_hs_nm3: (result.value(vars.c_hs) / H2_K).max(0.0),
    }
}

fn extract_schedule(
    result: &SolveResult,
    vars: &SizingVars,
    cfg: &TechnoEconomicConfig,
    ovr: &Overrides,
) -> Schedule {
    let n = cfg.operation.n;
    let dt = cfg.operation.dt_h;
    let grab = |vs: &[VarRef]| -> Vec<f64> { vs.iter().map(|&v| result.value(v)).collect() };
    let grab_h2 = |vs: &[VarRef]| -> Vec<f64> {
        vs.iter().map(|&v| result.value(v) / H2_K).collect()
    };
    let q_out = grab_h2(&vars.q_out);
    let m_nh3 = cfg.operation.c_h2ma_t_per_nm3 * dt * q_out.iter().sum::<f64>();
    let n_sto = if ovr.no_tank {
        vec![0.0; n + 1]
    } else {
        grab_h2(&vars.n_sto)
    };
    Schedule {
        dt_h: dt,
        p_w: grab(&vars.p_w),
        p_s: grab(&vars.p_s),
        p_sell: grab(&vars.sell),
        p_purch: grab(&vars.purch),
        p_curt: grab(&vars.curt),
        p_ae: grab(&vars.p_ae),
        p_as: grab(&vars.p_as),
        b_grid: vars
            .b_grid
            .iter()
            .map(|&v| result.value(v).round() as u8)
            .collect(),
        q_in: grab_h2(&vars.q_in),
        q_out,
        n_sto,
        setpoints: grab_h2(&vars.setpoints),
        m_nh3_t: m_nh3,
    }
}

/// On infeasibility, relax one constraint family at a time and report which
/// relaxations restore feasibility.
fn diagnose_infeasibility(
    cfg: &TechnoEconomicConfig,
    wind: &Profile,
    solar: &Profile,
    ovr: &Overrides,
    options: &SolveOptions,
) -> Vec<String> {
    type Relaxation = Box<dyn Fn(&mut TechnoEconomicConfig)>;
    let mut suspects = Vec::new();
    let relaxations: Vec<(&str, Relaxation)> = vec![
        (
            "net on-grid energy cap",
            Box::new(|c: &mut TechnoEconomicConfig| c.economics.r_net = 1.0e6),
        ),
        (
            "ammonia output cap vs load floor",
            Box::new(|c: &mut TechnoEconomicConfig| {
                c.economics.m_nh3_annual_t *= 1.0e3;
            }),
        ),
        (
            "electrolyzer minimum load",
            Box::new(|c: &mut TechnoEconomicConfig| c.operation.eta_ae_min = 0.0),
        ),
        (
            "ammonia load band floor",
            Box::new(|c: &mut TechnoEconomicConfig| c.operation.eta_as_min = 1e-9),
        ),
        (
            "storage band",
            Box::new(|c: &mut TechnoEconomicConfig| {
                c.operation.eta_hs_min = 0.0;
                c.operation.eta_hs_max = 1.0;
            }),
        ),
    ];
    for (name, relax) in relaxations {
        let mut relaxed = cfg.clone();
        relax(&mut relaxed);
        if let Ok((model, _)) = build_sizing_model(&relaxed, wind, solar, ovr) {
            if let Ok(res) = solve(&model, options) {
                if res.status == SolveStatus::Optimal {
                    suspects.push(name.to_string());
                }
            }
        }
    }
    suspects
}
