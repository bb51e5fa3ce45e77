//! The hourly operation solution and an independent constraint-by-constraint
//! audit that re-derives every feasibility requirement from the raw series,
//! without going through the optimization model.

use crate::config::TechnoEconomicConfig;

/// Installed capacities chosen by the sizing stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacities {
    pub c_w_mw: f64,
    pub c_s_mw: f64,
    pub n_ae: u32,
    pub c_ae_single_mw: f64,
    pub c_hs_nm3: f64,
}

impl Capacities {
    pub fn c_ae_mw(&self) -> f64 {
        self.n_ae as f64 * self.c_ae_single_mw
    }
}

/// Full hourly operation solution. Hydrogen flows in Nm3/h, storage in Nm3.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub dt_h: f64,
    pub p_w: Vec<f64>,
    pub p_s: Vec<f64>,
    pub p_sell: Vec<f64>,
    pub p_purch: Vec<f64>,
    pub p_curt: Vec<f64>,
    pub p_ae: Vec<f64>,
    pub p_as: Vec<f64>,
    pub b_grid: Vec<u8>,
    pub q_in: Vec<f64>,
    pub q_out: Vec<f64>,
    /// Tank level, length N+1.
    pub n_sto: Vec<f64>,
    /// QSS setpoints, one per scheduling window.
    pub setpoints: Vec<f64>,
    /// Ammonia produced over the horizon (t).
    pub m_nh3_t: f64,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.p_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_w.is_empty()
    }

    /// Power delivered by renewables to the internal loads at each hour.
    pub fn p_inner(&self, t: usize) -> f64 {
        self.p_w[t] + self.p_s[t] - self.p_sell[t] - self.p_curt[t]
    }

    pub fn renewable_energy_mwh(&self) -> f64 {
        self.dt_h
            * self
                .p_w
                .iter()
                .zip(&self.p_s)
                .map(|(w, s)| w + s)
                .sum::<f64>()
    }

    pub fn sold_energy_mwh(&self) -> f64 {
        self.dt_h * self.p_sell.iter().sum::<f64>()
    }

    pub fn purchased_energy_mwh(&self) -> f64 {
        self.dt_h * self.p_purch.iter().sum::<f64>()
    }

    pub fn curtailed_energy_mwh(&self) -> f64 {
        self.dt_h * self.p_curt.iter().sum::<f64>()
    }

    /// Rates of on-grid, off-grid, net on-grid, and curtailed energy as
    /// fractions of renewable generation.
    pub fn exchange_rates(&self) -> ExchangeRates {
        let gen = self.renewable_energy_mwh();
        let safe = |x: f64| if gen > 0.0 { x / gen } else { 0.0 };
        ExchangeRates {
            on_grid: safe(self.sold_energy_mwh()),
            off_grid: safe(self.purchased_energy_mwh()),
            net_on_grid: safe(self.sold_energy_mwh() - self.purchased_energy_mwh()),
            curtailment: safe(self.curtailed_energy_mwh()),
        }
    }

    /// Electrolyzer full-load hours.
    pub fn flh_ae(&self, caps: &Capacities) -> f64 {
        let c_ae = caps.c_ae_mw();
        if c_ae > 0.0 {
            self.dt_h * self.p_ae.iter().sum::<f64>() / c_ae
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExchangeRates {
    pub on_grid: f64,
    pub off_grid: f64,
    pub net_on_grid: f64,
    pub curtailment: f64,
}

/// Re-checks every operational constraint family on the raw series.
/// Returns one message per violation; empty means the schedule is feasible
/// at tolerance `tol` (relative to each check's own scale).
pub fn audit(
    schedule: &Schedule,
    caps: &Capacities,
    wind: &[f64],
    solar: &[f64],
    cfg: &TechnoEconomicConfig,
    tol: f64,
) -> Vec<String> {
    let mut bad = Vec::new();
    let op = &cfg.operation;
    let s = schedule;
    let n = s.len();
    let dt = s.dt_h;
    let params = cfg.ammonia_params();
    let q_r = params.q_h2_rated;
    let c_ae = caps.c_ae_mw();
    let power_scale: f64 = caps.c_w_mw + caps.c_s_mw + c_ae + 1.0;
    let allow_p = tol * power_scale;

    if s.p_s.len() != n
        || s.p_sell.len() != n
        || s.p_purch.len() != n
        || s.p_curt.len() != n
        || s.p_ae.len() != n
        || s.p_as.len() != n
        || s.q_in.len() != n
        || s.q_out.len() != n
        || s.b_grid.len() != n
        || s.n_sto.len() != n + 1
        || wind.len() != n
        || solar.len() != n
    {
        bad.push("series length mismatch".into());
        return bad;
    }

    for t in 0..n {
        // renewable availability
        if (s.p_w[t] - caps.c_w_mw * wind[t]).abs() > allow_p {
            bad.push(format!("wind output off profile at t={t}"));
        }
        if (s.p_s[t] - caps.c_s_mw * solar[t]).abs() > allow_p {
            bad.push(format!("solar output off profile at t={t}"));
        }
        // hourly power balance
        let lhs = s.p_w[t] + s.p_s[t] + s.p_purch[t];
        let rhs = s.p_sell[t] + s.p_curt[t] + s.p_ae[t] + s.p_as[t];
        if (lhs - rhs).abs() > allow_p {
            bad.push(format!("power balance violated at t={t}: {}", lhs - rhs));
        }
        // conversion identities
        if (s.p_ae[t] - cfg.kappa_h2_mwh_per_nm3() * s.q_in[t]).abs() > allow_p {
            bad.push(format!("electrolyzer conversion violated at t={t}"));
        }
        if (s.p_as[t] - params.kappa_as() * s.q_out[t]).abs() > allow_p {
            bad.push(format!("synthesis conversion violated at t={t}"));
        }
        // electrolyzer band
        if s.p_ae[t] < op.eta_ae_min * c_ae - allow_p
            || s.p_ae[t] > op.eta_ae_max * c_ae + allow_p
        {
            bad.push(format!("electrolyzer load band violated at t={t}"));
        }
        // grid exclusivity, binary-enforced
        if s.b_grid[t] > 1 {
            bad.push(format!("b_grid not binary at t={t}"));
        }
        if s.b_grid[t] == 1 && s.p_purch[t] > allow_p {
            bad.push(format!("purchase while on-grid at t={t}"));
        }
        if s.b_grid[t] == 0 && s.p_sell[t] > allow_p {
            bad.push(format!("sale while off-grid at t={t}"));
        }
        if s.p_sell[t].min(s.p_purch[t]) > allow_p {
            bad.push(format!("simultaneous sale and purchase at t={t}"));
        }
        for (name, v) in [
            ("sell", s.p_sell[t]),
            ("purch", s.p_purch[t]),
            ("curt", s.p_curt[t]),
            ("q_in", s.q_in[t]),
            ("q_out", s.q_out[t]),
        ] {
            if v < -allow_p.max(tol) {
                bad.push(format!("negative {name} at t={t}"));
            }
        }
    }

    // storage recursion, band, and cycle
    let h2_scale = q_r.max(1.0);
    let allow_h2 = tol * h2_scale;
    let allow_sto = tol * caps.c_hs_nm3.max(h2_scale);
    for t in 0..n {
        let step = s.n_sto[t] + (s.q_in[t] - s.q_out[t]) * dt;
        if (s.n_sto[t + 1] - step).abs() > allow_sto {
            bad.push(format!("storage recursion violated at t={t}"));
        }
        if s.n_sto[t] < op.eta_hs_min * caps.c_hs_nm3 - allow_sto
            || s.n_sto[t] > op.eta_hs_max * caps.c_hs_nm3 + allow_sto
        {
            bad.push(format!("storage band violated at t={t}"));
        }
    }
    if (s.n_sto[0] - 0.5 * caps.c_hs_nm3).abs() > allow_sto {
        bad.push("storage does not start at half capacity".into());
    }
    if (s.n_sto[n] - 0.5 * caps.c_hs_nm3).abs() > allow_sto {
        bad.push("storage does not end at half capacity".into());
    }

    // net on-grid energy cap
    let gen = s.renewable_energy_mwh();
    let net = s.sold_energy_mwh() - s.purchased_energy_mwh();
    if net > cfg.economics.r_net * gen + tol * gen.max(1.0) {
        bad.push(format!(
            "net on-grid energy {net:.3} MWh exceeds cap {:.3} MWh",
            cfg.economics.r_net * gen
        ));
    }

    // ammonia accounting and cap
    let m = params.c_h2ma * dt * s.q_out.iter().sum::<f64>();
    if (m - s.m_nh3_t).abs() > tol * m.abs().max(1.0) {
        bad.push("reported ammonia output does not match hydrogen series".into());
    }
    if m > cfg.m_bar_horizon_t() * (1.0 + tol) + tol {
        bad.push(format!(
            "ammonia output {m:.3} t exceeds cap {:.3} t",
            cfg.m_bar_horizon_t()
        ));
    }

    // QSS setpoints: band, window tie, and hourly ramp
    let steps_per_window = (op.dtas_h / dt).round() as usize;
    if s.setpoints.len() * steps_per_window != n {
        bad.push("setpoint count does not tile the horizon".into());
    } else {
        let (lo, hi) = (params.setpoint_lo(), params.setpoint_hi());
        for (k, &sp) in s.setpoints.iter().enumerate() {
            if sp < lo - allow_h2 || sp > hi + allow_h2 {
                bad.push(format!("setpoint {k} outside load band"));
            }
        }
        for t in 0..n {
            if (s.q_out[t] - s.setpoints[t / steps_per_window]).abs() > allow_h2 {
                bad.push(format!("hydrogen draw off its setpoint at t={t}"));
            }
        }
        for t in 1..n {
            let step = s.q_out[t] - s.q_out[t - 1];
            if step > params.r_plus * q_r * dt + allow_h2
                || step < -params.r_minus * q_r * dt - allow_h2
            {
                bad.push(format!("hourly ramp violated at t={t}"));
            }
        }
    }

    bad
}
