//! Ammonia synthesis flexibility: power consumption, quasi-steady-state
//! scheduling, first-order setpoint transitions, and transition-constant
//! identification.

use thiserror::Error;

/// Moles of hydrogen in one normal cubic metre (ideal gas at 0 C, 1 atm).
const MOL_PER_NM3: f64 = 1000.0 / 22.414;
/// Tonnes of nitrogen consumed per Nm3 of hydrogen at the 3:1 molar ratio.
const N2_T_PER_NM3_H2: f64 = MOL_PER_NM3 / 3.0 * 28.0e-6;
/// Nm3 of hydrogen per kg.
pub const NM3_PER_KG_H2: f64 = 11.126;

/// Search bracket and tolerance for the transition-constant fit (hours).
const FIT_T_MIN: f64 = 0.05;
const FIT_T_MAX: f64 = 50.0;
const FIT_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum AmmoniaError {
    #[error("negative hydrogen flow {0}")]
    NegativeFlow(f64),
    #[error("transition time constant must be positive, got {0}")]
    NonPositiveTimeConstant(f64),
    #[error("transition elapsed time must be non-negative, got {0}")]
    NegativeElapsed(f64),
    #[error("setpoint {value} outside load band [{lo}, {hi}] (window {window})")]
    SetpointOutOfBand {
        window: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("plan has {got} setpoints, horizon needs {want}")]
    PlanLength { got: usize, want: usize },
    #[error("hourly step {step} at hour {hour} exceeds ramp band [{lo}, {hi}]")]
    RampViolation {
        hour: usize,
        step: f64,
        lo: f64,
        hi: f64,
    },
    #[error("fit undefined: start and end setpoints are equal ({0})")]
    FitUndefined(f64),
    #[error("fit needs at least 3 observed samples, got {0}")]
    FitTooShort(usize),
}

/// Parameters of the synthesis train's flexibility model.
#[derive(Debug, Clone, Copy)]
pub struct AmmoniaParams {
    /// Nitrogen supply power, MWh per tonne N2.
    pub kappa_n2: f64,
    /// Synthesis power, MWh per tonne NH3.
    pub kappa_nh3: f64,
    /// Rated hydrogen consumption, Nm3/h.
    pub q_h2_rated: f64,
    /// Load band as fractions of rated flow.
    pub eta_as_min: f64,
    pub eta_as_max: f64,
    /// Ramp limits, per-unit load per hour.
    pub r_plus: f64,
    pub r_minus: f64,
    /// Scheduling period, hours.
    pub dtas_h: f64,
    /// Transition time constant, hours.
    pub t_trans_h: f64,
    /// Hydrogen-to-ammonia conversion, t per Nm3.
    pub c_h2ma: f64,
}

impl AmmoniaParams {
    /// Combined synthesis-train power per Nm3/h of hydrogen consumed
    /// (MWh/Nm3), from the nitrogen and ammonia terms at the 3:1:2
    /// stoichiometric ratio.
    pub fn kappa_as(&self) -> f64 {
        derive_kappa_as(self)
    }

    pub fn setpoint_lo(&self) -> f64 {
        self.eta_as_min * self.q_h2_rated
    }

    pub fn setpoint_hi(&self) -> f64 {
        self.eta_as_max * self.q_h2_rated
    }
}

/// Planned quasi-steady-state schedule: one hydrogen setpoint per window.
#[derive(Debug, Clone, PartialEq)]
pub struct QssPlan {
    /// Setpoints in Nm3/h, one per scheduling window.
    pub setpoints: Vec<f64>,
}

impl QssPlan {
    pub fn new(setpoints: Vec<f64>) -> Self {
        Self { setpoints }
    }

    /// Checks the load band on every setpoint and the expected window count.
    pub fn validate(&self, params: &AmmoniaParams, horizon_h: f64) -> Result<(), AmmoniaError> {
        let want = (horizon_h / params.dtas_h).round() as usize;
        if self.setpoints.len() != want {
            return Err(AmmoniaError::PlanLength {
                got: self.setpoints.len(),
                want,
            });
        }
        let (lo, hi) = (params.setpoint_lo(), params.setpoint_hi());
        let slack = 1e-9 * params.q_h2_rated.max(1.0);
        for (k, &s) in self.setpoints.iter().enumerate() {
            if s < lo - slack || s > hi + slack {
                return Err(AmmoniaError::SetpointOutOfBand {
                    window: k,
                    value: s,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

/// Power drawn per Nm3/h of hydrogen, MWh/Nm3.
///
/// One Nm3 of hydrogen carries 1/3 as many moles of nitrogen (at 28 g/mol)
/// and yields 2/3 as many moles of ammonia, captured by `c_h2ma`.
pub fn derive_kappa_as(params: &AmmoniaParams) -> f64 {
    params.kappa_n2 * N2_T_PER_NM3_H2 + params.kappa_nh3 * params.c_h2ma
}

/// Synthesis-train power draw (MW) at hydrogen consumption `q_h2_out` (Nm3/h).
pub fn as_power(q_h2_out: f64, params: &AmmoniaParams) -> Result<f64, AmmoniaError> {
    if q_h2_out < 0.0 {
        return Err(AmmoniaError::NegativeFlow(q_h2_out));
    }
    Ok(params.kappa_as() * q_h2_out)
}

/// First-order relaxation from setpoint `q_k` toward `q_k1`, `tau` hours
/// after the switch.
pub fn transition(q_k: f64, q_k1: f64, t_trans_h: f64, tau_h: f64) -> Result<f64, AmmoniaError> {
    if t_trans_h <= 0.0 {
        return Err(AmmoniaError::NonPositiveTimeConstant(t_trans_h));
    }
    if tau_h < 0.0 {
        return Err(AmmoniaError::NegativeElapsed(tau_h));
    }
    Ok(q_k1 + (q_k - q_k1) * (-tau_h / t_trans_h).exp())
}

/// Expands a QSS plan into the hourly hydrogen-consumption trajectory.
///
/// Each window relaxes from the previous setpoint toward its own, sampled at
/// step right-endpoints; the first window starts settled. The result is
/// checked against the hourly ramp band and never returned silently out of
/// band.
pub fn discretize_plan(
    plan: &QssPlan,
    params: &AmmoniaParams,
    n: usize,
    dt_h: f64,
) -> Result<Vec<f64>, AmmoniaError> {
    plan.validate(params, n as f64 * dt_h)?;
    let steps_per_window = (params.dtas_h / dt_h).round() as usize;
    let mut series = Vec::with_capacity(n);
    for (k, &target) in plan.setpoints.iter().enumerate() {
        let from = if k == 0 { target } else { plan.setpoints[k - 1] };
        for i in 0..steps_per_window {
            let tau = (i + 1) as f64 * dt_h;
            series.push(transition(from, target, params.t_trans_h, tau)?);
        }
    }
    debug_assert_eq!(series.len(), n);
    let hi = params.r_plus * params.q_h2_rated * dt_h;
    let lo = -params.r_minus * params.q_h2_rated * dt_h;
    let slack = 1e-9 * params.q_h2_rated.max(1.0);
    for t in 1..series.len() {
        let step = series[t] - series[t - 1];
        if step > hi + slack || step < lo - slack {
            return Err(AmmoniaError::RampViolation {
                hour: t,
                step,
                lo,
                hi,
            });
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy)]
pub struct TransitionFit {
    /// Fitted time constant, hours.
    pub t_trans_h: f64,
    /// Root-mean-square residual in the input's flow unit.
    pub rmse: f64,
}

/// Fits the transition time constant to an observed hourly flow series by
/// least squares, with samples taken at tau = 0, 1, 2, ... hours after the
/// setpoint switch from `q_k` to `q_k1`.
///
/// A coarse log-spaced scan brackets the minimum before a golden-section
/// refinement, so a locally rough residual cannot trap the search.
pub fn fit_t_trans(observed: &[f64], q_k: f64, q_k1: f64) -> Result<TransitionFit, AmmoniaError> {
    if observed.len() < 3 {
        return Err(AmmoniaError::FitTooShort(observed.len()));
    }
    if q_k == q_k1 {
        return Err(AmmoniaError::FitUndefined(q_k));
    }
    let sse = |t: f64| -> f64 {
        observed
            .iter()
            .enumerate()
            .map(|(i, &obs)| {
                let model = q_k1 + (q_k - q_k1) * (-(i as f64) / t).exp();
                (obs - model).powi(2)
            })
            .sum()
    };

    let scan_points = 64;
    let log_lo = FIT_T_MIN.ln();
    let log_hi = FIT_T_MAX.ln();
    let scan_t = |i: usize| {
        (log_lo + (log_hi - log_lo) * i as f64 / (scan_points - 1) as f64).exp()
    };
    let mut best_i = 0;
    let mut best_sse = f64::INFINITY;
    for i in 0..scan_points {
        let s = sse(scan_t(i));
        if s < best_sse {
            best_sse = s;
            best_i = i;
        }
    }
    let mut a = scan_t(best_i.saturating_sub(1));
    let mut b = scan_t((best_i + 1).min(scan_points - 1));

    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (sse(c), sse(d));
    while b - a > FIT_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = sse(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = sse(d);
        }
    }
    let t_hat = 0.5 * (a + b);
    Ok(TransitionFit {
        t_trans_h: t_hat,
        rmse: (sse(t_hat) / observed.len() as f64).sqrt(),
    })
}
