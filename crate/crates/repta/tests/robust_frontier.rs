//! Robust-stage behavior against a direct alpha-grid feasibility sweep.

use repta::config::TechnoEconomicConfig;
use repta::profiles::{synthesize_profile, Profile, ProfileKind};
use repta::robust::{solve_robust, worst_case_profiles, ALPHA_TOL};
use repta::sizing::{run_sizing, Overrides, Scenario, SizingResult};
use repta_milp::SolveOptions;

fn toy() -> (TechnoEconomicConfig, Profile, Profile, SizingResult) {
    let mut cfg = TechnoEconomicConfig::default();
    cfg.operation.n = 48;
    cfg.operation.dtas_h = 24.0;
    cfg.scale_invest_to_horizon();
    let frac = cfg.horizon_frac();
    let wind = synthesize_profile(ProfileKind::Wind, 3500.0 * frac, 29, 48, 1.0).unwrap();
    let solar = synthesize_profile(ProfileKind::Solar, 1800.0 * frac, 29, 48, 1.0).unwrap();
    let sizing = run_sizing(
        &cfg,
        &wind,
        &solar,
        &Overrides::default(),
        Scenario::Proposed,
        &SolveOptions::exact(),
    )
    .unwrap();
    (cfg, wind, solar, sizing)
}

/// At beta = 1 the revenue bound is J >= 0; the bisection must agree with a
/// step-0.01 feasibility sweep over alpha.
#[test]
fn beta_one_matches_grid_sweep() {
    let (cfg, wind, solar, sizing) = toy();
    let opts = SolveOptions::exact();
    let r = solve_robust(&sizing, 1.0, &cfg, &wind, &solar, &opts, false).unwrap();

    let feasible_at = |alpha: f64| -> bool {
        let (w, s) = worst_case_profiles(&wind, &solar, alpha).unwrap();
        let pins = Overrides {
            pin_c_w: Some(sizing.capacities.c_w_mw),
            pin_c_s: Some(sizing.capacities.c_s_mw),
            pin_n_ae: Some(sizing.capacities.n_ae),
            ..Default::default()
        };
        match run_sizing(&cfg, &w, &s, &pins, Scenario::Proposed, &opts) {
            Ok(inner) => inner.dtr_rmb >= -1e-6 * sizing.dtr_rmb.abs().max(1.0),
            Err(_) => false,
        }
    };
    let mut sweep_best = 0.0;
    for i in 0..=100 {
        let alpha = i as f64 * 0.01;
        if feasible_at(alpha) {
            sweep_best = alpha;
        }
    }
    assert!(
        (r.alpha_star - sweep_best).abs() <= 0.01 + ALPHA_TOL,
        "bisection {} vs sweep {}",
        r.alpha_star,
        sweep_best
    );
}

/// A config with nothing at stake satisfies the bound even at alpha = 1;
/// the result carries the saturation flag.
#[test]
fn vacuous_config_saturates() {
    let mut cfg = TechnoEconomicConfig::default();
    cfg.operation.n = 24;
    cfg.operation.dtas_h = 24.0;
    cfg.prices.p_fit = 0.0;
    cfg.prices.p_purch = 0.0;
    cfg.prices.p_nh3 = 0.0;
    cfg.economics.m_nh3_annual_t = 0.0;
    for f in [
        &mut cfg.investment.wt,
        &mut cfg.investment.pv,
        &mut cfg.investment.ae,
        &mut cfg.investment.hs,
        &mut cfg.investment.as_block,
    ] {
        f.unit_cost = 0.0;
    }
    let wind = synthesize_profile(ProfileKind::Wind, 10.0, 3, 24, 1.0).unwrap();
    let solar = synthesize_profile(ProfileKind::Solar, 5.0, 3, 24, 1.0).unwrap();
    let sizing = run_sizing(
        &cfg,
        &wind,
        &solar,
        &Overrides::default(),
        Scenario::Proposed,
        &SolveOptions::exact(),
    )
    .unwrap();
    assert!(sizing.dtr_rmb.abs() < 1e-9);
    let r = solve_robust(
        &sizing,
        0.5,
        &cfg,
        &wind,
        &solar,
        &SolveOptions::exact(),
        false,
    )
    .unwrap();
    assert!(r.saturated);
    assert_eq!(r.alpha_star, 1.0);
}
