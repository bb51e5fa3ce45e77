use clap::{Parser, Subcommand};
use repta::config::RunConfig;
use repta::pipeline::{
    cmd_bench, cmd_fit, cmd_price, cmd_robust, cmd_run, cmd_size, cmd_sweep, PipelineError,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Sizing and pricing toolkit for renewable-power-to-ammonia plants.
#[derive(Parser)]
#[command(name = "repta", version, about)]
struct Cli {
    /// TOML configuration; omit to run the bundled synthetic case.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and CSV tables.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Profile-synthesizer seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative MIP gap override.
    #[arg(long, global = true)]
    gap: Option<f64>,
    /// Per-solve wall-clock limit in seconds (0 = unlimited).
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stage I only: optimal capacities and the hourly schedule.
    Size {
        /// proposed | bs1 | bs2 | bs3 | bs4
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Robust frontier: max uncertainty horizon per revenue-deviation factor.
    Robust {
        /// Comma-separated revenue deviation factors in [0, 1].
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
    },
    /// Stage II only: inner prices balancing the investors.
    Price,
    /// Full pipeline: size, robust frontier, price, assess.
    Run {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
    },
    /// Scenario comparison table.
    Bench,
    /// Sensitivity to the ammonia scheduling period.
    Sweep {
        /// Comma-separated scheduling periods in hours.
        #[arg(long, value_delimiter = ',')]
        dtas: Option<Vec<f64>>,
    },
    /// Identify the transition time constant from an observed trajectory.
    Fit,
}

fn load_config(cli: &Cli) -> Result<RunConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.profiles.seed = seed;
    }
    if let Some(gap) = cli.gap {
        cfg.solver.gap = gap;
    }
    if let Some(limit) = cli.time_limit {
        cfg.solver.time_limit_s = limit;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<(), PipelineError> {
    let mut cfg = load_config(cli)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Size { scenario } => {
            if let Some(s) = scenario {
                cfg.run.scenario = s.clone();
            }
            let row = cmd_size(&cfg, out)?;
            println!(
                "sized {}: C_W {:.1} MW, C_S {:.1} MW, C_AE {:.1} MW, C_HS {:.3e} Nm3, DTR {:.1}e4 RMB",
                row.scenario,
                row.sizes.c_w_mw,
                row.sizes.c_s_mw,
                row.sizes.c_ae_mw,
                row.sizes.c_hs_nm3,
                row.dtr_1e4_rmb
            );
        }
        Command::Robust { beta } => {
            if let Some(b) = beta {
                cfg.run.betas = b.clone();
            }
            let rows = cmd_robust(&cfg, out)?;
            for r in &rows {
                println!(
                    "beta {:.2}: alpha* {:.3}, C_HS {:.3e} Nm3, r_AS {:.4}, RTR {:.1}e4 RMB",
                    r.beta,
                    r.alpha_star,
                    r.c_hs_robust_nm3,
                    r.r_as,
                    r.rtr_1e4_rmb()
                );
            }
        }
        Command::Price => {
            let json = cmd_price(&cfg, out)?;
            println!(
                "p_Inner {:.4} RMB/kWh, p_H2_Inner {:.4} RMB/Nm3, deviation {:.6}",
                json.p_inner, json.p_h2_inner, json.deviation_sum
            );
        }
        Command::Run { scenario, beta } => {
            if let Some(s) = scenario {
                cfg.run.scenario = s.clone();
            }
            if let Some(b) = beta {
                cfg.run.betas = b.clone();
            }
            let report = cmd_run(&cfg, out)?;
            println!(
                "{}: DTR {:.1}e4 RMB, FLH_AE {:.0} h, net on-grid {:.1}%, wall {:.1}s",
                report.scenario,
                report.dtr_1e4_rmb,
                report.flh_ae_h,
                100.0 * report.rates.net_on_grid,
                report.wall_s
            );
        }
        Command::Bench => {
            let rows = cmd_bench(&cfg, out)?;
            for r in &rows {
                println!(
                    "{:>8}: DTR {:>10.1}e4 RMB, ER_sys {}",
                    r.scenario.to_string(),
                    r.dtr_1e4_rmb,
                    r.er_system
                        .map(|e| format!("{:.2}%", 100.0 * e))
                        .unwrap_or_else(|| "n/a".into())
                );
            }
        }
        Command::Sweep { dtas } => {
            if let Some(d) = dtas {
                cfg.run.dtas_sweep_h = Some(d.clone());
            }
            let rows = cmd_sweep(&cfg, out)?;
            for r in &rows {
                println!(
                    "dtas {:>6.1} h: DTR {:>10.1}e4 RMB, C_HS {:.3e} Nm3",
                    r.dtas_h, r.dtr_1e4_rmb, r.sizes.c_hs_nm3
                );
            }
        }
        Command::Fit => {
            let fit = cmd_fit(&cfg, out)?;
            println!(
                "T_trans {:.4} h, rmse {:.3} ({} samples)",
                fit.t_trans_h, fit.rmse, fit.samples
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 3 {
                eprintln!("hint: raise --time-limit (0 disables it) or shrink operation.n");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
