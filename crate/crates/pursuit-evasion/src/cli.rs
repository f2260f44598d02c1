//! Command-line front end.
//!
//! Five subcommands, all driven by the same JSON config file
//! (see [`crate::config::RunConfig`]):
//!
//! * `solve` — optimal observation schedule, JSON,
//! * `simulate` — one closed-loop path under that schedule, CSV (+ SVG),
//! * `montecarlo` — batch statistics against the closed-form expectation, JSON,
//! * `period` — infinite-horizon sampling interval and loop spectrum, JSON,
//! * `sweep` — re-solve across a list of observation prices, CSV.
//!
//! Exit codes: `0` success, `2` configuration/input error, `3` numerical
//! failure. Payloads go to `--out` when given, stdout otherwise; diagnostics
//! go to stderr.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::analysis::{closed_loop_eigs, expected_cost};
use crate::ce::{periodic_period, solve_ce_game_with_eps, CESolution};
use crate::config::RunConfig;
use crate::engine::{monte_carlo_with_steps, simulate};
use crate::error::{Error, Result};
use crate::export::{
    emit_plot_svg, export_monte_carlo_json, export_periodic_json, export_solution_json,
    export_sweep_csv, export_trajectory_csv, PlotStyle, SweepRow,
};
use crate::lqg::{solve_riccati_algebraic, solve_riccati_finite, GramianCache, RiccatiSolution};
use crate::model::GameSpec;

#[derive(Parser)]
#[command(
    name = "pursuit-evasion",
    version,
    about = "Pursuit-evasion games with costly, mutually revealing observations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the optimal observation schedule (JSON).
    Solve {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one closed-loop path under the optimal schedule (CSV).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render a four-panel SVG of the path.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a Monte Carlo batch and compare with the closed-form cost (JSON).
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        /// Override the number of paths from the config.
        #[arg(long)]
        paths: Option<usize>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Infinite-horizon periodic sampling interval and loop spectrum (JSON).
    Period {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-solve the schedule across a list of prices (CSV table).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Which parameter to sweep; only `Op` is supported.
        #[arg(long)]
        param: String,
        /// Comma-separated price values, e.g. `10,900,inf`.
        #[arg(long)]
        values: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` and runs one subcommand, translating every failure into the
/// documented exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 2;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

struct Solved {
    spec: GameSpec,
    ricc: RiccatiSolution,
    gram: GramianCache,
    sol: CESolution,
}

fn solve_pipeline(cfg: &RunConfig) -> Result<Solved> {
    let spec = cfg.to_spec()?;
    let ricc = solve_riccati_finite(&spec, cfg.numerics.riccati_steps)?;
    let gram = GramianCache::new(&spec, ricc.grid().clone())?;
    let sol = solve_ce_game_with_eps(&spec, &gram, &ricc, cfg.effective_eps())?;
    Ok(Solved {
        spec,
        ricc,
        gram,
        sol,
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Solve { config, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let solved = solve_pipeline(&cfg)?;
            let mut text = export_solution_json(&solved.sol)?;
            text.push('\n');
            emit(&out, &text)
        }
        Command::Simulate {
            config,
            out,
            svg,
            seed,
        } => {
            let cfg = RunConfig::from_path(&config)?;
            let solved = solve_pipeline(&cfg)?;
            if solved.sol.observe_always {
                return Err(Error::OutOfRange(
                    "a zero observation price means observing continuously; there is no \
                     finite schedule to simulate"
                        .into(),
                ));
            }
            let rec = simulate(
                &solved.spec,
                &solved.ricc,
                &solved.sol.pursuer_plan,
                &solved.sol.evader_plan,
                seed.unwrap_or(cfg.numerics.seed),
                cfg.numerics.sim_steps,
            )?;
            if let Some(svg_path) = svg {
                let image = emit_plot_svg(&rec, &PlotStyle::default())?;
                std::fs::write(svg_path, image)?;
            }
            emit(&out, &export_trajectory_csv(&rec))
        }
        Command::Montecarlo {
            config,
            paths,
            seed,
            out,
        } => {
            let cfg = RunConfig::from_path(&config)?;
            let solved = solve_pipeline(&cfg)?;
            let summary = monte_carlo_with_steps(
                &solved.spec,
                &solved.ricc,
                &solved.sol.pursuer_plan,
                &solved.sol.evader_plan,
                paths.unwrap_or(cfg.experiment.monte_carlo_paths),
                seed.unwrap_or(cfg.numerics.seed),
                cfg.numerics.sim_steps,
            )?;
            let expected = expected_cost(
                &solved.spec,
                &solved.gram,
                &solved.ricc,
                &solved.sol.pursuer_plan,
                &solved.sol.evader_plan,
            )?;
            let mut text = export_monte_carlo_json(&summary, Some(&expected))?;
            text.push('\n');
            emit(&out, &text)
        }
        Command::Period { config, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let spec = cfg.to_spec()?;
            let k_inf = solve_riccati_algebraic(&spec)?;
            let per = periodic_period(&spec, &k_inf, spec.price_p)?;
            let report = closed_loop_eigs(&spec, &k_inf, per.dt_star)?;
            let mut text = export_periodic_json(&per, Some(&report))?;
            text.push('\n');
            emit(&out, &text)
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            if param != "Op" {
                return Err(Error::Schema {
                    field: "--param".into(),
                    message: format!("only `Op` can be swept, got `{param}`"),
                });
            }
            let prices = parse_values(&values)?;
            let cfg = RunConfig::from_path(&config)?;
            let spec = cfg.to_spec()?;
            let ricc = solve_riccati_finite(&spec, cfg.numerics.riccati_steps)?;
            let gram = GramianCache::new(&spec, ricc.grid().clone())?;
            let mut rows = Vec::with_capacity(prices.len());
            for price in prices {
                let mut spec_v = spec.clone();
                spec_v.price_p = price;
                let sol = solve_ce_game_with_eps(&spec_v, &gram, &ricc, cfg.effective_eps())?;
                rows.push(SweepRow {
                    op: price,
                    n_star: sol.pursuer_plan.n(),
                    objective: sol.objective,
                });
            }
            emit(&out, &export_sweep_csv(&rows))
        }
    }
}

/// Comma-separated prices; each entry is a nonnegative number or `inf`.
fn parse_values(values: &str) -> Result<Vec<f64>> {
    let mut prices = Vec::new();
    for raw in values.split(',') {
        let token = raw.trim();
        let v: f64 = token.parse().map_err(|_| Error::Schema {
            field: "--values".into(),
            message: format!("`{token}` is not a number or `inf`"),
        })?;
        if v.is_nan() || v < 0.0 {
            return Err(Error::Schema {
                field: "--values".into(),
                message: format!("prices must be nonnegative, got `{token}`"),
            });
        }
        prices.push(v);
    }
    if prices.is_empty() {
        return Err(Error::Schema {
            field: "--values".into(),
            message: "at least one price is required".into(),
        });
    }
    Ok(prices)
}
