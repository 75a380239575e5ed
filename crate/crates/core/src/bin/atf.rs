use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use atf_relay::markov::{analytic_pipeline, AnalyticReport};
use atf_relay::sampling::{derive_stream, RngStream};
use atf_relay::scenario::Scenario;
use atf_relay::sim::{
    empirical_vs_analytic, simulate_atf, simulate_baseline_no_accumulation, SimReport,
};
use atf_relay::validate::{acceptance_suite, SuiteOptions};

const CSV_HEADER: &str = "var,analytic_throughput,analytic_outage,sim_throughput,sim_outage,\
                          tv_distance,mode_eh,mode_idfail,mode_forward,error";

#[derive(Parser)]
#[command(name = "atf", about = "Analytic and simulated evaluation of an \
    accumulate-then-forward energy-harvesting relay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario file (TOML); defaults apply for missing keys.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated blocks.
    #[arg(long)]
    blocks: Option<u64>,
    /// Channel sampling fidelity.
    #[arg(long, value_enum)]
    fidelity: Option<FidelityArg>,
    /// Battery tracking mode.
    #[arg(long, value_enum)]
    battery: Option<BatteryArg>,
    /// Write the CSV output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FidelityArg {
    Vector,
    Scalar,
}

#[derive(Clone, Copy, ValueEnum)]
enum BatteryArg {
    Discrete,
    Continuous,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepVar {
    SourcePowerDbm,
    InterfererPowerDbm,
    Rate,
    LevelsQ,
    Capacity,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form throughput and outage via the battery Markov chain.
    Analytic {
        #[command(flatten)]
        common: CommonArgs,
        /// Also print the transition matrix and stationary distribution.
        #[arg(long)]
        dump: bool,
    },
    /// Stochastic block-by-block simulation.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Simulate the three-slot no-accumulation baseline instead.
        #[arg(long)]
        baseline: bool,
    },
    /// Evaluate analytic + simulated results over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Variable to sweep.
        #[arg(long, value_enum)]
        var: SweepVar,
        /// Comma-separated, strictly increasing grid values.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        /// Battery levels for sweep points (holds the ~2-minute desk budget).
        #[arg(long, default_value_t = 20)]
        levels: usize,
    },
    /// Run the full cross-check suite.
    Validate {
        /// Reduced sample counts with looser tolerances.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(common: &CommonArgs) -> Result<Scenario, String> {
    let mut sc = match &common.scenario {
        Some(path) => Scenario::from_file(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => Scenario::default(),
    };
    if let Some(seed) = common.seed {
        sc.sim.seed = seed;
    }
    if let Some(blocks) = common.blocks {
        sc.sim.blocks = blocks;
    }
    if let Some(f) = common.fidelity {
        sc.sim.fidelity = match f {
            FidelityArg::Vector => atf_relay::scenario::FidelityKey::Vector,
            FidelityArg::Scalar => atf_relay::scenario::FidelityKey::Scalar,
        };
    }
    if let Some(b) = common.battery {
        sc.sim.battery_mode = match b {
            BatteryArg::Discrete => atf_relay::scenario::BatteryModeKey::Discrete,
            BatteryArg::Continuous => atf_relay::scenario::BatteryModeKey::Continuous,
        };
    }
    Ok(sc)
}

fn emit(common: &CommonArgs, text: &str) -> Result<(), String> {
    match &common.out {
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            f.write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9}")).unwrap_or_default()
}

fn csv_row(
    var: &str,
    analytic: Option<&AnalyticReport>,
    sim: Option<&SimReport>,
    tv: Option<f64>,
    error: &str,
) -> String {
    let (me, mi, mf) = sim
        .map(|s| {
            (
                s.mode_eh.to_string(),
                s.mode_id_fail.to_string(),
                s.mode_forward.to_string(),
            )
        })
        .unwrap_or_default();
    format!(
        "{var},{},{},{},{},{},{me},{mi},{mf},{error}\n",
        fmt_opt(analytic.map(|a| a.throughput)),
        fmt_opt(analytic.map(|a| a.outage)),
        fmt_opt(sim.map(|s| s.empirical_throughput)),
        fmt_opt(sim.map(|s| s.empirical_outage)),
        fmt_opt(tv),
    )
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Analytic { common, dump } => {
            let sc = load_scenario(&common)?;
            let cfg = sc.system_config().map_err(|e| e.to_string())?;
            let battery = sc.battery_model().map_err(|e| e.to_string())?;
            let report = analytic_pipeline(&cfg, &battery).map_err(|e| e.to_string())?;
            eprintln!(
                "throughput = {:.9} bits/s/Hz, outage = {:.9}, first-hop outage = {:.9}",
                report.throughput, report.outage, report.first_hop_outage
            );
            if dump {
                let n = report.transition_matrix.dim();
                eprintln!("transition matrix ({n}×{n}):");
                for i in 0..n {
                    let row: Vec<String> =
                        report.transition_matrix.row(i).iter().map(|e| format!("{e:.6}")).collect();
                    eprintln!("  [{}]", row.join(", "));
                }
                let pi: Vec<String> =
                    report.stationary.probs.iter().map(|p| format!("{p:.6}")).collect();
                eprintln!("stationary: [{}]", pi.join(", "));
            }
            let mut text = String::from(CSV_HEADER);
            text.push('\n');
            text.push_str(&csv_row("analytic", Some(&report), None, None, ""));
            emit(&common, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { common, baseline } => {
            let sc = load_scenario(&common)?;
            let cfg = sc.system_config().map_err(|e| e.to_string())?;
            let battery = sc.battery_model().map_err(|e| e.to_string())?;
            let sim_cfg = sc.sim_config();
            let report = if baseline {
                simulate_baseline_no_accumulation(&cfg, &sim_cfg, false)
            } else {
                simulate_atf(&cfg, &battery, &sim_cfg)
            }
            .map_err(|e| e.to_string())?;
            let label = format!(
                "{}-{:?}-seed{}",
                if baseline { "baseline" } else { "atf" },
                sim_cfg.fidelity,
                sc.sim.seed
            )
            .to_lowercase();
            eprintln!(
                "throughput = {:.9} bits/s/Hz, outage = {:.9} ({} blocks, modes {}/{}/{})",
                report.empirical_throughput,
                report.empirical_outage,
                sim_cfg.num_blocks,
                report.mode_eh,
                report.mode_id_fail,
                report.mode_forward
            );
            let mut text = String::from(CSV_HEADER);
            text.push('\n');
            text.push_str(&csv_row(&label, None, Some(&report), None, ""));
            emit(&common, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, var, grid, levels } => {
            if grid.is_empty() {
                return Err("sweep grid must be non-empty".into());
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err("sweep grid must be strictly increasing".into());
            }
            let mut sc = load_scenario(&common)?;
            sc.battery.levels = levels;
            let base_seed = sc.sim.seed;
            let rows: Vec<String> = grid
                .par_iter()
                .enumerate()
                .map(|(idx, &value)| {
                    let mut point = sc.clone();
                    match var {
                        SweepVar::SourcePowerDbm => point.system.source_power_dbm = value,
                        SweepVar::InterfererPowerDbm => point.system.interferer_power_dbm = value,
                        SweepVar::Rate => point.system.rate = value,
                        SweepVar::LevelsQ => point.battery.levels = value as usize,
                        SweepVar::Capacity => point.battery.capacity = value,
                    }
                    sweep_point(&point, value, base_seed, idx as u64)
                })
                .collect();
            let mut text = String::from(CSV_HEADER);
            text.push('\n');
            for row in rows {
                text.push_str(&row);
            }
            emit(&common, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { quick, seed } => {
            let mut opts = SuiteOptions { quick, ..SuiteOptions::default() };
            if let Some(s) = seed {
                opts.base_seed = s;
            }
            let results = acceptance_suite(&opts);
            let mut failed = 0usize;
            for r in &results {
                println!("{} {} — {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed += usize::from(!r.passed);
            }
            println!("{} checks, {} failed", results.len(), failed);
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn sweep_point(point: &Scenario, value: f64, base_seed: u64, idx: u64) -> String {
    let var = format!("{value}");
    let setup = point
        .system_config()
        .and_then(|cfg| point.battery_model().map(|b| (cfg, b)));
    let (cfg, battery) = match setup {
        Ok(pair) => pair,
        Err(e) => return csv_row(&var, None, None, None, &format!("{e}")),
    };
    let analytic = match analytic_pipeline(&cfg, &battery) {
        Ok(r) => r,
        Err(e) => return csv_row(&var, None, None, None, &format!("{e}")),
    };
    let mut sim_cfg = point.sim_config();
    sim_cfg.stream = RngStream::new(base_seed, derive_stream(base_seed, idx));
    match simulate_atf(&cfg, &battery, &sim_cfg) {
        Ok(report) => {
            let tv = report.level_histogram.as_ref().and_then(|h| {
                empirical_vs_analytic(h, &analytic.stationary)
                    .ok()
                    .map(|d| d.total_variation)
            });
            csv_row(&var, Some(&analytic), Some(&report), tv, "")
        }
        Err(e) => csv_row(&var, Some(&analytic), None, None, &format!("{e}")),
    }
}
