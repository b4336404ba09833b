use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use spacemeta::compare::compare_scenarios;
use spacemeta::outputs::{write_json, write_scenario, write_seed_run};
use spacemeta::pipeline::{run_all, RunOptions};
use spacemeta::sweep::{sweep_alpha, DEFAULT_ALPHAS};
use spacemeta::{exit_code, HarnessError, Scenario, Scheme};

#[derive(Parser)]
#[command(
    name = "spacemeta",
    version,
    about = "Regional relay selection simulator for LEO constellations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's seed list (repeatable).
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Output directory; falls back to the scenario's `output_dir`, then `out`.
    #[arg(long, env = "SPACEMETA_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Write flows.csv for every seed.
    #[arg(long)]
    dump_flows: bool,
    /// Write graph_slot_<n>.txt for this slot (repeatable).
    #[arg(long = "dump-graph-slot")]
    dump_graph_slots: Vec<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme over every seed and write per-seed artifacts.
    Run {
        #[command(flatten)]
        common: Common,
        /// Override the scenario's scheme.
        #[arg(long)]
        scheme: Option<Scheme>,
    },
    /// Run several schemes on the same scenario and compare against the first.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "spacemeta,spacertc,via")]
        schemes: Vec<Scheme>,
    },
    /// Rerun the scenario for several values of the dispersion weight.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
    },
}

struct Prepared {
    scenario: Scenario,
    out: PathBuf,
    opts: RunOptions,
}

fn prepare(common: Common) -> Result<Prepared, HarnessError> {
    let mut scenario = Scenario::load(&common.scenario)?;
    if !common.seeds.is_empty() {
        scenario.seeds = common.seeds;
    }
    let out = common
        .output_dir
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let opts = RunOptions {
        dump_flows: common.dump_flows,
        dump_graph_slots: common.dump_graph_slots,
    };
    Ok(Prepared {
        scenario,
        out,
        opts,
    })
}

fn audit_exit(violations: usize) -> i32 {
    if violations == 0 {
        exit_code::CLEAN
    } else {
        exit_code::AUDIT_VIOLATION
    }
}

fn write_runs(
    out: &Path,
    scenario: &Scenario,
    runs: &[spacemeta::SeedRun],
) -> Result<usize, HarnessError> {
    write_scenario(out, scenario)?;
    let mut violations = 0;
    for run in runs {
        let dir = write_seed_run(out, run)?;
        let s = run.summary();
        violations += s.audit_violations;
        println!(
            "{} seed {}: {} pairs, mean {} ms, {} audit violations -> {}",
            s.scheme,
            s.seed,
            s.pair_samples,
            s.stats
                .as_ref()
                .map_or("n/a".to_string(), |st| format!("{:.3}", st.mean)),
            s.audit_violations,
            dir.display()
        );
    }
    Ok(violations)
}

fn execute(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Run { common, scheme } => {
            let Prepared {
                mut scenario,
                out,
                opts,
            } = prepare(common)?;
            if let Some(s) = scheme {
                scenario.scheme = s;
            }
            info!(
                "running {} over {} seeds",
                scenario.scheme,
                scenario.seeds.len()
            );
            let runs = run_all(&scenario, &opts)?;
            Ok(audit_exit(write_runs(&out, &scenario, &runs)?))
        }
        Command::Compare { common, schemes } => {
            let Prepared {
                scenario,
                out,
                opts,
            } = prepare(common)?;
            let scenarios: Vec<Scenario> = schemes
                .iter()
                .map(|&scheme| Scenario {
                    scheme,
                    ..scenario.clone()
                })
                .collect();
            let (report, runs) = compare_scenarios(&scenarios, &opts)?;
            let mut violations = 0;
            for s in &scenarios {
                violations += write_runs(&out, s, &runs[&s.scheme])?;
            }
            write_json(&out.join("comparison.json"), &report)?;
            for a in &report.aggregate {
                let fmt = |m: Option<spacemeta::compare::MeanStd>| {
                    m.map_or("n/a".into(), |m| format!("{:.1}% ± {:.1}", m.mean, m.std))
                };
                println!(
                    "{} vs {}: mean reduction {}, IQR reduction {} (common pairs)",
                    report.reference,
                    a.other,
                    fmt(a.common_mean_reduction_pct),
                    fmt(a.common_iqr_reduction_pct)
                );
            }
            Ok(audit_exit(violations))
        }
        Command::SweepAlpha { common, alphas } => {
            let Prepared {
                scenario,
                out,
                opts,
            } = prepare(common)?;
            let alphas = if alphas.is_empty() {
                DEFAULT_ALPHAS.to_vec()
            } else {
                alphas
            };
            let report = sweep_alpha(&scenario, &alphas, &opts)?;
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::Io(out.clone(), e))?;
            write_json(&out.join("alpha_sweep.json"), &report)?;
            for t in &report.trends {
                println!(
                    "seed {}: rho(alpha, dispersion) = {:.3}, rho(alpha, latency) = {:.3}",
                    t.seed, t.rho_dispersion, t.rho_latency
                );
            }
            Ok(exit_code::CLEAN)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit_code::CONFIG
            } else {
                exit_code::CLEAN
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
