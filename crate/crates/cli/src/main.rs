use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fdpc::config::{CsiMode, ExperimentConfig, Suite};
use fdpc::experiments::{
    run_alpha_sweep, run_network, run_region, run_solve, write_alpha_sweep, write_network, write_region, write_solve,
    OutputDir,
};
use fdpc::verify::run_verify;
use fdpc::Error;
use serde_json::json;

const EXIT_VALIDATION: u8 = 1;
const EXIT_PROPERTY: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "fdpc",
    version,
    about = "Cooperative power control under partial channel information"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment configuration; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Utility region for every configured CSI mode, with hull and baselines.
    Region {
        /// Comma-separated CSI modes overriding `solver.csi_modes`.
        #[arg(long, value_delimiter = ',')]
        csi: Vec<String>,
    },
    /// Optimized versus equilibrium utility over the energy weight.
    AlphaSweep,
    /// Sum utility of a random network against the share of advanced nodes.
    Network,
    /// One weighted solve; writes the policy tables.
    Solve {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value = "local")]
        csi: String,
    },
    /// Small-instance oracle and property suites.
    Verify {
        /// Comma-separated suites (normalization, oracle, vertex, ordering).
        #[arg(long, value_delimiter = ',')]
        suites: Vec<String>,
    },
}

fn load_config(common: &Common) -> fdpc::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn parse_suite(s: &str) -> fdpc::Result<Suite> {
    match s {
        "normalization" => Ok(Suite::Normalization),
        "oracle" => Ok(Suite::Oracle),
        "vertex" => Ok(Suite::Vertex),
        "ordering" => Ok(Suite::Ordering),
        other => Err(Error::InvalidConfig {
            path: "--suites".into(),
            message: format!("unknown suite `{other}`"),
        }),
    }
}

fn write_timings(out: &Path, command: &str, seconds: f64) -> fdpc::Result<()> {
    let text = serde_json::to_string_pretty(&json!({"command": command, "wall_seconds": seconds}))?;
    std::fs::write(out.join("timings.json"), text + "\n")?;
    Ok(())
}

enum Outcome {
    Done,
    PropertyFailure,
}

fn run(cli: Cli) -> fdpc::Result<Outcome> {
    let mut cfg = load_config(&cli.common)?;
    let start = Instant::now();
    let name;
    let mut outcome = Outcome::Done;
    match cli.command {
        Command::Region { csi } => {
            name = "region";
            if !csi.is_empty() {
                cfg.solver.csi_modes = csi.iter().map(|s| CsiMode::parse(s)).collect::<fdpc::Result<_>>()?;
            }
            let report = run_region(&cfg)?;
            let out = OutputDir::new(&cli.common.out, &cfg)?;
            write_region(&out, &cfg, &report)?;
            for mode in &cfg.solver.csi_modes {
                if let Some(r) = report.rows_for(*mode).find(|r| r.lambda == 0.5) {
                    println!("{:>7} lambda=0.5: u1={:.6} u2={:.6}", mode.name(), r.u1, r.u2);
                }
            }
            println!(
                "hub equilibrium: u1={:.6} u2={:.6}",
                report.hub_nash.u1, report.hub_nash.u2
            );
        }
        Command::AlphaSweep => {
            name = "alpha-sweep";
            let rows = run_alpha_sweep(&cfg)?;
            let out = OutputDir::new(&cli.common.out, &cfg)?;
            write_alpha_sweep(&out, &cfg, &rows)?;
            for r in &rows {
                println!(
                    "r={} alpha={}: advanced={:.6} equilibrium={:.6}",
                    r.r, r.alpha, r.u_advanced, r.u_ne
                );
            }
        }
        Command::Network => {
            name = "network";
            let report = run_network(&cfg)?;
            let out = OutputDir::new(&cli.common.out, &cfg)?;
            write_network(&out, &cfg, &report)?;
            for r in &report.rows {
                println!("fraction={:.2}: mean sum utility={:.6}", r.fraction, r.mean);
            }
            println!("linear fit: slope={:.6} R^2={:.6}", report.slope, report.r_squared);
        }
        Command::Solve { lambda, csi } => {
            name = "solve";
            let csi = CsiMode::parse(&csi)?;
            let (inst, report) = run_solve(&cfg, lambda, csi)?;
            let out = OutputDir::new(&cli.common.out, &cfg)?;
            write_solve(&out, &cfg, &inst, &report)?;
            let r = &report.point.result;
            println!(
                "lambda={} csi={}: u1={:.6} u2={:.6} w={:.6} sweeps={} converged={}",
                r.lambda,
                csi.name(),
                r.u1,
                r.u2,
                r.w,
                r.sweeps,
                r.converged
            );
        }
        Command::Verify { suites } => {
            name = "verify";
            if !suites.is_empty() {
                cfg.verify.suites = suites.iter().map(|s| parse_suite(s)).collect::<fdpc::Result<_>>()?;
            }
            let report = run_verify(&cfg)?;
            let out = OutputDir::new(&cli.common.out, &cfg)?;
            out.write_summary("verify", &cfg, json!({"passed": report.passed(), "report": report}))?;
            for (suite, ok) in report.outcomes() {
                println!("{suite}: {}", if ok { "pass" } else { "FAIL" });
            }
            if !report.passed() {
                outcome = Outcome::PropertyFailure;
            }
        }
    }
    write_timings(&cli.common.out, name, start.elapsed().as_secs_f64())?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyFailure) => {
            eprintln!("error: verification failed");
            ExitCode::from(EXIT_PROPERTY)
        }
        Err(e @ Error::TooLarge { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_GUARD)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
