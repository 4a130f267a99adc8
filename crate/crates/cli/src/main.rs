use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rkf_core::experiment::{self, SelftestOptions};
use rkf_core::model::random_stable_system;
use rkf_core::Error;

const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "rkf", version, about = "Worst-case loss certificates for the Kalman predictor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random stable, detectable and stabilizable model file.
    GenSystem {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run one experiment and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_path` from the config; standard output if neither is set.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the built-in numerical checks.
    Selftest {
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_dare_perturbation: f64,
    },
    /// Repeat `run` over a list of seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds; `a..b` expands to a half-open range.
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

enum Failure {
    Core(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Failure {
    let path = path.into();
    move |e| {
        Failure::Core(Error::Io {
            path,
            source: e,
        })
    }
}

fn parse_seeds(items: &[String]) -> Result<Vec<u64>, Failure> {
    let bad = |s: &str| Failure::Core(Error::Config {
        field: "--seeds".into(),
        reason: format!("cannot parse `{s}`"),
    });
    let mut seeds = Vec::new();
    for item in items {
        let item = item.trim();
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: u64 = lo.parse().map_err(|_| bad(item))?;
            let hi: u64 = hi.parse().map_err(|_| bad(item))?;
            seeds.extend(lo..hi);
        } else {
            seeds.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    Ok(seeds)
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("RKF_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(Failure::Core(Error::Config {
                field: "RKF_THREADS".into(),
                reason: format!("expected a positive integer, got `{v}`"),
            })),
        },
    }
}

fn gen_system(n: usize, p: usize, seed: u64, output: Option<PathBuf>) -> Result<(), Failure> {
    let text = random_stable_system(n, p, seed)?.to_config_text();
    match output {
        Some(path) => fs::write(&path, text).map_err(io_err(&path)),
        None => io::stdout().write_all(text.as_bytes()).map_err(io_err("<stdout>")),
    }
}

fn run(config: PathBuf, output: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = experiment::load_config(&config)?;
    let sim = experiment::simulate_config(&cfg)?;
    let rows = sim.summary_rows(cfg.emit_every)?;
    match output.or(cfg.output_path.clone()) {
        Some(path) => experiment::emit_csv(&rows, &path)?,
        None => experiment::write_csv(&rows, io::stdout().lock()).map_err(io_err("<stdout>"))?,
    }

    let s = &sim.steady;
    eprintln!(
        "DARE converged in {} iterations, σ̄(H) = {:.6}, ρ(H) = {:.6}",
        s.iterations, s.sigma_h, s.rho_h
    );
    let last = rows.last().expect("t_rounds ≥ 1");
    eprintln!(
        "T = {}: L = {:.6e}, V = {:.6e}, W = {:.6e}, B1 = {}, B3 = {:.6e}",
        last.t,
        last.l_t,
        last.v_t,
        last.w_t,
        if last.b1.is_nan() { "n/a (σ̄(H) ≥ 1)".to_owned() } else { format!("{:.6e}", last.b1) },
        last.b3
    );
    if let Some(r) = rows.iter().find(|r| r.b3 < r.l_t || r.b1 < r.l_t) {
        return Err(Failure::Check(format!("bound below realized loss at t = {}", r.t)));
    }
    Ok(())
}

fn selftest(perturbation: f64) -> Result<(), Failure> {
    let report = experiment::selftest(SelftestOptions {
        dare_perturbation: perturbation,
    });
    for c in &report.checks {
        println!("{:<12} {}  {}", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail);
    }
    match report.first_failure() {
        Some(c) => Err(Failure::Check(format!("check `{}` failed", c.name))),
        None => Ok(()),
    }
}

fn sweep(config: PathBuf, seeds: &[String], out_dir: PathBuf) -> Result<(), Failure> {
    let seeds = parse_seeds(seeds)?;
    let threads = threads_from_env()?;
    let cfg = experiment::load_config(&config)?;
    let summaries = experiment::sweep(&cfg, &seeds, &out_dir, threads)?;
    for s in &summaries {
        eprintln!("seed {}: L = {:.6e}, B3 = {:.6e} -> {}", s.seed, s.last.l_t, s.last.b3, s.path.display());
    }
    if let Some(s) = summaries.iter().find(|s| s.last.b3 < s.last.l_t || s.last.b1 < s.last.l_t) {
        return Err(Failure::Check(format!("bound below realized loss for seed {}", s.seed)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenSystem { n, p, seed, output } => gen_system(n, p, seed, output),
        Command::Run { config, output } => run(config, output),
        Command::Selftest { inject_dare_perturbation } => selftest(inject_dare_perturbation),
        Command::Sweep { config, seeds, out_dir } => sweep(config, &seeds, out_dir),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
    }
}
