use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use ccd_bench::config::{apply_overrides, parse_config, Overrides, Variant};
use ccd_bench::experiment::{build_model, run_experiment, Model};
use ccd_bench::oracles;
use ccd_bench::output::fmt_f64;

#[derive(Parser)]
#[command(
    name = "ccd",
    about = "Coordinate descent benchmarks for composite objectives",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single (variant, seed) pair from a config.
    Solve(RunArgs),
    /// Run the full config-driven benchmark session.
    Bench(RunArgs),
    /// Compute cross-check oracles: the global cubic-model solution or the
    /// dense spectrum.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Write oracle vectors/values into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the model invariant suite (gradients, Lipschitz constants,
    /// curvature bound).
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Restrict to one preset (RCPG, RCGD-1, RCGD-2, CCPG, CCGD-1, CCGD-2,
    /// GD-1, GD-2).
    #[arg(long)]
    variant: Option<String>,
    /// Restrict to one seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    /// Per-run wall budget in seconds.
    #[arg(long)]
    max_wall: Option<f64>,
    /// Concurrent runs.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (traces, summary, plot data).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            variant: self.variant.as_deref().map(Variant::parse).transpose()?,
            seed: self.seed,
            grad_tol: self.grad_tol,
            max_iters: self.max_iters,
            max_wall: self.max_wall,
            jobs: self.jobs,
            out: self.out.clone(),
        })
    }
}

fn load(args: &RunArgs) -> Result<ccd_bench::config::ExperimentConfig> {
    let mut cfg = parse_config(&args.config)?;
    apply_overrides(&mut cfg, &args.overrides()?)?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs, single: bool) -> Result<i32> {
    let cfg = load(args)?;
    if single && (cfg.variants.len() != 1 || cfg.seeds.len() > 1) {
        bail!(
            "solve runs exactly one (variant, seed) pair; pass --variant/--seed \
             or narrow the config (bench runs the whole grid)"
        );
    }
    let outcome = run_experiment(&cfg)?;
    println!("variant,seed,full_iterations,wall_seconds,final_F,final_grad_norm,termination");
    for r in &outcome.rows {
        println!(
            "{},{},{},{:.3},{:.6e},{:.3e},{}",
            r.variant,
            r.seed,
            r.full_iterations,
            r.wall_seconds,
            r.final_f,
            r.final_grad_norm,
            r.termination
        );
    }
    println!("outputs in {}", outcome.output_dir.display());
    Ok(outcome.exit_code)
}

fn cmd_oracle(config: &Path, out: Option<&PathBuf>) -> Result<i32> {
    let cfg = parse_config(config)?;
    let model = build_model(&cfg)?;
    match &model {
        Model::CubicDense { inst, eigen_mode } => {
            let n = inst.dim();
            if *eigen_mode {
                let (vals, _) = oracles::dense_symmetric_eigens(inst.matrix(), n)?;
                println!("lambda_min,{}", fmt_f64(vals[0]));
                println!("lambda_max,{}", fmt_f64(vals[n - 1]));
                if let Some(dir) = out {
                    std::fs::create_dir_all(dir)?;
                    let mut text = String::from("i,lambda\n");
                    for (i, v) in vals.iter().enumerate() {
                        text.push_str(&format!("{i},{}\n", fmt_f64(*v)));
                    }
                    std::fs::write(dir.join("eigenvalues.csv"), text)?;
                }
            } else {
                let (x_star, f_star) = oracles::cubic_newton_global(inst)?;
                let norm = x_star.iter().map(|v| v * v).sum::<f64>().sqrt();
                println!("F_star,{}", fmt_f64(f_star));
                println!("x_star_norm,{}", fmt_f64(norm));
                if let Some(dir) = out {
                    std::fs::create_dir_all(dir)?;
                    let mut text = String::from("i,x\n");
                    for (i, v) in x_star.iter().enumerate() {
                        text.push_str(&format!("{i},{}\n", fmt_f64(*v)));
                    }
                    std::fs::write(dir.join("x_star.csv"), text)?;
                }
            }
        }
        Model::CubicSparse { csr, .. } => {
            if csr.dim() > oracles::DENSE_LIMIT {
                bail!(
                    "matrix dimension {} exceeds the dense oracle limit {}",
                    csr.dim(),
                    oracles::DENSE_LIMIT
                );
            }
            let dense = csr.to_dense();
            let (vals, _) = oracles::dense_symmetric_eigens(&dense, csr.dim())?;
            println!("lambda_min,{}", fmt_f64(vals[0]));
            println!("lambda_max,{}", fmt_f64(vals[csr.dim() - 1]));
        }
        Model::Mf(_) => bail!("no closed-form oracle for the factorization model"),
    }
    Ok(0)
}

fn cmd_check(config: &Path, seed: u64) -> Result<i32> {
    let cfg = parse_config(config)?;
    let model = build_model(&cfg)?;
    let results = ccd_bench::checks::run_checks(&model, seed)?;
    let mut failed = false;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {}: {}", r.name, r.detail);
        failed |= !r.passed;
    }
    Ok(if failed { 1 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.cmd {
        Cmd::Solve(args) => cmd_run(args, true),
        Cmd::Bench(args) => cmd_run(args, false),
        Cmd::Oracle { config, out } => cmd_oracle(config, out.as_ref()),
        Cmd::Check { config, seed } => cmd_check(config, *seed),
    };
    match code {
        Ok(c) => ExitCode::from(c.clamp(0, 255) as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
