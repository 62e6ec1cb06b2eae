//! Experiment orchestration: build the instance once, run every
//! (variant, seed) pair, write per-run traces plus a summary table and
//! long-format plot data.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use ccd_core::models::cubic::{CubicNewtonInstance, LinearTermSpec, SpectrumSpec};
use ccd_core::models::mf::MatrixFactorizationInstance;
use ccd_core::models::sparse::{CsrMatrix, SparseQuadraticSmooth};
use ccd_core::problem::{PsiOracle, SmoothOracle};
use ccd_core::rng::Rng64;
use ccd_core::{
    cgd, run_std, Algorithm, BlockPartition, CompositeProblem, RuleKind, RunTrace,
    SelectionPolicy, SolverConfig, StepsizeRule, Termination,
};

use crate::config::{ExperimentConfig, ModelConfig, Variant};
use crate::matio;
use crate::output;

type DynSmooth = Box<dyn SmoothOracle + Send + Sync>;
type DynPsi = Box<dyn PsiOracle + Send + Sync>;
pub type DynProblem = CompositeProblem<DynSmooth, DynPsi>;

/// A fully built model instance, shared by all runs of a session.
pub enum Model {
    CubicDense {
        inst: CubicNewtonInstance,
        eigen_mode: bool,
    },
    CubicSparse {
        csr: CsrMatrix,
        m_reg: f64,
    },
    Mf(MatrixFactorizationInstance),
}

impl Model {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::CubicDense { eigen_mode, .. } => {
                if *eigen_mode {
                    "eigen"
                } else {
                    "cubic_newton"
                }
            }
            Model::CubicSparse { .. } => "eigen",
            Model::Mf(_) => "mf",
        }
    }

    pub fn m_reg(&self) -> Option<f64> {
        match self {
            Model::CubicDense { inst, .. } => Some(inst.m_reg),
            Model::CubicSparse { m_reg, .. } => Some(*m_reg),
            Model::Mf(_) => None,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Model::Mf(inst) => Some(inst.lambda),
            _ => None,
        }
    }
}

/// Instantiate the model described by the config (generation time is not
/// part of any run's wall clock).
pub fn build_model(cfg: &ExperimentConfig) -> Result<Model> {
    match &cfg.model {
        ModelConfig::CubicNewton {
            n,
            m_reg,
            spectrum,
            b,
            matrix_file,
            instance_seed,
        } => {
            let inst = match matrix_file {
                Some(path) => {
                    let (a, rows, cols) = matio::read_dense_csv(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    if rows != cols {
                        bail!("matrix file is {rows}x{cols}, need square");
                    }
                    let b_vec = match b {
                        crate::config::LinearTermConfig::Gaussian => {
                            let mut rng = Rng64::new(*instance_seed);
                            let mut v = vec![0.0; rows];
                            rng.fill_normal(&mut v);
                            v
                        }
                        crate::config::LinearTermConfig::Zero => vec![0.0; rows],
                    };
                    CubicNewtonInstance::new(rows, a, b_vec, *m_reg)?
                }
                None => {
                    let n = n.ok_or_else(|| anyhow!("model.n required"))?;
                    let linear = match b {
                        crate::config::LinearTermConfig::Gaussian => LinearTermSpec::Gaussian,
                        crate::config::LinearTermConfig::Zero => LinearTermSpec::Zero,
                    };
                    CubicNewtonInstance::generate(
                        n,
                        &spectrum.to_spec(),
                        linear,
                        *m_reg,
                        *instance_seed,
                    )?
                }
            };
            Ok(Model::CubicDense {
                inst,
                eigen_mode: false,
            })
        }
        ModelConfig::Eigen {
            n,
            m_reg,
            lambda_min,
            matrix_file,
            instance_seed,
        } => match matrix_file {
            Some(path) => {
                let (csr, _) = matio::read_matrix_market(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(Model::CubicSparse {
                    csr,
                    m_reg: *m_reg,
                })
            }
            None => {
                let n = n.ok_or_else(|| anyhow!("model.n required"))?;
                let inst = CubicNewtonInstance::generate(
                    n,
                    &SpectrumSpec::Indefinite {
                        lambda_min: *lambda_min,
                    },
                    LinearTermSpec::Zero,
                    *m_reg,
                    *instance_seed,
                )?;
                Ok(Model::CubicDense {
                    inst,
                    eigen_mode: true,
                })
            }
        },
        ModelConfig::Mf {
            m,
            n,
            r,
            lambda,
            noise,
            data_file,
            instance_seed,
        } => {
            let inst = match data_file {
                Some(path) => {
                    let (x, rows, cols) = matio::read_dense_csv(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    if rows != *m || cols != *n {
                        bail!("data file is {rows}x{cols}, config says {m}x{n}");
                    }
                    MatrixFactorizationInstance::new(*m, *n, *r, *lambda, x)?
                }
                None => {
                    MatrixFactorizationInstance::synthetic(*m, *n, *r, *lambda, *noise, *instance_seed)?
                }
            };
            Ok(Model::Mf(inst))
        }
    }
}

fn selection_for(variant: Variant, num_blocks: usize, seed: u64) -> SelectionPolicy {
    if variant.is_random() {
        SelectionPolicy::RandomUniform { seed }
    } else {
        SelectionPolicy::cyclic_ascending(num_blocks)
    }
}

/// Partition with margins `(2c - 1) L_i` so prox and gradient presets share
/// the same effective stepsize scale.
fn partition_with_multiplier(partition: BlockPartition, c: f64) -> BlockPartition {
    let margins: Vec<f64> = (0..partition.num_blocks())
        .map(|i| cgd::margin_for_multiplier(c, partition.lipschitz(i)))
        .collect();
    partition.with_margins(margins).expect("margins")
}

/// Build the boxed problem and starting point for one run.
pub fn build_run(model: &Model, variant: Variant, seed: u64) -> Result<(DynProblem, Vec<f64>)> {
    match model {
        Model::CubicDense { inst, .. } => {
            let base = if variant.is_single_block() {
                inst.single_partition()
            } else {
                inst.unit_partition()
            };
            let partition = partition_with_multiplier(base, variant.multiplier());
            let concrete = inst.problem(partition);
            let x0 = inst.start_point(seed);
            Ok((
                CompositeProblem::new(
                    Box::new(concrete.f) as DynSmooth,
                    Box::new(concrete.psi) as DynPsi,
                    concrete.partition,
                ),
                x0,
            ))
        }
        Model::CubicSparse { csr, m_reg } => {
            if variant.is_single_block() {
                bail!("GD presets need a dense matrix");
            }
            let n = csr.dim();
            let prob =
                ccd_core::models::sparse::sparse_cubic_problem(csr.clone(), vec![0.0; n], *m_reg)?;
            let partition = partition_with_multiplier(prob.partition, variant.multiplier());
            let f: SparseQuadraticSmooth = prob.f;
            // Eigenvalue mode starts from a seeded unit vector.
            let mut rng = Rng64::new(seed);
            let mut x0 = vec![0.0; n];
            rng.fill_normal(&mut x0);
            let norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in x0.iter_mut() {
                *v /= norm;
            }
            Ok((
                CompositeProblem::new(
                    Box::new(f) as DynSmooth,
                    Box::new(prob.psi) as DynPsi,
                    partition,
                ),
                x0,
            ))
        }
        Model::Mf(inst) => {
            if variant.is_prox() || variant.is_single_block() {
                bail!("{} is not applicable to the mf model", variant.name());
            }
            let concrete = inst.problem();
            let x0 = inst.start_state(seed).to_flat();
            Ok((
                CompositeProblem::new(
                    Box::new(concrete.f) as DynSmooth,
                    Box::new(concrete.psi) as DynPsi,
                    concrete.partition,
                ),
                x0,
            ))
        }
    }
}

/// Solver configuration for one run, file overrides applied.
pub fn solver_config(
    cfg: &ExperimentConfig,
    model: &Model,
    variant: Variant,
    seed: u64,
    num_blocks: usize,
) -> Result<SolverConfig> {
    let algorithm = if variant.is_prox() {
        Algorithm::Cpg
    } else {
        let kind = match model {
            Model::Mf(_) => RuleKind::Rule2,
            _ => RuleKind::Rule1,
        };
        Algorithm::Cgd(StepsizeRule::new(kind, variant.multiplier()))
    };
    let mut sc = SolverConfig::new(algorithm, selection_for(variant, num_blocks, seed));
    sc.grad_tol = cfg.solver.grad_tol.unwrap_or(1e-2);
    sc.max_iters = cfg.solver.max_iters.unwrap_or(10_000_000);
    sc.max_wall = cfg.solver.max_wall.unwrap_or(300.0);
    if let Some(level) = cfg
        .solver
        .assert_level()
        .map_err(|e| anyhow!(e.to_string()))?
    {
        sc.assert_level = level;
    }
    if let Some(every) = cfg.solver.grad_check_every {
        sc.grad_check_every = every;
    }
    if let Some(every) = cfg.solver.record_every {
        sc.record_every = every;
    }
    Ok(sc)
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub variant: &'static str,
    pub seed: u64,
    /// Completed passes over the blocks: `ceil(iterations / N)`.
    pub full_iterations: u64,
    pub wall_seconds: f64,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub termination: String,
}

#[derive(Debug)]
pub struct RunOutput {
    pub variant: Variant,
    pub seed: u64,
    pub trace: RunTrace,
    pub summary: SummaryRow,
    pub x_final: Vec<f64>,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub rows: Vec<SummaryRow>,
    pub exit_code: i32,
    pub output_dir: PathBuf,
    pub trace_paths: Vec<PathBuf>,
}

/// Execute one (variant, seed) run against a prebuilt model.
pub fn execute_run(
    cfg: &ExperimentConfig,
    model: &Model,
    variant: Variant,
    seed: u64,
) -> Result<RunOutput> {
    let (prob, x0) = build_run(model, variant, seed)?;
    let num_blocks = prob.num_blocks();
    let sc = solver_config(cfg, model, variant, seed, num_blocks)?;
    let started = Instant::now();
    let outcome = run_std(&prob, &x0, &sc).map_err(|e| anyhow!("{}", e))?;
    let wall = started.elapsed().as_secs_f64();

    let steps = outcome
        .trace
        .records
        .last()
        .map(|r| r.k + 1)
        .unwrap_or(0);
    let full_iterations = steps.div_ceil(num_blocks as u64);
    let final_f = match outcome.trace.final_f() {
        Some(f) => f,
        None => prob.f_value(&outcome.x).map_err(|e| anyhow!("{e}"))?,
    };
    let final_grad_norm = outcome.trace.final_grad_norm().unwrap_or_else(|| {
        let n = prob.dim();
        let mut g = vec![0.0; n];
        let mut s = vec![0.0; n];
        prob.full_grad(&outcome.x, &mut g, &mut s);
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    });
    let summary = SummaryRow {
        variant: variant.name(),
        seed,
        full_iterations,
        wall_seconds: wall,
        final_f,
        final_grad_norm,
        termination: outcome.trace.termination.as_str().to_string(),
    };
    Ok(RunOutput {
        variant,
        seed,
        trace: outcome.trace,
        summary,
        x_final: outcome.x,
    })
}

/// Run the whole session: every (variant, seed) pair, up to `jobs` at a
/// time, then write traces, the summary and the plot data.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate().map_err(|e| anyhow!(e.to_string()))?;
    let model = build_model(cfg)?;
    let seeds: Vec<u64> = if cfg.seeds.is_empty() {
        vec![0]
    } else {
        cfg.seeds.clone()
    };
    let specs: Vec<(Variant, u64)> = cfg
        .variants
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();

    let jobs = cfg.jobs.max(1).min(specs.len().max(1));
    let results: Vec<Option<Result<RunOutput>>> = {
        let slots: Mutex<Vec<Option<Result<RunOutput>>>> =
            Mutex::new((0..specs.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= specs.len() {
                        break;
                    }
                    let (variant, seed) = specs[i];
                    let res = execute_run(cfg, &model, variant, seed);
                    slots.lock().unwrap()[i] = Some(res);
                });
            }
        });
        slots.into_inner().unwrap()
    };

    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let mut rows = Vec::with_capacity(specs.len());
    let mut outputs = Vec::new();
    let mut trace_paths = Vec::new();
    let mut any_budget = false;
    let mut any_violation = false;
    let mut any_error = false;
    for (slot, (variant, seed)) in results.into_iter().zip(&specs) {
        match slot.expect("worker filled slot") {
            Ok(out) => {
                match out.trace.termination {
                    Termination::MaxIterations | Termination::MaxWallTime => any_budget = true,
                    Termination::DescentViolation { .. } | Termination::NonFinite { .. } => {
                        any_violation = true
                    }
                    Termination::GradToleranceMet => {}
                }
                let path = cfg
                    .output_dir
                    .join(format!("trace_{}_{}.csv", out.variant.name(), out.seed));
                output::write_trace_csv(&path, &out.trace)?;
                if cfg.emit_json {
                    let jpath = cfg
                        .output_dir
                        .join(format!("trace_{}_{}.json", out.variant.name(), out.seed));
                    output::write_trace_json(&jpath, &out.trace)?;
                }
                trace_paths.push(path);
                rows.push(out.summary.clone());
                outputs.push(out);
            }
            Err(e) => {
                any_error = true;
                rows.push(SummaryRow {
                    variant: variant.name(),
                    seed: *seed,
                    full_iterations: 0,
                    wall_seconds: 0.0,
                    final_f: f64::NAN,
                    final_grad_norm: f64::NAN,
                    termination: format!("error: {e}"),
                });
            }
        }
    }

    output::write_summary_csv(&cfg.output_dir.join("summary.csv"), &rows)?;
    output::write_plotdata_csv(
        &cfg.output_dir.join("plotdata.csv"),
        &outputs,
        model.kind_name(),
        model.m_reg(),
        model.lambda(),
    )?;

    let exit_code = if any_violation {
        3
    } else if any_error {
        1
    } else if any_budget {
        2
    } else {
        0
    };
    Ok(ExperimentOutcome {
        rows,
        exit_code,
        output_dir: cfg.output_dir.clone(),
        trace_paths,
    })
}
