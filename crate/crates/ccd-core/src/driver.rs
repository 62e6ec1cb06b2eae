//! The solver loop: block selection, stepping, stopping tests, trace
//! recording and runtime descent assertions.
//!
//! The loop maintains the objective value and the iterate norms
//! incrementally (`O(n_i)` per step) and re-evaluates them exactly every
//! `value_refresh_every` iterations to bound drift. The full gradient is
//! evaluated every `grad_check_every` iterations for the stopping test
//! `||grad F|| <= grad_tol`; in between, trace records carry the last value
//! with `grad_fresh = false`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cgd::{cgd_step, CgdError, RuleParams, StepsizeRule};
use crate::cpg::{cpg_step, CpgError, StepOptions, StepWorkspace};
use crate::diagnostics::RateDiagnostics;
use crate::math::{dot, norm, sqrt};
use crate::problem::{estimate_hess0_norm, CompositeProblem, EvalError, PsiOracle, SmoothOracle};
use crate::select::{next_block, SelectionError, SelectionPolicy};
use crate::trace::{RunTrace, Termination, TraceRecord};

/// Wall-clock source. Injected so the core stays free of OS time APIs; runs
/// that do not care about wall budgets can pass [`NoClock`].
pub trait Clock {
    /// Monotonic seconds.
    fn now(&self) -> f64;
}

/// Clock that always reads zero (disables wall-time budgets).
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[cfg(feature = "std")]
#[derive(Debug, Clone)]
pub struct StdClock {
    start: std::time::Instant,
}

#[cfg(feature = "std")]
impl Default for StdClock {
    fn default() -> Self {
        StdClock {
            start: std::time::Instant::now(),
        }
    }
}

#[cfg(feature = "std")]
impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Algorithm {
    /// Coordinate proximal gradient (needs a block prox on `psi`).
    Cpg,
    /// Coordinate gradient descent with the given stepsize rule.
    Cgd(StepsizeRule),
}

/// How much per-step checking the driver performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AssertLevel {
    Off,
    /// Verify the per-step descent inequality.
    DescentOnly,
    /// Additionally verify the prox subproblem comparison and the
    /// `||d|| = alpha` identity.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub selection: SelectionPolicy,
    /// Stop once `||grad F(x_k)|| <= grad_tol`.
    pub grad_tol: f64,
    pub max_iters: u64,
    /// Wall budget in seconds (never trips under [`NoClock`]).
    pub max_wall: f64,
    pub assert_level: AssertLevel,
    /// Full-gradient cadence for the stopping test; 0 means "every N".
    pub grad_check_every: u64,
    /// Exact re-evaluation cadence for the chained objective and norms;
    /// 0 means "every n".
    pub value_refresh_every: u64,
    /// Trace thinning: keep every `record_every`-th iteration (stopping and
    /// violating iterations are always kept).
    pub record_every: u64,
    /// Slack for the descent assertion, scaled by `1 + |F(x_k)|`.
    pub assert_tol: f64,
    pub root_tol: f64,
    pub prox_tol_scale: f64,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, selection: SelectionPolicy) -> Self {
        SolverConfig {
            algorithm,
            selection,
            grad_tol: 1e-2,
            max_iters: 10_000_000,
            max_wall: 300.0,
            assert_level: AssertLevel::DescentOnly,
            grad_check_every: 0,
            value_refresh_every: 0,
            record_every: 1,
            assert_tol: 1e-9,
            root_tol: crate::rootfind::DEFAULT_ROOT_TOL,
            prox_tol_scale: crate::cpg::PROX_TOL_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Selection(SelectionError),
    BadConfig(&'static str),
    /// The algorithm requires an oracle capability the problem lacks.
    Capability(&'static str),
    BadStart(EvalError),
    Cpg(CpgError),
    Cgd(CgdError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Selection(e) => write!(f, "selection policy: {e}"),
            SolverError::BadConfig(msg) => write!(f, "bad config: {msg}"),
            SolverError::Capability(msg) => write!(f, "capability mismatch: {msg}"),
            SolverError::BadStart(e) => write!(f, "bad starting point: {e}"),
            SolverError::Cpg(e) => write!(f, "prox step failed: {e}"),
            SolverError::Cgd(e) => write!(f, "gradient step failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolverError {}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub x: Vec<f64>,
    pub trace: RunTrace,
    pub diagnostics: RateDiagnostics,
}

enum Resolved {
    Prox,
    Grad { params: RuleParams, multiplier: f64 },
}

fn validate<F: SmoothOracle, P: PsiOracle>(
    prob: &CompositeProblem<F, P>,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<Resolved, SolverError> {
    if x0.len() != prob.dim() {
        return Err(SolverError::BadStart(EvalError::DimensionMismatch {
            expected: prob.dim(),
            got: x0.len(),
        }));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(SolverError::BadStart(EvalError::NonFiniteObjective));
    }
    cfg.selection
        .validate(prob.num_blocks())
        .map_err(SolverError::Selection)?;
    if cfg.grad_tol.is_nan() || cfg.grad_tol <= 0.0 {
        return Err(SolverError::BadConfig("grad_tol must be positive"));
    }
    if cfg.max_wall.is_nan() || cfg.max_wall <= 0.0 {
        return Err(SolverError::BadConfig("max_wall must be positive"));
    }
    if !(cfg.assert_tol >= 0.0 && cfg.root_tol > 0.0 && cfg.prox_tol_scale > 0.0) {
        return Err(SolverError::BadConfig("tolerances must be positive"));
    }
    if cfg.record_every == 0 {
        return Err(SolverError::BadConfig("record_every must be at least 1"));
    }

    let consts = prob.psi.constants();
    let flags = prob.psi.flags();
    match &cfg.algorithm {
        Algorithm::Cpg => {
            if !prob.psi.supports_block_prox() {
                return Err(SolverError::Capability(
                    "the prox method needs a block prox on the second term",
                ));
            }
            Ok(Resolved::Prox)
        }
        Algorithm::Cgd(rule) => {
            if rule.h_f_multiplier.is_nan() || rule.h_f_multiplier <= 0.5 {
                return Err(SolverError::BadConfig(
                    "the smooth-part multiplier must exceed 1/2",
                ));
            }
            let need = |v: Option<f64>, msg: &'static str| -> Result<f64, SolverError> {
                match v {
                    Some(c) if c.is_finite() && c >= 0.0 => Ok(c),
                    Some(_) => Err(SolverError::BadConfig("curvature constants must be >= 0")),
                    None => Err(SolverError::Capability(msg)),
                }
            };
            let params = match rule.kind {
                crate::cgd::RuleKind::Rule1 => {
                    let h_psi = need(consts.h_psi, "rule 1 needs the curvature bound constant")?;
                    let l_psi = need(consts.l_psi, "rule 1 needs a Hessian Lipschitz constant")?;
                    let p = consts
                        .p
                        .ok_or(SolverError::Capability("rule 1 needs the growth exponent"))?;
                    if p < 1 {
                        return Err(SolverError::BadConfig("growth exponent must be >= 1"));
                    }
                    RuleParams::Rule1 { h_psi, p, l_psi }
                }
                crate::cgd::RuleKind::Rule2 => {
                    let h_psi = need(consts.h_psi, "rule 2 needs the curvature bound constant")?;
                    let p = consts
                        .p
                        .ok_or(SolverError::Capability("rule 2 needs the growth exponent"))?;
                    if p < 1 {
                        return Err(SolverError::BadConfig("growth exponent must be >= 1"));
                    }
                    RuleParams::Rule2 { h_psi, p }
                }
                crate::cgd::RuleKind::Rule3 => {
                    let l_psi = need(consts.l_psi, "rule 3 needs a Hessian Lipschitz constant")?;
                    let hess0_norm = prob
                        .psi
                        .hess0_norm(x0)
                        .unwrap_or_else(|| estimate_hess0_norm(&prob.psi, x0, HESS0_SEED));
                    if !(hess0_norm.is_finite() && hess0_norm >= 0.0) {
                        return Err(SolverError::BadConfig(
                            "anchor Hessian norm must be finite and nonnegative",
                        ));
                    }
                    RuleParams::Rule3 { l_psi, hess0_norm }
                }
                crate::cgd::RuleKind::Rule4 => {
                    if !flags.concave_along_coordinates {
                        return Err(SolverError::Capability(
                            "rule 4 needs the second term concave along coordinates",
                        ));
                    }
                    RuleParams::Rule4
                }
            };
            Ok(Resolved::Grad {
                params,
                multiplier: rule.h_f_multiplier,
            })
        }
    }
}

const HESS0_SEED: u64 = 0x4e55;

/// Run the configured algorithm from `x0`.
pub fn run<F: SmoothOracle, P: PsiOracle, C: Clock>(
    prob: &CompositeProblem<F, P>,
    x0: &[f64],
    cfg: &SolverConfig,
    clock: &C,
) -> Result<RunOutcome, SolverError> {
    let resolved = validate(prob, x0, cfg)?;
    let n = prob.dim();
    let nb = prob.num_blocks();
    let cadence = if cfg.grad_check_every == 0 {
        nb as u64
    } else {
        cfg.grad_check_every
    };
    let refresh = if cfg.value_refresh_every == 0 {
        (n as u64).max(1)
    } else {
        cfg.value_refresh_every
    };
    let needs_dist = matches!(
        &resolved,
        Resolved::Grad {
            params: RuleParams::Rule3 { .. },
            ..
        }
    );

    let mut x = x0.to_vec();
    let mut f_val = prob.f.value(&x);
    let mut psi_val = prob.psi.value(&x);
    if !(f_val.is_finite() && psi_val.is_finite()) {
        return Err(SolverError::BadStart(EvalError::NonFiniteObjective));
    }
    let mut norm_sq_all = dot(&x, &x);
    let mut norm_psi_sq = prob.psi_seminorm_sq(&x);
    let mut dist0_sq = 0.0f64;

    let mut grad_buf = vec![0.0; n];
    let mut grad_scratch = vec![0.0; n];
    let mut ws = StepWorkspace::default();
    let mut records: Vec<TraceRecord> = Vec::new();
    let step_opts = StepOptions {
        root_tol: cfg.root_tol,
        prox_tol_scale: cfg.prox_tol_scale,
        verify_subproblem: cfg.assert_level >= AssertLevel::Full,
    };

    let t0 = clock.now();
    let mut termination = Termination::MaxIterations;

    // Carried full-gradient value; fresh at x0 unless the budget is zero.
    let mut grad_norm = f64::INFINITY;
    if cfg.max_iters > 0 {
        prob.full_grad(&x, &mut grad_buf, &mut grad_scratch);
        grad_norm = norm(&grad_buf);
        if !grad_norm.is_finite() {
            return Err(SolverError::BadStart(EvalError::NonFiniteGradient));
        }
        if grad_norm <= cfg.grad_tol {
            let trace = RunTrace {
                records,
                termination: Termination::GradToleranceMet,
            };
            let diagnostics = RateDiagnostics::from_trace(&trace);
            return Ok(RunOutcome {
                x,
                trace,
                diagnostics,
            });
        }
    }

    let mut k = 0u64;
    while k < cfg.max_iters {
        if clock.now() - t0 >= cfg.max_wall {
            termination = Termination::MaxWallTime;
            break;
        }
        if k > 0 && k.is_multiple_of(refresh) {
            f_val = prob.f.value(&x);
            psi_val = prob.psi.value(&x);
            norm_sq_all = dot(&x, &x);
            norm_psi_sq = prob.psi_seminorm_sq(&x);
            if needs_dist {
                dist0_sq = 0.0;
                for j in 0..n {
                    let dj = x[j] - x0[j];
                    dist0_sq += dj * dj;
                }
            }
        }

        let i = next_block(&cfg.selection, nb, k);
        let b = prob.partition.block(i);
        let old_block_sq = b.norm_sq(&x);
        let block_in_seminorm = !prob.psi.constant_along_block(b);
        let old_dist_block = if needs_dist {
            let mut s = 0.0;
            for j in b.iter() {
                let dj = x[j] - x0[j];
                s += dj * dj;
            }
            s
        } else {
            0.0
        };

        let f_before = f_val + psi_val;
        let stepped = match &resolved {
            Resolved::Prox => {
                match cpg_step(prob, &mut x, i, f_val, psi_val, &step_opts, &mut ws) {
                    Ok(r) => Ok((r.h, r.eta, None, r.d_norm, r.f_next, r.psi_next)),
                    Err(CpgError::NonFinite) => Err(None),
                    Err(e) => Err(Some(SolverError::Cpg(e))),
                }
            }
            Resolved::Grad { params, multiplier } => {
                match cgd_step(
                    prob,
                    &mut x,
                    i,
                    params,
                    *multiplier,
                    sqrt(norm_psi_sq.max(0.0)),
                    sqrt(dist0_sq.max(0.0)),
                    f_val,
                    psi_val,
                    &step_opts,
                    &mut ws,
                ) {
                    Ok(r) => Ok((r.h_big, r.eta, r.alpha, r.d_norm, r.f_next, r.psi_next)),
                    Err(CgdError::NonFinite) => Err(None),
                    Err(e) => Err(Some(SolverError::Cgd(e))),
                }
            }
        };
        let (h_denom, eta, alpha, d_norm, f_next, psi_next) = match stepped {
            Ok(t) => t,
            Err(Some(e)) => return Err(e),
            Err(None) => {
                termination = Termination::NonFinite { k };
                break;
            }
        };

        let f_after = f_next + psi_next;
        if !f_after.is_finite() {
            termination = Termination::NonFinite { k };
            break;
        }

        let mut stop = None;
        if cfg.assert_level >= AssertLevel::DescentOnly {
            let drop = f_before - f_after;
            let needed = 0.5 * eta * d_norm * d_norm
                - cfg.assert_tol * (1.0 + crate::math::abs(f_before));
            if drop < needed {
                stop = Some(Termination::DescentViolation { k });
            }
        }

        let new_block_sq = b.norm_sq(&x);
        norm_sq_all = (norm_sq_all + new_block_sq - old_block_sq).max(0.0);
        if block_in_seminorm {
            norm_psi_sq = (norm_psi_sq + new_block_sq - old_block_sq).max(0.0);
        }
        if needs_dist {
            let mut s = 0.0;
            for j in b.iter() {
                let dj = x[j] - x0[j];
                s += dj * dj;
            }
            dist0_sq = (dist0_sq + s - old_dist_block).max(0.0);
        }
        f_val = f_next;
        psi_val = psi_next;

        let mut fresh = false;
        if stop.is_none() && (k + 1).is_multiple_of(cadence) {
            prob.full_grad(&x, &mut grad_buf, &mut grad_scratch);
            grad_norm = norm(&grad_buf);
            fresh = true;
            if !grad_norm.is_finite() {
                stop = Some(Termination::NonFinite { k });
            } else if grad_norm <= cfg.grad_tol {
                stop = Some(Termination::GradToleranceMet);
            }
        }

        if stop.is_some() || k.is_multiple_of(cfg.record_every) || k + 1 == cfg.max_iters {
            records.push(TraceRecord {
                k,
                block: i,
                f_value: f_after,
                grad_norm,
                grad_fresh: fresh,
                d_norm,
                alpha,
                h_denom,
                eta,
                x_norm: sqrt(norm_sq_all),
                psi_value: psi_val,
                elapsed: clock.now() - t0,
            });
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
        k += 1;
    }

    // Refresh the final gradient for budget terminations so summaries see
    // the state actually reached.
    if matches!(
        termination,
        Termination::MaxIterations | Termination::MaxWallTime
    ) && cfg.max_iters > 0
    {
        prob.full_grad(&x, &mut grad_buf, &mut grad_scratch);
        let g = norm(&grad_buf);
        if let Some(last) = records.last_mut() {
            if last.k == k.saturating_sub(1) || last.k == k {
                last.grad_norm = g;
                last.grad_fresh = true;
            }
        }
    }

    let trace = RunTrace {
        records,
        termination,
    };
    let diagnostics = RateDiagnostics::from_trace(&trace);
    Ok(RunOutcome {
        x,
        trace,
        diagnostics,
    })
}

/// [`run`] with the standard-library clock.
#[cfg(feature = "std")]
pub fn run_std<F: SmoothOracle, P: PsiOracle>(
    prob: &CompositeProblem<F, P>,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<RunOutcome, SolverError> {
    run(prob, x0, cfg, &StdClock::default())
}
