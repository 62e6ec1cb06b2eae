//! Per-iteration run records.

use alloc::vec::Vec;

/// One solver iteration.
///
/// `f_value` is maintained incrementally between periodic exact refreshes;
/// `grad_norm` is the full-gradient norm, evaluated on the configured cadence
/// and carried forward (with `grad_fresh = false`) in between.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRecord {
    pub k: u64,
    /// Block chosen at this iteration.
    pub block: usize,
    /// Objective after the step, `F(x_{k+1})`.
    pub f_value: f64,
    /// `||grad F||` at the most recent full-gradient evaluation.
    pub grad_norm: f64,
    pub grad_fresh: bool,
    /// `||d_k||`.
    pub d_norm: f64,
    /// Adaptive stepsize root, when the rule has one.
    pub alpha: Option<f64>,
    /// Stepsize denominator: `H_{f,U_i}` for the prox method, `H_{F_k}` for
    /// the gradient method.
    pub h_denom: f64,
    /// Margin `eta_i` in effect for this step (descent margin is `eta_i/2`).
    pub eta: f64,
    /// `||x_{k+1}||`.
    pub x_norm: f64,
    /// Value of the nonsmooth-role term `psi(x_{k+1})`.
    pub psi_value: f64,
    /// Seconds since the run started (measured by the driver's clock).
    pub elapsed: f64,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Termination {
    /// `||grad F(x_k)|| <= grad_tol` at a full-gradient checkpoint.
    GradToleranceMet,
    MaxIterations,
    MaxWallTime,
    /// A step failed the per-iteration descent inequality; `k` is the
    /// offending iteration. The run stops immediately since this indicates a
    /// wrong Lipschitz constant, a bad prox, or a flag mismatch.
    DescentViolation { k: u64 },
    /// The objective or a gradient became non-finite at iteration `k`.
    NonFinite { k: u64 },
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::GradToleranceMet => "grad_tolerance_met",
            Termination::MaxIterations => "max_iterations",
            Termination::MaxWallTime => "max_wall_time",
            Termination::DescentViolation { .. } => "descent_violation",
            Termination::NonFinite { .. } => "non_finite",
        }
    }
}

/// Full record of one run.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_f(&self) -> Option<f64> {
        self.records.last().map(|r| r.f_value)
    }

    pub fn final_grad_norm(&self) -> Option<f64> {
        self.records.last().map(|r| r.grad_norm)
    }
}
