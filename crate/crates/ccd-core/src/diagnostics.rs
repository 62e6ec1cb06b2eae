//! Convergence-rate diagnostics read off a finished trace.
//!
//! For convex runs with a known (or best-found) optimal value, the expected
//! gap decays like `C / k`, so `k * gap_k` should flatten over the tail of
//! the trace; [`sublinear_fit`] fits that constant and reports how well the
//! model explains the data. For nonconvex runs, [`min_grad_fit`] fits the
//! constant in the `min_i ||grad F(x_i)||^2 <= (F(x_0) - F_best) / (C k)`
//! bound.

use alloc::vec::Vec;
use core::fmt;

use crate::math::{abs, sqrt};
use crate::trace::RunTrace;

/// Sequences derived from a trace.
#[derive(Debug, Clone, Default)]
pub struct RateDiagnostics {
    /// `(k, min_{i <= k} ||grad F(x_i)||)` at fresh-gradient checkpoints;
    /// nonincreasing by construction.
    pub min_grad_by_k: Vec<(u64, f64)>,
    /// `(k, F(x_{k+1}))` for every recorded iteration.
    pub f_by_k: Vec<(u64, f64)>,
    /// Optimal value, when known, enabling the convex-gap diagnostics.
    pub f_star: Option<f64>,
}

impl RateDiagnostics {
    pub fn from_trace(trace: &RunTrace) -> Self {
        let mut min_grad_by_k = Vec::new();
        let mut running = f64::INFINITY;
        let mut f_by_k = Vec::with_capacity(trace.records.len());
        for r in &trace.records {
            if r.grad_fresh && r.grad_norm < running {
                running = r.grad_norm;
            }
            if r.grad_fresh {
                min_grad_by_k.push((r.k, running));
            }
            f_by_k.push((r.k, r.f_value));
        }
        RateDiagnostics {
            min_grad_by_k,
            f_by_k,
            f_star: None,
        }
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    /// `(k, F(x_k) - F*)`, empty when no `f_star` is set.
    pub fn convex_gap_by_k(&self) -> Vec<(u64, f64)> {
        match self.f_star {
            Some(fs) => self.f_by_k.iter().map(|&(k, f)| (k, f - fs)).collect(),
            None => Vec::new(),
        }
    }

    /// Best objective seen along the trace.
    pub fn f_best(&self) -> Option<f64> {
        self.f_by_k
            .iter()
            .map(|&(_, f)| f)
            .fold(None, |acc, f| match acc {
                Some(a) if a <= f => Some(a),
                _ => Some(f),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitError {
    /// Fewer than 20 usable records.
    InsufficientData { usable: usize },
    MissingFStar,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::InsufficientData { usable } => {
                write!(f, "only {usable} usable records (need 20)")
            }
            FitError::MissingFStar => write!(f, "no optimal value attached"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FitError {}

/// Least-squares fit of `gap_k ~ c / k` over the tail of the trace.
#[derive(Debug, Clone, Copy)]
pub struct SublinearFit {
    /// Fitted constant `c` (the mean of `k * gap_k` over the tail).
    pub c: f64,
    /// Root-mean-square deviation of `k * gap_k` from `c`, relative to `c`.
    /// Small values mean the `c/k` model explains the tail; a geometric
    /// (linearly converging) trace produces a large residual here.
    pub rel_residual: f64,
    /// Mean of the last quarter of `k * gap_k` over the mean of the
    /// preceding quarter; values near or below 1 mean no growth trend.
    pub growth_ratio: f64,
    pub used: usize,
}

/// Fit the sublinear constant over the last half of the records.
pub fn sublinear_fit(diag: &RateDiagnostics) -> Result<SublinearFit, FitError> {
    if diag.f_star.is_none() {
        return Err(FitError::MissingFStar);
    }
    let gaps = diag.convex_gap_by_k();
    let tail: Vec<f64> = gaps
        .iter()
        .skip(gaps.len() / 2)
        .filter(|&&(k, g)| k >= 1 && g > 0.0)
        .map(|&(k, g)| k as f64 * g)
        .collect();
    if tail.len() < 20 {
        return Err(FitError::InsufficientData { usable: tail.len() });
    }
    let c = tail.iter().sum::<f64>() / tail.len() as f64;
    let mut ss = 0.0;
    for y in &tail {
        ss += (y - c) * (y - c);
    }
    let rel_residual = sqrt(ss / tail.len() as f64) / abs(c);
    let q = tail.len() / 4;
    let head_mean = tail[tail.len() - 2 * q..tail.len() - q]
        .iter()
        .sum::<f64>()
        / q as f64;
    let tail_mean = tail[tail.len() - q..].iter().sum::<f64>() / q as f64;
    let growth_ratio = tail_mean / head_mean;
    Ok(SublinearFit {
        c,
        rel_residual,
        growth_ratio,
        used: tail.len(),
    })
}

/// Fitted constant family for the nonconvex min-gradient bound.
#[derive(Debug, Clone, Copy)]
pub struct MinGradFit {
    /// `C_k = (F(x_0) - F_best) / (k * min_grad_k^2)` summarized over the
    /// tail: the inequality holds there with `c_min`, and
    /// `c_max / c_median`, `c_median / c_min` measure its stability.
    pub c_min: f64,
    pub c_median: f64,
    pub c_max: f64,
    pub used: usize,
}

/// Fit the min-gradient decay constant over the last half of the fresh
/// checkpoints. `f0` is the starting objective value.
pub fn min_grad_fit(diag: &RateDiagnostics, f0: f64) -> Result<MinGradFit, FitError> {
    let f_best = diag.f_best().ok_or(FitError::InsufficientData { usable: 0 })?;
    let drop = f0 - f_best;
    let tail: Vec<f64> = diag
        .min_grad_by_k
        .iter()
        .skip(diag.min_grad_by_k.len() / 2)
        .filter(|&&(k, g)| k >= 1 && g > 0.0)
        .map(|&(k, g)| drop / (k as f64 * g * g))
        .collect();
    if tail.len() < 20 {
        return Err(FitError::InsufficientData { usable: tail.len() });
    }
    let mut sorted = tail.clone();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(MinGradFit {
        c_min: sorted[0],
        c_median: sorted[sorted.len() / 2],
        c_max: sorted[sorted.len() - 1],
        used: tail.len(),
    })
}
