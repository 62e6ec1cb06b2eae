//! Coordinate gradient descent on the full objective.
//!
//! One step moves along a block of `grad F`:
//!
//! ```text
//! d = -(1/H_F) U_i^T grad F(x),    x <- x + U_i d,
//! ```
//!
//! where the denominator `H_F` comes from one of four rules. Rules 1-3 are
//! adaptive: they take the unique nonnegative root `alpha` of a small
//! polynomial built from the curvature constants of `psi`, and satisfy
//! `||d|| = alpha`. Rule 4 uses the constant `H_{f,U_i}` and is valid when
//! `psi` is concave along coordinates.
//!
//! The smooth-part stepsize is `H_{f,U_i} = (L_i + eta_i)/2` with
//! `eta_i = max((2c - 1) L_i, eta_floor)` for a chosen multiplier `c > 1/2`,
//! so `H_{f,U_i} = c * L_i` away from the floor.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{norm, powi};
use crate::partition::ETA_FLOOR;
use crate::problem::{CompositeProblem, PsiOracle, SmoothOracle};
use crate::rootfind::{positive_root, RootError, RootResult};

pub use crate::cpg::{StepOptions, StepWorkspace};

/// Which stepsize rule the gradient method runs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RuleKind {
    /// Quadratic in `alpha`; needs `(H_psi, p)` and `L_psi`.
    Rule1,
    /// Degree `p+1` polynomial; needs `(H_psi, p)` only.
    Rule2,
    /// Quadratic anchored at `x_0`; needs `L_psi` and `||hess psi(x_0)||`.
    Rule3,
    /// Constant `H_F = H_{f,U_i}`; needs `psi` concave along coordinates.
    Rule4,
}

impl RuleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleKind::Rule1 => "rule1",
            RuleKind::Rule2 => "rule2",
            RuleKind::Rule3 => "rule3",
            RuleKind::Rule4 => "rule4",
        }
    }
}

/// Stepsize configuration: the rule plus the smooth-part multiplier `c` with
/// `H_{f,U_i} = c * L_i` (must satisfy `c > 1/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepsizeRule {
    pub kind: RuleKind,
    pub h_f_multiplier: f64,
}

impl StepsizeRule {
    pub fn new(kind: RuleKind, h_f_multiplier: f64) -> Self {
        StepsizeRule {
            kind,
            h_f_multiplier,
        }
    }
}

/// Margin implied by the multiplier: `eta = max((2c-1) L, eta_floor)`.
pub fn margin_for_multiplier(c: f64, lipschitz: f64) -> f64 {
    let eta = (2.0 * c - 1.0) * lipschitz;
    if eta > ETA_FLOOR {
        eta
    } else {
        ETA_FLOOR
    }
}

/// Rule constants resolved against a concrete oracle (validated up front so
/// steps never fail on missing data).
#[derive(Debug, Clone, PartialEq)]
pub enum RuleParams {
    Rule1 { h_psi: f64, p: u32, l_psi: f64 },
    Rule2 { h_psi: f64, p: u32 },
    Rule3 { l_psi: f64, hess0_norm: f64 },
    Rule4,
}

impl RuleParams {
    pub fn kind(&self) -> RuleKind {
        match self {
            RuleParams::Rule1 { .. } => RuleKind::Rule1,
            RuleParams::Rule2 { .. } => RuleKind::Rule2,
            RuleParams::Rule3 { .. } => RuleKind::Rule3,
            RuleParams::Rule4 => RuleKind::Rule4,
        }
    }
}

/// `alpha`, `H_F` and the root certificate for rule 1:
/// `(L_psi/6) a^2 + ((H_psi/2)||x||^p + H_f) a - g_norm = 0`.
pub fn stepsize_rule1(
    norm_x: f64,
    g_norm: f64,
    h_f: f64,
    h_psi: f64,
    p: u32,
    l_psi: f64,
    root_tol: f64,
) -> Result<(f64, f64, RootResult), RootError> {
    let lin = 0.5 * h_psi * powi(norm_x, p) + h_f;
    let r = positive_root(&[-g_norm, lin, l_psi / 6.0], Some(g_norm / h_f), root_tol)?;
    let h_big = 0.5 * h_psi * powi(norm_x, p) + l_psi / 6.0 * r.root + h_f;
    Ok((r.root, h_big, r))
}

/// Rule 2: `2^{p-1} H_psi a^{p+1} + (2^{p-1} H_psi ||x||^p + H_f) a = g_norm`.
pub fn stepsize_rule2(
    norm_x: f64,
    g_norm: f64,
    h_f: f64,
    h_psi: f64,
    p: u32,
    root_tol: f64,
) -> Result<(f64, f64, RootResult), RootError> {
    let scale = powi(2.0, p - 1) * h_psi;
    let mut coeffs = vec![0.0; p as usize + 2];
    coeffs[0] = -g_norm;
    coeffs[1] = scale * powi(norm_x, p) + h_f;
    coeffs[p as usize + 1] = scale;
    let r = positive_root(&coeffs, Some(g_norm / h_f), root_tol)?;
    let h_big = scale * powi(norm_x, p) + scale * powi(r.root, p) + h_f;
    Ok((r.root, h_big, r))
}

/// Rule 3: `(L_psi/6) a^2 + ((L_psi/2)||x - x0|| + hess0/2 + H_f) a = g_norm`.
pub fn stepsize_rule3(
    dist_x0: f64,
    g_norm: f64,
    h_f: f64,
    l_psi: f64,
    hess0_norm: f64,
    root_tol: f64,
) -> Result<(f64, f64, RootResult), RootError> {
    let lin = 0.5 * l_psi * dist_x0 + 0.5 * hess0_norm + h_f;
    let r = positive_root(&[-g_norm, lin, l_psi / 6.0], Some(g_norm / h_f), root_tol)?;
    let h_big = 0.5 * l_psi * dist_x0 + 0.5 * hess0_norm + l_psi / 6.0 * r.root + h_f;
    Ok((r.root, h_big, r))
}

/// Rule 4: the constant stepsize.
pub fn stepsize_rule4(h_f: f64) -> f64 {
    h_f
}

/// Outcome of one gradient step.
#[derive(Debug, Clone)]
pub struct CgdStepReport {
    pub block: usize,
    /// Adaptive root, `None` under rule 4.
    pub alpha: Option<f64>,
    /// Smooth-part stepsize `H_{f,U_i}` for this visit.
    pub h_f: f64,
    /// Full denominator `H_F`.
    pub h_big: f64,
    /// Margin `eta_i` for this visit.
    pub eta: f64,
    pub d: Vec<f64>,
    pub d_norm: f64,
    /// `|h(alpha)|` of the rule polynomial (0 under rule 4).
    pub root_residual: f64,
    /// Certification scale for the residual (see
    /// [`crate::rootfind::RootResult::scale`]).
    pub root_scale: f64,
    pub f_next: f64,
    pub psi_next: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CgdError {
    Root(RootError),
    /// Rules 1-3 must produce `||d|| = alpha`; a violation means the root or
    /// the gradient went bad.
    IdentityViolation { d_norm: f64, alpha: f64 },
    /// The stepsize root failed its residual certificate.
    RootResidual { residual: f64, bound: f64 },
    NonFinite,
}

impl fmt::Display for CgdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CgdError::Root(e) => write!(f, "stepsize root solve failed: {e}"),
            CgdError::IdentityViolation { d_norm, alpha } => {
                write!(f, "||d|| = {d_norm} deviates from alpha = {alpha}")
            }
            CgdError::RootResidual { residual, bound } => {
                write!(f, "root residual {residual} exceeds certificate {bound}")
            }
            CgdError::NonFinite => write!(f, "step produced non-finite values"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CgdError {}

impl From<RootError> for CgdError {
    fn from(e: RootError) -> Self {
        CgdError::Root(e)
    }
}

/// One gradient step on block `i`, updating `x` in place.
///
/// `norm_psi_x` is the curvature seminorm of the current iterate (full norm
/// unless `psi` ignores some blocks) and `dist_x0 = ||x - x0||`; both are
/// maintained incrementally by the driver. `f_x`/`psi_x` chain the running
/// objective values as in [`crate::cpg::cpg_step`].
#[allow(clippy::too_many_arguments)]
pub fn cgd_step<F: SmoothOracle, P: PsiOracle>(
    prob: &CompositeProblem<F, P>,
    x: &mut [f64],
    i: usize,
    rule: &RuleParams,
    h_f_multiplier: f64,
    norm_psi_x: f64,
    dist_x0: f64,
    f_x: f64,
    psi_x: f64,
    opts: &StepOptions,
    ws: &mut StepWorkspace,
) -> Result<CgdStepReport, CgdError> {
    let b = prob.partition.block(i);
    prob.f.block_grad(x, b, &mut ws.g);
    prob.psi.block_grad(x, b, &mut ws.scratch);
    let mut g_norm_sq = 0.0;
    ws.psi_next_grad.clear();
    for (gf, gp) in ws.g.iter().zip(ws.scratch.iter()) {
        let t = gf + gp;
        ws.psi_next_grad.push(t);
        g_norm_sq += t * t;
    }
    let g_total_norm = crate::math::sqrt(g_norm_sq);
    if !g_total_norm.is_finite() {
        return Err(CgdError::NonFinite);
    }

    let lipschitz = prob
        .f
        .dynamic_lipschitz(x, b)
        .unwrap_or_else(|| prob.partition.lipschitz(i));
    let eta = margin_for_multiplier(h_f_multiplier, lipschitz);
    let h_f = 0.5 * (lipschitz + eta);

    // Blocks psi does not touch contribute no curvature: rules 1-3
    // degenerate to the linear equation `H_f * alpha = g_norm` there.
    let psi_free = prob.psi.constant_along_block(b);
    let (alpha, h_big, root_residual, root_scale) = if matches!(rule, RuleParams::Rule4) {
        (None, stepsize_rule4(h_f), 0.0, 1.0)
    } else if psi_free {
        (Some(g_total_norm / h_f), h_f, 0.0, 1.0)
    } else {
        let (a, h, r) = match rule {
            RuleParams::Rule1 { h_psi, p, l_psi } => stepsize_rule1(
                norm_psi_x,
                g_total_norm,
                h_f,
                *h_psi,
                *p,
                *l_psi,
                opts.root_tol,
            )?,
            RuleParams::Rule2 { h_psi, p } => {
                stepsize_rule2(norm_psi_x, g_total_norm, h_f, *h_psi, *p, opts.root_tol)?
            }
            RuleParams::Rule3 { l_psi, hess0_norm } => stepsize_rule3(
                dist_x0,
                g_total_norm,
                h_f,
                *l_psi,
                *hess0_norm,
                opts.root_tol,
            )?,
            RuleParams::Rule4 => unreachable!(),
        };
        (Some(a), h, r.residual, r.scale)
    };

    let mut d = Vec::with_capacity(b.len());
    for gt in &ws.psi_next_grad {
        d.push(-gt / h_big);
    }
    let d_norm = norm(&d);
    if !d_norm.is_finite() {
        return Err(CgdError::NonFinite);
    }

    if opts.verify_subproblem {
        if let Some(a) = alpha {
            if crate::math::abs(d_norm - a) > 1e-9 * (1.0 + a) {
                return Err(CgdError::IdentityViolation { d_norm, alpha: a });
            }
        }
        let bound = 1e-10 * root_scale;
        if root_residual > bound {
            return Err(CgdError::RootResidual {
                residual: root_residual,
                bound,
            });
        }
    }

    let f_next = prob
        .f
        .value_after_step(x, f_x, b, &d, &ws.g)
        .unwrap_or_else(|| {
            b.scatter_add(x, &d);
            let v = prob.f.value(x);
            for (slot, dj) in b.iter().zip(&d) {
                x[slot] -= dj;
            }
            v
        });
    let psi_next = prob
        .psi
        .value_after_step(x, psi_x, b, &d)
        .unwrap_or_else(|| {
            b.scatter_add(x, &d);
            let v = prob.psi.value(x);
            for (slot, dj) in b.iter().zip(&d) {
                x[slot] -= dj;
            }
            v
        });
    if !(f_next.is_finite() && psi_next.is_finite()) {
        return Err(CgdError::NonFinite);
    }
    b.scatter_add(x, &d);

    Ok(CgdStepReport {
        block: i,
        alpha,
        h_f,
        h_big,
        eta,
        d,
        d_norm,
        root_residual,
        root_scale,
        f_next,
        psi_next,
    })
}
