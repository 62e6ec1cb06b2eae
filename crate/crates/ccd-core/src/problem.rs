//! Oracle traits for the composite objective `F = f + psi` and their
//! structural constants.
//!
//! `f` supplies values and block gradients with per-block Lipschitz constants
//! `L_i`. `psi` is twice differentiable; its capabilities are *declared*, not
//! assumed: a prox method needs `block_prox`, the adaptive gradient rules
//! need the curvature constants `(H_psi, p)` and/or `L_psi`, and the constant
//! rule needs concavity along coordinates. The driver rejects mismatched
//! algorithm/oracle pairs before iterating.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{norm, sqrt};
use crate::partition::{BlockPartition, BlockRef};
use crate::rng::Rng64;
use crate::rootfind::RootError;

/// Default step for central finite differences; balances truncation and
/// roundoff at double precision.
pub const FD_STEP: f64 = 1e-5;

/// Smooth part `f`: value, block gradients `U_i^T grad f(x)` and Lipschitz
/// data.
pub trait SmoothOracle {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// `out = U_i^T grad f(x)`; must equal the block slice of `full_grad`.
    fn block_grad(&self, x: &[f64], b: BlockRef<'_>, out: &mut Vec<f64>);

    fn full_grad(&self, x: &[f64], out: &mut [f64]);

    /// Current Lipschitz constant for block `b` when it depends on the
    /// iterate (two-block factorization models refresh it at each visit).
    /// `None` means the static constant in the partition applies.
    fn dynamic_lipschitz(&self, _x: &[f64], _b: BlockRef<'_>) -> Option<f64> {
        None
    }

    /// Fast path for `f(x + U_i d)` given `f(x)` and `g = U_i^T grad f(x)`.
    /// Quadratics implement this in `O(n_i^2)`; `None` makes the caller
    /// re-evaluate from scratch.
    fn value_after_step(
        &self,
        _x: &[f64],
        _f_x: f64,
        _b: BlockRef<'_>,
        _d: &[f64],
        _g_block: &[f64],
    ) -> Option<f64> {
        None
    }
}

/// Structural constants of `psi` used by the stepsize rules.
///
/// `h_psi` and `p` bound the block Hessian by `H_psi * ||y||^p`; `l_psi` is a
/// Lipschitz constant of the full Hessian. Absent constants disable the rules
/// that need them.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsiConstants {
    pub h_psi: Option<f64>,
    pub p: Option<u32>,
    pub l_psi: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsiFlags {
    /// Every partial function `d -> psi(x + U_i d)` is convex.
    pub convex_along_coordinates: bool,
    /// Every partial function is concave (true for DC second terms).
    pub concave_along_coordinates: bool,
}

/// Failures of a block prox evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxError {
    /// The oracle does not implement a block prox.
    Unsupported,
    /// The restricted subproblem is unbounded below (stepsize too small for
    /// the negative curvature of `psi` along this block).
    SubproblemUnbounded,
    Root(RootError),
}

impl fmt::Display for ProxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProxError::Unsupported => write!(f, "oracle has no block prox"),
            ProxError::SubproblemUnbounded => write!(f, "prox subproblem unbounded below"),
            ProxError::Root(e) => write!(f, "prox root solve failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProxError {}

impl From<RootError> for ProxError {
    fn from(e: RootError) -> Self {
        ProxError::Root(e)
    }
}

/// Second term `psi`: twice differentiable, possibly nonseparable and
/// nonconvex.
pub trait PsiOracle {
    fn value(&self, x: &[f64]) -> f64;

    fn block_grad(&self, x: &[f64], b: BlockRef<'_>, out: &mut Vec<f64>);

    fn full_grad(&self, x: &[f64], out: &mut [f64]);

    fn constants(&self) -> PsiConstants {
        PsiConstants::default()
    }

    fn flags(&self) -> PsiFlags {
        PsiFlags::default()
    }

    fn supports_block_prox(&self) -> bool {
        false
    }

    /// Solve `min_d <g, d> + (h/2)||d||^2 + psi(x + U_i d)`.
    ///
    /// Implementations must return a stationary point whose subproblem value
    /// does not exceed the value at `d = 0`; the prox-method step verifies
    /// both when assertions are on.
    fn block_prox(
        &self,
        _x: &[f64],
        _b: BlockRef<'_>,
        _g: &[f64],
        _h: f64,
        _root_tol: f64,
    ) -> Result<Vec<f64>, ProxError> {
        Err(ProxError::Unsupported)
    }

    /// Analytic `||hess psi(x0)||` when available; otherwise the driver
    /// estimates it by power iteration on finite-difference products.
    fn hess0_norm(&self, _x0: &[f64]) -> Option<f64> {
        None
    }

    /// True when `psi` does not depend on the coordinates of block `b` at
    /// all. Such blocks contribute nothing to the curvature seminorm and the
    /// adaptive rules degenerate to the plain gradient step on them.
    fn constant_along_block(&self, _b: BlockRef<'_>) -> bool {
        false
    }

    /// Fast path for `psi(x + U_i d)` given `psi(x)`.
    fn value_after_step(
        &self,
        _x: &[f64],
        _psi_x: f64,
        _b: BlockRef<'_>,
        _d: &[f64],
    ) -> Option<f64> {
        None
    }
}

/// `psi = 0`. Affine along every block, so both flags are set and all rules
/// degenerate to the smooth-only step.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPsi;

impl PsiOracle for ZeroPsi {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn block_grad(&self, _x: &[f64], b: BlockRef<'_>, out: &mut Vec<f64>) {
        out.clear();
        out.resize(b.len(), 0.0);
    }

    fn full_grad(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn constants(&self) -> PsiConstants {
        PsiConstants {
            h_psi: Some(0.0),
            p: Some(1),
            l_psi: Some(0.0),
        }
    }

    fn flags(&self) -> PsiFlags {
        PsiFlags {
            convex_along_coordinates: true,
            concave_along_coordinates: true,
        }
    }

    fn supports_block_prox(&self) -> bool {
        true
    }

    fn block_prox(
        &self,
        _x: &[f64],
        _b: BlockRef<'_>,
        g: &[f64],
        h: f64,
        _root_tol: f64,
    ) -> Result<Vec<f64>, ProxError> {
        Ok(g.iter().map(|gi| -gi / h).collect())
    }

    fn hess0_norm(&self, _x0: &[f64]) -> Option<f64> {
        Some(0.0)
    }

    fn constant_along_block(&self, _b: BlockRef<'_>) -> bool {
        true
    }

    fn value_after_step(
        &self,
        _x: &[f64],
        _psi_x: f64,
        _b: BlockRef<'_>,
        _d: &[f64],
    ) -> Option<f64> {
        Some(0.0)
    }
}

impl<T: SmoothOracle + ?Sized> SmoothOracle for alloc::boxed::Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn block_grad(&self, x: &[f64], b: BlockRef<'_>, out: &mut Vec<f64>) {
        (**self).block_grad(x, b, out)
    }
    fn full_grad(&self, x: &[f64], out: &mut [f64]) {
        (**self).full_grad(x, out)
    }
    fn dynamic_lipschitz(&self, x: &[f64], b: BlockRef<'_>) -> Option<f64> {
        (**self).dynamic_lipschitz(x, b)
    }
    fn value_after_step(
        &self,
        x: &[f64],
        f_x: f64,
        b: BlockRef<'_>,
        d: &[f64],
        g_block: &[f64],
    ) -> Option<f64> {
        (**self).value_after_step(x, f_x, b, d, g_block)
    }
}

impl<T: PsiOracle + ?Sized> PsiOracle for alloc::boxed::Box<T> {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn block_grad(&self, x: &[f64], b: BlockRef<'_>, out: &mut Vec<f64>) {
        (**self).block_grad(x, b, out)
    }
    fn full_grad(&self, x: &[f64], out: &mut [f64]) {
        (**self).full_grad(x, out)
    }
    fn constants(&self) -> PsiConstants {
        (**self).constants()
    }
    fn flags(&self) -> PsiFlags {
        (**self).flags()
    }
    fn supports_block_prox(&self) -> bool {
        (**self).supports_block_prox()
    }
    fn block_prox(
        &self,
        x: &[f64],
        b: BlockRef<'_>,
        g: &[f64],
        h: f64,
        root_tol: f64,
    ) -> Result<Vec<f64>, ProxError> {
        (**self).block_prox(x, b, g, h, root_tol)
    }
    fn hess0_norm(&self, x0: &[f64]) -> Option<f64> {
        (**self).hess0_norm(x0)
    }
    fn constant_along_block(&self, b: BlockRef<'_>) -> bool {
        (**self).constant_along_block(b)
    }
    fn value_after_step(&self, x: &[f64], psi_x: f64, b: BlockRef<'_>, d: &[f64]) -> Option<f64> {
        (**self).value_after_step(x, psi_x, b, d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    NonFiniteObjective,
    NonFiniteGradient,
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::NonFiniteObjective => write!(f, "objective is not finite"),
            EvalError::NonFiniteGradient => write!(f, "gradient has non-finite entries"),
            EvalError::DimensionMismatch { expected, got } => {
                write!(f, "point has dimension {got}, expected {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

/// The composite problem: paired oracles plus the block partition.
#[derive(Debug, Clone)]
pub struct CompositeProblem<F, P> {
    pub f: F,
    pub psi: P,
    pub partition: BlockPartition,
}

impl<F: SmoothOracle, P: PsiOracle> CompositeProblem<F, P> {
    pub fn new(f: F, psi: P, partition: BlockPartition) -> Self {
        assert_eq!(f.dim(), partition.dim(), "oracle/partition dimensions");
        CompositeProblem { f, psi, partition }
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }

    /// `F(x) = f(x) + psi(x)`.
    pub fn f_value(&self, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let v = self.f.value(x) + self.psi.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFiniteObjective)
        }
    }

    /// `out = U_i^T grad F(x)`.
    pub fn block_grad_f(
        &self,
        x: &[f64],
        i: usize,
        out: &mut Vec<f64>,
        scratch: &mut Vec<f64>,
    ) -> Result<(), EvalError> {
        let b = self.partition.block(i);
        self.f.block_grad(x, b, out);
        self.psi.block_grad(x, b, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += s;
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(EvalError::NonFiniteGradient)
        }
    }

    /// `out = grad F(x)`.
    pub fn full_grad(&self, x: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        self.f.full_grad(x, out);
        self.psi.full_grad(x, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += s;
        }
    }

    /// Seminorm entering the `H_psi ||y||^p` curvature bound: the Euclidean
    /// norm over the blocks `psi` actually depends on.
    pub fn psi_seminorm_sq(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for b in self.partition.blocks() {
            if !self.psi.constant_along_block(b) {
                s += b.norm_sq(x);
            }
        }
        s
    }

    /// Max over coordinates of the relative error between the analytic
    /// gradient of `F` and central finite differences with the given step.
    pub fn grad_check(&self, x: &[f64], step: f64) -> f64 {
        assert!(step > 0.0);
        let n = self.dim();
        let mut analytic = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        self.full_grad(x, &mut analytic, &mut scratch);
        let mut xp = x.to_vec();
        let mut worst = 0.0f64;
        for j in 0..n {
            let xj = x[j];
            xp[j] = xj + step;
            let fp = self.f.value(&xp) + self.psi.value(&xp);
            xp[j] = xj - step;
            let fm = self.f.value(&xp) + self.psi.value(&xp);
            xp[j] = xj;
            let fd = (fp - fm) / (2.0 * step);
            let err = crate::math::abs(analytic[j] - fd) / (1.0 + crate::math::abs(analytic[j]));
            if err > worst {
                worst = err;
            }
        }
        worst
    }
}

/// Spectral-norm estimate of `hess psi(x0)` by power iteration on central
/// finite-difference Hessian-vector products.
pub fn estimate_hess0_norm<P: PsiOracle>(psi: &P, x0: &[f64], seed: u64) -> f64 {
    let n = x0.len();
    let mut rng = Rng64::new(seed);
    let mut v = vec![0.0; n];
    rng.fill_normal(&mut v);
    let nv = norm(&v);
    if nv == 0.0 {
        return 0.0;
    }
    for vj in v.iter_mut() {
        *vj /= nv;
    }
    let mut xp = vec![0.0; n];
    let mut xm = vec![0.0; n];
    let mut gp = vec![0.0; n];
    let mut gm = vec![0.0; n];
    let mut lambda = 0.0f64;
    for _ in 0..20 {
        for j in 0..n {
            xp[j] = x0[j] + FD_STEP * v[j];
            xm[j] = x0[j] - FD_STEP * v[j];
        }
        psi.full_grad(&xp, &mut gp);
        psi.full_grad(&xm, &mut gm);
        let mut w_norm_sq = 0.0;
        for j in 0..n {
            let wj = (gp[j] - gm[j]) / (2.0 * FD_STEP);
            v[j] = wj;
            w_norm_sq += wj * wj;
        }
        let new_lambda = sqrt(w_norm_sq);
        if new_lambda == 0.0 {
            return 0.0;
        }
        for vj in v.iter_mut() {
            *vj /= new_lambda;
        }
        if crate::math::abs(new_lambda - lambda) <= 1e-6 * (1.0 + new_lambda) {
            return new_lambda;
        }
        lambda = new_lambda;
    }
    lambda
}

/// Finite-difference Rayleigh-quotient probe of the curvature bound
/// `||U_i^T hess psi(y) U_i|| <= H_psi * ||y||_psi^p`.
///
/// Returns the largest observed ratio `|q| / bound` over random block
/// directions (so a value `<= 1 + 1e-3` passes the spot check). Blocks the
/// oracle is constant along are probed against an absolute tolerance instead
/// and never produce a ratio.
pub fn a4_spot_check<P: PsiOracle>(
    psi: &P,
    partition: &BlockPartition,
    y: &[f64],
    h_psi: f64,
    p: u32,
    dirs_per_block: usize,
    seed: u64,
) -> f64 {
    let n = y.len();
    let mut rng = Rng64::new(seed);
    let mut seminorm_sq = 0.0;
    for b in partition.blocks() {
        if !psi.constant_along_block(b) {
            seminorm_sq += b.norm_sq(y);
        }
    }
    let bound = h_psi * crate::math::powi(sqrt(seminorm_sq), p);
    let mut yp = vec![0.0; n];
    let mut ym = vec![0.0; n];
    let mut gp = vec![0.0; n];
    let mut gm = vec![0.0; n];
    let mut worst = 0.0f64;
    for b in partition.blocks() {
        if psi.constant_along_block(b) {
            continue;
        }
        for _ in 0..dirs_per_block {
            let mut v = vec![0.0; b.len()];
            rng.fill_normal(&mut v);
            let nv = norm(&v);
            if nv == 0.0 {
                continue;
            }
            for vj in v.iter_mut() {
                *vj /= nv;
            }
            yp.copy_from_slice(y);
            ym.copy_from_slice(y);
            for (slot, vj) in b.iter().zip(&v) {
                yp[slot] += FD_STEP * vj;
                ym[slot] -= FD_STEP * vj;
            }
            psi.full_grad(&yp, &mut gp);
            psi.full_grad(&ym, &mut gm);
            // q = v^T (U^T hess psi U) v via the directional derivative.
            let mut q = 0.0;
            for (slot, vj) in b.iter().zip(&v) {
                q += vj * (gp[slot] - gm[slot]) / (2.0 * FD_STEP);
            }
            let ratio = if bound > 0.0 {
                crate::math::abs(q) / bound
            } else if crate::math::abs(q) <= 1e-6 {
                0.0
            } else {
                f64::INFINITY
            };
            if ratio > worst {
                worst = ratio;
            }
        }
    }
    worst
}
