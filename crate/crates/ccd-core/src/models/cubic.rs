//! The cubic-regularized Newton subproblem
//!
//! ```text
//! min_x  0.5 <Ax, x> + <b, x> + (M/6) ||x||^3
//! ```
//!
//! with `A` symmetric. The smooth part is the quadratic; the cubic term plays
//! the `psi` role. It is convex along coordinates, satisfies the curvature
//! bound with `H_psi = M, p = 1`, has a Hessian-Lipschitz constant
//! `L_psi = M`, and admits a closed-form block prox through a quartic root
//! ([`crate::cpg::cubic_newton_block_prox`]).
//!
//! With `b = 0` and `A` indefinite the minimizers are `x = r v_min` with
//! `r = 2 |lambda_min| / M`, so a run doubles as a smallest-eigenvalue
//! solver: at any `x`, `lambda_hat = -(M/2) ||x||` estimates the eigenvalue
//! and `||A x - lambda_hat x|| = ||grad F(x)||` is its residual.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::ModelError;
use crate::cpg::cubic_newton_block_prox;
use crate::linalg::{self, sym_spectral_norm};
use crate::math::{abs, dot, norm, sqrt};
use crate::partition::{BlockPartition, BlockRef};
use crate::problem::{CompositeProblem, ProxError, PsiConstants, PsiFlags, PsiOracle, SmoothOracle};
use crate::rng::Rng64;

const SYMMETRY_TOL: f64 = 1e-12;

/// Spectrum used when generating a test matrix `A = Q^T diag(B) Q`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SpectrumSpec {
    /// `diag(largest, N(0,1), ...)` — one dominant eigenvalue, the regime
    /// where coordinate methods shine.
    GapLargest { largest: f64 },
    /// One negative eigenvalue `lambda_min`, the rest positive; used by the
    /// eigenvalue mode.
    Indefinite { lambda_min: f64 },
    /// Explicit eigenvalues.
    Explicit(Vec<f64>),
}

/// How the linear term is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LinearTermSpec {
    Gaussian,
    Zero,
}

#[derive(Debug, Clone)]
pub struct CubicNewtonInstance {
    n: usize,
    a: Arc<Vec<f64>>,
    pub b: Vec<f64>,
    pub m_reg: f64,
}

impl CubicNewtonInstance {
    /// Wrap an explicit symmetric matrix.
    pub fn new(n: usize, a: Vec<f64>, b: Vec<f64>, m_reg: f64) -> Result<Self, ModelError> {
        if a.len() != n * n {
            return Err(ModelError::NotSquare { rows: n, len: a.len() });
        }
        if b.len() != n {
            return Err(ModelError::DimensionMismatch { expected: n, got: b.len() });
        }
        if !(a.iter().all(|v| v.is_finite()) && b.iter().all(|v| v.is_finite())) {
            return Err(ModelError::NonFiniteData);
        }
        if !(m_reg.is_finite() && m_reg > 0.0) {
            return Err(ModelError::InvalidRegularization { value: m_reg });
        }
        let sym = linalg::symmetry_error(&a, n);
        if sym > SYMMETRY_TOL {
            return Err(ModelError::AsymmetricMatrix { error: sym });
        }
        Ok(CubicNewtonInstance { n, a: Arc::new(a), b, m_reg })
    }

    /// Generate `A = Q^T diag(spec) Q` with `Q` the orthogonal factor of a
    /// seeded Gaussian matrix, plus the requested linear term.
    pub fn generate(
        n: usize,
        spectrum: &SpectrumSpec,
        linear: LinearTermSpec,
        m_reg: f64,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let mut rng = Rng64::new(seed);
        let diag: Vec<f64> = match spectrum {
            SpectrumSpec::GapLargest { largest } => {
                let mut d = vec![*largest];
                for _ in 1..n {
                    d.push(rng.next_normal());
                }
                d
            }
            SpectrumSpec::Indefinite { lambda_min } => {
                let mut d = vec![*lambda_min];
                for _ in 1..n {
                    d.push(abs(rng.next_normal()) + 0.1);
                }
                d
            }
            SpectrumSpec::Explicit(values) => {
                if values.len() != n {
                    return Err(ModelError::DimensionMismatch {
                        expected: n,
                        got: values.len(),
                    });
                }
                values.clone()
            }
        };
        let q = linalg::random_orthonormal(n, n, &mut rng);
        // A = Q^T diag Q: scale the rows of Q, multiply by Q^T.
        let mut scaled = q.clone();
        for (row, dv) in scaled.chunks_mut(n).zip(&diag) {
            for v in row {
                *v *= dv;
            }
        }
        let mut a = vec![0.0; n * n];
        linalg::gemm_tn(&q, &scaled, n, n, n, &mut a);
        // Kill roundoff asymmetry so the validator's 1e-12 bound holds.
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
        }
        let b = match linear {
            LinearTermSpec::Gaussian => {
                let mut b = vec![0.0; n];
                rng.fill_normal(&mut b);
                b
            }
            LinearTermSpec::Zero => vec![0.0; n],
        };
        CubicNewtonInstance::new(n, a, b, m_reg)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    /// Partition with one coordinate per block, `L_i = |A_ii|`.
    pub fn unit_partition(&self) -> BlockPartition {
        let l: Vec<f64> = (0..self.n).map(|i| abs(self.a[i * self.n + i])).collect();
        BlockPartition::unit_blocks(l).expect("unit partition")
    }

    /// Single-block partition with `L = ||A||_2`.
    pub fn single_partition(&self) -> BlockPartition {
        let l = sym_spectral_norm(&self.a, self.n);
        BlockPartition::single_block(self.n, l).expect("single partition")
    }

    /// Contiguous blocks; `L_i` is the spectral norm of the diagonal
    /// submatrix.
    pub fn contiguous_partition(&self, sizes: &[usize]) -> BlockPartition {
        let mut l = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            let mut sub = vec![0.0; s * s];
            for i in 0..s {
                for j in 0..s {
                    sub[i * s + j] = self.a[(start + i) * self.n + (start + j)];
                }
            }
            l.push(sym_spectral_norm(&sub, s));
            start += s;
        }
        BlockPartition::contiguous(sizes, l).expect("contiguous partition")
    }

    /// Composite problem over the given partition.
    pub fn problem(
        &self,
        partition: BlockPartition,
    ) -> CompositeProblem<QuadraticSmooth, CubicNormPsi> {
        let f = QuadraticSmooth {
            n: self.n,
            a: Arc::clone(&self.a),
            b: self.b.clone(),
        };
        let psi = CubicNormPsi { m_reg: self.m_reg };
        CompositeProblem::new(f, psi, partition)
    }

    /// Starting point `x0 = -r b / ||b||` with
    /// `r = -b^T A b / (M ||b||^2) + sqrt((b^T A b / (M ||b||^2))^2 + 2||b||/M)`;
    /// a seeded random unit vector when `b = 0` (eigenvalue mode).
    pub fn start_point(&self, seed: u64) -> Vec<f64> {
        let bnorm = norm(&self.b);
        if bnorm == 0.0 {
            let mut rng = Rng64::new(seed);
            let mut x = vec![0.0; self.n];
            rng.fill_normal(&mut x);
            let nx = norm(&x);
            for v in x.iter_mut() {
                *v /= nx;
            }
            return x;
        }
        let mut ab = vec![0.0; self.n];
        linalg::matvec(&self.a, self.n, self.n, &self.b, &mut ab);
        let ratio = dot(&self.b, &ab) / (self.m_reg * bnorm * bnorm);
        let r = -ratio + sqrt(ratio * ratio + 2.0 * bnorm / self.m_reg);
        self.b.iter().map(|bj| -r * bj / bnorm).collect()
    }
}

/// Eigenvalue estimate read off an iterate of the `b = 0` mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigEstimate {
    /// `-(M/2) ||x||`, exact at stationary points.
    pub lambda: f64,
    /// `x^T A x / ||x||^2`.
    pub rayleigh: f64,
    /// `||A x - lambda x||`.
    pub residual: f64,
}

/// Estimate the smallest eigenvalue from an iterate (`x != 0`).
pub fn min_eigenvalue_estimate(
    inst: &CubicNewtonInstance,
    x: &[f64],
) -> Result<EigEstimate, ModelError> {
    let n = inst.n;
    let nx = norm(x);
    if nx == 0.0 {
        return Err(ModelError::NonFiniteData);
    }
    let lambda = -0.5 * inst.m_reg * nx;
    let mut ax = vec![0.0; n];
    linalg::matvec(&inst.a, n, n, x, &mut ax);
    let rayleigh = dot(x, &ax) / (nx * nx);
    let mut res_sq = 0.0;
    for j in 0..n {
        let r = ax[j] - lambda * x[j];
        res_sq += r * r;
    }
    Ok(EigEstimate {
        lambda,
        rayleigh,
        residual: sqrt(res_sq),
    })
}

/// `f(x) = 0.5 <Ax, x> + <b, x>`.
#[derive(Debug, Clone)]
pub struct QuadraticSmooth {
    n: usize,
    a: Arc<Vec<f64>>,
    b: Vec<f64>,
}

impl QuadraticSmooth {
    pub fn new(n: usize, a: Arc<Vec<f64>>, b: Vec<f64>) -> Self {
        QuadraticSmooth { n, a, b }
    }
}

impl SmoothOracle for QuadraticSmooth {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let row = &self.a[i * self.n..(i + 1) * self.n];
            acc += x[i] * (0.5 * dot(row, x) + self.b[i]);
        }
        acc
    }

    fn block_grad(&self, x: &[f64], blk: BlockRef<'_>, out: &mut Vec<f64>) {
        out.clear();
        for slot in blk.iter() {
            let row = &self.a[slot * self.n..(slot + 1) * self.n];
            out.push(dot(row, x) + self.b[slot]);
        }
    }

    fn full_grad(&self, x: &[f64], out: &mut [f64]) {
        linalg::matvec(&self.a, self.n, self.n, x, out);
        for (o, bj) in out.iter_mut().zip(&self.b) {
            *o += bj;
        }
    }

    fn value_after_step(
        &self,
        _x: &[f64],
        f_x: f64,
        blk: BlockRef<'_>,
        d: &[f64],
        g_block: &[f64],
    ) -> Option<f64> {
        // f(x + U d) = f(x) + <g, d> + 0.5 d^T A_BB d.
        let mut quad = 0.0;
        for (i, slot_i) in blk.iter().enumerate() {
            let row = &self.a[slot_i * self.n..(slot_i + 1) * self.n];
            let mut s = 0.0;
            for (j, slot_j) in blk.iter().enumerate() {
                s += row[slot_j] * d[j];
            }
            quad += d[i] * s;
        }
        Some(f_x + dot(g_block, d) + 0.5 * quad)
    }
}

/// `psi(x) = (M/6) ||x||^3` with `grad psi(x) = (M/2) ||x|| x`.
#[derive(Debug, Clone, Copy)]
pub struct CubicNormPsi {
    pub m_reg: f64,
}

impl PsiOracle for CubicNormPsi {
    fn value(&self, x: &[f64]) -> f64 {
        let nx = norm(x);
        self.m_reg / 6.0 * nx * nx * nx
    }

    fn block_grad(&self, x: &[f64], blk: BlockRef<'_>, out: &mut Vec<f64>) {
        let scale = 0.5 * self.m_reg * norm(x);
        out.clear();
        for slot in blk.iter() {
            out.push(scale * x[slot]);
        }
    }

    fn full_grad(&self, x: &[f64], out: &mut [f64]) {
        let scale = 0.5 * self.m_reg * norm(x);
        for (o, xj) in out.iter_mut().zip(x) {
            *o = scale * xj;
        }
    }

    fn constants(&self) -> PsiConstants {
        PsiConstants {
            h_psi: Some(self.m_reg),
            p: Some(1),
            l_psi: Some(self.m_reg),
        }
    }

    fn flags(&self) -> PsiFlags {
        PsiFlags {
            convex_along_coordinates: true,
            concave_along_coordinates: false,
        }
    }

    fn supports_block_prox(&self) -> bool {
        true
    }

    fn block_prox(
        &self,
        x: &[f64],
        blk: BlockRef<'_>,
        g: &[f64],
        h: f64,
        root_tol: f64,
    ) -> Result<Vec<f64>, ProxError> {
        let (d, _mu) = cubic_newton_block_prox(x, blk, g, h, self.m_reg, root_tol)?;
        Ok(d)
    }

    /// `hess psi(x) = (M/2)(||x|| I + x x^T / ||x||)` has norm `M ||x||`.
    fn hess0_norm(&self, x0: &[f64]) -> Option<f64> {
        Some(self.m_reg * norm(x0))
    }
}
