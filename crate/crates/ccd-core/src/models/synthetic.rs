//! Quadratic-plus-concave synthetic instance used by the property suites:
//!
//! ```text
//! min_x  0.5 <Ax, x> + <b, x> - (q/2) ||x||^2
//! ```
//!
//! with `A` symmetric, `A - qI` positive semidefinite and `q > 0`. The
//! second term is concave along coordinates (rule 4 territory) and has a
//! constant Hessian, so the anchored rule applies with `L_psi = 0` and
//! `||hess psi(x0)|| = q`. The prox along a block is closed-form whenever
//! the stepsize exceeds `q`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::cubic::QuadraticSmooth;
use super::ModelError;
use crate::linalg;
use crate::math::abs;
use crate::partition::{BlockPartition, BlockRef};
use crate::problem::{CompositeProblem, ProxError, PsiConstants, PsiFlags, PsiOracle};
use crate::rng::Rng64;

#[derive(Debug, Clone)]
pub struct QuadConcaveInstance {
    n: usize,
    a: Arc<Vec<f64>>,
    pub b: Vec<f64>,
    /// Concavity weight `q`; eigenvalues of `A` stay above `q`.
    pub q: f64,
}

impl QuadConcaveInstance {
    /// `A = Q^T diag(d) Q` with `d` uniform in `[q + 0.5, q + 5]`, Gaussian
    /// `b`.
    pub fn generate(n: usize, q: f64, seed: u64) -> Result<Self, ModelError> {
        if !(q.is_finite() && q > 0.0) {
            return Err(ModelError::InvalidPenalty { value: q });
        }
        let mut rng = Rng64::new(seed);
        let diag: Vec<f64> = (0..n).map(|_| q + 0.5 + 4.5 * rng.next_f64()).collect();
        let qmat = linalg::random_orthonormal(n, n, &mut rng);
        let mut scaled = qmat.clone();
        for (row, dv) in scaled.chunks_mut(n).zip(&diag) {
            for v in row {
                *v *= dv;
            }
        }
        let mut a = vec![0.0; n * n];
        linalg::gemm_tn(&qmat, &scaled, n, n, n, &mut a);
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
        }
        let mut b = vec![0.0; n];
        rng.fill_normal(&mut b);
        Ok(QuadConcaveInstance {
            n,
            a: Arc::new(a),
            b,
            q,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn unit_partition(&self) -> BlockPartition {
        let l: Vec<f64> = (0..self.n).map(|i| abs(self.a[i * self.n + i])).collect();
        BlockPartition::unit_blocks(l).expect("unit partition")
    }

    pub fn problem(
        &self,
        partition: BlockPartition,
    ) -> CompositeProblem<QuadraticSmooth, NegQuadPsi> {
        let f = QuadraticSmooth::new(self.n, Arc::clone(&self.a), self.b.clone());
        CompositeProblem::new(f, NegQuadPsi { q: self.q }, partition)
    }
}

/// `psi(x) = -(q/2) ||x||^2`.
#[derive(Debug, Clone, Copy)]
pub struct NegQuadPsi {
    pub q: f64,
}

impl PsiOracle for NegQuadPsi {
    fn value(&self, x: &[f64]) -> f64 {
        -0.5 * self.q * crate::math::dot(x, x)
    }

    fn block_grad(&self, x: &[f64], blk: BlockRef<'_>, out: &mut Vec<f64>) {
        out.clear();
        for slot in blk.iter() {
            out.push(-self.q * x[slot]);
        }
    }

    fn full_grad(&self, x: &[f64], out: &mut [f64]) {
        for (o, xj) in out.iter_mut().zip(x) {
            *o = -self.q * xj;
        }
    }

    fn constants(&self) -> PsiConstants {
        PsiConstants {
            // The constant Hessian admits no bound H_psi ||y||^p near 0.
            h_psi: None,
            p: None,
            l_psi: Some(0.0),
        }
    }

    fn flags(&self) -> PsiFlags {
        PsiFlags {
            convex_along_coordinates: false,
            concave_along_coordinates: true,
        }
    }

    fn supports_block_prox(&self) -> bool {
        true
    }

    /// `min_d <g,d> + (h/2)||d||^2 - (q/2)||x_b + d||^2` is strongly convex
    /// for `h > q` with solution `d = (q x_b - g) / (h - q)`.
    fn block_prox(
        &self,
        x: &[f64],
        blk: BlockRef<'_>,
        g: &[f64],
        h: f64,
        _root_tol: f64,
    ) -> Result<Vec<f64>, ProxError> {
        if h <= self.q {
            return Err(ProxError::SubproblemUnbounded);
        }
        Ok(blk
            .iter()
            .zip(g)
            .map(|(slot, gj)| (self.q * x[slot] - gj) / (h - self.q))
            .collect())
    }

    fn hess0_norm(&self, _x0: &[f64]) -> Option<f64> {
        Some(self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::norm;

    #[test]
    fn spectrum_stays_above_q() {
        let inst = QuadConcaveInstance::generate(12, 0.5, 3).unwrap();
        // A - qI must be positive semidefinite: check via a few Rayleigh
        // quotients and the diagonal.
        for i in 0..12 {
            assert!(inst.matrix()[i * 12 + i] > inst.q);
        }
        let mut rng = Rng64::new(8);
        let mut v = vec![0.0; 12];
        for _ in 0..20 {
            rng.fill_normal(&mut v);
            let mut av = vec![0.0; 12];
            linalg::matvec(inst.matrix(), 12, 12, &v, &mut av);
            let rq = crate::math::dot(&v, &av) / crate::math::dot(&v, &v);
            assert!(rq >= inst.q + 0.5 - 1e-9, "Rayleigh {rq}");
        }
    }

    #[test]
    fn prox_matches_stationarity() {
        let inst = QuadConcaveInstance::generate(6, 0.5, 7).unwrap();
        let psi = NegQuadPsi { q: 0.5 };
        let partition = inst.unit_partition();
        let x = [0.3, -0.7, 1.1, 0.0, 2.0, -0.2];
        let b = partition.block(2);
        let g = [0.9];
        let d = psi.block_prox(&x, b, &g, 2.0, 1e-12).unwrap();
        // g + h d - q (x_b + d) = 0.
        let r = g[0] + 2.0 * d[0] - 0.5 * (x[2] + d[0]);
        assert!(r.abs() < 1e-14);
    }

    #[test]
    fn prox_rejects_unbounded_subproblem() {
        let psi = NegQuadPsi { q: 2.0 };
        let partition = BlockPartition::unit_blocks(vec![1.0]).unwrap();
        let b = partition.block(0);
        assert_eq!(
            psi.block_prox(&[1.0], b, &[0.5], 1.0, 1e-12).unwrap_err(),
            ProxError::SubproblemUnbounded
        );
    }

    #[test]
    fn gradient_consistency() {
        let inst = QuadConcaveInstance::generate(9, 0.75, 15).unwrap();
        let prob = inst.problem(inst.unit_partition());
        let mut rng = Rng64::new(2);
        let mut x = vec![0.0; 9];
        rng.fill_normal(&mut x);
        assert!(prob.grad_check(&x, 1e-6) <= 1e-6);
        assert!(norm(&x) > 0.0);
    }
}
