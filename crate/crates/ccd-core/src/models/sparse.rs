//! Sparse symmetric quadratic oracle (CSR), for matrices ingested from
//! coordinate files. Only per-coordinate blocks are supported; the fast
//! value update uses the stored diagonal.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::cubic::CubicNormPsi;
use super::ModelError;
use crate::partition::{BlockPartition, BlockRef};
use crate::problem::{CompositeProblem, SmoothOracle};

/// Symmetric sparse matrix with the full (mirrored) pattern stored row-wise.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Build from triplets of one triangle (or both); entries are mirrored
    /// and duplicates summed.
    pub fn from_symmetric_triplets(
        n: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, ModelError> {
        let mut full: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len() * 2);
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(ModelError::DimensionMismatch {
                    expected: n,
                    got: i.max(j) + 1,
                });
            }
            if !v.is_finite() {
                return Err(ModelError::NonFiniteData);
            }
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        full.sort_unstable_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(full.len());
        let mut data: Vec<f64> = Vec::with_capacity(full.len());
        for (i, j, v) in full {
            if !indices.is_empty() && indptr[i + 1] > indptr[i] {
                let last = indices.len() - 1;
                if indices[last] == j && indptr[i + 1] == indices.len() {
                    data[last] += v;
                    continue;
                }
            }
            indices.push(j);
            data.push(v);
            indptr[i + 1] = indices.len();
        }
        // Forward-fill row pointers for empty rows.
        for i in 0..n {
            if indptr[i + 1] < indptr[i] {
                indptr[i + 1] = indptr[i];
            }
        }
        Ok(CsrMatrix {
            n,
            indptr,
            indices,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        let (idx, val) = self.row(i);
        match idx.binary_search(&i) {
            Ok(pos) => val[pos],
            Err(_) => 0.0,
        }
    }

    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        let mut s = 0.0;
        for (j, v) in idx.iter().zip(val) {
            s += v * x[*j];
        }
        s
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            *o = self.row_dot(i, x);
        }
    }

    /// Dense row-major copy (for small cross-check oracles).
    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let (idx, val) = self.row(i);
            for (j, v) in idx.iter().zip(val) {
                a[i * self.n + j] = *v;
            }
        }
        a
    }
}

/// `f(x) = 0.5 <Ax, x> + <b, x>` over a CSR matrix.
#[derive(Debug, Clone)]
pub struct SparseQuadraticSmooth {
    a: Arc<CsrMatrix>,
    b: Vec<f64>,
}

impl SparseQuadraticSmooth {
    pub fn new(a: Arc<CsrMatrix>, b: Vec<f64>) -> Result<Self, ModelError> {
        if b.len() != a.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: a.dim(),
                got: b.len(),
            });
        }
        Ok(SparseQuadraticSmooth { a, b })
    }
}

impl SmoothOracle for SparseQuadraticSmooth {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.a.dim() {
            acc += x[i] * (0.5 * self.a.row_dot(i, x) + self.b[i]);
        }
        acc
    }

    fn block_grad(&self, x: &[f64], blk: BlockRef<'_>, out: &mut Vec<f64>) {
        out.clear();
        for slot in blk.iter() {
            out.push(self.a.row_dot(slot, x) + self.b[slot]);
        }
    }

    fn full_grad(&self, x: &[f64], out: &mut [f64]) {
        self.a.matvec(x, out);
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
        if blk.len() != 1 {
            return None;
        }
        let slot = blk.iter().next().unwrap();
        Some(f_x + g_block[0] * d[0] + 0.5 * self.a.diagonal(slot) * d[0] * d[0])
    }
}

/// Cubic-regularized model over a sparse symmetric matrix, per-coordinate
/// blocks with `L_i = |A_ii|`.
pub fn sparse_cubic_problem(
    a: CsrMatrix,
    b: Vec<f64>,
    m_reg: f64,
) -> Result<CompositeProblem<SparseQuadraticSmooth, CubicNormPsi>, ModelError> {
    if !(m_reg.is_finite() && m_reg > 0.0) {
        return Err(ModelError::InvalidRegularization { value: m_reg });
    }
    let n = a.dim();
    let l: Vec<f64> = (0..n).map(|i| crate::math::abs(a.diagonal(i))).collect();
    let partition = BlockPartition::unit_blocks(l).expect("unit partition");
    let f = SparseQuadraticSmooth::new(Arc::new(a), b)?;
    Ok(CompositeProblem::new(f, CubicNormPsi { m_reg }, partition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::dot;

    #[test]
    fn triplets_mirror_and_matvec() {
        // Lower triangle of [[2, -1, 0], [-1, 3, 0.5], [0, 0.5, 1]].
        let a = CsrMatrix::from_symmetric_triplets(
            3,
            &[(0, 0, 2.0), (1, 0, -1.0), (1, 1, 3.0), (2, 1, 0.5), (2, 2, 1.0)],
        )
        .unwrap();
        assert_eq!(a.nnz(), 7);
        let mut out = [0.0; 3];
        a.matvec(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, [0.0, 6.5, 4.0]);
        assert_eq!(a.diagonal(1), 3.0);
    }

    #[test]
    fn sparse_value_matches_dense() {
        let a = CsrMatrix::from_symmetric_triplets(
            3,
            &[(0, 0, 2.0), (1, 0, -1.0), (1, 1, 3.0), (2, 2, 1.0)],
        )
        .unwrap();
        let dense = a.to_dense();
        let x = [0.5, -1.0, 2.0];
        let f = SparseQuadraticSmooth::new(Arc::new(a), vec![0.1, 0.2, 0.3]).unwrap();
        let mut quad = 0.0;
        for i in 0..3 {
            quad += x[i] * 0.5 * dot(&dense[i * 3..(i + 1) * 3], &x);
        }
        let expected = quad + dot(&[0.1, 0.2, 0.3], &x);
        assert!((f.value(&x) - expected).abs() < 1e-14);
    }
}
