//! Minimal dense helpers over row-major slices. Desk-scale only; nothing
//! here is blocked or vectorized beyond what the compiler does on its own.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, norm, sqrt};
use crate::rng::Rng64;

/// `out = A x` for row-major `A` with `rows x cols` entries.
pub fn matvec(a: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), rows * cols);
    for i in 0..rows {
        out[i] = crate::math::dot(&a[i * cols..(i + 1) * cols], x);
    }
}

/// `C = A B` with `A: m x k`, `B: k x n` (all row-major).
pub fn gemm_nn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, c: &mut [f64]) {
    c.fill(0.0);
    for i in 0..m {
        for l in 0..k {
            let ail = a[i * k + l];
            if ail == 0.0 {
                continue;
            }
            let brow = &b[l * n..(l + 1) * n];
            let crow = &mut c[i * n..(i + 1) * n];
            for j in 0..n {
                crow[j] += ail * brow[j];
            }
        }
    }
}

/// `C = A^T B` with `A: k x m`, `B: k x n`.
pub fn gemm_tn(a: &[f64], b: &[f64], k: usize, m: usize, n: usize, c: &mut [f64]) {
    c.fill(0.0);
    for l in 0..k {
        let arow = &a[l * m..(l + 1) * m];
        let brow = &b[l * n..(l + 1) * n];
        for i in 0..m {
            let ali = arow[i];
            if ali == 0.0 {
                continue;
            }
            let crow = &mut c[i * n..(i + 1) * n];
            for j in 0..n {
                crow[j] += ali * brow[j];
            }
        }
    }
}

/// `C = A B^T` with `A: m x k`, `B: n x k`.
pub fn gemm_nt(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, c: &mut [f64]) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..n {
            c[i * n + j] = crate::math::dot(arow, &b[j * k..(j + 1) * k]);
        }
    }
}

pub fn frobenius(a: &[f64]) -> f64 {
    norm(a)
}

/// Largest deviation `|a_ij - a_ji|` relative to the largest magnitude entry.
pub fn symmetry_error(a: &[f64], n: usize) -> f64 {
    let mut max_abs = 0.0f64;
    for &v in a {
        if abs(v) > max_abs {
            max_abs = abs(v);
        }
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dev = abs(a[i * n + j] - a[j * n + i]);
            if dev > worst {
                worst = dev;
            }
        }
    }
    if max_abs > 0.0 {
        worst / max_abs
    } else {
        worst
    }
}

/// Spectral norm of a symmetric matrix by power iteration with a fixed
/// deterministic start (used for block Lipschitz constants).
pub fn sym_spectral_norm(a: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return abs(a[0]);
    }
    let mut rng = Rng64::new(0x5eed_0001);
    let mut v = vec![0.0; n];
    rng.fill_normal(&mut v);
    let nv = norm(&v);
    for vj in v.iter_mut() {
        *vj /= nv;
    }
    let mut w = vec![0.0; n];
    let mut lambda = 0.0f64;
    for _ in 0..200 {
        matvec(a, n, n, &v, &mut w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        for j in 0..n {
            v[j] = w[j] / nw;
        }
        if abs(nw - lambda) <= 1e-12 * (1.0 + nw) {
            return nw;
        }
        lambda = nw;
    }
    lambda
}

/// Thin Q factor (orthonormal columns) of an `n x m` matrix, `n >= m`, by
/// Householder reflections. The input is consumed as workspace.
pub fn householder_q(mut a: Vec<f64>, n: usize, m: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * m);
    debug_assert!(n >= m);
    let mut betas = vec![0.0; m];
    for j in 0..m {
        // Reflector for column j, rows j..n.
        let mut sigma = 0.0;
        for i in j..n {
            sigma += a[i * m + j] * a[i * m + j];
        }
        let norm_col = sqrt(sigma);
        if norm_col == 0.0 {
            betas[j] = 0.0;
            continue;
        }
        let x0 = a[j * m + j];
        let alpha = if x0 >= 0.0 { -norm_col } else { norm_col };
        // v = x - alpha e1, stored over the column.
        a[j * m + j] = x0 - alpha;
        let mut vtv = 0.0;
        for i in j..n {
            vtv += a[i * m + j] * a[i * m + j];
        }
        betas[j] = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
        // Apply H = I - beta v v^T to the remaining columns.
        for col in (j + 1)..m {
            let mut dot = 0.0;
            for i in j..n {
                dot += a[i * m + j] * a[i * m + col];
            }
            let s = betas[j] * dot;
            for i in j..n {
                a[i * m + col] -= s * a[i * m + j];
            }
        }
    }
    // Q = H_0 ... H_{m-1} applied to the first m identity columns.
    let mut q = vec![0.0; n * m];
    for j in 0..m {
        q[j * m + j] = 1.0;
    }
    for j in (0..m).rev() {
        if betas[j] == 0.0 {
            continue;
        }
        for col in 0..m {
            let mut dot = 0.0;
            for i in j..n {
                dot += a[i * m + j] * q[i * m + col];
            }
            let s = betas[j] * dot;
            for i in j..n {
                q[i * m + col] -= s * a[i * m + j];
            }
        }
    }
    q
}

/// Random matrix with orthonormal columns (`n x m`, `n >= m`).
pub fn random_orthonormal(n: usize, m: usize, rng: &mut Rng64) -> Vec<f64> {
    let mut g = vec![0.0; n * m];
    rng.fill_normal(&mut g);
    householder_q(g, n, m)
}
