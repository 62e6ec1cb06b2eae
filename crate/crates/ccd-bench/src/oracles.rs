//! Brute-force and dense-algebra oracles used for cross-checks and exposed
//! through the `oracle` CLI verb. Nothing here shares code with the solver
//! paths it validates.

use nalgebra::DMatrix;
use thiserror::Error;

use ccd_core::models::cubic::CubicNewtonInstance;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dimension {0} too large for a dense oracle (limit {1})")]
    TooLarge(usize, usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("no positive real root among the companion eigenvalues")]
    NoPositiveRoot,
}

/// Size guard for the dense eigendecomposition oracles.
pub const DENSE_LIMIT: usize = 500;

/// Dense symmetric eigendecomposition: eigenvalues ascending with matching
/// eigenvector columns (row-major `n x n`).
pub fn dense_symmetric_eigens(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>), OracleError> {
    if n > DENSE_LIMIT {
        return Err(OracleError::TooLarge(n, DENSE_LIMIT));
    }
    if ccd_core::linalg::symmetry_error(a, n) > 1e-10 {
        return Err(OracleError::NotSymmetric);
    }
    let m = DMatrix::from_row_slice(n, n, a);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col_out, &col_in) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col_out] = eig.eigenvectors[(row, col_in)];
        }
    }
    Ok((values, vectors))
}

/// Largest residual `||A v - lambda v||` over all pairs, for sanity checks.
pub fn eigen_residual(a: &[f64], n: usize, values: &[f64], vectors: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let mut av = vec![0.0; n];
    let mut v = vec![0.0; n];
    for (j, lambda) in values.iter().enumerate() {
        for i in 0..n {
            v[i] = vectors[i * n + j];
        }
        ccd_core::linalg::matvec(a, n, n, &v, &mut av);
        let mut r = 0.0;
        for i in 0..n {
            let e = av[i] - lambda * v[i];
            r += e * e;
        }
        worst = worst.max(r.sqrt());
    }
    worst
}

/// Global solution of the cubic-regularized model by the 1-D secular
/// reduction: with `A = Q L Q^T` and `c = Q^T b`, find `s >= max(0, -l_min)`
/// with `sum_j c_j^2 / (l_j + s)^2 = (2s/M)^2`, then `x = -Q (L + sI)^{-1} c`.
/// The hard case (`b` orthogonal to the bottom eigenspace) adds a bottom
/// eigenvector component sized to match `||x|| = 2s/M`.
pub fn cubic_newton_global(inst: &CubicNewtonInstance) -> Result<(Vec<f64>, f64), OracleError> {
    let n = inst.dim();
    let (values, vectors) = dense_symmetric_eigens(inst.matrix(), n)?;
    let m_reg = inst.m_reg;
    let lambda_min = values[0];

    // c = Q^T b.
    let mut c = vec![0.0; n];
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            s += vectors[i * n + j] * inst.b[i];
        }
        c[j] = s;
    }

    let s_low = (-lambda_min).max(0.0);
    let norm_sq_at = |s: f64| -> f64 {
        let mut acc = 0.0;
        for j in 0..n {
            let d = values[j] + s;
            if d != 0.0 {
                acc += c[j] * c[j] / (d * d);
            } else if c[j] != 0.0 {
                return f64::INFINITY;
            }
        }
        acc
    };
    // phi(s) = ||x(s)|| - 2s/M, strictly decreasing past s_low.
    let phi = |s: f64| norm_sq_at(s).sqrt() - 2.0 * s / m_reg;

    let eigenvector = |j: usize| -> Vec<f64> { (0..n).map(|i| vectors[i * n + j]).collect() };

    // Mass of b on the bottom eigenspace decides between the generic and
    // hard cases.
    let bottom_mass: f64 = values
        .iter()
        .zip(&c)
        .filter(|(l, _)| (**l - lambda_min).abs() <= 1e-10 * (1.0 + lambda_min.abs()))
        .map(|(_, cj)| cj * cj)
        .sum();

    let build_x = |s: f64| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for j in 0..n {
            let d = values[j] + s;
            if d.abs() > 1e-300 {
                let coef = -c[j] / d;
                for i in 0..n {
                    x[i] += coef * vectors[i * n + j];
                }
            }
        }
        x
    };

    let f_of = |x: &[f64]| -> f64 {
        let mut ax = vec![0.0; n];
        ccd_core::linalg::matvec(inst.matrix(), n, n, x, &mut ax);
        let quad: f64 = 0.5 * x.iter().zip(&ax).map(|(a, b)| a * b).sum::<f64>();
        let lin: f64 = x.iter().zip(&inst.b).map(|(a, b)| a * b).sum();
        let nx = (x.iter().map(|v| v * v).sum::<f64>()).sqrt();
        quad + lin + m_reg / 6.0 * nx * nx * nx
    };

    let hard_case = bottom_mass <= 1e-24 && lambda_min < 0.0 && {
        // At the left end the interior solution is already too short.
        phi(s_low + 1e-14 * (1.0 + s_low)) <= 0.0
    };
    if hard_case {
        let s = -lambda_min;
        let interior = norm_sq_at(s);
        let target = (2.0 * s / m_reg) * (2.0 * s / m_reg);
        let tau = (target - interior).max(0.0).sqrt();
        let mut x = build_x(s);
        let vmin = eigenvector(0);
        for i in 0..n {
            x[i] += tau * vmin[i];
        }
        let f = f_of(&x);
        return Ok((x, f));
    }

    // Generic case: bisect phi on (s_low, hi).
    let mut lo = s_low;
    let mut hi = (s_low + 1.0).max(1.0);
    while phi(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(OracleError::NoPositiveRoot);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi) {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let x = build_x(s);
    let f = f_of(&x);
    Ok((x, f))
}

/// Positive real root of `c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0` via the
/// eigenvalues of the companion matrix (independent cross-check for the
/// bracketed solver).
pub fn quartic_companion_root(
    c4: f64,
    c3: f64,
    c2: f64,
    c1: f64,
    c0: f64,
) -> Result<f64, OracleError> {
    let coeffs = [c0, c1, c2, c3, c4];
    let deg = coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .ok_or(OracleError::NoPositiveRoot)?;
    if deg == 0 {
        return Err(OracleError::NoPositiveRoot);
    }
    let lead = coeffs[deg];
    let mut companion = DMatrix::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    let mut best: Option<f64> = None;
    for z in eig.iter() {
        if z.im.abs() <= 1e-8 * (1.0 + z.re.abs()) && z.re > 0.0 {
            let horner = |x: f64| (((c4 * x + c3) * x + c2) * x + c1) * x + c0;
            match best {
                Some(b) if horner(b).abs() <= horner(z.re).abs() => {}
                _ => best = Some(z.re),
            }
        }
    }
    best.ok_or(OracleError::NoPositiveRoot)
}

/// Global minimizer of `g d + (h/2) d^2 + psi(d)` on `[lo, hi]` by a coarse
/// grid scan refined with ternary search in the winning cell.
pub fn grid_prox_1d(
    g: f64,
    h: f64,
    partial_psi: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    coarse_points: usize,
    refine_iters: usize,
) -> f64 {
    assert!(hi > lo && coarse_points >= 2);
    let obj = |d: f64| g * d + 0.5 * h * d * d + partial_psi(d);
    let step = (hi - lo) / coarse_points as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::INFINITY;
    for i in 0..=coarse_points {
        let d = lo + step * i as f64;
        let v = obj(d);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    for _ in 0..refine_iters {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if obj(m1) <= obj(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    0.5 * (a + b)
}
