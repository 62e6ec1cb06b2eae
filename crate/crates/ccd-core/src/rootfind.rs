//! Safeguarded positive-root solvers for the scalar polynomials behind the
//! adaptive stepsizes and the cubic-regularized block prox.
//!
//! All polynomials handled here have exactly one sign change in their
//! coefficient sequence, so they have exactly one positive root and are
//! negative below it and positive above it. The solver bisects to a tenth of
//! a percent of the bracket, then switches to Newton with a bisection
//! fallback whenever the Newton step leaves the bracket.

use core::fmt;

use crate::math::{abs, powi};

/// Default residual tolerance. Stepsizes feed descent assertions with
/// 1e-9-level tolerances, so roots are resolved well below that.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

const MAX_ITERS: u32 = 200;

/// A computed root together with its certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    /// `|h(root)|`.
    pub residual: f64,
    /// Certification scale `(1 + max|c_j|) * (1 + root)^deg`; solutions
    /// satisfy `residual <= 1e-10 * scale` with wide margin.
    pub scale: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootError {
    /// Coefficients do not match the required one-sign-change pattern.
    InvalidSignPattern,
    /// No upper bracket with `h > 0` was found. Unreachable for valid sign
    /// patterns; kept as an internal-error signal.
    NoBracket,
}

impl fmt::Display for RootError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootError::InvalidSignPattern => write!(f, "coefficients violate the sign pattern"),
            RootError::NoBracket => write!(f, "failed to bracket the positive root"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RootError {}

/// Horner evaluation of `h` and `h'`; coefficients ascending by degree.
fn eval(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut h = 0.0;
    let mut dh = 0.0;
    for &c in coeffs.iter().rev() {
        dh = dh * x + h;
        h = h * x + c;
    }
    (h, dh)
}

fn max_abs_coeff(coeffs: &[f64]) -> f64 {
    let mut m = 0.0;
    for &c in coeffs {
        let a = abs(c);
        if a > m {
            m = a;
        }
    }
    m
}

fn degree(coeffs: &[f64]) -> usize {
    coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .unwrap_or(0)
}

/// Certification scale `(1 + max|c_j|) * (1 + x)^deg`.
fn cert_scale(coeffs: &[f64], x: f64) -> f64 {
    (1.0 + max_abs_coeff(coeffs)) * powi(1.0 + abs(x), degree(coeffs) as u32)
}

/// Residual level at which a root counts as resolved. The `|h'| * x` term
/// makes the test equivalent to a relative bound on the root itself, which
/// keeps downstream prox stationarity residuals near machine precision even
/// when the coefficients are huge.
fn stop_scale(dh: f64, x: f64, tol: f64) -> f64 {
    tol * (1.0 + abs(dh) * abs(x))
}

/// Core bracketed solver. Requires `h(0) < 0` and a sign pattern that makes
/// `h` cross zero exactly once on the positive axis.
fn solve_bracketed(
    coeffs: &[f64],
    bracket_hint: Option<f64>,
    root_tol: f64,
) -> Result<RootResult, RootError> {
    let mut iterations = 0u32;

    // Upper bracket: take the hint when it already has h >= 0, otherwise
    // grow by doubling. One sign change makes h -> +inf, so this terminates
    // (in the worst case through overflow to +inf).
    let mut hi = match bracket_hint {
        Some(w) if w > 0.0 && w.is_finite() => w,
        _ => 1.0,
    };
    let mut h_hi = eval(coeffs, hi).0;
    let mut doublings = 0;
    while h_hi < 0.0 {
        hi *= 2.0;
        h_hi = eval(coeffs, hi).0;
        doublings += 1;
        if doublings > 1100 || !hi.is_finite() {
            return Err(RootError::NoBracket);
        }
    }
    let mut lo = 0.0f64;

    // Bisect down to a hundredth of the bracket.
    let coarse_width = 1e-2 * (hi - lo);
    while hi - lo > coarse_width && iterations < MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let (h_mid, dh_mid) = eval(coeffs, mid);
        iterations += 1;
        if h_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if abs(h_mid) <= stop_scale(dh_mid, mid, root_tol) {
            return Ok(RootResult {
                root: mid,
                residual: abs(h_mid),
                scale: cert_scale(coeffs, mid),
                iterations,
            });
        }
    }

    // Safeguarded Newton from the midpoint.
    let mut x = 0.5 * (lo + hi);
    loop {
        let (h, dh) = eval(coeffs, x);
        iterations += 1;
        if abs(h) <= stop_scale(dh, x, root_tol) {
            return Ok(RootResult {
                root: x,
                residual: abs(h),
                scale: cert_scale(coeffs, x),
                iterations,
            });
        }
        if h < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - h / dh;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        // The bracket can collapse to adjacent floats before the residual
        // test fires for badly scaled coefficients; return the best point.
        if hi - lo <= f64::EPSILON * (1.0 + hi) || iterations >= MAX_ITERS {
            let (h_final, _) = eval(coeffs, x);
            return Ok(RootResult {
                root: x,
                residual: abs(h_final),
                scale: cert_scale(coeffs, x),
                iterations,
            });
        }
    }
}

/// Unique nonnegative root of a polynomial with nonnegative coefficients for
/// every positive degree and a nonpositive constant term (ascending
/// coefficient order). Returns 0 exactly when the constant term is 0.
///
/// `bracket_hint` is an optional upper bound on the root; the stepsize rules
/// pass `w = ||U_i^T grad F|| / H_f`.
pub fn positive_root(
    coeffs: &[f64],
    bracket_hint: Option<f64>,
    root_tol: f64,
) -> Result<RootResult, RootError> {
    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(RootError::InvalidSignPattern);
    }
    let c0 = coeffs[0];
    if c0 > 0.0 || coeffs[1..].iter().any(|&c| c < 0.0) {
        return Err(RootError::InvalidSignPattern);
    }
    if c0 == 0.0 {
        return Ok(RootResult {
            root: 0.0,
            residual: 0.0,
            scale: cert_scale(coeffs, 0.0),
            iterations: 0,
        });
    }
    if coeffs[1..].iter().all(|&c| c == 0.0) {
        // h(x) = c0 < 0 everywhere; no root exists.
        return Err(RootError::InvalidSignPattern);
    }
    solve_bracketed(coeffs, bracket_hint, root_tol)
}

/// Unique positive root `mu` of the quartic arising from the block prox of a
/// cubic regularizer (descending arguments, i.e. `c4 mu^4 + ... + c0`).
///
/// The sign pattern must have exactly one change: `c4, c3 >= 0`, `c0 <= 0`,
/// and no coefficient after the first nonpositive one may be positive.
/// Returns 0 exactly for the stationary case `c1 = c0 = 0`.
pub fn quartic_positive_root(
    c4: f64,
    c3: f64,
    c2: f64,
    c1: f64,
    c0: f64,
    root_tol: f64,
) -> Result<RootResult, RootError> {
    let coeffs = [c0, c1, c2, c3, c4];
    if coeffs.iter().any(|c| !c.is_finite()) || c4 < 0.0 || c3 < 0.0 || c0 > 0.0 {
        return Err(RootError::InvalidSignPattern);
    }
    // Exactly one sign change over nonzero coefficients, ending nonpositive.
    let mut changes = 0;
    let mut last_sign = 0i8;
    for &c in [c4, c3, c2, c1, c0].iter() {
        if c == 0.0 {
            continue;
        }
        let s: i8 = if c > 0.0 { 1 } else { -1 };
        if last_sign != 0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }
    if changes > 1 {
        return Err(RootError::InvalidSignPattern);
    }
    if changes == 0 {
        // No negative coefficient at all: h(mu) >= 0 on [0, inf) with
        // h(0) = c0 = 0, so the root is 0.
        return Ok(RootResult {
            root: 0.0,
            residual: 0.0,
            scale: cert_scale(&coeffs, 0.0),
            iterations: 0,
        });
    }
    if c0 == 0.0 {
        if c1 == 0.0 {
            return Ok(RootResult {
                root: 0.0,
                residual: 0.0,
                scale: cert_scale(&coeffs, 0.0),
                iterations: 0,
            });
        }
        // Deflate the root at the origin; the cubic keeps one sign change.
        let r = solve_bracketed(&[c1, c2, c3, c4], None, root_tol)?;
        let quartic_res = abs(eval(&coeffs, r.root).0);
        return Ok(RootResult {
            residual: quartic_res,
            scale: cert_scale(&coeffs, r.root),
            ..r
        });
    }
    solve_bracketed(&coeffs, None, root_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    /// Independent oracle: plain interval halving on [0, hi], 200 rounds.
    fn bisect_oracle(f: impl Fn(f64) -> f64, mut hi: f64) -> f64 {
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn factorable_quadratics() {
        // (a - 1)(a + 2) and (a - 1)(a + 3)
        let r = positive_root(&[-2.0, 1.0, 1.0], None, DEFAULT_ROOT_TOL).unwrap();
        assert!((r.root - 1.0).abs() < 1e-10);
        let r = positive_root(&[-3.0, 2.0, 1.0], None, DEFAULT_ROOT_TOL).unwrap();
        assert!((r.root - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_constant_term_short_circuits() {
        let r = positive_root(&[0.0, 2.0, 1.0], None, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.root, 0.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn quadratic_against_bisection_oracle() {
        // h(a) = a^2/3 + 2a - 5; oracle value frozen by interval halving.
        let coeffs = [-5.0, 2.0, 1.0 / 3.0];
        let expected = bisect_oracle(|a| a * a / 3.0 + 2.0 * a - 5.0, 1.0);
        assert!((expected - 1.8989794855663558).abs() < 1e-12);
        let r = positive_root(&coeffs, None, DEFAULT_ROOT_TOL).unwrap();
        assert!((r.root - expected).abs() < 1e-10, "root {}", r.root);
    }

    #[test]
    fn rejects_invalid_patterns() {
        assert_eq!(
            positive_root(&[1.0, 1.0, 1.0], None, 1e-12).unwrap_err(),
            RootError::InvalidSignPattern
        );
        assert_eq!(
            positive_root(&[-1.0, -1.0, 1.0], None, 1e-12).unwrap_err(),
            RootError::InvalidSignPattern
        );
        // Constant-only polynomial with no root.
        assert_eq!(
            positive_root(&[-1.0, 0.0, 0.0], None, 1e-12).unwrap_err(),
            RootError::InvalidSignPattern
        );
    }

    #[test]
    fn quartic_with_zero_off_block_mass() {
        // mu^4 + 2 mu^3 + mu^2 - 4 = (mu^2 + mu - 2)(mu^2 + mu + 2), root 1.
        let r = quartic_positive_root(1.0, 2.0, 1.0, 0.0, -4.0, DEFAULT_ROOT_TOL).unwrap();
        assert!((r.root - 1.0).abs() < 1e-11, "root {}", r.root);
    }

    #[test]
    fn quartic_stationary_case() {
        let r = quartic_positive_root(1.0, 2.0, 1.0, 0.0, 0.0, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.root, 0.0);
    }

    #[test]
    fn quartic_with_negative_middle_coefficient() {
        // Valid single-sign-change pattern with c2 < 0.
        let (c4, c3, c2, c1, c0) = (0.25, 1.5, -2.0, -3.0, -7.0);
        let r = quartic_positive_root(c4, c3, c2, c1, c0, DEFAULT_ROOT_TOL).unwrap();
        let expected = bisect_oracle(
            |m| (((c4 * m + c3) * m + c2) * m + c1) * m + c0,
            1.0,
        );
        assert!((r.root - expected).abs() < 1e-9 * (1.0 + expected));
    }

    #[test]
    fn quartic_rejects_two_sign_changes() {
        assert_eq!(
            quartic_positive_root(1.0, 0.0, -1.0, 1.0, -1.0, 1e-12).unwrap_err(),
            RootError::InvalidSignPattern
        );
    }

    #[test]
    fn residual_meets_contract_on_random_draws() {
        use crate::rng::Rng64;
        let mut rng = Rng64::new(2024);
        for _ in 0..500 {
            let deg = 2 + rng.next_index(3);
            let mut coeffs: Vec<f64> = Vec::new();
            coeffs.push(-(rng.next_f64() * 100.0 + 1e-6));
            for _ in 0..deg {
                coeffs.push(rng.next_f64() * 10.0);
            }
            // Keep at least one strictly positive higher coefficient.
            let j = 1 + rng.next_index(deg);
            coeffs[j] += 1e-3;
            let r = positive_root(&coeffs, None, DEFAULT_ROOT_TOL).unwrap();
            let bound =
                1e-10 * (1.0 + max_abs_coeff(&coeffs)) * powi(1.0 + r.root, degree(&coeffs) as u32);
            assert!(
                r.residual <= bound,
                "residual {} exceeds {} for {:?}",
                r.residual,
                bound,
                coeffs
            );
            // Uniqueness witness: strictly negative below, positive above.
            if r.root > 0.0 {
                let delta = 1e-6 * (1.0 + r.root);
                assert!(eval(&coeffs, r.root - delta).0 < 0.0);
                assert!(eval(&coeffs, r.root + delta).0 > 0.0);
            }
        }
    }
}
