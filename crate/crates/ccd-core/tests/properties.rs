//! Property tests for the solver invariants.

use proptest::prelude::*;

use ccd_core::select::next_block;
use ccd_core::{cgd, positive_root, quartic_positive_root, SelectionPolicy};

fn one_sign_change_quartic() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    // c4, c3 >= 0, c2 free, c1 <= 0, c0 < 0: exactly one sign change.
    (
        1e-3..10.0f64,
        0.0..10.0f64,
        -10.0..10.0f64,
        -10.0..0.0f64,
        -100.0..-1e-6f64,
    )
}

proptest! {
    #[test]
    fn monotone_polynomials_have_certified_unique_roots(
        c0 in -100.0..-1e-6f64,
        c1 in 0.0..50.0f64,
        c2 in 0.0..50.0f64,
        c3 in 0.0..50.0f64,
        bump in 0usize..3,
    ) {
        let mut coeffs = [c0, c1, c2, c3];
        // Guarantee some strictly positive higher coefficient.
        coeffs[1 + bump] += 1e-3;
        let r = positive_root(&coeffs, None, 1e-12).unwrap();
        prop_assert!(r.root >= 0.0);
        prop_assert!(r.residual <= 1e-10 * r.scale);
        // Uniqueness witness: strict sign change around the root.
        let eval = |x: f64| ((coeffs[3] * x + coeffs[2]) * x + coeffs[1]) * x + coeffs[0];
        let delta = 1e-6 * (1.0 + r.root);
        prop_assert!(eval(r.root - delta) < 0.0);
        prop_assert!(eval(r.root + delta) > 0.0);
    }

    #[test]
    fn quartic_roots_are_certified((c4, c3, c2, c1, c0) in one_sign_change_quartic()) {
        let r = quartic_positive_root(c4, c3, c2, c1, c0, 1e-12).unwrap();
        prop_assert!(r.root > 0.0);
        prop_assert!(r.residual <= 1e-10 * r.scale);
    }

    #[test]
    fn adaptive_stepsizes_stay_in_bracket_and_match_the_direction_norm(
        norm_x in 0.0..20.0f64,
        g_norm in 1e-9..100.0f64,
        h_f in 0.51..50.0f64,
        h_psi in 0.0..20.0f64,
        l_psi in 0.0..20.0f64,
        p in 1u32..4,
    ) {
        let w = g_norm / h_f;
        for (alpha, h_big) in [
            {
                let (a, h, _) =
                    cgd::stepsize_rule1(norm_x, g_norm, h_f, h_psi, p, l_psi, 1e-12).unwrap();
                (a, h)
            },
            {
                let (a, h, _) = cgd::stepsize_rule2(norm_x, g_norm, h_f, h_psi, p, 1e-12).unwrap();
                (a, h)
            },
            {
                let (a, h, _) =
                    cgd::stepsize_rule3(norm_x, g_norm, h_f, l_psi, h_psi, 1e-12).unwrap();
                (a, h)
            },
        ] {
            prop_assert!(alpha <= w * (1.0 + 1e-12));
            prop_assert!(h_big >= h_f);
            let d_norm = g_norm / h_big;
            prop_assert!((d_norm - alpha).abs() <= 1e-9 * (1.0 + alpha));
        }
    }

    #[test]
    fn cyclic_windows_cover_every_block(order in Just(()).prop_flat_map(|_| {
        proptest::sample::subsequence((0..8usize).collect::<Vec<_>>(), 8)
            .prop_shuffle()
    }), start in 0u64..100) {
        let n = order.len();
        let policy = SelectionPolicy::Cyclic { order };
        let mut seen = vec![false; n];
        for k in start..start + n as u64 {
            seen[next_block(&policy, n, k)] = true;
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn random_selection_is_a_pure_function_of_seed_and_k(
        seed in any::<u64>(),
        k in any::<u64>(),
        n in 1usize..64,
    ) {
        let policy = SelectionPolicy::RandomUniform { seed };
        let a = next_block(&policy, n, k);
        let b = next_block(&policy, n, k);
        prop_assert_eq!(a, b);
        prop_assert!(a < n);
    }
}
