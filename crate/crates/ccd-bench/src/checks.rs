//! Model invariant suite behind the `check` CLI verb: gradient consistency,
//! block/full gradient agreement, per-block Lipschitz bounds and the
//! curvature bound of the second term.

use ccd_core::problem::{a4_spot_check, FD_STEP};
use ccd_core::rng::Rng64;

use crate::experiment::{build_run, Model};
use crate::config::Variant;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn sample_point(model: &Model, rng: &mut Rng64, dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    rng.fill_normal(&mut x);
    if let Model::Mf(inst) = model {
        // Stay near a plausible factor scale.
        let start = inst.start_state(rng.next_u64()).to_flat();
        for (xj, sj) in x.iter_mut().zip(&start) {
            *xj = sj + 0.1 * *xj;
        }
    }
    x
}

/// Run the suite at `checks` random points; every result carries the worst
/// observed value.
pub fn run_checks(model: &Model, seed: u64) -> anyhow::Result<Vec<CheckResult>> {
    // A representative non-single-block variant for building the problem.
    let variant = match model {
        Model::Mf(_) => Variant::Ccgd1,
        _ => Variant::Rcgd2,
    };
    let (prob, _x0) = build_run(model, variant, seed)?;
    let n = prob.dim();
    let mut rng = Rng64::new(seed ^ 0xc0ffee);
    let mut results = Vec::new();

    // 1. Analytic gradient vs central differences at 10 points.
    let mut worst_fd = 0.0f64;
    for _ in 0..10 {
        let x = sample_point(model, &mut rng, n);
        worst_fd = worst_fd.max(prob.grad_check(&x, FD_STEP));
    }
    results.push(CheckResult {
        name: "gradient_finite_difference",
        passed: worst_fd <= 1e-4,
        detail: format!("max relative error {worst_fd:.3e} (tolerance 1e-4)"),
    });

    // 2. Block gradients agree with slices of the full gradient.
    let mut worst_slice = 0.0f64;
    {
        let x = sample_point(model, &mut rng, n);
        let mut full = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        prob.full_grad(&x, &mut full, &mut scratch);
        let mut blk = Vec::new();
        let mut blk_scratch = Vec::new();
        for i in 0..prob.num_blocks() {
            prob.block_grad_f(&x, i, &mut blk, &mut blk_scratch)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            for (j, slot) in prob.partition.block(i).iter().enumerate() {
                let err = (blk[j] - full[slot]).abs() / (1.0 + full[slot].abs());
                worst_slice = worst_slice.max(err);
            }
        }
    }
    results.push(CheckResult {
        name: "block_gradient_slices",
        passed: worst_slice <= 1e-12,
        detail: format!("max relative deviation {worst_slice:.3e} (tolerance 1e-12)"),
    });

    // 3. Per-block Lipschitz bound on sampled directions.
    let mut worst_lip = 0.0f64;
    for _ in 0..5 {
        let x = sample_point(model, &mut rng, n);
        for i in 0..prob.num_blocks() {
            let b = prob.partition.block(i);
            let l = prob
                .f
                .dynamic_lipschitz(&x, b)
                .unwrap_or_else(|| prob.partition.lipschitz(i));
            let mut h = vec![0.0; b.len()];
            rng.fill_normal(&mut h);
            let h_norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            if h_norm == 0.0 {
                continue;
            }
            let mut g0 = Vec::new();
            let mut g1 = Vec::new();
            prob.f.block_grad(&x, b, &mut g0);
            let mut y = x.clone();
            b.scatter_add(&mut y, &h);
            prob.f.block_grad(&y, b, &mut g1);
            let diff = g0
                .iter()
                .zip(&g1)
                .map(|(a, c)| (a - c) * (a - c))
                .sum::<f64>()
                .sqrt();
            let ratio = diff / (l * h_norm + 1e-300);
            worst_lip = worst_lip.max(ratio);
        }
    }
    results.push(CheckResult {
        name: "block_lipschitz_bound",
        passed: worst_lip <= 1.0 + 1e-6,
        detail: format!("max ||dg|| / (L ||h||) = {worst_lip:.6} (must be <= 1)"),
    });

    // 4. Curvature bound of the second term, when it declares one.
    let consts = prob.psi.constants();
    if let (Some(h_psi), Some(p)) = (consts.h_psi, consts.p) {
        if h_psi > 0.0 {
            let mut worst_a4 = 0.0f64;
            for _ in 0..5 {
                let y = sample_point(model, &mut rng, n);
                let ratio =
                    a4_spot_check(&prob.psi, &prob.partition, &y, h_psi, p, 3, rng.next_u64());
                worst_a4 = worst_a4.max(ratio);
            }
            results.push(CheckResult {
                name: "curvature_bound",
                passed: worst_a4 <= 1.0 + 1e-3,
                detail: format!("max Rayleigh ratio {worst_a4:.6} (must be <= 1 + 1e-3)"),
            });
        }
    }

    Ok(results)
}
