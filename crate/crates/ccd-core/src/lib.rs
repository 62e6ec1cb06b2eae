//! Coordinate descent for composite objectives `F = f + psi` where `f` has a
//! block coordinate-wise Lipschitz gradient and `psi` is twice differentiable,
//! possibly nonseparable and nonconvex.
//!
//! Two solvers are provided:
//!
//! * [`Algorithm::Cpg`] — a coordinate *proximal* gradient method. Each step
//!   takes a block of the gradient of `f` and solves a prox subproblem of
//!   `psi` restricted to that block.
//! * [`Algorithm::Cgd`] — a coordinate *gradient* method on the full
//!   objective. Each step moves along a block of `grad F` with a stepsize
//!   `H_F` chosen by one of four rules ([`RuleKind`]); three of them are
//!   adaptive and require the positive root of a small polynomial.
//!
//! Both methods guarantee per-step descent
//! `F(x_{k+1}) <= F(x_k) - (eta/2) * ||d_k||^2`, which the driver can verify
//! at runtime (see [`AssertLevel`]).
//!
//! The crate is `no_std`-compatible (with `alloc`): disable the default `std`
//! feature and enable `libm` instead. IO, file formats and the benchmark CLI
//! live in the companion crate `ccd-bench`.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("ccd-core needs either the `std` or the `libm` feature");

pub(crate) mod math;

pub mod cgd;
pub mod cpg;
pub mod diagnostics;
pub mod driver;
pub mod linalg;
pub mod models;
pub mod partition;
pub mod problem;
pub mod rng;
pub mod rootfind;
pub mod select;
pub mod trace;

pub use cgd::{CgdStepReport, RuleKind, RuleParams, StepsizeRule};
pub use cpg::{cpg_stepsize, cubic_newton_block_prox, CpgStepReport};
pub use diagnostics::{sublinear_fit, RateDiagnostics, SublinearFit};
pub use driver::{run, Algorithm, AssertLevel, Clock, RunOutcome, SolverConfig, SolverError};
pub use partition::{BlockPartition, BlockRef, PartitionError};
pub use problem::{CompositeProblem, PsiConstants, PsiFlags, PsiOracle, SmoothOracle};
pub use rootfind::{positive_root, quartic_positive_root, RootError, RootResult};
pub use select::SelectionPolicy;
pub use trace::{RunTrace, Termination, TraceRecord};

#[cfg(feature = "std")]
pub use driver::{run_std, StdClock};
