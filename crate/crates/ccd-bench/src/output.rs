//! CSV and JSON emission. Floats are written with 17 significant digits so
//! reading them back reproduces the exact doubles.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use ccd_core::RunTrace;

use crate::experiment::{RunOutput, SummaryRow};

/// Round-trip-exact float formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub const TRACE_HEADER: &str = "k,block,F,grad_norm,grad_fresh,d_norm,alpha,H,eta,x_norm,psi_value,t";

/// Columns of a run trace, one row per recorded iteration. `alpha` is empty
/// for steps without an adaptive root; `t` is wall seconds (excluded from
/// determinism comparisons).
pub fn write_trace_csv(path: &Path, trace: &RunTrace) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.block,
            fmt_f64(r.f_value),
            fmt_f64(r.grad_norm),
            u8::from(r.grad_fresh),
            fmt_f64(r.d_norm),
            r.alpha.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.h_denom),
            fmt_f64(r.eta),
            fmt_f64(r.x_norm),
            fmt_f64(r.psi_value),
            fmt_f64(r.elapsed),
        )?;
    }
    writeln!(w, "# termination,{}", trace.termination.as_str())?;
    w.flush()?;
    Ok(())
}

pub fn write_trace_json(path: &Path, trace: &RunTrace) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), trace)?;
    Ok(())
}

pub const SUMMARY_HEADER: &str =
    "variant,seed,full_iterations,wall_seconds,final_F,final_grad_norm,termination";

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.variant,
            r.seed,
            r.full_iterations,
            fmt_f64(r.wall_seconds),
            fmt_f64(r.final_f),
            fmt_f64(r.final_grad_norm),
            r.termination,
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format data for external plotting: one `(k, variant, seed, metric,
/// value)` row per metric per recorded iteration. Metrics include wall time
/// (`t`) so time-axis figures need no joins; eigenvalue runs add
/// `lambda_est` and `eig_residual`, factorization runs add `orth_error`.
pub fn write_plotdata_csv(
    path: &Path,
    outputs: &[RunOutput],
    model_kind: &str,
    m_reg: Option<f64>,
    lambda: Option<f64>,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "k,variant,seed,metric,value")?;
    for out in outputs {
        let name = out.variant.name();
        for r in &out.trace.records {
            let mut emit = |metric: &str, value: f64| -> std::io::Result<()> {
                writeln!(w, "{},{},{},{},{}", r.k, name, out.seed, metric, fmt_f64(value))
            };
            emit("F", r.f_value)?;
            emit("grad_norm", r.grad_norm)?;
            emit("t", r.elapsed)?;
            match model_kind {
                "eigen" => {
                    if let Some(m) = m_reg {
                        // At b = 0: lambda = -(M/2)||x|| and
                        // ||A x - lambda x|| = ||grad F(x)||.
                        emit("lambda_est", -0.5 * m * r.x_norm)?;
                        emit("eig_residual", r.grad_norm)?;
                    }
                }
                "mf" => {
                    if let Some(l) = lambda {
                        if l > 0.0 {
                            emit("orth_error", (2.0 * r.psi_value / l).max(0.0).sqrt())?;
                        }
                    }
                }
                _ => {}
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Strip the wall-time column from a trace CSV (for determinism
/// comparisons).
pub fn trace_without_time(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        if line.starts_with('#') {
            out.push_str(line);
        } else {
            match line.rfind(',') {
                Some(pos) => out.push_str(&line[..pos]),
                None => out.push_str(line),
            }
        }
        out.push('\n');
    }
    out
}
