//! Expectation-maximization over the pattern-coupled prior.
//!
//! Each outer iteration computes the prior precisions `η` from `α`, runs an
//! E-step (GAMP here, the exact Gaussian posterior in [`crate::oracle`]), and
//! then refreshes `α` with the closed-form rule `α_n = (a−1)/(½ω_n + b)` and
//! the noise precision with `γ = (M+2c−2)/(2d + Σ_m⟨(y_m−z_m)²⟩)`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coupling::NeighborGraph;
use crate::error::{check_len, check_nonneg, check_positive, Error, Result};
use crate::gamp::{gamp_run_from, GampOptions, GampResult, GampStatus, TraceRow};
use crate::linop::SensingOperator;

/// Upper bound on every `α_n`; coefficients at the cap are effectively pruned.
pub const ALPHA_CAP: f64 = 1e10;

/// Damping factors tried, in order, when an inner GAMP call diverges.
pub const DAMPING_RETRIES: [f64; 2] = [0.5, 0.25];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OuterOptions {
    /// Relative change `‖x̂⁽ᵗ⁺¹⁾ − x̂⁽ᵗ⁾‖ / ‖x̂⁽ᵗ⁾‖` below which iteration stops.
    pub tol: f64,
    pub t_max: usize,
}

impl Default for OuterOptions {
    fn default() -> Self {
        OuterOptions { tol: 1e-6, t_max: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub beta: f64,
    pub alpha_init: f64,
    /// Initial noise precision; `None` means `100 / var(y)`.
    pub gamma_init: Option<f64>,
    /// Known-noise mode: freeze `γ` at this value.
    pub gamma_fixed: Option<f64>,
    pub alpha_cap: f64,
    pub inner: GampOptions,
    pub outer: OuterOptions,
    /// Start each inner GAMP call from the previous posterior mean.
    pub warm_start: bool,
    /// Per-outer-iteration CSV; the inner GAMP trace goes next to it.
    pub trace_path: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            a: 1.5,
            b: 1e-6,
            c: 1.0,
            d: 1e-6,
            beta: 1.0,
            alpha_init: 1.0,
            gamma_init: None,
            gamma_fixed: None,
            alpha_cap: ALPHA_CAP,
            inner: GampOptions::default(),
            outer: OuterOptions::default(),
            warm_start: true,
            trace_path: None,
        }
    }
}

impl SolverConfig {
    /// Conventional (uncoupled) sparse Bayesian learning: `β = 0`.
    pub fn uncoupled(mut self) -> Self {
        self.beta = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.a > 1.0) {
            return bad(format!("a must exceed 1, got {}", self.a));
        }
        if !(self.b > 0.0 && self.c > 0.0 && self.d > 0.0) {
            return bad("b, c and d must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !(self.alpha_init > 0.0 && self.alpha_cap >= self.alpha_init) {
            return bad("alpha_init must be positive and not above alpha_cap".into());
        }
        for g in [self.gamma_init, self.gamma_fixed].into_iter().flatten() {
            if !(g > 0.0 && g.is_finite()) {
                return bad(format!("gamma must be positive and finite, got {g}"));
            }
        }
        if !(self.outer.tol >= 0.0) || self.outer.t_max == 0 {
            return bad("outer tol must be >= 0 and t_max >= 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperState {
    pub alpha: Vec<f64>,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterTraceRow {
    pub t: usize,
    /// `‖x̂⁽ᵗ⁺¹⁾ − x̂⁽ᵗ⁾‖²`.
    pub change_sq: f64,
    pub relative_change: f64,
    pub gamma: f64,
    pub inner_iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub x_hat: Vec<f64>,
    pub phi_hat: Vec<f64>,
    pub hyper: HyperState,
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    /// Smallest posterior/message variance seen across all E-steps.
    pub min_variance: f64,
    /// Inner calls that needed a damped retry.
    pub damping_retries: usize,
    pub trace: Vec<OuterTraceRow>,
}

/// `⟨x_n²⟩ = μ_n² + φ_n` under the GAMP approximate posterior built from `r̂, τʳ`.
pub fn second_moment(r_hat: &[f64], tau_r: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    check_len("tau_r", r_hat.len(), tau_r.len())?;
    check_len("eta", r_hat.len(), eta.len())?;
    check_positive("tau_r", tau_r)?;
    check_nonneg("eta", eta)?;
    Ok(r_hat
        .iter()
        .zip(tau_r)
        .zip(eta)
        .map(|((r, t), e)| {
            let denom = 1.0 + e * t;
            (r / denom).powi(2) + t / denom
        })
        .collect())
}

/// `α_n = (a−1)/(½ω_n + b)`, capped at `alpha_cap`.
pub fn update_alpha(omega: &[f64], a: f64, b: f64, alpha_cap: f64) -> Result<Vec<f64>> {
    if !(a > 1.0) {
        return Err(Error::InvalidArgument(format!("a must exceed 1, got {a}")));
    }
    if !(b >= 0.0) {
        return Err(Error::InvalidArgument(format!("b must be non-negative, got {b}")));
    }
    check_nonneg("omega", omega)?;
    Ok(omega
        .iter()
        .map(|w| ((a - 1.0) / (0.5 * w + b)).min(alpha_cap))
        .collect())
}

/// `γ = (M+2c−2)/(2d + Σ_m ((y_m−μᶻ_m)² + φᶻ_m))`.
pub fn update_gamma(y: &[f64], mu_z: &[f64], phi_z: &[f64], c: f64, d: f64) -> Result<f64> {
    check_len("mu_z", y.len(), mu_z.len())?;
    check_len("phi_z", y.len(), phi_z.len())?;
    check_nonneg("phi_z", phi_z)?;
    let moment: f64 = y
        .iter()
        .zip(mu_z)
        .zip(phi_z)
        .map(|((y, m), p)| (y - m).powi(2) + p)
        .sum();
    gamma_from_residual_moment(y.len(), moment, c, d)
}

/// The γ M-step given `Σ_m⟨(y_m−z_m)²⟩`; shared by the GAMP and exact E-steps.
pub fn gamma_from_residual_moment(m: usize, moment: f64, c: f64, d: f64) -> Result<f64> {
    let num = m as f64 + 2.0 * c - 2.0;
    let den = 2.0 * d + moment;
    let gamma = num / den;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "gamma update is not positive and finite ({num} / {den})"
        )));
    }
    Ok(gamma)
}

/// The α M-step from posterior second moments; shared by the GAMP and exact
/// E-steps.
pub fn alpha_from_moments(
    graph: &NeighborGraph,
    m2: &[f64],
    beta: f64,
    a: f64,
    b: f64,
    alpha_cap: f64,
) -> Result<Vec<f64>> {
    let omega = graph.omega_from_moments(m2, beta)?;
    update_alpha(&omega, a, b, alpha_cap)
}

/// The α-dependent part of the Q-function,
/// `Σ_n (a−1)log α_n − bα_n + ½log η_n − ½η_n⟨x_n²⟩`.
pub fn q_alpha_eval(
    alpha: &[f64],
    m2: &[f64],
    graph: &NeighborGraph,
    beta: f64,
    a: f64,
    b: f64,
) -> Result<f64> {
    check_len("m2", alpha.len(), m2.len())?;
    let eta = graph.eta_from_alpha(alpha, beta)?;
    Ok(alpha
        .iter()
        .zip(&eta)
        .zip(m2)
        .map(|((al, e), x2)| (a - 1.0) * al.ln() - b * al + 0.5 * e.ln() - 0.5 * e * x2)
        .sum())
}

/// Gradient of [`q_alpha_eval`]: `(a−1)/α_n − b + ½ν_n − ½ω_n` with
/// `ν_n = 1/η_n + β Σ_{i∈N(n)} 1/η_i`.
pub fn q_alpha_gradient(
    alpha: &[f64],
    m2: &[f64],
    graph: &NeighborGraph,
    beta: f64,
    a: f64,
    b: f64,
) -> Result<Vec<f64>> {
    check_len("m2", alpha.len(), m2.len())?;
    let eta = graph.eta_from_alpha(alpha, beta)?;
    let inv_eta: Vec<f64> = eta.iter().map(|e| 1.0 / e).collect();
    let nu = graph.omega_from_moments(&inv_eta, beta)?;
    let omega = graph.omega_from_moments(m2, beta)?;
    Ok((0..alpha.len())
        .map(|n| (a - 1.0) / alpha[n] - b + 0.5 * nu[n] - 0.5 * omega[n])
        .collect())
}

/// Sample variance of the measurements (denominator `M − 1`, or `M` when `M = 1`).
pub(crate) fn sample_variance(y: &[f64]) -> f64 {
    let m = y.len() as f64;
    let mean = y.iter().sum::<f64>() / m;
    let ss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    ss / (m - 1.0).max(1.0)
}

/// What an E-step hands back to the shared M-step loop.
pub(crate) struct EStep {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub m2: Vec<f64>,
    /// `Σ_m⟨(y_m − z_m)²⟩`.
    pub residual_moment: f64,
    pub inner_iterations: usize,
    pub min_variance: f64,
    pub retried: bool,
}

/// Shared outer EM loop. `estep(eta, gamma, warm_mean, t)` computes the
/// posterior summary for the current hyperparameters.
pub(crate) fn run_outer<F>(
    y: &[f64],
    graph: &NeighborGraph,
    cfg: &SolverConfig,
    mut estep: F,
) -> Result<RecoveryReport>
where
    F: FnMut(&[f64], f64, &[f64], usize) -> Result<EStep>,
{
    cfg.validate()?;
    let started = Instant::now();
    let n = graph.len();
    let m = y.len();

    let hyper = |alpha: Vec<f64>, gamma: f64| HyperState {
        alpha,
        gamma,
        a: cfg.a,
        b: cfg.b,
        c: cfg.c,
        d: cfg.d,
        beta: cfg.beta,
    };

    let var_y = sample_variance(y);
    let mut gamma = match (cfg.gamma_fixed, cfg.gamma_init) {
        (Some(g), _) | (None, Some(g)) => g,
        (None, None) if var_y > 0.0 => 100.0 / var_y,
        (None, None) => 100.0,
    };

    // No evidence at all: the posterior mean is zero for every α and the
    // M-step drives each α to the cap.
    if y.iter().all(|v| *v == 0.0) {
        return Ok(RecoveryReport {
            x_hat: vec![0.0; n],
            phi_hat: vec![1.0 / cfg.alpha_cap; n],
            hyper: hyper(vec![cfg.alpha_cap; n], gamma),
            outer_iterations: 0,
            inner_iterations_total: 0,
            converged: true,
            wall_time_s: started.elapsed().as_secs_f64(),
            min_variance: 1.0 / cfg.alpha_cap,
            damping_retries: 0,
            trace: Vec::new(),
        });
    }

    let mut alpha = vec![cfg.alpha_init; n];
    let mut x_prev = vec![0.0; n];
    let mut phi = vec![0.0; n];
    let mut trace = Vec::new();
    let mut inner_total = 0;
    let mut min_variance = f64::INFINITY;
    let mut retries = 0;
    let mut converged = false;

    for t in 0..cfg.outer.t_max {
        let eta = graph.eta_from_alpha(&alpha, cfg.beta)?;
        let e = estep(&eta, gamma, &x_prev, t)?;
        check_len("E-step mean", n, e.mean.len())?;
        inner_total += e.inner_iterations;
        min_variance = min_variance.min(e.min_variance);
        retries += usize::from(e.retried);

        alpha = alpha_from_moments(graph, &e.m2, cfg.beta, cfg.a, cfg.b, cfg.alpha_cap)?;
        if cfg.gamma_fixed.is_none() {
            gamma = gamma_from_residual_moment(m, e.residual_moment, cfg.c, cfg.d)?;
        }

        let change_sq: f64 = e.mean.iter().zip(&x_prev).map(|(a, b)| (a - b).powi(2)).sum();
        let prev_norm = x_prev.iter().map(|v| v * v).sum::<f64>().sqrt();
        let relative_change = if prev_norm > 0.0 {
            change_sq.sqrt() / prev_norm
        } else if change_sq == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        trace.push(OuterTraceRow {
            t,
            change_sq,
            relative_change,
            gamma,
            inner_iterations: e.inner_iterations,
        });
        x_prev = e.mean;
        phi = e.variance;
        if relative_change <= cfg.outer.tol {
            converged = true;
            break;
        }
    }

    Ok(RecoveryReport {
        x_hat: x_prev,
        phi_hat: phi,
        hyper: hyper(alpha, gamma),
        outer_iterations: trace.len(),
        inner_iterations_total: inner_total,
        converged,
        wall_time_s: started.elapsed().as_secs_f64(),
        min_variance,
        damping_retries: retries,
        trace,
    })
}

fn check_problem(op: &SensingOperator, y: &[f64], graph: &NeighborGraph) -> Result<()> {
    check_len("measurements", op.m(), y.len())?;
    check_len("neighbor graph", op.n(), graph.len())?;
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("measurement {i} is not finite")));
    }
    Ok(())
}

/// Runs GAMP, retrying with smaller damping factors if it diverges.
fn gamp_with_retries(
    op: &SensingOperator,
    y: &[f64],
    eta: &[f64],
    gamma: f64,
    opts: &GampOptions,
    init: Option<&[f64]>,
    outer: usize,
) -> Result<(GampResult, bool)> {
    let first = gamp_run_from(op, y, eta, gamma, opts, init)?;
    if first.status != GampStatus::Diverged {
        return Ok((first, false));
    }
    let mut damping = opts.damping;
    for rho in DAMPING_RETRIES.into_iter().filter(|r| *r < opts.damping) {
        damping = rho;
        let retry_opts = GampOptions {
            damping: rho,
            ..opts.clone()
        };
        let res = gamp_run_from(op, y, eta, gamma, &retry_opts, init)?;
        if res.status != GampStatus::Diverged {
            return Ok((res, true));
        }
    }
    Err(Error::Diverged { outer, damping })
}

/// Pattern-coupled sparse Bayesian learning with GAMP as the E-step.
pub fn pcsbl_gamp_solve(
    op: &SensingOperator,
    y: &[f64],
    graph: &NeighborGraph,
    cfg: &SolverConfig,
) -> Result<RecoveryReport> {
    check_problem(op, y, graph)?;
    let mut inner_opts = cfg.inner.clone();
    inner_opts.trace |= cfg.trace_path.is_some();
    let mut inner_trace: Vec<(usize, TraceRow)> = Vec::new();

    let report = run_outer(y, graph, cfg, |eta, gamma, warm, t| {
        let init = cfg.warm_start.then_some(warm);
        let (res, retried) = gamp_with_retries(op, y, eta, gamma, &inner_opts, init, t)?;
        let st = &res.state;
        let m2 = second_moment(&st.r_hat, &st.tau_r, eta)?;
        let residual_moment = y
            .iter()
            .zip(&res.mu_z)
            .zip(&res.phi_z)
            .map(|((y, m), p)| (y - m).powi(2) + p)
            .sum();
        inner_trace.extend(res.trace.iter().map(|r| (t, *r)));
        Ok(EStep {
            mean: st.mu_x.clone(),
            variance: st.phi_x.clone(),
            m2,
            residual_moment,
            inner_iterations: res.iterations,
            min_variance: res.min_variance,
            retried,
        })
    })?;

    if let Some(path) = &cfg.trace_path {
        write_outer_trace(path, &report.trace)?;
        write_inner_trace(&inner_trace_path(path), &inner_trace)?;
    }
    Ok(report)
}

/// `trace.csv` → `trace.gamp.csv`.
pub fn inner_trace_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    path.with_file_name(format!("{stem}.gamp.csv"))
}

pub(crate) fn write_outer_trace(path: &Path, rows: &[OuterTraceRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,change_sq,relative_change,gamma,inner_iterations")?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{}",
            r.t, r.change_sq, r.relative_change, r.gamma, r.inner_iterations
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_inner_trace(path: &Path, rows: &[(usize, TraceRow)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,k,mean_change,residual_norm")?;
    for (t, r) in rows {
        writeln!(w, "{},{},{:e},{:e}", t, r.k, r.mean_change, r.residual_norm)?;
    }
    w.flush()?;
    Ok(())
}
