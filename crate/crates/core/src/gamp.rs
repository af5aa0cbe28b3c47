//! Generalized approximate message passing for a zero-mean Gaussian prior with
//! per-coefficient precision `η` and an additive white Gaussian noise channel
//! with precision `γ`.
//!
//! Both scalar estimation functions are closed-form Gaussian shrinkages, so one
//! iteration costs four operator applications.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_positive, Error, Result};
use crate::linop::SensingOperator;

/// Lower bound applied to `τᵖ` and to the `τʳ` denominator.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Input estimation function: posterior mean and variance of `x_n` under the
/// prior `N(0, 1/η)` and the pseudo-observation `N(r̂, τʳ)`.
pub fn g_in(r_hat: f64, tau_r: f64, eta: f64) -> Result<(f64, f64)> {
    if !(tau_r > 0.0) {
        return Err(Error::InvalidArgument(format!("tau_r must be positive, got {tau_r}")));
    }
    let denom = 1.0 + eta * tau_r;
    Ok((r_hat / denom, tau_r / denom))
}

/// Output estimation function: returns `(ŝ, τˢ)` where `ŝ = (μᶻ − p̂)/τᵖ` and
/// `τˢ = −∂ŝ/∂p̂`.
pub fn g_out(p_hat: f64, tau_p: f64, y: f64, gamma: f64) -> Result<(f64, f64)> {
    check_out_args(tau_p, gamma)?;
    let denom = 1.0 + gamma * tau_p;
    Ok((gamma * (y - p_hat) / denom, gamma / denom))
}

/// Posterior mean and variance of the noiseless output `z_m`.
pub fn output_posterior(p_hat: f64, tau_p: f64, y: f64, gamma: f64) -> Result<(f64, f64)> {
    check_out_args(tau_p, gamma)?;
    let denom = 1.0 + gamma * tau_p;
    Ok(((tau_p * gamma * y + p_hat) / denom, tau_p / denom))
}

fn check_out_args(tau_p: f64, gamma: f64) -> Result<()> {
    if !(tau_p > 0.0) {
        return Err(Error::InvalidArgument(format!("tau_p must be positive, got {tau_p}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GampOptions {
    /// Stopping tolerance on `Σ_n |Δμˣ_n|²`; `None` means `1e-8 · n`.
    pub epsilon: Option<f64>,
    pub k_max: usize,
    /// Damping factor `ρ ∈ (0, 1]` for `ŝ` and `μˣ`; 1 disables damping.
    pub damping: f64,
    /// Record one [`TraceRow`] per iteration.
    pub trace: bool,
}

impl Default for GampOptions {
    fn default() -> Self {
        GampOptions {
            epsilon: None,
            k_max: 200,
            damping: 1.0,
            trace: false,
        }
    }
}

impl GampOptions {
    pub fn epsilon_for(&self, n: usize) -> f64 {
        self.epsilon.unwrap_or(1e-8 * n as f64)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GampState {
    pub mu_x: Vec<f64>,
    pub phi_x: Vec<f64>,
    pub r_hat: Vec<f64>,
    pub tau_r: Vec<f64>,
    pub z_hat: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub tau_p: Vec<f64>,
    pub s_hat: Vec<f64>,
    pub tau_s: Vec<f64>,
    /// Completed iterations.
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GampStatus {
    Converged,
    MaxIterations,
    /// A non-finite value appeared, or the residual `‖y − Aμˣ‖` grew far past
    /// `‖y‖`, which bounds it at the exact posterior mean. The returned state
    /// is the last one that passed both checks.
    Diverged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub mean_change: f64,
    pub residual_norm: f64,
}

#[derive(Clone, Debug)]
pub struct GampResult {
    pub state: GampState,
    pub status: GampStatus,
    pub iterations: usize,
    /// `Σ_n |Δμˣ_n|²` of the last completed iteration.
    pub last_change: f64,
    pub mu_z: Vec<f64>,
    pub phi_z: Vec<f64>,
    /// Smallest value taken by any of `φˣ, τʳ, τᵖ, τˢ` over the run.
    pub min_variance: f64,
    pub trace: Vec<TraceRow>,
}

impl GampResult {
    pub fn converged(&self) -> bool {
        self.status == GampStatus::Converged
    }
}

const RUNAWAY_FACTOR: f64 = 10.0;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(y: &[f64], z: &[f64]) -> Vec<f64> {
    y.iter().zip(z).map(|(a, b)| a - b).collect()
}

/// Runs GAMP from the prior: `μˣ(0) = 0`, `φˣ(0) = 1/η`, `ŝ(−1) = 0`.
pub fn gamp_run(
    op: &SensingOperator,
    y: &[f64],
    eta: &[f64],
    gamma: f64,
    opts: &GampOptions,
) -> Result<GampResult> {
    gamp_run_from(op, y, eta, gamma, opts, None)
}

/// As [`gamp_run`], optionally starting the mean from `mu_init` (the variance
/// always starts at the prior variance `1/η`).
pub fn gamp_run_from(
    op: &SensingOperator,
    y: &[f64],
    eta: &[f64],
    gamma: f64,
    opts: &GampOptions,
    mu_init: Option<&[f64]>,
) -> Result<GampResult> {
    let (m, n) = (op.m(), op.n());
    check_len("measurements", m, y.len())?;
    check_len("eta", n, eta.len())?;
    check_positive("eta", eta)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive and finite, got {gamma}")));
    }
    let epsilon = opts.epsilon_for(n);
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if opts.k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let rho = opts.damping;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("damping must lie in (0, 1], got {rho}")));
    }

    let mu_x = match mu_init {
        Some(init) => {
            check_len("initial mean", n, init.len())?;
            init.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut st = GampState {
        mu_x,
        phi_x: eta.iter().map(|e| 1.0 / e).collect(),
        s_hat: vec![0.0; m],
        ..GampState::default()
    };

    // The exact posterior mean beats μ = 0 on γ‖y − Aμ‖² + μᵀDμ, so its
    // residual is at most ‖y‖. A residual far beyond that (or beyond the warm
    // start's) is a runaway oscillation, not slow convergence.
    let runaway = RUNAWAY_FACTOR * norm(y).max(norm(&residual(y, &op.apply(&st.mu_x)?)));
    let mut previous: Option<GampState> = None;

    let mut status = GampStatus::MaxIterations;
    let mut last_change = f64::INFINITY;
    let mut min_variance = st.phi_x.iter().copied().fold(f64::INFINITY, f64::min);
    let mut trace = Vec::new();

    for k in 0..opts.k_max {
        // Step 1
        let (z_hat, mut tau_p) = op.apply_with_sq(&st.mu_x, &st.phi_x)?;
        let r_norm = norm(&residual(y, &z_hat));
        if !(r_norm <= runaway) {
            if let Some(prev) = previous.take() {
                st = prev;
            }
            status = GampStatus::Diverged;
            break;
        }
        tau_p.iter_mut().for_each(|t| *t = t.max(VARIANCE_FLOOR));
        let p_hat: Vec<f64> = z_hat
            .iter()
            .zip(&tau_p)
            .zip(&st.s_hat)
            .map(|((z, t), s)| z - t * s)
            .collect();

        // Step 2
        let mut s_hat = Vec::with_capacity(m);
        let mut tau_s = Vec::with_capacity(m);
        for i in 0..m {
            let (s, t) = g_out(p_hat[i], tau_p[i], y[i], gamma)?;
            s_hat.push(rho * s + (1.0 - rho) * st.s_hat[i]);
            tau_s.push(t);
        }

        // Step 3
        let (back, tau_r) = op.apply_adjoint_with_sq(&s_hat, &tau_s)?;
        let tau_r: Vec<f64> = tau_r.into_iter().map(|v| 1.0 / v.max(VARIANCE_FLOOR)).collect();
        let r_hat: Vec<f64> = st
            .mu_x
            .iter()
            .zip(&tau_r)
            .zip(&back)
            .map(|((mu, t), b)| mu + t * b)
            .collect();

        // Step 4
        let mut mu_x = Vec::with_capacity(n);
        let mut phi_x = Vec::with_capacity(n);
        for j in 0..n {
            let (mu, phi) = g_in(r_hat[j], tau_r[j], eta[j])?;
            mu_x.push(rho * mu + (1.0 - rho) * st.mu_x[j]);
            phi_x.push(phi);
        }

        let change: f64 = mu_x.iter().zip(&st.mu_x).map(|(a, b)| (a - b).powi(2)).sum();
        let finite = change.is_finite()
            && [&p_hat, &s_hat, &tau_s, &r_hat, &tau_r, &mu_x, &phi_x]
                .iter()
                .all(|v| v.iter().all(|x| x.is_finite()));
        if !finite {
            status = GampStatus::Diverged;
            break;
        }
        for v in [&tau_p, &tau_s, &tau_r, &phi_x] {
            min_variance = v.iter().copied().fold(min_variance, f64::min);
        }

        if opts.trace {
            trace.push(TraceRow {
                k,
                mean_change: change,
                residual_norm: r_norm,
            });
        }

        let next = GampState {
            mu_x,
            phi_x,
            r_hat,
            tau_r,
            z_hat,
            p_hat,
            tau_p,
            s_hat,
            tau_s,
            k: k + 1,
        };
        previous = Some(std::mem::replace(&mut st, next));
        last_change = change;
        if change <= epsilon {
            status = GampStatus::Converged;
            break;
        }
    }

    let (mu_z, phi_z) = if st.k == 0 {
        // Diverged on the very first iteration: no output messages exist yet.
        (vec![0.0; m], vec![0.0; m])
    } else {
        let mut mu_z = Vec::with_capacity(m);
        let mut phi_z = Vec::with_capacity(m);
        for i in 0..m {
            let (mz, pz) = output_posterior(st.p_hat[i], st.tau_p[i], y[i], gamma)?;
            mu_z.push(mz);
            phi_z.push(pz);
        }
        (mu_z, phi_z)
    };

    Ok(GampResult {
        iterations: st.k,
        state: st,
        status,
        last_change,
        mu_z,
        phi_z,
        min_variance,
        trace,
    })
}

/// Writes trace rows as CSV with header `k,mean_change,residual_norm`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut w: W) -> Result<()> {
    writeln!(w, "k,mean_change,residual_norm")?;
    for r in rows {
        writeln!(w, "{},{:e},{:e}", r.k, r.mean_change, r.residual_norm)?;
    }
    Ok(())
}
