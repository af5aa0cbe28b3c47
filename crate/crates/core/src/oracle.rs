//! Exact Gaussian posterior and the matrix-inverse EM solver.
//!
//! `Σ = (γAᵀA + D)⁻¹`, `μ = γΣAᵀy` with `D = diag(η)`, computed through a
//! Cholesky factorization. Cost is cubic in `n`; this exists as a reference for
//! the message-passing path and for runtime comparisons.

use nalgebra::{DMatrix, DVector};

use crate::coupling::NeighborGraph;
use crate::error::{check_len, check_positive, Error, Result};
use crate::linop::SensingOperator;
use crate::pcsbl::{run_outer, EStep, RecoveryReport, SolverConfig};

/// Largest signal length the oracle will materialize.
pub const MAX_DENSE_N: usize = 4096;

#[derive(Clone, Debug)]
pub struct ExactPosterior {
    pub mu: Vec<f64>,
    pub sigma: DMatrix<f64>,
}

/// Dense copy of a sensing problem with `AᵀA` and `Aᵀy` precomputed.
pub struct DenseProblem {
    a: DMatrix<f64>,
    gram: DMatrix<f64>,
    aty: DVector<f64>,
    y: DVector<f64>,
}

impl DenseProblem {
    pub fn new(op: &SensingOperator, y: &[f64]) -> Result<Self> {
        let (m, n) = (op.m(), op.n());
        if n > MAX_DENSE_N {
            return Err(Error::TooLarge {
                n,
                limit: MAX_DENSE_N,
            });
        }
        check_len("measurements", m, y.len())?;
        let a = DMatrix::from_row_slice(m, n, &op.to_dense());
        let y = DVector::from_column_slice(y);
        let gram = a.tr_mul(&a);
        let aty = a.tr_mul(&y);
        Ok(DenseProblem { a, gram, aty, y })
    }

    pub fn posterior(&self, eta: &[f64], gamma: f64) -> Result<ExactPosterior> {
        let n = self.gram.nrows();
        check_len("eta", n, eta.len())?;
        check_positive("eta", eta)?;
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        let mut h = &self.gram * gamma;
        for (i, e) in eta.iter().enumerate() {
            h[(i, i)] += e;
        }
        let chol = h.cholesky().ok_or(Error::Factorization)?;
        let mu = chol.solve(&(&self.aty * gamma));
        let sigma = chol.inverse();
        Ok(ExactPosterior {
            mu: mu.as_slice().to_vec(),
            sigma,
        })
    }

    /// `Σ_m E[(y_m − a_mᵀx)²] = ‖y − Aμ‖² + tr(AΣAᵀ)`.
    pub fn residual_moment(&self, post: &ExactPosterior) -> f64 {
        let mu = DVector::from_column_slice(&post.mu);
        let resid = &self.y - &self.a * mu;
        // tr(AΣAᵀ) = tr(ΣAᵀA) = Σ_ij Σ_ij G_ij for symmetric Σ, G.
        resid.norm_squared() + post.sigma.dot(&self.gram)
    }
}

pub fn exact_posterior(
    op: &SensingOperator,
    y: &[f64],
    eta: &[f64],
    gamma: f64,
) -> Result<ExactPosterior> {
    DenseProblem::new(op, y)?.posterior(eta, gamma)
}

/// The pattern-coupled EM solver with an exact E-step.
pub fn pcsbl_em_solve(
    op: &SensingOperator,
    y: &[f64],
    graph: &NeighborGraph,
    cfg: &SolverConfig,
) -> Result<RecoveryReport> {
    check_len("neighbor graph", op.n(), graph.len())?;
    let problem = DenseProblem::new(op, y)?;
    let report = run_outer(y, graph, cfg, |eta, gamma, _warm, _t| {
        let post = problem.posterior(eta, gamma)?;
        let variance: Vec<f64> = post.sigma.diagonal().iter().copied().collect();
        let m2 = post
            .mu
            .iter()
            .zip(&variance)
            .map(|(mu, v)| mu * mu + v)
            .collect();
        let residual_moment = problem.residual_moment(&post);
        let min_variance = variance.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(EStep {
            mean: post.mu,
            variance,
            m2,
            residual_moment,
            inner_iterations: 1,
            min_variance,
            retried: false,
        })
    })?;
    if let Some(path) = &cfg.trace_path {
        crate::pcsbl::write_outer_trace(path, &report.trace)?;
    }
    Ok(report)
}
