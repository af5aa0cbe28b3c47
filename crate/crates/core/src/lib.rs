//! Pattern-coupled sparse Bayesian learning for block-sparse signals.
//!
//! The crate recovers 1-D or 2-D block-sparse signals `x` from `y = A x + w`
//! without knowing where the blocks are. Each coefficient's prior precision
//! mixes its own hyperparameter with those of its grid neighbors, and the
//! hyperparameters are learned by EM. The E-step is carried out by GAMP
//! ([`pcsbl::pcsbl_gamp_solve`], `O(MN)` per iteration) or exactly via a
//! matrix inverse ([`oracle::pcsbl_em_solve`], `O(N³)`).
//!
//! ```
//! use pcsbl::{coupling::NeighborGraph, linop::make_gaussian_dense, pcsbl::*};
//!
//! let op = make_gaussian_dense(30, 50, 7, true);
//! let mut x = vec![0.0; 50];
//! x[20..24].copy_from_slice(&[0.5, -0.5, 0.5, 0.5]);
//! let y = op.apply(&x).unwrap();
//! let cfg = SolverConfig { gamma_fixed: Some(1e8), ..SolverConfig::default() };
//! let report = pcsbl_gamp_solve(&op, &y, &NeighborGraph::chain(50), &cfg).unwrap();
//! assert_eq!(report.x_hat.len(), 50);
//! ```

pub mod coupling;
pub mod error;
pub mod gamp;
pub mod linop;
pub mod oracle;
pub mod pcsbl;

pub use coupling::{NeighborGraph, Topology};
pub use error::{Error, Result};
pub use gamp::{gamp_run, GampOptions, GampResult, GampStatus};
pub use linop::{make_gaussian_dense, make_hadamard_sensing, OperatorDescriptor, SensingOperator};
pub use oracle::{exact_posterior, pcsbl_em_solve, ExactPosterior};
pub use pcsbl::{pcsbl_gamp_solve, RecoveryReport, SolverConfig};
