//! Interval-valued multiple linear regression.
//!
//! Intervals are handled in midpoint/spread coordinates ([`interval`]). A
//! sample is turned into centered real design blocks ([`design`]), and the
//! coefficients are estimated by
//!
//! - constrained least squares ([`ls`]), where the spread block is a convex
//!   QP solved through its linear complementarity problem with Lemke
//!   pivoting ([`lcp`]);
//! - Lasso with cross-validated penalties per block ([`lasso`]);
//! - the Lasso-IR estimator with an L1 budget on spread-minus-mid
//!   coefficients ([`lasso_ir`]), kept for comparison.
//!
//! [`oracle`] holds brute-force reference solvers and a data simulator;
//! [`cli`] has CSV ingestion and report rendering used by the `ivreg` binary.

pub mod cli;
pub mod design;
pub mod error;
pub mod interval;
pub mod lasso;
pub mod lasso_ir;
pub mod lcp;
pub mod ls;
pub mod oracle;

pub use design::{build_design, predict, Coefficients, DesignSystem, Variant};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalSample, Tau};
pub use ls::{fit_ls, FitResult, Method, MseConvention};
