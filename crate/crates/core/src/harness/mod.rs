//! Empirical verification: sign-expectation gaps between the generator and
//! the Gaussian, anti-concentration and tail checks, the derivative-moment
//! identity, the one-dimensional smoothness check, and a JSON-driven experiment runner.

mod checks;
mod experiment;
mod gap;
mod prop4;
mod source;

pub use checks::{
    check_carbery_wright, check_derivative_identity, check_tail_bound, CwRow, DerivRow, NamedPoly,
    TailRow,
};
pub use experiment::*;
pub use gap::{estimate_gap, estimate_gaps, sign_sums, Baseline, GapEstimate, Z95};
pub use prop4::{
    check_prop4_1d, fit_shell, one_dim_expectation, ExactPoint, Prop4Report, ShellFit,
};
pub use source::{GaussianSource, HybridSource, PointSource, PrgSource};
