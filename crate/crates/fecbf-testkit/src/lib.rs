//! Independent oracles and generators for the fecbf test suites.
//!
//! Everything here re-derives results through a different algorithm and a
//! different formulation than the production crate, so agreement between the
//! two is meaningful:
//!
//! - [`lp_oracle`]: a from-scratch two-phase standard-form simplex deciding
//!   compatibility of `{u : C u ≤ b}` through the dual/negated system
//!   `min qᵀb  s.t.  Cᵀq = 0, Σq = 1, q ≥ 0`.
//! - [`kkt_oracle`]: brute-force active-subset enumeration for small QPs.
//! - [`rank`]: SVD-based numerical rank.
//! - [`gen`]: seeded random problems, fleets, and verified sign-consistent
//!   configurations.

pub mod gen;
pub mod kkt_oracle;
pub mod lp_oracle;
pub mod rank;

pub use kkt_oracle::{enumerate_qp, OracleStatus};
pub use lp_oracle::oracle_compatible;
pub use rank::numerical_rank;
