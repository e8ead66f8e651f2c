//! Centralized constraint-system assembly and internal-compatibility
//! analysis.
//!
//! Internal compatibility asks whether the stacked pairwise barrier
//! constraints admit any input at all, ignoring input bounds; it is the
//! necessary half of QP feasibility and the part that degrades fastest as
//! swarms densify. The check is an exact alternative: either a witness input
//! exists or a nonnegative combination of the rows proves emptiness.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cbf::{pairwise_coefficients, CbfError, SafetyParams};
use crate::kinematics::{UavLimits, UavState};
use crate::linalg::{dot, RowMat};
use crate::qp::{self, Phase1Outcome, QpError, QpProblem, QpStatus};

/// Stacked pairwise constraints in `C u ≤ b` form.
///
/// Each pairwise barrier condition `k_ijᵀ u_i + k_jiᵀ u_j + ξ ≥ 0` is negated
/// into the row `[−k_ijᵀ at block i, −k_jiᵀ at block j] · u ≤ ξ`, so one sign
/// convention serves both the barrier inequality and the ≤-form solver.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    /// `n(n−1)/2 × 3n` constraint matrix.
    pub c: RowMat,
    /// Right-hand side, one ξ per pair.
    pub b: Vec<f64>,
    /// Row → UAV pair map, lexicographic with `i < j` (0-based).
    pub pair_index: Vec<(usize, usize)>,
}

impl ConstraintSystem {
    pub fn n_uavs(&self) -> usize {
        self.c.ncols() / 3
    }
}

/// Verdict of the Farkas alternative for `{u : C u ≤ b}`.
///
/// Exactly one variant holds: a witness satisfying every row, or a
/// certificate `q ≥ 0`, `‖q‖₁ = 1`, `qᵀC ≈ 0`, `qᵀb < 0` proving emptiness.
#[derive(Clone, Debug)]
pub enum FarkasOutcome {
    Compatible { witness: Vec<f64> },
    Incompatible { certificate: Vec<f64> },
}

impl FarkasOutcome {
    pub fn is_compatible(&self) -> bool {
        matches!(self, FarkasOutcome::Compatible { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompatError {
    /// Fewer than two vehicles: no pairwise system exists.
    TooFewUavs,
    Cbf(CbfError),
    /// The LP/QP engine could not decide within its budget; never a silent
    /// misclassification.
    Undecided(QpError),
    /// Certificate or witness failed arithmetic re-verification.
    CheckFailed(&'static str),
}

impl fmt::Display for CompatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompatError::TooFewUavs => write!(f, "need at least two UAVs"),
            CompatError::Cbf(e) => write!(f, "barrier coefficients: {e}"),
            CompatError::Undecided(e) => write!(f, "undecided: {e}"),
            CompatError::CheckFailed(w) => write!(f, "self-check failed: {w}"),
        }
    }
}

impl From<CbfError> for CompatError {
    fn from(e: CbfError) -> Self {
        CompatError::Cbf(e)
    }
}

/// Stacks every pairwise barrier constraint into one `C u ≤ b` system.
pub fn build_centralized_system(
    states: &[UavState],
    limits: &[UavLimits],
    params: &SafetyParams,
) -> Result<ConstraintSystem, CompatError> {
    let n = states.len();
    if n < 2 || limits.len() != n {
        return Err(CompatError::TooFewUavs);
    }
    let mut c = RowMat::with_cols(3 * n);
    let mut b = Vec::with_capacity(n * (n - 1) / 2);
    let mut pair_index = Vec::with_capacity(n * (n - 1) / 2);
    let mut row = vec![0.0; 3 * n];
    for i in 0..n {
        for j in i + 1..n {
            let pc = pairwise_coefficients(&states[i], &states[j], &limits[i], &limits[j], params)?;
            row.fill(0.0);
            for k in 0..3 {
                row[3 * i + k] = -pc.k_ij[k];
                row[3 * j + k] = -pc.k_ji[k];
            }
            c.push_row(&row);
            b.push(pc.xi);
            pair_index.push((i, j));
        }
    }
    Ok(ConstraintSystem { c, b, pair_index })
}

/// Decides internal compatibility of `{u : C u ≤ b}` over unbounded `u`.
///
/// Certificates are re-verified arithmetically before being returned:
/// `q ≥ 0`, `‖qᵀC‖_∞ ≤ 1e−8 ‖q‖₁ ‖C‖_∞`, `qᵀb < −1e−8`. Witnesses must
/// satisfy every row within `1e−8` (relative to the row's rhs).
pub fn farkas_check(sys: &ConstraintSystem) -> Result<FarkasOutcome, CompatError> {
    let dim = sys.c.ncols();
    let lower = vec![f64::NEG_INFINITY; dim];
    let upper = vec![f64::INFINITY; dim];
    match qp::phase1_feasibility(&sys.c, &sys.b, &lower, &upper)
        .map_err(CompatError::Undecided)?
    {
        Phase1Outcome::Feasible { point } => {
            for (i, &bi) in sys.b.iter().enumerate() {
                if dot(sys.c.row(i), &point) - bi > 1e-8 * (1.0 + bi.abs()) {
                    return Err(CompatError::CheckFailed("witness violates a row"));
                }
            }
            Ok(FarkasOutcome::Compatible { witness: point })
        }
        Phase1Outcome::Infeasible { certificate, .. } => {
            let q = certificate;
            if q.iter().any(|&v| v < 0.0) {
                return Err(CompatError::CheckFailed("negative certificate entry"));
            }
            let q_l1: f64 = q.iter().sum();
            let qc = sys.c.tr_mul(&q);
            let qc_inf = crate::linalg::inf_norm(&qc);
            let c_inf = sys.c.max_abs();
            if qc_inf > 1e-8 * q_l1 * c_inf.max(1e-300) {
                return Err(CompatError::CheckFailed("qᵀC not numerically zero"));
            }
            if !(dot(&q, &sys.b) < -1e-8) {
                return Err(CompatError::CheckFailed("qᵀb not negative"));
            }
            Ok(FarkasOutcome::Incompatible { certificate: q })
        }
    }
}

/// Bounds on the left-nullspace dimension of `C` for `n` vehicles:
/// `max(0, n(n−7)/2) ≤ dim N(Cᵀ) ≤ n(n−1)/2`.
pub fn nullspace_dim_bounds(n: usize) -> (usize, usize) {
    let n = n as i64;
    let lower = (n * (n - 7) / 2).max(0) as usize;
    let upper = (n * (n - 1) / 2) as usize;
    (lower, upper)
}

/// Per-UAV and overall verdicts of the sign-consistency condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignConsistency {
    pub per_uav: Vec<bool>,
    pub overall: bool,
}

/// Tests the sufficient condition for compatibility: for each UAV `i`, every
/// column of its block submatrix `C_i` (the nonzero 3-blocks of the rows
/// involving `i`) must be entrywise strictly positive or strictly negative.
///
/// The stacked rows carry `−k` rather than `k`; a global row negation flips
/// whole columns of `C_i` and leaves the condition unchanged.
pub fn sign_consistency_holds(sys: &ConstraintSystem, n: usize) -> SignConsistency {
    const STRICT: f64 = 1e-12;
    let mut per_uav = Vec::with_capacity(n);
    for i in 0..n {
        let mut ok = true;
        'cols: for c in 0..3 {
            let mut pos = 0usize;
            let mut neg = 0usize;
            for (r, &(a, b)) in sys.pair_index.iter().enumerate() {
                if a != i && b != i {
                    continue;
                }
                let v = sys.c.get(r, 3 * i + c);
                if v > STRICT {
                    pos += 1;
                } else if v < -STRICT {
                    neg += 1;
                } else {
                    ok = false;
                    break 'cols;
                }
            }
            if pos != 0 && neg != 0 {
                ok = false;
                break;
            }
        }
        per_uav.push(ok);
    }
    let overall = per_uav.iter().all(|&b| b);
    SignConsistency { per_uav, overall }
}

/// Result of the centralized CBF-QP.
#[derive(Clone, Debug)]
pub enum CentralizedOutcome {
    /// Stacked optimal inputs, 3 entries per UAV.
    Solved(Vec<f64>),
    Infeasible,
}

/// Solves the centralized CBF-QP: minimize `‖u − u_nominal‖²` subject to the
/// stacked input boxes and `C u ≤ b`.
pub fn solve_centralized_qp(
    states: &[UavState],
    limits: &[UavLimits],
    params: &SafetyParams,
    u_nominal: &[f64],
) -> Result<CentralizedOutcome, CompatError> {
    let sys = build_centralized_system(states, limits, params)?;
    solve_centralized_system(&sys, limits, u_nominal)
}

/// Same as [`solve_centralized_qp`] for a pre-built system (lets callers
/// inject deliberately inconsistent rows in tests and diagnostics).
pub fn solve_centralized_system(
    sys: &ConstraintSystem,
    limits: &[UavLimits],
    u_nominal: &[f64],
) -> Result<CentralizedOutcome, CompatError> {
    let n = limits.len();
    let dim = 3 * n;
    if u_nominal.len() != dim || sys.c.ncols() != dim {
        return Err(CompatError::Undecided(QpError::Invalid("dimension mismatch")));
    }
    let mut lower = Vec::with_capacity(dim);
    let mut upper = Vec::with_capacity(dim);
    for l in limits {
        let (lo, hi) = l.input_bounds();
        lower.extend_from_slice(&lo);
        upper.extend_from_slice(&hi);
    }
    let problem = QpProblem {
        dim,
        target: u_nominal.to_vec(),
        weights: vec![1.0; dim],
        ineq_a: sys.c.clone(),
        ineq_b: sys.b.clone(),
        lower,
        upper,
    };
    let opts = qp::SolveOptions { max_iter: 100 + 4 * dim, start: None };
    let out = qp::solve_with(&problem, &opts).map_err(CompatError::Undecided)?;
    match out.status {
        QpStatus::Optimal => Ok(CentralizedOutcome::Solved(out.solution.unwrap())),
        QpStatus::Infeasible => Ok(CentralizedOutcome::Infeasible),
        QpStatus::IterLimit => Err(CompatError::Undecided(QpError::PivotLimit)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;

    fn uav(p: [f64; 3], v: f64, pitch: f64, yaw: f64) -> UavState {
        UavState::new(Vec3::new(p[0], p[1], p[2]), v, pitch, yaw)
    }

    fn fleet(n: usize) -> (Vec<UavState>, Vec<UavLimits>) {
        let mut states = Vec::new();
        let mut limits = Vec::new();
        for k in 0..n {
            let a = k as f64;
            states.push(uav(
                [20.0 * (a * 0.9).cos(), 20.0 * (a * 1.3).sin(), 5.0 * (a * 0.4).sin()],
                1.0 + 0.2 * ((a * 0.7).sin() + 1.0),
                0.3 * (a * 0.5).sin(),
                a * 0.8,
            ));
            limits.push(UavLimits::with_v_max(3.0));
        }
        (states, limits)
    }

    #[test]
    fn system_shapes() {
        let params = SafetyParams::default();
        let (states, limits) = fleet(2);
        let sys = build_centralized_system(&states, &limits, &params).unwrap();
        assert_eq!(sys.c.nrows(), 1);
        assert_eq!(sys.c.ncols(), 6);

        let (states, limits) = fleet(7);
        let sys = build_centralized_system(&states, &limits, &params).unwrap();
        assert_eq!(sys.c.nrows(), 21);
        assert_eq!(sys.c.ncols(), 21);
        assert_eq!(sys.pair_index[0], (0, 1));
        assert_eq!(sys.pair_index[6], (1, 2));
        assert_eq!(*sys.pair_index.last().unwrap(), (5, 6));
    }

    #[test]
    fn rows_reproduce_pairwise_constraints() {
        // Evaluating C u − b at any u must equal −(k_ijᵀu_i + k_jiᵀu_j + ξ)
        // for every pair.
        let params = SafetyParams::default();
        let (states, limits) = fleet(5);
        let sys = build_centralized_system(&states, &limits, &params).unwrap();
        let u: Vec<f64> = (0..15).map(|k| ((k as f64) * 0.37).sin() * 0.1).collect();
        for (r, &(i, j)) in sys.pair_index.iter().enumerate() {
            let pc =
                pairwise_coefficients(&states[i], &states[j], &limits[i], &limits[j], &params)
                    .unwrap();
            let ui = Vec3::new(u[3 * i], u[3 * i + 1], u[3 * i + 2]);
            let uj = Vec3::new(u[3 * j], u[3 * j + 1], u[3 * j + 2]);
            let direct = pc.k_ij.dot(ui) + pc.k_ji.dot(uj) + pc.xi;
            let via_row = dot(sys.c.row(r), &u) - sys.b[r];
            assert!((via_row + direct).abs() < 1e-10, "pair ({i},{j})");
        }
    }

    #[test]
    fn farkas_contradictory_half_lines() {
        let mut c = RowMat::with_cols(1);
        c.push_row(&[1.0]);
        c.push_row(&[-1.0]);
        let sys = ConstraintSystem { c, b: vec![-1.0, -1.0], pair_index: vec![(0, 1), (0, 1)] };
        match farkas_check(&sys).unwrap() {
            FarkasOutcome::Incompatible { certificate } => {
                assert!((certificate[0] - 0.5).abs() < 1e-9);
                assert!((certificate[1] - 0.5).abs() < 1e-9);
                assert!((dot(&certificate, &sys.b) + 1.0).abs() < 1e-9);
            }
            _ => panic!("expected incompatible"),
        }
    }

    #[test]
    fn farkas_single_row_compatible() {
        let mut c = RowMat::with_cols(1);
        c.push_row(&[1.0]);
        let sys = ConstraintSystem { c, b: vec![0.0], pair_index: vec![(0, 1)] };
        match farkas_check(&sys).unwrap() {
            FarkasOutcome::Compatible { witness } => {
                assert!(witness[0] <= 1e-8);
            }
            _ => panic!("expected compatible"),
        }
    }

    #[test]
    fn nullspace_bounds_examples() {
        assert_eq!(nullspace_dim_bounds(7), (0, 21));
        assert_eq!(nullspace_dim_bounds(2), (0, 1));
        assert_eq!(nullspace_dim_bounds(150), (10725, 11175));
    }

    #[test]
    fn sign_consistency_zero_entry_fails() {
        let params = SafetyParams::default();
        let (states, limits) = fleet(3);
        let mut sys = build_centralized_system(&states, &limits, &params).unwrap();
        // Zero out one entry of UAV 0's block: strictness must fail for it.
        sys.c.set(0, 0, 0.0);
        let sc = sign_consistency_holds(&sys, 3);
        assert!(!sc.per_uav[0]);
        assert!(!sc.overall);
    }

    #[test]
    fn distant_pair_interior_optimum() {
        // Far apart, the barrier rows are inactive and the centralized QP
        // returns the nominal input unchanged.
        let params = SafetyParams::default();
        let limits = vec![UavLimits::with_v_max(3.0); 2];
        let states = vec![uav([0.0, 0.0, 0.0], 2.0, 0.0, 0.0), uav([500.0, 0.0, 0.0], 2.0, 0.0, 0.0)];
        let nominal = vec![0.5, 0.01, -0.02, -0.3, 0.0, 0.05];
        match solve_centralized_qp(&states, &limits, &params, &nominal).unwrap() {
            CentralizedOutcome::Solved(u) => {
                for (a, b) in u.iter().zip(&nominal) {
                    assert!((a - b).abs() < 1e-8);
                }
            }
            _ => panic!("expected solved"),
        }
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let limits = vec![UavLimits::with_v_max(3.0); 2];
        let mut c = RowMat::with_cols(6);
        let mut row = vec![0.0; 6];
        row[0] = 1.0;
        c.push_row(&row);
        row[0] = -1.0;
        c.push_row(&row);
        let sys = ConstraintSystem {
            c,
            b: vec![-5.0, -5.0],
            pair_index: vec![(0, 1), (0, 1)],
        };
        let nominal = vec![0.0; 6];
        match solve_centralized_system(&sys, &limits, &nominal).unwrap() {
            CentralizedOutcome::Infeasible => {}
            _ => panic!("expected infeasible"),
        }
    }
}
