//! Dense convex QP solver for diagonal-quadratic objectives with general
//! linear inequality constraints and box bounds.
//!
//! Solves
//!
//! ```text
//!     minimize  Σ_k w_k (x_k − target_k)²
//!     s.t.      A x ≤ b,    lower ≤ x ≤ upper,
//! ```
//!
//! with `w > 0`. Infeasibility is certified by a phase-I simplex whose dual
//! ray is exposed through [`phase1_feasibility`]; the optimizer itself is a
//! primal active-set method, so optimal solutions are exact up to linear
//! solves and compare cleanly against enumeration oracles.

mod active_set;
mod simplex;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{dot, inf_norm, norm2, RowMat};

/// Feasibility tolerance on row-normalized constraints.
const FEAS_TOL: f64 = 1e-8;
/// Below this norm a constraint row is treated as all-zero.
const ZERO_ROW: f64 = 1e-30;

/// Box-plus-inequality QP instance.
#[derive(Clone, Debug)]
pub struct QpProblem {
    pub dim: usize,
    /// Point whose weighted squared distance is minimized.
    pub target: Vec<f64>,
    /// Strictly positive objective weights (half the Hessian diagonal).
    pub weights: Vec<f64>,
    /// Inequality rows, `ineq_a · x ≤ ineq_b`.
    pub ineq_a: RowMat,
    pub ineq_b: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl QpProblem {
    /// Unit-weight problem without general inequality rows.
    pub fn box_projection(target: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let dim = target.len();
        QpProblem {
            dim,
            weights: vec![1.0; dim],
            ineq_a: RowMat::with_cols(dim),
            ineq_b: Vec::new(),
            target,
            lower,
            upper,
        }
    }

    pub fn validate(&self) -> Result<(), QpError> {
        if self.target.len() != self.dim
            || self.weights.len() != self.dim
            || self.lower.len() != self.dim
            || self.upper.len() != self.dim
            || self.ineq_a.ncols() != self.dim
            || self.ineq_b.len() != self.ineq_a.nrows()
        {
            return Err(QpError::Invalid("inconsistent dimensions"));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(QpError::Invalid("weights must be strictly positive"));
        }
        if self.lower.iter().zip(&self.upper).any(|(&l, &u)| !(l <= u)) {
            return Err(QpError::Invalid("lower bound exceeds upper bound"));
        }
        if self.target.iter().any(|v| !v.is_finite()) {
            return Err(QpError::Invalid("target must be finite"));
        }
        Ok(())
    }

    /// Objective value `Σ_k w_k (x_k − target_k)²`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x)
            .zip(&self.target)
            .map(|((&w, &xi), &ti)| w * (xi - ti) * (xi - ti))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    /// The iteration budget ran out before convergence; distinct from
    /// infeasibility, which is always certificate-backed.
    IterLimit,
}

#[derive(Clone, Debug)]
pub struct QpOutcome {
    pub status: QpStatus,
    pub solution: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Indices of tight inequality rows at the solution.
    pub active_set: Option<Vec<usize>>,
}

impl QpOutcome {
    fn of_status(status: QpStatus) -> Self {
        QpOutcome { status, solution: None, objective: None, active_set: None }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Optional feasible starting point; constraints tight there seed the
    /// working set. Falls back to the internal phase-I when infeasible.
    pub start: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iter: 200, start: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpError {
    Invalid(&'static str),
    /// The phase-I simplex ran out of pivots: feasibility is undecided.
    PivotLimit,
    /// A numerical self-check failed; the verdict is undecided.
    Numerical(&'static str),
}

impl fmt::Display for QpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QpError::Invalid(w) => write!(f, "invalid problem: {w}"),
            QpError::PivotLimit => write!(f, "phase-I pivot limit reached (undecided)"),
            QpError::Numerical(w) => write!(f, "numerical check failed: {w}"),
        }
    }
}

pub fn solve(problem: &QpProblem) -> Result<QpOutcome, QpError> {
    solve_with(problem, &SolveOptions::default())
}

pub fn solve_with(problem: &QpProblem, opts: &SolveOptions) -> Result<QpOutcome, QpError> {
    problem.validate()?;
    let dim = problem.dim;

    // Row preprocessing: normalize to unit norm (the verdict must not depend
    // on row scaling) and resolve all-zero rows directly.
    let mut norm_rows = RowMat::with_cols(dim);
    let mut norm_b = Vec::new();
    let mut kept = Vec::new();
    for i in 0..problem.ineq_a.nrows() {
        let row = problem.ineq_a.row(i);
        let n = norm2(row);
        if n <= ZERO_ROW {
            if problem.ineq_b[i] < -FEAS_TOL {
                return Ok(QpOutcome::of_status(QpStatus::Infeasible));
            }
            continue;
        }
        let scaled: Vec<f64> = row.iter().map(|&v| v / n).collect();
        norm_rows.push_row(&scaled);
        norm_b.push(problem.ineq_b[i] / n);
        kept.push(i);
    }
    let m = norm_rows.nrows();
    let support: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            norm_rows
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(k, _)| k as u32)
                .collect()
        })
        .collect();

    // Starting point: caller-provided or the clamped target; run phase-I if
    // it violates any row.
    let clamp = |mut v: Vec<f64>| {
        for k in 0..dim {
            v[k] = v[k].clamp(problem.lower[k], problem.upper[k]);
        }
        v
    };
    let mut start = clamp(opts.start.clone().unwrap_or_else(|| problem.target.clone()));
    let start_viol = (0..m)
        .map(|i| dot(norm_rows.row(i), &start) - norm_b[i])
        .fold(0.0_f64, f64::max);
    if start_viol > FEAS_TOL {
        let pivots = 400 + 40 * (m + dim);
        match simplex::phase1_simplex(&norm_rows, &norm_b, &problem.lower, &problem.upper, pivots)
        {
            simplex::Phase1Run::Feasible { x } => start = clamp(x),
            simplex::Phase1Run::Optimal { t, x, .. } => {
                if t > FEAS_TOL {
                    return Ok(QpOutcome::of_status(QpStatus::Infeasible));
                }
                start = clamp(x);
            }
            simplex::Phase1Run::PivotLimit => {
                return Ok(QpOutcome::of_status(QpStatus::IterLimit));
            }
        }
    }

    let mut engine = active_set::Engine::new(
        &norm_rows,
        &norm_b,
        &support,
        &problem.weights,
        &problem.target,
        &problem.lower,
        &problem.upper,
        start,
    );
    engine.seed_working_set();
    match engine.run(opts.max_iter) {
        active_set::AsRun::Optimal { mut x, active_rows } => {
            // Clip exactly into the box; the active-set iterate is already
            // inside up to round-off.
            for k in 0..dim {
                x[k] = x[k].clamp(problem.lower[k], problem.upper[k]);
            }
            // Surface a nonconvergence instead of an out-of-tolerance
            // "optimum" if the verification fails.
            let bscale = 1.0 + inf_norm(&problem.ineq_b);
            for i in 0..problem.ineq_a.nrows() {
                let viol = dot(problem.ineq_a.row(i), &x) - problem.ineq_b[i];
                if viol > FEAS_TOL * bscale {
                    return Ok(QpOutcome::of_status(QpStatus::IterLimit));
                }
            }
            let objective = problem.objective(&x);
            let active_set = active_rows.into_iter().map(|r| kept[r]).collect();
            Ok(QpOutcome {
                status: QpStatus::Optimal,
                solution: Some(x),
                objective: Some(objective),
                active_set: Some(active_set),
            })
        }
        active_set::AsRun::IterLimit => Ok(QpOutcome::of_status(QpStatus::IterLimit)),
    }
}

/// Outcome of the standalone phase-I feasibility check for
/// `{x : A x ≤ b, lower ≤ x ≤ upper}`.
#[derive(Clone, Debug)]
pub enum Phase1Outcome {
    Feasible {
        point: Vec<f64>,
    },
    /// Minimax violation is strictly positive. The certificate collects the
    /// row multipliers of the proof, normalized to unit 1-norm. With
    /// unbounded `x` it is a pure Farkas certificate (`qᵀA = 0`, `qᵀb < 0`);
    /// with finite bounds the box multipliers complete the identity.
    Infeasible {
        certificate: Vec<f64>,
        violation: f64,
    },
}

pub fn phase1_feasibility(
    a: &RowMat,
    b: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<Phase1Outcome, QpError> {
    let dim = a.ncols();
    if b.len() != a.nrows() || lower.len() != dim || upper.len() != dim {
        return Err(QpError::Invalid("inconsistent dimensions"));
    }
    if lower.iter().zip(upper).any(|(&l, &u)| !(l <= u)) {
        return Err(QpError::Invalid("lower bound exceeds upper bound"));
    }

    let mut norm_rows = RowMat::with_cols(dim);
    let mut norm_b = Vec::new();
    let mut kept = Vec::new();
    for i in 0..a.nrows() {
        let n = norm2(a.row(i));
        if n <= ZERO_ROW {
            if b[i] < -FEAS_TOL {
                // 0·x ≤ b with b < 0: the row alone is its own certificate.
                let mut certificate = vec![0.0; a.nrows()];
                certificate[i] = 1.0;
                return Ok(Phase1Outcome::Infeasible { certificate, violation: -b[i] });
            }
            continue;
        }
        let scaled: Vec<f64> = a.row(i).iter().map(|&v| v / n).collect();
        norm_rows.push_row(&scaled);
        norm_b.push(b[i] / n);
        kept.push((i, n));
    }

    let pivots = 1000 + 60 * (norm_rows.nrows() + dim);
    match simplex::phase1_simplex(&norm_rows, &norm_b, lower, upper, pivots) {
        simplex::Phase1Run::Feasible { x } => {
            verify_point(&norm_rows, &norm_b, &x)?;
            Ok(Phase1Outcome::Feasible { point: x })
        }
        simplex::Phase1Run::Optimal { t, x, duals } => {
            if t <= FEAS_TOL {
                verify_point(&norm_rows, &norm_b, &x)?;
                return Ok(Phase1Outcome::Feasible { point: x });
            }
            // Undo the row scaling and normalize to ‖q‖₁ = 1.
            let mut certificate = vec![0.0; a.nrows()];
            for ((orig, n), q) in kept.iter().zip(&duals) {
                certificate[*orig] = q.max(0.0) / n;
            }
            let total: f64 = certificate.iter().sum();
            if !(total > 0.0) {
                return Err(QpError::Numerical("empty infeasibility certificate"));
            }
            for q in &mut certificate {
                *q /= total;
            }
            Ok(Phase1Outcome::Infeasible { certificate, violation: t })
        }
        simplex::Phase1Run::PivotLimit => Err(QpError::PivotLimit),
    }
}

fn verify_point(rows: &RowMat, b: &[f64], x: &[f64]) -> Result<(), QpError> {
    for i in 0..rows.nrows() {
        if dot(rows.row(i), x) - b[i] > 10.0 * FEAS_TOL {
            return Err(QpError::Numerical("phase-I witness failed verification"));
        }
    }
    Ok(())
}
