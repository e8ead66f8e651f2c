//! Two-phase standard-form simplex, written from scratch as an oracle.
//!
//! Decides compatibility of `{u : C u ≤ b}` through the alternative system:
//! a nonnegative combination `q` of the rows with `Cᵀq = 0`, `Σq = 1`
//! exists and attains `qᵀb < 0` if and only if the primal system is empty.
//! The oracle therefore solves
//!
//! ```text
//!     minimize qᵀb   s.t.   Cᵀq = 0,  Σq = 1,  q ≥ 0,
//! ```
//!
//! and reports incompatible exactly when the optimum is below −1e−8 (the
//! same margin the production check uses on its side of the duality).

use fecbf_core::RowMat;

const TOL: f64 = 1e-9;
const VERDICT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// Dense tableau simplex for `min cᵀz  s.t.  A z = rhs, z ≥ 0`.
///
/// Bland's rule throughout, so it terminates without anti-cycling hacks.
pub fn solve_standard_form(a: &[Vec<f64>], rhs: &[f64], c: &[f64], max_pivots: usize) -> LpResult {
    let m = a.len();
    let n = c.len();
    assert!(a.iter().all(|row| row.len() == n));
    assert_eq!(rhs.len(), m);

    // Tableau with artificial columns appended; flip rows to make rhs ≥ 0.
    let ncols = n + m;
    let mut t = vec![vec![0.0; ncols + 1]; m];
    for i in 0..m {
        let flip = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][ncols] = flip * rhs[i];
    }
    let mut basis: Vec<usize> = (n..ncols).collect();

    // Phase 1: minimize the artificial sum.
    let mut obj = vec![0.0; ncols + 1];
    for row in &t {
        for (o, v) in obj.iter_mut().zip(row.iter()) {
            *o -= v;
        }
    }
    for j in n..ncols {
        obj[j] += 1.0;
    }
    let mut pivots = 0usize;
    if !iterate(&mut t, &mut obj, &mut basis, ncols, &mut pivots, max_pivots) {
        return LpResult::Unbounded; // cannot happen: phase 1 is bounded below
    }
    let art_sum = -obj[ncols];
    if art_sum > TOL {
        return LpResult::Infeasible;
    }

    // Drive leftover artificials out of the basis, or drop redundant rows.
    let mut live_rows: Vec<bool> = vec![true; m];
    for i in 0..m {
        if basis[i] >= n {
            let mut pivot_col = None;
            for j in 0..n {
                if t[i][j].abs() > 1e-9 {
                    pivot_col = Some(j);
                    break;
                }
            }
            match pivot_col {
                Some(j) => {
                    pivot(&mut t, &mut obj, i, j, ncols);
                    basis[i] = j;
                }
                None => live_rows[i] = false,
            }
        }
    }

    // Phase 2 objective: reduced costs of the real objective over the basis.
    let mut obj2 = vec![0.0; ncols + 1];
    obj2[..n].copy_from_slice(c);
    for i in 0..m {
        if live_rows[i] && basis[i] < n {
            let cb = c[basis[i]];
            if cb != 0.0 {
                for j in 0..=ncols {
                    obj2[j] -= cb * t[i][j];
                }
            }
        }
    }
    // Forbid artificials from re-entering.
    for j in n..ncols {
        obj2[j] = f64::INFINITY;
    }
    if !iterate(&mut t, &mut obj2, &mut basis, ncols, &mut pivots, max_pivots) {
        return LpResult::Unbounded;
    }

    let mut x = vec![0.0; n];
    for i in 0..m {
        if live_rows[i] && basis[i] < n {
            x[basis[i]] = t[i][ncols];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpResult::Optimal { value, x }
}

/// Primal simplex sweep; returns false on unboundedness.
fn iterate(
    t: &mut [Vec<f64>],
    obj: &mut [f64],
    basis: &mut [usize],
    ncols: usize,
    pivots: &mut usize,
    max_pivots: usize,
) -> bool {
    let m = t.len();
    loop {
        if *pivots >= max_pivots {
            // Bland's rule guarantees finite termination; a generous cap is
            // pure paranoia.
            return true;
        }
        // Bland: lowest-index column with a negative reduced cost.
        let mut entering = None;
        for (j, &o) in obj.iter().enumerate().take(ncols) {
            if o < -TOL {
                entering = Some(j);
                break;
            }
        }
        let Some(e) = entering else { return true };
        // Ratio test, ties to the lowest basis variable.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][e] > TOL {
                let ratio = t[i][ncols] / t[i][e];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - TOL || (ratio - lr).abs() <= TOL && basis[i] < basis[li] {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = leave else { return false };
        pivot(t, obj, r, e, ncols);
        basis[r] = e;
        *pivots += 1;
    }
}

fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], r: usize, e: usize, ncols: usize) {
    let inv = 1.0 / t[r][e];
    for v in t[r].iter_mut() {
        *v *= inv;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && row[e].abs() > 0.0 {
            let f = row[e];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
        }
    }
    if obj[e].is_finite() && obj[e] != 0.0 {
        let f = obj[e];
        for (v, p) in obj.iter_mut().zip(&pivot_row) {
            if v.is_finite() {
                *v -= f * p;
            }
        }
    }
    // Reset blocked columns that the sweep may have touched.
    for v in obj.iter_mut().take(ncols + 1) {
        if v.is_nan() {
            *v = f64::INFINITY;
        }
    }
}

/// Oracle verdict for the compatibility of `{u : C u ≤ b}`.
pub fn oracle_compatible(c: &RowMat, b: &[f64]) -> bool {
    let m = c.nrows();
    let d = c.ncols();
    // Equality system over q: Cᵀ q = 0 (d rows) and Σ q = 1 (one row).
    let mut a = vec![vec![0.0; m]; d + 1];
    for (i, col) in a.iter_mut().enumerate().take(d) {
        for (q, cv) in col.iter_mut().enumerate() {
            *cv = c.get(q, i);
        }
    }
    a[d] = vec![1.0; m];
    let mut rhs = vec![0.0; d + 1];
    rhs[d] = 1.0;
    match solve_standard_form(&a, &rhs, b, 50_000) {
        LpResult::Infeasible => true,
        LpResult::Optimal { value, .. } => value >= -VERDICT_TOL,
        LpResult::Unbounded => unreachable!("the q-simplex is compact"),
    }
}
