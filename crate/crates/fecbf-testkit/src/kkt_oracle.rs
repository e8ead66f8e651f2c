//! Brute-force QP oracle: enumerate candidate active subsets, solve each
//! equality-constrained subproblem through its KKT system, and keep the best
//! feasible candidate.
//!
//! For a strictly convex QP the optimum is the equality-constrained solution
//! of some linearly independent active subset of at most `dim` constraints
//! (box rows included), so exhaustive enumeration up to that size is exact:
//! the best feasible candidate is the optimum, and no feasible candidate at
//! all proves infeasibility.

use fecbf_core::qp::QpProblem;

const FEAS_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub enum OracleStatus {
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
}

/// One constraint row in the unified (general + box) indexing.
#[derive(Clone, Copy)]
enum Row {
    Gen(usize),
    Lower(usize),
    Upper(usize),
}

/// Enumerates active subsets of size ≤ `dim`. Returns `None` when more than
/// `max_candidates` subsets would have to be visited; the caller sizes its
/// problems to fit the budget.
pub fn enumerate_qp(p: &QpProblem, max_candidates: u64) -> Option<OracleStatus> {
    let dim = p.dim;
    let mut rows: Vec<Row> = (0..p.ineq_a.nrows()).map(Row::Gen).collect();
    for j in 0..dim {
        if p.lower[j].is_finite() {
            rows.push(Row::Lower(j));
        }
        if p.upper[j].is_finite() {
            rows.push(Row::Upper(j));
        }
    }
    let total = rows.len();
    if count_subsets(total, dim) > max_candidates {
        return None;
    }

    let coeff = |r: Row, k: usize| -> f64 {
        match r {
            Row::Gen(i) => p.ineq_a.get(i, k),
            Row::Lower(j) => {
                if j == k {
                    -1.0
                } else {
                    0.0
                }
            }
            Row::Upper(j) => {
                if j == k {
                    1.0
                } else {
                    0.0
                }
            }
        }
    };
    let rhs = |r: Row| -> f64 {
        match r {
            Row::Gen(i) => p.ineq_b[i],
            Row::Lower(j) => -p.lower[j],
            Row::Upper(j) => p.upper[j],
        }
    };
    let feasible = |x: &[f64]| -> bool {
        for j in 0..dim {
            if x[j] < p.lower[j] - FEAS_TOL || x[j] > p.upper[j] + FEAS_TOL {
                return false;
            }
        }
        for i in 0..p.ineq_a.nrows() {
            let ax: f64 = p.ineq_a.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
            if ax > p.ineq_b[i] + FEAS_TOL * (1.0 + p.ineq_b[i].abs()) {
                return false;
            }
        }
        true
    };

    let dinv: Vec<f64> = p.weights.iter().map(|&w| 1.0 / (2.0 * w)).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = Vec::with_capacity(dim);
    let mut consider = |subset: &[usize], best: &mut Option<(f64, Vec<f64>)>| {
        let k = subset.len();
        // KKT: (A_S D A_Sᵀ) λ = A_S (target) − b_S with x = target − D A_Sᵀ λ.
        let mut m = vec![0.0; k * k];
        let mut r = vec![0.0; k];
        for (a, &sa) in subset.iter().enumerate() {
            let ra = rows[sa];
            for (b, &sb) in subset.iter().enumerate() {
                let rb = rows[sb];
                let mut acc = 0.0;
                for c in 0..dim {
                    acc += coeff(ra, c) * dinv[c] * coeff(rb, c);
                }
                m[a * k + b] = acc;
            }
            let mut acc = 0.0;
            for c in 0..dim {
                acc += coeff(ra, c) * p.target[c];
            }
            r[a] = acc - rhs(ra);
        }
        let Some(lambda) = gauss_solve(&mut m, &mut r, k) else { return };
        let mut x = p.target.clone();
        for (a, &sa) in subset.iter().enumerate() {
            let ra = rows[sa];
            for (c, xc) in x.iter_mut().enumerate() {
                *xc -= dinv[c] * coeff(ra, c) * lambda[a];
            }
        }
        if feasible(&x) {
            let obj = p.objective(&x);
            if best.as_ref().map_or(true, |(bo, _)| obj < *bo) {
                *best = Some((obj, x));
            }
        }
    };

    // Depth-first subset walk, sizes 0..=dim.
    fn walk(
        start: usize,
        total: usize,
        dim: usize,
        subset: &mut Vec<usize>,
        consider: &mut impl FnMut(&[usize], &mut Option<(f64, Vec<f64>)>),
        best: &mut Option<(f64, Vec<f64>)>,
    ) {
        consider(subset, best);
        if subset.len() == dim {
            return;
        }
        for i in start..total {
            subset.push(i);
            walk(i + 1, total, dim, subset, consider, best);
            subset.pop();
        }
    }
    walk(0, total, dim, &mut subset, &mut consider, &mut best);

    Some(match best {
        Some((objective, x)) => OracleStatus::Optimal { objective, x },
        None => OracleStatus::Infeasible,
    })
}

/// Number of subsets of size ≤ k from n items, saturating.
fn count_subsets(n: usize, k: usize) -> u64 {
    let mut total: u64 = 0;
    let mut c: u64 = 1; // C(n, 0)
    for i in 0..=k.min(n) {
        total = total.saturating_add(c);
        let num = (n - i) as u64;
        let den = (i + 1) as u64;
        c = match c.checked_mul(num) {
            Some(v) => v / den,
            None => return u64::MAX,
        };
    }
    total
}

/// Plain Gaussian elimination with partial pivoting; `None` when singular.
fn gauss_solve(m: &mut [f64], r: &mut [f64], k: usize) -> Option<Vec<f64>> {
    if k == 0 {
        return Some(Vec::new());
    }
    for c in 0..k {
        let mut piv = c;
        let mut best = m[c * k + c].abs();
        for row in c + 1..k {
            if m[row * k + c].abs() > best {
                best = m[row * k + c].abs();
                piv = row;
            }
        }
        if best < 1e-12 {
            return None;
        }
        if piv != c {
            for j in 0..k {
                m.swap(c * k + j, piv * k + j);
            }
            r.swap(c, piv);
        }
        let inv = 1.0 / m[c * k + c];
        for j in c..k {
            m[c * k + j] *= inv;
        }
        r[c] *= inv;
        for row in 0..k {
            if row != c {
                let f = m[row * k + c];
                if f != 0.0 {
                    for j in c..k {
                        m[row * k + j] -= f * m[c * k + j];
                    }
                    r[row] -= f * r[c];
                }
            }
        }
    }
    Some(r.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fecbf_core::RowMat;

    #[test]
    fn matches_hand_solution() {
        // min (u−2)² s.t. u ≤ 1, box [−3, 3] → u = 1, objective 1.
        let mut a = RowMat::with_cols(1);
        a.push_row(&[1.0]);
        let p = QpProblem {
            dim: 1,
            target: vec![2.0],
            weights: vec![1.0],
            ineq_a: a,
            ineq_b: vec![1.0],
            lower: vec![-3.0],
            upper: vec![3.0],
        };
        match enumerate_qp(&p, 1_000_000).unwrap() {
            OracleStatus::Optimal { objective, x } => {
                assert!((objective - 1.0).abs() < 1e-9);
                assert!((x[0] - 1.0).abs() < 1e-9);
            }
            OracleStatus::Infeasible => panic!("feasible problem"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        let mut a = RowMat::with_cols(1);
        a.push_row(&[1.0]);
        a.push_row(&[-1.0]);
        let p = QpProblem {
            dim: 1,
            target: vec![0.0],
            weights: vec![1.0],
            ineq_a: a,
            ineq_b: vec![-1.0, -1.0],
            lower: vec![-10.0],
            upper: vec![10.0],
        };
        match enumerate_qp(&p, 1_000_000).unwrap() {
            OracleStatus::Infeasible => {}
            OracleStatus::Optimal { .. } => panic!("infeasible problem"),
        }
    }

    #[test]
    fn subset_counting() {
        assert_eq!(count_subsets(3, 2), 1 + 3 + 3);
        assert_eq!(count_subsets(4, 4), 16);
    }
}
