//! Bounded-variable primal simplex for the phase-I feasibility problem
//!
//! ```text
//!     minimize t   s.t.   A x − t·1 + s = b,   s ≥ 0,   l ≤ x ≤ u,
//! ```
//!
//! with `t` free. The auxiliary variable admits a feasible starting basis in
//! closed form: rest `x` on its bounds, set `t` to the largest violation and
//! make it basic in that row, and make the slacks basic everywhere else.
//!
//! At optimality the row duals `q = −y` satisfy `q ≥ 0` and `Σ q = 1`, and
//! when every `x` variable is free they also satisfy `qᵀA = 0`, so the dual
//! vector doubles as a normalized Farkas certificate whenever `t* > 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::RowMat;

const RC_TOL: f64 = 1e-9;
const PIV_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-9;
const REFRESH_EVERY: usize = 500;
/// Objective level that triggers the "strictly feasible" early exit.
const EARLY_EXIT_T: f64 = -1e-7;
/// Target objective when the problem is unbounded below.
const UNBOUNDED_TARGET: f64 = -1.0;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VStat {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

pub(crate) enum Phase1Run {
    /// Proven minimax violation, with the primal point and row duals.
    Optimal { t: f64, x: Vec<f64>, duals: Vec<f64> },
    /// Violation driven below zero before optimality was proven.
    Feasible { x: Vec<f64> },
    PivotLimit,
}

struct Simplex<'a> {
    rows: &'a RowMat,
    b: &'a [f64],
    m: usize,
    d: usize,
    nv: usize,
    t_var: usize,
    row_of_t: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    vals: Vec<f64>,
    stat: Vec<VStat>,
    basis: Vec<usize>,
    binv: Vec<f64>,
}

pub(crate) fn phase1_simplex(
    rows: &RowMat,
    b: &[f64],
    lower: &[f64],
    upper: &[f64],
    max_pivots: usize,
) -> Phase1Run {
    let m = rows.nrows();
    let d = rows.ncols();
    debug_assert_eq!(b.len(), m);

    // Rest each x variable at a finite bound (or zero when unbounded).
    let mut vals = vec![0.0; d + 1 + m];
    let mut stat = vec![VStat::Free; d + 1 + m];
    for j in 0..d {
        if lower[j].is_finite() {
            vals[j] = lower[j];
            stat[j] = VStat::AtLower;
        } else if upper[j].is_finite() {
            vals[j] = upper[j];
            stat[j] = VStat::AtUpper;
        }
    }
    if m == 0 {
        return Phase1Run::Feasible { x: vals[..d].to_vec() };
    }

    // Largest violation at the resting point becomes the initial t.
    let mut t0 = f64::NEG_INFINITY;
    let mut row_of_t = 0;
    let mut resid = vec![0.0; m];
    for (i, r) in resid.iter_mut().enumerate() {
        *r = crate::linalg::dot(rows.row(i), &vals[..d]) - b[i];
        if *r > t0 {
            t0 = *r;
            row_of_t = i;
        }
    }
    if t0 <= 0.0 {
        return Phase1Run::Feasible { x: vals[..d].to_vec() };
    }

    let t_var = d;
    let nv = d + 1 + m;
    let mut basis = vec![0usize; m];
    for (i, (bi, &r)) in basis.iter_mut().zip(&resid).enumerate() {
        if i == row_of_t {
            *bi = t_var;
        } else {
            *bi = d + 1 + i;
            vals[d + 1 + i] = t0 - r;
            stat[d + 1 + i] = VStat::Basic;
        }
    }
    vals[t_var] = t0;
    stat[t_var] = VStat::Basic;
    stat[d + 1 + row_of_t] = VStat::AtLower; // its slack rests at zero

    // Closed-form inverse of the starting basis: identity with the column of
    // the t position replaced by −1 everywhere.
    let mut binv = vec![0.0; m * m];
    for p in 0..m {
        if p != row_of_t {
            binv[p * m + p] = 1.0;
        }
        binv[p * m + row_of_t] = -1.0;
    }

    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    lo.push(f64::NEG_INFINITY); // t
    hi.push(f64::INFINITY);
    for _ in 0..m {
        lo.push(0.0); // slacks
        hi.push(f64::INFINITY);
    }

    let mut s = Simplex {
        rows,
        b,
        m,
        d,
        nv,
        t_var,
        row_of_t,
        lo,
        hi,
        vals,
        stat,
        basis,
        binv,
    };
    s.run(max_pivots)
}

impl Simplex<'_> {
    fn column(&self, var: usize, out: &mut [f64]) {
        if var < self.d {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.rows.get(i, var);
            }
        } else if var == self.t_var {
            out.fill(-1.0);
        } else {
            out.fill(0.0);
            out[var - self.d - 1] = 1.0;
        }
    }

    /// Row duals `y = c_Bᵀ B⁻¹`; only the t position carries cost.
    fn duals(&self) -> &[f64] {
        &self.binv[self.row_of_t * self.m..(self.row_of_t + 1) * self.m]
    }

    fn reduced_cost(&self, var: usize, y: &[f64]) -> f64 {
        if var < self.d {
            let mut acc = 0.0;
            for (i, &yi) in y.iter().enumerate() {
                acc += yi * self.rows.get(i, var);
            }
            -acc
        } else if var == self.t_var {
            1.0 + y.iter().sum::<f64>()
        } else {
            -y[var - self.d - 1]
        }
    }

    /// Rebuilds `binv` and the basic values from scratch.
    fn refresh(&mut self) -> bool {
        let m = self.m;
        let w = 2 * m;
        let mut aug = vec![0.0; m * w];
        let mut col = vec![0.0; m];
        for (p, &var) in self.basis.iter().enumerate() {
            self.column(var, &mut col);
            for i in 0..m {
                aug[i * w + p] = col[i];
            }
        }
        for i in 0..m {
            aug[i * w + m + i] = 1.0;
        }
        for c in 0..m {
            let mut piv = c;
            let mut best = aug[c * w + c].abs();
            for r in c + 1..m {
                let v = aug[r * w + c].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-13 {
                return false;
            }
            if piv != c {
                for k in 0..w {
                    aug.swap(c * w + k, piv * w + k);
                }
            }
            let inv = 1.0 / aug[c * w + c];
            for k in 0..w {
                aug[c * w + k] *= inv;
            }
            for r in 0..m {
                if r != c {
                    let f = aug[r * w + c];
                    if f != 0.0 {
                        for k in 0..w {
                            aug[r * w + k] -= f * aug[c * w + k];
                        }
                    }
                }
            }
        }
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = aug[i * w + m + k];
            }
        }

        // Basic values: x_B = B⁻¹ (b − N x_N).
        let mut rhs = self.b.to_vec();
        for var in 0..self.nv {
            if self.stat[var] != VStat::Basic && self.vals[var] != 0.0 {
                self.column(var, &mut col);
                for i in 0..m {
                    rhs[i] -= col[i] * self.vals[var];
                }
            }
        }
        for p in 0..m {
            let mut acc = 0.0;
            for (k, &r) in rhs.iter().enumerate() {
                acc += self.binv[p * m + k] * r;
            }
            self.vals[self.basis[p]] = acc;
        }
        true
    }

    fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.m)
            .map(|i| crate::linalg::dot(self.rows.row(i), x) - self.b[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn run(&mut self, max_pivots: usize) -> Phase1Run {
        let m = self.m;
        let mut col_e = vec![0.0; m];
        let mut w = vec![0.0; m];

        for pivot in 0..max_pivots {
            if pivot > 0 && pivot % REFRESH_EVERY == 0 && !self.refresh() {
                return Phase1Run::PivotLimit;
            }

            // Strictly feasible early exit: the objective bounds the largest
            // violation from above.
            if self.vals[self.t_var] <= EARLY_EXIT_T {
                let x = self.vals[..self.d].to_vec();
                if self.max_violation(&x) <= 0.0 {
                    return Phase1Run::Feasible { x };
                }
            }

            // Bland pricing: the lowest-index eligible variable enters.
            let y: Vec<f64> = self.duals().to_vec();
            let mut entering = None;
            for var in 0..self.nv {
                if self.stat[var] == VStat::Basic {
                    continue;
                }
                let rc = self.reduced_cost(var, &y);
                let dir = match self.stat[var] {
                    VStat::AtLower if rc < -RC_TOL => 1.0,
                    VStat::AtUpper if rc > RC_TOL => -1.0,
                    VStat::Free if rc < -RC_TOL => 1.0,
                    VStat::Free if rc > RC_TOL => -1.0,
                    _ => continue,
                };
                entering = Some((var, dir, rc));
                break;
            }
            let Some((e_var, dir, rc_e)) = entering else {
                // Optimal: refresh once for precision before extraction.
                if !self.refresh() {
                    return Phase1Run::PivotLimit;
                }
                let t = self.vals[self.t_var];
                let x = self.vals[..self.d].to_vec();
                let duals: Vec<f64> = self.duals().iter().map(|&yi| (-yi).max(0.0)).collect();
                return Phase1Run::Optimal { t, x, duals };
            };

            self.column(e_var, &mut col_e);
            for (i, wi) in w.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (p, &c) in col_e.iter().enumerate() {
                    if c != 0.0 {
                        acc += self.binv[i * m + p] * c;
                    }
                }
                *wi = acc;
            }

            // Ratio test: basic variables hitting a bound, or the entering
            // variable flipping to its opposite bound. Ties resolve to the
            // lowest variable index (Bland).
            let range_e = self.hi[e_var] - self.lo[e_var];
            let mut best_delta = if range_e.is_finite() { range_e } else { f64::INFINITY };
            let mut leaving: Option<usize> = None; // row index; None = bound flip
            let mut best_var = if range_e.is_finite() { e_var } else { usize::MAX };
            for i in 0..m {
                let g = dir * w[i];
                let bv = self.basis[i];
                let delta = if g > PIV_TOL && self.lo[bv].is_finite() {
                    (self.vals[bv] - self.lo[bv]) / g
                } else if g < -PIV_TOL && self.hi[bv].is_finite() {
                    (self.vals[bv] - self.hi[bv]) / g
                } else {
                    continue;
                };
                let delta = delta.max(0.0);
                let better = if !best_delta.is_finite() {
                    true
                } else {
                    let tol = RATIO_TIE * (1.0 + best_delta);
                    delta < best_delta - tol
                        || ((delta - best_delta).abs() <= tol && bv < best_var)
                };
                if better {
                    best_delta = delta;
                    leaving = Some(i);
                    best_var = bv;
                }
            }

            if best_delta.is_infinite() {
                // Unbounded below: walk the ray far enough to certify strict
                // feasibility and stop.
                let rate = dir * rc_e; // strictly negative
                let delta = (UNBOUNDED_TARGET - self.vals[self.t_var]) / rate;
                let delta = delta.max(0.0);
                for i in 0..m {
                    let bv = self.basis[i];
                    self.vals[bv] -= dir * w[i] * delta;
                }
                self.vals[e_var] += dir * delta;
                let x = self.vals[..self.d].to_vec();
                if self.max_violation(&x) <= 0.0 {
                    return Phase1Run::Feasible { x };
                }
                // Numerical drift along a long ray: rebuild and continue.
                if !self.refresh() {
                    return Phase1Run::PivotLimit;
                }
                continue;
            }

            // Apply the step.
            for i in 0..m {
                let bv = self.basis[i];
                self.vals[bv] -= dir * w[i] * best_delta;
            }
            self.vals[e_var] += dir * best_delta;

            match leaving {
                None => {
                    // Bound flip: pin exactly to the opposite bound.
                    self.stat[e_var] = match self.stat[e_var] {
                        VStat::AtLower => {
                            self.vals[e_var] = self.hi[e_var];
                            VStat::AtUpper
                        }
                        VStat::AtUpper => {
                            self.vals[e_var] = self.lo[e_var];
                            VStat::AtLower
                        }
                        other => other, // free variables never flip
                    };
                }
                Some(r) => {
                    let lv = self.basis[r];
                    let g = dir * w[r];
                    if g > 0.0 {
                        self.vals[lv] = self.lo[lv];
                        self.stat[lv] = VStat::AtLower;
                    } else {
                        self.vals[lv] = self.hi[lv];
                        self.stat[lv] = VStat::AtUpper;
                    }
                    self.stat[e_var] = VStat::Basic;
                    self.basis[r] = e_var;
                    // Product-form update of B⁻¹.
                    let piv = w[r];
                    let inv = 1.0 / piv;
                    for k in 0..m {
                        self.binv[r * m + k] *= inv;
                    }
                    for i in 0..m {
                        if i != r && w[i] != 0.0 {
                            let f = w[i];
                            for k in 0..m {
                                self.binv[i * m + k] -= f * self.binv[r * m + k];
                            }
                        }
                    }
                }
            }
        }
        Phase1Run::PivotLimit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> RowMat {
        let mut m = RowMat::with_cols(rows[0].len());
        for r in rows {
            m.push_row(r);
        }
        m
    }

    #[test]
    fn contradictory_half_lines() {
        // u ≤ −1 and −u ≤ −1 have minimax violation 1 at u = 0.
        let a = mat(&[&[1.0], &[-1.0]]);
        let free = [f64::NEG_INFINITY];
        let freeh = [f64::INFINITY];
        match phase1_simplex(&a, &[-1.0, -1.0], &free, &freeh, 100) {
            Phase1Run::Optimal { t, duals, .. } => {
                assert!((t - 1.0).abs() < 1e-9, "t = {t}");
                assert!((duals[0] - 0.5).abs() < 1e-9);
                assert!((duals[1] - 0.5).abs() < 1e-9);
            }
            _ => panic!("expected proven optimum"),
        }
    }

    #[test]
    fn satisfiable_exits_feasible() {
        let a = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let lo = [f64::NEG_INFINITY; 2];
        let hi = [f64::INFINITY; 2];
        match phase1_simplex(&a, &[5.0, -3.0], &lo, &hi, 100) {
            Phase1Run::Feasible { x } | Phase1Run::Optimal { x, .. } => {
                assert!(x[0] <= 5.0 + 1e-9 && x[1] <= -3.0 + 1e-9);
            }
            Phase1Run::PivotLimit => panic!("pivot limit"),
        }
    }

    #[test]
    fn box_bound_blocks() {
        // x ≤ −2 with x ∈ [−1, 1] is infeasible by exactly 1.
        let a = mat(&[&[1.0]]);
        match phase1_simplex(&a, &[-2.0], &[-1.0], &[1.0], 100) {
            Phase1Run::Optimal { t, x, .. } => {
                assert!((t - 1.0).abs() < 1e-9, "t = {t}");
                assert!((x[0] + 1.0).abs() < 1e-9);
            }
            _ => panic!("expected proven optimum"),
        }
    }
}
