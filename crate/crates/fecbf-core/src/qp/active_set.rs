//! Primal active-set iteration for strictly convex diagonal QPs.
//!
//! The objective is `Σ_k w_k (x_k − t_k)²` with `w > 0`, so every
//! equality-constrained subproblem has the closed form
//!
//! ```text
//!     M μ = A_W (t − x),   M = A_W D A_Wᵀ,   D = diag(1 / (2w)),
//!     p   = (t − x) − D A_Wᵀ μ,
//! ```
//!
//! solved with an incrementally extended Cholesky factor of `M`. Box bounds
//! participate as implicit `±e_j` rows. Ties in both the blocking and the
//! dropping rule resolve to the lowest constraint index (Bland-style), which
//! prevents cycling on degenerate geometry.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{inf_norm, RowMat};

const DUAL_TOL: f64 = 1e-10;
const DIR_TOL: f64 = 1e-12;
const TIGHT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum WsEntry {
    Row(usize),
    Lower(usize),
    Upper(usize),
}

impl WsEntry {
    /// Total order used for Bland-style tie-breaking.
    fn bland(self, m: usize, dim: usize) -> usize {
        match self {
            WsEntry::Row(r) => r,
            WsEntry::Lower(j) => m + j,
            WsEntry::Upper(j) => m + dim + j,
        }
    }
}

pub(crate) enum AsRun {
    Optimal { x: Vec<f64>, active_rows: Vec<usize> },
    IterLimit,
}

/// Growing Cholesky factor of the working-set Gram matrix.
struct Chol {
    n: usize,
    /// Packed lower triangle, row i at offset i(i+1)/2.
    l: Vec<f64>,
}

impl Chol {
    fn new() -> Self {
        Chol { n: 0, l: Vec::new() }
    }

    fn clear(&mut self) {
        self.n = 0;
        self.l.clear();
    }

    /// Extends the factor by one row given the new Gram column and diagonal.
    /// Returns false (leaving the factor unchanged) when the new row is
    /// numerically dependent on the current working set.
    fn try_extend(&mut self, col: &[f64], diag: f64) -> bool {
        debug_assert_eq!(col.len(), self.n);
        let mut z = vec![0.0; self.n];
        for i in 0..self.n {
            let off = i * (i + 1) / 2;
            let mut acc = col[i];
            for k in 0..i {
                acc -= self.l[off + k] * z[k];
            }
            z[i] = acc / self.l[off + i];
        }
        let d2 = diag - z.iter().map(|v| v * v).sum::<f64>();
        if !(d2 > 1e-12 * diag.max(1e-300)) {
            return false;
        }
        self.l.extend_from_slice(&z);
        self.l.push(crate::math::sqrt(d2));
        self.n += 1;
        true
    }

    /// Solves `L Lᵀ μ = rhs` in place.
    fn solve(&self, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.n);
        for i in 0..self.n {
            let off = i * (i + 1) / 2;
            let mut acc = rhs[i];
            for k in 0..i {
                acc -= self.l[off + k] * rhs[k];
            }
            rhs[i] = acc / self.l[off + i];
        }
        for i in (0..self.n).rev() {
            let mut acc = rhs[i];
            for k in i + 1..self.n {
                acc -= self.l[k * (k + 1) / 2 + i] * rhs[k];
            }
            rhs[i] = acc / self.l[i * (i + 1) / 2 + i];
        }
    }
}

pub(crate) struct Engine<'a> {
    dim: usize,
    m: usize,
    rows: &'a RowMat,
    rhs: &'a [f64],
    support: &'a [Vec<u32>],
    dinv: Vec<f64>,
    target: &'a [f64],
    lower: &'a [f64],
    upper: &'a [f64],
    x: Vec<f64>,
    ws: Vec<WsEntry>,
    in_ws_row: Vec<bool>,
    in_ws_lower: Vec<bool>,
    in_ws_upper: Vec<bool>,
    chol: Chol,
}

impl<'a> Engine<'a> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        rows: &'a RowMat,
        rhs: &'a [f64],
        support: &'a [Vec<u32>],
        weights: &[f64],
        target: &'a [f64],
        lower: &'a [f64],
        upper: &'a [f64],
        start: Vec<f64>,
    ) -> Self {
        let dim = rows.ncols();
        let m = rows.nrows();
        let dinv = weights.iter().map(|&w| 1.0 / (2.0 * w)).collect();
        Engine {
            dim,
            m,
            rows,
            rhs,
            support,
            dinv,
            target,
            lower,
            upper,
            x: start,
            ws: Vec::new(),
            in_ws_row: vec![false; m],
            in_ws_lower: vec![false; dim],
            in_ws_upper: vec![false; dim],
            chol: Chol::new(),
        }
    }

    /// D-weighted inner product of two constraint normals.
    fn gram(&self, a: WsEntry, b: WsEntry) -> f64 {
        use WsEntry::*;
        match (a, b) {
            (Row(r), Row(s)) => {
                let (short, long) = if self.support[r].len() <= self.support[s].len() {
                    (r, s)
                } else {
                    (s, r)
                };
                let rl = self.rows.row(long);
                let rs = self.rows.row(short);
                self.support[short]
                    .iter()
                    .map(|&k| {
                        let k = k as usize;
                        rs[k] * self.dinv[k] * rl[k]
                    })
                    .sum()
            }
            (Row(r), Lower(j)) | (Lower(j), Row(r)) => -self.rows.get(r, j) * self.dinv[j],
            (Row(r), Upper(j)) | (Upper(j), Row(r)) => self.rows.get(r, j) * self.dinv[j],
            (Lower(j), Lower(k)) | (Upper(j), Upper(k)) => {
                if j == k {
                    self.dinv[j]
                } else {
                    0.0
                }
            }
            (Lower(j), Upper(k)) | (Upper(j), Lower(k)) => {
                if j == k {
                    -self.dinv[j]
                } else {
                    0.0
                }
            }
        }
    }

    fn dot_x(&self, e: WsEntry, v: &[f64]) -> f64 {
        match e {
            WsEntry::Row(r) => {
                let row = self.rows.row(r);
                self.support[r].iter().map(|&k| row[k as usize] * v[k as usize]).sum()
            }
            WsEntry::Lower(j) => -v[j],
            WsEntry::Upper(j) => v[j],
        }
    }

    fn mark(&mut self, e: WsEntry, on: bool) {
        match e {
            WsEntry::Row(r) => self.in_ws_row[r] = on,
            WsEntry::Lower(j) => self.in_ws_lower[j] = on,
            WsEntry::Upper(j) => self.in_ws_upper[j] = on,
        }
    }

    fn try_add(&mut self, e: WsEntry) -> bool {
        let col: Vec<f64> = self.ws.iter().map(|&f| self.gram(f, e)).collect();
        let diag = self.gram(e, e);
        if self.chol.try_extend(&col, diag) {
            self.ws.push(e);
            self.mark(e, true);
            true
        } else {
            false
        }
    }

    fn drop_entry(&mut self, idx: usize) -> bool {
        let e = self.ws.remove(idx);
        self.mark(e, false);
        let entries = self.ws.clone();
        self.ws.clear();
        self.chol.clear();
        for f in entries {
            self.mark(f, false);
            if !self.try_add(f) {
                return false;
            }
        }
        true
    }

    /// Seeds the working set with constraints tight at the start point.
    pub(crate) fn seed_working_set(&mut self) {
        let scale = 1.0 + inf_norm(&self.x);
        for j in 0..self.dim {
            if self.lower[j].is_finite() && self.x[j] - self.lower[j] <= TIGHT_TOL * scale {
                self.x[j] = self.lower[j];
                self.try_add(WsEntry::Lower(j));
            } else if self.upper[j].is_finite() && self.upper[j] - self.x[j] <= TIGHT_TOL * scale {
                self.x[j] = self.upper[j];
                self.try_add(WsEntry::Upper(j));
            }
        }
        for r in 0..self.m {
            let resid = self.dot_x(WsEntry::Row(r), &self.x) - self.rhs[r];
            if resid.abs() <= TIGHT_TOL * (1.0 + self.rhs[r].abs()) {
                self.try_add(WsEntry::Row(r));
            }
        }
    }

    pub(crate) fn run(mut self, max_iter: usize) -> AsRun {
        let mut p = vec![0.0; self.dim];
        for _ in 0..max_iter {
            // Equality-constrained step on the working set.
            let mut mu: Vec<f64> = self
                .ws
                .iter()
                .map(|&e| {
                    let mut acc = 0.0;
                    match e {
                        WsEntry::Row(r) => {
                            let row = self.rows.row(r);
                            for &k in &self.support[r] {
                                let k = k as usize;
                                acc += row[k] * (self.target[k] - self.x[k]);
                            }
                        }
                        WsEntry::Lower(j) => acc = -(self.target[j] - self.x[j]),
                        WsEntry::Upper(j) => acc = self.target[j] - self.x[j],
                    }
                    acc
                })
                .collect();
            self.chol.solve(&mut mu);

            for k in 0..self.dim {
                p[k] = self.target[k] - self.x[k];
            }
            for (i, &e) in self.ws.iter().enumerate() {
                let c = mu[i];
                if c == 0.0 {
                    continue;
                }
                match e {
                    WsEntry::Row(r) => {
                        let row = self.rows.row(r);
                        for &k in &self.support[r] {
                            let k = k as usize;
                            p[k] -= c * row[k] * self.dinv[k];
                        }
                    }
                    WsEntry::Lower(j) => p[j] += c * self.dinv[j],
                    WsEntry::Upper(j) => p[j] -= c * self.dinv[j],
                }
            }

            let step_scale = 1.0 + inf_norm(&self.x);
            if inf_norm(&p) <= 1e-10 * step_scale {
                // Stationary on the working set: check multiplier signs.
                let mut worst: Option<(usize, usize)> = None; // (bland, ws idx)
                for (i, (&e, &mui)) in self.ws.iter().zip(&mu).enumerate() {
                    if mui < -DUAL_TOL {
                        let b = e.bland(self.m, self.dim);
                        if worst.map_or(true, |(wb, _)| b < wb) {
                            worst = Some((b, i));
                        }
                    }
                }
                match worst {
                    None => {
                        let mut active: Vec<usize> = self
                            .ws
                            .iter()
                            .filter_map(|&e| match e {
                                WsEntry::Row(r) => Some(r),
                                _ => None,
                            })
                            .collect();
                        active.sort_unstable();
                        return AsRun::Optimal { x: self.x, active_rows: active };
                    }
                    Some((_, idx)) => {
                        if !self.drop_entry(idx) {
                            return AsRun::IterLimit;
                        }
                        continue;
                    }
                }
            }

            // Ratio test against constraints outside the working set. A
            // candidate wins on a strictly smaller step, or on a tied step
            // with a smaller Bland index.
            fn wins(a: f64, bland: usize, alpha: f64, best_bland: usize) -> bool {
                let tol = RATIO_TIE * (1.0 + alpha);
                a < alpha - tol || ((a - alpha).abs() <= tol && bland < best_bland)
            }
            let mut alpha = 1.0;
            let mut blocker: Option<WsEntry> = None;
            let mut blocker_bland = usize::MAX;
            for r in 0..self.m {
                if self.in_ws_row[r] {
                    continue;
                }
                let e = WsEntry::Row(r);
                let den = self.dot_x(e, &p);
                if den > DIR_TOL {
                    let a = ((self.rhs[r] - self.dot_x(e, &self.x)) / den).max(0.0);
                    let b = e.bland(self.m, self.dim);
                    if wins(a, b, alpha, blocker_bland) {
                        alpha = a;
                        blocker = Some(e);
                        blocker_bland = b;
                    }
                }
            }
            for j in 0..self.dim {
                let (e, num, den) = if p[j] < -DIR_TOL
                    && self.lower[j].is_finite()
                    && !self.in_ws_lower[j]
                {
                    (WsEntry::Lower(j), self.x[j] - self.lower[j], -p[j])
                } else if p[j] > DIR_TOL && self.upper[j].is_finite() && !self.in_ws_upper[j] {
                    (WsEntry::Upper(j), self.upper[j] - self.x[j], p[j])
                } else {
                    continue;
                };
                let a = (num / den).max(0.0);
                let b = e.bland(self.m, self.dim);
                if wins(a, b, alpha, blocker_bland) {
                    alpha = a;
                    blocker = Some(e);
                    blocker_bland = b;
                }
            }

            for k in 0..self.dim {
                self.x[k] += alpha * p[k];
            }
            if let Some(e) = blocker {
                // Pin box entries exactly onto the bound they blocked at.
                match e {
                    WsEntry::Lower(j) => self.x[j] = self.lower[j],
                    WsEntry::Upper(j) => self.x[j] = self.upper[j],
                    WsEntry::Row(_) => {}
                }
                if !self.try_add(e) {
                    // A blocking constraint is independent of the working set
                    // in exact arithmetic; failure here means the iterate is
                    // numerically stuck.
                    return AsRun::IterLimit;
                }
            }
        }
        AsRun::IterLimit
    }
}
