//! Nominal navigation input, the decentralized FECBF-QP, and the
//! DRCBF / VOCBF baselines, with infeasibility fallback.
//!
//! All controllers are safety filters: they perturb the nominal input as
//! little as possible subject to their constraint set.
//!
//! - DRCBF: per-neighbor half-responsibility barrier rows
//!   `−k_ijᵀ u_i ≤ ξ_ij / 2`.
//! - VOCBF: the same rows plus, for neighbors whose relative velocity sits
//!   inside the velocity-obstacle cone, a linearized row pushing the
//!   one-step relative velocity out through the nearest cone face.
//! - FECBF: the barrier rows plus slacked sign-consistency rows
//!   `l_ijᵀ u_i − ε_ij ≤ δ_ij`, slack norm weighted by λ in the objective.

use alloc::vec;
use alloc::vec::Vec;

use crate::cbf::{kinematic_jacobian, normalized_frame, pairwise_coefficients, SafetyParams};
use crate::kinematics::{clamp_input, velocity_vector, ControlInput, UavLimits, UavState};
use crate::linalg::{norm2, Mat3, RowMat, Vec3};
use crate::math::{asin, atan2, cos, sin, sqrt, wrap_angle_signed};
use crate::qp::{self, Phase1Outcome, QpProblem, QpStatus};
use crate::sign_consistency::{cone_axis, sc_coefficients, worst_case_sdot, NeighborHistory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControllerKind {
    Fecbf,
    Drcbf,
    Vocbf,
    Centralized,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FallbackMode {
    /// Maximal braking with zero attitude rates.
    #[default]
    Brake,
    /// Re-issue the last feasible input (brakes when none exists yet).
    HoldLast,
}

/// Gains of the proportional line-of-sight navigation law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NominalGains {
    pub yaw: f64,
    pub pitch: f64,
    pub speed: f64,
}

impl Default for NominalGains {
    fn default() -> Self {
        NominalGains { yaw: 1.0, pitch: 1.0, speed: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerConfig {
    pub kind: ControllerKind,
    /// Slack weight λ in the FECBF objective.
    pub lambda: f64,
    /// Half-apex angle β of the sign-consistency cone [rad].
    pub beta: f64,
    /// Sensing range defining the neighbor set; `None` is unlimited.
    pub neighbor_radius: Option<f64>,
    /// Worst-case input box half-width as a fraction of each channel range.
    pub u_tol_frac: f64,
    pub fallback: FallbackMode,
    pub gains: NominalGains,
    pub qp_max_iter: usize,
    /// Control period used by the VOCBF one-step velocity linearization [s].
    pub step_dt: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            kind: ControllerKind::Fecbf,
            lambda: 3.0,
            beta: 7.0 * core::f64::consts::PI / 24.0,
            neighbor_radius: None,
            u_tol_frac: 0.5,
            fallback: FallbackMode::default(),
            gains: NominalGains::default(),
            qp_max_iter: 200,
            step_dt: 0.1,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.lambda > 0.0) {
            return Err("lambda must be > 0");
        }
        if !(self.beta > 0.0 && self.beta < core::f64::consts::FRAC_PI_2) {
            return Err("beta must lie in (0, pi/2)");
        }
        if let Some(r) = self.neighbor_radius {
            if !(r > 0.0) {
                return Err("neighbor radius must be > 0 or unlimited");
            }
        }
        if !(self.u_tol_frac >= 0.0) {
            return Err("u_tol_frac must be >= 0");
        }
        if !(self.step_dt > 0.0) {
            return Err("step_dt must be > 0");
        }
        Ok(())
    }
}

/// What a vehicle knows about one neighbor when it computes its input.
#[derive(Clone, Copy)]
pub struct Neighbor<'a> {
    pub state: &'a UavState,
    pub limits: &'a UavLimits,
    pub history: &'a NeighborHistory,
}

/// Output of one control solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlDecision {
    pub input: ControlInput,
    /// False when the QP had no solution and the fallback was issued.
    pub feasible: bool,
    /// `‖ε‖` of the slack vector; zero for controllers without slacks.
    pub slack_norm: f64,
    /// Wall-clock solve time, filled in by the caller when it times the
    /// call; the pure controller itself has no clock.
    pub solve_time: f64,
}

impl ControlDecision {
    fn feasible(input: ControlInput, slack_norm: f64) -> Self {
        ControlDecision { input, feasible: true, slack_norm, solve_time: 0.0 }
    }

    fn fallback(input: ControlInput) -> Self {
        ControlDecision { input, feasible: false, slack_norm: 0.0, solve_time: 0.0 }
    }
}

/// Proportional line-of-sight law: steer yaw and pitch toward the goal
/// bearing and recover speed toward `v_max`, all clamped to the limits.
pub fn nominal_input(
    state: &UavState,
    goal: Vec3,
    limits: &UavLimits,
    gains: &NominalGains,
) -> ControlInput {
    let los = goal - state.position;
    let horiz = sqrt(los.x * los.x + los.y * los.y);
    let yaw_des = atan2(los.y, los.x);
    let pitch_des = atan2(los.z, horiz);
    let raw = ControlInput::new(
        gains.speed * (limits.v_max - state.speed),
        gains.pitch * (pitch_des - state.pitch),
        gains.yaw * wrap_angle_signed(yaw_des - state.yaw),
    );
    clamp_input(&raw, limits)
}

/// Input issued when the safety QP is infeasible.
pub fn fallback_input(
    last_feasible: Option<ControlInput>,
    mode: FallbackMode,
    limits: &UavLimits,
) -> ControlInput {
    let brake = ControlInput::new(limits.accel_min, 0.0, 0.0);
    match mode {
        FallbackMode::Brake => brake,
        FallbackMode::HoldLast => last_feasible.unwrap_or(brake),
    }
}

/// Decentralized FECBF-QP over `(u_i, ε_i)`.
pub fn fecbf_control(
    state: &UavState,
    goal: Vec3,
    neighbors: &[Neighbor<'_>],
    config: &ControllerConfig,
    params: &SafetyParams,
    limits: &UavLimits,
    last_input: Option<ControlInput>,
) -> ControlDecision {
    // Box narrowed so one integrator step cannot saturate speed or pitch;
    // within it the QP's one-step model is exact.
    let elim = crate::kinematics::effective_limits(state, limits, config.step_dt);
    let u_p = clamp_input(&nominal_input(state, goal, limits, &config.gains), &elim);
    let nbs = in_range(state, neighbors, config.neighbor_radius);
    if nbs.is_empty() {
        return ControlDecision::feasible(u_p, 0.0);
    }

    let (hard, hard_b) = barrier_rows(state, &nbs, limits, params);
    let u0 = match feasible_u(state, u_p, &hard, &hard_b, &elim, config, last_input) {
        Ok(u0) => u0,
        Err(decision) => return decision,
    };

    // Sign-consistency rows; each carries its own slack column.
    let d_axis = cone_axis(state, goal);
    let wt = normalized_frame(state.pitch, state.yaw);
    let mut sc_rows = Vec::new();
    for nb in &nbs {
        let Some(sdot) = worst_case_sdot(nb.history, d_axis, &wt, nb.limits, params, config.u_tol_frac)
        else {
            continue;
        };
        if let Some(row) = sc_coefficients(state, nb.state, sdot, d_axis, params, config.beta) {
            sc_rows.push(row);
        }
    }

    let n_sc = sc_rows.len();
    let dim = 3 + n_sc;
    let mut a = RowMat::with_cols(dim);
    let mut b = Vec::with_capacity(hard_b.len() + n_sc);
    let mut buf = vec![0.0; dim];
    for (i, &rhs) in hard_b.iter().enumerate() {
        buf.fill(0.0);
        buf[..3].copy_from_slice(hard.row(i));
        a.push_row(&buf);
        b.push(rhs);
    }
    for (k, row) in sc_rows.iter().enumerate() {
        buf.fill(0.0);
        buf[..3].copy_from_slice(&row.l.as_array());
        buf[3 + k] = -1.0;
        a.push_row(&buf);
        b.push(row.delta);
    }

    let mut target = vec![0.0; dim];
    target[..3].copy_from_slice(&u_p.as_array());
    let mut weights = vec![config.lambda; dim];
    weights[..3].fill(1.0);
    let (in_lo, in_hi) = limits.input_bounds();
    let mut lower = vec![0.0; dim];
    let mut upper = vec![f64::INFINITY; dim];
    lower[..3].copy_from_slice(&in_lo);
    upper[..3].copy_from_slice(&in_hi);

    // Feasible start: the barrier-feasible input plus the exact slack each
    // cone row needs there.
    let mut start = vec![0.0; dim];
    start[..3].copy_from_slice(&u0);
    let u0v = Vec3::from_slice(&u0);
    for (k, row) in sc_rows.iter().enumerate() {
        start[3 + k] = (row.l.dot(u0v) - row.delta).max(0.0);
    }

    let problem = QpProblem { dim, target, weights, ineq_a: a, ineq_b: b, lower, upper };
    let opts = qp::SolveOptions { max_iter: config.qp_max_iter, start: Some(start) };
    match qp::solve_with(&problem, &opts) {
        Ok(out) if out.status == QpStatus::Optimal => {
            let sol = out.solution.unwrap();
            let input = clamp_input(&ControlInput::from_slice(&sol[..3]), limits);
            ControlDecision::feasible(input, norm2(&sol[3..]))
        }
        Ok(out) => {
            log::debug!("fecbf qp did not converge: {:?}", out.status);
            ControlDecision::fallback(fallback_input(last_input, config.fallback, limits))
        }
        Err(e) => {
            log::warn!("fecbf qp error: {e}");
            ControlDecision::fallback(fallback_input(last_input, config.fallback, limits))
        }
    }
}

/// Half-responsibility barrier QP without slacks.
pub fn drcbf_control(
    state: &UavState,
    goal: Vec3,
    neighbors: &[Neighbor<'_>],
    config: &ControllerConfig,
    params: &SafetyParams,
    limits: &UavLimits,
    last_input: Option<ControlInput>,
) -> ControlDecision {
    let u_p = nominal_input(state, goal, limits, &config.gains);
    let nbs = in_range(state, neighbors, config.neighbor_radius);
    if nbs.is_empty() {
        return ControlDecision::feasible(u_p, 0.0);
    }
    let (hard, hard_b) = barrier_rows(state, &nbs, limits, params);
    solve_input_qp(state, u_p, hard, hard_b, limits, config, last_input)
}

/// Barrier rows plus velocity-obstacle rows for neighbors whose relative
/// velocity lies inside the collision cone.
pub fn vocbf_control(
    state: &UavState,
    goal: Vec3,
    neighbors: &[Neighbor<'_>],
    config: &ControllerConfig,
    params: &SafetyParams,
    limits: &UavLimits,
    last_input: Option<ControlInput>,
) -> ControlDecision {
    let u_p = nominal_input(state, goal, limits, &config.gains);
    let nbs = in_range(state, neighbors, config.neighbor_radius);
    if nbs.is_empty() {
        return ControlDecision::feasible(u_p, 0.0);
    }
    let (mut hard, mut hard_b) = barrier_rows(state, &nbs, limits, params);
    if let Ok(w) = kinematic_jacobian(state) {
        for nb in &nbs {
            let r_sum = limits.safety_radius + nb.limits.safety_radius;
            if let Some((row, rhs)) =
                velocity_obstacle_row(state, &w, nb.state, r_sum, config.step_dt)
            {
                hard.push_row(&row);
                hard_b.push(rhs);
            }
        }
    }
    solve_input_qp(state, u_p, hard, hard_b, limits, config, last_input)
}

/// Linearized velocity-obstacle half-space for one neighbor.
///
/// The collision cone has its apex at the neighbor's velocity, axis along
/// `p_j − p_i`, and half-angle `asin(min(1, (r_i + r_j) / ‖p_j − p_i‖))`.
/// When the relative velocity is inside, the one-step velocity
/// `v_rel + dt W u` is pushed out through the nearest face; overlapping
/// protected volumes degrade to a pure separation row. Ties with the
/// relative velocity exactly on the axis break toward the face whose
/// outward normal has the larger z-component, keeping vertical evasion
/// available.
fn velocity_obstacle_row(
    state: &UavState,
    w: &Mat3,
    neighbor: &UavState,
    r_sum: f64,
    dt: f64,
) -> Option<([f64; 3], f64)> {
    let p_rel = neighbor.position - state.position;
    let dist = p_rel.norm();
    let v_rel = velocity_vector(state) - velocity_vector(neighbor);
    if dist <= r_sum {
        let axis = p_rel.normalized(1e-12)?;
        let a = w.tr_mul_vec(axis) * dt;
        return Some((a.as_array(), -v_rel.dot(axis)));
    }
    let half = asin((r_sum / dist).min(1.0));
    let axis = p_rel * (1.0 / dist);
    let vnorm = v_rel.norm();
    if vnorm <= 1e-12 {
        return None;
    }
    if v_rel.dot(axis) < vnorm * cos(half) {
        return None; // already outside the cone
    }
    let e = match (v_rel - axis * v_rel.dot(axis)).normalized(1e-9) {
        Some(e) => e,
        None => {
            let up = Vec3::new(0.0, 0.0, 1.0);
            match (up - axis * axis.z).normalized(1e-9) {
                Some(e) => e,
                None => (Vec3::new(1.0, 0.0, 0.0) - axis * axis.x).normalized(1e-9)?,
            }
        }
    };
    let n_out = e * cos(half) - axis * sin(half);
    let a = w.tr_mul_vec(n_out) * (-dt);
    Some((a.as_array(), v_rel.dot(n_out)))
}

fn in_range<'a, 'b>(
    state: &UavState,
    neighbors: &'b [Neighbor<'a>],
    radius: Option<f64>,
) -> Vec<&'b Neighbor<'a>> {
    neighbors
        .iter()
        .filter(|nb| match radius {
            Some(r) => (nb.state.position - state.position).norm() <= r,
            None => true,
        })
        .collect()
}

/// Half-responsibility barrier rows `−k_ijᵀ u ≤ ξ_ij / 2` for each neighbor.
fn barrier_rows(
    state: &UavState,
    nbs: &[&Neighbor<'_>],
    limits: &UavLimits,
    params: &SafetyParams,
) -> (RowMat, Vec<f64>) {
    let mut rows = RowMat::with_cols(3);
    let mut rhs = Vec::with_capacity(nbs.len());
    for nb in nbs {
        match pairwise_coefficients(state, nb.state, limits, nb.limits, params) {
            Ok(pc) => {
                rows.push_row(&(-pc.k_ij).as_array());
                rhs.push(pc.xi / 2.0);
            }
            Err(e) => log::debug!("barrier row skipped: {e}"),
        }
    }
    (rows, rhs)
}

/// Finds an input inside `elim`'s box satisfying the hard rows, starting
/// from the nominal. `Err` means the rows plus the box are empty (or the
/// check could not complete) and the caller should issue the fallback.
fn feasible_u(
    u_p: ControlInput,
    hard: &RowMat,
    hard_b: &[f64],
    elim: &UavLimits,
) -> Result<[f64; 3], ()> {
    let u0 = u_p.as_array();
    let worst = (0..hard.nrows())
        .map(|i| crate::linalg::dot(hard.row(i), &u0) - hard_b[i])
        .fold(0.0_f64, f64::max);
    if worst <= 0.0 {
        return Ok(u0);
    }
    let (lo, hi) = elim.input_bounds();
    match qp::phase1_feasibility(hard, hard_b, &lo, &hi) {
        Ok(Phase1Outcome::Feasible { point }) => Ok([
            point[0].clamp(lo[0], hi[0]),
            point[1].clamp(lo[1], hi[1]),
            point[2].clamp(lo[2], hi[2]),
        ]),
        Ok(Phase1Outcome::Infeasible { .. }) => Err(()),
        Err(e) => {
            log::warn!("phase-1 undecided, falling back: {e}");
            Err(())
        }
    }
}

/// Solves the 3-dimensional input QP shared by DRCBF and VOCBF.
fn solve_input_qp(
    u_p: ControlInput,
    hard: RowMat,
    hard_b: Vec<f64>,
    limits: &UavLimits,
    elim: &UavLimits,
    config: &ControllerConfig,
    last_input: Option<ControlInput>,
) -> ControlDecision {
    let fallback = || {
        ControlDecision::fallback(fallback_input(last_input, config.fallback, limits))
    };
    let Ok(u0) = feasible_u(u_p, &hard, &hard_b, elim) else {
        return fallback();
    };
    let (lo, hi) = elim.input_bounds();
    let problem = QpProblem {
        dim: 3,
        target: u_p.as_array().to_vec(),
        weights: vec![1.0; 3],
        ineq_a: hard,
        ineq_b: hard_b,
        lower: lo.to_vec(),
        upper: hi.to_vec(),
    };
    let opts = qp::SolveOptions { max_iter: config.qp_max_iter, start: Some(u0.to_vec()) };
    match qp::solve_with(&problem, &opts) {
        Ok(out) if out.status == QpStatus::Optimal => {
            let sol = out.solution.unwrap();
            ControlDecision::feasible(clamp_input(&ControlInput::from_slice(&sol), limits), 0.0)
        }
        Ok(out) => {
            if out.status != QpStatus::Infeasible {
                log::debug!("input qp did not converge");
            }
            fallback()
        }
        Err(e) => {
            log::warn!("input qp error: {e}");
            fallback()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign_consistency::NeighborHistory;

    fn state(p: [f64; 3], v: f64, pitch: f64, yaw: f64) -> UavState {
        UavState::new(Vec3::new(p[0], p[1], p[2]), v, pitch, yaw)
    }

    fn history_of(state: &UavState) -> NeighborHistory {
        let mut h = NeighborHistory::new(3);
        let mut prev = *state;
        prev.position = prev.position - velocity_vector(state) * 0.1;
        h.push(-0.1, prev).unwrap();
        h.push(0.0, *state).unwrap();
        h
    }

    #[test]
    fn nominal_aligned_equilibrium() {
        let limits = UavLimits::with_v_max(3.0);
        let s = state([0.0; 3], 3.0, 0.0, 0.0);
        let u = nominal_input(&s, Vec3::new(100.0, 0.0, 0.0), &limits, &NominalGains::default());
        assert!(u.accel.abs() < 1e-12);
        assert!(u.pitch_rate.abs() < 1e-12);
        assert!(u.yaw_rate.abs() < 1e-12);
    }

    #[test]
    fn nominal_hard_left_saturates_yaw_rate() {
        let limits = UavLimits::with_v_max(3.0);
        let s = state([0.0; 3], 3.0, 0.0, 0.0);
        let u = nominal_input(&s, Vec3::new(0.0, 100.0, 0.0), &limits, &NominalGains::default());
        assert_eq!(u.yaw_rate, limits.yaw_rate_max);
    }

    #[test]
    fn nominal_recovers_speed_from_floor() {
        let limits = UavLimits::with_v_max(3.0);
        let s = state([0.0; 3], limits.v_min, 0.0, 0.0);
        let u = nominal_input(&s, Vec3::new(100.0, 0.0, 0.0), &limits, &NominalGains::default());
        assert!(u.accel > 0.0);
    }

    #[test]
    fn fallback_modes() {
        let limits = UavLimits::with_v_max(3.0);
        let brake = fallback_input(None, FallbackMode::Brake, &limits);
        assert_eq!(brake, ControlInput::new(limits.accel_min, 0.0, 0.0));
        let held = ControlInput::new(0.2, 0.01, -0.02);
        assert_eq!(fallback_input(Some(held), FallbackMode::HoldLast, &limits), held);
        assert_eq!(fallback_input(None, FallbackMode::HoldLast, &limits), brake);
        let stored = fallback_input(Some(held), FallbackMode::Brake, &limits);
        assert_eq!(stored, brake);
    }

    #[test]
    fn no_neighbors_reduces_to_nominal() {
        let limits = UavLimits::with_v_max(3.0);
        let params = SafetyParams::default();
        let config = ControllerConfig::default();
        let s = state([0.0; 3], 2.0, 0.0, 0.0);
        let goal = Vec3::new(50.0, 80.0, 10.0);
        let u_p = nominal_input(&s, goal, &limits, &config.gains);
        for ctrl in [fecbf_control, drcbf_control, vocbf_control] {
            let d = ctrl(&s, goal, &[], &config, &params, &limits, None);
            assert!(d.feasible);
            assert_eq!(d.input, u_p);
            assert_eq!(d.slack_norm, 0.0);
        }
    }

    #[test]
    fn distant_aligned_neighbors_leave_nominal_unchanged() {
        // Neighbors far behind along the octant diagonal: the relative
        // vectors sit deep inside the cone, the barrier rows are slack, so
        // all controllers return exactly the nominal input with zero slack.
        // (The cone axis is the octant diagonal, so "exactly astern" would
        // already be 54.7° off-axis — outside β.)
        let limits = UavLimits::with_v_max(3.0);
        let params = SafetyParams::default();
        let config = ControllerConfig::default();
        let s = state([0.0; 3], 3.0, 0.0, 0.0);
        let goal = Vec3::new(1000.0, 50.0, 30.0);
        let n1 = state([-300.0, -295.0, -310.0], 2.0, 0.0, 0.0);
        let n2 = state([-400.0, -390.0, -405.0], 2.5, 0.0, 0.0);
        let (h1, h2) = (history_of(&n1), history_of(&n2));
        let neighbors = [
            Neighbor { state: &n1, limits: &limits, history: &h1 },
            Neighbor { state: &n2, limits: &limits, history: &h2 },
        ];
        let u_p = nominal_input(&s, goal, &limits, &config.gains);
        for ctrl in [fecbf_control, drcbf_control, vocbf_control] {
            let d = ctrl(&s, goal, &neighbors, &config, &params, &limits, None);
            assert!(d.feasible);
            assert!((d.input.accel - u_p.accel).abs() < 1e-8);
            assert!((d.input.pitch_rate - u_p.pitch_rate).abs() < 1e-8);
            assert!((d.input.yaw_rate - u_p.yaw_rate).abs() < 1e-8);
            assert!(d.slack_norm < 1e-8);
        }
    }

    #[test]
    fn near_conflict_satisfies_barrier_rows() {
        // Head-on pair inside the activation band (the barrier row is
        // violated by the nominal but still satisfiable): the returned input
        // must satisfy every hard row with margin ≥ −1e−8.
        let limits = UavLimits::with_v_max(3.0);
        let params = SafetyParams::default();
        let config = ControllerConfig::default();
        let s = state([0.0; 3], 2.5, 0.0, 0.0);
        let n = state([115.0, 0.5, 0.0], 2.5, 0.0, core::f64::consts::PI);
        let h = history_of(&n);
        let neighbors = [Neighbor { state: &n, limits: &limits, history: &h }];
        let goal = Vec3::new(900.0, 0.0, 0.0);
        let d = fecbf_control(&s, goal, &neighbors, &config, &params, &limits, None);
        assert!(d.feasible);
        let pc = pairwise_coefficients(&s, &n, &limits, &limits, &params).unwrap();
        // The nominal wants to accelerate; the active row must forbid that.
        let u_p = nominal_input(&s, goal, &limits, &config.gains);
        assert!(pc.k_ij.dot(Vec3::new(u_p.accel, u_p.pitch_rate, u_p.yaw_rate)) + pc.xi / 2.0 < 0.0);
        let u = Vec3::new(d.input.accel, d.input.pitch_rate, d.input.yaw_rate);
        let margin = pc.k_ij.dot(u) + pc.xi / 2.0;
        assert!(margin >= -1e-8, "barrier row violated: {margin}");
    }

    #[test]
    fn deep_conflict_falls_back() {
        // Dead head-on at short range: the half-responsibility row exceeds
        // the input authority, the QP is infeasible, and the fallback brakes.
        let limits = UavLimits::with_v_max(3.0);
        let params = SafetyParams::default();
        let config = ControllerConfig::default();
        let s = state([0.0; 3], 2.5, 0.0, 0.0);
        let n = state([20.0, 0.5, 0.0], 2.5, 0.0, core::f64::consts::PI);
        let h = history_of(&n);
        let neighbors = [Neighbor { state: &n, limits: &limits, history: &h }];
        let d = fecbf_control(&s, Vec3::new(900.0, 0.0, 0.0), &neighbors, &config, &params, &limits, None);
        assert!(!d.feasible);
        assert_eq!(d.input, ControlInput::new(limits.accel_min, 0.0, 0.0));
        assert_eq!(d.slack_norm, 0.0);
    }

    #[test]
    fn drcbf_halves_imply_pairwise_constraint() {
        // If both vehicles satisfy their half-responsibility rows, the full
        // pairwise constraint ḣ + κh ≥ 0 holds.
        let limits = UavLimits::with_v_max(3.0);
        let params = SafetyParams::default();
        let config = ControllerConfig { kind: ControllerKind::Drcbf, ..Default::default() };
        let a = state([0.0; 3], 2.5, 0.0, 0.0);
        let b = state([110.0, -0.3, 0.2], 2.5, 0.0, core::f64::consts::PI);
        let (ha, hb) = (history_of(&a), history_of(&b));
        let na = [Neighbor { state: &b, limits: &limits, history: &hb }];
        let nb = [Neighbor { state: &a, limits: &limits, history: &ha }];
        let da = drcbf_control(&a, Vec3::new(900.0, 0.0, 0.0), &na, &config, &params, &limits, None);
        let db = drcbf_control(&b, Vec3::new(-900.0, 0.0, 0.0), &nb, &config, &params, &limits, None);
        assert!(da.feasible && db.feasible);
        let pc = pairwise_coefficients(&a, &b, &limits, &limits, &params).unwrap();
        let ua = Vec3::new(da.input.accel, da.input.pitch_rate, da.input.yaw_rate);
        let ub = Vec3::new(db.input.accel, db.input.pitch_rate, db.input.yaw_rate);
        let total = pc.k_ij.dot(ua) + pc.k_ji.dot(ub) + pc.xi;
        assert!(total >= -1e-7, "pairwise constraint violated: {total}");
    }

    #[test]
    fn vocbf_outside_cone_matches_drcbf() {
        // Relative velocity outside every VO cone: no extra rows, identical
        // decisions.
        let limits = UavLimits::with_v_max(3.0);
        let params = SafetyParams::default();
        let config = ControllerConfig { kind: ControllerKind::Vocbf, ..Default::default() };
        let s = state([0.0; 3], 2.0, 0.0, 0.0);
        // Neighbor ahead but moving away faster: no closing velocity.
        let n = state([40.0, 10.0, 0.0], 3.0, 0.0, 0.3);
        let h = history_of(&n);
        let neighbors = [Neighbor { state: &n, limits: &limits, history: &h }];
        let goal = Vec3::new(600.0, 0.0, 0.0);
        let dv = vocbf_control(&s, goal, &neighbors, &config, &params, &limits, None);
        let dd = drcbf_control(&s, goal, &neighbors, &config, &params, &limits, None);
        assert_eq!(dv.input, dd.input);
    }

    #[test]
    fn vocbf_marginal_cone_entry_exits_after_step() {
        // Relative velocity just inside a narrow far-range cone: the extra
        // row is active, lateral input is commanded, and one step of the
        // returned input pushes the relative velocity back out through the
        // nearest face.
        let limits = UavLimits::with_v_max(3.0);
        let params = SafetyParams::default();
        let config = ControllerConfig { kind: ControllerKind::Vocbf, ..Default::default() };
        let dt = config.step_dt;
        let s = state([0.0; 3], 2.0, 0.0, 0.0);
        // 300 m ahead: half-angle asin(4/300) ≈ 0.76°; a 0.02 rad heading
        // offset keeps v_rel inside by a sliver the one-step input can fix.
        let n = state([300.0, 0.0, 0.0], 2.0, 0.0, core::f64::consts::PI + 0.02);
        let h = history_of(&n);
        let neighbors = [Neighbor { state: &n, limits: &limits, history: &h }];
        let goal = Vec3::new(600.0, 0.0, 0.0);

        let w = kinematic_jacobian(&s).unwrap();
        let r_sum = 2.0 * limits.safety_radius;
        let row = velocity_obstacle_row(&s, &w, &n, r_sum, dt);
        assert!(row.is_some(), "expected an active VO row");

        let d = vocbf_control(&s, goal, &neighbors, &config, &params, &limits, None);
        assert!(d.feasible);
        assert!(d.input.yaw_rate.abs() > 1e-4, "expected lateral evasion");
        let (a, rhs) = row.unwrap();
        let u = [d.input.accel, d.input.pitch_rate, d.input.yaw_rate];
        let lhs: f64 = a.iter().zip(&u).map(|(x, y)| x * y).sum();
        // The row encodes (v_rel + dt W u)·n̂ ≥ 0: satisfied means the
        // one-step relative velocity reaches the outside of the face.
        assert!(lhs <= rhs + 1e-8, "VO row violated: {lhs} > {rhs}");
    }

    #[test]
    fn vocbf_overlap_gives_separation_row() {
        let limits = UavLimits::with_v_max(3.0);
        let s = state([0.0; 3], 2.0, 0.0, 0.0);
        let n = state([3.0, 0.0, 0.0], 2.0, 0.0, core::f64::consts::PI);
        let w = kinematic_jacobian(&s).unwrap();
        let (a, rhs) = velocity_obstacle_row(&s, &w, &n, 4.0, 0.1).unwrap();
        // Separation form: dt (Wᵀâ)ᵀ u ≤ −v_rel·â with â = +x.
        let v_rel = velocity_vector(&s) - velocity_vector(&n);
        assert!((rhs + v_rel.x).abs() < 1e-12);
        let expect = w.tr_mul_vec(Vec3::new(1.0, 0.0, 0.0)) * 0.1;
        assert!((Vec3::from_slice(&a) - expect).norm() < 1e-12);
    }

    #[test]
    fn neighbor_radius_filters() {
        let limits = UavLimits::with_v_max(3.0);
        let params = SafetyParams::default();
        let config = ControllerConfig {
            neighbor_radius: Some(50.0),
            ..Default::default()
        };
        let s = state([0.0; 3], 2.0, 0.0, 0.0);
        // Close head-on conflict outside the sensing radius: invisible.
        let n = state([60.0, 0.0, 0.0], 2.0, 0.0, core::f64::consts::PI);
        let h = history_of(&n);
        let neighbors = [Neighbor { state: &n, limits: &limits, history: &h }];
        let goal = Vec3::new(600.0, 0.0, 0.0);
        let u_p = nominal_input(&s, goal, &limits, &config.gains);
        let d = fecbf_control(&s, goal, &neighbors, &config, &params, &limits, None);
        assert_eq!(d.input, u_p);
    }
}
