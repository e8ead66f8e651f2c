//! Seeded generators for randomized suites.

use fecbf_core::cbf::SafetyParams;
use fecbf_core::compatibility::{build_centralized_system, sign_consistency_holds};
use fecbf_core::kinematics::{UavLimits, UavState};
use fecbf_core::qp::QpProblem;
use fecbf_core::{RowMat, Vec3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal sample (Box-Muller; keeps the dependency list short).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        let v: f64 = rng.random_range(0.0..core::f64::consts::TAU);
        let g = (-2.0 * u.ln()).sqrt() * v.cos();
        if g.is_finite() {
            return g;
        }
    }
}

/// Dense Gaussian inequality system `C u ≤ b`.
pub fn random_system(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> (RowMat, Vec<f64>) {
    let mut c = RowMat::with_cols(cols);
    let mut row = vec![0.0; cols];
    let mut b = Vec::with_capacity(rows);
    for _ in 0..rows {
        for v in row.iter_mut() {
            *v = gaussian(rng);
        }
        c.push_row(&row);
        b.push(gaussian(rng));
    }
    (c, b)
}

/// Random box-plus-inequality QP sized so that active-subset enumeration
/// stays within `budget` candidate subsets. Roughly 15% of the instances
/// carry a deliberate contradiction and are infeasible by construction.
pub fn random_qp(rng: &mut ChaCha8Rng, budget: u64) -> QpProblem {
    let dim = rng.random_range(3..=12);
    let finite_bounds = rng.random_range(0..=4.min(dim));
    let contradict = rng.random_range(0.0..1.0) < 0.15;

    let mut m = rng.random_range(0..=20);
    let box_rows = 2 * finite_bounds; // lower and upper both enumerate
    while m > 0 && count_subsets(m + box_rows + 2, dim) > budget {
        m -= 1;
    }

    let mut a = RowMat::with_cols(dim);
    let mut b = Vec::new();
    let mut row = vec![0.0; dim];
    for _ in 0..m {
        for v in row.iter_mut() {
            *v = gaussian(rng);
        }
        a.push_row(&row);
        b.push(2.0 * gaussian(rng) + 0.5);
    }
    if contradict {
        for v in row.iter_mut() {
            *v = gaussian(rng);
        }
        let beta = gaussian(rng);
        let gap = 0.5 + rng.random_range(0.0..2.0);
        a.push_row(&row);
        b.push(beta);
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        a.push_row(&neg);
        b.push(-beta - gap);
    }

    let mut lower = vec![f64::NEG_INFINITY; dim];
    let mut upper = vec![f64::INFINITY; dim];
    for j in 0..finite_bounds {
        lower[j] = rng.random_range(-4.0..-1.0);
        upper[j] = rng.random_range(1.0..4.0);
    }
    let target = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
    let weights = (0..dim).map(|_| rng.random_range(0.5..3.0)).collect();
    QpProblem { dim, target, weights, ineq_a: a, ineq_b: b, lower, upper }
}

fn count_subsets(n: usize, k: usize) -> u64 {
    let mut total: u64 = 0;
    let mut c: u64 = 1;
    for i in 0..=k.min(n) {
        total = total.saturating_add(c);
        c = match c.checked_mul((n - i) as u64) {
            Some(v) => v / (i + 1) as u64,
            None => return u64::MAX,
        };
    }
    total
}

/// Random dispersed fleet with valid states (positive speeds).
pub fn random_fleet(rng: &mut ChaCha8Rng, n: usize) -> (Vec<UavState>, Vec<UavLimits>) {
    let mut states = Vec::with_capacity(n);
    let mut limits = Vec::with_capacity(n);
    for _ in 0..n {
        let lim = UavLimits::with_v_max(rng.random_range(2.0..3.0));
        let state = UavState::new(
            Vec3::new(
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
                rng.random_range(-50.0..50.0),
            ),
            rng.random_range(lim.v_min..lim.v_max),
            rng.random_range(-1.2..1.2),
            rng.random_range(0.0..core::f64::consts::TAU),
        );
        states.push(state);
        limits.push(lim);
    }
    (states, limits)
}

/// Attitude grid used by the sign-consistent search.
fn attitude_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for ti in 0..13 {
        let pitch = -1.4 + 2.8 * ti as f64 / 12.0;
        for pi in 0..28 {
            let yaw = core::f64::consts::TAU * pi as f64 / 28.0;
            grid.push((pitch, yaw));
        }
    }
    grid
}

/// Builds a configuration satisfying the sign-consistency hypothesis: every
/// relative vector `s_i − s_j` lies strictly inside one octant of vehicle
/// `i`'s local frame.
///
/// Positions are sampled (a jittered, randomly rotated simplex for `n = 4`,
/// uniform boxes for smaller `n`), then each vehicle's attitude is searched
/// over a grid for a frame whose octant contains all of its relative
/// position vectors with margin. The margin (3.5 m) exceeds the largest
/// possible virtual-state shift `ζ (v_i + v_j) ≤ 3 m`, so the sign pattern
/// survives the move from positions to virtual states; the result is
/// verified exactly before being returned.
pub fn sign_consistent_fleet(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_tries: usize,
) -> Option<(Vec<UavState>, Vec<UavLimits>)> {
    assert!((2..=4).contains(&n), "search supports 2..=4 vehicles");
    const MARGIN: f64 = 3.5;
    let grid = attitude_grid();
    let params = SafetyParams::default();

    'tries: for _ in 0..max_tries {
        // Positions.
        let positions: Vec<Vec3> = if n == 4 {
            let template = [
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(1.0, -1.0, -1.0),
                Vec3::new(-1.0, 1.0, -1.0),
                Vec3::new(-1.0, -1.0, 1.0),
            ];
            let rot = random_rotation(rng);
            template
                .iter()
                .map(|&v| {
                    let r = rot.mul_vec(v * 70.0);
                    r + Vec3::new(
                        rng.random_range(-8.0..8.0),
                        rng.random_range(-8.0..8.0),
                        rng.random_range(-8.0..8.0),
                    )
                })
                .collect()
        } else {
            (0..n)
                .map(|_| {
                    Vec3::new(
                        rng.random_range(-60.0..60.0),
                        rng.random_range(-60.0..60.0),
                        rng.random_range(-60.0..60.0),
                    )
                })
                .collect()
        };

        // Attitude per vehicle: a frame whose octant holds every Δp with margin.
        let mut attitudes = Vec::with_capacity(n);
        for i in 0..n {
            let diffs: Vec<Vec3> =
                (0..n).filter(|&j| j != i).map(|j| positions[i] - positions[j]).collect();
            let mut found = None;
            'grid: for &(pitch, yaw) in &grid {
                let wt = fecbf_core::cbf::normalized_frame(pitch, yaw);
                for c in 0..3 {
                    let axis = wt.col(c);
                    let mut pos = 0usize;
                    let mut neg = 0usize;
                    for d in &diffs {
                        let v = axis.dot(*d);
                        if v > MARGIN {
                            pos += 1;
                        } else if v < -MARGIN {
                            neg += 1;
                        } else {
                            continue 'grid;
                        }
                    }
                    if pos != 0 && neg != 0 {
                        continue 'grid;
                    }
                }
                found = Some((pitch, yaw));
                break;
            }
            match found {
                Some(att) => attitudes.push(att),
                None => continue 'tries,
            }
        }

        let mut states = Vec::with_capacity(n);
        let mut limits = Vec::with_capacity(n);
        for i in 0..n {
            let lim = UavLimits::with_v_max(3.0);
            states.push(UavState::new(
                positions[i],
                rng.random_range(2.0..3.0),
                attitudes[i].0,
                attitudes[i].1,
            ));
            limits.push(lim);
        }

        // Exact verification on the virtual-state system.
        let sys = build_centralized_system(&states, &limits, &params).expect("n >= 2");
        if sign_consistency_holds(&sys, n).overall {
            return Some((states, limits));
        }
    }
    None
}

fn random_rotation(rng: &mut ChaCha8Rng) -> fecbf_core::Mat3 {
    // Gram-Schmidt on Gaussian vectors.
    loop {
        let a = Vec3::new(gaussian(rng), gaussian(rng), gaussian(rng));
        let Some(e0) = a.normalized(1e-9) else { continue };
        let b = Vec3::new(gaussian(rng), gaussian(rng), gaussian(rng));
        let Some(e1) = (b - e0 * e0.dot(b)).normalized(1e-9) else { continue };
        let e2 = Vec3::new(
            e0.y * e1.z - e0.z * e1.y,
            e0.z * e1.x - e0.x * e1.z,
            e0.x * e1.y - e0.y * e1.x,
        );
        return fecbf_core::Mat3::from_columns(e0, e1, e2);
    }
}
