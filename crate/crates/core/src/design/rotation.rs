use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{rotate, SphericalDesign};
use crate::eigen_laws::euler_rotation;
use crate::error::{Error, Result};

const GRID: usize = 12;
const HALVINGS: usize = 4;

/// Minimum over cross-shell pairs of `arccos|⟨u, v⟩|`.
pub fn min_cross_distance(shells: &[Vec<[f64; 3]>]) -> f64 {
    let mut best_dot: f64 = 0.0;
    for i in 0..shells.len() {
        for j in i + 1..shells.len() {
            best_dot = best_dot.max(max_abs_dot(&shells[i], &shells[j]));
        }
    }
    best_dot.min(1.0).acos()
}

fn max_abs_dot(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let mut m: f64 = 0.0;
    for u in a {
        for v in b {
            m = m.max((u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).abs());
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct RotationResult {
    /// Euler angles (φ, θ, ψ) per shell; shell 0 stays at the identity.
    pub angles: Vec<[f64; 3]>,
    pub rotations: Vec<DMatrix<f64>>,
    pub initial_objective: f64,
    pub objective: f64,
    /// Objective after every sweep, starting with the initial value.
    pub history: Vec<f64>,
    pub sweeps: usize,
}

/// Greedy per-shell Euler-grid search maximizing the minimal cross-shell
/// geodesic distance. Only strict improvements are accepted.
pub fn optimize_shell_rotations<R: Rng + ?Sized>(
    designs: &[SphericalDesign],
    max_iters: usize,
    rng: &mut R,
) -> Result<RotationResult> {
    let k = designs.len();
    if k < 2 {
        return Err(Error::InvalidInput("need at least two shells".into()));
    }
    let mut angles = vec![[0.0; 3]; k];
    let mut current: Vec<Vec<[f64; 3]>> = designs.iter().map(|d| d.points.clone()).collect();
    let initial = min_cross_distance(&current);
    let mut history = vec![initial];
    let mut sweeps = 0;
    let mut order: Vec<usize> = (1..k).collect();
    for _ in 0..max_iters {
        sweeps += 1;
        order.shuffle(rng);
        let mut improved = false;
        for &s in &order {
            // objective restricted to pairs touching shell s, other pairs fixed
            let fixed_dot = pairwise_fixed(&current, s);
            let eval = |ang: &[f64; 3]| {
                let r = euler_rotation(ang[0], ang[1], ang[2]);
                let pts: Vec<[f64; 3]> = designs[s].points.iter().map(|p| rotate(&r, p)).collect();
                let mut d = fixed_dot;
                for (j, other) in current.iter().enumerate() {
                    if j != s {
                        d = d.max(max_abs_dot(&pts, other));
                    }
                }
                d
            };
            let mut best_ang = angles[s];
            let mut best_dot = eval(&best_ang);
            let start_dot = best_dot;
            let mut span = [
                2.0 * std::f64::consts::PI,
                std::f64::consts::PI,
                2.0 * std::f64::consts::PI,
            ];
            for _ in 0..=HALVINGS {
                let center = best_ang;
                for a in 0..GRID {
                    for b in 0..GRID {
                        for c in 0..GRID {
                            let off = |i: usize, w: f64| w * ((i as f64 + 0.5) / GRID as f64 - 0.5);
                            let cand = [
                                center[0] + off(a, span[0]),
                                center[1] + off(b, span[1]),
                                center[2] + off(c, span[2]),
                            ];
                            let v = eval(&cand);
                            if v < best_dot {
                                best_dot = v;
                                best_ang = cand;
                            }
                        }
                    }
                }
                for w in &mut span {
                    *w *= 0.5;
                }
            }
            if best_dot < start_dot {
                improved = true;
                angles[s] = best_ang;
                let r = euler_rotation(best_ang[0], best_ang[1], best_ang[2]);
                current[s] = designs[s].points.iter().map(|p| rotate(&r, p)).collect();
            }
        }
        history.push(min_cross_distance(&current));
        if !improved {
            break;
        }
    }
    let rotations = angles
        .iter()
        .map(|a| euler_rotation(a[0], a[1], a[2]))
        .collect();
    Ok(RotationResult {
        angles,
        rotations,
        initial_objective: initial,
        objective: *history.last().unwrap(),
        history,
        sweeps,
    })
}

fn pairwise_fixed(shells: &[Vec<[f64; 3]>], skip: usize) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..shells.len() {
        for j in i + 1..shells.len() {
            if i != skip && j != skip {
                d = d.max(max_abs_dot(&shells[i], &shells[j]));
            }
        }
    }
    d
}
