use super::SphericalDesign;
use crate::error::{Error, Result};

fn double_factorial_odd(n: i64) -> f64 {
    // (2k-1)!! for n = 2k-1, with (-1)!! = 1
    let mut v = 1.0;
    let mut k = n;
    while k > 1 {
        v *= k as f64;
        k -= 2;
    }
    v
}

/// `∫ u1^{2p} u2^{2q} u3^{2r} σ(du)` under the uniform probability measure.
pub fn sphere_moment(p: u32, q: u32, r: u32) -> f64 {
    let (p, q, r) = (p as i64, q as i64, r as i64);
    double_factorial_odd(2 * p - 1)
        * double_factorial_odd(2 * q - 1)
        * double_factorial_odd(2 * r - 1)
        / double_factorial_odd(2 * (p + q + r) + 1)
}

/// Uniform sphere average of `u1^a u2^b u3^c`; zero if any exponent is odd.
pub fn monomial_moment(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        0.0
    } else {
        sphere_moment(a / 2, b / 2, c / 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub passed: bool,
    pub max_violation: f64,
    /// Exponents of the worst monomial.
    pub worst: (u32, u32, u32),
    pub monomials_checked: usize,
}

pub fn verify_t_design(
    design: &SphericalDesign,
    t: u32,
    tol: f64,
    even_only: bool,
) -> DesignReport {
    let n = design.points.len() as f64;
    let mut max_violation: f64 = 0.0;
    let mut worst = (0, 0, 0);
    let mut count = 0;
    for deg in 1..=t {
        if even_only && deg % 2 == 1 {
            continue;
        }
        for a in 0..=deg {
            for b in 0..=deg - a {
                let c = deg - a - b;
                let avg = design
                    .points
                    .iter()
                    .map(|p| p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
                    .sum::<f64>()
                    / n;
                let v = (avg - monomial_moment(a, b, c)).abs();
                count += 1;
                if v > max_violation {
                    max_violation = v;
                    worst = (a, b, c);
                }
            }
        }
    }
    DesignReport {
        passed: max_violation <= tol,
        max_violation,
        worst,
        monomials_checked: count,
    }
}

/// Keeps the first point of every antipodal pair.
pub fn halve_antipodal(design: &SphericalDesign) -> Result<SphericalDesign> {
    const PAIR_TOL: f64 = 1e-8;
    let pts = &design.points;
    let mut used = vec![false; pts.len()];
    let mut out = Vec::new();
    for i in 0..pts.len() {
        if used[i] {
            continue;
        }
        let partner = (i + 1..pts.len())
            .find(|&j| !used[j] && (0..3).all(|k| (pts[i][k] + pts[j][k]).abs() <= PAIR_TOL));
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
                out.push(pts[i]);
            }
            None => return Err(Error::Unpaired(i)),
        }
    }
    Ok(SphericalDesign {
        points: out,
        order: design.order,
        antipodal: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, stream};

    #[test]
    fn moment_examples() {
        assert!((sphere_moment(1, 0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((sphere_moment(2, 0, 0) - 0.2).abs() < 1e-15);
        assert!((sphere_moment(1, 1, 0) - 1.0 / 15.0).abs() < 1e-15);
        assert!((sphere_moment(1, 1, 1) - 1.0 / 105.0).abs() < 1e-15);
        assert_eq!(monomial_moment(1, 2, 0), 0.0);
        assert_eq!(sphere_moment(0, 0, 0), 1.0);
    }

    #[test]
    fn moments_match_monte_carlo() {
        let mut rng = stream(21, 0);
        let n = 200_000;
        let mut acc = [0.0; 3];
        for _ in 0..n {
            let v = [normal(&mut rng), normal(&mut rng), normal(&mut rng)];
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let u = [v[0] / r, v[1] / r, v[2] / r];
            acc[0] += u[0].powi(4);
            acc[1] += u[0].powi(2) * u[1].powi(2);
            acc[2] += u[0].powi(2) * u[1].powi(2) * u[2].powi(2);
        }
        let exact = [
            sphere_moment(2, 0, 0),
            sphere_moment(1, 1, 0),
            sphere_moment(1, 1, 1),
        ];
        for k in 0..3 {
            assert!(
                (acc[k] / n as f64 - exact[k]).abs() < 0.03 * exact[k],
                "{k}"
            );
        }
    }

    #[test]
    fn octahedron_is_three_design() {
        let pts = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let d = SphericalDesign::new(pts, 3, true).unwrap();
        assert!(verify_t_design(&d, 3, 1e-14, false).passed);
        assert!(!verify_t_design(&d, 4, 1e-3, false).passed);
        let h = halve_antipodal(&d).unwrap();
        assert_eq!(h.len(), 3);
        assert!(verify_t_design(&h, 3, 1e-14, true).passed);
    }

    #[test]
    fn random_points_fail() {
        let mut rng = stream(22, 0);
        let pts: Vec<[f64; 3]> = (0..3)
            .map(|_| {
                let v = [normal(&mut rng), normal(&mut rng), normal(&mut rng)];
                let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / r, v[1] / r, v[2] / r]
            })
            .collect();
        let d = SphericalDesign::new(pts, 0, false).unwrap();
        assert!(verify_t_design(&d, 4, 1e-4, false).max_violation > 1e-2);
    }

    #[test]
    fn unpaired_point_is_reported() {
        let d = SphericalDesign::new(
            vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            0,
            false,
        )
        .unwrap();
        assert_eq!(halve_antipodal(&d), Err(Error::Unpaired(2)));
    }
}
