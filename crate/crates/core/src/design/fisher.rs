use nalgebra::DMatrix;

use super::weight::weight_w;
use super::GradientScheme;
use crate::error::{Error, Result};
use crate::symmat::{precision_matrix, IsotropicModel, SymMat};

/// `a(g)` with `g D gᵀ = a · vec(D)`: entries `(2 - δij) g_i g_j` in vec order.
pub fn a_vector(g: &[f64; 3]) -> [f64; 6] {
    [
        g[0] * g[0],
        g[1] * g[1],
        g[2] * g[2],
        2.0 * g[0] * g[1],
        2.0 * g[0] * g[2],
        2.0 * g[1] * g[2],
    ]
}

/// `A(1, 1)`: the isotropic precision pattern the information is compared with.
pub fn reference_pattern() -> DMatrix<f64> {
    precision_matrix(&IsotropicModel::new(3, 1.0, 1.0).expect("valid model"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherInfo {
    /// Per-acquisition information `J = total / M`.
    pub j: DMatrix<f64>,
    pub total: DMatrix<f64>,
    pub n_acquisitions: usize,
    /// Isotropy scalar of the total information, when isotropic.
    pub mu_bar: Option<f64>,
}

/// Fisher information for vec(D) at fixed ρ and η.
pub fn fisher_information(
    scheme: &GradientScheme,
    d: &SymMat,
    rho: f64,
    eta: f64,
) -> Result<FisherInfo> {
    if !(rho > 0.0 && eta > 0.0) {
        return Err(Error::InvalidInput("rho and eta must be positive".into()));
    }
    if d.dim() != 3 {
        return Err(Error::InvalidInput("diffusion tensors are 3x3".into()));
    }
    let mut total = DMatrix::zeros(6, 6);
    for g in scheme.gradients() {
        if g == [0.0; 3] {
            continue;
        }
        let a = a_vector(&g);
        let s = rho * (-d.quad_form(&g)).exp();
        let w = weight_w(s / eta);
        for i in 0..6 {
            for k in 0..6 {
                total[(i, k)] += w * a[i] * a[k];
            }
        }
    }
    let m = scheme.n_acquisitions();
    let report = isotropy_check(&total, 1e-3);
    Ok(FisherInfo {
        j: &total / m as f64,
        total,
        n_acquisitions: m,
        mu_bar: report.isotropic.then_some(report.mu_bar),
    })
}

/// Joint information for `(vec D, ρ)` when ρ is estimated too; b₀ rows
/// contribute through the ρ coordinate.
pub fn fisher_information_joint(
    scheme: &GradientScheme,
    d: &SymMat,
    rho: f64,
    eta: f64,
) -> Result<DMatrix<f64>> {
    if !(rho > 0.0 && eta > 0.0) {
        return Err(Error::InvalidInput("rho and eta must be positive".into()));
    }
    let mut total = DMatrix::zeros(7, 7);
    for g in scheme.gradients() {
        let a = a_vector(&g);
        let w = weight_w(rho * (-d.quad_form(&g)).exp() / eta);
        let v = [a[0], a[1], a[2], a[3], a[4], a[5], -1.0 / rho];
        for i in 0..7 {
            for k in 0..7 {
                total[(i, k)] += w * v[i] * v[k];
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyReport {
    pub isotropic: bool,
    /// Least-squares scalar with `J ≈ μ̄ A(1,1)`.
    pub mu_bar: f64,
    /// `‖J - μ̄ A(1,1)‖_F / ‖J‖_F`.
    pub residual: f64,
}

pub fn isotropy_check(j: &DMatrix<f64>, rel_tol: f64) -> IsotropyReport {
    let a = reference_pattern();
    let mu_bar = j.dot(&a) / a.dot(&a);
    let norm = j.norm();
    let residual = if norm == 0.0 {
        0.0
    } else {
        (j - &a * mu_bar).norm() / norm
    };
    IsotropyReport {
        isotropic: norm > 0.0 && residual <= rel_tol,
        mu_bar,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{builtin_design, halve_antipodal, Shell, SphericalDesign};
    use crate::rng::{normal, stream};

    fn icosahedron() -> SphericalDesign {
        builtin_design("icosahedron12").unwrap()
    }

    fn single_shell(design: SphericalDesign, b: f64) -> GradientScheme {
        GradientScheme::new(vec![Shell { b, design }], 1).unwrap()
    }

    #[test]
    fn joint_information_contains_tensor_block() {
        let scheme = crate::design::builtin_scheme("design1").unwrap();
        let d = SymMat::scaled_identity(3, 6.622e-4);
        let f = fisher_information(&scheme, &d, 110.046, 8.0).unwrap();
        let j = fisher_information_joint(&scheme, &d, 110.046, 8.0).unwrap();
        assert!((j.view((0, 0), (6, 6)) - &f.total).norm() < 1e-12 * f.total.norm());
        // the b0 row alone carries w(ρ/η)/ρ²
        let b0 = weight_w(110.046 / 8.0) / 110.046f64.powi(2);
        assert!(j[(6, 6)] > b0);
        assert!(j.clone().try_inverse().is_some());
    }

    #[test]
    fn shear_entries_are_four_times_cross_diagonal() {
        let mut rng = stream(31, 0);
        let pts: Vec<[f64; 3]> = (0..9)
            .map(|_| [normal(&mut rng), normal(&mut rng), normal(&mut rng)])
            .collect();
        let scheme = single_shell(SphericalDesign::normalized(pts, 0, false).unwrap(), 1000.0);
        let d = SymMat::from_vec(3, vec![9e-4, 5e-4, 3e-4, 1e-4, -2e-4, 0.5e-4]).unwrap();
        let f = fisher_information(&scheme, &d, 100.0, 8.0).unwrap();
        for (shear, i, j) in [(3, 0, 1), (4, 0, 2), (5, 1, 2)] {
            let x = f.j[(shear, shear)];
            let y = 4.0 * f.j[(i, j)];
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn mu_bar_formula_for_spherical_tensor() {
        let half = halve_antipodal(&icosahedron()).unwrap();
        let bs = [500.0, 1000.0, 2000.0];
        let shells = bs
            .iter()
            .map(|&b| Shell {
                b,
                design: half.clone(),
            })
            .collect();
        let scheme = GradientScheme::new(shells, 2).unwrap();
        let (rho, eta, g) = (110.0, 8.0, 7e-4);
        let f = fisher_information(&scheme, &SymMat::scaled_identity(3, g), rho, eta).unwrap();
        let expect: f64 = bs
            .iter()
            .map(|b| weight_w(rho * (-g * b).exp() / eta) * b * b * 6.0)
            .sum::<f64>()
            / 15.0;
        let mu = f.mu_bar.expect("isotropic");
        assert!((mu - expect).abs() < 1e-10 * expect);
        assert!((&f.j * scheme.n_acquisitions() as f64 - &f.total).norm() < 1e-9 * f.total.norm());
    }

    #[test]
    fn isotropy_examples() {
        let a = reference_pattern();
        let r = isotropy_check(&(&a * 2.5), 1e-3);
        assert!(r.isotropic && (r.mu_bar - 2.5).abs() < 1e-14);
        assert!(!isotropy_check(&DMatrix::identity(6, 6), 1e-3).isotropic);
    }

    #[test]
    fn permutation_and_replication() {
        let base = single_shell(halve_antipodal(&icosahedron()).unwrap(), 1000.0);
        let d = SymMat::from_vec(3, vec![9e-4, 5e-4, 3e-4, 1e-4, -2e-4, 0.5e-4]).unwrap();
        let f1 = fisher_information(&base, &d, 100.0, 8.0).unwrap();
        let mut rev = base.clone();
        rev.shells[0].design.points.reverse();
        let f2 = fisher_information(&rev, &d, 100.0, 8.0).unwrap();
        assert!((&f1.total - &f2.total).norm() < 1e-9 * f1.total.norm());
        let tripled = GradientScheme::new(vec![base.shells[0].clone(); 3], 3).unwrap();
        let f3 = fisher_information(&tripled, &d, 100.0, 8.0).unwrap();
        assert!((&f3.total - &f1.total * 3.0).norm() < 1e-9 * f3.total.norm());
    }

    #[test]
    fn uniform_design_maximizes_determinant() {
        let ico = icosahedron();
        let d = SymMat::scaled_identity(3, 7e-4);
        let det = |design: SphericalDesign| {
            fisher_information(&single_shell(design, 1000.0), &d, 100.0, 8.0)
                .unwrap()
                .j
                .determinant()
        };
        let best = det(ico.clone());
        let mut rng = stream(32, 0);
        for _ in 0..20 {
            let pts = ico
                .points
                .iter()
                .map(|p| {
                    [
                        p[0] + 0.15 * normal(&mut rng),
                        p[1] + 0.15 * normal(&mut rng),
                        p[2] + 0.15 * normal(&mut rng),
                    ]
                })
                .collect();
            assert!(best >= det(SphericalDesign::normalized(pts, 0, false).unwrap()));
        }
    }
}
