//! Gradient designs on the sphere, multi-shell schemes and the Fisher
//! information of Rician diffusion measurements.

mod fisher;
mod rotation;
mod schemes;
mod tdesign;
mod weight;

pub use fisher::{
    a_vector, fisher_information, fisher_information_joint, isotropy_check, reference_pattern,
    FisherInfo, IsotropyReport,
};
pub use rotation::{min_cross_distance, optimize_shell_rotations, RotationResult};
pub use schemes::{
    builtin_design, builtin_design_names, builtin_scheme, builtin_schemes, design4_shells,
    format_rotation_table, read_design, read_gradient_table, write_gradient_table, BuiltinDesign,
    DATA_DIR_ENV, DESIGN2_3_BVALUES, DESIGN5_BVALUES,
};
pub use tdesign::{halve_antipodal, monomial_moment, sphere_moment, verify_t_design, DesignReport};
pub use weight::{weight_w, weight_w_direct, WeightCache};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalDesign {
    pub points: Vec<[f64; 3]>,
    /// Claimed strength; 0 when no claim is made.
    pub order: usize,
    pub antipodal: bool,
}

impl SphericalDesign {
    pub fn new(points: Vec<[f64; 3]>, order: usize, antipodal: bool) -> Result<Self> {
        for p in &points {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if (n - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "point {p:?} is not a unit vector (norm {n})"
                )));
            }
        }
        Ok(Self {
            points,
            order,
            antipodal,
        })
    }

    /// Normalizes each point; used for tables printed to a few decimals.
    pub fn normalized(points: Vec<[f64; 3]>, order: usize, antipodal: bool) -> Result<Self> {
        let pts = points
            .into_iter()
            .map(|p| {
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                [p[0] / n, p[1] / n, p[2] / n]
            })
            .collect();
        Self::new(pts, order, antipodal)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn rotated(&self, r: &DMatrix<f64>) -> Self {
        let points = self.points.iter().map(|p| rotate(r, p)).collect();
        Self {
            points,
            order: self.order,
            antipodal: self.antipodal,
        }
    }
}

pub(crate) fn rotate(r: &DMatrix<f64>, p: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = r[(i, 0)] * p[0] + r[(i, 1)] * p[1] + r[(i, 2)] * p[2];
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub b: f64,
    pub design: SphericalDesign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientScheme {
    pub shells: Vec<Shell>,
    pub n_b0: usize,
}

impl GradientScheme {
    pub fn new(shells: Vec<Shell>, n_b0: usize) -> Result<Self> {
        for s in &shells {
            if !(s.b.is_finite() && s.b >= 0.0) {
                return Err(Error::InvalidInput(format!("invalid b-value {}", s.b)));
            }
        }
        Ok(Self { shells, n_b0 })
    }

    pub fn n_acquisitions(&self) -> usize {
        self.shells.iter().map(|s| s.design.len()).sum::<usize>() + self.n_b0
    }

    /// Flat list of (b, u) rows, b₀ rows first with u = 0.
    pub fn acquisitions(&self) -> Vec<(f64, [f64; 3])> {
        let mut out = vec![(0.0, [0.0; 3]); self.n_b0];
        for s in &self.shells {
            out.extend(s.design.points.iter().map(|p| (s.b, *p)));
        }
        out
    }

    /// Gradient vectors `g = √b u`.
    pub fn gradients(&self) -> Vec<[f64; 3]> {
        self.acquisitions()
            .into_iter()
            .map(|(b, u)| {
                let s = b.sqrt();
                [s * u[0], s * u[1], s * u[2]]
            })
            .collect()
    }

    /// Builds a scheme from flat rows, grouping equal b-values into shells.
    pub fn from_acquisitions(rows: &[(f64, [f64; 3])]) -> Result<Self> {
        let mut n_b0 = 0;
        let mut shells: Vec<Shell> = Vec::new();
        for &(b, u) in rows {
            if b == 0.0 {
                n_b0 += 1;
                continue;
            }
            let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            if !(n > 0.0) {
                return Err(Error::InvalidInput("zero direction with b > 0".into()));
            }
            let p = [u[0] / n, u[1] / n, u[2] / n];
            match shells.iter_mut().find(|s| s.b == b) {
                Some(s) => s.design.points.push(p),
                None => shells.push(Shell {
                    b,
                    design: SphericalDesign {
                        points: vec![p],
                        order: 0,
                        antipodal: false,
                    },
                }),
            }
        }
        Self::new(shells, n_b0)
    }
}
