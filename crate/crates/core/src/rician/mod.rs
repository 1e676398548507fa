//! Rician magnitude model for diffusion measurements: likelihood, simulation,
//! observed information and maximum-likelihood tensor fitting.

mod fit;
mod io;

pub use fit::{loglin_init, mle_fit, FitOptions, TensorFit};
pub use io::{read_dataset, write_dataset, DatasetMeta};

use nalgebra::DMatrix;
use rand::Rng;

use crate::design::{a_vector, GradientScheme};
use crate::error::{Error, Result};
use crate::rng::normal;
use crate::special::{bessel_ratio, log_bessel_i0};
use crate::symmat::SymMat;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    pub b: f64,
    pub u: [f64; 3],
    pub y: f64,
}

impl Acquisition {
    pub fn g(&self) -> [f64; 3] {
        let s = self.b.sqrt();
        [s * self.u[0], s * self.u[1], s * self.u[2]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicianDataset {
    pub acquisitions: Vec<Acquisition>,
    pub eta2: f64,
    pub meta: Option<DatasetMeta>,
}

impl RicianDataset {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta2 > 0.0) {
            return Err(Error::InvalidInput("eta2 must be positive".into()));
        }
        if let Some(a) = self.acquisitions.iter().find(|a| !(a.y >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "negative or missing magnitude {}",
                a.y
            )));
        }
        Ok(())
    }
}

/// `ρ exp(-g D gᵀ)`.
pub fn signal(g: &[f64; 3], d: &SymMat, rho: f64) -> f64 {
    rho * (-d.quad_form(g)).exp()
}

pub fn rician_logpdf(y: f64, s: f64, eta2: f64) -> f64 {
    if y <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (y / eta2).ln() - (y * y + s * s) / (2.0 * eta2) + log_bessel_i0(y * s / eta2)
}

/// Exact Rician draw `√((S + ηZ1)² + (ηZ2)²)`.
pub fn sample_rician<R: Rng + ?Sized>(s: f64, eta: f64, rng: &mut R) -> f64 {
    let a = s + eta * normal(rng);
    let b = eta * normal(rng);
    a.hypot(b)
}

pub fn simulate_dataset<R: Rng + ?Sized>(
    scheme: &GradientScheme,
    d: &SymMat,
    rho: f64,
    eta2: f64,
    rng: &mut R,
) -> Result<RicianDataset> {
    if !(rho > 0.0 && eta2 > 0.0) {
        return Err(Error::InvalidInput("rho and eta2 must be positive".into()));
    }
    let eta = eta2.sqrt();
    let acquisitions = scheme
        .acquisitions()
        .into_iter()
        .map(|(b, u)| {
            let mut a = Acquisition { b, u, y: 0.0 };
            a.y = sample_rician(signal(&a.g(), d, rho), eta, rng);
            a
        })
        .collect();
    Ok(RicianDataset {
        acquisitions,
        eta2,
        meta: Some(DatasetMeta {
            eta2,
            rho,
            d_bar: d.vec().to_vec(),
            seed: None,
        }),
    })
}

pub fn loglik(ds: &RicianDataset, d: &SymMat, rho: f64) -> f64 {
    ds.acquisitions
        .iter()
        .map(|a| rician_logpdf(a.y, signal(&a.g(), d, rho), ds.eta2))
        .sum()
}

/// Gradient of the log-likelihood in `(vec D, ρ)`.
pub fn score(ds: &RicianDataset, d: &SymMat, rho: f64) -> [f64; 7] {
    let mut out = [0.0; 7];
    for acq in &ds.acquisitions {
        let g = acq.g();
        let s = signal(&g, d, rho);
        let dl_ds = (-s + acq.y * bessel_ratio(acq.y * s / ds.eta2)) / ds.eta2;
        let a = a_vector(&g);
        for k in 0..6 {
            out[k] -= dl_ds * s * a[k];
        }
        out[6] += dl_ds * s / rho;
    }
    out
}

/// Negative Hessian of the log-likelihood in vec(D).
pub fn observed_information(ds: &RicianDataset, d: &SymMat, rho: f64) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(6, 6);
    for acq in &ds.acquisitions {
        let g = acq.g();
        let s = signal(&g, d, rho);
        let r = bessel_ratio(acq.y * s / ds.eta2);
        let y2 = acq.y * acq.y / ds.eta2;
        let c = s * s / ds.eta2 * (2.0 + y2 * (r * r - 1.0));
        let a = a_vector(&g);
        for i in 0..6 {
            for k in 0..6 {
                j[(i, k)] += c * a[i] * a[k];
            }
        }
    }
    j
}
