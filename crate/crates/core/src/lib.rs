//! Distribution theory for eigenvalues and eigenvectors of symmetric random
//! matrices with isotropic Gaussian noise, plus diffusion-tensor experiment
//! design, Rician simulation and maximum-likelihood tensor fitting.

pub mod asymptotics;
pub mod design;
pub mod eigen_laws;
pub mod error;
pub mod gof;
#[cfg(feature = "cli")]
pub mod harness;
pub mod quad;
pub mod rician;
pub mod rng;
pub mod special;
pub mod sphericity;
pub mod symmat;

pub use error::{Error, Result};
