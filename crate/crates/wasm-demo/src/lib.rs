//! Browser bindings for a few interactive views of the library.

use serde_json::json;
use wasm_bindgen::prelude::*;

use isomat::design::{builtin_scheme, fisher_information, isotropy_check};
use isomat::rng::stream;
use isomat::special::chi2_cdf;
use isomat::sphericity::tau_statistics;
use isomat::symmat::{spectral_decompose, IsotropicModel, Sampler, SymMat, SIGN_TOL};

fn js_err<E: std::fmt::Display>(e: E) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn sampler(mu: f64, lambda: f64) -> Result<Sampler, JsValue> {
    IsotropicModel::new(3, mu, lambda)
        .and_then(Sampler::new)
        .map_err(js_err)
}

/// Ordered eigenvalues of `n` draws around `mean` (three numbers per draw).
#[wasm_bindgen]
pub fn eigenvalue_samples(
    mu: f64,
    lambda: f64,
    mean: &[f64],
    n: u32,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    if mean.len() != 3 {
        return Err(JsValue::from_str("mean spectrum needs three values"));
    }
    let s = sampler(mu, lambda)?;
    let m = SymMat::diag(mean);
    let mut out = Vec::with_capacity(3 * n as usize);
    for i in 0..n {
        let d = s.sample(&m, &mut stream(seed, i as u64));
        out.extend(spectral_decompose(&d, SIGN_TOL).gamma);
    }
    Ok(out)
}

/// Histogram of τ2 under a spherical mean with the χ²₅ bin probabilities,
/// as JSON `{edges, counts, expected}`.
#[wasm_bindgen]
pub fn tau2_null_histogram(
    mu: f64,
    lambda: f64,
    n: u32,
    bins: u32,
    seed: u64,
) -> Result<String, JsValue> {
    let s = sampler(mu, lambda)?;
    let bins = bins.clamp(5, 200) as usize;
    let hi = 20.0;
    let width = hi / bins as f64;
    let mut counts = vec![0u32; bins];
    let mean = SymMat::identity(3);
    for i in 0..n {
        let d = s.sample(&mean, &mut stream(seed, i as u64));
        let g = spectral_decompose(&d, SIGN_TOL).gamma;
        let t = tau_statistics(&g, mu, 1.0).map_err(js_err)?.tau2;
        if t < hi {
            counts[(t / width) as usize] += 1;
        }
    }
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * width).collect();
    let expected: Vec<f64> = edges
        .windows(2)
        .map(|w| n as f64 * (chi2_cdf(5.0, w[1]) - chi2_cdf(5.0, w[0])))
        .collect();
    Ok(json!({ "edges": edges, "counts": counts, "expected": expected }).to_string())
}

/// Fisher information summary of a bundled scheme at a spherical tensor,
/// as JSON `{mu_bar, isotropic, residual, covariance}`.
#[wasm_bindgen]
pub fn design_fisher(
    scheme: &str,
    diffusivity: f64,
    rho: f64,
    eta2: f64,
) -> Result<String, JsValue> {
    let scheme = builtin_scheme(scheme).map_err(js_err)?;
    let d = SymMat::scaled_identity(3, diffusivity);
    let info = fisher_information(&scheme, &d, rho, eta2.sqrt()).map_err(js_err)?;
    let report = isotropy_check(&info.total, 1e-3);
    let cov = info
        .total
        .clone()
        .try_inverse()
        .ok_or_else(|| JsValue::from_str("information matrix is singular"))?;
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|i| (0..6).map(|j| cov[(i, j)]).collect())
        .collect();
    Ok(json!({
        "acquisitions": info.n_acquisitions,
        "mu_bar": report.mu_bar,
        "isotropic": report.isotropic,
        "residual": report.residual,
        "covariance": rows,
    })
    .to_string())
}
