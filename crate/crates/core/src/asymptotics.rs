//! Small-noise limit laws: eigenvalue clusters, the four 3-D regimes,
//! eigenvector fluctuations and the second-order HCIZ asymptotics.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::eigen_laws::{hciz, log_z_unit, HcizConfig};
use crate::error::{Error, Result};
use crate::special::ln_gamma;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStructure {
    /// ℓ0 = 0 < ℓ1 < … < ℓk = m.
    pub boundaries: Vec<usize>,
    pub sizes: Vec<usize>,
    pub representatives: Vec<f64>,
}

impl ClusterStructure {
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// Cluster index of each eigenvalue position.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (c, &s) in self.sizes.iter().enumerate() {
            out.extend(std::iter::repeat_n(c, s));
        }
        out
    }
}

pub fn default_cluster_tol(gbar: &[f64]) -> f64 {
    1e-9 * gbar.iter().fold(1f64, |a, x| a.max(x.abs()))
}

pub fn cluster(gbar: &[f64], cluster_tol: f64) -> ClusterStructure {
    let mut boundaries = vec![0];
    for i in 1..gbar.len() {
        if (gbar[i - 1] - gbar[i]).abs() > cluster_tol {
            boundaries.push(i);
        }
    }
    boundaries.push(gbar.len());
    let sizes = boundaries.windows(2).map(|w| w[1] - w[0]).collect();
    let representatives = boundaries[1..].iter().map(|&l| gbar[l - 1]).collect();
    ClusterStructure {
        boundaries,
        sizes,
        representatives,
    }
}

/// Joint Gaussian limit density of the cluster barycenters (rescaled).
pub fn barycenter_logdensity(xi: &[f64], sizes: &[usize], lambda: f64) -> Result<f64> {
    if xi.len() != sizes.len() {
        return Err(Error::InvalidInput(
            "one barycenter per cluster expected".into(),
        ));
    }
    let m: usize = sizes.iter().sum();
    let c = 1.0 + lambda * m as f64 / 2.0;
    if c <= 0.0 {
        return Err(Error::InvalidModel("lambda*m must exceed -2".into()));
    }
    let mut s = 0.5 * c.ln();
    let mut quad = 0.0;
    let mut lin = 0.0;
    for (&x, &mi) in xi.iter().zip(sizes) {
        let mf = mi as f64;
        s += 0.5 * (mf / PI).ln();
        quad += mf * x * x;
        lin += mf * x;
    }
    Ok(s - quad - 0.5 * lambda * lin * lin)
}

/// `E[X̃_i X̃_j] = (δ_ij/m_i - λ/(2+λm)) / 2`.
pub fn barycenter_covariance(sizes: &[usize], lambda: f64) -> DMatrix<f64> {
    let m: usize = sizes.iter().sum();
    let k = sizes.len();
    DMatrix::from_fn(k, k, |i, j| {
        let d = if i == j { 1.0 / sizes[i] as f64 } else { 0.0 };
        0.5 * (d - lambda / (2.0 + lambda * m as f64))
    })
}

/// Limit density of the within-cluster spread on the hyperplane Σζ = 0,
/// charted by the first `m_i - 1` coordinates.
pub fn within_cluster_logdensity(zeta: &[f64], mi: usize) -> Result<f64> {
    if mi < 2 || zeta.len() != mi - 1 {
        return Err(Error::InvalidInput(
            "expected m_i - 1 free coordinates with m_i >= 2".into(),
        ));
    }
    let mut full = zeta.to_vec();
    full.push(-zeta.iter().sum::<f64>());
    if full.windows(2).any(|w| w[0] <= w[1]) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut v = 0.0;
    for i in 0..mi {
        for j in i + 1..mi {
            v += (full[i] - full[j]).ln();
        }
    }
    Ok(log_z_unit(mi) + 0.5 * (PI * mi as f64).ln() - full.iter().map(|z| z * z).sum::<f64>() + v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime3D {
    Asymmetric,
    Prolate,
    Oblate,
    Isotropic,
}

impl Regime3D {
    pub fn name(&self) -> &'static str {
        match self {
            Regime3D::Asymmetric => "asymmetric",
            Regime3D::Prolate => "prolate",
            Regime3D::Oblate => "oblate",
            Regime3D::Isotropic => "isotropic",
        }
    }
}

pub fn regime_classify(gbar: &[f64], cluster_tol: f64) -> Result<Regime3D> {
    if gbar.len() != 3 {
        return Err(Error::InvalidInput("regimes are defined for m = 3".into()));
    }
    let c = cluster(gbar, cluster_tol);
    Ok(match c.sizes.as_slice() {
        [1, 1, 1] => Regime3D::Asymmetric,
        [1, 2] => Regime3D::Prolate,
        [2, 1] => Regime3D::Oblate,
        _ => Regime3D::Isotropic,
    })
}

fn gaussian2_log(x: f64, y: f64, mu: f64, lambda: f64) -> f64 {
    // precision [[2μ+λ, 2λ], [2λ, 4(μ+λ)]]
    (2.0 * mu * mu + 3.0 * mu * lambda).sqrt().ln()
        - PI.ln()
        - (mu + 0.5 * lambda) * x * x
        - 2.0 * (mu + lambda) * y * y
        - 2.0 * lambda * x * y
}

/// Half-gap `d > 0` law: `√τ`, τ ~ Exp(2μ), density `4μ d exp(-2μ d²)`.
fn gap_log(d: f64, mu: f64) -> f64 {
    if d <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (4.0 * mu * d).ln() - 2.0 * mu * d * d
}

/// Limit density of the ordered eigenvalues (γ1, γ2, γ3) in the regime
/// determined by the mean spectrum.
pub fn regime_logdensity(gamma: &[f64], gbar: &[f64], mu: f64, lambda: f64) -> Result<f64> {
    if gamma.len() != 3 {
        return Err(Error::InvalidInput("regimes are defined for m = 3".into()));
    }
    if gamma.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidInput(
            "gamma must be strictly descending".into(),
        ));
    }
    let regime = regime_classify(gbar, default_cluster_tol(gbar))?;
    Ok(match regime {
        Regime3D::Asymmetric => {
            let x: Vec<f64> = gamma.iter().zip(gbar).map(|(a, b)| a - b).collect();
            let s: f64 = x.iter().sum();
            let q: f64 = x.iter().map(|v| v * v).sum();
            (mu * (2.0 * mu + 3.0 * lambda).sqrt() / (PI.powf(1.5) * 2f64.sqrt())).ln()
                - mu * q
                - 0.5 * lambda * s * s
        }
        Regime3D::Prolate => {
            let r = 0.5 * (gamma[1] + gamma[2]);
            let d = 0.5 * (gamma[1] - gamma[2]);
            gaussian2_log(gamma[0] - gbar[0], r - gbar[1], mu, lambda)
                + gap_log(d, mu)
                + 0.5f64.ln()
        }
        Regime3D::Oblate => {
            let r = 0.5 * (gamma[0] + gamma[1]);
            let d = 0.5 * (gamma[0] - gamma[1]);
            gaussian2_log(gamma[2] - gbar[2], r - gbar[0], mu, lambda)
                + gap_log(d, mu)
                + 0.5f64.ln()
        }
        Regime3D::Isotropic => {
            let c = (gamma[0] + gamma[1] + gamma[2]) / 3.0;
            let prec = 6.0 * mu + 9.0 * lambda;
            let bary = 0.5 * (prec / (2.0 * PI)).ln() - 0.5 * prec * (c - gbar[0]).powi(2);
            let a = gamma[0] - c;
            let b = gamma[2] - c;
            let cond = 2.5 * (2.0 * mu).ln()
                + 0.5 * (3.0 / PI).ln()
                + ((gamma[0] - gamma[2]) * (gamma[0] - gamma[1]) * (gamma[1] - gamma[2])).ln()
                - 2.0 * mu * (a * a + b * b + a * b);
            bary + cond - 3f64.ln()
        }
    })
}

/// Variance of the Gaussian limit of `√a · Ŝ_ij`.
pub fn eigvec_fluct_variance(gbar_i: f64, gbar_j: f64) -> Result<f64> {
    if gbar_i == gbar_j {
        return Err(Error::Degenerate(
            "tied eigenvalues have no Gaussian eigenvector limit".into(),
        ));
    }
    Ok(0.25 / (gbar_i - gbar_j).powi(2))
}

fn polar_factor(b: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = b.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Logarithm of an orthogonal matrix close to the identity.
pub fn log_orthogonal(x: &DMatrix<f64>) -> DMatrix<f64> {
    let m = x.nrows();
    if m == 3 && x.determinant() > 0.0 {
        let c = ((x.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        let th = c.acos();
        let skew = (x - x.transpose()) * 0.5;
        if th < 1e-8 {
            return skew;
        }
        return skew * (th / th.sin());
    }
    let e = x - DMatrix::<f64>::identity(m, m);
    let mut term = e.clone();
    let mut out = e.clone();
    for k in 2..200 {
        term = &term * &e;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        out += &term * (sign / k as f64);
        if term.norm() < 1e-17 {
            break;
        }
    }
    (&out - out.transpose()) * 0.5
}

/// Splits `R = Ř exp(Ŝ)` where Ř is block diagonal over the clusters (polar
/// factor of each diagonal block) and Ŝ is skew symmetric.
pub fn split_rotation(
    r: &DMatrix<f64>,
    clusters: &ClusterStructure,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = r.nrows();
    let mut check = DMatrix::zeros(m, m);
    for w in clusters.boundaries.windows(2) {
        let (a, n) = (w[0], w[1] - w[0]);
        let blk = r.view((a, a), (n, n)).into_owned();
        check
            .view_mut((a, a), (n, n))
            .copy_from(&polar_factor(&blk));
    }
    let s = log_orthogonal(&(check.transpose() * r));
    (check, s)
}

/// Exponent of n in the second-order HCIZ asymptotics: `(m² - Σ m_i²)/4`.
pub fn hciz_n_exponent(clusters: &ClusterStructure) -> f64 {
    let m: usize = clusters.sizes.iter().sum();
    (m * m - clusters.sizes.iter().map(|s| s * s).sum::<usize>()) as f64 / 4.0
}

/// Predicted limit of `I_m(nγ, γ̄) exp(-n γ·γ̄) n^{(m²-Σm_i²)/4}`.
pub fn hciz_asymptotic(gamma: &[f64], gbar: &[f64]) -> Result<f64> {
    let m = gamma.len();
    if gbar.len() != m {
        return Err(Error::InvalidInput("gamma and gbar lengths differ".into()));
    }
    if gamma.windows(2).any(|w| w[0] <= w[1]) || gbar.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("spectra must be descending".into()));
    }
    let c = cluster(gbar, default_cluster_tol(gbar));
    let lg = |k: usize| (1..=k).map(|l| ln_gamma(0.5 * l as f64)).sum::<f64>();
    let mut log = lg(m) - c.sizes.iter().map(|&s| lg(s)).sum::<f64>();
    let labels = c.labels();
    for j in 0..m {
        for h in j + 1..m {
            if labels[j] != labels[h] {
                log -= 0.5 * ((gamma[j] - gamma[h]) * (gbar[j] - gbar[h])).ln();
            }
        }
    }
    Ok(log.exp())
}

/// Left-hand side `I_m(nγ, γ̄) exp(-n γ·γ̄) n^{(m²-Σm_i²)/4}` evaluated numerically.
pub fn hciz_rescaled(gamma: &[f64], gbar: &[f64], n: f64, cfg: &HcizConfig) -> Result<f64> {
    let c = cluster(gbar, default_cluster_tol(gbar));
    let scaled: Vec<f64> = gamma.iter().map(|g| n * g).collect();
    let h = hciz(gbar, &scaled, cfg)?;
    let dot: f64 = gamma.iter().zip(gbar).map(|(a, b)| a * b).sum();
    Ok((h.log_value - n * dot + hciz_n_exponent(&c) * n.ln()).exp())
}
