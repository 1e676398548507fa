//! Exact eigenvalue and eigenvector laws of the isotropic Gaussian family.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::stream;
use crate::special::{ln_gamma, norm_cdf, norm_pdf};
use crate::symmat::{haar_orthogonal, IsotropicModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcizMethod {
    /// Euler-angle quadrature, m = 3 only.
    EulerQuadrature,
    /// Average over Haar-distributed orthogonal matrices.
    HaarMc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcizConfig {
    pub method: HcizMethod,
    pub nodes_per_angle: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub stream: u64,
}

impl Default for HcizConfig {
    fn default() -> Self {
        HcizConfig {
            method: HcizMethod::EulerQuadrature,
            nodes_per_angle: 48,
            mc_samples: 100_000,
            seed: 0,
            stream: 0,
        }
    }
}

impl HcizConfig {
    pub fn quadrature(nodes_per_angle: usize) -> Self {
        HcizConfig {
            nodes_per_angle,
            ..Default::default()
        }
    }

    pub fn haar_mc(mc_samples: usize, seed: u64) -> Self {
        HcizConfig {
            method: HcizMethod::HaarMc,
            mc_samples,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes_per_angle < 8 {
            return Err(Error::InvalidInput(
                "nodes_per_angle must be at least 8".into(),
            ));
        }
        if self.method == HcizMethod::HaarMc && self.mc_samples < 1000 {
            return Err(Error::InvalidInput(
                "mc_samples must be at least 1000".into(),
            ));
        }
        Ok(())
    }
}

/// HCIZ value carried in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hciz {
    pub log_value: f64,
    /// Standard error relative to the value (Monte Carlo only).
    pub rel_std_err: Option<f64>,
}

impl Hciz {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Eigenvalues of D (strictly descending) paired with those of the mean
/// (weakly descending).
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSpectrum {
    pub gamma: Vec<f64>,
    pub gbar: Vec<f64>,
}

impl OrderedSpectrum {
    pub fn new(gamma: Vec<f64>, gbar: Vec<f64>) -> Result<Self> {
        if gamma.len() != gbar.len() {
            return Err(Error::InvalidInput("gamma and gbar lengths differ".into()));
        }
        if gamma.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidInput(
                "gamma must be strictly descending".into(),
            ));
        }
        if gbar.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("gbar must be descending".into()));
        }
        Ok(OrderedSpectrum { gamma, gbar })
    }
}

pub fn vandermonde(gamma: &[f64]) -> f64 {
    let mut v = 1.0;
    for i in 0..gamma.len() {
        for j in i + 1..gamma.len() {
            v *= gamma[i] - gamma[j];
        }
    }
    v
}

fn log_abs_vandermonde(gamma: &[f64]) -> f64 {
    let mut v = 0.0;
    for i in 0..gamma.len() {
        for j in i + 1..gamma.len() {
            v += (gamma[i] - gamma[j]).abs().ln();
        }
    }
    v
}

/// `log Z_m(1,0) = (m(m-1)/4) log 2 - Σ_{l≤m} log Γ(l/2)`.
pub fn log_z_unit(m: usize) -> f64 {
    let mf = m as f64;
    0.25 * mf * (mf - 1.0) * 2f64.ln() - (1..=m).map(|l| ln_gamma(0.5 * l as f64)).sum::<f64>()
}

pub fn log_normalizing_z(model: &IsotropicModel) -> f64 {
    let m = model.m as f64;
    log_z_unit(model.m)
        + 0.25 * m * (m + 1.0) * model.mu.ln()
        + 0.5 * (1.0 + model.lambda * m / (2.0 * model.mu)).ln()
}

pub fn normalizing_z(m: usize, mu: f64, lambda: f64) -> Result<f64> {
    Ok(log_normalizing_z(&IsotropicModel::new(m, mu, lambda)?).exp())
}

fn quadratic_exponent(x: &[f64], mu: f64, lambda: f64) -> f64 {
    let s: f64 = x.iter().sum();
    let q: f64 = x.iter().map(|v| v * v).sum();
    -mu * q - 0.5 * lambda * s * s
}

pub fn log_eigdensity_zero_mean(gamma: &[f64], model: &IsotropicModel) -> Result<f64> {
    model.validate()?;
    if gamma.len() != model.m {
        return Err(Error::InvalidInput(
            "spectrum length differs from model dimension".into(),
        ));
    }
    if gamma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("gamma must be descending".into()));
    }
    if gamma.windows(2).any(|w| w[0] == w[1]) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_normalizing_z(model)
        + log_abs_vandermonde(gamma)
        + quadratic_exponent(gamma, model.mu, model.lambda))
}

pub fn eigdensity_zero_mean(gamma: &[f64], model: &IsotropicModel) -> Result<f64> {
    Ok(log_eigdensity_zero_mean(gamma, model)?.exp())
}

fn euler_matrix(phi: f64, theta: f64, psi: f64) -> [[f64; 3]; 3] {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (ss, cs) = psi.sin_cos();
    [
        [cp * cs - sp * ct * ss, -cp * ss - sp * ct * cs, sp * st],
        [sp * cs + cp * ct * ss, -sp * ss + cp * ct * cs, -cp * st],
        [st * ss, st * cs, ct],
    ]
}

/// Rotation `Rz(φ) Rx(θ) Rz(ψ)`.
pub fn euler_rotation(phi: f64, theta: f64, psi: f64) -> DMatrix<f64> {
    let r = euler_matrix(phi, theta, psi);
    DMatrix::from_fn(3, 3, |i, j| r[i][j])
}

fn hciz_euler(gbar: &[f64], gamma: &[f64], n: usize) -> f64 {
    let gl = quad::gauss_legendre(n);
    let trig: Vec<(f64, f64)> = (0..n)
        .map(|k| (2.0 * PI * k as f64 / n as f64).sin_cos())
        .collect();
    let mut w = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            w[i][j] = gbar[i] * gamma[j];
        }
    }
    // streaming log-sum-exp
    let mut mx = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for (ct, wt) in gl.nodes.iter().zip(&gl.weights) {
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let lw = (0.5 * wt).ln();
        for &(sp, cp) in &trig {
            for &(ss, cs) in &trig {
                let o = [
                    [cp * cs - sp * ct * ss, -cp * ss - sp * ct * cs, sp * st],
                    [sp * cs + cp * ct * ss, -sp * ss + cp * ct * cs, -cp * st],
                    [st * ss, st * cs, *ct],
                ];
                let mut e = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        e += o[i][j] * o[i][j] * w[i][j];
                    }
                }
                let e = e + lw;
                if e > mx {
                    acc = acc * (mx - e).exp() + 1.0;
                    mx = e;
                } else {
                    acc += (e - mx).exp();
                }
            }
        }
    }
    mx + acc.ln() - 2.0 * (n as f64).ln()
}

fn hciz_haar(gbar: &[f64], gamma: &[f64], samples: usize, seed: u64, stream_id: u64) -> Hciz {
    let m = gbar.len();
    let mut rng = stream(seed, stream_id);
    let exps: Vec<f64> = (0..samples)
        .map(|_| exponent_of(&haar_orthogonal(m, &mut rng), gbar, gamma))
        .collect();
    let mx = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vals: Vec<f64> = exps.iter().map(|e| (e - mx).exp()).collect();
    let n = samples as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Hciz {
        log_value: mx + mean.ln(),
        rel_std_err: Some((var / n).sqrt() / mean),
    }
}

/// `Σ_ij O_ij² γ̄_i γ_j = Tr(O G Oᵀ Ḡ)`.
pub fn exponent_of(o: &DMatrix<f64>, gbar: &[f64], gamma: &[f64]) -> f64 {
    let m = gbar.len();
    let mut e = 0.0;
    for i in 0..m {
        for j in 0..m {
            e += o[(i, j)] * o[(i, j)] * gbar[i] * gamma[j];
        }
    }
    e
}

/// HCIZ integral `∫ exp(Tr(O G Oᵀ Ḡ)) H_m(dO)`.
pub fn hciz(gbar: &[f64], gamma: &[f64], cfg: &HcizConfig) -> Result<Hciz> {
    cfg.validate()?;
    if gbar.len() != gamma.len() {
        return Err(Error::InvalidInput("gbar and gamma lengths differ".into()));
    }
    if gbar.iter().all(|&x| x == 0.0) || gamma.iter().all(|&x| x == 0.0) {
        return Ok(Hciz {
            log_value: 0.0,
            rel_std_err: None,
        });
    }
    match cfg.method {
        HcizMethod::EulerQuadrature => {
            if gbar.len() != 3 {
                return Err(Error::InvalidInput(
                    "Euler quadrature is only available for m = 3".into(),
                ));
            }
            Ok(Hciz {
                log_value: hciz_euler(gbar, gamma, cfg.nodes_per_angle),
                rel_std_err: None,
            })
        }
        HcizMethod::HaarMc => Ok(hciz_haar(gbar, gamma, cfg.mc_samples, cfg.seed, cfg.stream)),
    }
}

pub fn log_eigdensity_general(
    spec: &OrderedSpectrum,
    model: &IsotropicModel,
    cfg: &HcizConfig,
) -> Result<f64> {
    model.validate()?;
    let m = model.m;
    if spec.gamma.len() != m {
        return Err(Error::InvalidInput(
            "spectrum length differs from model dimension".into(),
        ));
    }
    let diff: Vec<f64> = spec
        .gamma
        .iter()
        .zip(&spec.gbar)
        .map(|(a, b)| a - b)
        .collect();
    let cross: f64 = spec.gamma.iter().zip(&spec.gbar).map(|(a, b)| a * b).sum();
    let scaled: Vec<f64> = spec.gbar.iter().map(|g| 2.0 * model.mu * g).collect();
    let h = hciz(&scaled, &spec.gamma, cfg)?;
    Ok(log_normalizing_z(model)
        + log_abs_vandermonde(&spec.gamma)
        + quadratic_exponent(&diff, model.mu, model.lambda)
        - 2.0 * model.mu * cross
        + h.log_value)
}

pub fn eigdensity_general(
    spec: &OrderedSpectrum,
    model: &IsotropicModel,
    cfg: &HcizConfig,
) -> Result<f64> {
    Ok(log_eigdensity_general(spec, model, cfg)?.exp())
}

/// Log density of `R = Ōᵀ O` given the eigenvalues, with respect to Haar measure.
pub fn eigvec_conditional_logdensity(
    r: &DMatrix<f64>,
    spec: &OrderedSpectrum,
    mu: f64,
    cfg: &HcizConfig,
) -> Result<f64> {
    let m = spec.gamma.len();
    if r.nrows() != m || r.ncols() != m {
        return Err(Error::InvalidInput("rotation has wrong shape".into()));
    }
    let dev = (r.transpose() * r - DMatrix::<f64>::identity(m, m)).norm();
    if dev > 1e-8 {
        return Err(Error::NotOrthogonal(dev));
    }
    let scaled: Vec<f64> = spec.gbar.iter().map(|g| 2.0 * mu * g).collect();
    let h = hciz(&scaled, &spec.gamma, cfg)?;
    Ok(m as f64 * 2f64.ln() - h.log_value + exponent_of(r, &scaled, &spec.gamma))
}

/// `P(γ1 - γ̃123 ≤ t)` for a spherical mean.
pub fn ad_cdf_centered(t: f64, mu: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let a = (3.0 * mu).sqrt();
    (norm_cdf(t * a) + norm_cdf(2.0 * t * a)
        - 1.0
        - 3.0 * t * (3.0 * mu / (2.0 * PI)).sqrt() * (-1.5 * mu * t * t).exp())
    .clamp(0.0, 1.0)
}

/// Density of `γ1 - γ̃123` (derivative of [`ad_cdf_centered`]).
pub fn ad_density_centered(z: f64, mu: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    mu.powf(1.5)
        * (6.0 / PI).sqrt()
        * (4.5 * z * z + ((-4.5 * mu * z * z).exp() - 1.0) / mu)
        * (-1.5 * mu * z * z).exp()
}

const AD_HERMITE_NODES: usize = 200;

/// `P(γ1 ≤ t)` for spherical mean `γ̄`: the centered law convolved with the
/// barycenter law N(γ̄, 1/(6μ+9λ)).
pub fn ad_cdf(t: f64, mu: f64, lambda: f64, gbar: f64) -> f64 {
    let sd = 1.0 / (6.0 * mu + 9.0 * lambda).sqrt();
    let gh = quad::gauss_hermite_normal(AD_HERMITE_NODES);
    gh.nodes
        .iter()
        .zip(&gh.weights)
        .map(|(x, w)| w * ad_cdf_centered(t - gbar - sd * x, mu))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Same convolution by adaptive Simpson; used to validate [`ad_cdf`].
pub fn ad_cdf_adaptive(t: f64, mu: f64, lambda: f64, gbar: f64) -> f64 {
    let prec = 6.0 * mu + 9.0 * lambda;
    let sd = 1.0 / prec.sqrt();
    let upper = t - gbar;
    let lower = -14.0 * sd;
    if upper <= lower {
        return 0.0;
    }
    let f = |x: f64| ad_cdf_centered(upper - x, mu) * norm_pdf(x / sd) / sd;
    let panels = 64;
    let h = (upper - lower) / panels as f64;
    (0..panels)
        .map(|k| {
            let a = lower + k as f64 * h;
            quad::adaptive_simpson(&f, a, a + h, 1e-12)
        })
        .sum()
}

/// Joint density of (AD, RD) = (γ1, (γ2+γ3)/2) for a spherical mean.
pub fn ad_rd_joint_density(gamma1: f64, rd: f64, mu: f64, lambda: f64, gbar: f64) -> f64 {
    let d = gamma1 - rd;
    if d <= 0.0 {
        return 0.0;
    }
    let x = gamma1 - gbar;
    let y = rd - gbar;
    4.0 * mu.powf(1.5) * (2.0 * mu + 3.0 * lambda).sqrt() / PI
        * (d * d + ((-2.0 * mu * d * d).exp() - 1.0) / (2.0 * mu))
        * (-(mu + 0.5 * lambda) * x * x - 2.0 * (mu + lambda) * y * y - 2.0 * lambda * x * y).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::symmat::{sample, sample_goe, spectral_decompose, SymMat, SIGN_TOL};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde(&[3.0, 2.0, 1.0]), 2.0);
        assert_eq!(vandermonde(&[3.0, 2.0, 2.0]), 0.0);
        assert_eq!(vandermonde(&[5.0, 1.0]), 4.0);
    }

    #[test]
    fn z3_closed_form() {
        for (mu, lambda) in [(1.0, 0.0), (0.5, 0.0), (2.0, 1.5), (3.0, -1.0)] {
            let z = normalizing_z(3, mu, lambda).unwrap();
            let closed = 4.0 / PI * mu.powf(2.5) * (2.0 * mu + 3.0 * lambda).sqrt();
            assert!((z - closed).abs() < 1e-12 * closed);
        }
        assert!((normalizing_z(3, 1.0, 0.0).unwrap() - 1.80063).abs() < 1e-5);
    }

    #[test]
    fn zero_mean_density_properties() {
        let model = IsotropicModel::goe(3);
        assert_eq!(eigdensity_zero_mean(&[1.0, 1.0, 0.0], &model).unwrap(), 0.0);
        let g = [1.3, 0.2, -0.7];
        let r = [0.7, -0.2, -1.3];
        let a = eigdensity_zero_mean(&g, &model).unwrap();
        let b = eigdensity_zero_mean(&r, &model).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(eigdensity_zero_mean(&[0.0, 1.0, 2.0], &model).is_err());
    }

    #[test]
    fn hciz_trivial_cases() {
        let cfg = HcizConfig::default();
        assert_eq!(
            hciz(&[0.0; 3], &[3.0, 1.0, 0.5], &cfg).unwrap().value(),
            1.0
        );
        let g = [1.5, -0.3, 0.8];
        let c = 1.7;
        let h = hciz(&[c; 3], &g, &cfg).unwrap();
        let exact: f64 = c * g.iter().sum::<f64>();
        assert!((h.log_value - exact).abs() < 1e-12);
        assert!(hciz(&[1.0, 0.0], &[1.0, 0.0], &cfg).is_err());
    }

    #[test]
    fn euler_rotation_is_orthogonal() {
        let r = euler_rotation(0.3, 1.1, -2.0);
        assert!((r.transpose() * &r - DMatrix::identity(3, 3)).norm() < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_matches_haar_mc() {
        let gbar = [1.2, 0.4, -0.9];
        let gamma = [2.0, -0.5, -1.1];
        let q = hciz(&gbar, &gamma, &HcizConfig::default()).unwrap();
        let mc = hciz(&gbar, &gamma, &HcizConfig::haar_mc(100_000, 4)).unwrap();
        let se = mc.rel_std_err.unwrap();
        assert!((q.value() / mc.value() - 1.0).abs() < 4.0 * se);
    }

    #[test]
    fn general_density_spherical_collapse() {
        let model = IsotropicModel::new(3, 1.3, 0.4).unwrap();
        let c = 0.8;
        let gamma = vec![2.1, 0.9, 0.3];
        let spec = OrderedSpectrum::new(gamma.clone(), vec![c; 3]).unwrap();
        let a = log_eigdensity_general(&spec, &model, &HcizConfig::default()).unwrap();
        let shifted: Vec<f64> = gamma.iter().map(|g| g - c).collect();
        let b = log_eigdensity_zero_mean(&shifted, &model).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn conditional_eigvec_density_properties() {
        let spec = OrderedSpectrum::new(vec![2.0, 1.0, -0.5], vec![1.0; 3]).unwrap();
        let cfg = HcizConfig::default();
        let mut rng = stream(2, 0);
        let base =
            eigvec_conditional_logdensity(&DMatrix::identity(3, 3), &spec, 1.5, &cfg).unwrap();
        for _ in 0..10 {
            let r = haar_orthogonal(3, &mut rng);
            let v = eigvec_conditional_logdensity(&r, &spec, 1.5, &cfg).unwrap();
            assert!((v - base).abs() < 1e-10);
        }
        let spec = OrderedSpectrum::new(vec![2.0, 1.0, -0.5], vec![1.5, 0.2, -0.1]).unwrap();
        let top =
            eigvec_conditional_logdensity(&DMatrix::identity(3, 3), &spec, 1.5, &cfg).unwrap();
        for _ in 0..50 {
            let r = haar_orthogonal(3, &mut rng);
            assert!(eigvec_conditional_logdensity(&r, &spec, 1.5, &cfg).unwrap() <= top + 1e-12);
        }
        let bad = DMatrix::from_element(3, 3, 0.5);
        assert!(matches!(
            eigvec_conditional_logdensity(&bad, &spec, 1.5, &cfg),
            Err(Error::NotOrthogonal(_))
        ));
    }

    #[test]
    fn conditional_eigvec_density_tied_block_invariance() {
        let spec = OrderedSpectrum::new(vec![2.0, 1.0, -0.5], vec![1.5, 1.5, -0.1]).unwrap();
        let cfg = HcizConfig::quadrature(24);
        let mut rng = stream(8, 0);
        for _ in 0..10 {
            let r = haar_orthogonal(3, &mut rng);
            let th: f64 = rng.random::<f64>() * 6.0;
            let mut k = DMatrix::identity(3, 3);
            k[(0, 0)] = th.cos();
            k[(0, 1)] = -th.sin();
            k[(1, 0)] = th.sin();
            k[(1, 1)] = th.cos();
            let a = eigvec_conditional_logdensity(&r, &spec, 0.7, &cfg).unwrap();
            let b = eigvec_conditional_logdensity(&(&k * &r), &spec, 0.7, &cfg).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn ad_cdf_limits_and_agreement() {
        assert_eq!(ad_cdf_centered(0.0, 2.0), 0.0);
        assert!((ad_cdf_centered(50.0, 2.0) - 1.0).abs() < 1e-14);
        let mut prev = 0.0;
        for k in -40..80 {
            let t = 1.0 + 0.05 * k as f64;
            let a = ad_cdf(t, 2.0, 1.0, 1.0);
            let b = ad_cdf_adaptive(t, 2.0, 1.0, 1.0);
            assert!((a - b).abs() < 1e-8, "t={t} {a} {b}");
            assert!(a >= prev - 1e-15);
            prev = a;
        }
        assert!(ad_cdf(-10.0, 2.0, 0.0, 0.0) < 1e-12);
        // 30-digit reference values of the convolution (μ=2, λ=1, γ̄=1)
        for (t, v) in [
            (0.15, 1.53544050691863508e-8),
            (0.5, 1.5404246114838042e-5),
            (1.0, 0.00993441764257695358),
            (2.0, 0.789213407345210873),
        ] {
            assert!((ad_cdf(t, 2.0, 1.0, 1.0) - v).abs() < 1e-8, "t={t}");
            assert!(
                (ad_cdf_adaptive(t, 2.0, 1.0, 1.0) - v).abs() < 1e-11,
                "t={t}"
            );
        }
        assert!((ad_cdf(10.0, 2.0, 0.0, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ad_density_is_cdf_derivative() {
        for &t in &[0.1, 0.4, 0.9, 1.5] {
            let h = 1e-5;
            let fd = (ad_cdf_centered(t + h, 2.0) - ad_cdf_centered(t - h, 2.0)) / (2.0 * h);
            assert!((fd - ad_density_centered(t, 2.0)).abs() < 1e-7);
        }
    }

    #[test]
    fn ad_rd_density_normalizes_and_marginalizes() {
        let (mu, lambda, gb) = (2.0, 0.0, 1.0);
        let outer = |g1: f64| {
            quad::integrate(
                &|r: f64| ad_rd_joint_density(g1, r, mu, lambda, gb),
                gb - 4.0,
                g1,
                1e-13,
                1e-11,
            )
        };
        let total = quad::integrate(&outer, gb - 4.0, gb + 5.0, 1e-11, 1e-10);
        assert!((total - 1.0).abs() < 1e-6);
        // marginal of γ1 against the derivative of ad_cdf
        for k in 0..12 {
            let t = gb - 0.3 + 0.15 * k as f64;
            let h = 1e-4;
            let d = (ad_cdf(t + h, mu, lambda, gb) - ad_cdf(t - h, mu, lambda, gb)) / (2.0 * h);
            let m = outer(t);
            assert!((m - d).abs() < 0.01 * d.max(1e-3), "t={t} {m} {d}");
        }
        assert_eq!(ad_rd_joint_density(1.0, 1.5, mu, lambda, gb), 0.0);
    }

    #[test]
    fn ad_centered_matches_goe_sampling() {
        let mu = 2.0;
        let model = IsotropicModel::new(3, mu, 0.0).unwrap();
        let mut rng = stream(21, 0);
        let mean = SymMat::scaled_identity(3, 1.0);
        let n = 20_000;
        let mut z: Vec<f64> = (0..n)
            .map(|_| {
                let s = spectral_decompose(&sample(&mean, &model, &mut rng).unwrap(), SIGN_TOL);
                s.gamma[0] - s.gamma.iter().sum::<f64>() / 3.0
            })
            .collect();
        z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = z
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = ad_cdf_centered(x, mu);
                (f - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.015, "sup distance {d}");
        let _ = sample_goe(3, &mut rng);
    }

    proptest! {
        #[test]
        fn hciz_symmetries(a in prop::collection::vec(-2.0f64..2.0, 3), b in prop::collection::vec(-2.0f64..2.0, 3)) {
            let cfg = HcizConfig::quadrature(32);
            let h = hciz(&a, &b, &cfg).unwrap().log_value;
            let swapped = hciz(&b, &a, &cfg).unwrap().log_value;
            let pa = [a[2], a[0], a[1]];
            let pb = [b[2], b[0], b[1]];
            let perm = hciz(&pa, &pb, &cfg).unwrap().log_value;
            prop_assert!((h - swapped).abs() < 1e-8 * h.abs().max(1.0));
            prop_assert!((h - perm).abs() < 1e-8 * h.abs().max(1.0));
            // Jensen: log I >= E[exponent] = (Σa)(Σb)/3
            let mean_exp = a.iter().sum::<f64>() * b.iter().sum::<f64>() / 3.0;
            prop_assert!(h >= mean_exp - 1e-10);
        }
    }
}
