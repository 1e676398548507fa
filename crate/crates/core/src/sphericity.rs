//! Sphericity statistics built from eigenvalue central moments, their limit
//! laws, the symmetry classifier and two-sample tools.

use std::path::Path;
use std::sync::OnceLock;

use rand::Rng;

use crate::asymptotics::Regime3D;
use crate::error::{Error, Result};
use crate::rng::{chi2, symmetric_uniform};
use crate::special::{chi2_quantile, chi2_sf, norm_cdf};
use crate::symmat::{central_moments, central_moments_trace, CentralMoments, SymMat};

#[derive(Debug, Clone, PartialEq)]
pub struct TauStats {
    pub tau1: f64,
    pub tau2: f64,
    /// `None` when κ2 = 0.
    pub tau3: Option<f64>,
    pub tau4: f64,
    /// NaN when κ1 = 0.
    pub tau5: f64,
    /// `+∞` when VR = 0, NaN when κ1 = 0.
    pub tau6: f64,
    pub a: f64,
    pub kappa: CentralMoments,
}

fn kappa2_is_zero(k2: f64, gamma: &[f64]) -> bool {
    let scale = gamma.iter().fold(0f64, |a, g| a.max(g.abs()));
    k2 <= (1e-15 * scale).powi(2)
}

pub fn tau_statistics(gamma: &[f64], a: f64, kappa1_ref: f64) -> Result<TauStats> {
    if gamma.len() != 3 {
        return Err(Error::InvalidInput(
            "tau statistics are defined for 3-vectors".into(),
        ));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidInput("scaling a must be positive".into()));
    }
    let kappa = central_moments(gamma, 3);
    let (k1, k2, k3) = (kappa.k(1), kappa.k(2), kappa.k(3));
    let tau3 = if kappa2_is_zero(k2, gamma) {
        None
    } else {
        Some((2f64.sqrt() * k3 / k2.powf(1.5)).clamp(-1.0, 1.0))
    };
    let fa_v = fa(gamma).unwrap_or(0.0);
    let (tau5, tau6) = if k1 == 0.0 {
        (f64::NAN, f64::NAN)
    } else {
        let v = gamma.iter().product::<f64>() / k1.powi(3);
        let t6 = if v == 0.0 {
            f64::INFINITY
        } else {
            -4.0 * a * k1 * k1 * v.abs().ln() + 0.0
        };
        (4.0 * a * k1 * k1 * (1.0 - v), t6)
    };
    Ok(TauStats {
        tau1: a.sqrt() * (k1 - kappa1_ref),
        tau2: 6.0 * a * k2,
        tau3,
        tau4: 2.0 * a.sqrt() * k1.abs() * fa_v,
        tau5,
        tau6,
        a,
        kappa,
    })
}

/// Fractional anisotropy `√(3κ2 / (2(κ1² + κ2)))`.
pub fn fa(gamma: &[f64]) -> Result<f64> {
    let k = central_moments(gamma, 2);
    let den = 2.0 * (k.k(1).powi(2) + k.k(2));
    if den <= 0.0 {
        return Err(Error::Degenerate("FA needs Tr(D²) > 0".into()));
    }
    Ok((3.0 * k.k(2) / den).sqrt())
}

/// Relative anisotropy `√κ2 / |κ1|`.
pub fn ra(gamma: &[f64]) -> Result<f64> {
    let k = central_moments(gamma, 2);
    if k.k(1) == 0.0 {
        return Err(Error::Degenerate(
            "RA needs a nonzero mean eigenvalue".into(),
        ));
    }
    Ok(k.k(2).sqrt() / k.k(1).abs())
}

/// Volume ratio `γ1γ2γ3 / κ1³`.
pub fn vr(gamma: &[f64]) -> Result<f64> {
    let k1 = central_moments(gamma, 1).k(1);
    if k1 == 0.0 {
        return Err(Error::Degenerate(
            "VR needs a nonzero mean eigenvalue".into(),
        ));
    }
    Ok(gamma.iter().product::<f64>() / k1.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericityPValues {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: Option<f64>,
    pub tau5: Option<f64>,
}

/// Limit-law p-values. `lambda` is the noise shape relative to the scaling,
/// so that τ1 has limiting variance `1/(6 + 9λ)`.
pub fn sphericity_pvalues(tau: &TauStats, lambda: f64) -> Result<SphericityPValues> {
    let v = 6.0 + 9.0 * lambda;
    if v <= 0.0 {
        return Err(Error::InvalidModel("lambda must exceed -2/3".into()));
    }
    let z = tau.tau1.abs() * v.sqrt();
    Ok(SphericityPValues {
        tau1: (2.0 * (1.0 - norm_cdf(z))).clamp(0.0, 1.0),
        tau2: chi2_sf(5.0, tau.tau2),
        // accepted at level α iff |τ3| ∈ ((1-α)/2, (1+α)/2)
        tau3: tau.tau3.map(|t| 1.0 - (2.0 * t.abs() - 1.0).abs()),
        tau5: tau.tau5.is_finite().then(|| chi2_sf(5.0, tau.tau5)),
    })
}

/// One draw of `1 + (χ²5/(3t))^{3/2} U/4 - χ²5/(4t)`.
pub fn vr_conditional_limit_sample<R: Rng + ?Sized>(t: f64, rng: &mut R) -> f64 {
    let c = chi2(5, rng);
    let u = symmetric_uniform(rng);
    1.0 + (c / (3.0 * t)).powf(1.5) * u / 4.0 - c / (4.0 * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime1Draw {
    pub fa: f64,
    pub ra: f64,
    pub one_minus_vr: f64,
    pub tau1_sq: f64,
    pub tau2: f64,
    pub tau3: f64,
}

impl Regime1Draw {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.fa,
            self.ra,
            self.one_minus_vr,
            self.tau1_sq,
            self.tau2,
            self.tau3,
        ]
    }
}

/// Joint limit of (FA, RA, 1-VR, τ1², τ2, τ3) when the mean eigenvalue is zero.
pub fn regime1_joint_sample<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<Regime1Draw> {
    if lambda <= -2.0 / 3.0 {
        return Err(Error::InvalidModel("lambda must exceed -2/3".into()));
    }
    let x1 = chi2(1, rng);
    let x5 = chi2(5, rng);
    let u = symmetric_uniform(rng);
    let c = 9.0 * lambda + 6.0;
    let r = x5 / x1;
    Ok(Regime1Draw {
        fa: (3.0 * x5 / (2.0 * x5 + 12.0 * x1 / c)).sqrt(),
        ra: ((3.0 * lambda + 2.0) / 2.0 * r).sqrt(),
        one_minus_vr: c / 4.0 * r - ((3.0 * lambda + 2.0) * r).powf(1.5) * u / 4.0,
        tau1_sq: x1 / c,
        tau2: x5,
        tau3: u,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryVerdict {
    pub regime: Regime3D,
    pub estimate: [f64; 3],
    pub c_n: f64,
    pub p_n: f64,
}

/// `cⁿ = χ²5 quantile at 1 - 1/√a`, `pⁿ = 1 - 1/√a`.
pub fn default_thresholds(a: f64) -> Result<(f64, f64)> {
    if !(a > 1.0) {
        return Err(Error::InvalidInput("default thresholds need a > 1".into()));
    }
    let p = 1.0 - 1.0 / a.sqrt();
    Ok((chi2_quantile(5.0, p), p))
}

pub fn symmetry_classify(gamma: &[f64], a: f64, c_n: f64, p_n: f64) -> Result<SymmetryVerdict> {
    if gamma.len() != 3 || gamma[0] < gamma[1] || gamma[1] < gamma[2] {
        return Err(Error::InvalidInput("expected a descending 3-vector".into()));
    }
    if !(a > 0.0 && c_n > 0.0 && p_n > 0.0 && p_n < 1.0) {
        return Err(Error::InvalidInput(
            "need a, c_n > 0 and p_n in (0,1)".into(),
        ));
    }
    let k = central_moments(gamma, 2);
    let gap_cut = -2.0 * (1.0 - p_n).ln();
    let (regime, estimate) = if k.k(2) < c_n / (6.0 * a) {
        (Regime3D::Isotropic, [k.k(1); 3])
    } else if (gamma[0] - gamma[1]).powi(2) * a < gap_cut {
        let r = 0.5 * (gamma[0] + gamma[1]);
        (Regime3D::Oblate, [r, r, gamma[2]])
    } else if (gamma[1] - gamma[2]).powi(2) * a < gap_cut {
        let r = 0.5 * (gamma[1] + gamma[2]);
        (Regime3D::Prolate, [gamma[0], r, r])
    } else {
        (Regime3D::Asymmetric, [gamma[0], gamma[1], gamma[2]])
    };
    Ok(SymmetryVerdict {
        regime,
        estimate,
        c_n,
        p_n,
    })
}

/// Parameters of the difference of two independent isotropic Gaussian matrices.
pub fn two_sample_combine(
    mu1: f64,
    lambda1: f64,
    mu2: f64,
    lambda2: f64,
    m: usize,
) -> Result<(f64, f64)> {
    let mf = m as f64;
    for (mu, l) in [(mu1, lambda1), (mu2, lambda2)] {
        if !(mu > 0.0) || 2.0 * mu + mf * l <= 0.0 {
            return Err(Error::InvalidModel(format!(
                "invalid model mu={mu} lambda={l}"
            )));
        }
    }
    let mu = mu1 * mu2 / (mu1 + mu2);
    let alpha =
        lambda1 * mu2 / (2.0 * mu1 + mf * lambda1) + lambda2 * mu1 / (2.0 * mu2 + mf * lambda2);
    let den = mu1 + mu2 - mf * alpha;
    if den <= 0.0 {
        return Err(Error::InvalidModel(
            "combined model has non-positive denominator".into(),
        ));
    }
    Ok((mu, 2.0 * alpha * mu / den))
}

/// `2mμκ2 + (2mμ + λm²)κ1²`, asymptotically χ² with m(m+1)/2 degrees of freedom.
pub fn two_sample_stat(d_diff: &SymMat, mu: f64, lambda: f64) -> f64 {
    let m = d_diff.dim() as f64;
    let k = central_moments_trace(d_diff, 2);
    2.0 * m * mu * k.k(2) + (2.0 * m * mu + lambda * m * m) * k.k(1).powi(2)
}

const VR_TABLE: &str = include_str!("../../../data/vr_calibration.csv");
pub const VR_TABLE_SHA256: &str =
    "037339674f663f5a06e19d581f4d9112464453025767acfd1aec5893e77b1552";

/// Persisted Monte Carlo quantiles of the conditional VR limit.
#[derive(Debug, Clone, PartialEq)]
pub struct VrCalibration {
    /// Sorted by t; each entry holds (level, value) pairs sorted by level.
    pub tables: Vec<(f64, Vec<(f64, f64)>)>,
}

#[derive(serde::Deserialize)]
struct VrRow {
    t: f64,
    quantile_level: f64,
    value: f64,
}

impl VrCalibration {
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut tables: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for row in rdr.deserialize::<VrRow>() {
            let r = row.map_err(|e| Error::Data {
                file: name.into(),
                reason: e.to_string(),
            })?;
            match tables.iter_mut().find(|(t, _)| *t == r.t) {
                Some((_, v)) => v.push((r.quantile_level, r.value)),
                None => tables.push((r.t, vec![(r.quantile_level, r.value)])),
            }
        }
        if tables.is_empty() {
            return Err(Error::Data {
                file: name.into(),
                reason: "empty table".into(),
            });
        }
        tables.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, v) in &mut tables {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            if v.windows(2).any(|w| w[1].1 < w[0].1) {
                return Err(Error::Data {
                    file: name.into(),
                    reason: "quantiles not monotone".into(),
                });
            }
        }
        Ok(Self { tables })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Data {
            file: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn builtin() -> &'static Self {
        static T: OnceLock<VrCalibration> = OnceLock::new();
        T.get_or_init(|| {
            Self::parse(VR_TABLE, "vr_calibration.csv").expect("bundled table is valid")
        })
    }

    fn table(&self, t: f64) -> Result<&[(f64, f64)]> {
        self.tables
            .iter()
            .find(|(tt, _)| (tt - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::InvalidInput(format!("no calibration for t={t}")))
    }

    pub fn quantile(&self, t: f64, level: f64) -> Result<f64> {
        let tab = self.table(t)?;
        let (lo, hi) = (tab[0], tab[tab.len() - 1]);
        if level < lo.0 || level > hi.0 {
            return Err(Error::InvalidInput(format!(
                "level {level} outside tabulated range"
            )));
        }
        let i = tab.partition_point(|p| p.0 < level).max(1);
        let (a, b) = (tab[i - 1], tab[i]);
        Ok(a.1 + (b.1 - a.1) * (level - a.0) / (b.0 - a.0))
    }

    /// Conditional CDF by interpolation, clamped to the tabulated level range.
    pub fn cdf(&self, t: f64, vr: f64) -> Result<f64> {
        let tab = self.table(t)?;
        if vr <= tab[0].1 {
            return Ok(tab[0].0);
        }
        if vr >= tab[tab.len() - 1].1 {
            return Ok(tab[tab.len() - 1].0);
        }
        let i = tab.partition_point(|p| p.1 < vr).max(1);
        let (a, b) = (tab[i - 1], tab[i]);
        Ok(a.0 + (b.0 - a.0) * (vr - a.1) / (b.1 - a.1))
    }

    /// Two-sided conditional p-value of an observed VR.
    pub fn p_value(&self, t: f64, vr: f64) -> Result<f64> {
        let f = self.cdf(t, vr)?;
        Ok((2.0 * f.min(1.0 - f)).min(1.0))
    }
}

pub fn vr_table_checksum() -> String {
    use sha2::{Digest, Sha256};
    let d = Sha256::digest(VR_TABLE.as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof::{ks_test, mean, pearson, variance};
    use crate::rng::stream;
    use crate::symmat::{
        covariance_matrix, haar_orthogonal, sample, spectral_decompose, IsotropicModel, SIGN_TOL,
    };
    use proptest::prelude::*;

    #[test]
    fn spherical_tau() {
        let t = tau_statistics(&[2.0, 2.0, 2.0], 10.0, 2.0).unwrap();
        assert_eq!(t.tau2, 0.0);
        assert!(t.tau5.abs() < 1e-12);
        assert!(t.tau3.is_none());
        assert_eq!(t.tau1, 0.0);
    }

    #[test]
    fn anisotropy_measures() {
        assert!(fa(&[1.0, 1.0, 1.0]).unwrap().abs() < 1e-15);
        assert!(ra(&[1.0, 1.0, 1.0]).unwrap().abs() < 1e-15);
        assert!((vr(&[1.0, 1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((fa(&[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(vr(&[1.0, 1.0, 0.0]).unwrap().abs() < 1e-15);
        assert!(fa(&[0.0; 3]).is_err());
        // product identity γ1γ2γ3 = κ3 + κ1³ - 3/2 κ1κ2
        let g = [3.0, 2.0, 0.5];
        let k = central_moments(&g, 3);
        assert!((k.k(3) + k.k(1).powi(3) - 1.5 * k.k(1) * k.k(2) - 3.0).abs() < 1e-12);
        assert!((vr(&g).unwrap() - 3.0 / (5.5f64 / 3.0).powi(3)).abs() < 1e-12);
    }

    #[test]
    fn tau6_sentinel() {
        let t = tau_statistics(&[1.0, 1.0, 0.0], 4.0, 0.0).unwrap();
        assert_eq!(t.tau6, f64::INFINITY);
    }

    #[test]
    fn pvalue_examples() {
        let mut t = tau_statistics(&[1.0, 1.0, 1.0], 1.0, 1.0).unwrap();
        t.tau2 = 5.0;
        t.tau3 = Some(0.5);
        let p = sphericity_pvalues(&t, 0.0).unwrap();
        assert!((p.tau2 - 0.4158801869955079).abs() < 1e-12);
        assert_eq!(p.tau1, 1.0);
        assert_eq!(p.tau3, Some(1.0));
        t.tau3 = None;
        assert_eq!(sphericity_pvalues(&t, 0.0).unwrap().tau3, None);
    }

    #[test]
    fn classifier_examples() {
        let v = symmetry_classify(&[1.0, 1.0, 1.0], 10.0, 1.0, 0.5).unwrap();
        assert_eq!(v.regime, Regime3D::Isotropic);
        assert_eq!(v.estimate, [1.0; 3]);
        let (c, p) = default_thresholds(1e4).unwrap();
        let v = symmetry_classify(&[10.0, 5.0005, 5.0], 1e4, c, 0.99).unwrap();
        assert_eq!(v.regime, Regime3D::Prolate);
        assert!((v.estimate[1] - 5.00025).abs() < 1e-12 && (v.estimate[2] - 5.00025).abs() < 1e-12);
        let v = symmetry_classify(&[10.0, 6.0, 2.0], 1e4, 30.0, 0.99).unwrap();
        assert_eq!(v.regime, Regime3D::Asymmetric);
        let v = symmetry_classify(&[10.0, 9.9999, 2.0], 1e4, 30.0, 0.99).unwrap();
        assert_eq!(v.regime, Regime3D::Oblate);
        assert!((p - 0.99).abs() < 1e-15);
    }

    #[test]
    fn two_sample_examples() {
        assert_eq!(
            two_sample_combine(2.0, 0.0, 2.0, 0.0, 3).unwrap(),
            (1.0, 0.0)
        );
        let (mu, l) = two_sample_combine(1.0, 1.0, 2.0, 0.0, 3).unwrap();
        assert!((mu - 2.0 / 3.0).abs() < 1e-15);
        assert!((l - 8.0 / 27.0).abs() < 1e-15);
        assert_eq!(two_sample_stat(&SymMat::zeros(3), 1.0, 0.0), 0.0);
        assert!((two_sample_stat(&SymMat::identity(3), 1.0, 0.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn two_sample_covariance_addition() {
        for (m1, l1, m2, l2) in [
            (1.0, 1.0, 2.0, 0.0),
            (0.7, -0.3, 3.0, 2.0),
            (5.0, 0.4, 5.0, 0.4),
        ] {
            let (mu, l) = two_sample_combine(m1, l1, m2, l2, 3).unwrap();
            let c = covariance_matrix(&IsotropicModel::new(3, mu, l).unwrap());
            let c1 = covariance_matrix(&IsotropicModel::new(3, m1, l1).unwrap());
            let c2 = covariance_matrix(&IsotropicModel::new(3, m2, l2).unwrap());
            assert!((c - c1 - c2).abs().max() < 1e-10);
        }
    }

    #[test]
    fn exact_calibration_under_isotropic_sampling() {
        let model = IsotropicModel::new(3, 2.0, 1.0).unwrap();
        let mean_m = SymMat::scaled_identity(3, 15.0);
        let mut rng = stream(11, 0);
        let n = 20_000;
        let (mut t2, mut t3, mut t1) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..n {
            let d = sample(&mean_m, &model, &mut rng).unwrap();
            let g = spectral_decompose(&d, SIGN_TOL).gamma;
            let t = tau_statistics(&g, model.mu, 15.0).unwrap();
            t1.push(t.tau1 / model.mu.sqrt());
            t2.push(t.tau2);
            t3.push(t.tau3.unwrap());
        }
        assert!(ks_test(&t2, |x| 1.0 - chi2_sf(5.0, x)).unwrap().p_value > 0.01);
        assert!(
            ks_test(&t3, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0))
                .unwrap()
                .p_value
                > 0.01
        );
        let sd = (1.0f64 / (6.0 * 2.0 + 9.0)).sqrt();
        assert!(ks_test(&t1, |x| norm_cdf(x / sd)).unwrap().p_value > 0.01);
        assert!(pearson(&t2, &t3).abs() < 0.03);
    }

    #[test]
    fn vr_limit_moments() {
        let mut rng = stream(12, 0);
        for t in [1.0, 5.0] {
            let x: Vec<f64> = (0..100_000)
                .map(|_| vr_conditional_limit_sample(t, &mut rng))
                .collect();
            let se = (variance(&x) / x.len() as f64).sqrt();
            assert!((mean(&x) - (1.0 - 5.0 / (4.0 * t))).abs() < 3.0 * se);
        }
        let x: Vec<f64> = (0..1000)
            .map(|_| vr_conditional_limit_sample(1e9, &mut rng))
            .collect();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn calibration_table_matches_sampler() {
        assert_eq!(vr_table_checksum(), VR_TABLE_SHA256);
        let cal = VrCalibration::builtin();
        let mut rng = stream(13, 0);
        let mut x: Vec<f64> = (0..200_000)
            .map(|_| vr_conditional_limit_sample(1.0, &mut rng))
            .collect();
        x.sort_by(f64::total_cmp);
        for level in [0.05, 0.5, 0.95] {
            let emp = x[(level * x.len() as f64) as usize];
            let tab = cal.quantile(1.0, level).unwrap();
            assert!(
                (emp - tab).abs() < 0.02 * tab.abs().max(0.2),
                "{level}: {emp} vs {tab}"
            );
        }
        let f = cal.cdf(1.0, cal.quantile(1.0, 0.3).unwrap()).unwrap();
        assert!((f - 0.3).abs() < 1e-9);
        assert!(cal.quantile(3.0, 0.5).is_err());
    }

    #[test]
    fn regime1_marginals() {
        let mut rng = stream(14, 0);
        let draws: Vec<Regime1Draw> = (0..20_000)
            .map(|_| regime1_joint_sample(0.0, &mut rng).unwrap())
            .collect();
        let t2: Vec<f64> = draws.iter().map(|d| d.tau2).collect();
        assert!(ks_test(&t2, |x| 1.0 - chi2_sf(5.0, x)).unwrap().p_value > 0.01);
        let t1: Vec<f64> = draws.iter().map(|d| d.tau1_sq * 6.0).collect();
        assert!(ks_test(&t1, |x| 1.0 - chi2_sf(1.0, x)).unwrap().p_value > 0.01);
        assert!(draws.iter().all(|d| d.fa >= 0.0 && d.fa <= 1.5f64.sqrt()));
    }

    #[test]
    fn regime1_matches_finite_sample_statistics() {
        // zero mean: FA, RA, VR, scaled moments are exact functions of the sample
        let lambda = 0.5;
        let model = IsotropicModel::new(3, 1.0, lambda).unwrap();
        let mut rng = stream(15, 0);
        let mut fa_emp = Vec::new();
        for _ in 0..20_000 {
            let d = sample(&SymMat::zeros(3), &model, &mut rng).unwrap();
            fa_emp.push(fa(&spectral_decompose(&d, SIGN_TOL).gamma).unwrap());
        }
        let fa_lim: Vec<f64> = (0..20_000)
            .map(|_| regime1_joint_sample(lambda, &mut rng).unwrap().fa)
            .collect();
        assert!(crate::gof::ks_two_sample(&fa_emp, &fa_lim).unwrap().p_value > 0.01);
    }

    proptest! {
        #[test]
        fn tau_invariant_under_conjugation(seed in 0u64..100, g0 in 1.0f64..5.0, g1 in 0.5f64..1.0, g2 in 0.0f64..0.5) {
            let mut rng = stream(seed, 3);
            let o = haar_orthogonal(3, &mut rng);
            let d = SymMat::diag(&[g0, g1, g2]).conjugate(&o);
            let g = spectral_decompose(&d, SIGN_TOL).gamma;
            let a = tau_statistics(&[g0, g1, g2], 50.0, 1.0).unwrap();
            let b = tau_statistics(&g, 50.0, 1.0).unwrap();
            prop_assert!((a.tau2 - b.tau2).abs() < 1e-10 * a.tau2.max(1.0));
            prop_assert!((a.tau3.unwrap() - b.tau3.unwrap()).abs() < 1e-10);
            prop_assert!((a.tau5 - b.tau5).abs() < 1e-10 * a.tau5.abs().max(1.0));
        }

        #[test]
        fn shift_rule(g0 in -3.0f64..3.0, g1 in -3.0f64..3.0, g2 in -3.0f64..3.0, c in -5.0f64..5.0) {
            let a = tau_statistics(&[g0, g1, g2], 9.0, 0.0).unwrap();
            let b = tau_statistics(&[g0 + c, g1 + c, g2 + c], 9.0, 0.0).unwrap();
            prop_assert!((a.tau2 - b.tau2).abs() < 1e-12 * a.tau2.max(1.0) * 10.0);
            if let (Some(x), Some(y)) = (a.tau3, b.tau3) {
                if a.kappa.k(2) > 1e-6 {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
            prop_assert!((b.tau1 - a.tau1 - 3.0 * c).abs() < 1e-12 * 10.0);
        }

        #[test]
        fn tau3_bounded(g0 in -3.0f64..3.0, g1 in -3.0f64..3.0, g2 in -3.0f64..3.0) {
            if let Some(t) = tau_statistics(&[g0, g1, g2], 1.0, 0.0).unwrap().tau3 {
                prop_assert!(t.abs() <= 1.0);
            }
        }
    }
}
