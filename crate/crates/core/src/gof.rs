//! Goodness-of-fit helpers used by the Monte Carlo checks: Kolmogorov–Smirnov,
//! binned chi-square, gamma maximum likelihood and sample moments.

use crate::error::{Error, Result};
use crate::special::{chi2_sf, digamma, trigamma};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov tail `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// One-sample KS test against a continuous CDF.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let mut x: Vec<f64> = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p(d, n),
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: ks_p(d, n_eff),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Pearson chi-square on binned counts. Bins with expected count below
/// `min_expected` are pooled into one.
pub fn chi2_gof(
    observed: &[f64],
    expected: &[f64],
    min_expected: f64,
    ddof: usize,
) -> Result<Chi2Result> {
    if observed.len() != expected.len() {
        return Err(Error::InvalidInput(
            "observed/expected length mismatch".into(),
        ));
    }
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut po, mut pe) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        if e < min_expected {
            po += o;
            pe += e;
        } else {
            stat += (o - e).powi(2) / e;
            bins += 1;
        }
    }
    if pe > 0.0 {
        stat += (po - pe).powi(2) / pe;
        bins += 1;
    }
    if bins <= ddof + 1 {
        return Err(Error::InvalidInput("too few bins".into()));
    }
    let dof = (bins - 1 - ddof) as f64;
    Ok(Chi2Result {
        statistic: stat,
        dof,
        p_value: chi2_sf(dof, stat),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    pub shape: f64,
    pub scale: f64,
    pub n_used: usize,
    pub n_excluded: usize,
}

/// Maximum-likelihood gamma fit; non-positive and non-finite values are skipped.
pub fn gamma_fit(samples: &[f64]) -> Result<GammaFit> {
    let mut acc = GammaAccumulator::default();
    for &v in samples {
        acc.push(v);
    }
    acc.fit()
}

/// Streaming sufficient statistics `(n, Σx, Σlog x)` for a gamma fit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GammaAccumulator {
    n: usize,
    excluded: usize,
    sum: f64,
    sum_log: f64,
}

impl GammaAccumulator {
    pub fn push(&mut self, v: f64) {
        if v.is_finite() && v > 0.0 {
            self.n += 1;
            self.sum += v;
            self.sum_log += v.ln();
        } else {
            self.excluded += 1;
        }
    }

    pub fn fit(&self) -> Result<GammaFit> {
        if self.n < 2 {
            return Err(Error::InvalidInput(
                "need at least two positive samples".into(),
            ));
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let s = mean.ln() - self.sum_log / n;
        if s <= 1e-14 {
            return Err(Error::Degenerate("all samples equal".into()));
        }
        let mut k = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
        for _ in 0..100 {
            let f = k.ln() - digamma(k) - s;
            let df = 1.0 / k - trigamma(k);
            let step = f / df;
            let next = if k - step > 0.0 { k - step } else { 0.5 * k };
            if (next - k).abs() < 1e-10 * k {
                k = next;
                break;
            }
            k = next;
        }
        Ok(GammaFit {
            shape: k,
            scale: mean / k,
            n_used: self.n,
            n_excluded: self.excluded,
        })
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Sample covariance matrix of row vectors.
pub fn covariance(rows: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let p = rows[0].len();
    let n = rows.len() as f64;
    let mut mu = vec![0.0; p];
    for r in rows {
        for (m, v) in mu.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut c = nalgebra::DMatrix::zeros(p, p);
    for r in rows {
        for i in 0..p {
            for j in 0..p {
                c[(i, j)] += (r[i] - mu[i]) * (r[j] - mu[j]);
            }
        }
    }
    c / (n - 1.0)
}
