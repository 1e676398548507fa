use nalgebra::{DMatrix, DVector, SMatrix, SVector};

use super::{loglik, RicianDataset};
use crate::design::a_vector;
use crate::error::{Error, Result};
use crate::special::bessel_ratio;
use crate::symmat::SymMat;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_outer: usize,
    /// Relative log-likelihood change that stops the EM loop.
    pub rel_tol: f64,
    pub max_inner: usize,
    pub lm_lambda0: f64,
    pub lm_factor: f64,
    /// Re-estimate η² in each M-step instead of treating it as known.
    pub estimate_eta2: bool,
    /// Clip negative eigenvalues of the final estimate.
    pub project_psd: bool,
    /// Magnitudes below `floor_sigmas · η` are dropped from the log-linear start.
    pub floor_sigmas: f64,
    /// Hold ρ at this value instead of estimating it.
    pub fixed_rho: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_outer: 500,
            rel_tol: 1e-10,
            max_inner: 50,
            lm_lambda0: 1e-3,
            lm_factor: 10.0,
            estimate_eta2: false,
            project_psd: false,
            floor_sigmas: 3.0,
            fixed_rho: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFit {
    pub d_hat: SymMat,
    pub rho_hat: f64,
    pub eta2_hat: f64,
    pub loglik: f64,
    pub loglik_init: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after each outer iteration, starting with the initial value.
    pub history: Vec<f64>,
}

/// Least squares of `log Y` on `(1, -a(g))` over rows with `Y > floor`.
pub fn loglin_init(ds: &RicianDataset) -> Result<(SymMat, f64)> {
    loglin_init_floor(ds, 3.0)
}

fn loglin_init_floor(ds: &RicianDataset, floor_sigmas: f64) -> Result<(SymMat, f64)> {
    ds.validate()?;
    let floor = floor_sigmas * ds.eta2.sqrt();
    let rows: Vec<_> = ds.acquisitions.iter().filter(|a| a.y > floor).collect();
    let n = rows.len();
    let mut x = DMatrix::zeros(n, 7);
    let mut y = DVector::zeros(n);
    for (r, acq) in rows.iter().enumerate() {
        let a = a_vector(&acq.g());
        x[(r, 0)] = 1.0;
        for k in 0..6 {
            x[(r, k + 1)] = -a[k];
        }
        y[r] = acq.y.ln();
    }
    // column scaling keeps the rank decision independent of b units
    let scales: Vec<f64> = (0..7)
        .map(|k| x.column(k).norm().max(f64::MIN_POSITIVE))
        .collect();
    for (k, s) in scales.iter().enumerate() {
        x.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax)
        .count();
    if n < 7 || rank < 7 {
        return Err(Error::RankDeficient { rank, needed: 7 });
    }
    let beta = svd
        .solve(&y, 1e-10 * smax)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    let v: Vec<f64> = (1..7).map(|k| beta[k] / scales[k]).collect();
    Ok((SymMat::from_vec(3, v)?, (beta[0] / scales[0]).exp()))
}

type P = SVector<f64, 7>;

struct Rows {
    a: Vec<[f64; 6]>,
    y: Vec<f64>,
}

fn signals(rows: &Rows, x: &P) -> Vec<f64> {
    rows.a
        .iter()
        .map(|a| (x[0] - (0..6).map(|k| a[k] * x[k + 1]).sum::<f64>()).exp())
        .collect()
}

/// M-step objective `Σ (S_k - c_k Y_k)²` minimized by Levenberg–Marquardt.
fn m_step(rows: &Rows, c: &[f64], x0: &P, opts: &FitOptions) -> P {
    let target: Vec<f64> = c.iter().zip(&rows.y).map(|(c, y)| c * y).collect();
    let cost = |x: &P| -> f64 {
        signals(rows, x)
            .iter()
            .zip(&target)
            .map(|(s, t)| (s - t).powi(2))
            .sum()
    };
    let mut x = *x0;
    let mut fx = cost(&x);
    let mut lambda = opts.lm_lambda0;
    for _ in 0..opts.max_inner {
        let s = signals(rows, &x);
        let mut jtj = SMatrix::<f64, 7, 7>::zeros();
        let mut jtr = P::zeros();
        for (k, a) in rows.a.iter().enumerate() {
            let mut jrow = P::zeros();
            if opts.fixed_rho.is_none() {
                jrow[0] = s[k];
            }
            for i in 0..6 {
                jrow[i + 1] = -s[k] * a[i];
            }
            let r = s[k] - target[k];
            jtj += jrow * jrow.transpose();
            jtr += jrow * r;
        }
        if opts.fixed_rho.is_some() {
            jtj[(0, 0)] = 1.0;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut lhs = jtj;
            for i in 0..7 {
                lhs[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= opts.lm_factor;
                continue;
            };
            let step = chol.solve(&(-jtr));
            let cand = x + step;
            let fc = cost(&cand);
            if fc.is_finite() && fc < fx {
                let rel = (fx - fc) / fx.max(f64::MIN_POSITIVE);
                x = cand;
                fx = fc;
                lambda = (lambda / opts.lm_factor).max(1e-12);
                accepted = true;
                if rel < 1e-14 {
                    return x;
                }
                break;
            }
            lambda *= opts.lm_factor;
        }
        if !accepted {
            break;
        }
    }
    x
}

fn unpack(x: &P) -> (SymMat, f64) {
    (
        SymMat::from_vec(3, (1..7).map(|k| x[k]).collect()).expect("six entries"),
        x[0].exp(),
    )
}

/// Maximum-likelihood fit of (D, ρ) by EM on the latent Rician phase.
pub fn mle_fit(ds: &RicianDataset, opts: &FitOptions) -> Result<TensorFit> {
    let (d0, mut rho0) = loglin_init_floor(ds, opts.floor_sigmas)?;
    if let Some(r) = opts.fixed_rho {
        if !(r > 0.0) {
            return Err(Error::InvalidInput("fixed rho must be positive".into()));
        }
        rho0 = r;
    }
    let rows = Rows {
        a: ds.acquisitions.iter().map(|a| a_vector(&a.g())).collect(),
        y: ds.acquisitions.iter().map(|a| a.y).collect(),
    };
    let mut x = P::zeros();
    x[0] = rho0.ln();
    for k in 0..6 {
        x[k + 1] = d0.vec()[k];
    }
    let mut work = ds.clone();
    let ll0 = loglik(&work, &d0, rho0);
    if !ll0.is_finite() {
        return Err(Error::Numeric(
            "non-finite log-likelihood at the initial point".into(),
        ));
    }
    let mut ll = ll0;
    let mut history = vec![ll0];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_outer {
        iterations += 1;
        let s = signals(&rows, &x);
        let c: Vec<f64> = s
            .iter()
            .zip(&rows.y)
            .map(|(s, y)| bessel_ratio(y * s / work.eta2))
            .collect();
        let cand = m_step(&rows, &c, &x, opts);
        let mut cand_eta2 = work.eta2;
        if opts.estimate_eta2 {
            let s = signals(&rows, &cand);
            let k = rows.y.len() as f64;
            cand_eta2 = s
                .iter()
                .zip(&rows.y)
                .zip(&c)
                .map(|((s, y), c)| y * y + s * s - 2.0 * c * y * s)
                .sum::<f64>()
                / (2.0 * k);
        }
        let (d, rho) = unpack(&cand);
        let rho = opts.fixed_rho.unwrap_or(rho);
        let prev_eta2 = work.eta2;
        work.eta2 = cand_eta2;
        let new_ll = loglik(&work, &d, rho);
        if !(new_ll >= ll) {
            // no ascent left at floating-point resolution
            work.eta2 = prev_eta2;
            converged = true;
            break;
        }
        let rel = (new_ll - ll) / ll.abs().max(1.0);
        x = cand;
        ll = new_ll;
        history.push(ll);
        if rel < opts.rel_tol {
            converged = true;
            break;
        }
    }
    let (mut d_hat, rho_hat) = unpack(&x);
    let rho_hat = opts.fixed_rho.unwrap_or(rho_hat);
    if opts.project_psd {
        let e = d_hat.to_matrix().symmetric_eigen();
        let clipped = e.eigenvalues.map(|v| v.max(0.0));
        let m = &e.eigenvectors * DMatrix::from_diagonal(&clipped) * e.eigenvectors.transpose();
        d_hat = SymMat::from_matrix(&m);
        ll = loglik(&work, &d_hat, rho_hat);
    }
    Ok(TensorFit {
        d_hat,
        rho_hat,
        eta2_hat: work.eta2,
        loglik: ll,
        loglik_init: ll0,
        iterations,
        converged,
        history,
    })
}
