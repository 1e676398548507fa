//! Symmetric matrices, the isotropic Gaussian matrix family, GOE/Haar sampling,
//! spectral decomposition and eigenvalue central moments.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::normal;

pub const SIGN_TOL: f64 = 1e-10;

/// Real symmetric m×m matrix stored as its vec: diagonal first, then the
/// upper off-diagonal entries row by row. For m = 3 this is
/// (D11, D22, D33, D12, D13, D23).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    m: usize,
    v: Vec<f64>,
}

pub fn vec_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Position of entry (i, j) in the vec ordering.
pub fn vec_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        return i;
    }
    m + i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// Inverse of [`vec_index`]: the (i, j), i <= j, stored at position k.
pub fn vec_pair(m: usize, k: usize) -> (usize, usize) {
    if k < m {
        return (k, k);
    }
    let mut r = k - m;
    for i in 0..m {
        let row = m - i - 1;
        if r < row {
            return (i, i + 1 + r);
        }
        r -= row;
    }
    panic!("vec position {k} out of range for m={m}");
}

impl SymMat {
    pub fn zeros(m: usize) -> Self {
        SymMat {
            m,
            v: vec![0.0; vec_len(m)],
        }
    }

    pub fn identity(m: usize) -> Self {
        Self::scaled_identity(m, 1.0)
    }

    pub fn scaled_identity(m: usize, c: f64) -> Self {
        let mut s = Self::zeros(m);
        s.v[..m].iter_mut().for_each(|x| *x = c);
        s
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut s = Self::zeros(d.len());
        s.v[..d.len()].copy_from_slice(d);
        s
    }

    pub fn from_vec(m: usize, v: Vec<f64>) -> Result<Self> {
        if v.len() != vec_len(m) {
            return Err(Error::InvalidInput(format!(
                "vec of length {} for m={m}",
                v.len()
            )));
        }
        Ok(SymMat { m, v })
    }

    /// Symmetrizes `(A + Aᵀ)/2`.
    pub fn from_matrix(a: &DMatrix<f64>) -> Self {
        let m = a.nrows();
        let mut s = Self::zeros(m);
        for i in 0..m {
            for j in i..m {
                s.set(i, j, 0.5 * (a[(i, j)] + a[(j, i)]));
            }
        }
        s
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |i, j| self.get(i, j))
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn vec(&self) -> &[f64] {
        &self.v
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[vec_index(self.m, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        let k = vec_index(self.m, i, j);
        self.v[k] = x;
    }

    pub fn trace(&self) -> f64 {
        self.v[..self.m].iter().sum()
    }

    /// Tr(D²).
    pub fn trace_sq(&self) -> f64 {
        let d: f64 = self.v[..self.m].iter().map(|x| x * x).sum();
        let o: f64 = self.v[self.m..].iter().map(|x| x * x).sum();
        d + 2.0 * o
    }

    pub fn sub(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.m, other.m);
        SymMat {
            m: self.m,
            v: self.v.iter().zip(&other.v).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.m, other.m);
        SymMat {
            m: self.m,
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> SymMat {
        SymMat {
            m: self.m,
            v: self.v.iter().map(|a| a * c).collect(),
        }
    }

    /// `O · self · Oᵀ`.
    pub fn conjugate(&self, o: &DMatrix<f64>) -> SymMat {
        SymMat::from_matrix(&(o * self.to_matrix() * o.transpose()))
    }

    /// `g · self · gᵀ` for a row vector g.
    pub fn quad_form(&self, g: &[f64]) -> f64 {
        let m = self.m;
        let mut s = 0.0;
        for i in 0..m {
            s += self.v[i] * g[i] * g[i];
        }
        for k in m..self.v.len() {
            let (i, j) = vec_pair(m, k);
            s += 2.0 * self.v[k] * g[i] * g[j];
        }
        s
    }
}

pub fn vec(d: &SymMat) -> Vec<f64> {
    d.vec().to_vec()
}

/// Isotropic Gaussian law on m×m symmetric matrices with density
/// `C_m(μ,λ) exp(-μ Tr((D-D̄)²) - λ/2 (Tr(D-D̄))²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicModel {
    pub m: usize,
    pub mu: f64,
    pub lambda: f64,
}

impl IsotropicModel {
    pub fn new(m: usize, mu: f64, lambda: f64) -> Result<Self> {
        let model = IsotropicModel { m, mu, lambda };
        model.validate()?;
        Ok(model)
    }

    pub fn goe(m: usize) -> Self {
        IsotropicModel {
            m,
            mu: 0.5,
            lambda: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidModel(format!("dimension {} < 2", self.m)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "mu = {} must be positive",
                self.mu
            )));
        }
        if !(self.lambda.is_finite() && self.lambda * self.m as f64 > -2.0 * self.mu) {
            return Err(Error::InvalidModel(format!(
                "lambda*m = {} must exceed -2 mu",
                self.lambda * self.m as f64
            )));
        }
        Ok(())
    }

    /// `log C_m(μ,λ)`.
    pub fn log_normalizer(&self) -> f64 {
        let m = self.m as f64;
        0.25 * m * (m - 1.0) * 2f64.ln() - 0.25 * m * (m + 1.0) * PI.ln()
            + 0.25 * m * (m + 1.0) * self.mu.ln()
            + 0.5 * (1.0 + self.lambda * m / (2.0 * self.mu)).ln()
    }

    /// Variance/covariance of diagonal entries: `(δ_ij - λ/(2μ+λm)) / (2μ)`.
    pub fn diag_cov(&self, same: bool) -> f64 {
        let d = if same { 1.0 } else { 0.0 };
        (d - self.lambda / (2.0 * self.mu + self.lambda * self.m as f64)) / (2.0 * self.mu)
    }
}

pub fn precision_matrix(model: &IsotropicModel) -> DMatrix<f64> {
    let m = model.m;
    let n = vec_len(m);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = model.lambda + if i == j { 2.0 * model.mu } else { 0.0 };
        }
    }
    for k in m..n {
        a[(k, k)] = 4.0 * model.mu;
    }
    a
}

pub fn covariance_matrix(model: &IsotropicModel) -> DMatrix<f64> {
    let m = model.m;
    let n = vec_len(m);
    let mut s = DMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] = model.diag_cov(i == j);
        }
    }
    for k in m..n {
        s[(k, k)] = 0.25 / model.mu;
    }
    s
}

pub fn log_density(d: &SymMat, mean: &SymMat, model: &IsotropicModel) -> Result<f64> {
    model.validate()?;
    if d.dim() != model.m || mean.dim() != model.m {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let e = d.sub(mean);
    let t = e.trace();
    Ok(model.log_normalizer() - model.mu * e.trace_sq() - 0.5 * model.lambda * t * t)
}

/// Draws from an isotropic model with a cached factor of the diagonal block.
#[derive(Debug, Clone)]
pub struct Sampler {
    model: IsotropicModel,
    chol: DMatrix<f64>,
    off_sd: f64,
}

impl Sampler {
    pub fn new(model: IsotropicModel) -> Result<Self> {
        model.validate()?;
        let m = model.m;
        let cov = DMatrix::from_fn(m, m, |i, j| model.diag_cov(i == j));
        let chol = match cov.clone().cholesky() {
            Some(c) => c.l(),
            None => {
                let eig = cov.symmetric_eigen();
                let sq = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
                &eig.eigenvectors * sq
            }
        };
        Ok(Sampler {
            model,
            chol,
            off_sd: (0.25 / model.mu).sqrt(),
        })
    }

    pub fn model(&self) -> &IsotropicModel {
        &self.model
    }

    pub fn sample<R: Rng + ?Sized>(&self, mean: &SymMat, rng: &mut R) -> SymMat {
        let m = self.model.m;
        let mut out = mean.clone();
        let z: Vec<f64> = (0..m).map(|_| normal(rng)).collect();
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..m {
                s += self.chol[(i, j)] * z[j];
            }
            out.v[i] += s;
        }
        for k in m..out.v.len() {
            out.v[k] += self.off_sd * normal(rng);
        }
        out
    }
}

pub fn sample<R: Rng + ?Sized>(
    mean: &SymMat,
    model: &IsotropicModel,
    rng: &mut R,
) -> Result<SymMat> {
    Ok(Sampler::new(*model)?.sample(mean, rng))
}

/// GOE: diagonal variance 1, off-diagonal variance 1/2.
pub fn sample_goe<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SymMat {
    let mut s = SymMat::zeros(m);
    for i in 0..m {
        s.v[i] = normal(rng);
    }
    let sd = 0.5f64.sqrt();
    for k in m..s.v.len() {
        s.v[k] = sd * normal(rng);
    }
    s
}

#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    /// Eigenvalues in descending order.
    pub gamma: Vec<f64>,
    /// Eigenvectors as columns, canonical sign.
    pub o: DMatrix<f64>,
    pub degenerate: bool,
}

impl SpectralDecomp {
    pub fn reconstruct(&self) -> SymMat {
        let g = DMatrix::from_diagonal(&DVector::from_column_slice(&self.gamma));
        SymMat::from_matrix(&(&self.o * g * self.o.transpose()))
    }
}

/// Flips the sign of each column so its first entry above `sign_tol` in
/// absolute value is positive.
pub fn canonical_signs(o: &mut DMatrix<f64>, sign_tol: f64) {
    for j in 0..o.ncols() {
        let lead = (0..o.nrows())
            .map(|i| o[(i, j)])
            .find(|x| x.abs() > sign_tol);
        if matches!(lead, Some(x) if x < 0.0) {
            o.column_mut(j).neg_mut();
        }
    }
}

pub fn spectral_decompose(d: &SymMat, sign_tol: f64) -> SpectralDecomp {
    let eig = d.to_matrix().symmetric_eigen();
    let m = d.dim();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let gamma: Vec<f64> = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut o = DMatrix::from_fn(m, m, |i, j| eig.eigenvectors[(i, idx[j])]);
    canonical_signs(&mut o, sign_tol);
    let scale = gamma.iter().fold(1f64, |a, x| a.max(x.abs()));
    let degenerate = gamma.windows(2).any(|w| w[0] - w[1] < 1e-12 * scale);
    SpectralDecomp {
        gamma,
        o,
        degenerate,
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of R's diagonal absorbed into Q.
pub fn haar_orthogonal<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| normal(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralMoments {
    /// `kappa[0]` is the mean eigenvalue, `kappa[r-1]` the r-th central moment.
    pub kappa: Vec<f64>,
}

impl CentralMoments {
    pub fn k(&self, r: usize) -> f64 {
        self.kappa[r - 1]
    }
}

pub fn central_moments(gamma: &[f64], r_max: usize) -> CentralMoments {
    let m = gamma.len() as f64;
    let k1 = gamma.iter().sum::<f64>() / m;
    let mut kappa = vec![k1];
    for r in 2..=r_max {
        kappa.push(gamma.iter().map(|g| (g - k1).powi(r as i32)).sum::<f64>() / m);
    }
    CentralMoments { kappa }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central moments through traces of powers of D, without diagonalizing.
pub fn central_moments_trace(d: &SymMat, r_max: usize) -> CentralMoments {
    let m = d.dim();
    let a = d.to_matrix();
    let mut traces = vec![m as f64];
    let mut p = DMatrix::identity(m, m);
    for _ in 1..=r_max {
        p = &p * &a;
        traces.push(p.trace());
    }
    let mf = m as f64;
    let t1 = traces[1];
    let mut kappa = vec![t1 / mf];
    for r in 2..=r_max {
        let mut s = 0.0;
        for q in 0..=r {
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            s += binom(r, q) * sign * mf.powi(-(q as i32) - 1) * traces[r - q] * t1.powi(q as i32);
        }
        kappa.push(s);
    }
    CentralMoments { kappa }
}
