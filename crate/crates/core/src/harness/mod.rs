//! Monte Carlo experiment runner: replicates Gaussian or Rician studies,
//! streams per-replication rows to CSV and writes a JSON summary and SVG
//! figures.

mod hist;
mod plot;

pub use hist::{Histogram, Reservoir};
pub use plot::{sphere_plot, Plot};

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{barycenter_covariance, cluster, default_cluster_tol, ClusterStructure};
use crate::design::{
    builtin_scheme, fisher_information, fisher_information_joint, isotropy_check,
    read_gradient_table, GradientScheme,
};
use crate::error::{Error, Result};
use crate::gof::{ks_test, GammaAccumulator, GammaFit};
use crate::rician::{mle_fit, simulate_dataset, FitOptions};
use crate::rng::stream;
use crate::special::{chi2_cdf, norm_cdf};
use crate::sphericity::{fa, ra, sphericity_pvalues, tau_statistics, vr};
use crate::symmat::{spectral_decompose, IsotropicModel, Sampler, SymMat, SIGN_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Exact isotropic Gaussian draws around `diag(mean_spectrum)`.
    Gaussian,
    /// Rician magnitudes on a gradient scheme, fitted by maximum likelihood.
    Rician,
}

fn default_workers() -> usize {
    1
}
fn default_output() -> PathBuf {
    PathBuf::from("mc_out")
}
fn default_mu() -> f64 {
    0.5
}
fn default_spectrum() -> Vec<f64> {
    vec![0.0; 3]
}
fn default_rho() -> f64 {
    110.046
}
fn default_eta2() -> f64 {
    64.056
}
fn default_gbar() -> Vec<f64> {
    vec![6.622e-4; 3]
}
fn default_reservoir() -> usize {
    20_000
}
fn default_points() -> usize {
    2_000
}
fn default_gap() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Bundled scheme name (`design1` .. `design5`).
    #[serde(default)]
    pub design: Option<String>,
    /// Gradient table with `b,ux,uy,uz` rows; takes precedence over `design`.
    #[serde(default)]
    pub design_file: Option<PathBuf>,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_spectrum")]
    pub mean_spectrum: Vec<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_eta2")]
    pub eta2: f64,
    #[serde(default = "default_gbar")]
    pub gamma_bar: Vec<f64>,
    /// Re-estimate η² during the Rician fits.
    #[serde(default)]
    pub estimate_eta2: bool,
    /// Estimate ρ jointly; by default it is held at the ground truth.
    #[serde(default)]
    pub fit_rho: bool,
    /// Samples kept for KS tests and histograms.
    #[serde(default = "default_reservoir")]
    pub reservoir: usize,
    /// Replications kept for scatter and eigenvector plots.
    #[serde(default = "default_points")]
    pub eigvec_points: usize,
    #[serde(default = "default_gap")]
    pub repulsion_gap: f64,
}

impl McConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: McConfig =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Data {
            file: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidInput(s.into()));
        if self.n < 100 {
            return bad("n must be at least 100");
        }
        if self.workers == 0 {
            return bad("workers must be positive");
        }
        if self.reservoir < 2 {
            return bad("reservoir must hold at least two samples");
        }
        match self.experiment {
            Experiment::Gaussian => {
                if self.mean_spectrum.len() != 3 {
                    return bad("mean_spectrum must have three entries");
                }
                IsotropicModel::new(3, self.mu, self.lambda)?;
            }
            Experiment::Rician => {
                if self.gamma_bar.len() != 3 {
                    return bad("gamma_bar must have three entries");
                }
                if !(self.rho > 0.0 && self.eta2 > 0.0) {
                    return bad("rho and eta2 must be positive");
                }
                if self.design.is_none() && self.design_file.is_none() {
                    return bad("rician experiments need design or design_file");
                }
            }
        }
        Ok(())
    }
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Everything a replication needs that does not depend on its index.
struct Setup {
    sampler: Option<Sampler>,
    scheme: Option<GradientScheme>,
    mean: SymMat,
    gbar: Vec<f64>,
    clusters: ClusterStructure,
    /// τ scaling, relative noise shape and κ1 reference.
    a: f64,
    lambda_ratio: f64,
    kappa1_ref: f64,
    reference_cov: Option<DMatrix<f64>>,
    fit_opts: FitOptions,
}

fn load_scheme(cfg: &McConfig) -> Result<(String, GradientScheme)> {
    if let Some(p) = &cfg.design_file {
        let f = File::open(p).map_err(|e| Error::Data {
            file: p.display().to_string(),
            reason: e.to_string(),
        })?;
        return Ok((
            p.display().to_string(),
            read_gradient_table(f, &p.display().to_string())?,
        ));
    }
    let name = cfg.design.clone().unwrap_or_default();
    Ok((name.clone(), builtin_scheme(&name)?))
}

impl Setup {
    fn new(cfg: &McConfig) -> Result<(Self, Option<String>)> {
        match cfg.experiment {
            Experiment::Gaussian => {
                let gbar = sorted_desc(&cfg.mean_spectrum);
                let model = IsotropicModel::new(3, cfg.mu, cfg.lambda)?;
                let clusters = cluster(&gbar, default_cluster_tol(&gbar));
                Ok((
                    Setup {
                        sampler: Some(Sampler::new(model)?),
                        scheme: None,
                        mean: SymMat::diag(&cfg.mean_spectrum),
                        kappa1_ref: gbar.iter().sum::<f64>() / 3.0,
                        gbar,
                        clusters,
                        a: cfg.mu,
                        lambda_ratio: cfg.lambda / cfg.mu,
                        reference_cov: None,
                        fit_opts: FitOptions::default(),
                    },
                    None,
                ))
            }
            Experiment::Rician => {
                let (name, scheme) = load_scheme(cfg)?;
                let gbar = sorted_desc(&cfg.gamma_bar);
                let mean = SymMat::diag(&cfg.gamma_bar);
                let info = fisher_information(&scheme, &mean, cfg.rho, cfg.eta2.sqrt())?;
                let a = isotropy_check(&info.total, 1e-6).mu_bar;
                let singular = || Error::Numeric("Fisher information is singular".into());
                let reference_cov = if cfg.fit_rho {
                    let joint = fisher_information_joint(&scheme, &mean, cfg.rho, cfg.eta2.sqrt())?;
                    joint
                        .try_inverse()
                        .ok_or_else(singular)?
                        .view((0, 0), (6, 6))
                        .into_owned()
                } else {
                    info.total.clone().try_inverse().ok_or_else(singular)?
                };
                let clusters = cluster(&gbar, default_cluster_tol(&gbar));
                Ok((
                    Setup {
                        sampler: None,
                        scheme: Some(scheme),
                        mean,
                        kappa1_ref: gbar.iter().sum::<f64>() / 3.0,
                        gbar,
                        clusters,
                        a,
                        lambda_ratio: 1.0,
                        reference_cov: Some(reference_cov),
                        fit_opts: FitOptions {
                            estimate_eta2: cfg.estimate_eta2,
                            fixed_rho: (!cfg.fit_rho).then_some(cfg.rho),
                            ..FitOptions::default()
                        },
                    },
                    Some(name),
                ))
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Fitted {
    d: [f64; 6],
    rho: f64,
    converged: bool,
    iterations: usize,
}

#[derive(Debug, Clone)]
struct RepRow {
    gamma: [f64; 3],
    o: DMatrix<f64>,
    tau: [f64; 6],
    p: [f64; 3],
    shape: [f64; 3],
    fit: Option<Fitted>,
}

const TAU_NAMES: [&str; 6] = ["tau1", "tau2", "tau3", "tau4", "tau5", "tau6"];

fn replicate(cfg: &McConfig, setup: &Setup, index: u64) -> Result<Option<RepRow>> {
    let mut rng = stream(cfg.seed, index);
    let (d, fit) = match cfg.experiment {
        Experiment::Gaussian => (
            setup
                .sampler
                .as_ref()
                .expect("gaussian setup")
                .sample(&setup.mean, &mut rng),
            None,
        ),
        Experiment::Rician => {
            let scheme = setup.scheme.as_ref().expect("rician setup");
            let ds = simulate_dataset(scheme, &setup.mean, cfg.rho, cfg.eta2, &mut rng)?;
            match mle_fit(&ds, &setup.fit_opts) {
                Ok(f) => {
                    let mut v = [0.0; 6];
                    v.copy_from_slice(f.d_hat.vec());
                    let fitted = Fitted {
                        d: v,
                        rho: f.rho_hat,
                        converged: f.converged,
                        iterations: f.iterations,
                    };
                    (f.d_hat, Some(fitted))
                }
                Err(Error::Numeric(_) | Error::RankDeficient { .. } | Error::Degenerate(_)) => {
                    return Ok(None)
                }
                Err(e) => return Err(e),
            }
        }
    };
    let sd = spectral_decompose(&d, SIGN_TOL);
    let gamma = [sd.gamma[0], sd.gamma[1], sd.gamma[2]];
    let t = tau_statistics(&gamma, setup.a, setup.kappa1_ref)?;
    let pv = sphericity_pvalues(&t, setup.lambda_ratio)?;
    Ok(Some(RepRow {
        gamma,
        o: sd.o,
        tau: [
            t.tau1,
            t.tau2,
            t.tau3.unwrap_or(f64::NAN),
            t.tau4,
            t.tau5,
            t.tau6,
        ],
        p: [pv.tau1, pv.tau2, pv.tau5.unwrap_or(f64::NAN)],
        shape: [
            fa(&gamma).unwrap_or(f64::NAN),
            ra(&gamma).unwrap_or(f64::NAN),
            vr(&gamma).unwrap_or(f64::NAN),
        ],
        fit,
    }))
}

/// Streaming mean and co-moment matrix (Welford).
#[derive(Debug, Clone)]
struct CovAccumulator {
    n: u64,
    mean: Vec<f64>,
    m2: DMatrix<f64>,
}

impl CovAccumulator {
    fn new(p: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; p],
            m2: DMatrix::zeros(p, p),
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d / n;
        }
        for i in 0..x.len() {
            for j in 0..x.len() {
                self.m2[(i, j)] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    fn covariance(&self) -> DMatrix<f64> {
        &self.m2 / (self.n.max(2) - 1) as f64
    }
}

/// Files written so far; removed again if the run fails.
struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
            done: false,
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, content).map_err(|e| io_err(&p, e))
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.done {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn io_err(p: &Path, e: impl ToString) -> Error {
    Error::Data {
        file: p.display().to_string(),
        reason: e.to_string(),
    }
}

fn ks_json(name: &str, samples: &[f64], cdf: impl Fn(f64) -> f64) -> serde_json::Value {
    let x: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    match ks_test(&x, cdf) {
        Ok(r) => {
            json!({ "reference": name, "statistic": r.statistic, "p_value": r.p_value, "n": x.len() })
        }
        Err(e) => json!({ "reference": name, "error": e.to_string() }),
    }
}

fn gamma_json(fit: &Result<GammaFit>) -> serde_json::Value {
    match fit {
        Ok(g) => {
            json!({ "shape": g.shape, "scale": g.scale, "n_used": g.n_used, "n_excluded": g.n_excluded })
        }
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ((shape - 1.0) * x.ln() - x / scale - crate::special::ln_gamma(shape) - shape * scale.ln())
        .exp()
}

fn chi2_5_pdf(x: f64) -> f64 {
    gamma_pdf(x, 2.5, 2.0)
}

fn curve(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..=200)
        .map(|i| lo + (hi - lo) * i as f64 / 200.0)
        .map(|x| (x, f(x)))
        .collect()
}

fn matrix_json(m: &DMatrix<f64>) -> serde_json::Value {
    json!((0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

/// Least-squares slope of the τ3 histogram density against bin centre.
fn trend_slope(h: &Histogram) -> f64 {
    let x = h.centers();
    let y = h.density();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Summary of a finished run, as also written to `summary.json`.
#[derive(Debug, Clone)]
pub struct McReport {
    pub summary: serde_json::Value,
    pub files: Vec<PathBuf>,
}

const CHUNK: usize = 512;

/// Runs the experiment and writes `replications.csv`, `summary.json`,
/// `eigvec.csv` and the `fig_*.svg` files into `cfg.output_dir`.
pub fn run_mc(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let (setup, design_name) = Setup::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    let mut out = Outputs::new(&cfg.output_dir)?;

    let rep_path = out.path("replications.csv");
    let mut rep = BufWriter::new(File::create(&rep_path).map_err(|e| io_err(&rep_path, e))?);
    let rician = cfg.experiment == Experiment::Rician;
    let mut header = String::from("rep,gamma1,gamma2,gamma3,");
    header += &TAU_NAMES.join(",");
    header += ",p_tau1,p_tau2,p_tau5,fa,ra,vr";
    if rician {
        header += ",d11,d22,d33,d12,d13,d23,rho_hat,converged,iterations";
    }
    writeln!(rep, "{header}").map_err(|e| io_err(&rep_path, e))?;

    let seed_aux = cfg.seed ^ 0x5eed_0f_a11;
    let mut res_tau: Vec<Reservoir> = (0..6)
        .map(|k| Reservoir::new(cfg.reservoir, seed_aux.wrapping_add(k)))
        .collect();
    let mut res_bary = Reservoir::new(cfg.reservoir, seed_aux.wrapping_add(6));
    let mut gam2 = GammaAccumulator::default();
    let mut gam5 = GammaAccumulator::default();
    let mut gam6 = GammaAccumulator::default();
    let mut tau3_hist = Histogram::new(-1.0, 1.0, 20);
    let mut reject = [0u64; 3];
    let mut pvals_seen = [0u64; 3];
    let mut close_pairs = 0u64;
    let mut close_any = 0u64;
    let mut cov = CovAccumulator::new(6);
    let mut failures = 0u64;
    let mut nonconverged = 0u64;
    let mut pairs: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    let mut eig_points: Vec<[f64; 3]> = Vec::new();
    let mut order_rng = stream(seed_aux, u64::MAX - 1);
    let eig_path = out.path("eigvec.csv");
    let mut eig = BufWriter::new(File::create(&eig_path).map_err(|e| io_err(&eig_path, e))?);
    writeln!(eig, "rep,k,x,y,z").map_err(|e| io_err(&eig_path, e))?;
    let kept_cluster = setup.clusters.boundaries[1];
    let bary_sd = (barycenter_covariance(&setup.clusters.sizes, setup.lambda_ratio)[(0, 0)]).sqrt();

    let mut start = 0usize;
    while start < cfg.n {
        let end = (start + CHUNK).min(cfg.n);
        let rows: Vec<Result<Option<RepRow>>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| replicate(cfg, &setup, i as u64))
                .collect()
        });
        for (offset, row) in rows.into_iter().enumerate() {
            let i = start + offset;
            let Some(r) = row? else {
                failures += 1;
                let mut line = format!("{i}");
                line += &",NaN".repeat(3 + 6 + 3 + 3);
                line += ",NaN,NaN,NaN,NaN,NaN,NaN,NaN,false,0";
                writeln!(rep, "{line}").map_err(|e| io_err(&rep_path, e))?;
                continue;
            };
            let mut line = format!("{i}");
            for v in r.gamma.iter().chain(&r.tau).chain(&r.p).chain(&r.shape) {
                line += &format!(",{v:e}");
            }
            if let Some(f) = &r.fit {
                for v in f.d.iter().chain(std::iter::once(&f.rho)) {
                    line += &format!(",{v:e}");
                }
                line += &format!(",{},{}", f.converged, f.iterations);
                cov.push(&f.d);
                if !f.converged {
                    nonconverged += 1;
                }
            }
            writeln!(rep, "{line}").map_err(|e| io_err(&rep_path, e))?;

            for (k, res) in res_tau.iter_mut().enumerate() {
                res.push(r.tau[k]);
            }
            gam2.push(r.tau[1]);
            gam5.push(r.tau[4]);
            gam6.push(r.tau[5]);
            tau3_hist.add(r.tau[2]);
            for k in 0..3 {
                if r.p[k].is_finite() {
                    pvals_seen[k] += 1;
                    if r.p[k] < 0.05 {
                        reject[k] += 1;
                    }
                }
            }
            let gaps = [
                r.gamma[0] - r.gamma[1],
                r.gamma[1] - r.gamma[2],
                r.gamma[0] - r.gamma[2],
            ];
            let close = gaps.iter().filter(|g| g.abs() < cfg.repulsion_gap).count() as u64;
            close_pairs += close;
            close_any += (close > 0) as u64;
            let xi = r.gamma[..kept_cluster].iter().sum::<f64>() / kept_cluster as f64;
            res_bary.push(setup.a.sqrt() * (xi - setup.clusters.representatives[0]));
            if i < cfg.eigvec_points {
                for (p, (a, b)) in pairs.iter_mut().zip([(0, 1), (1, 2)]) {
                    let (x, y) = (r.gamma[a], r.gamma[b]);
                    p.push(if order_rng.random::<bool>() {
                        (x, y)
                    } else {
                        (y, x)
                    });
                }
                for k in 0..3 {
                    let v = [r.o[(0, k)], r.o[(1, k)], r.o[(2, k)]];
                    writeln!(eig, "{i},{},{:e},{:e},{:e}", k + 1, v[0], v[1], v[2])
                        .map_err(|e| io_err(&eig_path, e))?;
                    if k == 0 {
                        eig_points.push(v);
                    }
                }
            }
        }
        start = end;
    }
    rep.flush().map_err(|e| io_err(&rep_path, e))?;
    eig.flush().map_err(|e| io_err(&eig_path, e))?;
    drop(rep);
    drop(eig);

    let n_ok = cfg.n as u64 - failures;
    if n_ok < 2 {
        return Err(Error::Numeric(format!(
            "{failures} of {} replications failed",
            cfg.n
        )));
    }
    let lam = setup.lambda_ratio;
    let tau1_sd = (1.0 / (6.0 + 9.0 * lam)).sqrt();
    let abs_tau3: Vec<f64> = res_tau[2].values.iter().map(|t| t.abs()).collect();
    let fit2 = gam2.fit();
    let fit5 = gam5.fit();
    let mut summary = json!({
        "experiment": cfg.experiment,
        "n": cfg.n,
        "seed": cfg.seed,
        "design": design_name,
        "replications_ok": n_ok,
        "fit_failures": failures,
        "nonconverged": nonconverged,
        "tau_scaling": { "a": setup.a, "lambda_ratio": lam, "kappa1_ref": setup.kappa1_ref },
        "mean_spectrum": setup.gbar,
        "gamma_fits": { "tau2": gamma_json(&fit2), "tau5": gamma_json(&fit5), "tau6": gamma_json(&gam6.fit()) },
        "ks": {
            "tau1_normal": ks_json("N(0, 1/(6+9*lambda))", &res_tau[0].values, |x| norm_cdf(x / tau1_sd)),
            "tau2_chi2_5": ks_json("chi2(5)", &res_tau[1].values, |x| chi2_cdf(5.0, x)),
            "tau3_uniform": ks_json("U[-1,1]", &res_tau[2].values, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0)),
            "abs_tau3_uniform": ks_json("U[0,1]", &abs_tau3, |x| x.clamp(0.0, 1.0)),
            "tau5_chi2_5": ks_json("chi2(5)", &res_tau[4].values, |x| chi2_cdf(5.0, x)),
            "barycenter_normal": ks_json("N(0, barycenter variance)", &res_bary.values, |x| norm_cdf(x / bary_sd)),
        },
        "rejection_rate_0_05": {
            "tau1": reject[0] as f64 / pvals_seen[0].max(1) as f64,
            "tau2": reject[1] as f64 / pvals_seen[1].max(1) as f64,
            "tau5": reject[2] as f64 / pvals_seen[2].max(1) as f64,
        },
        "repulsion": {
            "gap": cfg.repulsion_gap,
            "pair_fraction": close_pairs as f64 / (3 * n_ok) as f64,
            "any_pair_fraction": close_any as f64 / n_ok as f64,
        },
        "tau3_trend_slope": trend_slope(&tau3_hist),
        "reservoir": cfg.reservoir,
    });
    if let Some(reference) = &setup.reference_cov {
        let c = cov.covariance();
        let rel = (&c - reference).norm() / reference.norm();
        summary["d_hat"] = json!({
            "mean": cov.mean,
            "covariance": matrix_json(&c),
            "reference_covariance": matrix_json(reference),
            "rel_frobenius_error": rel,
        });
    }

    // figures
    let tau = |k: usize| res_tau[k].values.clone();
    let h2 = Histogram::freedman_diaconis(&tau(1));
    let mut p2 = Plot::new("tau2", "tau2", "density")
        .histogram(&h2, "#9ecae1")
        .line(
            curve(h2.lo.max(1e-9), h2.hi, chi2_5_pdf),
            "#d62728",
            Some("chi2(5)"),
        );
    if let Ok(g) = &fit2 {
        p2 = p2.line(
            curve(h2.lo.max(1e-9), h2.hi, |x| gamma_pdf(x, g.shape, g.scale)),
            "#2ca02c",
            Some("gamma fit"),
        );
    }
    out.write("fig_tau2.svg", &p2.render())?;

    let h5 = Histogram::freedman_diaconis(&tau(4));
    let mut p5 = Plot::new("tau5", "tau5", "density")
        .histogram(&h5, "#9ecae1")
        .line(
            curve(h5.lo.max(1e-9), h5.hi, chi2_5_pdf),
            "#d62728",
            Some("chi2(5)"),
        );
    if let Ok(g) = &fit5 {
        p5 = p5.line(
            curve(h5.lo.max(1e-9), h5.hi, |x| gamma_pdf(x, g.shape, g.scale)),
            "#2ca02c",
            Some("gamma fit"),
        );
    }
    out.write("fig_tau5.svg", &p5.render())?;

    let h1 = Histogram::freedman_diaconis(&tau(0));
    let p1 = Plot::new("tau1", "tau1", "density")
        .histogram(&h1, "#9ecae1")
        .line(
            curve(h1.lo, h1.hi, |x| {
                crate::special::norm_pdf(x / tau1_sd) / tau1_sd
            }),
            "#d62728",
            Some("normal limit"),
        );
    out.write("fig_tau1.svg", &p1.render())?;

    let h3 = Histogram::freedman_diaconis(&tau(2));
    let p3 = Plot::new("tau3", "tau3", "density")
        .histogram(&h3, "#9ecae1")
        .line(vec![(-1.0, 0.5), (1.0, 0.5)], "#d62728", Some("uniform"));
    out.write("fig_tau3.svg", &p3.render())?;

    let scatter: Vec<(f64, f64)> = res_tau[1]
        .values
        .iter()
        .zip(&res_tau[2].values)
        .map(|(&a, &b)| (a, b))
        .take(cfg.eigvec_points)
        .collect();
    out.write(
        "fig_tau2_tau3.svg",
        &Plot::new("tau2 against tau3", "tau2", "tau3")
            .scatter(scatter, "#1f77b4", 1.5)
            .render(),
    )?;

    let hb = Histogram::freedman_diaconis(&res_bary.values);
    let pb = Plot::new(
        "scaled barycenter of the leading cluster",
        "sqrt(a) (xi - gbar)",
        "density",
    )
    .histogram(&hb, "#9ecae1")
    .line(
        curve(hb.lo, hb.hi, |x| {
            crate::special::norm_pdf(x / bary_sd) / bary_sd
        }),
        "#d62728",
        Some("Gaussian limit"),
    );
    out.write("fig_barycenter.svg", &pb.render())?;

    for (k, (p, label)) in pairs.iter().zip(["12", "23"]).enumerate() {
        let plot = Plot::new(
            &format!("eigenvalue pair ({}, {}), random order", k + 1, k + 2),
            "eigenvalue",
            "eigenvalue",
        )
        .scatter(p.clone(), "#1f77b4", 1.5);
        out.write(&format!("fig_pairs_{label}.svg"), &plot.render())?;
    }
    out.write(
        "fig_eigvec.svg",
        &sphere_plot("leading eigenvector", &eig_points),
    )?;

    let sum_path = out.path("summary.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| io_err(&sum_path, e))?;
    fs::write(&sum_path, text + "\n").map_err(|e| io_err(&sum_path, e))?;

    out.done = true;
    Ok(McReport {
        summary,
        files: out.files.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_cfg(dir: &Path, workers: usize) -> McConfig {
        McConfig::from_toml(&format!(
            "experiment = \"gaussian\"\nn = 600\nseed = 7\nworkers = {workers}\noutput_dir = \"{}\"\nmu = 2.0\nlambda = 1.0\n",
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::from_toml("experiment = \"gaussian\"\nn = 50\nseed = 1\n").is_err());
        assert!(McConfig::from_toml("experiment = \"rician\"\nn = 500\nseed = 1\n").is_err());
        assert!(
            McConfig::from_toml("experiment = \"gaussian\"\nn = 500\nseed = 1\nbogus = 3\n")
                .is_err()
        );
        let c = McConfig::from_toml(
            "experiment = \"rician\"\nn = 500\nseed = 1\ndesign = \"design1\"\n",
        )
        .unwrap();
        assert_eq!(c.gamma_bar, vec![6.622e-4; 3]);
    }

    #[test]
    fn gaussian_run_writes_all_outputs() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("run");
        let rep = run_mc(&gaussian_cfg(&dir, 2)).unwrap();
        for f in [
            "replications.csv",
            "summary.json",
            "eigvec.csv",
            "fig_tau2.svg",
            "fig_pairs_12.svg",
            "fig_eigvec.svg",
        ] {
            assert!(dir.join(f).exists(), "{f}");
        }
        let text = fs::read_to_string(dir.join("replications.csv")).unwrap();
        assert_eq!(text.lines().count(), 601);
        assert!(
            rep.summary["ks"]["tau2_chi2_5"]["p_value"]
                .as_f64()
                .unwrap()
                > 1e-4
        );
        let shape = rep.summary["gamma_fits"]["tau2"]["shape"].as_f64().unwrap();
        assert!((shape - 2.5).abs() < 0.5);
    }

    #[test]
    fn worker_count_does_not_change_rows() {
        let tmp = tempfile::tempdir().unwrap();
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        run_mc(&gaussian_cfg(&a, 1)).unwrap();
        run_mc(&gaussian_cfg(&b, 3)).unwrap();
        for f in ["replications.csv", "eigvec.csv", "summary.json"] {
            assert_eq!(
                fs::read(a.join(f)).unwrap(),
                fs::read(b.join(f)).unwrap(),
                "{f}"
            );
        }
    }

    #[test]
    fn failure_removes_partial_outputs() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("bad");
        let mut cfg = McConfig::from_toml(&format!(
            "experiment = \"rician\"\nn = 200\nseed = 1\ndesign = \"design1\"\noutput_dir = \"{}\"\n",
            dir.display()
        ))
        .unwrap();
        cfg.design = Some("nonexistent".into());
        assert!(run_mc(&cfg).is_err());
        assert!(!dir.exists());
    }

    #[test]
    fn welford_matches_batch() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.3).cos(), i as f64])
            .collect();
        let mut acc = CovAccumulator::new(3);
        for r in &rows {
            acc.push(r);
        }
        let batch = crate::gof::covariance(&rows);
        assert!((acc.covariance() - batch).norm() < 1e-10);
    }
}
