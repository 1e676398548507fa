use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use isomat::design::{
    builtin_design, builtin_design_names, builtin_scheme, design4_shells, fisher_information,
    format_rotation_table, halve_antipodal, isotropy_check, optimize_shell_rotations, read_design,
    read_gradient_table, verify_t_design, write_gradient_table, GradientScheme, SphericalDesign,
};
use isomat::eigen_laws::{
    ad_cdf_centered, ad_density_centered, log_eigdensity_general, HcizConfig, OrderedSpectrum,
};
use isomat::harness::{run_mc, McConfig};
use isomat::rician::{mle_fit, read_dataset, simulate_dataset, write_dataset, FitOptions};
use isomat::rng::stream;
use isomat::special::chi2_sf;
use isomat::sphericity::{
    default_thresholds, fa, ra, sphericity_pvalues, symmetry_classify, tau_statistics,
    two_sample_combine, two_sample_stat, vr,
};
use isomat::symmat::{
    log_density, sample_goe, spectral_decompose, vec_len, vec_pair, IsotropicModel, Sampler,
    SymMat, SIGN_TOL,
};
use isomat::{Error, Result};

// stdout writes that tolerate a closed pipe
macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "isomat",
    version,
    about = "Isotropic random symmetric matrices, sphericity tests and DTI designs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw isotropic Gaussian matrices (vec entries or eigenvalues) as CSV.
    Sample(SampleArgs),
    /// Evaluate matrix, eigenvalue or AD densities.
    #[command(subcommand)]
    Density(DensityCmd),
    /// Sphericity statistics, symmetry classification and two-sample tests.
    #[command(subcommand)]
    Test(TestCmd),
    /// Spherical designs and gradient schemes.
    #[command(subcommand)]
    Design(DesignCmd),
    /// Simulate a Rician dataset on a gradient scheme.
    Simulate(SimulateArgs),
    /// Maximum-likelihood tensor fit of a Rician dataset.
    Fit(FitArgs),
    /// Run a Monte Carlo study from a TOML config.
    Mc(McArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Mean eigenvalues; the mean matrix is diagonal.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mean_spectrum: Option<Vec<f64>>,
    /// Standard GOE draws (diagonal variance 1) instead of the (μ, λ) model.
    #[arg(long)]
    goe: bool,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print descending eigenvalues instead of vec(D).
    #[arg(long)]
    eigen: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum HcizMethodArg {
    Quadrature,
    Mc,
}

#[derive(Subcommand)]
enum DensityCmd {
    /// Log density of a matrix given in vec order (diagonal first, then upper triangle by rows).
    Matrix {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        d: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mean: Option<Vec<f64>>,
    },
    /// Joint density of the ordered eigenvalues.
    Eigen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        gamma: Vec<f64>,
        /// Mean eigenvalues; zero when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gbar: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "quadrature")]
        method: HcizMethodArg,
        #[arg(long, default_value_t = 48)]
        nodes: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// CDF and density of the centred largest eigenvalue for a spherical mean.
    Ad {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        mu: f64,
    },
}

#[derive(Subcommand)]
enum TestCmd {
    /// τ1..τ6 with limit-law p-values.
    Tau {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        gamma: Vec<f64>,
        #[arg(long)]
        a: f64,
        /// Hypothesized mean eigenvalue; defaults to the sample mean.
        #[arg(long, allow_hyphen_values = true)]
        kappa1_ref: Option<f64>,
        /// Noise shape relative to the scaling.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Isotropic / oblate / prolate / asymmetric verdict.
    Classify {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        gamma: Vec<f64>,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        c_n: Option<f64>,
        #[arg(long)]
        p_n: Option<f64>,
    },
    /// Equality of two mean tensors from their estimates.
    TwoSample {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        d1: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        d2: Vec<f64>,
        #[arg(long)]
        mu1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda1: f64,
        #[arg(long)]
        mu2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda2: f64,
    },
}

#[derive(Args)]
struct SchemeArgs {
    /// Bundled scheme name (design1 .. design5).
    #[arg(long, conflicts_with = "table")]
    scheme: Option<String>,
    /// Gradient table with `b,ux,uy,uz` rows.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct TruthArgs {
    /// Spherical tensor c·I.
    #[arg(long, conflicts_with = "d")]
    spherical: Option<f64>,
    /// vec(D) as D11,D22,D33,D12,D13,D23.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    d: Option<Vec<f64>>,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    eta2: f64,
}

#[derive(Subcommand)]
enum DesignCmd {
    /// Check the t-design property.
    Verify {
        /// Point table with `ux,uy,uz` rows.
        #[arg(long, conflicts_with = "name")]
        file: Option<PathBuf>,
        /// Bundled point set.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        t: u32,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Check only even-degree monomials.
        #[arg(long)]
        even_only: bool,
        /// Keep one point of each antipodal pair first.
        #[arg(long)]
        halve: bool,
    },
    /// Optimize the relative rotations of the design-4 shells.
    Optimize {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        /// Write the rotation table here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fisher information of a scheme at a ground-truth tensor.
    Fisher {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        truth: TruthArgs,
        /// Relative Frobenius residual allowed for isotropy.
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
    },
    /// Write a scheme as a gradient table.
    Export {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the bundled point sets.
    List,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    truth: TruthArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV with `b,ux,uy,uz,Y` rows.
    #[arg(long)]
    data: PathBuf,
    /// JSON sidecar; defaults to the CSV path with a .json extension.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    estimate_eta2: bool,
    #[arg(long)]
    project_psd: bool,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| data_err(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn data_err(p: &Path, e: impl ToString) -> Error {
    Error::Data {
        file: p.display().to_string(),
        reason: e.to_string(),
    }
}

fn w_err(e: io::Error) -> Error {
    Error::Data {
        file: "<output>".into(),
        reason: e.to_string(),
    }
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:e}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn vec_names(m: usize) -> Vec<String> {
    (0..vec_len(m))
        .map(|k| vec_pair(m, k))
        .map(|(i, j)| format!("d{}{}", i + 1, j + 1))
        .collect()
}

fn symmat_from(m: usize, v: &[f64]) -> Result<SymMat> {
    if v.len() != vec_len(m) {
        return Err(bad(format!(
            "expected {} vec entries for m={m}, got {}",
            vec_len(m),
            v.len()
        )));
    }
    SymMat::from_vec(m, v.to_vec())
}

fn truth_tensor(t: &TruthArgs) -> Result<SymMat> {
    match (&t.spherical, &t.d) {
        (Some(c), None) => Ok(SymMat::scaled_identity(3, *c)),
        (None, Some(v)) => symmat_from(3, v),
        _ => Err(bad("give exactly one of --spherical or --d")),
    }
}

fn load_scheme(s: &SchemeArgs) -> Result<GradientScheme> {
    match (&s.scheme, &s.table) {
        (Some(name), None) => builtin_scheme(name),
        (None, Some(p)) => read_gradient_table(
            File::open(p).map_err(|e| data_err(p, e))?,
            &p.display().to_string(),
        ),
        _ => Err(bad("give exactly one of --scheme or --table")),
    }
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    let m = a.model.m;
    let mut rng = stream(a.seed, 0);
    let mean = match &a.mean_spectrum {
        Some(s) if s.len() != m => return Err(bad("mean spectrum length differs from m")),
        Some(s) => SymMat::diag(s),
        None => SymMat::zeros(m),
    };
    let sampler = if a.goe {
        None
    } else {
        Some(Sampler::new(IsotropicModel::new(
            m,
            a.model.mu,
            a.model.lambda,
        )?)?)
    };
    let mut out = open_out(&a.output)?;
    let header: Vec<String> = if a.eigen {
        (1..=m).map(|i| format!("gamma{i}")).collect()
    } else {
        vec_names(m)
    };
    writeln!(out, "{}", header.join(",")).map_err(w_err)?;
    for _ in 0..a.n {
        let d = match &sampler {
            Some(s) => s.sample(&mean, &mut rng),
            None => sample_goe(m, &mut rng).add(&mean),
        };
        let row = if a.eigen {
            spectral_decompose(&d, SIGN_TOL).gamma
        } else {
            d.vec().to_vec()
        };
        writeln!(out, "{}", join(&row)).map_err(w_err)?;
    }
    out.flush().map_err(w_err)
}

fn cmd_density(c: DensityCmd) -> Result<()> {
    match c {
        DensityCmd::Matrix { model, d, mean } => {
            let mdl = IsotropicModel::new(model.m, model.mu, model.lambda)?;
            let d = symmat_from(model.m, &d)?;
            let mean = match mean {
                Some(v) => symmat_from(model.m, &v)?,
                None => SymMat::zeros(model.m),
            };
            let l = log_density(&d, &mean, &mdl)?;
            outln!("log_density = {l:e}\ndensity = {:e}", l.exp());
        }
        DensityCmd::Eigen {
            model,
            gamma,
            gbar,
            method,
            nodes,
            samples,
            seed,
        } => {
            let mdl = IsotropicModel::new(model.m, model.mu, model.lambda)?;
            let gbar = gbar.unwrap_or_else(|| vec![0.0; gamma.len()]);
            let spec = OrderedSpectrum::new(gamma, gbar)?;
            let cfg = match method {
                HcizMethodArg::Quadrature => HcizConfig::quadrature(nodes),
                HcizMethodArg::Mc => HcizConfig::haar_mc(samples, seed),
            };
            let l = log_eigdensity_general(&spec, &mdl, &cfg)?;
            outln!("log_density = {l:e}\ndensity = {:e}", l.exp());
        }
        DensityCmd::Ad { t, mu } => {
            if !(mu > 0.0) {
                return Err(Error::InvalidModel("mu must be positive".into()));
            }
            outln!(
                "cdf = {:e}\ndensity = {:e}",
                ad_cdf_centered(t, mu),
                ad_density_centered(t, mu)
            );
        }
    }
    Ok(())
}

fn descending(mut g: Vec<f64>) -> Vec<f64> {
    g.sort_by(|a, b| b.total_cmp(a));
    g
}

fn opt(v: Option<f64>) -> String {
    v.map_or("undefined".into(), |x| format!("{x:e}"))
}

fn cmd_test(c: TestCmd) -> Result<()> {
    match c {
        TestCmd::Tau {
            gamma,
            a,
            kappa1_ref,
            lambda,
        } => {
            let gamma = descending(gamma);
            let k1 = kappa1_ref.unwrap_or(gamma.iter().sum::<f64>() / gamma.len() as f64);
            let t = tau_statistics(&gamma, a, k1)?;
            let p = sphericity_pvalues(&t, lambda)?;
            outln!(
                "tau1 = {:e}\ntau2 = {:e}\ntau3 = {}",
                t.tau1,
                t.tau2,
                opt(t.tau3)
            );
            outln!(
                "tau4 = {:e}\ntau5 = {:e}\ntau6 = {:e}",
                t.tau4,
                t.tau5,
                t.tau6
            );
            outln!(
                "fa = {:e}\nra = {:e}\nvr = {:e}",
                fa(&gamma)?,
                ra(&gamma)?,
                vr(&gamma)?
            );
            outln!(
                "p_tau1 = {:e}\np_tau2 = {:e}\np_tau3 = {}\np_tau5 = {}",
                p.tau1,
                p.tau2,
                opt(p.tau3),
                opt(p.tau5)
            );
        }
        TestCmd::Classify { gamma, a, c_n, p_n } => {
            let gamma = descending(gamma);
            let (c0, p0) = match (c_n, p_n) {
                (Some(c), Some(p)) => (c, p),
                (c, p) => {
                    let (dc, dp) = default_thresholds(a)?;
                    (c.unwrap_or(dc), p.unwrap_or(dp))
                }
            };
            let v = symmetry_classify(&gamma, a, c0, p0)?;
            outln!(
                "regime = {}\nestimate = {}\nc_n = {:e}\np_n = {:e}",
                v.regime.name(),
                join(&v.estimate),
                v.c_n,
                v.p_n
            );
        }
        TestCmd::TwoSample {
            d1,
            d2,
            mu1,
            lambda1,
            mu2,
            lambda2,
        } => {
            let m = (0..10)
                .find(|&m| vec_len(m) == d1.len())
                .ok_or_else(|| bad("d1 is not a vec(D) length"))?;
            let (a, b) = (symmat_from(m, &d1)?, symmat_from(m, &d2)?);
            let (mu, lambda) = two_sample_combine(mu1, lambda1, mu2, lambda2, m)?;
            let s = two_sample_stat(&a.sub(&b), mu, lambda);
            let dof = vec_len(m) as f64;
            outln!(
                "mu = {mu:e}\nlambda = {lambda:e}\nstatistic = {s:e}\ndof = {dof}\np_value = {:e}",
                chi2_sf(dof, s)
            );
        }
    }
    Ok(())
}

fn cmd_design(c: DesignCmd) -> Result<()> {
    match c {
        DesignCmd::Verify {
            file,
            name,
            t,
            tol,
            even_only,
            halve,
        } => {
            let mut d: SphericalDesign = match (file, name) {
                (Some(p), None) => read_design(
                    File::open(&p).map_err(|e| data_err(&p, e))?,
                    &p.display().to_string(),
                )?,
                (None, Some(n)) => builtin_design(&n)?,
                _ => return Err(bad("give exactly one of --file or --name")),
            };
            if halve {
                d = halve_antipodal(&d)?;
            }
            let r = verify_t_design(&d, t, tol, even_only);
            outln!(
                "points = {}\nt = {t}\nmonomials = {}",
                d.len(),
                r.monomials_checked
            );
            outln!(
                "max_violation = {:e}\nresult = {}",
                r.max_violation,
                if r.passed { "pass" } else { "fail" }
            );
            if !r.passed {
                return Err(Error::Numeric(format!("not a {t}-design within {tol:e}")));
            }
        }
        DesignCmd::Optimize {
            seed,
            iters,
            output,
        } => {
            let shells: Vec<SphericalDesign> =
                design4_shells()?.into_iter().map(|(_, d)| d).collect();
            let r = optimize_shell_rotations(&shells, iters, &mut stream(seed, 0))?;
            eprintln!(
                "min cross-shell distance {:.6} -> {:.6} rad after {} sweeps",
                r.initial_objective, r.objective, r.sweeps
            );
            let mut out = open_out(&output)?;
            out.write_all(format_rotation_table(&r.angles).as_bytes())
                .map_err(w_err)?;
            out.flush().map_err(w_err)?;
        }
        DesignCmd::Fisher {
            scheme,
            truth,
            rel_tol,
        } => {
            let s = load_scheme(&scheme)?;
            let d = truth_tensor(&truth)?;
            if !(truth.eta2 > 0.0) {
                return Err(bad("eta2 must be positive"));
            }
            let f = fisher_information(&s, &d, truth.rho, truth.eta2.sqrt())?;
            let iso = isotropy_check(&f.total, rel_tol);
            outln!("acquisitions = {}", f.n_acquisitions);
            outln!(
                "mu_bar = {:e}\nisotropic = {}\nresidual = {:e}",
                iso.mu_bar,
                iso.isotropic,
                iso.residual
            );
            let cov = f
                .total
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numeric("information is singular".into()))?;
            outln!("covariance (vec order d11,d22,d33,d12,d13,d23):");
            for i in 0..6 {
                outln!("{}", join(&(0..6).map(|j| cov[(i, j)]).collect::<Vec<_>>()));
            }
        }
        DesignCmd::Export { scheme, output } => {
            let s = load_scheme(&scheme)?;
            let mut out = open_out(&output)?;
            write_gradient_table(&s, &mut out)?;
            out.flush().map_err(w_err)?;
        }
        DesignCmd::List => {
            for n in builtin_design_names() {
                let d = builtin_design(n)?;
                outln!(
                    "{n}\tpoints={}\torder={}\tantipodal={}",
                    d.len(),
                    d.order,
                    d.antipodal
                );
            }
        }
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let s = load_scheme(&a.scheme)?;
    let d = truth_tensor(&a.truth)?;
    let mut ds = simulate_dataset(&s, &d, a.truth.rho, a.truth.eta2, &mut stream(a.seed, 0))?;
    if let Some(m) = ds.meta.as_mut() {
        m.seed = Some(a.seed);
    }
    let (csv, json) = (
        a.output.with_extension("csv"),
        a.output.with_extension("json"),
    );
    write_dataset(&ds, &csv, &json)?;
    outln!(
        "wrote {} and {} ({} acquisitions)",
        csv.display(),
        json.display(),
        ds.acquisitions.len()
    );
    Ok(())
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let meta = a
        .meta
        .clone()
        .unwrap_or_else(|| a.data.with_extension("json"));
    let ds = read_dataset(&a.data, &meta)?;
    let opts = FitOptions {
        max_outer: a.max_iter,
        estimate_eta2: a.estimate_eta2,
        project_psd: a.project_psd,
        ..FitOptions::default()
    };
    let f = mle_fit(&ds, &opts)?;
    outln!("d_hat = {}", join(f.d_hat.vec()));
    outln!("rho_hat = {:e}\neta2_hat = {:e}", f.rho_hat, f.eta2_hat);
    outln!("loglik = {:e}\nloglik_init = {:e}", f.loglik, f.loglik_init);
    outln!("iterations = {}\nconverged = {}", f.iterations, f.converged);
    outln!(
        "eigenvalues = {}",
        join(&spectral_decompose(&f.d_hat, SIGN_TOL).gamma)
    );
    Ok(())
}

fn cmd_mc(a: McArgs) -> Result<()> {
    let mut cfg = McConfig::load(&a.config)?;
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if let Some(o) = a.output_dir {
        cfg.output_dir = o;
    }
    let r = run_mc(&cfg)?;
    for f in &r.files {
        outln!("{}", f.display());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) | Error::Degenerate(_) | Error::NotOrthogonal(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Sample(a) => cmd_sample(a),
        Cmd::Density(c) => cmd_density(c),
        Cmd::Test(c) => cmd_test(c),
        Cmd::Design(c) => cmd_design(c),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Fit(a) => cmd_fit(a),
        Cmd::Mc(a) => cmd_mc(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
