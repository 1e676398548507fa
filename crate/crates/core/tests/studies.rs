use isomat::harness::{run_mc, McConfig};
use isomat::rng::stream;
use isomat::sphericity::{fa, sphericity_pvalues, tau_statistics};
use isomat::symmat::{spectral_decompose, IsotropicModel, Sampler, SymMat, SIGN_TOL};

fn config(text: &str, dir: &std::path::Path) -> McConfig {
    let mut cfg = McConfig::from_toml(text).unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg
}

#[test]
fn tau2_power_grows_with_anisotropy() {
    let mu = 100.0;
    let sampler = Sampler::new(IsotropicModel::new(3, mu, 0.0).unwrap()).unwrap();
    let mut last = 0.0;
    for (k, target_fa) in [0.03, 0.06, 0.09, 0.12, 0.15].into_iter().enumerate() {
        // prolate mean (1 + 2e, 1 - e, 1 - e) with the requested FA
        let mut e = target_fa / 3f64.sqrt();
        for _ in 0..50 {
            let g = [1.0 + 2.0 * e, 1.0 - e, 1.0 - e];
            e *= target_fa / fa(&g).unwrap();
        }
        let mean = SymMat::diag(&[1.0 + 2.0 * e, 1.0 - e, 1.0 - e]);
        let n = 10_000;
        let rejected = (0..n)
            .filter(|&i| {
                let d = sampler.sample(&mean, &mut stream(71 + k as u64, i));
                let g = spectral_decompose(&d, SIGN_TOL).gamma;
                let t = tau_statistics(&g, mu, 1.0).unwrap();
                sphericity_pvalues(&t, 0.0).unwrap().tau2 < 0.05
            })
            .count();
        let rate = rejected as f64 / n as f64;
        assert!(rate >= last, "FA {target_fa}: {rate} < {last}");
        last = rate;
    }
    assert!(last > 0.3);
}

#[test]
fn spherical_gaussian_study_shows_repulsion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "experiment = \"gaussian\"\nn = 10000\nseed = 5\nmu = 0.5\nlambda = 0.0\n",
        dir.path(),
    );
    let s = run_mc(&cfg).unwrap().summary;
    let frac = s["repulsion"]["pair_fraction"].as_f64().unwrap();
    assert!(frac < 0.005, "{frac}");
}

#[test]
fn design5_study_is_not_chi2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "experiment = \"rician\"\ndesign = \"design5\"\nn = 5000\nseed = 12\nworkers = 2\n",
        dir.path(),
    );
    let s = run_mc(&cfg).unwrap().summary;
    let shape = s["gamma_fits"]["tau2"]["shape"].as_f64().unwrap();
    assert!(shape < 2.1, "{shape}");
}
