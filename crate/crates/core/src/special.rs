//! Special functions: modified Bessel functions of order 0 and 1 (exponentially
//! scaled), their ratio, normal and chi-square distribution helpers.

use statrs::distribution::{ChiSquared, ContinuousCDF};

const SERIES_LIMIT: f64 = 30.0;
const RATIO_SWITCH: f64 = 20.0;
const RATIO_ASYMPTOTIC: f64 = 1000.0;

fn series_i0_i1(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 0.5 * x;
    let mut s0 = t0;
    let mut s1 = t1;
    let mut k = 1.0;
    loop {
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        s0 += t0;
        s1 += t1;
        if t0 <= s0 * 1e-17 && t1 <= s1 * 1e-17 {
            break;
        }
        k += 1.0;
    }
    (s0, s1)
}

fn asymptotic_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (kf * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `exp(-|x|) I0(x)`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series_i0_i1(x).0 * (-x).exp()
    } else {
        asymptotic_scaled(0.0, x)
    }
}

/// `exp(-|x|) I1(x)`.
pub fn bessel_i1e(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series_i0_i1(ax).1 * (-ax).exp()
    } else {
        asymptotic_scaled(1.0, ax)
    };
    v.copysign(x)
}

/// `log I0(x)`, safe for large arguments.
pub fn log_bessel_i0(x: f64) -> f64 {
    bessel_i0e(x).ln() + x.abs()
}

/// `I1(x) / I0(x)` for `x >= 0`.
///
/// Power series below 20, Gauss continued fraction (modified Lentz) above,
/// and the scaled asymptotic expansions for very large arguments.
pub fn bessel_ratio(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_ratio(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < RATIO_SWITCH {
        let (s0, s1) = series_i0_i1(x);
        return s1 / s0;
    }
    if x > RATIO_ASYMPTOTIC {
        return asymptotic_scaled(1.0, x) / asymptotic_scaled(0.0, x);
    }
    // I1/I0 = 1/(2/x + 1/(4/x + 1/(6/x + ...)))
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..10_000 {
        let b = 2.0 * k as f64 / x;
        d = b + d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn chi2_cdf(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(0.5 * k, 0.5 * x)
}

pub fn chi2_sf(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(0.5 * k, 0.5 * x)
}

pub fn chi2_quantile(k: f64, p: f64) -> f64 {
    ChiSquared::new(k)
        .expect("positive degrees of freedom")
        .inverse_cdf(p)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// Derivative of the digamma function, x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    acc + 1.0 / x
        + r / 2.0
        + r / x
            * (1.0 / 6.0 - r * (1.0 / 30.0 - r * (1.0 / 42.0 - r * (1.0 / 30.0 - r * 5.0 / 66.0))))
}

#[cfg(test)]
mod tests {
    use super::*;

    // (x, exp(-x)I0(x), exp(-x)I1(x), I1/I0) at 40 significant digits, truncated
    const REF: [(f64, f64, f64, f64); 14] = [
        (0.0, 1.0, 0.0, 0.0),
        (1e-08, 0.99999999000000007, 4.9999999500000004e-9, 5.0e-9),
        (
            0.5,
            0.64503527044915007,
            0.1564208031848717,
            0.24249961258080195,
        ),
        (
            1.0,
            0.46575960759364044,
            0.20791041534970845,
            0.44638996589653451,
        ),
        (
            5.0,
            0.18354081260932835,
            0.16397226694454236,
            0.89338313704408522,
        ),
        (
            19.9,
            0.090008588864389597,
            0.087717102131706101,
            0.9745414658579312,
        ),
        (
            20.0,
            0.089780311884826022,
            0.087506222183288665,
            0.97467050788980713,
        ),
        (
            20.1,
            0.089553763620613444,
            0.087296851843201592,
            0.97479824759824659,
        ),
        (
            29.0,
            0.074407468222225585,
            0.073113117939388365,
            0.9826045649212051,
        ),
        (
            31.0,
            0.071946496696983833,
            0.07077639283438568,
            0.98373647201299787,
        ),
        (
            50.0,
            0.056561626647454193,
            0.0559931238928954,
            0.98994896737849775,
        ),
        (
            190.0,
            0.02896141263922373,
            0.028885097581348478,
            0.99736494007298888,
        ),
        (
            1000.0,
            0.012617240455891257,
            0.012610930256928629,
            0.99949987487480428,
        ),
        (
            100000.0,
            0.0012615678379767768,
            0.0012615615301218171,
            0.99999499998749987,
        ),
    ];

    #[test]
    fn bessel_against_reference() {
        for &(x, i0, i1, r) in &REF {
            assert!(
                (bessel_i0e(x) - i0).abs() <= 1e-14 * i0.max(1e-300),
                "i0e {x}"
            );
            assert!(
                (bessel_i1e(x) - i1).abs() <= 1e-14 * i1.max(1e-300),
                "i1e {x}"
            );
            assert!(
                (bessel_ratio(x) - r).abs() < 1e-12,
                "ratio {x}: {} vs {r}",
                bessel_ratio(x)
            );
        }
    }

    #[test]
    fn ratio_is_continuous_at_switches() {
        for s in [RATIO_SWITCH, RATIO_ASYMPTOTIC, SERIES_LIMIT] {
            let a = bessel_ratio(s * (1.0 - 1e-12));
            let b = bessel_ratio(s * (1.0 + 1e-12));
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn log_i0_large_argument() {
        let x = 5000.0;
        let expect = x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + (1.0 + 1.0 / (8.0 * x)).ln();
        assert!((log_bessel_i0(x) - expect).abs() < 1e-8);
        assert_eq!(log_bessel_i0(0.0), 0.0);
    }

    #[test]
    fn trigamma_values() {
        let r = [
            (0.1, 101.43329915079275),
            (1.0, 1.6449340668482264),
            (2.5, 0.49035775610023486),
            (10.0, 0.10516633568168575),
            (100.0, 0.010050166663333571),
        ];
        for (x, v) in r {
            assert!((trigamma(x) - v).abs() < 1e-12 * v, "{x}");
        }
    }

    #[test]
    fn chi2_helpers() {
        assert!((chi2_sf(5.0, 5.0) - 0.4158801869955079).abs() < 1e-12);
        assert!((chi2_cdf(5.0, chi2_quantile(5.0, 0.9)) - 0.9).abs() < 1e-10);
        assert!((norm_cdf(1.96) - 0.9750021048517795).abs() < 1e-14);
    }
}
