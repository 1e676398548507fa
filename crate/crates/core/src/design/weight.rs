use std::sync::OnceLock;

use crate::quad::integrate;
use crate::special::{bessel_i0e, bessel_i1e};

/// Rician information weight by direct quadrature,
/// `w(z) = z⁶ ∫₀^∞ s³ e^{-z²(s-1)²/2} I1e(z²s)² / I0e(z²s) ds - z⁴`.
pub fn weight_w_direct(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let z2 = z * z;
    let f = |s: f64| {
        let x = z2 * s;
        let i1 = bessel_i1e(x);
        s * s * s * (-0.5 * z2 * (s - 1.0).powi(2)).exp() * i1 * i1 / bessel_i0e(x)
    };
    // beyond s = 1 + 12/z the Gaussian factor is below e^{-72}
    let hi = 1.0 + 12.0 / z;
    let peak = f(1.0).max(f64::MIN_POSITIVE);
    let tol = 1e-16 * peak;
    let left = integrate(&f, 0.0, 1.0, tol, 1e-13);
    let right = integrate(&f, 1.0, hi, tol, 1e-13);
    let v = z2 * z2 * (z2 * (left + right) - 1.0);
    v.max(0.0)
}

const GRID_LO: f64 = 1e-3;
const GRID_HI: f64 = 50.0;
const GRID_N: usize = 801;

/// Monotone cubic (Fritsch–Carlson) interpolant of `log w` against `log z`.
#[derive(Debug, Clone)]
pub struct WeightCache {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl WeightCache {
    pub fn build() -> Self {
        let (l0, l1) = (GRID_LO.ln(), GRID_HI.ln());
        let x: Vec<f64> = (0..GRID_N)
            .map(|i| l0 + (l1 - l0) * i as f64 / (GRID_N - 1) as f64)
            .collect();
        let y: Vec<f64> = x.iter().map(|&lx| weight_w_direct(lx.exp()).ln()).collect();
        let d = pchip_slopes(&x, &y);
        Self { x, y, d }
    }

    pub fn global() -> &'static Self {
        static CACHE: OnceLock<WeightCache> = OnceLock::new();
        CACHE.get_or_init(Self::build)
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if !(GRID_LO..=GRID_HI).contains(&z) {
            return weight_w_direct(z);
        }
        let lz = z.ln();
        let h0 = self.x[1] - self.x[0];
        let i = (((lz - self.x[0]) / h0) as usize).min(self.x.len() - 2);
        let h = self.x[i + 1] - self.x[i];
        let t = (lz - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.y[i]
            + (t3 - 2.0 * t2 + t) * h * self.d[i]
            + (-2.0 * t3 + 3.0 * t2) * self.y[i + 1]
            + (t3 - t2) * h * self.d[i + 1];
        v.exp()
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Cached Rician information weight.
pub fn weight_w(z: f64) -> f64 {
    WeightCache::global().eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    // independent quadrature of z²(2 - E[y²(1 - r(yz)²)]), y Rician(z, 1)
    const PINS: [(f64, f64); 3] = [
        (1.0, 0.5214469207343808),
        (3.0, 8.461361136514618),
        (10.0, 99.49744808263662),
    ];

    #[test]
    fn direct_matches_pins() {
        for (z, w) in PINS {
            assert!(
                (weight_w_direct(z) - w).abs() < 1e-9 * w,
                "{z}: {}",
                weight_w_direct(z)
            );
        }
    }

    #[test]
    fn limits() {
        assert_eq!(weight_w(0.0), 0.0);
        // small-signal behaviour w ≈ z⁴
        let z: f64 = 0.01;
        assert!((weight_w_direct(z) / z.powi(4) - 1.0).abs() < 1e-2);
        // Gaussian limit w ≈ z² - 1/2 for large z
        let z: f64 = 40.0;
        assert!((weight_w_direct(z) - (z * z - 0.5)).abs() < 0.05);
    }

    #[test]
    fn nonnegative_on_grid() {
        for i in 0..=400 {
            let z = 20.0 * i as f64 / 400.0;
            assert!(weight_w(z) >= 0.0);
        }
    }

    #[test]
    fn cache_interpolation_error() {
        let mut worst: f64 = 0.0;
        for i in 0..500 {
            let z =
                (GRID_LO.ln() + (GRID_HI.ln() - GRID_LO.ln()) * (i as f64 + 0.37) / 500.0).exp();
            let a = weight_w(z);
            let b = weight_w_direct(z);
            worst = worst.max((a - b).abs() / b);
        }
        assert!(worst < 1e-6, "{worst}");
    }
}
