//! Fixed-bin histograms and a bounded reservoir sample.

use rand::Rng;

use crate::rng::{stream, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self {
            lo,
            hi,
            counts: vec![0; bins.max(1)],
            total: 0,
        }
    }

    /// Freedman–Diaconis binning over the sample range, at least 20 bins.
    pub fn freedman_diaconis(samples: &[f64]) -> Self {
        let mut x: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
        x.sort_by(f64::total_cmp);
        if x.is_empty() {
            return Self::new(0.0, 1.0, 20);
        }
        let (lo, hi) = (x[0], x[x.len() - 1]);
        let q = |p: f64| x[((x.len() - 1) as f64 * p).round() as usize];
        let iqr = q(0.75) - q(0.25);
        let width = 2.0 * iqr / (x.len() as f64).cbrt();
        let span = if hi > lo { hi - lo } else { 1.0 };
        let bins = if width > 0.0 {
            ((span / width).ceil() as usize).clamp(20, 400)
        } else {
            20
        };
        let mut h = Self::new(lo, lo + span, bins);
        for v in &x {
            h.add(*v);
        }
        h
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn add(&mut self, v: f64) {
        if !v.is_finite() {
            return;
        }
        self.total += 1;
        if v < self.lo || v > self.hi {
            return;
        }
        let i = (((v - self.lo) / self.width()) as usize).min(self.counts.len() - 1);
        self.counts[i] += 1;
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.counts.len())
            .map(|i| self.lo + (i as f64 + 0.5) * self.width())
            .collect()
    }

    /// Counts normalized to a probability density.
    pub fn density(&self) -> Vec<f64> {
        let norm = self.total.max(1) as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }
}

/// Uniform reservoir of at most `capacity` values; deterministic given the seed.
#[derive(Debug, Clone)]
pub struct Reservoir {
    capacity: usize,
    seen: u64,
    pub values: Vec<f64>,
    rng: Stream,
}

impl Reservoir {
    pub fn new(capacity: usize, seed: u64) -> Self {
        Self {
            capacity,
            seen: 0,
            values: Vec::new(),
            rng: stream(seed, u64::MAX),
        }
    }

    pub fn push(&mut self, v: f64) {
        self.seen += 1;
        if self.values.len() < self.capacity {
            self.values.push(v);
        } else {
            let j = self.rng.random_range(0..self.seen);
            if (j as usize) < self.capacity {
                self.values[j as usize] = v;
            }
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_has_bin_floor() {
        let h = Histogram::freedman_diaconis(&[1.0, 2.0, 3.0]);
        assert_eq!(h.counts.len(), 20);
        assert_eq!(h.counts.iter().sum::<u64>(), 3);
    }

    #[test]
    fn density_integrates_to_one() {
        let x: Vec<f64> = (0..10_000).map(|i| (i as f64 * 0.618).fract()).collect();
        let h = Histogram::freedman_diaconis(&x);
        let s: f64 = h.density().iter().sum::<f64>() * h.width();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reservoir_is_bounded_and_deterministic() {
        let mut a = Reservoir::new(100, 5);
        let mut b = Reservoir::new(100, 5);
        for i in 0..10_000 {
            a.push(i as f64);
            b.push(i as f64);
        }
        assert_eq!(a.values.len(), 100);
        assert_eq!(a.values, b.values);
        assert_eq!(a.seen(), 10_000);
        let mean = a.values.iter().sum::<f64>() / 100.0;
        assert!((mean - 5000.0).abs() < 1500.0);
    }
}
