//! Real Fourier analysis on the unit circle `R/Z` sampled at `y_m = m / n`.
//!
//! Coefficients are stored as cosine/sine pairs,
//! `f(y) = c_0 + sum_k (c_k cos(2 pi k y) + s_k sin(2 pi k y))`, `k = 0..=n/2`.
//! The Nyquist mode `k = n/2` carries a cosine coefficient only.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

/// Cosine/sine coefficients of a real periodic function, indexed by wavenumber.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSpectrum {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2 && n.is_multiple_of(2), "periodic sample count must be even");
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Highest representable wavenumber.
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    pub fn analyze(&self, samples: &[f64]) -> RealSpectrum {
        assert_eq!(samples.len(), self.n);
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let half = self.n / 2;
        let scale = 1.0 / self.n as f64;
        let mut cos = vec![0.0; half + 1];
        let mut sin = vec![0.0; half + 1];
        cos[0] = buf[0].re * scale;
        cos[half] = buf[half].re * scale;
        for k in 1..half {
            cos[k] = 2.0 * buf[k].re * scale;
            sin[k] = -2.0 * buf[k].im * scale;
        }
        RealSpectrum { cos, sin }
    }

    pub fn synthesize(&self, spectrum: &RealSpectrum) -> Vec<f64> {
        let half = self.n / 2;
        assert_eq!(spectrum.cos.len(), half + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        buf[0] = Complex64::new(spectrum.cos[0], 0.0);
        buf[half] = Complex64::new(spectrum.cos[half], 0.0);
        for k in 1..half {
            let c = Complex64::new(0.5 * spectrum.cos[k], -0.5 * spectrum.sin[k]);
            buf[k] = c;
            buf[self.n - k] = c.conj();
        }
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Spectral derivative of the given order (0, 1 or 2) of periodic samples.
    pub fn derivative(&self, samples: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return samples.to_vec();
        }
        let spectrum = self.analyze(samples).derivative(order);
        self.synthesize(&spectrum)
    }
}

impl RealSpectrum {
    pub fn zeros(nyquist: usize) -> Self {
        Self {
            cos: vec![0.0; nyquist + 1],
            sin: vec![0.0; nyquist + 1],
        }
    }

    pub fn nyquist(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn derivative(&self, order: u32) -> RealSpectrum {
        let half = self.nyquist();
        let mut out = RealSpectrum::zeros(half);
        for k in 0..=half {
            let wp = (2.0 * PI * k as f64).powi(order as i32);
            let (c, s) = (self.cos[k], self.sin[k]);
            let (dc, ds) = match order % 4 {
                0 => (c, s),
                1 => (s, -c),
                2 => (-c, -s),
                _ => (-s, c),
            };
            out.cos[k] = wp * dc;
            out.sin[k] = wp * ds;
        }
        // the Nyquist sine is invisible on the grid
        out.sin[half] = 0.0;
        if order % 2 == 1 {
            out.cos[half] = 0.0;
        }
        out
    }

    /// Evaluates the trigonometric interpolant at an arbitrary `y`.
    pub fn eval(&self, y: f64) -> f64 {
        let mut acc = self.cos[0];
        for k in 1..=self.nyquist() {
            let arg = 2.0 * PI * k as f64 * y;
            acc += self.cos[k] * arg.cos() + self.sin[k] * arg.sin();
        }
        acc
    }

    /// Derivative of the interpolant at an arbitrary `y`.
    pub fn eval_derivative(&self, y: f64, order: u32) -> f64 {
        self.derivative(order).eval(y)
    }

    /// Fraction of the (non-mean) energy carried by wavenumbers above `2/3` of the Nyquist mode.
    pub fn top_third_energy_fraction(&self) -> f64 {
        let half = self.nyquist();
        let cut = (2 * half).div_ceil(3);
        let mut total = 0.0;
        let mut top = 0.0;
        for k in 0..=half {
            let e = self.cos[k] * self.cos[k] + self.sin[k] * self.sin[k];
            total += e;
            if k > cut {
                top += e;
            }
        }
        if total <= 1e-30 {
            0.0
        } else {
            top / total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|m| f(m as f64 / n as f64)).collect()
    }

    #[test]
    fn analysis_recovers_coefficients() {
        let fourier = Fourier::new(16);
        let s = samples(16, |y| 0.5 + 2.0 * (2.0 * PI * y).cos() - 3.0 * (6.0 * PI * y).sin() + 0.25 * (16.0 * PI * y).cos());
        let spec = fourier.analyze(&s);
        assert!((spec.cos[0] - 0.5).abs() < 1e-14);
        assert!((spec.cos[1] - 2.0).abs() < 1e-14);
        assert!((spec.sin[3] + 3.0).abs() < 1e-14);
        assert!((spec.cos[8] - 0.25).abs() < 1e-14);
        let back = fourier.synthesize(&spec);
        for (a, b) in back.iter().zip(&s) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_of_resolved_modes() {
        let n = 32;
        let fourier = Fourier::new(n);
        let s = samples(n, |y| (2.0 * PI * y).sin() + 0.1 * (10.0 * PI * y).cos());
        let d1 = fourier.derivative(&s, 1);
        let d2 = fourier.derivative(&s, 2);
        for m in 0..n {
            let y = m as f64 / n as f64;
            let e1 = 2.0 * PI * (2.0 * PI * y).cos() - PI * (10.0 * PI * y).sin();
            let e2 = -4.0 * PI * PI * (2.0 * PI * y).sin() - 0.1 * 100.0 * PI * PI * (10.0 * PI * y).cos();
            assert!((d1[m] - e1).abs() < 1e-11);
            assert!((d2[m] - e2).abs() < 1e-10);
        }
    }

    #[test]
    fn off_grid_eval_matches_function() {
        let fourier = Fourier::new(12);
        let f = |y: f64| (2.0 * PI * y).cos() * 0.3 + (4.0 * PI * y).sin();
        let spec = fourier.analyze(&samples(12, f));
        for y in [0.013, 0.4, 0.777] {
            assert!((spec.eval(y) - f(y)).abs() < 1e-13);
        }
    }
}
