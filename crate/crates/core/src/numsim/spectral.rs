//! FFT-based differentiation on the periodic grid.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

pub(crate) struct Spectral {
    n: usize,
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Physical wavenumber per axis index; the Nyquist entry is positive.
    wave: Vec<f64>,
    nyquist: usize,
    /// 2/3 rule per axis index.
    keep: Vec<bool>,
}

impl Spectral {
    pub(crate) fn new(grid: &Grid) -> Self {
        let n_pts = grid.points;
        let mut planner = FftPlanner::new();
        let scale = std::f64::consts::TAU / grid.length;
        let signed = |m: usize| -> i64 {
            if m <= n_pts / 2 {
                m as i64
            } else {
                m as i64 - n_pts as i64
            }
        };
        Spectral {
            n: grid.n,
            points: n_pts,
            forward: planner.plan_fft_forward(n_pts),
            inverse: planner.plan_fft_inverse(n_pts),
            wave: (0..n_pts).map(|m| signed(m) as f64 * scale).collect(),
            nyquist: n_pts / 2,
            keep: (0..n_pts)
                .map(|m| m != n_pts / 2 && 3 * signed(m).unsigned_abs() < n_pts as u64)
                .collect(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    fn axes(&self, p: usize) -> [usize; 2] {
        [p % self.points, p / self.points]
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n_pts = self.points;
        for row in data.chunks_mut(n_pts) {
            fft.process(row);
        }
        if self.n == 2 {
            let mut col = vec![Complex64::default(); n_pts];
            for j in 0..n_pts {
                for i in 0..n_pts {
                    col[i] = data[j + n_pts * i];
                }
                fft.process(&mut col);
                for i in 0..n_pts {
                    data[j + n_pts * i] = col[i];
                }
            }
        }
    }

    pub(crate) fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    pub(crate) fn inverse(&self, hat: &[Complex64]) -> Vec<f64> {
        let mut data = hat.to_vec();
        self.transform(&mut data, &self.inverse);
        let norm = 1.0 / self.len() as f64;
        data.iter().map(|c| c.re * norm).collect()
    }

    /// `|k|²` of mode `p`.
    pub(crate) fn k2(&self, p: usize) -> f64 {
        let idx = self.axes(p);
        (0..self.n).map(|i| self.wave[idx[i]].powi(2)).sum()
    }

    pub(crate) fn kept(&self, p: usize) -> bool {
        let idx = self.axes(p);
        (0..self.n).all(|i| self.keep[idx[i]])
    }

    pub(crate) fn truncate(&self, hat: &mut [Complex64]) {
        for (p, v) in hat.iter_mut().enumerate() {
            if !self.kept(p) {
                *v = Complex64::default();
            }
        }
    }

    /// Spectral partial derivative with `orders[i]` along axis `i`.
    pub(crate) fn derivative(&self, hat: &[Complex64], orders: &[u32]) -> Vec<f64> {
        let scaled: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(p, &v)| {
                let idx = self.axes(p);
                let mut factor = Complex64::new(1.0, 0.0);
                for (i, &o) in orders.iter().enumerate().take(self.n) {
                    if o == 0 {
                        continue;
                    }
                    if o % 2 == 1 && idx[i] == self.nyquist {
                        return Complex64::default();
                    }
                    factor *= Complex64::new(0.0, self.wave[idx[i]]).powu(o);
                }
                v * factor
            })
            .collect();
        self.inverse(&scaled)
    }
}
