//! Thin wrappers over `rustfft` used by the channel model and the FD engine.

use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::scalar::{Cplx, Real};

pub(crate) struct FftPair<T: Real> {
    pub forward: Arc<dyn Fft<T>>,
    pub inverse: Arc<dyn Fft<T>>,
    pub len: usize,
}

impl<T: Real> FftPair<T> {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, buf: &mut [Cplx<T>]) {
        self.forward.process(buf);
    }

    /// Inverse transform in place, scaled by `1/len`.
    pub fn inverse_scaled(&self, buf: &mut [Cplx<T>]) {
        self.inverse.process(buf);
        let scale = T::one() / T::from_count(self.len);
        for v in buf.iter_mut() {
            *v = *v * scale;
        }
    }
}

/// Angular frequencies (rad/s) of the `n`-point DFT bins for sampling period `period`,
/// in FFT order: non-negative bins first, then negative ones.
pub fn dft_angular_grid<T: Real>(n: usize, period: T) -> Vec<T> {
    let two_pi = T::TAU();
    (0..n)
        .map(|i| {
            let cycles = if i <= (n - 1) / 2 {
                T::from_count(i)
            } else {
                -T::from_count(n - i)
            };
            two_pi * cycles / (T::from_count(n) * period)
        })
        .collect()
}
