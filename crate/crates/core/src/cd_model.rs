//! Chromatic-dispersion channel model and time-domain compensation taps.
//!
//! Dispersion accumulates a quadratic spectral phase `beta * w^2` with
//! `beta = D * lambda^2 * z / (4 pi c)`. The forward channel applies
//! `exp(-j beta w^2)` in the FFT sign convention used by `rustfft`; the
//! compensating FIR from [`generate_taps`] has the conjugate response, so the
//! two compose to the identity inside the Nyquist band.

use std::io::Write;

use num_complex::Complex;

use crate::error::{param, Result};
use crate::scalar::{zero, Cplx, Real};
use crate::spectral::{dft_angular_grid, FftPair};

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `1 ps/(nm km)` expressed in `s/m^2`.
pub const PS_PER_NM_KM: f64 = 1e-6;

/// Physical link constants, stored in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T: Real> {
    dispersion: T,
    wavelength: T,
    fiber_length: T,
    sampling_period: T,
    light_speed: T,
}

impl<T: Real> SystemParams<T> {
    /// Build from SI values: `dispersion` in s/m^2, `wavelength` and
    /// `fiber_length` in m, `sampling_period` in s.
    pub fn new(dispersion: T, wavelength: T, fiber_length: T, sampling_period: T) -> Result<Self> {
        Self::with_light_speed(
            dispersion,
            wavelength,
            fiber_length,
            sampling_period,
            T::lit(SPEED_OF_LIGHT),
        )
    }

    pub fn with_light_speed(
        dispersion: T,
        wavelength: T,
        fiber_length: T,
        sampling_period: T,
        light_speed: T,
    ) -> Result<Self> {
        let finite = [
            dispersion,
            wavelength,
            fiber_length,
            sampling_period,
            light_speed,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return param("system parameters must be finite");
        }
        if dispersion == T::zero() {
            return param("dispersion must be non-zero");
        }
        if wavelength <= T::zero() {
            return param("wavelength must be positive");
        }
        if fiber_length <= T::zero() {
            return param("fiber length must be positive");
        }
        if sampling_period <= T::zero() {
            return param("sampling period must be positive");
        }
        if light_speed <= T::zero() {
            return param("speed of light must be positive");
        }
        Ok(SystemParams {
            dispersion,
            wavelength,
            fiber_length,
            sampling_period,
            light_speed,
        })
    }

    /// Build from the units engineers quote: ps/(nm km), nm, km and seconds.
    pub fn from_engineering_units(
        dispersion_ps_nm_km: f64,
        wavelength_nm: f64,
        fiber_length_km: f64,
        sampling_period: f64,
    ) -> Result<Self> {
        Self::new(
            T::lit(dispersion_ps_nm_km * PS_PER_NM_KM),
            T::lit(wavelength_nm * 1e-9),
            T::lit(fiber_length_km * 1e3),
            T::lit(sampling_period),
        )
    }

    /// Replace the speed of light (e.g. with the rounded `3e8`).
    pub fn override_light_speed(self, light_speed: T) -> Result<Self> {
        Self::with_light_speed(
            self.dispersion,
            self.wavelength,
            self.fiber_length,
            self.sampling_period,
            light_speed,
        )
    }

    pub fn with_fiber_length(self, fiber_length: T) -> Result<Self> {
        Self::with_light_speed(
            self.dispersion,
            self.wavelength,
            fiber_length,
            self.sampling_period,
            self.light_speed,
        )
    }

    pub fn with_sampling_period(self, sampling_period: T) -> Result<Self> {
        Self::with_light_speed(
            self.dispersion,
            self.wavelength,
            self.fiber_length,
            sampling_period,
            self.light_speed,
        )
    }

    pub fn dispersion(&self) -> T {
        self.dispersion
    }
    pub fn wavelength(&self) -> T {
        self.wavelength
    }
    pub fn fiber_length(&self) -> T {
        self.fiber_length
    }
    pub fn sampling_period(&self) -> T {
        self.sampling_period
    }
    pub fn light_speed(&self) -> T {
        self.light_speed
    }

    /// Accumulated dispersion `D * lambda^2 * z` (signed).
    pub fn accumulated(&self) -> T {
        self.dispersion * self.wavelength * self.wavelength * self.fiber_length
    }

    /// Quadratic spectral phase coefficient `D lambda^2 z / (4 pi c)` in s^2.
    pub fn beta(&self) -> T {
        self.accumulated() / (T::lit(4.0) * T::PI() * self.light_speed)
    }
}

/// Largest odd tap count that keeps the compensating chirp inside the Nyquist band.
pub fn max_taps<T: Real>(params: &SystemParams<T>) -> usize {
    let t = params.sampling_period();
    let ratio = params.accumulated().abs() / (T::lit(2.0) * params.light_speed() * t * t);
    let half = ratio.floor().to_usize().unwrap_or(usize::MAX / 4);
    2 * half + 1
}

/// Complex FIR taps, index-centred: `taps[j]` holds `g(j - (N-1)/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile<T: Real> {
    taps: Vec<Cplx<T>>,
    params: SystemParams<T>,
}

impl<T: Real> TapProfile<T> {
    /// Wrap arbitrary coefficients. Only the odd-length requirement is checked;
    /// the constant-modulus and symmetry properties hold for [`generate_taps`] output.
    pub fn from_coefficients(taps: Vec<Cplx<T>>, params: SystemParams<T>) -> Result<Self> {
        if taps.is_empty() || taps.len().is_multiple_of(2) {
            return param(format!(
                "tap count must be odd and positive, got {}",
                taps.len()
            ));
        }
        Ok(TapProfile { taps, params })
    }

    pub fn taps(&self) -> &[Cplx<T>] {
        &self.taps
    }

    pub fn n_taps(&self) -> usize {
        self.taps.len()
    }

    /// `(N - 1) / 2`, the one-sided length of the filter.
    pub fn half_width(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    /// Tap at centred index `k`, if inside the filter.
    pub fn tap(&self, k: isize) -> Option<Cplx<T>> {
        let idx = k + self.half_width() as isize;
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.taps.get(i).copied())
    }

    /// Write the `k,re,im` tap table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,re,im")?;
        let h = self.half_width() as isize;
        for (j, g) in self.taps.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                j as isize - h,
                crate::fmt_num(g.re.to_f64_lossy()),
                crate::fmt_num(g.im.to_f64_lossy())
            )?;
        }
        Ok(())
    }
}

/// Time-domain compensation taps
/// `g(k) = sqrt(j c T^2 / (D lambda^2 z)) * exp(-j pi c T^2 k^2 / (D lambda^2 z))`
/// over the centred index range, principal branch for the square root.
pub fn generate_taps<T: Real>(params: &SystemParams<T>, n_taps: usize) -> Result<TapProfile<T>> {
    if n_taps == 0 || n_taps.is_multiple_of(2) {
        return param(format!("tap count must be odd and positive, got {n_taps}"));
    }
    let limit = max_taps(params);
    if n_taps > limit {
        return param(format!(
            "{n_taps} taps exceed the aliasing-free maximum of {limit}"
        ));
    }
    let t = params.sampling_period();
    let scaled = params.light_speed() * t * t / params.accumulated();
    let amplitude = Complex::new(T::zero(), scaled).sqrt();
    let rate = T::PI() * scaled;

    let half = (n_taps - 1) / 2;
    let mut taps = vec![zero(); n_taps];
    for k in 0..=half {
        let kf = T::from_count(k);
        let g = amplitude * Complex::from_polar(T::one(), -rate * kf * kf);
        taps[half + k] = g;
        taps[half - k] = g;
    }
    Ok(TapProfile {
        taps,
        params: *params,
    })
}

/// Sampled all-pass dispersion response at the given angular frequencies (rad/s).
///
/// The forward channel is `exp(-j beta w^2)`; `inverse` returns the conjugate,
/// which is the response the FIR taps approximate.
pub fn cd_frequency_response<T: Real>(
    params: &SystemParams<T>,
    angular_freqs: &[T],
    inverse: bool,
) -> Vec<Cplx<T>> {
    let beta = params.beta();
    let sign = if inverse { T::one() } else { -T::one() };
    angular_freqs
        .iter()
        .map(|&w| Complex::from_polar(T::one(), sign * beta * w * w))
        .collect()
}

/// Propagate `signal` (sampled at the params' period) through the dispersive fiber.
///
/// Zero-padded linear convolution: the transform length is the next power of
/// two at or above twice the signal length, and the output is the
/// delay-free window of the same length as the input.
pub fn apply_channel<T: Real>(
    signal: &[Cplx<T>],
    params: &SystemParams<T>,
) -> Result<Vec<Cplx<T>>> {
    apply_dispersion(signal, params, false)
}

/// Apply the forward (`inverse = false`) or compensating dispersion response.
pub fn apply_dispersion<T: Real>(
    signal: &[Cplx<T>],
    params: &SystemParams<T>,
    inverse: bool,
) -> Result<Vec<Cplx<T>>> {
    if signal.is_empty() {
        return param("cannot disperse an empty signal");
    }
    let n = (2 * signal.len()).next_power_of_two();
    let fft = FftPair::new(n);
    let mut buf = vec![zero(); n];
    buf[..signal.len()].copy_from_slice(signal);
    fft.forward(&mut buf);
    let grid = dft_angular_grid(n, params.sampling_period());
    let response = cd_frequency_response(params, &grid, inverse);
    for (b, h) in buf.iter_mut().zip(&response) {
        *b = *b * h;
    }
    fft.inverse_scaled(&mut buf);
    buf.truncate(signal.len());
    Ok(buf)
}
