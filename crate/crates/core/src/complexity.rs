//! Closed-form real multiplications per equalized symbol (RMPS), counting
//! three real products per complex product.

use std::io::Write;

use crate::equalizers::{Engine, EqualizerSpec};
use crate::error::{param, Result};
use crate::scalar::Real;

/// Time-domain FIR with symmetric-tap folding: `3 (N - 1) / 2`.
pub fn rmps_td(n_taps: usize) -> Result<f64> {
    if n_taps == 0 || n_taps.is_multiple_of(2) {
        return param(format!("tap count must be odd and positive, got {n_taps}"));
    }
    Ok(3.0 * (n_taps - 1) as f64 / 2.0)
}

/// Hard or fuzzy clustered FIR: `3 N_c`.
pub fn rmps_clustered(n_clusters: usize) -> Result<f64> {
    if n_clusters == 0 {
        return param("cluster count must be positive");
    }
    Ok(3.0 * n_clusters as f64)
}

/// Radix-2 overlap-save FFT equalizer:
/// `N_FFT (3 log2 N_FFT + 3) / (N_FFT - N_overlap + 1)`.
pub fn rmps_fd(fft_size: usize, overlap: usize) -> Result<f64> {
    if fft_size < 2 || !fft_size.is_power_of_two() {
        return param(format!("FFT size {fft_size} is not a power of two >= 2"));
    }
    if overlap == 0 || overlap >= fft_size {
        return param(format!("overlap {overlap} must lie in [1, {fft_size})"));
    }
    let n = fft_size as f64;
    let log2 = fft_size.trailing_zeros() as f64;
    Ok(n * (3.0 * log2 + 3.0) / ((fft_size - overlap) as f64 + 1.0))
}

/// [`rmps_fd`] at the default 50 % overlap.
pub fn rmps_fd_half_overlap(fft_size: usize) -> Result<f64> {
    rmps_fd(fft_size, fft_size / 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub engine: Engine,
    /// `N`, `N_c` or the FFT size depending on the engine.
    pub parameter: usize,
    pub rmps: f64,
    pub assumptions: Vec<&'static str>,
}

impl ComplexityReport {
    pub fn new(engine: Engine, parameter: usize) -> Result<Self> {
        let (rmps, assumptions) = match engine {
            Engine::Direct => (rmps_td(parameter)?, vec!["karatsuba", "symmetric folding"]),
            Engine::Clustered => (rmps_clustered(parameter)?, vec!["karatsuba"]),
            Engine::Fuzzy => (
                rmps_clustered(parameter)?,
                vec!["karatsuba", "alpha weights in look-up table"],
            ),
            Engine::FreqDomain => (
                rmps_fd_half_overlap(parameter)?,
                vec!["karatsuba", "radix-2", "50% overlap"],
            ),
        };
        Ok(ComplexityReport {
            engine,
            parameter,
            rmps,
            assumptions,
        })
    }

    pub fn for_spec<T: Real>(spec: &EqualizerSpec<T>) -> Result<Self> {
        let parameter = match spec {
            EqualizerSpec::DirectFir(taps) => taps.n_taps(),
            EqualizerSpec::Clustered { plan, .. } => plan.n_clusters(),
            EqualizerSpec::FuzzyClustered { plan, .. } => plan.n_clusters(),
            EqualizerSpec::FreqDomain(fd) => fd.fft_size,
        };
        Self::new(spec.engine(), parameter)
    }

    pub const CSV_HEADER: &'static str = "engine,parameter,rmps,assumptions";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.engine,
            self.parameter,
            crate::fmt_num(self.rmps),
            self.assumptions.join(";")
        )
    }
}

pub fn write_reports_csv<W: Write>(
    reports: &[ComplexityReport],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{}", ComplexityReport::CSV_HEADER)?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Fractional saving of `proposed` relative to `reference`.
pub fn saving(proposed: f64, reference: f64) -> f64 {
    1.0 - proposed / reference
}
