//! Chromatic-dispersion compensation toolkit.
//!
//! Four time/frequency-domain equalizer engines (direct FIR, hard-clustered,
//! fuzzy-clustered and overlap-save FFT), the K-means plus soft-decision tap
//! clustering they rely on, closed-form multiplication accounting, and a
//! simulated 16-QAM coherent link to compare them.
//!
//! All signal processing is generic over [`Real`] (`f32` or `f64`); the
//! `*64`/`*32` aliases below name the common instantiations.

pub mod cd_model;
pub mod clustering;
pub mod complexity;
pub mod config;
pub mod equalizers;
pub mod error;
pub mod hyperopt;
pub mod link_sim;
pub mod metrics;
pub mod modulation;
pub mod pulse;
pub mod scalar;
mod spectral;

pub use cd_model::{
    apply_channel, apply_dispersion, cd_frequency_response, generate_taps, max_taps, SystemParams,
    TapProfile, SPEED_OF_LIGHT,
};
pub use error::{Error, Result};
pub use scalar::{Cplx, Real};
pub use spectral::dft_angular_grid;

pub type SystemParams64 = SystemParams<f64>;
pub type SystemParams32 = SystemParams<f32>;
pub type TapProfile64 = TapProfile<f64>;
pub type TapProfile32 = TapProfile<f32>;

/// Format a number with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
