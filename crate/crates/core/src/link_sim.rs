//! Simulated single-polarization coherent link used to score the engines.
//!
//! PRBS bits are Gray-mapped onto QAM, RRC-shaped at `sps` samples per
//! symbol, dispersed, hit with complex AWGN, matched-filtered and handed to
//! the engine under test. The equalized stream is aligned against the known
//! symbols by cross-correlation, corrected by one least-squares complex gain,
//! sliced, and compared bit by bit away from the edge transients.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cd_model::{apply_channel, max_taps, SystemParams};
use crate::complexity::ComplexityReport;
use crate::equalizers::{EqualizerSpec, OpCount};
use crate::error::{param, Result};
use crate::metrics::q_db_or_sentinel;
use crate::modulation::{generate_symbols, Modulation};
use crate::pulse::{filter_same, rrc_taps, shape};
use crate::scalar::{Cplx, Real};

/// Largest timing offset, in symbols, searched by the aligner.
const MAX_LAG_SYMBOLS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig<T: Real> {
    pub baud: f64,
    pub samples_per_symbol: usize,
    pub modulation: Modulation,
    pub rolloff: f64,
    pub rrc_span_symbols: usize,
    pub n_symbols: usize,
    /// Es/N0 per symbol in dB; `+inf` disables the noise source.
    pub snr_db: f64,
    pub seed: u64,
    pub system: SystemParams<T>,
}

impl<T: Real> LinkConfig<T> {
    /// Defaults: 20 GBd, 2 samples/symbol, 16-QAM, roll-off 0.1, 64-symbol
    /// RRC span, 1e5 symbols, noiseless. The system's sampling period is
    /// reset to `1 / (baud * sps)`.
    pub fn new(system: SystemParams<T>) -> Result<Self> {
        let baud = 20e9;
        let sps = 2;
        Ok(LinkConfig {
            baud,
            samples_per_symbol: sps,
            modulation: Modulation::Qam16,
            rolloff: 0.1,
            rrc_span_symbols: 64,
            n_symbols: 100_000,
            snr_db: f64::INFINITY,
            seed: 1,
            system: system.with_sampling_period(T::lit(1.0 / (baud * sps as f64)))?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_symbols < 1000 {
            return param(format!(
                "{} symbols is too few for a BER estimate",
                self.n_symbols
            ));
        }
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return param(format!("roll-off {} outside (0, 1]", self.rolloff));
        }
        if self.samples_per_symbol < 2 {
            return param("at least two samples per symbol are required");
        }
        if !(self.baud > 0.0 && self.baud.is_finite()) {
            return param("baud rate must be positive");
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return param("snr_db must be a number or +inf");
        }
        let period = 1.0 / (self.baud * self.samples_per_symbol as f64);
        let t = self.system.sampling_period().to_f64_lossy();
        if ((t - period) / period).abs() > 1e-6 {
            return param(format!(
                "sampling period {t:e} s disagrees with baud * sps ({period:e} s)"
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimResult {
    pub ber: f64,
    /// `+inf` when no bit errors were observed.
    pub q_db: f64,
    pub evm_percent: f64,
    pub rmps: f64,
    pub n_bit_errors: u64,
    pub n_bits: u64,
    /// Engine tally of the multiplications actually executed.
    pub ops: OpCount,
}

impl SimResult {
    /// Normalized mean-square error of the corrected symbols.
    pub fn nmse(&self) -> f64 {
        (self.evm_percent / 100.0).powi(2)
    }
}

/// Transmitted data and the matched-filtered receiver input of one link
/// run, ready to be fed to any number of engines.
#[derive(Debug, Clone)]
pub struct LinkCapture<T: Real> {
    config: LinkConfig<T>,
    symbols: Vec<Cplx<T>>,
    bits: Vec<u8>,
    received: Vec<Cplx<T>>,
}

fn noise_seed(seed: u64) -> u64 {
    seed ^ 0xA5A5_5A5A_C3C3_3C3C
}

impl<T: Real> LinkCapture<T> {
    pub fn new(config: &LinkConfig<T>) -> Result<Self> {
        config.validate()?;
        let sps = config.samples_per_symbol;
        let (symbols, bits) =
            generate_symbols::<T>(config.modulation, config.n_symbols, config.seed);
        let rrc: Vec<T> = rrc_taps(config.rolloff, config.rrc_span_symbols, sps)?;
        let tx = shape(&symbols, &rrc, sps);
        let mut rx = apply_channel(&tx, &config.system)?;
        if config.snr_db.is_finite() {
            // per-sample complex variance giving Es/N0 after the unit-energy matched filter
            let sigma = (10f64.powf(-config.snr_db / 10.0) / 2.0).sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed(config.seed));
            for r in rx.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *r = *r + Complex::new(T::lit(sigma * re), T::lit(sigma * im));
            }
        }
        let received = filter_same(&rx, &rrc);
        Ok(LinkCapture {
            config: config.clone(),
            symbols,
            bits,
            received,
        })
    }

    pub fn config(&self) -> &LinkConfig<T> {
        &self.config
    }

    pub fn received(&self) -> &[Cplx<T>] {
        &self.received
    }

    pub fn symbols(&self) -> &[Cplx<T>] {
        &self.symbols
    }

    /// Run `equalizer` on the capture and score it.
    pub fn evaluate(&self, equalizer: &EqualizerSpec<T>) -> Result<SimResult> {
        equalizer.validate()?;
        let system = &self.config.system;
        let eq_period = match equalizer {
            EqualizerSpec::DirectFir(t)
            | EqualizerSpec::Clustered { taps: t, .. }
            | EqualizerSpec::FuzzyClustered { taps: t, .. } => t.params().sampling_period(),
            EqualizerSpec::FreqDomain(fd) => fd.params.sampling_period(),
        };
        let t = system.sampling_period();
        if ((eq_period - t) / t).abs() > T::lit(1e-6) {
            return param("equalizer designed for a different sampling period than the link");
        }
        let (out, ops) = equalizer.equalize_counted(&self.received)?;
        let rmps = ComplexityReport::for_spec(equalizer)?.rmps;
        self.score(&out, equalizer.transient(), rmps, ops)
    }

    /// Score an already-equalized stream.
    pub fn score(
        &self,
        equalized: &[Cplx<T>],
        transient: usize,
        rmps: f64,
        ops: OpCount,
    ) -> Result<SimResult> {
        let cfg = &self.config;
        let sps = cfg.samples_per_symbol;
        let n = cfg.n_symbols;
        if equalized.len() != self.received.len() {
            return param("equalized stream length differs from the capture");
        }
        let memory = max_taps(&cfg.system) / 2 + cfg.rrc_span_symbols * sps + transient;
        let margin = memory.div_ceil(sps) + MAX_LAG_SYMBOLS + 1;
        if 2 * margin + 100 > n {
            return param(format!(
                "{n} symbols leave no measurement window after {margin}-symbol edge guards"
            ));
        }
        let (phase, lag) = align(equalized, &self.symbols, sps, margin);
        let window = margin..n - margin;
        let sample = |k: usize| -> Cplx<T> {
            let idx = (k as isize + lag) * sps as isize + phase as isize;
            equalized[idx as usize]
        };

        // least-squares complex gain mapping received onto sent symbols
        let (mut cross, mut power) = (Complex::new(0.0, 0.0), 0.0);
        for k in window.clone() {
            let r = to_c64(sample(k));
            cross += r.conj() * to_c64(self.symbols[k]);
            power += r.norm_sqr();
        }
        let gain = if power > 0.0 {
            cross / power
        } else {
            Complex::new(0.0, 0.0)
        };

        let bps = cfg.modulation.bits_per_symbol();
        let mut decided = [0u8; 4];
        let (mut errors, mut err_energy, mut ref_energy) = (0u64, 0.0, 0.0);
        for k in window.clone() {
            let y = gain * to_c64(sample(k));
            let s = to_c64(self.symbols[k]);
            err_energy += (y - s).norm_sqr();
            ref_energy += s.norm_sqr();
            cfg.modulation.demap(
                Complex::new(T::lit(y.re), T::lit(y.im)),
                &mut decided[..bps],
            );
            let sent = &self.bits[k * bps..(k + 1) * bps];
            errors += decided[..bps]
                .iter()
                .zip(sent)
                .filter(|(a, b)| a != b)
                .count() as u64;
        }
        let n_bits = (window.len() * bps) as u64;
        let ber = errors as f64 / n_bits as f64;
        Ok(SimResult {
            ber,
            q_db: q_db_or_sentinel(ber),
            evm_percent: 100.0 * (err_energy / ref_energy).sqrt(),
            rmps,
            n_bit_errors: errors,
            n_bits,
            ops,
        })
    }
}

fn to_c64<T: Real>(z: Cplx<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
}

/// Sample phase and symbol lag maximizing the correlation magnitude with the
/// known symbols over the guarded window.
fn align<T: Real>(
    stream: &[Cplx<T>],
    symbols: &[Cplx<T>],
    sps: usize,
    margin: usize,
) -> (usize, isize) {
    let n = symbols.len();
    let lo = margin;
    let hi = (n - margin).min(lo + 4096);
    let mut best = (0usize, 0isize, -1.0f64);
    for lag in -(MAX_LAG_SYMBOLS as isize)..=MAX_LAG_SYMBOLS as isize {
        for phase in 0..sps {
            let mut acc = Complex::new(0.0, 0.0);
            for (k, s) in symbols.iter().enumerate().take(hi).skip(lo) {
                let idx = (k as isize + lag) * sps as isize + phase as isize;
                acc += to_c64(stream[idx as usize]) * to_c64(*s).conj();
            }
            let mag = acc.norm();
            if mag > best.2 {
                best = (phase, lag, mag);
            }
        }
    }
    (best.0, best.1)
}

/// Full chain for one configuration and engine.
pub fn run_link<T: Real>(
    config: &LinkConfig<T>,
    equalizer: &EqualizerSpec<T>,
) -> Result<SimResult> {
    LinkCapture::new(config)?.evaluate(equalizer)
}

/// Pass-through engine for back-to-back measurements.
pub fn no_compensation<T: Real>(system: &SystemParams<T>) -> EqualizerSpec<T> {
    let taps = crate::cd_model::TapProfile::from_coefficients(
        vec![Complex::new(T::one(), T::zero())],
        *system,
    )
    .expect("single tap is a valid profile");
    EqualizerSpec::DirectFir(taps)
}

/// One row of the simulation results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub engine: String,
    pub param: usize,
    pub n_clusters: Option<usize>,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub snr_db: f64,
    pub ber: f64,
    pub q_db: f64,
    pub evm_percent: f64,
    pub rmps: f64,
    pub seed: u64,
}

impl ResultRow {
    pub const CSV_HEADER: &'static str =
        "engine,param,n_clusters,eta,alpha,snr_db,ber,q_db,evm_percent,rmps,seed";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(crate::fmt_num).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.engine,
            self.param,
            self.n_clusters.map(|c| c.to_string()).unwrap_or_default(),
            opt(self.eta),
            opt(self.alpha),
            crate::fmt_num(self.snr_db),
            crate::fmt_num(self.ber),
            crate::fmt_num(self.q_db),
            crate::fmt_num(self.evm_percent),
            crate::fmt_num(self.rmps),
            self.seed
        )
    }
}
