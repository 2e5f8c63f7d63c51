//! Flat `key = value` scenario documents and the engine settings built from them.

use std::collections::BTreeMap;

use crate::cd_model::{generate_taps, max_taps, SystemParams};
use crate::clustering::{fuzzify, kmeans_with, KMeansOptions};
use crate::equalizers::{Engine, EqualizerSpec, FdMode, FreqDomainSpec};
use crate::error::{param, Error, Result};
use crate::link_sim::LinkConfig;
use crate::modulation::Modulation;
use crate::scalar::Real;

/// Every key a scenario document may carry.
pub const KNOWN_KEYS: &[&str] = &[
    // link physics
    "dispersion_ps_nm_km",
    "wavelength_nm",
    "fiber_length_km",
    "samples_per_symbol",
    "baud",
    "light_speed",
    // transmitter / receiver
    "modulation",
    "rolloff",
    "rrc_span_symbols",
    "n_symbols",
    "snr_db",
    "seed",
    "seeds",
    // engine
    "engine",
    "n_taps",
    "n_clusters",
    "eta",
    "alpha",
    "fft_size",
    "fd_mode",
    "kmeans_seed",
    "kmeans_max_iter",
    "kmeans_tol",
    "renormalize_centroids",
    // sweeps
    "grid",
    "alpha_grid",
    "eta_grid",
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    /// 0 for values set programmatically (command-line overrides).
    line: usize,
}

/// Parsed scenario document. Lines are `key = value`; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDoc {
    entries: BTreeMap<String, Entry>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = ConfigDoc::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Config {
                    line,
                    key: content.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            check_key(key, line)?;
            if doc.entries.contains_key(key) {
                return Err(Error::Config {
                    line,
                    key: key.into(),
                    message: "duplicate key".into(),
                });
            }
            doc.entries.insert(
                key.to_string(),
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(doc)
    }

    /// Override (or add) a key, as from the command line.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        check_key(key, 0)?;
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.into(),
                line: 0,
            },
        );
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    /// Sorted snapshot of all resolved keys.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .map(|(k, e)| (k.clone(), e.value.clone()))
            .collect()
    }

    fn parsed<V: std::str::FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<V>().map(Some).map_err(|_| Error::Config {
                line: e.line,
                key: key.to_string(),
                message: format!("cannot parse `{}`", e.value),
            }),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parsed(key)
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parsed(key)
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parsed(key)
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?
            .ok_or_else(|| Error::MissingKey(key.into()))
    }

    /// Comma-separated list.
    pub fn get_list<V: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<V>>> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<V>().map_err(|_| Error::Config {
                    line: e.line,
                    key: key.to_string(),
                    message: format!("cannot parse list item `{s}`"),
                })
            })
            .collect::<Result<Vec<V>>>()
            .map(Some)
    }

    fn config_error(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.entries.get(key).map(|e| e.line).unwrap_or(0),
            key: key.into(),
            message: message.into(),
        }
    }

    /// Link constants; `T = 1 / (baud * samples_per_symbol)`.
    pub fn system<T: Real>(&self) -> Result<SystemParams<T>> {
        let d = self.require_f64("dispersion_ps_nm_km")?;
        let wl = self.require_f64("wavelength_nm")?;
        let z = self.require_f64("fiber_length_km")?;
        let sps = self
            .get_usize("samples_per_symbol")?
            .ok_or_else(|| Error::MissingKey("samples_per_symbol".into()))?;
        let baud = self.require_f64("baud")?;
        if sps == 0 || baud <= 0.0 {
            return Err(self.config_error("baud", "baud and samples_per_symbol must be positive"));
        }
        let params = SystemParams::from_engineering_units(d, wl, z, 1.0 / (baud * sps as f64))?;
        match self.get_f64("light_speed")? {
            Some(c) => params.override_light_speed(T::lit(c)),
            None => Ok(params),
        }
    }

    pub fn link<T: Real>(&self) -> Result<LinkConfig<T>> {
        let system = self.system::<T>()?;
        let mut link = LinkConfig::new(system)?;
        link.baud = self.require_f64("baud")?;
        link.samples_per_symbol = self.get_usize("samples_per_symbol")?.unwrap_or(2);
        link.system = system;
        if let Some(m) = self.get_str("modulation") {
            link.modulation = Modulation::parse(m).ok_or_else(|| {
                self.config_error("modulation", format!("unknown modulation `{m}`"))
            })?;
        }
        if let Some(v) = self.get_f64("rolloff")? {
            link.rolloff = v;
        }
        if let Some(v) = self.get_usize("rrc_span_symbols")? {
            link.rrc_span_symbols = v;
        }
        if let Some(v) = self.get_f64("n_symbols")? {
            if v < 0.0 || v.fract() != 0.0 {
                return Err(self.config_error("n_symbols", "must be a whole number"));
            }
            link.n_symbols = v as usize;
        }
        if let Some(v) = self.get_f64("snr_db")? {
            link.snr_db = v;
        }
        if let Some(v) = self.get_u64("seed")? {
            link.seed = v;
        }
        link.validate()?;
        Ok(link)
    }

    /// Seed list: `seeds` if present, otherwise the single `seed` (default 1).
    pub fn seeds(&self) -> Result<Vec<u64>> {
        if let Some(list) = self.get_list::<u64>("seeds")? {
            if list.is_empty() {
                return Err(self.config_error("seeds", "empty seed list"));
            }
            return Ok(list);
        }
        Ok(vec![self.get_u64("seed")?.unwrap_or(1)])
    }

    pub fn engine(&self) -> Result<EngineSettings> {
        let mut s = EngineSettings::default();
        if let Some(name) = self.get_str("engine") {
            s.engine = Engine::parse(name)
                .ok_or_else(|| self.config_error("engine", format!("unknown engine `{name}`")))?;
        }
        s.n_taps = self.get_usize("n_taps")?;
        if let Some(v) = self.get_usize("n_clusters")? {
            s.n_clusters = v;
        }
        if let Some(v) = self.get_f64("eta")? {
            s.eta = v;
        }
        if let Some(v) = self.get_f64("alpha")? {
            s.alpha = v;
        }
        if let Some(v) = self.get_usize("fft_size")? {
            s.fft_size = v;
        }
        if let Some(m) = self.get_str("fd_mode") {
            s.fd_mode = match m.to_ascii_lowercase().as_str() {
                "analytic" => FdModeKind::Analytic,
                "taps" => FdModeKind::Taps,
                _ => return Err(self.config_error("fd_mode", format!("unknown mode `{m}`"))),
            };
        }
        if let Some(v) = self.get_u64("kmeans_seed")? {
            s.kmeans.seed = v;
        }
        if let Some(v) = self.get_usize("kmeans_max_iter")? {
            s.kmeans.max_iter = v;
        }
        if let Some(v) = self.get_f64("kmeans_tol")? {
            s.kmeans.tol = v;
        }
        if let Some(v) = self.get_str("renormalize_centroids") {
            s.kmeans.renormalize = match v {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => {
                    return Err(self.config_error("renormalize_centroids", "expected true or false"))
                }
            };
        }
        Ok(s)
    }
}

fn check_key(key: &str, line: usize) -> Result<()> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config {
            line,
            key: key.into(),
            message: "unknown key".into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdModeKind {
    Analytic,
    Taps,
}

/// Engine choice plus every engine-specific knob.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineSettings {
    pub engine: Engine,
    /// Defaults to the aliasing-free maximum.
    pub n_taps: Option<usize>,
    pub n_clusters: usize,
    pub eta: f64,
    pub alpha: f64,
    pub fft_size: usize,
    pub fd_mode: FdModeKind,
    pub kmeans: KMeansOptions,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            engine: Engine::Direct,
            n_taps: None,
            n_clusters: 12,
            eta: 0.8,
            alpha: 0.7,
            fft_size: 2048,
            fd_mode: FdModeKind::Analytic,
            kmeans: KMeansOptions::default(),
        }
    }
}

impl EngineSettings {
    pub fn resolved_taps<T: Real>(&self, system: &SystemParams<T>) -> usize {
        self.n_taps.unwrap_or_else(|| max_taps(system))
    }

    /// The engine's swept parameter: `N`, `N_c` or the FFT size.
    pub fn parameter<T: Real>(&self, system: &SystemParams<T>) -> usize {
        match self.engine {
            Engine::Direct => self.resolved_taps(system),
            Engine::Clustered | Engine::Fuzzy => self.n_clusters,
            Engine::FreqDomain => self.fft_size,
        }
    }

    pub fn build<T: Real>(&self, system: &SystemParams<T>) -> Result<EqualizerSpec<T>> {
        let n_taps = self.resolved_taps(system);
        match self.engine {
            Engine::Direct => Ok(EqualizerSpec::DirectFir(generate_taps(system, n_taps)?)),
            Engine::Clustered => {
                let taps = generate_taps(system, n_taps)?;
                let plan = kmeans_with(taps.taps(), self.n_clusters, &self.kmeans)?;
                Ok(EqualizerSpec::Clustered { plan, taps })
            }
            Engine::Fuzzy => {
                let taps = generate_taps(system, n_taps)?;
                let plan = kmeans_with(taps.taps(), self.n_clusters, &self.kmeans)?;
                let fuzzy = fuzzify(&plan, taps.taps(), T::lit(self.eta))?;
                Ok(EqualizerSpec::FuzzyClustered {
                    plan: fuzzy,
                    taps,
                    alpha: T::lit(self.alpha),
                })
            }
            Engine::FreqDomain => {
                let mode = match self.fd_mode {
                    FdModeKind::Analytic => FdMode::Analytic,
                    FdModeKind::Taps => FdMode::Taps(generate_taps(system, n_taps)?),
                };
                let spec = EqualizerSpec::FreqDomain(FreqDomainSpec {
                    fft_size: self.fft_size,
                    mode,
                    params: *system,
                });
                spec.validate()?;
                Ok(spec)
            }
        }
    }
}

pub(crate) fn check_grid(name: &str, grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return param(format!("{name} grid is empty"));
    }
    if grid.iter().any(|v| !(lo..=hi).contains(v)) {
        return param(format!("{name} grid must lie within [{lo}, {hi}]"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return param(format!("{name} grid must be strictly ascending"));
    }
    Ok(())
}
