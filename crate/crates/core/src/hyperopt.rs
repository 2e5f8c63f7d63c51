//! Grid search over the soft-decision parameters and parameter sweeps.

use rayon::prelude::*;

use crate::cd_model::generate_taps;
use crate::clustering::{fuzzify, kmeans_with, ClusterPlan};
use crate::config::{check_grid, EngineSettings};
use crate::equalizers::{Engine, EqualizerSpec};
use crate::error::{param, Result};
use crate::link_sim::{LinkCapture, LinkConfig, SimResult};
use crate::scalar::Real;
use crate::TapProfile;

pub const MIN_SEEDS: usize = 3;
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

/// `0.5, 0.55, ..., 1.0`
pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect()
}

/// Mean and sample standard deviation of per-seed Q values.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedStats {
    pub q_mean: f64,
    pub q_std: f64,
    pub ber_mean: f64,
    pub runs: Vec<SimResult>,
}

impl SeedStats {
    pub fn from_runs(runs: Vec<SimResult>) -> Self {
        let n = runs.len() as f64;
        let q_mean = runs.iter().map(|r| r.q_db).sum::<f64>() / n;
        let q_std = if runs.len() < 2 {
            0.0
        } else if q_mean.is_finite() {
            (runs.iter().map(|r| (r.q_db - q_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            f64::NAN
        };
        let ber_mean = runs.iter().map(|r| r.ber).sum::<f64>() / n;
        SeedStats {
            q_mean,
            q_std,
            ber_mean,
            runs,
        }
    }

    /// Standard error of the mean.
    pub fn q_sem(&self) -> f64 {
        self.q_std / (self.runs.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub alpha: f64,
    pub eta: f64,
    pub stats: SeedStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaEtaOptimum {
    pub alpha: f64,
    pub eta: f64,
    pub q_db: f64,
    /// Index into `grid` of the winning point.
    pub best: usize,
    /// Every evaluated point, eta-major then alpha.
    pub grid: Vec<GridPoint>,
}

impl AlphaEtaOptimum {
    pub fn best_point(&self) -> &GridPoint {
        &self.grid[self.best]
    }
}

/// One capture per seed, all sharing every other setting of `link`.
pub fn captures_for_seeds<T: Real>(
    link: &LinkConfig<T>,
    seeds: &[u64],
) -> Result<Vec<LinkCapture<T>>> {
    if seeds.is_empty() {
        return param("seed list is empty");
    }
    seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = link.clone();
            cfg.seed = seed;
            LinkCapture::new(&cfg)
        })
        .collect()
}

pub fn evaluate_on<T: Real>(
    captures: &[LinkCapture<T>],
    spec: &EqualizerSpec<T>,
) -> Result<SeedStats> {
    let runs = captures
        .iter()
        .map(|c| c.evaluate(spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedStats::from_runs(runs))
}

fn check_alpha_eta(alpha_grid: &[f64], eta_grid: &[f64]) -> Result<()> {
    check_grid("alpha", alpha_grid, 0.5, 1.0)?;
    // values below one half are admitted: they force every tap hard
    check_grid("eta", eta_grid, 0.0, 1.0)
}

/// True when `a` beats `b`: higher Q, then smaller eta, then larger alpha.
fn better(a: &GridPoint, b: &GridPoint) -> bool {
    if a.stats.q_mean != b.stats.q_mean {
        return a.stats.q_mean > b.stats.q_mean || b.stats.q_mean.is_nan();
    }
    if a.eta != b.eta {
        return a.eta < b.eta;
    }
    a.alpha > b.alpha
}

/// Exhaustive (alpha, eta) search on prepared captures for a fixed hard plan.
pub fn optimize_on_captures<T: Real>(
    captures: &[LinkCapture<T>],
    taps: &TapProfile<T>,
    plan: &ClusterPlan<T>,
    alpha_grid: &[f64],
    eta_grid: &[f64],
) -> Result<AlphaEtaOptimum> {
    check_alpha_eta(alpha_grid, eta_grid)?;
    if captures.is_empty() {
        return param("no captures to evaluate");
    }
    let fuzzy_plans = eta_grid
        .iter()
        .map(|&eta| fuzzify(plan, taps.taps(), T::lit(eta)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..eta_grid.len())
        .flat_map(|e| (0..alpha_grid.len()).map(move |a| (e, a)))
        .collect();
    let grid = jobs
        .par_iter()
        .map(|&(e, a)| {
            let spec = EqualizerSpec::FuzzyClustered {
                plan: fuzzy_plans[e].clone(),
                taps: taps.clone(),
                alpha: T::lit(alpha_grid[a]),
            };
            Ok(GridPoint {
                alpha: alpha_grid[a],
                eta: eta_grid[e],
                stats: evaluate_on(captures, &spec)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = (1..grid.len()).fold(0, |best, i| {
        if better(&grid[i], &grid[best]) {
            i
        } else {
            best
        }
    });
    Ok(AlphaEtaOptimum {
        alpha: grid[best].alpha,
        eta: grid[best].eta,
        q_db: grid[best].stats.q_mean,
        best,
        grid,
    })
}

/// Search (alpha, eta) for `n_clusters` clusters of the taps described by
/// `base`, averaging Q over `seeds`.
pub fn optimize_alpha_eta<T: Real>(
    link: &LinkConfig<T>,
    seeds: &[u64],
    base: &EngineSettings,
    n_clusters: usize,
    alpha_grid: &[f64],
    eta_grid: &[f64],
) -> Result<AlphaEtaOptimum> {
    check_alpha_eta(alpha_grid, eta_grid)?;
    let captures = captures_for_seeds(link, seeds)?;
    let taps = generate_taps(&link.system, base.resolved_taps(&link.system))?;
    let plan = kmeans_with(taps.taps(), n_clusters, &base.kmeans)?;
    optimize_on_captures(&captures, &taps, &plan, alpha_grid, eta_grid)
}

#[derive(Debug, Clone)]
pub struct SweepSpec<T: Real> {
    pub engine: Engine,
    /// Tap counts, cluster counts or FFT sizes depending on `engine`.
    pub grid: Vec<usize>,
    pub link: LinkConfig<T>,
    pub seeds: Vec<u64>,
    pub alpha_grid: Vec<f64>,
    pub eta_grid: Vec<f64>,
    /// Fixed knobs not being swept (tap count for clustered engines, FD mode, K-means options).
    pub base: EngineSettings,
}

impl<T: Real> SweepSpec<T> {
    pub fn new(engine: Engine, grid: Vec<usize>, link: LinkConfig<T>) -> Self {
        SweepSpec {
            engine,
            grid,
            link,
            seeds: DEFAULT_SEEDS.to_vec(),
            alpha_grid: default_grid(),
            eta_grid: default_grid(),
            base: EngineSettings {
                engine,
                ..EngineSettings::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return param("sweep grid is empty");
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return param("sweep grid must be strictly ascending");
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() < MIN_SEEDS {
            return param(format!("a sweep needs at least {MIN_SEEDS} distinct seeds"));
        }
        if self.engine == Engine::Fuzzy {
            check_alpha_eta(&self.alpha_grid, &self.eta_grid)?;
        }
        self.link.validate()
    }

    /// Engine settings for one grid value.
    pub fn settings_at(&self, value: usize) -> EngineSettings {
        let mut s = self.base.clone();
        s.engine = self.engine;
        match self.engine {
            Engine::Direct => s.n_taps = Some(value),
            Engine::Clustered | Engine::Fuzzy => s.n_clusters = value,
            Engine::FreqDomain => s.fft_size = value,
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub param: usize,
    pub stats: SeedStats,
    pub rmps: f64,
    /// Chosen soft-decision parameters (fuzzy engine only).
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
}

pub fn sweep<T: Real>(spec: &SweepSpec<T>) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    let captures = captures_for_seeds(&spec.link, &spec.seeds)?;
    sweep_on_captures(spec, &captures)
}

/// Sweep on captures built beforehand (they must match `spec.link` and `spec.seeds`).
pub fn sweep_on_captures<T: Real>(
    spec: &SweepSpec<T>,
    captures: &[LinkCapture<T>],
) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    if captures.len() != spec.seeds.len() {
        return param("one capture per seed is required");
    }
    let system = &spec.link.system;
    spec.grid
        .iter()
        .map(|&value| {
            let settings = spec.settings_at(value);
            if spec.engine == Engine::Fuzzy {
                let taps = generate_taps(system, settings.resolved_taps(system))?;
                let plan = kmeans_with(taps.taps(), value, &settings.kmeans)?;
                let opt =
                    optimize_on_captures(captures, &taps, &plan, &spec.alpha_grid, &spec.eta_grid)?;
                let point = opt.best_point();
                Ok(SweepPoint {
                    param: value,
                    rmps: point.stats.runs[0].rmps,
                    stats: point.stats.clone(),
                    alpha: Some(opt.alpha),
                    eta: Some(opt.eta),
                })
            } else {
                let eq = settings.build(system)?;
                let stats = evaluate_on(captures, &eq)?;
                Ok(SweepPoint {
                    param: value,
                    rmps: stats.runs[0].rmps,
                    stats,
                    alpha: None,
                    eta: None,
                })
            }
        })
        .collect()
}

/// Bisect the SNR so the mean Q of `settings` over `seeds` lands on `target_q`
/// within `tol_db`. Returns the SNR and the Q reached there.
pub fn calibrate_snr<T: Real>(
    link: &LinkConfig<T>,
    seeds: &[u64],
    settings: &EngineSettings,
    target_q: f64,
    mut lo_db: f64,
    mut hi_db: f64,
    tol_db: f64,
) -> Result<(f64, f64)> {
    if lo_db >= hi_db || lo_db.is_nan() || hi_db.is_nan() {
        return param("calibration bracket must satisfy lo < hi");
    }
    let eq = settings.build(&link.system)?;
    let q_at = |snr: f64| -> Result<f64> {
        let mut cfg = link.clone();
        cfg.snr_db = snr;
        Ok(evaluate_on(&captures_for_seeds(&cfg, seeds)?, &eq)?.q_mean)
    };
    let (q_lo, q_hi) = (q_at(lo_db)?, q_at(hi_db)?);
    if !(q_lo <= target_q && target_q <= q_hi) {
        return param(format!(
            "target Q {target_q} dB not bracketed: {q_lo} dB at {lo_db} dB, {q_hi} dB at {hi_db} dB"
        ));
    }
    let mut best = if (q_lo - target_q).abs() < (q_hi - target_q).abs() {
        (lo_db, q_lo)
    } else {
        (hi_db, q_hi)
    };
    for _ in 0..40 {
        if (best.1 - target_q).abs() <= tol_db {
            break;
        }
        let mid = 0.5 * (lo_db + hi_db);
        let q = q_at(mid)?;
        if (q - target_q).abs() < (best.1 - target_q).abs() {
            best = (mid, q);
        }
        if q < target_q {
            lo_db = mid;
        } else {
            hi_db = mid;
        }
    }
    Ok(best)
}
