//! Dispersion-compensation engines operating on a fractionally spaced
//! complex stream.
//!
//! Every engine produces an output of the input's length aligned to the
//! filter centre ("same" convolution). Time-domain engines treat samples
//! outside the input as zero; the first and last `transient()` outputs are
//! start-up/tail transients.

use std::fmt;

use crate::cd_model::{cd_frequency_response, SystemParams, TapProfile};
use crate::clustering::{ClusterPlan, FuzzyEntry, FuzzyPlan};
use crate::error::{param, Result};
use crate::scalar::{zero, Cplx, Real};
use crate::spectral::{dft_angular_grid, FftPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Direct,
    Clustered,
    Fuzzy,
    FreqDomain,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Direct => "td",
            Engine::Clustered => "clustered",
            Engine::Fuzzy => "fuzzy",
            Engine::FreqDomain => "fd",
        }
    }

    pub fn parse(name: &str) -> Option<Engine> {
        match name.trim().to_ascii_lowercase().as_str() {
            "td" | "direct" | "td-cdc" => Some(Engine::Direct),
            "clustered" | "hard" => Some(Engine::Clustered),
            "fuzzy" | "fuzzy-clustered" => Some(Engine::Fuzzy),
            "fd" | "freq" | "fd-cdc" => Some(Engine::FreqDomain),
            _ => None,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Source of the frequency-domain equalizer response.
#[derive(Debug, Clone, PartialEq)]
pub enum FdMode<T: Real> {
    /// Conjugate dispersion response sampled on the DFT grid.
    Analytic,
    /// DFT of the zero-padded FIR taps.
    Taps(TapProfile<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreqDomainSpec<T: Real> {
    pub fft_size: usize,
    pub mode: FdMode<T>,
    pub params: SystemParams<T>,
}

impl<T: Real> FreqDomainSpec<T> {
    /// Overlap between consecutive blocks, fixed at half the FFT size.
    pub fn overlap(&self) -> usize {
        self.fft_size / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EqualizerSpec<T: Real> {
    DirectFir(TapProfile<T>),
    Clustered {
        plan: ClusterPlan<T>,
        taps: TapProfile<T>,
    },
    FuzzyClustered {
        plan: FuzzyPlan<T>,
        taps: TapProfile<T>,
        alpha: T,
    },
    FreqDomain(FreqDomainSpec<T>),
}

/// Multiplication tally of one engine run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    /// Complex-by-complex products.
    pub complex_mults: u64,
    /// Real-by-complex scalings (two real products each).
    pub real_scalings: u64,
    pub outputs: u64,
}

impl OpCount {
    /// Real multiplications with three per complex product.
    pub fn real_mults(&self) -> u64 {
        3 * self.complex_mults + 2 * self.real_scalings
    }

    pub fn real_mults_per_output(&self) -> f64 {
        self.real_mults() as f64 / self.outputs as f64
    }

    pub fn complex_mults_per_output(&self) -> f64 {
        self.complex_mults as f64 / self.outputs as f64
    }
}

impl<T: Real> EqualizerSpec<T> {
    pub fn engine(&self) -> Engine {
        match self {
            EqualizerSpec::DirectFir(_) => Engine::Direct,
            EqualizerSpec::Clustered { .. } => Engine::Clustered,
            EqualizerSpec::FuzzyClustered { .. } => Engine::Fuzzy,
            EqualizerSpec::FreqDomain(_) => Engine::FreqDomain,
        }
    }

    /// Output samples at each end affected by zero-padding or block edges.
    pub fn transient(&self) -> usize {
        match self {
            EqualizerSpec::DirectFir(taps)
            | EqualizerSpec::Clustered { taps, .. }
            | EqualizerSpec::FuzzyClustered { taps, .. } => taps.half_width(),
            EqualizerSpec::FreqDomain(fd) => match &fd.mode {
                FdMode::Taps(taps) => taps.half_width(),
                FdMode::Analytic => fd.fft_size / 4,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EqualizerSpec::DirectFir(_) => Ok(()),
            EqualizerSpec::Clustered { plan, taps } => {
                check_plan_len(plan.assignment().len(), taps)
            }
            EqualizerSpec::FuzzyClustered { plan, taps, alpha } => {
                check_alpha(*alpha)?;
                check_plan_len(plan.entries().len(), taps)
            }
            EqualizerSpec::FreqDomain(fd) => check_fd(fd),
        }
    }

    pub fn equalize(&self, signal: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        Ok(self.equalize_counted(signal)?.0)
    }

    /// Equalize while tallying the multiplications actually performed.
    pub fn equalize_counted(&self, signal: &[Cplx<T>]) -> Result<(Vec<Cplx<T>>, OpCount)> {
        let mut ops = OpCount::default();
        let out = match self {
            EqualizerSpec::DirectFir(taps) => direct(signal, taps, &mut ops)?,
            EqualizerSpec::Clustered { plan, taps } => clustered(signal, plan, taps, &mut ops)?,
            EqualizerSpec::FuzzyClustered { plan, taps, alpha } => {
                fuzzy(signal, plan, taps, *alpha, &mut ops)?
            }
            EqualizerSpec::FreqDomain(fd) => overlap_save(signal, fd, &mut ops)?,
        };
        Ok((out, ops))
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha >= T::lit(0.5) && alpha <= T::one() {
        Ok(())
    } else {
        param(format!("alpha {alpha} outside [0.5, 1]"))
    }
}

fn check_plan_len<T: Real>(plan_len: usize, taps: &TapProfile<T>) -> Result<()> {
    if plan_len != taps.n_taps() {
        return param(format!(
            "plan covers {plan_len} taps but the filter has {}",
            taps.n_taps()
        ));
    }
    Ok(())
}

fn check_signal<T: Real>(signal: &[Cplx<T>], taps: &TapProfile<T>) -> Result<()> {
    if signal.len() < taps.n_taps() {
        return param(format!(
            "signal of {} samples is shorter than the {}-tap filter",
            signal.len(),
            taps.n_taps()
        ));
    }
    Ok(())
}

fn check_fd<T: Real>(fd: &FreqDomainSpec<T>) -> Result<()> {
    if fd.fft_size < 2 || !fd.fft_size.is_power_of_two() {
        return param(format!(
            "FFT size {} is not a power of two >= 2",
            fd.fft_size
        ));
    }
    if let FdMode::Taps(taps) = &fd.mode {
        if fd.fft_size / 2 < taps.n_taps() {
            return param(format!(
                "FFT size {} too small for {} taps (needs at least {})",
                fd.fft_size,
                taps.n_taps(),
                2 * taps.n_taps()
            ));
        }
    }
    Ok(())
}

/// Input with `2h` leading and trailing zeros so output `n` reads
/// `padded[n + r]` for tap offset `r = 2h - j`.
fn pad<T: Real>(signal: &[Cplx<T>], half: usize) -> Vec<Cplx<T>> {
    let mut padded = vec![zero(); signal.len() + 2 * half];
    padded[half..half + signal.len()].copy_from_slice(signal);
    padded
}

/// Plain "same"-mode FIR convolution `y(n) = sum_k g(k) x(n - k)`.
pub fn equalize_direct<T: Real>(signal: &[Cplx<T>], taps: &TapProfile<T>) -> Result<Vec<Cplx<T>>> {
    direct(signal, taps, &mut OpCount::default())
}

fn direct<T: Real>(
    signal: &[Cplx<T>],
    taps: &TapProfile<T>,
    ops: &mut OpCount,
) -> Result<Vec<Cplx<T>>> {
    check_signal(signal, taps)?;
    let n_taps = taps.n_taps();
    let padded = pad(signal, taps.half_width());
    let reversed: Vec<Cplx<T>> = taps.taps().iter().rev().copied().collect();
    let out: Vec<Cplx<T>> = padded
        .windows(n_taps)
        .map(|w| {
            w.iter()
                .zip(&reversed)
                .fold(zero(), |acc, (x, g)| acc + x * g)
        })
        .collect();
    ops.complex_mults += (n_taps * out.len()) as u64;
    ops.outputs += out.len() as u64;
    Ok(out)
}

/// Per-cluster lists of padded-input offsets, ascending tap index.
fn group_offsets(
    assignment: impl Iterator<Item = usize>,
    n_clusters: usize,
    n_taps: usize,
) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); n_clusters];
    for (j, c) in assignment.enumerate() {
        groups[c].push(n_taps - 1 - j);
    }
    groups
}

#[inline]
fn gather<T: Real>(window: &[Cplx<T>], offsets: &[usize]) -> Cplx<T> {
    offsets.iter().fold(zero(), |acc, &r| acc + window[r])
}

/// Clustered FIR: per output sample, sum the inputs that share a centroid,
/// then weight each sum by its centroid.
pub fn equalize_clustered<T: Real>(
    signal: &[Cplx<T>],
    plan: &ClusterPlan<T>,
    taps: &TapProfile<T>,
) -> Result<Vec<Cplx<T>>> {
    clustered(signal, plan, taps, &mut OpCount::default())
}

fn clustered<T: Real>(
    signal: &[Cplx<T>],
    plan: &ClusterPlan<T>,
    taps: &TapProfile<T>,
    ops: &mut OpCount,
) -> Result<Vec<Cplx<T>>> {
    check_plan_len(plan.assignment().len(), taps)?;
    check_signal(signal, taps)?;
    let n_taps = taps.n_taps();
    let groups = group_offsets(plan.assignment().iter().copied(), plan.n_clusters(), n_taps);
    let active: Vec<(usize, &Vec<usize>)> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .collect();
    let centroids = plan.centroids();
    let padded = pad(signal, taps.half_width());
    let out: Vec<Cplx<T>> = padded
        .windows(n_taps)
        .map(|w| {
            active.iter().fold(zero(), |acc, &(c, offs)| {
                acc + gather(w, offs) * centroids[c]
            })
        })
        .collect();
    ops.complex_mults += (active.len() * out.len()) as u64;
    ops.outputs += out.len() as u64;
    Ok(out)
}

/// Fuzzy-clustered FIR: hard taps feed their cluster's plain sum; soft taps
/// feed the nearest cluster's first fuzzy sum and the runner-up's second
/// fuzzy sum, and each cluster multiplies
/// `plain + alpha * first + (1 - alpha) * second` by its centroid.
pub fn equalize_fuzzy<T: Real>(
    signal: &[Cplx<T>],
    plan: &FuzzyPlan<T>,
    taps: &TapProfile<T>,
    alpha: T,
) -> Result<Vec<Cplx<T>>> {
    fuzzy(signal, plan, taps, alpha, &mut OpCount::default())
}

struct FuzzyGroups {
    plain: Vec<Vec<usize>>,
    first: Vec<Vec<usize>>,
    second: Vec<Vec<usize>>,
}

impl FuzzyGroups {
    fn new<T: Real>(plan: &FuzzyPlan<T>) -> Self {
        let nc = plan.n_clusters();
        let n_taps = plan.entries().len();
        let mut g = FuzzyGroups {
            plain: vec![Vec::new(); nc],
            first: vec![Vec::new(); nc],
            second: vec![Vec::new(); nc],
        };
        for (j, e) in plan.entries().iter().enumerate() {
            let r = n_taps - 1 - j;
            match *e {
                FuzzyEntry::Hard { cluster } => g.plain[cluster].push(r),
                FuzzyEntry::Soft {
                    nearest, second, ..
                } => {
                    g.first[nearest].push(r);
                    g.second[second].push(r);
                }
            }
        }
        g
    }

    /// Accumulators of cluster `c` for the window `w`.
    #[inline]
    fn sums<T: Real>(&self, w: &[Cplx<T>], c: usize) -> [Cplx<T>; 3] {
        [
            gather(w, &self.plain[c]),
            gather(w, &self.first[c]),
            gather(w, &self.second[c]),
        ]
    }
}

fn fuzzy<T: Real>(
    signal: &[Cplx<T>],
    plan: &FuzzyPlan<T>,
    taps: &TapProfile<T>,
    alpha: T,
    ops: &mut OpCount,
) -> Result<Vec<Cplx<T>>> {
    check_alpha(alpha)?;
    check_plan_len(plan.entries().len(), taps)?;
    check_signal(signal, taps)?;
    let groups = FuzzyGroups::new(plan);
    let beta = T::one() - alpha;
    let centroids = plan.centroids();
    let active: Vec<usize> = (0..plan.n_clusters())
        .filter(|&c| {
            !(groups.plain[c].is_empty()
                && groups.first[c].is_empty()
                && groups.second[c].is_empty())
        })
        .collect();
    let scaled = (0..plan.n_clusters())
        .map(|c| !groups.first[c].is_empty() as u64 + !groups.second[c].is_empty() as u64)
        .sum::<u64>();
    let padded = pad(signal, taps.half_width());
    let out: Vec<Cplx<T>> = padded
        .windows(taps.n_taps())
        .map(|w| {
            active.iter().fold(zero(), |acc, &c| {
                let [plain, first, second] = groups.sums(w, c);
                acc + (plain + first * alpha + second * beta) * centroids[c]
            })
        })
        .collect();
    ops.complex_mults += (active.len() * out.len()) as u64;
    ops.real_scalings += scaled * out.len() as u64;
    ops.outputs += out.len() as u64;
    Ok(out)
}

/// Per-cluster accumulator vectors of one output sample.
///
/// `alpha = None` gives the hard-path sums `x_s(k)` of `plan`; with a fuzzy
/// plan the entries are `plain + alpha * first + (1 - alpha) * second`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAccumulators<T: Real> {
    pub values: Vec<Cplx<T>>,
}

impl<T: Real> ClusterAccumulators<T> {
    pub fn hard(signal: &[Cplx<T>], plan: &ClusterPlan<T>, n: usize) -> Result<Self> {
        let n_taps = plan.assignment().len();
        let half = (n_taps - 1) / 2;
        let window = window_at(signal, half, n)?;
        let groups = group_offsets(plan.assignment().iter().copied(), plan.n_clusters(), n_taps);
        Ok(ClusterAccumulators {
            values: groups.iter().map(|g| gather(&window, g)).collect(),
        })
    }

    pub fn fuzzy(signal: &[Cplx<T>], plan: &FuzzyPlan<T>, alpha: T, n: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let half = (plan.entries().len() - 1) / 2;
        let window = window_at(signal, half, n)?;
        let groups = FuzzyGroups::new(plan);
        let beta = T::one() - alpha;
        Ok(ClusterAccumulators {
            values: (0..plan.n_clusters())
                .map(|c| {
                    let [plain, first, second] = groups.sums(&window, c);
                    plain + first * alpha + second * beta
                })
                .collect(),
        })
    }

    /// Combine with centroids into the output sample.
    pub fn output(&self, centroids: &[Cplx<T>]) -> Cplx<T> {
        self.values
            .iter()
            .zip(centroids)
            .fold(zero(), |acc, (x, g)| acc + x * g)
    }
}

fn window_at<T: Real>(signal: &[Cplx<T>], half: usize, n: usize) -> Result<Vec<Cplx<T>>> {
    if n >= signal.len() {
        return param(format!(
            "output index {n} beyond signal of {}",
            signal.len()
        ));
    }
    let padded = pad(signal, half);
    Ok(padded[n..n + 2 * half + 1].to_vec())
}

/// Overlap-save FFT equalizer with 50 % overlap.
pub fn equalize_fd<T: Real>(signal: &[Cplx<T>], spec: &FreqDomainSpec<T>) -> Result<Vec<Cplx<T>>> {
    overlap_save(signal, spec, &mut OpCount::default())
}

fn fd_response<T: Real>(spec: &FreqDomainSpec<T>, fft: &FftPair<T>) -> Vec<Cplx<T>> {
    let l = spec.fft_size;
    match &spec.mode {
        FdMode::Analytic => {
            let grid = dft_angular_grid(l, spec.params.sampling_period());
            cd_frequency_response(&spec.params, &grid, true)
        }
        FdMode::Taps(taps) => {
            let mut h = vec![zero(); l];
            let half = taps.half_width() as isize;
            for (j, g) in taps.taps().iter().enumerate() {
                let m = j as isize - half;
                h[m.rem_euclid(l as isize) as usize] = *g;
            }
            fft.forward(&mut h);
            h
        }
    }
}

fn overlap_save<T: Real>(
    signal: &[Cplx<T>],
    spec: &FreqDomainSpec<T>,
    ops: &mut OpCount,
) -> Result<Vec<Cplx<T>>> {
    check_fd(spec)?;
    if signal.is_empty() {
        return param("cannot equalize an empty signal");
    }
    let l = spec.fft_size;
    let step = l - spec.overlap();
    // the valid half of each circular block sits between a quarter-block
    // lead and a quarter-block tail
    let lead = spec.overlap() / 2;
    let fft = FftPair::new(l);
    let response = fd_response(spec, &fft);
    let len = signal.len();
    let mut out = Vec::with_capacity(len);
    let mut block = vec![zero(); l];
    let mut start = 0usize;
    let mut blocks = 0u64;
    while start < len {
        for (i, b) in block.iter_mut().enumerate() {
            let idx = (start + i).checked_sub(lead);
            *b = match idx {
                Some(t) if t < len => signal[t],
                _ => zero(),
            };
        }
        fft.forward(&mut block);
        for (b, h) in block.iter_mut().zip(&response) {
            *b = *b * h;
        }
        fft.inverse_scaled(&mut block);
        let keep = step.min(len - start);
        out.extend_from_slice(&block[lead..lead + keep]);
        start += step;
        blocks += 1;
    }
    // radix-2 model: two transforms of (L/2) log2 L butterflies plus L pointwise products
    let log2 = l.trailing_zeros() as u64;
    ops.complex_mults += blocks * (l as u64 * log2 + l as u64);
    ops.outputs += out.len() as u64;
    Ok(out)
}
