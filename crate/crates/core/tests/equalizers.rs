mod common;

use common::*;
use disperse::clustering::{fuzzify, kmeans, ClusterPlan};
use disperse::equalizers::{
    equalize_clustered, equalize_direct, equalize_fd, equalize_fuzzy, ClusterAccumulators,
    EqualizerSpec, FdMode, FreqDomainSpec,
};
use disperse::{apply_channel, generate_taps, max_taps, SystemParams, TapProfile};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(seed: u64, len: usize) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn short_link() -> SystemParams<f64> {
    SystemParams::from_engineering_units(17.0, 1550.0, 300.0, 25e-12).unwrap()
}

#[test]
fn identity_and_impulse() {
    let sys = short_link();
    let x = noise(1, 64);
    let one = TapProfile::from_coefficients(vec![Complex::new(1.0, 0.0)], sys).unwrap();
    assert_eq!(equalize_direct(&x, &one).unwrap(), x);
    let taps = generate_taps(&sys, 21).unwrap();
    let mut impulse = vec![Complex::new(0.0, 0.0); 41];
    impulse[20] = Complex::new(1.0, 0.0);
    let out = equalize_direct(&impulse, &taps).unwrap();
    assert_eq!(&out[10..31], taps.taps());
}

#[test]
fn clustered_matches_substitution_oracle_at_273_taps() {
    let taps = generate_taps(&long_haul(), 273).unwrap();
    let x = noise(2, 1000);
    let plan = kmeans(taps.taps(), 26, 3, 300, 1e-10).unwrap();
    let sub: Vec<C> = plan
        .assignment()
        .iter()
        .map(|&j| plan.centroids()[j])
        .collect();
    let got = equalize_clustered(&x, &plan, &taps).unwrap();
    assert!(max_abs_diff(&got, &naive_conv(&x, &sub)) < 1e-10);
}

#[test]
fn fuzzy_matches_effective_tap_oracle_at_273_taps() {
    let taps = generate_taps(&long_haul(), 273).unwrap();
    let x = noise(4, 1000);
    let plan = kmeans(taps.taps(), 12, 1, 300, 1e-10).unwrap();
    let fz = fuzzify(&plan, taps.taps(), 0.8).unwrap();
    let alpha = 0.7;
    let c = fz.centroids();
    let eff: Vec<C> = fz
        .entries()
        .iter()
        .map(|e| match *e {
            disperse::clustering::FuzzyEntry::Hard { cluster } => c[cluster],
            disperse::clustering::FuzzyEntry::Soft {
                nearest, second, ..
            } => c[nearest] * alpha + c[second] * (1.0 - alpha),
        })
        .collect();
    let got = equalize_fuzzy(&x, &fz, &taps, alpha).unwrap();
    assert!(max_abs_diff(&got, &naive_conv(&x, &eff)) < 1e-10);
}

#[test]
fn single_cluster_is_scaled_running_sum() {
    let sys = short_link();
    let taps = generate_taps(&sys, 21).unwrap();
    let x = noise(5, 200);
    let plan = kmeans(taps.taps(), 1, 0, 300, 1e-10).unwrap();
    let ones = vec![Complex::new(1.0, 0.0); 21];
    let expected: Vec<C> = naive_conv(&x, &ones)
        .into_iter()
        .map(|s| s * plan.centroids()[0])
        .collect();
    assert!(max_abs_diff(&equalize_clustered(&x, &plan, &taps).unwrap(), &expected) < 1e-12);
}

#[test]
fn fuzzy_with_alpha_one_is_nearest_hard() {
    let taps = generate_taps(&long_haul(), 273).unwrap();
    let x = noise(6, 800);
    let plan = kmeans(taps.taps(), 12, 2, 300, 1e-10).unwrap();
    let fz = fuzzify(&plan, taps.taps(), 1.0).unwrap();
    assert!(fz.n_soft() > 0);
    let nearest = ClusterPlan::from_parts(
        plan.centroids().to_vec(),
        fz.entries().iter().map(|e| e.nearest()).collect(),
        taps.taps(),
    )
    .unwrap();
    let a = equalize_fuzzy(&x, &fz, &taps, 1.0).unwrap();
    let b = equalize_clustered(&x, &nearest, &taps).unwrap();
    assert!(max_abs_diff(&a, &b) < 1e-12);
    let hard_acc = ClusterAccumulators::hard(&x, &nearest, 400).unwrap();
    let fuzzy_acc = ClusterAccumulators::fuzzy(&x, &fz, 1.0, 400).unwrap();
    assert!(max_abs_diff(&hard_acc.values, &fuzzy_acc.values) < 1e-12);
}

#[test]
fn accumulators_partition_the_window() {
    let taps = generate_taps(&long_haul(), 273).unwrap();
    let x = noise(7, 600);
    let plan = kmeans(taps.taps(), 9, 2, 300, 1e-10).unwrap();
    let acc = ClusterAccumulators::hard(&x, &plan, 300).unwrap();
    let total: C = acc.values.iter().sum();
    let window: C = (300 - 136..=300 + 136).map(|m| x[m]).sum();
    assert!((total - window).norm() < 1e-12);
}

#[test]
fn analytic_fd_inverts_the_channel_and_flat_response_is_identity() {
    let sys = long_haul();
    let x = noise(8, 4096);
    let tiny = sys.with_fiber_length(1800e3 * 1e-12).unwrap();
    let flat = FreqDomainSpec {
        fft_size: 256,
        mode: FdMode::Analytic,
        params: tiny,
    };
    assert!(rms_diff(&equalize_fd(&x, &flat).unwrap(), &x) < 1e-9);

    // interior samples recover the channel input once the overlap covers the memory
    let y = apply_channel(&x, &sys).unwrap();
    let spec = FreqDomainSpec {
        fft_size: 2048,
        mode: FdMode::Analytic,
        params: sys,
    };
    let z = equalize_fd(&y, &spec).unwrap();
    let guard = max_taps(&sys);
    let inner = guard..x.len() - guard;
    assert!(rms_diff(&z[inner.clone()], &x[inner.clone()]) / rms(&x[inner]) < 1e-2);
}

#[test]
fn fft_size_must_cover_taps() {
    let taps = generate_taps(&long_haul(), 273).unwrap();
    let spec = EqualizerSpec::FreqDomain(FreqDomainSpec {
        fft_size: 512,
        mode: FdMode::Taps(taps.clone()),
        params: *taps.params(),
    });
    assert!(spec.validate().is_err());
    let spec = EqualizerSpec::FreqDomain(FreqDomainSpec {
        fft_size: 1024,
        mode: FdMode::Taps(taps.clone()),
        params: *taps.params(),
    });
    assert!(spec.validate().is_ok());
}

#[test]
fn op_counter_matches_clustered_formula() {
    let taps = generate_taps(&long_haul(), 273).unwrap();
    let x = noise(9, 2000);
    let plan = kmeans(taps.taps(), 26, 0, 300, 1e-10).unwrap();
    let (_, ops) = EqualizerSpec::Clustered { plan, taps }
        .equalize_counted(&x)
        .unwrap();
    // every cluster is active in every full window; edges see fewer
    assert!(ops.real_mults_per_output() <= 78.0);
    assert!(ops.real_mults_per_output() > 70.0);
}

fn engines(seed: u64, sys: &SystemParams<f64>, n: usize) -> Vec<EqualizerSpec<f64>> {
    let taps = generate_taps(sys, n).unwrap();
    let distinct = n / 2 + 1;
    let k = 2 + (seed as usize % (distinct.min(16) - 1));
    let plan = kmeans(taps.taps(), k, seed, 300, 1e-10).unwrap();
    let fz = fuzzify(&plan, taps.taps(), 0.85).unwrap();
    vec![
        EqualizerSpec::DirectFir(taps.clone()),
        EqualizerSpec::Clustered {
            plan,
            taps: taps.clone(),
        },
        EqualizerSpec::FuzzyClustered {
            plan: fz,
            taps: taps.clone(),
            alpha: 0.6,
        },
        EqualizerSpec::FreqDomain(FreqDomainSpec {
            fft_size: (2 * n).next_power_of_two(),
            mode: FdMode::Taps(taps),
            params: *sys,
        }),
        EqualizerSpec::FreqDomain(FreqDomainSpec {
            fft_size: 256,
            mode: FdMode::Analytic,
            params: *sys,
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn every_engine_is_linear(seed in any::<u64>(), a in (-2.0f64..2.0, -2.0f64..2.0), b in (-2.0f64..2.0, -2.0f64..2.0), len in 80usize..400) {
        let sys = short_link();
        let (a, b) = (Complex::new(a.0, a.1), Complex::new(b.0, b.1));
        let x = noise(seed, len);
        let y = noise(seed ^ 1, len);
        let mix: Vec<C> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        for eq in engines(seed, &sys, 2 * (seed as usize % 10) + 11) {
            let lhs = eq.equalize(&mix).unwrap();
            let ex = eq.equalize(&x).unwrap();
            let ey = eq.equalize(&y).unwrap();
            let rhs: Vec<C> = ex.iter().zip(&ey).map(|(p, q)| a * p + b * q).collect();
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-10, "{:?}", eq.engine());
        }
    }

    #[test]
    fn time_domain_engines_are_shift_invariant(seed in any::<u64>(), shift in 1usize..40, len in 120usize..400) {
        let sys = short_link();
        let x = noise(seed, len);
        let mut shifted = vec![Complex::new(0.0, 0.0); shift];
        shifted.extend_from_slice(&x[..len - shift]);
        for eq in engines(seed, &sys, 21).into_iter().take(4) {
            let ox = eq.equalize(&x).unwrap();
            let os = eq.equalize(&shifted).unwrap();
            let edge = 10;
            prop_assert!(max_abs_diff(&os[shift + edge..len - edge], &ox[edge..len - shift - edge]) < 1e-10, "{:?}", eq.engine());
        }
    }

    #[test]
    fn overlap_save_matches_direct(seed in any::<u64>(), n_half in 0usize..60, extra in 0u32..3, len in 130usize..900) {
        let sys = SystemParams::<f64>::from_engineering_units(17.0, 1550.0, 1800.0, 25e-12).unwrap();
        let n = 2 * n_half + 1;
        let taps = generate_taps(&sys, n).unwrap();
        let x = noise(seed, len.max(n));
        let spec = FreqDomainSpec { fft_size: (2 * n).next_power_of_two() << extra, mode: FdMode::Taps(taps.clone()), params: sys };
        let fd = equalize_fd(&x, &spec).unwrap();
        prop_assert!(rms_diff(&fd, &equalize_direct(&x, &taps).unwrap()) < 1e-9);
    }
}
