mod common;

use common::*;
use disperse::{
    apply_channel, apply_dispersion, cd_frequency_response, generate_taps, max_taps, SystemParams,
};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rounded_c() -> SystemParams<f64> {
    long_haul().override_light_speed(3e8).unwrap()
}

#[test]
fn tap_counts_for_reference_links() {
    assert_eq!(max_taps(&rounded_c()), 393);
    assert_eq!(max_taps(&rounded_c().with_fiber_length(100e3).unwrap()), 21);
    assert_eq!(max_taps(&rounded_c().with_fiber_length(1.0).unwrap()), 1);
}

#[test]
fn tap_magnitude_and_energy() {
    let p = rounded_c();
    let taps = generate_taps(&p, 393).unwrap();
    let c = 3e8;
    let expected = (c * 25e-12f64.powi(2) / (17e-6 * 1550e-9f64.powi(2) * 1.8e6)).sqrt();
    for g in taps.taps() {
        assert!((g.norm() - expected).abs() < 1e-12 * expected);
    }
    assert!((expected - 0.0505).abs() < 5e-4);
    let energy: f64 = taps.taps().iter().map(|g| g.norm_sqr()).sum();
    assert!((energy - 1.002).abs() < 1e-3, "{energy}");
    assert_eq!(taps.tap(1), taps.tap(-1));
}

#[test]
fn channel_examples() {
    let p = long_haul();
    let mut rng_state = 7u64;
    let x: Vec<C> = (0..500)
        .map(|_| {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            Complex::new(
                ((rng_state >> 11) as f64 / (1u64 << 53) as f64) - 0.5,
                ((rng_state >> 20) as f64 / (1u64 << 44) as f64) - 0.5,
            )
        })
        .collect();
    let tiny = p.with_fiber_length(1800e3 * 1e-12).unwrap();
    assert!(rms_diff(&apply_channel(&x, &tiny).unwrap(), &x) < 1e-6);
    assert_eq!(
        cd_frequency_response(&p, &[0.0], false)[0],
        Complex::new(1.0, 0.0)
    );
}

/// Sum of random tones under a Gaussian envelope: spectrally confined and
/// negligible outside the middle of the record.
fn band_limited(seed: u64, len: usize) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tones: Vec<(f64, C)> = (0..16)
        .map(|_| {
            (
                rng.random_range(-0.2..0.2),
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    let width = len as f64 / 20.0;
    (0..len)
        .map(|n| {
            let t = (n as f64 - len as f64 / 2.0) / width;
            let env = (-0.5 * t * t).exp();
            tones
                .iter()
                .map(|&(f, a)| {
                    a * Complex::from_polar(env, 2.0 * std::f64::consts::PI * f * n as f64)
                })
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn taps_have_constant_modulus_and_symmetry(z_km in 10.0f64..3000.0, frac in 0.0f64..1.0) {
        let p = SystemParams::<f64>::from_engineering_units(17.0, 1550.0, z_km, 25e-12).unwrap();
        let n_max = max_taps(&p);
        let n = 2 * ((frac * (n_max / 2) as f64) as usize) + 1;
        let taps = generate_taps(&p, n).unwrap();
        let mags: Vec<f64> = taps.taps().iter().map(|g| g.norm()).collect();
        let mean = mags.iter().sum::<f64>() / n as f64;
        let spread = mags.iter().cloned().fold(f64::MIN, f64::max) - mags.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(spread < 1e-12 * mean);
        let h = (n / 2) as isize;
        for k in 0..=h {
            prop_assert_eq!(taps.tap(k), taps.tap(-k));
        }
        let full = generate_taps(&p, n_max).unwrap();
        let energy: f64 = full.taps().iter().map(|g| g.norm_sqr()).sum();
        let bound = 4.0 / n_max as f64;
        prop_assert!((energy - 1.0).abs() <= bound, "energy {} n_max {}", energy, n_max);
    }

    #[test]
    fn max_taps_is_odd_and_monotone(z_km in 1.0f64..3000.0, dz in 0.0f64..500.0, d in 1.0f64..30.0, dd in 0.0f64..5.0,
                                    wl in 1200.0f64..1700.0, dwl in 0.0f64..50.0, t_ps in 5.0f64..100.0, dt in 0.0f64..20.0) {
        let n = |d: f64, wl: f64, z: f64, t: f64| max_taps(&SystemParams::<f64>::from_engineering_units(d, wl, z, t * 1e-12).unwrap());
        let base = n(d, wl, z_km, t_ps);
        prop_assert_eq!(base % 2, 1);
        prop_assert!(n(d, wl, z_km + dz, t_ps) >= base);
        prop_assert!(n(d + dd, wl, z_km, t_ps) >= base);
        prop_assert!(n(-(d + dd), wl, z_km, t_ps) >= base);
        prop_assert!(n(d, wl + dwl, z_km, t_ps) >= base);
        prop_assert!(n(d, wl, z_km, t_ps + dt) <= base);
    }

    #[test]
    fn response_is_all_pass(z_km in 1.0f64..3000.0, w in -1e12f64..1e12) {
        let p = SystemParams::<f64>::from_engineering_units(17.0, 1550.0, z_km, 25e-12).unwrap();
        let h = cd_frequency_response(&p, &[w], false)[0];
        let hi = cd_frequency_response(&p, &[w], true)[0];
        prop_assert!((h * hi - Complex::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!((h.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_round_trip_and_energy(seed in any::<u64>(), z_km in 10.0f64..2000.0) {
        let p = SystemParams::<f64>::from_engineering_units(17.0, 1550.0, z_km, 25e-12).unwrap();
        let x = band_limited(seed, 8 * max_taps(&p).max(128));
        let y = apply_channel(&x, &p).unwrap();
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((ey / ex - 1.0).abs() < 1e-9, "energy ratio {}", ey / ex);
        let back = apply_dispersion(&y, &p, true).unwrap();
        prop_assert!(rms_diff(&back, &x) < 1e-9);
    }
}
