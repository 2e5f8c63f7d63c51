#![allow(dead_code)]

use disperse::cd_model::SystemParams;
use disperse::Cplx;
use num_complex::Complex;

pub type C = Cplx<f64>;

/// Desk-scale long-haul link: 17 ps/nm/km, 1550 nm, 1800 km, 25 ps sampling.
pub fn long_haul() -> SystemParams<f64> {
    SystemParams::from_engineering_units(17.0, 1550.0, 1800.0, 25e-12).unwrap()
}

/// `y(n) = sum_k h(k) x(n - k)` with `k` centered and zero input outside the record.
pub fn naive_conv(x: &[C], h: &[C]) -> Vec<C> {
    let half = (h.len() / 2) as isize;
    (0..x.len() as isize)
        .map(|n| {
            let mut acc = Complex::new(0.0, 0.0);
            for (j, hj) in h.iter().enumerate() {
                let m = n - (j as isize - half);
                if m >= 0 && (m as usize) < x.len() {
                    acc += hj * x[m as usize];
                }
            }
            acc
        })
        .collect()
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn rms(a: &[C]) -> f64 {
    (a.iter().map(|z| z.norm_sqr()).sum::<f64>() / a.len() as f64).sqrt()
}

pub fn rms_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    (a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        / a.len() as f64)
        .sqrt()
}

/// Gray 16-QAM bit error rate at Es/N0 `snr_db` on a unit-energy grid:
/// `(3 Q(a) + 2 Q(3a) - Q(5a)) / 4` with `a` the half spacing over the per-axis noise std.
pub fn qam16_awgn_ber(snr_db: f64) -> f64 {
    let n0 = 10f64.powf(-snr_db / 10.0);
    let a = (1.0 / 10f64.sqrt()) / (n0 / 2.0).sqrt();
    let q = |x: f64| 0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2);
    (3.0 * q(a) + 2.0 * q(3.0 * a) - q(5.0 * a)) / 4.0
}

/// `erfc^-1(y)` by bisection on an independent `erfc`.
pub fn erfc_inv_bisect(y: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0f64, 30.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if statrs::function::erf::erfc(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
