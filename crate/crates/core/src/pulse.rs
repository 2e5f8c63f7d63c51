//! Root-raised-cosine pulse shaping.

use crate::error::{param, Result};
use crate::scalar::{zero, Cplx, Real};

/// Unit-energy RRC impulse response of `span_symbols * sps + 1` taps,
/// centred on the middle tap.
pub fn rrc_taps<T: Real>(rolloff: f64, span_symbols: usize, sps: usize) -> Result<Vec<T>> {
    if !(rolloff > 0.0 && rolloff <= 1.0) {
        return param(format!("roll-off {rolloff} outside (0, 1]"));
    }
    if sps == 0 || span_symbols == 0 {
        return param("RRC span and samples per symbol must be positive");
    }
    let len = span_symbols * sps + 1;
    let mid = (len - 1) as f64 / 2.0;
    let taps: Vec<f64> = (0..len)
        .map(|i| rrc_value((i as f64 - mid) / sps as f64, rolloff))
        .collect();
    let norm = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
    Ok(taps.iter().map(|h| T::lit(h / norm)).collect())
}

/// Unnormalized RRC response at `t` symbol periods, with the analytic limits
/// at `t = 0` and `|t| = 1 / (4 rolloff)`.
fn rrc_value(t: f64, b: f64) -> f64 {
    use std::f64::consts::PI;
    if t.abs() < 1e-12 {
        1.0 - b + 4.0 * b / PI
    } else if (1.0 - (4.0 * b * t).powi(2)).abs() < 1e-10 {
        let arg = PI / (4.0 * b);
        b / 2f64.sqrt() * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos())
    } else {
        ((PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos())
            / (PI * t * (1.0 - (4.0 * b * t).powi(2)))
    }
}

/// "Same"-mode convolution of a complex stream with a real, odd-length,
/// centred filter.
pub fn filter_same<T: Real>(signal: &[Cplx<T>], taps: &[T]) -> Vec<Cplx<T>> {
    let half = (taps.len() - 1) / 2;
    let mut out = vec![zero(); signal.len()];
    for (n, y) in out.iter_mut().enumerate() {
        let lo = n.saturating_sub(half);
        let hi = (n + half).min(signal.len() - 1);
        let mut acc = zero();
        for (m, x) in signal[lo..=hi].iter().enumerate() {
            // tap index for input lo + m: n - (lo + m) + half
            acc = acc + x * taps[n + half - lo - m];
        }
        *y = acc;
    }
    out
}

/// Zero-stuff symbols to `sps` samples per symbol and shape them.
pub fn shape<T: Real>(symbols: &[Cplx<T>], taps: &[T], sps: usize) -> Vec<Cplx<T>> {
    let half = (taps.len() - 1) / 2;
    let len = symbols.len() * sps;
    let mut out = vec![zero(); len];
    for (k, s) in symbols.iter().enumerate() {
        let centre = k * sps;
        let lo = centre.saturating_sub(half);
        let hi = (centre + half).min(len - 1);
        for (n, y) in out.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *y = *y + s * taps[n + half - centre];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn unit_energy_and_peak_at_centre() {
        for (b, span, sps) in [(0.1, 64, 2), (0.35, 16, 4), (1.0, 8, 2), (0.25, 10, 2)] {
            let h: Vec<f64> = rrc_taps(b, span, sps).unwrap();
            assert_eq!(h.len(), span * sps + 1);
            let e: f64 = h.iter().map(|x| x * x).sum();
            assert!((e - 1.0).abs() < 1e-12);
            let mid = h.len() / 2;
            assert!(h.iter().all(|&x| x <= h[mid]));
            assert!(h.iter().all(|x| x.is_finite()));
            for i in 0..mid {
                assert!((h[i] - h[h.len() - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn singular_instants_are_continuous() {
        for b in [0.1, 0.25, 0.5, 1.0] {
            let ts = 1.0 / (4.0 * b);
            let lim = rrc_value(ts, b);
            for eps in [1e-5, -1e-5] {
                assert!((rrc_value(ts + eps, b) - lim).abs() < 1e-4);
            }
            assert!((rrc_value(1e-7, b) - rrc_value(0.0, b)).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_rolloff() {
        assert!(rrc_taps::<f64>(0.0, 8, 2).is_err());
        assert!(rrc_taps::<f64>(1.5, 8, 2).is_err());
    }

    #[test]
    fn shaping_matches_filtering_a_zero_stuffed_stream() {
        let h: Vec<f64> = rrc_taps(0.3, 6, 2).unwrap();
        let syms: Vec<Cplx<f64>> = (0..20)
            .map(|i| Complex::new(i as f64, -(i as f64)))
            .collect();
        let mut stuffed = vec![Complex::new(0.0, 0.0); 40];
        for (k, s) in syms.iter().enumerate() {
            stuffed[2 * k] = *s;
        }
        let a = shape(&syms, &h, 2);
        let b = filter_same(&stuffed, &h);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
