//! BER to Q-factor conversion and the inverse complementary error function.

use crate::error::{Error, Result};

/// Inverse of `erfc` on `(0, 2)`.
///
/// A single-precision polynomial guess in `w = -ln(y (2 - y))` (asymptotic
/// expansion in the far tail) refined by Newton steps on `erfc` itself;
/// two steps suffice except in the far tail.
const MAX_NEWTON: usize = 6;

/// Solve `erfc(x) = y` for small `y` from the asymptotic series
/// `erfc(x) ~ exp(-x^2) / (x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4))`.
fn tail_guess(y: f64) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut x = (-y.ln()).sqrt();
    for _ in 0..4 {
        let x2 = x * x;
        let series = 1.0 - 0.5 / x2 + 0.75 / (x2 * x2);
        x = (-(y * x * sqrt_pi / series).ln()).sqrt();
    }
    x
}

pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::Domain(format!(
            "erfc_inv argument {y} outside (0, 2)"
        )));
    }
    let x = 1.0 - y;
    let w = -(y * (2.0 - y)).ln();
    let mut r = if w < 5.0 {
        let w = w - 2.5;
        let p = [
            3.43273939e-07,
            -3.5233877e-06,
            -4.39150654e-06,
            0.00021858087,
            -0.00125372503,
            -0.00417768164,
            0.246640727,
            1.50140941,
        ]
        .iter()
        .fold(2.81022636e-08, |p, c| c + p * w);
        p * x
    } else if w < 16.0 {
        let w = w.sqrt() - 3.0;
        let p = [
            0.000100950558,
            0.00134934322,
            -0.00367342844,
            0.00573950773,
            -0.0076224613,
            0.00943887047,
            1.00167406,
            2.83297682,
        ]
        .iter()
        .fold(-0.000200214257, |p, c| c + p * w);
        p * x
    } else {
        tail_guess(y.min(2.0 - y)).copysign(x)
    };
    let two_over_sqrt_pi = std::f64::consts::FRAC_2_SQRT_PI;
    for _ in 0..MAX_NEWTON {
        let slope = two_over_sqrt_pi * (-r * r).exp();
        if slope == 0.0 {
            break;
        }
        let step = (libm::erfc(r) - y) / slope;
        r += step;
        if step.abs() <= 1e-15 * r.abs() {
            break;
        }
    }
    Ok(r)
}

/// Linear Q-factor `sqrt(2) erfc^-1(2 BER)`.
pub fn q_linear(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.5) {
        return Err(Error::Domain(format!("BER {ber} outside (0, 0.5)")));
    }
    Ok(std::f64::consts::SQRT_2 * erfc_inv(2.0 * ber)?)
}

/// Q-factor in dB, `20 log10(sqrt(2) erfc^-1(2 BER))`.
pub fn q_from_ber(ber: f64) -> Result<f64> {
    Ok(20.0 * q_linear(ber)?.log10())
}

/// Q-factor for a measured BER, mapping the out-of-domain ends to
/// `+inf` (error-free) and `-inf` (no better than guessing).
pub fn q_db_or_sentinel(ber: f64) -> f64 {
    if ber <= 0.0 {
        f64::INFINITY
    } else if ber >= 0.5 {
        f64::NEG_INFINITY
    } else {
        q_from_ber(ber).expect("BER inside (0, 0.5)")
    }
}
