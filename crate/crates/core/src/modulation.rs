//! PRBS bit source and Gray-coded QAM mapping.

use num_complex::Complex;

use crate::scalar::{Cplx, Real};

/// Degree-23 maximal-length LFSR (`x^23 + x^18 + 1`).
#[derive(Debug, Clone)]
pub struct Prbs23 {
    state: u32,
}

const PRBS23_MASK: u32 = (1 << 23) - 1;

impl Prbs23 {
    /// Start from a seed-derived non-zero register state.
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        let state = (z as u32) & PRBS23_MASK;
        Prbs23 {
            state: if state == 0 { 1 } else { state },
        }
    }

    pub fn next_bit(&mut self) -> u8 {
        let bit = ((self.state >> 22) ^ (self.state >> 17)) & 1;
        self.state = ((self.state << 1) | bit) & PRBS23_MASK;
        bit as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Qpsk,
    Qam16,
}

/// Gray code for one 16-QAM axis, indexed by the two bits `b0 b1`.
pub const GRAY_PAM4: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" => Some(Modulation::Qpsk),
            "16qam" | "qam16" | "16-qam" => Some(Modulation::Qam16),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
        }
    }

    fn axis_scale(self) -> f64 {
        match self {
            Modulation::Qpsk => std::f64::consts::FRAC_1_SQRT_2,
            Modulation::Qam16 => 1.0 / 10f64.sqrt(),
        }
    }

    /// Unit-average-energy constellation point for `bits` (MSB first, I then Q).
    pub fn map<T: Real>(self, bits: &[u8]) -> Cplx<T> {
        let s = self.axis_scale();
        let (i, q) = match self {
            Modulation::Qpsk => (
                if bits[0] == 1 { 1.0 } else { -1.0 },
                if bits[1] == 1 { 1.0 } else { -1.0 },
            ),
            Modulation::Qam16 => (
                GRAY_PAM4[(bits[0] << 1 | bits[1]) as usize],
                GRAY_PAM4[(bits[2] << 1 | bits[3]) as usize],
            ),
        };
        Complex::new(T::lit(i * s), T::lit(q * s))
    }

    /// Hard decision, writing the decided bits into `out`.
    pub fn demap<T: Real>(self, y: Cplx<T>, out: &mut [u8]) {
        let s = self.axis_scale();
        let (i, q) = (y.re.to_f64_lossy() / s, y.im.to_f64_lossy() / s);
        match self {
            Modulation::Qpsk => {
                out[0] = (i >= 0.0) as u8;
                out[1] = (q >= 0.0) as u8;
            }
            Modulation::Qam16 => {
                let axis = |v: f64| -> (u8, u8) {
                    if v < -2.0 {
                        (0, 0)
                    } else if v < 0.0 {
                        (0, 1)
                    } else if v < 2.0 {
                        (1, 1)
                    } else {
                        (1, 0)
                    }
                };
                (out[0], out[1]) = axis(i);
                (out[2], out[3]) = axis(q);
            }
        }
    }

    /// Nearest constellation point.
    pub fn slice<T: Real>(self, y: Cplx<T>) -> Cplx<T> {
        let mut bits = [0u8; 4];
        self.demap(y, &mut bits);
        self.map(&bits)
    }
}

/// `n_symbols` PRBS-driven symbols and the bits behind them.
pub fn generate_symbols<T: Real>(
    modulation: Modulation,
    n_symbols: usize,
    seed: u64,
) -> (Vec<Cplx<T>>, Vec<u8>) {
    let k = modulation.bits_per_symbol();
    let mut prbs = Prbs23::new(seed);
    let bits: Vec<u8> = (0..n_symbols * k).map(|_| prbs.next_bit()).collect();
    let symbols = bits.chunks_exact(k).map(|b| modulation.map(b)).collect();
    (symbols, bits)
}
