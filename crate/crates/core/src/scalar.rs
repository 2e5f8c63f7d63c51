//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar the signal-processing code is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Debug + Display + Default + Send + Sync
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count or index.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex sample type.
pub type Cplx<T> = Complex<T>;

pub(crate) fn zero<T: Real>() -> Cplx<T> {
    Complex::new(T::zero(), T::zero())
}

/// Squared Euclidean distance between two points of the complex plane.
#[inline]
pub(crate) fn dist_sqr<T: Real>(a: Cplx<T>, b: Cplx<T>) -> T {
    (a - b).norm_sqr()
}

/// Total energy of a sample sequence.
pub fn energy<T: Real>(signal: &[Cplx<T>]) -> T {
    signal.iter().fold(T::zero(), |acc, s| acc + s.norm_sqr())
}

/// Root-mean-square magnitude of the element-wise difference.
pub fn rms_diff<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> T {
    assert_eq!(a.len(), b.len(), "rms_diff: length mismatch");
    if a.is_empty() {
        return T::zero();
    }
    let sum = a
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y).norm_sqr());
    (sum / T::from_count(a.len())).sqrt()
}
