//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point type the library computes in.
///
/// Implemented for `f32` and `f64`. Tolerances quoted in the docs assume
/// `f64`; the `f32` instantiation is usable for quick sweeps but loses the
/// deep-null accuracy the solver is tuned for.
pub trait Real:
    'static + Send + Sync + Float + FloatConst + NumAssign + FromPrimitive + Default + Sum + Debug + Display + LowerExp
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`] type.
pub type Cx<T> = Complex<T>;

/// `exp(j·phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Cx<T> {
    let (s, c) = phase.sin_cos();
    Cx::new(c, s)
}

pub fn deg_to_rad<T: Real>(deg: T) -> T {
    deg * T::PI() / T::lit(180.0)
}

pub fn rad_to_deg<T: Real>(rad: T) -> T {
    rad * T::lit(180.0) / T::PI()
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr<T: Real>(x: &[Cx<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm<T: Real>(x: &[Cx<T>]) -> T {
    norm_sqr(x).sqrt()
}

/// Hermitian inner product `aᴴ b`.
pub fn dot_h<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Cx::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Power ratio in dB, `10·log10(x)`.
pub fn db<T: Real>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_round_trip() {
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-25);
        assert!((watts_to_dbm(dbm_to_watts(-37.5)) + 37.5).abs() < 1e-12);
    }

    #[test]
    fn inner_product_conjugates_left() {
        let a = [Cx::new(0.0, 1.0)];
        let b = [Cx::new(0.0, 1.0)];
        assert_eq!(dot_h(&a, &b), Cx::new(1.0, 0.0));
    }

    #[test]
    fn angle_conversion_f32() {
        let r: f32 = deg_to_rad(180.0);
        assert!((r - std::f32::consts::PI).abs() < 1e-6);
        assert!((rad_to_deg(r) - 180.0).abs() < 1e-4);
    }
}
