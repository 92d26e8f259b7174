//! Scalar abstractions.
//!
//! Closed-form expectations only need field operations and are written against
//! [`Field`], so they evaluate exactly over rationals as well as over floats.
//! Everything that takes logarithms, samples, or integrates is written against
//! [`Scalar`], implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};

/// Number type with exact field arithmetic (up to representation).
pub trait Field: Num + Clone + PartialOrd + Debug {
    fn from_count(n: u64) -> Self;
}

macro_rules! impl_field_float {
    ($f:ty) => {
        impl Field for $f {
            #[inline]
            fn from_count(n: u64) -> Self {
                n as $f
            }
        }
    };
}

impl_field_float!(f32);
impl_field_float!(f64);

impl Field for Ratio<i64> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(i64::try_from(n).expect("count fits in i64"))
    }
}

impl Field for Ratio<i128> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(i128::from(n))
    }
}

/// Floating-point scalar for the sampling and estimation code.
pub trait Scalar:
    Field + Float + FromPrimitive + ToPrimitive + Sum + Display + Default + Send + Sync + 'static
{
    /// Unit-scale gamma sampler at this precision.
    type Gamma: Distribution<Self> + Clone + Debug + Send + Sync;

    /// Gamma(shape, 1); `None` for non-positive or non-finite shapes.
    fn gamma_dist(shape: Self) -> Option<Self::Gamma>;

    /// Uniform draw on the open interval (0, 1).
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts a literal; every literal used by the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            type Gamma = Gamma<$f>;

            fn gamma_dist(shape: Self) -> Option<Self::Gamma> {
                if shape.is_finite() && shape > 0.0 {
                    Gamma::new(shape, 1.0).ok()
                } else {
                    None
                }
            }

            #[inline]
            fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(Open01)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
