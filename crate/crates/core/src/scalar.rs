//! Scalar abstraction shared by the statistics, the exact enumeration
//! oracle and the sample summaries.
//!
//! Integer-valued statistics (component counts, size moments, cuts, tree
//! counts) evaluate exactly in [`Rational`](crate::Rational); the Monte
//! Carlo machinery runs in `f64`. Log-partition functions are transcendental
//! and refuse exact scalars.

use std::fmt::Debug;
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_count(n: u64) -> Self;

    /// `None` when the value cannot be represented exactly.
    fn from_real(x: f64) -> Option<Self>;

    fn to_real(&self) -> f64;

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }
}

/// Floating scalars used for sample summaries and regression.
pub trait Real: Scalar + Float + FromPrimitive + Sum + Copy {
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }
}

macro_rules! impl_float_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn from_count(n: u64) -> Self {
                n as $t
            }
            fn from_real(x: f64) -> Option<Self> {
                Some(x as $t)
            }
            fn to_real(&self) -> f64 {
                *self as f64
            }
        }
        impl Real for $t {}
    )*};
}

impl_float_scalar!(f32, f64);

macro_rules! impl_ratio_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for Ratio<$t> {
            fn from_count(n: u64) -> Self {
                Ratio::from_integer(<$t>::try_from(n).expect("count fits the rational base type"))
            }
            fn from_real(_: f64) -> Option<Self> {
                None
            }
            fn to_real(&self) -> f64 {
                self.to_f64().unwrap_or(f64::NAN)
            }
        }
    )*};
}

impl_ratio_scalar!(i64, i128);
