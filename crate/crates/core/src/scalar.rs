use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar for the closed-form models: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

/// Lift an `f64` constant into the scalar type.
pub(crate) fn cst<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("constant representable in scalar type")
}
