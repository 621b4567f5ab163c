use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the whole library is generic over.
///
/// Tolerances throughout the crate are stated for `f64`; `TOL_SCALE`
/// widens them for lower-precision types so that the same absolute
/// thresholds remain meaningful.
pub trait Real:
    'static
    + Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Multiplier applied to every `f64`-calibrated tolerance.
    const TOL_SCALE: f64;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// A tolerance calibrated for `f64`, adjusted for this scalar.
    fn tol(x: f64) -> Self {
        Self::lit(x * Self::TOL_SCALE)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const TOL_SCALE: f64 = 1.0;
}

impl Real for f32 {
    const TOL_SCALE: f64 = 1e5;
}
