pub mod channel;
pub mod checks;
pub mod cli;
pub mod coding;
pub mod entropy;
pub mod error;
pub mod index;
pub mod limits;
pub mod operator;
pub mod region;
pub mod scalar;

pub use error::{Error, Result};
pub use limits::Limits;
pub use scalar::Real;

/// Double-precision instantiations.
pub type Matrix = operator::ComplexMatrix<f64>;
pub type Hermitian = operator::HermitianOperator<f64>;
pub type Density = operator::DensityMatrix<f64>;
pub type Channel = channel::CqMacChannel<f64>;
pub type InputPrior = channel::Prior<f64>;
pub type Ensemble = channel::CqEnsemble<f64>;
pub type Constraints = region::RateConstraintSet<f64>;
pub type Rates = region::RatePoint<f64>;
pub type CornerPoint = region::Corner<f64>;
pub type Mixture = region::MixtureSpec<f64>;
pub type Measurement = coding::Povm<f64>;
pub type Instrument = coding::TenderInstrument<f64>;
pub type Decoder<'a> = coding::SequentialDecoder<'a, f64>;
