//! Multi-branch MMSE decision-feedback detection for spatially multiplexed
//! MIMO links, with the usual baselines (linear MMSE, V-BLAST, S-DF), an
//! exhaustive ML reference and a Monte Carlo BER harness.
//!
//! The numerical core is generic over the real scalar type through
//! [`Real`]; the aliases below pin it to `f64` (the precision the harness
//! runs at) or `f32`.

pub mod constraints;
pub mod detectors;
pub mod error;
pub mod filters;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CMatrix64 = numerics::CMatrix<f64>;
pub type CVector64 = numerics::CVector<f64>;
pub type Constellation64 = model::Constellation<f64>;
pub type ChannelRealization64 = model::ChannelRealization<f64>;
pub type FilterBank64 = filters::FilterBank<f64>;
pub type DetectionResult64 = detectors::DetectionResult<f64>;

pub type CMatrix32 = numerics::CMatrix<f32>;
pub type CVector32 = numerics::CVector<f32>;
pub type Constellation32 = model::Constellation<f32>;
pub type ChannelRealization32 = model::ChannelRealization<f32>;
pub type FilterBank32 = filters::FilterBank<f32>;
pub type DetectionResult32 = detectors::DetectionResult<f32>;
