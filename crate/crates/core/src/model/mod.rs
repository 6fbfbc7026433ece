//! Regression bases, designs, weighting measures and variance tags.

pub mod basis;
pub mod covariance;
pub mod design;
pub mod measure;

pub use basis::{BasisFamily, BasisSpec, Region};
pub use covariance::{PopulationSetup, TaggedCovariance, VarianceTag};
pub use design::Design;
pub use measure::WeightMeasure;
