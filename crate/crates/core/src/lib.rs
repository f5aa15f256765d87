//! Simulation laboratory for scalable, decentralized search-and-response
//! models: allometric growth and scaling laws, a semi-modular immune-style
//! search architecture with optimal module sizing, pheromone-mediated ant
//! foraging, and small-world greedy routing under degree densification.
//!
//! The closed-form math (`scaling`, the `immune` time model) is generic over
//! the scalar type via [`Real`]; the agent simulations run at `f64`.

pub mod ants;
pub mod error;
pub mod experiments;
pub mod immune;
pub mod scaling;
pub mod smallworld;

mod csvio;
mod scalar;

pub use csvio::{read_two_column_csv, write_csv, write_trajectory};
pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete `f64` aliases for the generic model types.
pub type PowerLaw64 = scaling::PowerLaw<f64>;
pub type GrowthParams64 = scaling::GrowthParams<f64>;
pub type CityGrowthParams64 = scaling::CityGrowthParams<f64>;
pub type RegressionResult64 = scaling::RegressionResult<f64>;
pub type ArchitectureConstants64 = immune::ArchitectureConstants<f64>;
pub type TimeBreakdown64 = immune::TimeBreakdown<f64>;
pub type Architecture64 = immune::Architecture<f64>;
