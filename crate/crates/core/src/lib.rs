//! Static and dynamic network features of weekly interaction graphs, and the
//! analyses that relate them to binary node traits: group comparisons,
//! centrality-based clustering with enrichment, and cross-validated prediction.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod centrality;
pub mod cohort;
pub mod error;
pub mod graphlets;
pub mod netmodel;
pub mod predict;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CentralityProfile64 = centrality::CentralityProfile<f64>;
pub type CentralityProfile32 = centrality::CentralityProfile<f32>;
pub type TestResult64 = stats::TestResult<f64>;
pub type TestResult32 = stats::TestResult<f32>;
pub type GroupComparison64 = cohort::GroupComparison<f64>;
pub type GroupComparison32 = cohort::GroupComparison<f32>;
pub type Clustering64 = cohort::Clustering<f64>;
pub type Clustering32 = cohort::Clustering<f32>;
pub type EnrichmentReport64 = cohort::EnrichmentReport<f64>;
pub type EnrichmentReport32 = cohort::EnrichmentReport<f32>;
pub type FeatureMatrix64 = predict::FeatureMatrix<f64>;
pub type FeatureMatrix32 = predict::FeatureMatrix<f32>;
pub type LogRegModel64 = predict::LogRegModel<f64>;
pub type LogRegModel32 = predict::LogRegModel<f32>;
pub type Pca64 = predict::Pca<f64>;
pub type Pca32 = predict::Pca<f32>;
pub type CvReport64 = predict::CvReport<f64>;
pub type CvReport32 = predict::CvReport<f32>;
pub type PairwiseMatrix64 = predict::PairwiseMatrix<f64>;
pub type PairwiseMatrix32 = predict::PairwiseMatrix<f32>;
