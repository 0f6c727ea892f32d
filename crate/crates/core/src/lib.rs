//! Training-free node anomaly scoring from the dispersion of pairwise
//! similarities among a node's neighbors.
//!
//! Features are projected to a low rank, each node's neighbor pairs are
//! compared by cosine similarity, and the variance of those similarities is
//! calibrated against a graph-wide median. Heuristic baselines, an SBM
//! benchmark generator and ranking metrics live alongside.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod baselines;
pub mod calibration;
pub mod diversity;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod projection;
pub mod scalar;
pub mod synthgen;

pub use baselines::{Heuristic, PcdConfig, RawHeuristicScores};
pub use calibration::{AnomalyScores, CalibrationConfig, Fallback, Reference};
pub use diversity::{DiversityConfig, DiversityScores, DiversityStatistic};
pub use error::{Error, Result};
pub use graph::{AttributedGraph, EdgeList, NodeDegreeProfile};
pub use linalg::Matrix;
pub use metrics::EvalReport;
pub use pipeline::{run, score_graph, Method, PipelineConfig, PipelineOutput};
pub use projection::ProjectedFeatures;
pub use scalar::Scalar;
pub use synthgen::{AnomalyKind, AnomalyType, SyntheticGraph, SyntheticSpec};

pub type Graph = AttributedGraph<f64>;
pub type Features = Matrix<f64>;
pub type Projection = ProjectedFeatures<f64>;
pub type Diversity = DiversityScores<f64>;
pub type Scores = AnomalyScores<f64>;
pub type Synthetic = SyntheticGraph<f64>;
