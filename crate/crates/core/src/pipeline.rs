//! End-to-end scoring: projection, raw per-node statistic, calibration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{heuristic_scores, lcc_scores, Heuristic, PcdConfig};
use crate::calibration::{calibrate, AnomalyScores, CalibrationConfig};
use crate::diversity::{diversity_all, DiversityConfig};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::projection::{project, ProjectedFeatures, DEFAULT_RANK};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum Method {
    #[default]
    #[serde(rename = "neighbordiv")]
    NeighborDiv,
    #[serde(rename = "lcc")]
    Lcc,
    #[serde(rename = "nrs")]
    Nrs,
    #[serde(rename = "pcd")]
    Pcd,
    #[serde(rename = "amen")]
    AmenEgo,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::NeighborDiv, Method::Lcc, Method::Nrs, Method::Pcd, Method::AmenEgo];

    pub fn name(self) -> &'static str {
        match self {
            Method::NeighborDiv => "neighbordiv",
            Method::Lcc => "lcc",
            Method::Nrs => "nrs",
            Method::Pcd => "pcd",
            Method::AmenEgo => "amen",
        }
    }

    fn heuristic(self) -> Option<Heuristic> {
        match self {
            Method::NeighborDiv => None,
            Method::Lcc => Some(Heuristic::Lcc),
            Method::Nrs => Some(Heuristic::Nrs),
            Method::Pcd => Some(Heuristic::Pcd),
            Method::AmenEgo => Some(Heuristic::AmenEgo),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Argument(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub method: Method,
    pub rank: usize,
    pub seed: u64,
    pub diversity: DiversityConfig,
    pub calibration: CalibrationConfig,
    pub pcd: PcdConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: Method::NeighborDiv,
            rank: DEFAULT_RANK,
            seed: 0,
            diversity: DiversityConfig::default(),
            calibration: CalibrationConfig::default(),
            pcd: PcdConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput<T> {
    /// Absent for methods that ignore features.
    pub projection: Option<ProjectedFeatures<T>>,
    /// Raw statistic per node, `None` outside the method's valid set.
    pub raw: Vec<Option<T>>,
    pub scores: AnomalyScores<T>,
}

/// Neighbor-diversity scores with the given settings.
pub fn score_graph<T: Scalar>(
    g: &AttributedGraph<T>,
    cfg_div: &DiversityConfig,
    cfg_cal: &CalibrationConfig,
    r: usize,
    seed: u64,
) -> Result<AnomalyScores<T>> {
    let pf = project(g, r, seed)?;
    score_projected(g, &pf, cfg_div, cfg_cal)
}

/// Neighbor-diversity scores from an existing projection.
pub fn score_projected<T: Scalar>(
    g: &AttributedGraph<T>,
    pf: &ProjectedFeatures<T>,
    cfg_div: &DiversityConfig,
    cfg_cal: &CalibrationConfig,
) -> Result<AnomalyScores<T>> {
    let ds = diversity_all(g, pf, cfg_div)?;
    calibrate(&ds.values, cfg_cal)
}

/// Raw statistic of `method` from an existing projection.
pub fn raw_scores<T: Scalar>(
    g: &AttributedGraph<T>,
    pf: &ProjectedFeatures<T>,
    method: Method,
    cfg: &PipelineConfig,
) -> Result<Vec<Option<T>>> {
    match method.heuristic() {
        None => Ok(diversity_all(g, pf, &cfg.diversity)?.values),
        Some(h) => Ok(heuristic_scores(g, pf, h, &cfg.pcd)?.masked()),
    }
}

pub fn run<T: Scalar>(g: &AttributedGraph<T>, cfg: &PipelineConfig) -> Result<PipelineOutput<T>> {
    if g.node_count() == 0 {
        return Err(Error::DegenerateGraph("graph has no nodes".into()));
    }
    let (projection, raw) = if cfg.method == Method::Lcc {
        (None, lcc_scores(g).masked())
    } else {
        let pf = project(g, cfg.rank, cfg.seed)?;
        let raw = raw_scores(g, &pf, cfg.method, cfg)?;
        (Some(pf), raw)
    };
    let scores = calibrate(&raw, &cfg.calibration)?;
    Ok(PipelineOutput {
        projection,
        raw,
        scores,
    })
}
