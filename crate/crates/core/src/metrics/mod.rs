//! Network metrics, funnel-base statistics and the rank-sum test.

mod network;
mod rank_sum;

pub use network::{
    assortativity, average_clustering, default_rich_club_ks, funnel_base_rank_table, go_neighborhood_radius,
    local_clustering, network_density, pcc, rich_club_curve, shortest_path_length,
};
pub use rank_sum::{exact_p_value, wilcoxon_rank_sum, wilcoxon_rank_sum_with, RankSum, RankSumMethod, EXACT_LIMIT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lon::{funnels, FunnelDecomposition, Lon};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("correlation is undefined for a constant vector")]
    UndefinedCorrelation,
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("vectors have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample contains NaN")]
    NotANumber,
}

/// Scalar metrics and funnel statistics of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub vn: usize,
    pub en: usize,
    pub spl: f64,
    pub spl_reachable_fraction: f64,
    /// `None` when the degree sequences have no variance.
    pub ac: Option<f64>,
    pub acc: f64,
    /// `None` for a single-vertex network.
    pub nd: Option<f64>,
    pub rcc_curve: Vec<(usize, f64)>,
    pub base_rank_table: Vec<(usize, usize)>,
    pub go_neighborhood_radius: usize,
    pub funnel_count: usize,
    pub global_optimum: Option<String>,
    pub global_optimum_fitness: Option<f64>,
}

impl MetricReport {
    pub fn compute(lon: &Lon) -> (MetricReport, FunnelDecomposition) {
        let decomposition = funnels(lon);
        let report = Self::with_decomposition(lon, &decomposition);
        (report, decomposition)
    }

    pub fn with_decomposition(lon: &Lon, decomposition: &FunnelDecomposition) -> MetricReport {
        let (spl, fraction) = shortest_path_length(lon);
        let go = lon.global_optimum();
        MetricReport {
            vn: lon.vertex_count(),
            en: lon.edge_count(),
            spl,
            spl_reachable_fraction: fraction,
            ac: assortativity(lon).ok(),
            acc: average_clustering(lon),
            nd: network_density(lon).ok(),
            rcc_curve: rich_club_curve(lon, &default_rich_club_ks(lon)),
            base_rank_table: funnel_base_rank_table(lon, decomposition),
            go_neighborhood_radius: go_neighborhood_radius(lon, decomposition),
            funnel_count: decomposition.funnel_count(),
            global_optimum: go.map(|g| lon.vertex(g).key.clone()),
            global_optimum_fitness: go.map(|g| lon.fitness(g)),
        }
    }
}
