use std::collections::BTreeMap;

use serde::Serialize;

use super::Lon;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovedVertex {
    pub key: String,
    pub fitness: f64,
    pub multiplicity: u64,
    /// 1-based pass in which the vertex was removed.
    pub pass: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneReport {
    pub lon: Lon,
    pub removed: Vec<RemovedVertex>,
    /// Removed multiplicity credited to each surviving vertex: the number of
    /// recorded escape attempts that ended in an inferior sink below it.
    pub escape_attempts: BTreeMap<String, u64>,
    pub passes: usize,
}

impl PruneReport {
    pub fn removed_multiplicity(&self) -> u64 {
        self.removed.iter().map(|r| r.multiplicity).sum()
    }
}

/// Removes inferior sinks until none are left.
///
/// A vertex is removed when it has no outgoing edge, is not the global optimum
/// and is strictly worse than its best in-neighbor. Its multiplicity, plus
/// anything already credited to it, is credited to that best in-neighbor
/// (lowest fitness, then smallest key).
pub fn prune(lon: &Lon) -> PruneReport {
    let n = lon.vertex_count();
    let Some(go) = lon.global_optimum() else {
        return PruneReport {
            lon: lon.clone(),
            removed: Vec::new(),
            escape_attempts: BTreeMap::new(),
            passes: 0,
        };
    };
    let mut alive = vec![true; n];
    let mut out_deg: Vec<usize> = (0..n).map(|v| lon.out_degree(v)).collect();
    let mut credited = vec![0u64; n];
    let mut removed = Vec::new();
    let mut passes = 0;

    loop {
        // an alive vertex's in-neighbors are all alive: each still has an edge to it
        let candidates: Vec<(usize, usize)> = (0..n)
            .filter(|&v| alive[v] && out_deg[v] == 0 && v != go)
            .filter_map(|v| {
                let best = lon.in_neighbors(v).iter().copied().min_by(|&a, &b| {
                    lon.fitness(a).total_cmp(&lon.fitness(b)).then(a.cmp(&b))
                })?;
                (lon.fitness(v) > lon.fitness(best)).then_some((v, best))
            })
            .collect();
        if candidates.is_empty() {
            break;
        }
        passes += 1;
        for &(v, best) in &candidates {
            alive[v] = false;
            credited[best] += credited[v] + lon.vertex(v).multiplicity;
            credited[v] = 0;
            for &u in lon.in_neighbors(v) {
                out_deg[u] -= 1;
            }
            let vert = lon.vertex(v);
            removed.push(RemovedVertex {
                key: vert.key.clone(),
                fitness: vert.fitness,
                multiplicity: vert.multiplicity,
                pass: passes,
            });
        }
    }

    let escape_attempts = (0..n)
        .filter(|&v| alive[v] && credited[v] > 0)
        .map(|v| (lon.vertex(v).key.clone(), credited[v]))
        .collect();
    PruneReport {
        lon: lon.induced(&alive),
        removed,
        escape_attempts,
        passes,
    }
}
