use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::Lon;

/// Funnels of a network: for each funnel-base, every vertex with a
/// monotonically improving path ending there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunnelDecomposition {
    /// Funnel-base vertex ids, ascending.
    pub bases: Vec<usize>,
    /// Members of each funnel, keyed by base id. Each base is a member of its own
    /// funnel.
    pub funnels: BTreeMap<usize, BTreeSet<usize>>,
    /// True for vertices that belong to more than one funnel.
    pub overlapping: Vec<bool>,
}

impl FunnelDecomposition {
    pub fn funnel_count(&self) -> usize {
        self.bases.len()
    }

    /// Bases of every funnel containing `v`.
    pub fn funnels_of(&self, v: usize) -> Vec<usize> {
        self.funnels
            .iter()
            .filter(|(_, members)| members.contains(&v))
            .map(|(&b, _)| b)
            .collect()
    }
}

/// Decomposes the improving subgraph into funnels.
///
/// Funnel-bases are vertices without an outgoing improving edge. Cycles of
/// equal-fitness vertices are first collapsed into their smallest-key member,
/// which then stands for the whole cycle; collapsed members are reported in
/// the funnels their representative belongs to.
pub fn funnels(lon: &Lon) -> FunnelDecomposition {
    let n = lon.vertex_count();
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, lon.edge_count());
    for _ in 0..n {
        graph.add_node(());
    }
    for e in lon.edges().iter().filter(|e| lon.is_improving(e)) {
        graph.add_edge(NodeIndex::new(e.source), NodeIndex::new(e.target), ());
    }

    let components = tarjan_scc(&graph);
    let mut comp_of = vec![0usize; n];
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(components.len());
    for (c, comp) in components.iter().enumerate() {
        let mut ids: Vec<usize> = comp.iter().map(|ix| ix.index()).collect();
        ids.sort_unstable();
        for &v in &ids {
            comp_of[v] = c;
        }
        members.push(ids);
    }

    let k = members.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    let mut pred: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for e in graph.raw_edges() {
        let (a, b) = (comp_of[e.source().index()], comp_of[e.target().index()]);
        if a != b {
            succ[a].insert(b);
            pred[b].insert(a);
        }
    }

    let mut funnels = BTreeMap::new();
    let mut membership = vec![0usize; n];
    for base_comp in (0..k).filter(|&c| succ[c].is_empty()) {
        let mut seen = vec![false; k];
        seen[base_comp] = true;
        let mut queue = VecDeque::from([base_comp]);
        let mut set = BTreeSet::new();
        while let Some(c) = queue.pop_front() {
            set.extend(members[c].iter().copied());
            for &p in &pred[c] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        for &v in &set {
            membership[v] += 1;
        }
        funnels.insert(members[base_comp][0], set);
    }

    FunnelDecomposition {
        bases: funnels.keys().copied().collect(),
        funnels,
        overlapping: membership.into_iter().map(|m| m > 1).collect(),
    }
}
