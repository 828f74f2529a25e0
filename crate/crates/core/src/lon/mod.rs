//! Local optima networks: construction from traces, synthesis across runs,
//! pruning and funnel decomposition.
//!
//! Vertex ids are dense indices assigned in canonical-key order when a network
//! is built. They are an in-memory convenience only; files refer to vertices by
//! key.

mod funnels;
mod prune;

pub use funnels::{funnels, FunnelDecomposition};
pub use prune::{prune, PruneReport, RemovedVertex};

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampler::RunTrace;

const FITNESS_RTOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LonError {
    #[error("vertex `{key}` carries inconsistent fitness values {first} and {second}")]
    InconsistentFitness { key: String, first: f64, second: f64 },
    #[error("networks were built over different configuration spaces ({0} vs {1})")]
    SpaceMismatch(String, String),
    #[error("edge references unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),
    #[error("vertex `{0}` is listed more than once")]
    DuplicateVertex(String),
    #[error("edge `{0}` -> `{1}` is listed more than once")]
    DuplicateEdge(String, String),
    #[error("invalid value for `{0}`: {1}")]
    InvalidValue(String, String),
    #[error("network has no vertices")]
    Empty,
    #[error("malformed LON file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub key: String,
    pub fitness: f64,
    /// How many times this local optimum was recorded across all runs.
    pub multiplicity: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub count: u64,
}

/// A directed graph of local optima with per-vertex fitness and multiplicity and
/// per-edge transition counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Lon {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    provenance: Vec<u64>,
    space_hash: Option<String>,
    index: HashMap<String, usize>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

fn fitness_agrees(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= FITNESS_RTOL * a.abs().max(b.abs())
}

/// Accumulates vertices and edges keyed by canonical key. Repeated vertices add
/// their multiplicities; repeated edges add their counts.
#[derive(Debug, Default, Clone)]
pub struct LonBuilder {
    vertices: BTreeMap<String, (f64, u64)>,
    edges: BTreeMap<(String, String), u64>,
    provenance: Vec<u64>,
    space_hash: Option<String>,
}

impl LonBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn space_hash(&mut self, hash: Option<&str>) -> Result<&mut Self, LonError> {
        match (&self.space_hash, hash) {
            (Some(a), Some(b)) if a != b => return Err(LonError::SpaceMismatch(a.clone(), b.to_string())),
            (None, Some(b)) => self.space_hash = Some(b.to_string()),
            _ => {}
        }
        Ok(self)
    }

    pub fn vertex(&mut self, key: &str, fitness: f64, multiplicity: u64) -> Result<&mut Self, LonError> {
        if !fitness.is_finite() {
            return Err(LonError::InvalidValue(key.to_string(), format!("fitness {fitness}")));
        }
        if multiplicity == 0 {
            return Err(LonError::InvalidValue(key.to_string(), "zero multiplicity".into()));
        }
        match self.vertices.get_mut(key) {
            Some((f, m)) => {
                if !fitness_agrees(*f, fitness) {
                    return Err(LonError::InconsistentFitness {
                        key: key.to_string(),
                        first: *f,
                        second: fitness,
                    });
                }
                *m += multiplicity;
            }
            None => {
                self.vertices.insert(key.to_string(), (fitness, multiplicity));
            }
        }
        Ok(self)
    }

    pub fn edge(&mut self, source: &str, target: &str, count: u64) -> Result<&mut Self, LonError> {
        if source == target {
            return Err(LonError::SelfLoop(source.to_string()));
        }
        if count == 0 {
            return Err(LonError::InvalidValue(format!("{source}->{target}"), "zero count".into()));
        }
        *self
            .edges
            .entry((source.to_string(), target.to_string()))
            .or_insert(0) += count;
        Ok(self)
    }

    pub fn provenance(&mut self, seeds: &[u64]) -> &mut Self {
        self.provenance.extend_from_slice(seeds);
        self
    }

    pub fn build(self) -> Result<Lon, LonError> {
        let index: HashMap<String, usize> = self
            .vertices
            .keys()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let vertices: Vec<Vertex> = self
            .vertices
            .into_iter()
            .map(|(key, (fitness, multiplicity))| Vertex {
                key,
                fitness,
                multiplicity,
            })
            .collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for ((s, d), count) in self.edges {
            let source = *index.get(&s).ok_or(LonError::UnknownVertex(s))?;
            let target = *index.get(&d).ok_or(LonError::UnknownVertex(d))?;
            edges.push(Edge { source, target, count });
        }
        Ok(Lon::assemble(vertices, edges, self.provenance, self.space_hash, index))
    }
}

impl Lon {
    fn assemble(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        provenance: Vec<u64>,
        space_hash: Option<String>,
        index: HashMap<String, usize>,
    ) -> Self {
        let n = vertices.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for e in &edges {
            out_adj[e.source].push(e.target);
            in_adj[e.target].push(e.source);
        }
        for list in in_adj.iter_mut() {
            list.sort_unstable();
        }
        Self {
            vertices,
            edges,
            provenance,
            space_hash,
            index,
            out_adj,
            in_adj,
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Edge records sorted by (source, target).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn provenance(&self) -> &[u64] {
        &self.provenance
    }

    pub fn space_hash(&self) -> Option<&str> {
        self.space_hash.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn id_of(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    pub fn fitness(&self, id: usize) -> f64 {
        self.vertices[id].fitness
    }

    pub fn out_neighbors(&self, id: usize) -> &[usize] {
        &self.out_adj[id]
    }

    pub fn in_neighbors(&self, id: usize) -> &[usize] {
        &self.in_adj[id]
    }

    /// Number of distinct outgoing edge records (transition counts ignored).
    pub fn out_degree(&self, id: usize) -> usize {
        self.out_adj[id].len()
    }

    pub fn in_degree(&self, id: usize) -> usize {
        self.in_adj[id].len()
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.out_adj[source].binary_search(&target).is_ok()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.vertices.iter().map(|v| v.multiplicity).sum()
    }

    /// Key to multiplicity map; independent of id assignment.
    pub fn multiplicities_by_key(&self) -> BTreeMap<String, u64> {
        self.vertices
            .iter()
            .map(|v| (v.key.clone(), v.multiplicity))
            .collect()
    }

    /// (source key, target key) to transition count map.
    pub fn edge_counts_by_key(&self) -> BTreeMap<(String, String), u64> {
        self.edges
            .iter()
            .map(|e| {
                (
                    (self.vertices[e.source].key.clone(), self.vertices[e.target].key.clone()),
                    e.count,
                )
            })
            .collect()
    }

    /// The vertex with minimum fitness; ties go to the smallest key.
    pub fn global_optimum(&self) -> Option<usize> {
        // ids follow key order, so the first minimum has the smallest key
        let mut best: Option<usize> = None;
        for (i, v) in self.vertices.iter().enumerate() {
            match best {
                Some(b) if self.vertices[b].fitness <= v.fitness => {}
                _ => best = Some(i),
            }
        }
        best
    }

    /// Same vertices, keeping only edges `s -> d` with `f(d) <= f(s)`.
    pub fn improving_subgraph(&self) -> Lon {
        let edges = self
            .edges
            .iter()
            .filter(|e| self.is_improving(e))
            .copied()
            .collect();
        Lon::assemble(
            self.vertices.clone(),
            edges,
            self.provenance.clone(),
            self.space_hash.clone(),
            self.index.clone(),
        )
    }

    pub fn is_improving(&self, e: &Edge) -> bool {
        e.source != e.target && self.vertices[e.target].fitness <= self.vertices[e.source].fitness
    }

    /// The subgraph induced by the vertices with `keep[id] == true`.
    pub fn induced(&self, keep: &[bool]) -> Lon {
        let mut builder = LonBuilder::new();
        builder.space_hash = self.space_hash.clone();
        builder.provenance = self.provenance.clone();
        for (v, _) in self.vertices.iter().zip(keep).filter(|(_, &k)| k) {
            builder.vertices.insert(v.key.clone(), (v.fitness, v.multiplicity));
        }
        for e in self.edges.iter().filter(|e| keep[e.source] && keep[e.target]) {
            builder.edges.insert(
                (self.vertices[e.source].key.clone(), self.vertices[e.target].key.clone()),
                e.count,
            );
        }
        builder.build().expect("induced subgraph of a valid network")
    }

    /// One vertex per distinct trace key and one edge per distinct ordered pair.
    pub fn from_trace(trace: &RunTrace) -> Result<Lon, LonError> {
        let mut b = LonBuilder::new();
        b.space_hash(trace.space_hash.as_deref())?;
        for v in &trace.vertices {
            b.vertex(&v.key, v.fitness, v.multiplicity)?;
        }
        for e in &trace.edges {
            if !b.vertices.contains_key(&e.source) {
                return Err(LonError::UnknownVertex(e.source.clone()));
            }
            if !b.vertices.contains_key(&e.target) {
                return Err(LonError::UnknownVertex(e.target.clone()));
            }
            b.edge(&e.source, &e.target, e.count)?;
        }
        b.provenance(&[trace.seed]);
        b.build()
    }

    /// Merges networks by key: multiplicities and edge counts are summed and
    /// provenance lists are concatenated in input order.
    pub fn synthesize<'a, I>(lons: I) -> Result<Lon, LonError>
    where
        I: IntoIterator<Item = &'a Lon>,
    {
        let mut b = LonBuilder::new();
        for lon in lons {
            b.space_hash(lon.space_hash())?;
            for v in &lon.vertices {
                b.vertex(&v.key, v.fitness, v.multiplicity)?;
            }
            for e in &lon.edges {
                b.edge(&lon.vertices[e.source].key, &lon.vertices[e.target].key, e.count)?;
            }
            b.provenance(&lon.provenance);
        }
        b.build()
    }

    pub fn to_json(&self, producer: Option<&serde_json::Value>) -> String {
        let file = LonFile {
            space_hash: self.space_hash.clone(),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexRecord {
                    k: v.key.clone(),
                    f: v.fitness,
                    m: v.multiplicity,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    s: self.vertices[e.source].key.clone(),
                    d: self.vertices[e.target].key.clone(),
                    c: e.count,
                })
                .collect(),
            provenance: self.provenance.clone(),
            producer: producer.cloned(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("serializable");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Lon, LonError> {
        let file: LonFile = serde_json::from_str(text).map_err(|e| LonError::Format(e.to_string()))?;
        let mut b = LonBuilder::new();
        b.space_hash = file.space_hash;
        for v in &file.vertices {
            if b.vertices.contains_key(&v.k) {
                return Err(LonError::DuplicateVertex(v.k.clone()));
            }
            b.vertex(&v.k, v.f, v.m)?;
        }
        for e in &file.edges {
            if b.edges.contains_key(&(e.s.clone(), e.d.clone())) {
                return Err(LonError::DuplicateEdge(e.s.clone(), e.d.clone()));
            }
            b.edge(&e.s, &e.d, e.c)?;
        }
        b.provenance = file.provenance;
        b.build()
    }

    pub fn load(path: &Path) -> Result<Lon, LonError> {
        let text = std::fs::read_to_string(path).map_err(|e| LonError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            LonError::Format(m) => LonError::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    k: String,
    f: f64,
    m: u64,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    s: String,
    d: String,
    c: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LonFile {
    space_hash: Option<String>,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    provenance: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    producer: Option<serde_json::Value>,
}
