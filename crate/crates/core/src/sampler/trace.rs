//! Run traces and their JSON-lines file format.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::SamplerParams;
use crate::error::FormatError;

/// Why a sampling run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The requested number of distinct local optima was found.
    TargetReached,
    /// The unique-evaluation budget ran out.
    BudgetExhausted,
    /// Too many consecutive iterations produced no new local optimum.
    Stalled,
    /// The space has no neighbors to move to; only the start optimum exists.
    NoNeighbors,
}

impl Termination {
    /// True for every way of stopping short of the target other than a
    /// neighborless space.
    pub fn budget_flag(self) -> bool {
        matches!(self, Termination::BudgetExhausted | Termination::Stalled)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::TargetReached => "target_reached",
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::Stalled => "stalled",
            Termination::NoNeighbors => "no_neighbors",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceVertex {
    pub key: String,
    pub fitness: f64,
    pub multiplicity: u64,
    /// Index of the event that first recorded this vertex.
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEdge {
    pub source: String,
    pub target: String,
    pub count: u64,
    /// Index of the event that first recorded this edge.
    pub seq: u64,
}

/// Everything one sampling repeat discovered.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub params: SamplerParams,
    pub evaluations: u64,
    pub termination: Termination,
    pub space_hash: Option<String>,
    pub evaluator: Option<String>,
    pub vertices: Vec<TraceVertex>,
    pub edges: Vec<TraceEdge>,
}

impl RunTrace {
    pub fn distinct_optima(&self) -> usize {
        self.vertices.len()
    }

    /// Checks the structural invariants: edge endpoints recorded no later than
    /// the edge, no self-loops, unique keys.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut first_seen = HashMap::new();
        for v in &self.vertices {
            if first_seen.insert(v.key.as_str(), v.seq).is_some() {
                return Err(format!("vertex `{}` recorded twice", v.key));
            }
            if v.multiplicity == 0 {
                return Err(format!("vertex `{}` has zero multiplicity", v.key));
            }
        }
        for e in &self.edges {
            if e.source == e.target {
                return Err(format!("self-loop on `{}`", e.source));
            }
            for end in [&e.source, &e.target] {
                match first_seen.get(end.as_str()) {
                    Some(&seq) if seq <= e.seq => {}
                    Some(_) => return Err(format!("edge references `{end}` before it was recorded")),
                    None => return Err(format!("edge references unknown vertex `{end}`")),
                }
            }
        }
        Ok(())
    }
}

/// Accumulates vertex and edge events during a run.
#[derive(Debug, Default)]
pub(crate) struct TraceBuilder {
    vertices: Vec<TraceVertex>,
    edges: Vec<TraceEdge>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<(String, String), usize>,
    events: u64,
}

impl TraceBuilder {
    /// Records a vertex discovery; returns true if the key was new.
    pub(crate) fn add_vertex(&mut self, key: String, fitness: f64) -> bool {
        let seq = self.events;
        self.events += 1;
        if let Some(&i) = self.vertex_index.get(&key) {
            self.vertices[i].multiplicity += 1;
            return false;
        }
        self.vertex_index.insert(key.clone(), self.vertices.len());
        self.vertices.push(TraceVertex {
            key,
            fitness,
            multiplicity: 1,
            seq,
        });
        true
    }

    pub(crate) fn add_edge(&mut self, source: String, target: String) {
        let seq = self.events;
        self.events += 1;
        let pair = (source, target);
        if let Some(&i) = self.edge_index.get(&pair) {
            self.edges[i].count += 1;
            return;
        }
        self.edge_index.insert(pair.clone(), self.edges.len());
        self.edges.push(TraceEdge {
            source: pair.0,
            target: pair.1,
            count: 1,
            seq,
        });
    }

    pub(crate) fn contains(&self, key: &str) -> bool {
        self.vertex_index.contains_key(key)
    }

    pub(crate) fn distinct(&self) -> usize {
        self.vertices.len()
    }

    pub(crate) fn finish(
        self,
        seed: u64,
        params: SamplerParams,
        evaluations: u64,
        termination: Termination,
        space_hash: Option<String>,
    ) -> RunTrace {
        RunTrace {
            seed,
            params,
            evaluations,
            termination,
            space_hash,
            evaluator: None,
            vertices: self.vertices,
            edges: self.edges,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "t")]
enum Record {
    #[serde(rename = "h")]
    Header {
        seed: u64,
        params: SamplerParams,
        evaluations: u64,
        termination: Termination,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        space_hash: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        evaluator: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        producer: Option<serde_json::Value>,
    },
    #[serde(rename = "v")]
    Vertex { k: String, f: f64, n: u64 },
    #[serde(rename = "e")]
    Edge { s: String, d: String, c: u64 },
}

/// Writes a trace as JSON lines: a header record, then vertex and edge records
/// in the order they were first observed.
pub fn write_trace<W: Write>(
    trace: &RunTrace,
    producer: Option<&serde_json::Value>,
    mut out: W,
) -> std::io::Result<()> {
    let header = Record::Header {
        seed: trace.seed,
        params: trace.params.clone(),
        evaluations: trace.evaluations,
        termination: trace.termination,
        space_hash: trace.space_hash.clone(),
        evaluator: trace.evaluator.clone(),
        producer: producer.cloned(),
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;

    let mut events: Vec<(u64, Record)> = trace
        .vertices
        .iter()
        .map(|v| {
            (
                v.seq,
                Record::Vertex {
                    k: v.key.clone(),
                    f: v.fitness,
                    n: v.multiplicity,
                },
            )
        })
        .chain(trace.edges.iter().map(|e| {
            (
                e.seq,
                Record::Edge {
                    s: e.source.clone(),
                    d: e.target.clone(),
                    c: e.count,
                },
            )
        }))
        .collect();
    events.sort_by_key(|(seq, _)| *seq);
    for (_, record) in events {
        writeln!(out, "{}", serde_json::to_string(&record)?)?;
    }
    Ok(())
}

/// Reads a trace written by [`write_trace`]. Sequence numbers are reassigned
/// from record order.
pub fn read_trace<R: BufRead>(input: R) -> Result<RunTrace, FormatError> {
    let mut header = None;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| FormatError::io("trace", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| FormatError::at_line(lineno, e))?;
        let seq = (vertices.len() + edges.len()) as u64;
        match record {
            Record::Header {
                seed,
                params,
                evaluations,
                termination,
                space_hash,
                evaluator,
                ..
            } => {
                if header.is_some() {
                    return Err(FormatError::new(format!("line {lineno}: second header record")));
                }
                header = Some((seed, params, evaluations, termination, space_hash, evaluator));
            }
            Record::Vertex { k, f, n } => vertices.push(TraceVertex {
                key: k,
                fitness: f,
                multiplicity: n,
                seq,
            }),
            Record::Edge { s, d, c } => edges.push(TraceEdge {
                source: s,
                target: d,
                count: c,
                seq,
            }),
        }
    }
    let (seed, params, evaluations, termination, space_hash, evaluator) =
        header.ok_or_else(|| FormatError::new("trace has no header record"))?;
    let trace = RunTrace {
        seed,
        params,
        evaluations,
        termination,
        space_hash,
        evaluator,
        vertices,
        edges,
    };
    trace.check_consistency().map_err(FormatError::new)?;
    Ok(trace)
}
